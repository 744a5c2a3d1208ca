import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arel.numerics import (Adam, NumericsError, ParamStore, Tape, adam_step, conv1d_bank, grad_check,
                           gru_cell, load_params, save_params, softmax)
from arel.numerics import autodiff as ad
from arel.numerics.kernels import add_conv_bank, add_gru, conv_bank_dim

from . import oracles

finite = st.floats(-50, 50, allow_nan=False)


def gru_store(X, H, seed=0, scale=1.0):
    s = ParamStore(seed)
    add_gru(s, "g", X, H)
    rng = np.random.default_rng(seed)
    for n in s:
        s.set(n, scale * rng.normal(size=s.value(n).shape))
    return s


# -- GRU -----------------------------------------------------------------


def test_gru_zero_params_halves_state():
    s = ParamStore()
    add_gru(s, "g", 2, 3)
    for n in s:
        s.set(n, np.zeros_like(s.value(n)))
    v = np.array([[0.4, -1.0, 2.0]])
    out = gru_cell(v, np.ones((1, 2)), s.bind(None), "g").value
    assert np.allclose(out, 0.5 * v, atol=0)
    assert np.all(gru_cell(np.zeros((1, 3)), np.ones((1, 2)), s.bind(None), "g").value == 0)


def test_gru_matches_scalar_oracle(rng):
    s = gru_store(X=4, H=3, seed=3)
    h = rng.normal(size=3)
    x = rng.normal(size=4)
    got = gru_cell(h[None], x[None], s.bind(None), "g").value[0]
    want = oracles.gru(h.tolist(), x.tolist(), s.value("g.W").tolist(), s.value("g.U_zr").tolist(),
                       s.value("g.U_h").tolist(), s.value("g.b").tolist())
    assert np.allclose(got, want, rtol=0, atol=1e-13)


def test_gru_rejects_bad_input():
    s = gru_store(2, 3)
    with pytest.raises(NumericsError):
        gru_cell(np.zeros((1, 4)), np.zeros((1, 2)), s.bind(None), "g")
    with pytest.raises(NumericsError):
        gru_cell(np.zeros((1, 3)), np.array([[np.nan, 0.0]]), s.bind(None), "g")


def test_gru_gradients():
    s = gru_store(X=3, H=4, seed=1, scale=0.7)
    x = np.random.default_rng(2).normal(size=(2, 3))
    h0 = np.random.default_rng(3).normal(size=(2, 4))
    w = np.random.default_rng(4).normal(size=(2, 4))

    def f(store, tape):
        P = store.bind(tape)
        h = gru_cell(h0, x, P, "g")
        h = gru_cell(h, x[::-1], P, "g")
        return ad.total(h, w)

    assert grad_check(f, s, n_probes=100) < 1e-4


# -- softmax / activations ---------------------------------------------------


def test_softmax_examples():
    assert np.allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, atol=1e-15)
    assert np.allclose(softmax([0.0, math.log(2)]), [1 / 3, 2 / 3], atol=1e-15)
    x = np.array([0.3, -1.2, 2.0])
    assert np.allclose(softmax(x + 1e3), softmax(x), atol=1e-9)
    with pytest.raises(NumericsError):
        softmax([0.0, np.inf])


@given(st.lists(finite, min_size=1, max_size=12), st.floats(-1e3, 1e3))
def test_softmax_properties(xs, c):
    p = softmax(xs)
    assert abs(p.sum() - 1) < 1e-12
    assert np.all(p >= 0)
    assert np.allclose(softmax(np.array(xs) + c), p, atol=1e-9)


def test_softmax_strictly_inside_unit_interval_for_moderate_logits():
    p = softmax([1.0, 2.0, -3.0])
    assert np.all((p > 0) & (p < 1))


def test_activation_values():
    assert ad.softsign(0.0).value == 0 and ad.tanh(0.0).value == 0
    assert ad.softsign(1.0).value == 0.5
    assert ad.softsign(-3.0).value == -0.75


@given(st.floats(-1e300, 1e300, allow_nan=False))
def test_softsign_bounded(x):
    assert -1 < ad.softsign(np.array(x)).value < 1


@given(st.floats(-1e300, 1e300, allow_nan=False))
def test_tanh_bounded(x):
    assert -1 < ad.tanh(np.array(x)).value < 1


# -- conv bank -------------------------------------------------------------


def conv_store(E, F, seed=0):
    s = ParamStore(seed)
    add_conv_bank(s, "c", E, F)
    rng = np.random.default_rng(seed)
    for n in s:
        s.set(n, rng.normal(size=s.value(n).shape))
    return s


def test_conv_all_ones_constant_embedding():
    E, c = 3, 0.7
    s = ParamStore()
    s.add("c.K2", np.ones((1, 2 * E)))
    s.add("c.c2", np.zeros(1))
    emb = np.full((1, 5, E), c)
    # k=2 on length 5: 4 positions -> 2 pooled values, each 2*E*c
    out = conv1d_bank(emb, s.bind(None), "c", kernel_sizes=(2,)).value
    assert out.shape == (1, 2)
    assert np.allclose(out, 2 * E * c, atol=1e-14)


def test_conv_single_position_pools_to_itself():
    s = conv_store(E=2, F=1, seed=5)
    emb = np.random.default_rng(0).normal(size=(1, 4, 2))
    out = conv1d_bank(emb, s.bind(None), "c", kernel_sizes=(4,)).value
    want = s.value("c.K4")[0] @ emb[0].ravel() + s.value("c.c4")[0]
    assert out.shape == (1, 1) and abs(out[0, 0] - want) < 1e-13


def test_conv_matches_scalar_oracle():
    E, F, T = 2, 1, 6
    s = conv_store(E, F, seed=9)
    emb = np.random.default_rng(11).normal(size=(T, E))
    got = conv1d_bank(emb[None], s.bind(None), "c").value[0]
    want = oracles.conv_pool(emb.tolist(), {k: s.value(f"c.K{k}").tolist() for k in (2, 3, 4)},
                             {k: s.value(f"c.c{k}").tolist() for k in (2, 3, 4)})
    assert got.shape == (conv_bank_dim(T, F),)
    assert np.allclose(got, want, rtol=0, atol=1e-13)


def test_conv_rejects_empty():
    s = conv_store(2, 1)
    with pytest.raises(NumericsError):
        conv1d_bank(np.zeros((1, 0, 2)), s.bind(None), "c")


def test_conv_gradients():
    s = conv_store(E=3, F=2, seed=4)
    s.add("emb", np.random.default_rng(1).normal(size=(7, 3)))
    ids = np.array([[1, 4, 2, 6, 0, 3, 5], [2, 2, 1, 0, 0, 0, 0]])
    w = np.random.default_rng(2).normal(size=(2, conv_bank_dim(7, 2)))

    def f(store, tape):
        P = store.bind(tape)
        return ad.total(conv1d_bank(ad.take_rows(P["emb"], ids), P, "c"), w)

    assert grad_check(f, s, n_probes=100) < 1e-6


# -- primitive gradients -------------------------------------------------------


def test_primitive_gradients():
    s = ParamStore(0)
    rng = np.random.default_rng(0)
    s.add("a", rng.normal(size=(3, 4)))
    s.add("b", rng.normal(size=(4,)))
    s.add("W", rng.normal(size=(5, 4)))
    targets = np.array([0, 4, 2])
    allowed = np.array([True, False, True, True, True])

    def f(store, tape):
        P = store.bind(tape)
        a, b = P["a"], P["b"]
        x = ad.sigmoid(a) * ad.tanh(a + b) - ad.softsign(a * 2.0) + ad.exp(a * 0.1)
        y = ad.concat([x, ad.reshape(a, (3, 4))], axis=1)[:, 2:6]
        logits = ad.linear(y, P["W"], None)
        s1 = ad.total(ad.log_softmax_pick(logits, targets, allowed))
        s2 = ad.total(ad.log_sigmoid(ad.stack([b, -b], axis=0)))
        return s1 + s2

    assert grad_check(f, s, n_probes=100) < 1e-6


def test_log_softmax_linear_layer_gradient():
    s = ParamStore(0)
    rng = np.random.default_rng(1)
    s.add("W", rng.normal(size=(6, 4)))
    s.add("b", rng.normal(size=(6,)))
    x = rng.normal(size=(1, 4))

    def f(store, tape):
        P = store.bind(tape)
        return ad.total(ad.log_softmax_pick(ad.linear(x, P["W"], P["b"]), [3]))

    assert grad_check(f, s, n_probes=30, eps=1e-5) < 1e-6


def test_grad_check_quadratic():
    s = ParamStore(0)
    s.add("t", np.array([0.7, -1.3, 2.1]))
    assert grad_check(lambda st_, tape: ad.total(st_.bind(tape)["t"] * st_.bind(tape)["t"]), s) < 1e-9


def test_tape_reverse_order_and_clear():
    order = []
    t = Tape()
    for i in range(4):
        t.record(lambda i=i: order.append(i))
    out = ad.Var(np.array(1.0), t)
    t.backward(out)
    assert order == [3, 2, 1, 0]
    assert len(t) == 0
    s = ParamStore(0)
    s.add("p", np.ones(3))
    t = Tape()
    P = s.bind(t)
    ad.total(P["p"] * 3.0)
    t.clear()
    assert len(t) == 0 and np.all(s.grad("p") == 0)


# -- Adam ------------------------------------------------------------------


def scalar_store(v=0.0):
    s = ParamStore(0)
    s.add("x", np.array([v]))
    return s


def test_adam_zero_gradient_keeps_params():
    s = scalar_store(1.5)
    opt = Adam(0.1)
    for _ in range(3):
        opt.step(s)
    assert s.value("x")[0] == 1.5


def test_adam_first_step():
    s = scalar_store(0.0)
    s.grad("x")[:] = 1.0
    adam_step(s, 0.1, (0.9, 0.999), 1e-8, 1, {}, {})
    assert abs(s.value("x")[0] + 0.1) < 1e-8


def test_adam_three_step_trace():
    grads = [0.5, -2.0, 1.25]
    s = scalar_store(0.3)
    opt = Adam(0.05, (0.8, 0.99), 1e-6)
    for g in grads:
        s.grad("x")[:] = g
        opt.step(s)
    want = oracles.adam_scalar(0.3, grads, 0.05, 0.8, 0.99, 1e-6)
    assert abs(s.value("x")[0] - want) < 1e-15


def test_adam_rejects_step_zero_and_nonfinite():
    s = scalar_store()
    with pytest.raises(NumericsError):
        adam_step(s, 0.1, (0.9, 0.999), 1e-8, 0, {}, {})
    s.grad("x")[:] = np.nan
    with pytest.raises(NumericsError):
        Adam(0.1).step(s)


def test_same_seed_same_trajectory():
    def run():
        s = gru_store(3, 2, seed=7)
        opt = Adam(0.01)
        x = np.ones((1, 3))
        for _ in range(5):
            s.zero_grad()
            t = Tape()
            t.backward(ad.total(gru_cell(np.ones((1, 2)), x, s.bind(t), "g")))
            opt.step(s)
        return s.flat_values()

    assert np.array_equal(run(), run())


# -- ParamStore / checkpoints ------------------------------------------------


def test_glorot_range_and_zero_bias():
    s = ParamStore(3)
    w = s.glorot("w", (40, 60))
    a = math.sqrt(6 / 100)
    assert np.all(np.abs(w) <= a) and w.std() > a / 3
    assert np.all(s.zeros("b", (4,)) == 0)
    assert np.array_equal(ParamStore(3).glorot("w", (40, 60)), w)


def test_checkpoint_round_trip(tmp_path):
    s = gru_store(3, 2, seed=5)
    s.value("g.W")[0, 0] = 1e-310  # subnormal survives
    save_params(s, tmp_path / "m")
    r = load_params(tmp_path / "m")
    assert r.equal(s) and r.rng_seed == s.rng_seed and r.names() == s.names()
    text = (tmp_path / "m.manifest").read_text().splitlines()
    assert text[0] == "rng_seed=5"
    assert text[1].startswith("name=g.W shape=6,3 offset=0 count=18")
    assert (tmp_path / "m.bin").stat().st_size == 8 * s.size()
    save_params(r, tmp_path / "n")
    assert (tmp_path / "n.bin").read_bytes() == (tmp_path / "m.bin").read_bytes()


def test_nonfinite_store_detected():
    s = scalar_store()
    s.value("x")[0] = np.inf
    with pytest.raises(NumericsError):
        s.check_finite()
