"""Independent scalar-loop reference implementations used only by tests.

Everything here is written with plain Python floats and loops, sharing no code
with the package, so agreement with vectorized kernels is meaningful.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter


def sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def matvec(M, v):
    return [sum(M[i][j] * v[j] for j in range(len(v))) for i in range(len(M))]


def gru(h, x, W, U_zr, U_h, b):
    """Reset/update GRU with stacked [z; r; h~] rows in W and b."""
    H = len(h)
    wx = matvec(W, x)
    uh = matvec(U_zr, h)
    z = [sig(wx[i] + uh[i] + b[i]) for i in range(H)]
    r = [sig(wx[H + i] + uh[H + i] + b[H + i]) for i in range(H)]
    rh = [r[i] * h[i] for i in range(H)]
    u = matvec(U_h, rh)
    ht = [math.tanh(wx[2 * H + i] + u[i] + b[2 * H + i]) for i in range(H)]
    return [(1 - z[i]) * h[i] + z[i] * ht[i] for i in range(H)]


def conv_pool(emb, kernels, biases):
    """emb: T x E lists; kernels[k]: F x (k*E); returns flattened pooled features."""
    T = len(emb)
    out = []
    for k in sorted(kernels):
        K, c = kernels[k], biases[k]
        F = len(K)
        conv = []
        for p in range(T - k + 1):
            window = [emb[p + j][e] for j in range(k) for e in range(len(emb[0]))]
            conv.append([sum(K[f][q] * window[q] for q in range(len(window))) + c[f] for f in range(F)])
        pooled = []
        for p in range(0, len(conv), 2):
            if p + 1 < len(conv):
                pooled.append([max(conv[p][f], conv[p + 1][f]) for f in range(F)])
            else:
                pooled.append(conv[p])
        out.extend(v for row in pooled for v in row)
    return out


def adam_scalar(theta, grads, lr, b1, b2, eps):
    m = v = 0.0
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        theta = theta - lr * mh / (math.sqrt(vh) + eps)
    return theta


# -- metrics ---------------------------------------------------------------


def lcs_brute(a, b):
    """Longest common subsequence by enumerating every subsequence of ``a``."""
    best = 0
    for r in range(len(a) + 1):
        for idx in itertools.combinations(range(len(a)), r):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(any(x == y for y in it) for x in sub):
                best = max(best, r)
    return best


def bleu_brute(hyp, refs, n, eps=1e-9):
    if not hyp:
        return 0.0
    logs = 0.0
    for k in range(1, n + 1):
        grams = [tuple(hyp[i:i + k]) for i in range(len(hyp) - k + 1)]
        total = len(grams)
        match = 0
        for g in set(grams):
            c = grams.count(g)
            mx = max(sum(1 for i in range(len(r) - k + 1) if tuple(r[i:i + k]) == g) for r in refs)
            match += min(c, mx)
        if total == 0:
            p = eps
        else:
            p = match / total if match > 0 else eps / total
        logs += math.log(p)
    c = len(hyp)
    r = min((abs(len(x) - c), len(x)) for x in refs)[1]
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return bp * math.exp(logs / n)


def rouge_brute(hyp, refs, beta=1.2):
    if not hyp:
        return 0.0
    best = 0.0
    for r in refs:
        if not r:
            continue
        l = lcs_brute(hyp, r) if len(hyp) <= len(r) else lcs_brute(r, hyp)
        if l == 0:
            continue
        p, rc = l / len(hyp), l / len(r)
        best = max(best, (1 + beta ** 2) * p * rc / (rc + beta ** 2 * p))
    return best


def cider_brute(hyp, refs, all_refs):
    """Classic CIDEr: idf over albums, per-reference cosine, mean over n, times 10."""
    N = len(all_refs)

    def grams(s, k):
        return Counter(tuple(s[i:i + k]) for i in range(len(s) - k + 1))

    total = 0.0
    for k in range(1, 5):
        df = Counter()
        for album in all_refs:
            seen = set()
            for r in album:
                seen |= set(grams(r, k))
            for g in seen:
                df[g] += 1

        def vec(s):
            tf = grams(s, k)
            return {g: c * (math.log(N) - math.log(max(1.0, df[g]))) for g, c in tf.items()}

        vh = vec(hyp)
        nh = math.sqrt(sum(x * x for x in vh.values()))
        sims = []
        for r in refs:
            vr = vec(r)
            nr = math.sqrt(sum(x * x for x in vr.values()))
            dot = sum(vh[g] * vr.get(g, 0.0) for g in vh)
            sims.append(dot / (nh * nr) if nh > 0 and nr > 0 else 0.0)
        total += sum(sims) / len(sims)
    return 10.0 * total / 4


def meteor_brute_alignment(hyp, r):
    """(matches, chunks): largest one-to-one exact alignment, fewest chunks among those."""
    # every maximum alignment pairs, per token type, min(count) occurrences; enumerate
    # which occurrences are used and how they are paired
    per_type = []
    for tok in set(hyp) & set(r):
        hi = [i for i, x in enumerate(hyp) if x == tok]
        ri = [j for j, y in enumerate(r) if y == tok]
        k = min(len(hi), len(ri))
        options = []
        for hs in itertools.combinations(hi, k):
            for rs in itertools.permutations(ri, k):
                options.append(list(zip(hs, rs)))
        per_type.append(options)
    if not per_type:
        return 0, 0
    matches = sum(len(options[0]) for options in per_type)
    best = None
    for choice in itertools.product(*per_type):
        al = sorted(p for part in choice for p in part)
        ch = 1 + sum(1 for a, b in zip(al, al[1:]) if not (b[0] == a[0] + 1 and b[1] == a[1] + 1))
        best = ch if best is None else min(best, ch)
    return matches, best


def meteor_brute(hyp, refs):
    """Exact-match METEOR-lite by enumerating every maximum alignment."""
    best = 0.0
    for r in refs:
        m_best, ch_best = meteor_brute_alignment(hyp, r)
        if m_best == 0:
            continue
        P, R = m_best / len(hyp), m_best / len(r)
        f = 10 * P * R / (R + 9 * P)
        best = max(best, f * (1 - 0.5 * (ch_best / m_best) ** 3))
    return best
