"""Command-line entry point: ``arel <subcommand> ...`` or ``python -m arel``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..data import Vocab, build_vocab, flatten_words
from ..metrics import metric_attack
from ..metrics.scores import METRICS
from ..objectives import build_models, preset
from ..objectives.config import MODES
from .corpus import CorpusSpec, generate_corpus, read_corpus, spec_to_dict, split_corpus, write_corpus
from .run import decode_split, evaluate_stories, load_run, reward_report, train_run, write_stories
from .stats import corpus_ratio


def _words(s: str) -> list[str]:
    return [w for w in s.split(",") if w]


def cmd_gen_data(a) -> None:
    spec = CorpusSpec(a.n_albums, a.n_topics, a.feat_dim, a.refs, a.noise, a.seed)
    albums = generate_corpus(spec)
    train, val, test = split_corpus(albums, a.n_train, a.n_val)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", train), ("val", val), ("test", test)):
        write_corpus(out / f"{name}.jsonl", part)
    (out / "spec.json").write_text(json.dumps(spec_to_dict(spec), indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(train)}/{len(val)}/{len(test)} albums to {out}")


def cmd_build_vocab(a) -> None:
    vocab = build_vocab(read_corpus(a.data), a.min_count)
    vocab.save(a.out)
    print(f"vocab size {len(vocab)} -> {a.out}")


def cmd_train(a) -> None:
    overrides = {k: v for k, v in dict(
        mode=a.mode, metric=a.metric, activation=a.activation, fusion=a.fusion, alt_period=a.alt_period,
        lr=a.lr, reward_lr=a.reward_lr, seed=a.seed, batch_size=a.batch_size, epochs=a.epochs, episodes=a.episodes,
        entropy_weight=a.entropy_weight, entropy_mode=a.entropy_mode, reward_credit=a.reward_credit,
        temperature=a.temperature, ss_max=a.ss_max, log_timing=a.log_timing,
    ).items() if v is not None}
    cfg = preset(a.preset, **overrides)
    albums = read_corpus(a.data)
    vocab = Vocab.load(a.vocab)
    run = train_run(cfg, albums, vocab, a.out, a.init_from)
    print(f"trained {cfg.mode} -> {a.out} ({run.policy.params.size()} policy parameters)")


def cmd_eval(a) -> None:
    run = load_run(a.run)
    albums = read_corpus(a.data)
    stories = decode_split(run.policy, albums, a.beam, a.min_len, a.max_len)
    report = evaluate_stories(stories, albums, run.vocab)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "report.csv")
    report.write_histograms(out)
    write_stories(out / "stories.txt", albums, stories, run.vocab)
    print(" ".join(f"{k}={100 * v:.2f}" for k, v in report.means.items()))


def cmd_sample(a) -> None:
    run = load_run(a.run)
    albums = read_corpus(a.data)
    if a.limit is not None:
        albums = albums[: a.limit]
    stories = decode_split(run.policy, albums, a.beam, a.min_len, a.max_len)
    if a.out:
        write_stories(a.out, albums, stories, run.vocab)
    else:
        for album, s in zip(albums, stories):
            print(album.album_id + "\t" + " | ".join(" ".join(x) for x in run.vocab.decode_story(s)))


def cmd_attack(a) -> None:
    albums = read_corpus(a.data)
    refs = [[flatten_words(r) for r in al.references] for al in albums]
    hyp, scores = metric_attack(a.metric, refs, a.budget, seed=a.seed)
    rec = {"metric": a.metric, "budget": a.budget, "seed": a.seed,
           "hypothesis": " ".join(hyp), "scores": scores}
    text = json.dumps(rec, indent=1, sort_keys=True) + "\n"
    if a.out:
        Path(a.out).write_text(text)
    print(text, end="")


def cmd_reward_report(a) -> None:
    run = load_run(a.run)
    if run.reward is None:
        sys.exit(f"{a.run} has no reward model")
    albums = read_corpus(a.data)
    untrained, _ = build_models(run.config.with_(seed=a.untrained_seed), len(run.vocab), run.feat_dim)
    rep = reward_report(run.policy, run.reward, albums, run.vocab, untrained, seed=a.seed, beam=a.beam)
    if a.out:
        rep.write_csv(a.out)
    print(" ".join(f"{k}={v:.4f}" for k, v in rep.summary.items()))


def cmd_stats(a) -> None:
    r = corpus_ratio(read_corpus(a.data), _words(a.set_a), _words(a.set_b))
    print(f"ratio={r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arel", description="Adversarial reward learning for story generation")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic train/val/test corpus")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--n-albums", type=int, default=2400)
    g.add_argument("--n-train", type=int, default=2000)
    g.add_argument("--n-val", type=int, default=200)
    g.add_argument("--n-topics", type=int, default=16)
    g.add_argument("--feat-dim", type=int, default=64)
    g.add_argument("--refs", type=int, default=5)
    g.add_argument("--noise", type=float, default=2.5)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(fn=cmd_gen_data)

    v = sub.add_parser("build-vocab", help="build a vocabulary from a corpus file")
    v.add_argument("--data", required=True)
    v.add_argument("--out", required=True)
    v.add_argument("--min-count", type=int, default=3)
    v.set_defaults(fn=cmd_build_vocab)

    t = sub.add_parser("train", help="train a policy (and reward model in adversarial modes)")
    t.add_argument("--data", required=True)
    t.add_argument("--vocab", required=True)
    t.add_argument("--out", required=True, help="run directory to write")
    t.add_argument("--mode", choices=MODES, required=True)
    t.add_argument("--preset", choices=("desk", "full"), default="desk")
    t.add_argument("--metric", choices=sorted(METRICS))
    t.add_argument("--activation", choices=("softsign", "tanh"))
    t.add_argument("--fusion", choices=("sum", "concat"))
    t.add_argument("--alt-period", type=int)
    t.add_argument("--lr", type=float, help="policy step size")
    t.add_argument("--reward-lr", type=float, help="reward-model step size (default: --lr)")
    t.add_argument("--seed", type=int)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--epochs", type=int)
    t.add_argument("--episodes", type=int)
    t.add_argument("--entropy-weight", type=float)
    t.add_argument("--entropy-mode", choices=("story", "token_mean"))
    t.add_argument("--reward-credit", choices=("partial", "story"))
    t.add_argument("--temperature", type=float)
    t.add_argument("--ss-max", type=float)
    t.add_argument("--log-timing", action="store_true", default=None,
                   help="record wall-clock ms per episode (breaks byte-identical logs)")
    t.add_argument("--init-from", help="run directory whose policy initializes this run")
    t.set_defaults(fn=cmd_train)

    def decoding(sp):
        sp.add_argument("--run", required=True)
        sp.add_argument("--data", required=True)
        sp.add_argument("--beam", type=int, default=3)
        sp.add_argument("--min-len", type=int, default=5)
        sp.add_argument("--max-len", type=int, default=110, help="whole-story token cap")

    e = sub.add_parser("eval", help="beam-decode a split and write metric report + histograms")
    decoding(e)
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(fn=cmd_eval)

    s = sub.add_parser("sample", help="print beam-search stories")
    decoding(s)
    s.add_argument("--limit", type=int)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_sample)

    at = sub.add_parser("attack", help="hill-climb one string that games a metric")
    at.add_argument("--data", required=True)
    at.add_argument("--metric", choices=sorted(METRICS), default="rouge-l")
    at.add_argument("--budget", type=int, default=2000)
    at.add_argument("--seed", type=int, default=0)
    at.add_argument("--out")
    at.set_defaults(fn=cmd_attack)

    r = sub.add_parser("reward-report", help="learned reward of references vs. generated stories")
    r.add_argument("--run", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--beam", type=int, default=3)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--untrained-seed", type=int, default=0,
                   help="init seed of the untrained policy whose samples are also scored")
    r.add_argument("--out")
    r.set_defaults(fn=cmd_reward_report)

    st = sub.add_parser("stats", help="occurrence ratio of two token sets over all references")
    st.add_argument("--data", required=True)
    st.add_argument("--set-a", required=True, help="comma-separated tokens")
    st.add_argument("--set-b", required=True, help="comma-separated tokens")
    st.set_defaults(fn=cmd_stats)
    return p


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    args.fn(args)


if __name__ == "__main__":
    main()
