"""Command-line surface for the full pipeline.

Subcommands: preprocess, distant-extract, pretrain, distant-train, train,
predict, ensemble, quantify, evaluate, gradcheck, correlate.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric-check
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt_io
from . import ensemble as ens
from . import gradcheck as gc
from . import metrics
from .config import RunConfig
from .corpus import (SUBTASKS, Vocabulary, build_vocab, extract_distant,
                     load_labeled)
from .errors import DataError
from .pretrain import SkipGramConfig, train_skipgram
from .text import TokenizedTweet, load_rules, normalize, tokenize
from .train import (CnnArch, LstmArch, TrainSchedule, distant_train, predict,
                    supervised_train)

USAGE_EXIT = 1
DATA_EXIT = 2
NUMERIC_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _fmt(x: float) -> str:
    return repr(float(x))  # shortest form that parses back bit-exactly


def _write_lines(path: str, lines: list[str]) -> None:
    Path(path).write_text("".join(line + "\n" for line in lines),
                          encoding="utf-8")


def _read_token_lines(path: str) -> list[list[str]]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        toks = line.split()
        if toks:
            out.append(toks)
    return out


def _read_preds(path: str) -> tuple[list[str], np.ndarray]:
    ids: list[str] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise DataError(f"{path}:{lineno}: expected id and probabilities")
        try:
            rows.append([float(v) for v in parts[1:]])
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad probability") from None
        ids.append(parts[0])
    if not ids:
        raise DataError(f"no predictions in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DataError(f"ragged probability rows in {path}")
    return ids, np.asarray(rows, dtype=np.float64)


def _write_preds(path: str, ids: list[str], probs: np.ndarray) -> None:
    _write_lines(path, [i + "\t" + "\t".join(_fmt(v) for v in row)
                        for i, row in zip(ids, probs)])


def _cnn_arch(cfg: RunConfig) -> CnnArch:
    return CnnArch(filter_sizes=cfg.filter_sizes,
                   filters_per_size=cfg.filters_per_size, hidden=cfg.hidden,
                   s_prime=cfg.s_prime, dropout_p=cfg.dropout)


def _lstm_arch(cfg: RunConfig) -> LstmArch:
    return LstmArch(m=cfg.lstm_m, hidden=cfg.hidden, s_prime=cfg.s_prime,
                    dropout_p=cfg.dropout)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_preprocess(args) -> int:
    cfg = RunConfig.load(args.config)
    rules = load_rules(args.rules or cfg.emoticon_rules or None)
    lines = Path(args.infile).read_text(encoding="utf-8").splitlines()
    out = [" ".join(tokenize(normalize(line, rules))) for line in lines]
    _write_lines(args.out, out)
    return 0


def _cmd_distant_extract(args) -> int:
    cfg = RunConfig.load(args.config)
    rules = load_rules(args.rules or cfg.emoticon_rules or None)
    lines = Path(args.infile).read_text(encoding="utf-8").splitlines()
    pos, neg = extract_distant(lines, rules)
    _write_lines(args.out_pos, [" ".join(t.tokens) for t in pos])
    _write_lines(args.out_neg, [" ".join(t.tokens) for t in neg])
    print(f"positives\t{len(pos)}\nnegatives\t{len(neg)}")
    return 0


def _cmd_pretrain(args) -> int:
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    sentences = _read_token_lines(args.corpus)
    vocab = build_vocab(sentences, min_count=cfg.min_count)
    sg = SkipGramConfig(dim=cfg.d, window=cfg.sg_window,
                        negatives=cfg.sg_negatives, epochs=cfg.sg_epochs,
                        initial_lr=cfg.sg_lr, min_lr=cfg.sg_min_lr,
                        subsample_t=cfg.sg_subsample,
                        table_size=cfg.sg_table_size, seed=seed)
    emb = train_skipgram(sentences, vocab, sg, log=print)
    vocab.save(args.out_vocab)
    ckpt_io.save_checkpoint(
        args.out, ckpt_io.pack_embedding(emb, vocab, seed=seed,
                                         epochs=sg.epochs))
    return 0


def _cmd_distant_train(args) -> int:
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    vocab = Vocabulary.load(args.vocab)
    emb = ckpt_io.unpack_embedding(
        ckpt_io.load_checkpoint(args.emb, vocab=vocab))
    pos = [TokenizedTweet(tokens=t) for t in _read_token_lines(args.pos)]
    neg = [TokenizedTweet(tokens=t) for t in _read_token_lines(args.neg)]
    sched = TrainSchedule(phase="distant",
                          frozen_epochs=cfg.distant_frozen_epochs,
                          unfrozen_epochs=cfg.distant_unfrozen_epochs,
                          lr_initial=cfg.lr, lr_unfrozen_scale=1.0,
                          batch_size=cfg.batch_size)
    tuned = distant_train(emb, pos, neg, vocab, sched=sched, seed=seed,
                          arch=_cnn_arch(cfg), log=print)
    ckpt_io.save_checkpoint(
        args.out, ckpt_io.pack_embedding(tuned, vocab, seed=seed,
                                         epochs=sched.total_epochs))
    return 0


def _cmd_train(args) -> int:
    cfg = RunConfig.load(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    subtask = SUBTASKS[args.subtask]
    vocab = Vocabulary.load(args.vocab)
    emb = ckpt_io.unpack_embedding(
        ckpt_io.load_checkpoint(args.emb, vocab=vocab))
    rules = load_rules(cfg.emoticon_rules or None)
    data = load_labeled(args.data, subtask, rules)
    sched = TrainSchedule(phase="supervised",
                          frozen_epochs=cfg.sup_frozen_epochs,
                          unfrozen_epochs=cfg.sup_unfrozen_epochs,
                          lr_initial=cfg.lr, lr_unfrozen_scale=0.1,
                          batch_size=cfg.batch_size)
    arch = _cnn_arch(cfg) if args.kind == "cnn" else _lstm_arch(cfg)
    model = supervised_train(args.kind, subtask, data, emb, vocab,
                             sched=sched, seed=seed, arch=arch, log=print)
    ckpt_io.save_checkpoint(args.out, ckpt_io.pack_model(model, seed=seed))
    return 0


def _load_examples_for_model(data_path: str, subtask_id: str,
                             cfg: RunConfig):
    rules = load_rules(cfg.emoticon_rules or None)
    return load_labeled(data_path, SUBTASKS[subtask_id], rules)


def _cmd_predict(args) -> int:
    cfg = RunConfig.load(args.config)
    vocab = Vocabulary.load(args.vocab)
    model = ckpt_io.unpack_model(
        ckpt_io.load_checkpoint(args.model, vocab=vocab), vocab)
    data = _load_examples_for_model(args.data, model.subtask.id, cfg)
    probs = predict(model, data)
    _write_preds(args.out, [ex.id for ex in data], np.stack(probs))
    return 0


def _cmd_ensemble(args) -> int:
    if not args.preds and not (args.members and args.vocab and args.data):
        print("ensemble: need --preds or all of --members/--vocab/--data",
              file=sys.stderr)
        return USAGE_EXIT
    if args.preds:
        ids0, mat = _read_preds(args.preds[0])
        stacks = [mat]
        for p in args.preds[1:]:
            ids, m = _read_preds(p)
            if ids != ids0:
                raise DataError(f"prediction ids in {p} do not match "
                                f"{args.preds[0]}")
            stacks.append(m)
    else:
        cfg = RunConfig.load(args.config)
        vocab = Vocabulary.load(args.vocab)
        members = []
        for lineno, line in enumerate(
                Path(args.members).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(
                    f"{args.members}:{lineno}: expected kind<TAB>path")
            members.append(parts)
        if not members:
            raise DataError(f"no members in {args.members}")
        data = None
        ids0 = None
        stacks = []
        for kind, path in members:
            model = ckpt_io.unpack_model(
                ckpt_io.load_checkpoint(path, vocab=vocab), vocab)
            if model.kind != kind:
                raise DataError(
                    f"member {path} is a {model.kind}, listed as {kind}")
            if data is None:
                data = _load_examples_for_model(args.data, model.subtask.id, cfg)
                ids0 = [ex.id for ex in data]
            stacks.append(np.stack(predict(model, data)))
    voted = np.stack([ens.soft_vote([m[i] for m in stacks])
                      for i in range(len(ids0))])
    _write_preds(args.out, ids0, voted)
    return 0


def _cmd_quantify(args) -> int:
    ids, mat = _read_preds(args.preds)
    if args.data and args.subtask:
        cfg = RunConfig.load(args.config)
        data = _load_examples_for_model(args.data, args.subtask, cfg)
        by_id = {ex.id: ex for ex in data}
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise DataError(f"prediction ids missing from data: {missing[:5]}")
        groups: dict[str, list[np.ndarray]] = {}
        for i, row in zip(ids, mat):
            groups.setdefault(by_id[i].topic or "all", []).append(row)
        lines = []
        for topic in sorted(groups):
            dist = ens.quantify(groups[topic])
            lines.append(topic + "\t" + "\t".join(_fmt(v) for v in dist))
    else:
        dist = ens.quantify(list(mat))
        lines = ["all\t" + "\t".join(_fmt(v) for v in dist)]
    _write_lines(args.out, lines)
    return 0


def _cmd_evaluate(args) -> int:
    subtask = SUBTASKS[args.subtask]
    n_test = args.n_test if args.n_test else None
    report = metrics.evaluate(subtask, args.gold, args.pred, n_test=n_test)
    print(f"{report.metric}\t{_fmt(report.value)}")
    for name in sorted(report.extras):
        print(f"{name}\t{_fmt(report.extras[name])}")
    return 0


def _cmd_correlate(args) -> int:
    mats = []
    ids0 = None
    for p in args.preds:
        ids, m = _read_preds(p)
        if ids0 is None:
            ids0 = ids
        elif ids != ids0:
            raise DataError(f"prediction ids in {p} do not match {args.preds[0]}")
        mats.append(m)
    corr = ens.pearson_matrix(mats)
    lines = ["\t".join(_fmt(v) for v in row) for row in corr]
    body = "\n".join(lines)
    if args.out:
        _write_lines(args.out, lines)
    print(body)
    return 0


def _cmd_gradcheck(args) -> int:
    seed = args.seed if args.seed is not None else 0
    rows = gc.run_suite(base_seed=seed, seeds=args.num_seeds)
    failed = False
    for name, err in rows:
        status = "ok" if err < gc.TOLERANCE else "FAIL"
        if err >= gc.TOLERANCE:
            failed = True
        print(f"{name}\t{err:.3e}\t{status}")
    return NUMERIC_EXIT if failed else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tweetpolarity",
                     description="Tweet sentiment pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", default=None,
                       help="key=value config file (or $TWEETPOLARITY_CONFIG)")
        if seed:
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("preprocess", help="normalize and tokenize raw tweets")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rules", default=None)
    common(p, seed=False)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("distant-extract",
                       help="split raw tweets into noisy positives/negatives")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-pos", required=True)
    p.add_argument("--out-neg", required=True)
    p.add_argument("--rules", default=None)
    common(p, seed=False)
    p.set_defaults(func=_cmd_distant_extract)

    p = sub.add_parser("pretrain", help="skip-gram embedding pretraining")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--out-vocab", required=True)
    common(p)
    p.set_defaults(func=_cmd_pretrain)

    p = sub.add_parser("distant-train",
                       help="fine-tune embeddings on the distant corpus")
    p.add_argument("--emb", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--pos", required=True)
    p.add_argument("--neg", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_distant_train)

    p = sub.add_parser("train", help="supervised training of one model")
    p.add_argument("--kind", choices=("cnn", "bilstm"), required=True)
    p.add_argument("--subtask", choices=sorted(SUBTASKS), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--emb", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="write per-tweet class probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    common(p, seed=False)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("ensemble", help="soft-vote prediction files or members")
    p.add_argument("--preds", nargs="*", default=None,
                   help="prediction TSVs to average")
    p.add_argument("--members", default=None,
                   help="kind<TAB>checkpoint member-spec file")
    p.add_argument("--vocab", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--out", required=True)
    common(p, seed=False)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("quantify",
                       help="average probabilities into prevalence rows")
    p.add_argument("--preds", required=True)
    p.add_argument("--data", default=None,
                   help="labeled TSV supplying per-id topics")
    p.add_argument("--subtask", choices=sorted(SUBTASKS), default=None)
    p.add_argument("--out", required=True)
    common(p, seed=False)
    p.set_defaults(func=_cmd_quantify)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--subtask", choices=sorted(SUBTASKS), required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--n-test", dest="n_test", type=int, default=None,
                   help="test-set size for KLD smoothing (subtask D)")
    common(p, seed=False)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("gradcheck",
                       help="finite-difference check of every backward pass")
    p.add_argument("--num-seeds", type=int, default=20)
    common(p)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("correlate",
                       help="Pearson correlation between prediction files")
    p.add_argument("--preds", nargs="+", required=True)
    p.add_argument("--out", default=None)
    common(p, seed=False)
    p.set_defaults(func=_cmd_correlate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_EXIT


def _entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    _entry()
