"""Command line: ``statesum {oracle,train,summarize,evaluate,compare,rouge}``.

Every flag may also come from ``--config FILE``, a flat ``key = value``
file (``#`` starts a comment, keys use the flag names with or without
leading dashes). Flags given on the command line win over the file.

Exit status: 0 on success, 2 for usage or input errors, 1 otherwise.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import oracle as oracle_mod
from .corpus import CorpusError, Summary, align_by_id, lead_baseline, load_corpus, read_jsonl, write_jsonl
from .estimator import OracleLabeler, SummaryStateLabeler, load_checkpoint
from .evaluation import EvalReport, compare, evaluate
from .model import MODES, STATE_VARIANTS, NonFiniteLossError
from .oracle import OracleLabels
from .rouge import rouge_all
from .training import Vocabulary, epoch_losses, summarize, teacher_forced_accuracy

logger = logging.getLogger("statesum")


class InputError(Exception):
    """Bad user input: exit status 2."""


def _add_common(p, workers=False):
    p.add_argument("--config", metavar="FILE", help="flat key = value file of flag defaults")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    if workers:
        p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="statesum", formatter_class=fmt,
                                     description="Extract-then-compress summarization toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", formatter_class=fmt, help="build oracle labels for a corpus")
    p.add_argument("--corpus", required=True, help="input corpus (JSONL)")
    p.add_argument("--output", required=True, help="label file to write (JSONL)")
    p.add_argument("--objective", choices=("extractive", "compressive", "bow"),
                   default="extractive", help="oracle type")
    p.add_argument("--pool", type=int, default=oracle_mod.DEFAULT_POOL,
                   help="extractive candidate pool size p")
    p.add_argument("--extract-max", type=int, default=oracle_mod.DEFAULT_EXTRACT_MAX,
                   help="largest extractive subset m")
    p.add_argument("--beam", type=int, default=oracle_mod.DEFAULT_BEAM,
                   help="compressive beam width n (0 = unbounded)")
    p.add_argument("--max-sents", type=int, default=oracle_mod.DEFAULT_MAX_SENTS,
                   help="most sentences in a compressive oracle")
    p.add_argument("--span-cap", type=int, default=oracle_mod.DEFAULT_SPAN_CAP,
                   help="most deletable spans per sentence")
    p.add_argument("--strict", type=_bool, default=True, help="abort on invalid records")
    _add_common(p, workers=True)

    p = sub.add_parser("train", formatter_class=fmt, help="train the labeler")
    p.add_argument("--corpus", required=True, help="training corpus (JSONL)")
    p.add_argument("--labels", required=True, help="oracle labels aligned by id")
    p.add_argument("--output", required=True, help="checkpoint to write")
    p.add_argument("--log", default=None, help="loss log (JSONL); default OUTPUT.log.jsonl")
    p.add_argument("--validation", default=None, help="validation corpus")
    p.add_argument("--validation-labels", default=None, help="validation oracle labels")
    p.add_argument("--embed-dim", type=int, default=32, help="word embedding size")
    p.add_argument("--hidden-dim", type=int, default=32, help="LSTM hidden size d")
    p.add_argument("--lambda-s0", type=float, default=2.0, help="sentence weight, class 0")
    p.add_argument("--lambda-s1", type=float, default=1.0, help="sentence weight, class 1")
    p.add_argument("--lambda-w0", type=float, default=1.0, help="word weight, class 0")
    p.add_argument("--lambda-w1", type=float, default=0.5, help="word weight, class 1")
    p.add_argument("--learning-rate", type=float, default=0.001, help="Adam step size")
    p.add_argument("--batch-size", type=int, default=2, help="documents per batch")
    p.add_argument("--epochs", type=int, default=5, help="passes over the corpus")
    p.add_argument("--mode", choices=MODES, default="extractive", help="decoder mode")
    p.add_argument("--state-variant", choices=STATE_VARIANTS, default="lstm",
                   help="summary state: LSTM or probability-weighted sum")
    _add_common(p)

    p = sub.add_parser("summarize", formatter_class=fmt, help="summarize a corpus")
    p.add_argument("--corpus", required=True, help="corpus to summarize")
    p.add_argument("--checkpoint", required=True, help="trained checkpoint")
    p.add_argument("--output", required=True, help="summaries file (JSONL)")
    _add_common(p)

    p = sub.add_parser("evaluate", formatter_class=fmt, help="score summaries against references")
    p.add_argument("--corpus", required=True, help="corpus with references")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--summaries", help="summaries file from 'summarize'")
    src.add_argument("--labels", help="oracle label file, scored as summaries")
    src.add_argument("--lead", type=int, metavar="M", help="score the LEAD-M baseline")
    p.add_argument("--output", required=True, help="report file (JSON)")
    p.add_argument("--bin-width", type=int, default=10, help="length histogram bin width")
    _add_common(p, workers=True)

    p = sub.add_parser("compare", formatter_class=fmt, help="tabulate several reports")
    p.add_argument("--report", action="append", required=True, metavar="NAME=PATH",
                   help="named report; repeat per system")
    p.add_argument("--output", default=None, help="text table file (default: stdout)")
    p.add_argument("--csv", default=None, help="also write the table as CSV")
    _add_common(p)

    p = sub.add_parser("rouge", formatter_class=fmt,
                       help="ROUGE F1 of two plain-text files (one sentence per line)")
    p.add_argument("candidate", help="candidate text file")
    p.add_argument("reference", help="reference text file")
    _add_common(p)
    return parser


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def read_config(path):
    """Parse a flat ``key = value`` file into a dict of strings."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split(sep, 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _peek(argv):
    """Find the subcommand and ``--config`` value without full validation."""
    command = config = None
    for k, tok in enumerate(argv):
        if command is None and tok in COMMANDS:
            command = tok
        elif tok == "--config" and k + 1 < len(argv):
            config = argv[k + 1]
        elif tok.startswith("--config="):
            config = tok.split("=", 1)[1]
    return command, config


def _apply_config(parser, argv):
    """Parse ``argv`` with defaults taken from the ``--config`` file, if any."""
    argv = list(sys.argv[1:] if argv is None else argv)
    command, config = _peek(argv)
    if command is None or config is None:
        return parser.parse_args(argv)
    values = read_config(config)
    subparser = parser._subparsers._group_actions[0].choices[command]
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(values) - set(actions))
    if unknown:
        raise InputError(f"unknown config keys for '{command}': {', '.join(unknown)}")
    defaults = {}
    for key, raw in values.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = _bool(raw)
        elif isinstance(action, argparse._AppendAction):
            value = [v.strip() for v in raw.split(",") if v.strip()]
        else:
            try:
                value = action.type(raw) if action.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InputError(f"config key {key!r}: {exc}") from None
            if action.choices is not None and value not in action.choices:
                raise InputError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
        defaults[key] = value
        action.required = False
    for group in subparser._mutually_exclusive_groups:
        if any(a.dest in defaults for a in group._group_actions):
            group.required = False
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _load(path, strict=True):
    if not Path(path).exists():
        raise InputError(f"no such file: {path}")
    return load_corpus(path, strict=strict)


def _load_labels(path, docs):
    if not Path(path).exists():
        raise InputError(f"no such file: {path}")
    try:
        records = align_by_id(docs, read_jsonl(path), "labels")
        labels = [OracleLabels.from_record(r) for r in records]
        for doc, lab in zip(docs, labels):
            lab.check(doc)
    except (KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed label file {path}: {exc}") from None
    return labels


def cmd_oracle(args):
    docs = _load(args.corpus, args.strict)
    labeler = OracleLabeler(args.objective, args.pool, args.extract_max,
                            args.beam or None, args.max_sents, args.span_cap)
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            labels = list(pool.map(labeler.label, docs, chunksize=4))
    else:
        labels = labeler.transform(docs)
    records = []
    heuristic = 0
    for doc, lab in zip(docs, labels):
        rec = lab.to_record(doc.id)
        if args.objective == "compressive":
            rec["span_source"] = "file" if doc.spans is not None else "heuristic"
            heuristic += doc.spans is None
        records.append(rec)
    write_jsonl(records, args.output)
    if heuristic:
        print(f"note: heuristic spans used for {heuristic} of {len(docs)} documents "
              "without annotated spans", file=sys.stderr)
    mean = sum(lab.score for lab in labels) / len(labels) if labels else 0.0
    print(f"{args.objective} oracle: {len(labels)} documents, mean score {mean:.4f}")


def cmd_train(args):
    docs = _load(args.corpus)
    labels = _load_labels(args.labels, docs)
    est = SummaryStateLabeler(
        embed_dim=args.embed_dim, hidden_dim=args.hidden_dim, lambda_s0=args.lambda_s0,
        lambda_s1=args.lambda_s1, lambda_w0=args.lambda_w0, lambda_w1=args.lambda_w1,
        learning_rate=args.learning_rate, batch_size=args.batch_size, epochs=args.epochs,
        mode=args.mode, state_variant=args.state_variant, seed=args.seed)

    val_records = []
    callback = None
    if args.validation:
        if not args.validation_labels:
            raise InputError("--validation needs --validation-labels")
        val_docs = _load(args.validation)
        val_labels = _load_labels(args.validation_labels, val_docs)
        vocab = Vocabulary.from_documents(docs)

        def callback(epoch, params):
            acc = teacher_forced_accuracy(val_docs, val_labels, params, vocab, est._config())
            val_records.append({"epoch": epoch, "validation_accuracy": acc})
            logger.info("epoch %d validation accuracy %.4f", epoch, acc)

    est.fit(docs, labels, callback=callback)
    est.save(args.output)
    log_path = args.log or f"{args.output}.log.jsonl"
    write_jsonl(est.loss_log_ + val_records, log_path)
    losses = epoch_losses(est.loss_log_)
    final = f"{losses[-1]:.6f}" if losses else "n/a"
    print(f"trained {args.epochs} epochs on {len(docs)} documents, final epoch loss {final}")


def cmd_summarize(args):
    docs = _load(args.corpus)
    if not Path(args.checkpoint).exists():
        raise InputError(f"no such file: {args.checkpoint}")
    config, vocab, params = load_checkpoint(args.checkpoint)
    records = []
    for doc in docs:
        summary, probs = summarize(doc, params, vocab, config)
        rec = summary.to_record(doc.id)
        rec["text"] = summary.tokens(doc)
        rec["sentence_probs"] = probs["sentence"]
        records.append(rec)
    write_jsonl(records, args.output)
    print(f"wrote {len(records)} summaries to {args.output}")


def cmd_evaluate(args):
    docs = _load(args.corpus)
    if args.lead is not None:
        summaries = [lead_baseline(doc, args.lead) for doc in docs]
    elif args.labels:
        summaries = [lab.summary() for lab in _load_labels(args.labels, docs)]
    else:
        if not Path(args.summaries).exists():
            raise InputError(f"no such file: {args.summaries}")
        records = align_by_id(docs, read_jsonl(args.summaries), "summaries")
        summaries = [Summary.from_record(r) for r in records]
    report = evaluate(docs, summaries, args.bin_width, args.workers)
    report.save(args.output)
    r = "undefined" if report.pearson_length is None else f"{report.pearson_length:.4f}"
    print(f"R1 {report.mean_r1:.4f}  R2 {report.mean_r2:.4f}  RL {report.mean_rl:.4f}  "
          f"length {report.mean_system_length:.1f}  pearson {r}")


def cmd_compare(args):
    named = []
    for spec in args.report:
        if "=" not in spec:
            raise InputError(f"--report expects NAME=PATH, got {spec!r}")
        name, path = spec.split("=", 1)
        if not Path(path).exists():
            raise InputError(f"no such file: {path}")
        named.append((name, EvalReport.load(path)))
    table = compare(named)
    if args.output:
        Path(args.output).write_text(table.to_text(), encoding="utf-8")
    else:
        sys.stdout.write(table.to_text())
    if args.csv:
        Path(args.csv).write_text(table.to_csv(), encoding="utf-8")


def _read_text(path):
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return [line.split() for line in lines if line.split()]


def cmd_rouge(args):
    r1, r2, rl = rouge_all(_read_text(args.candidate), _read_text(args.reference))
    print(f"R1 {r1.f1:.4f}  R2 {r2.f1:.4f}  RL {rl.f1:.4f}")


COMMANDS = {"oracle": cmd_oracle, "train": cmd_train, "summarize": cmd_summarize,
            "evaluate": cmd_evaluate, "compare": cmd_compare, "rouge": cmd_rouge}


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except InputError as exc:
        print(f"statesum: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (InputError, CorpusError, ValueError) as exc:
        print(f"statesum {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteLossError as exc:
        print(f"statesum {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error")
        print(f"statesum {args.command}: internal error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
