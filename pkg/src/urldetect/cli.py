"""Command-line entry point: train, eval, predict, serve, inspect.

Exit codes: 0 success, 1 usage error, 2 runtime failure (reported as one
`error: <Kind>: message` line on stderr).
"""

from __future__ import annotations

import os

# Keep the BLAS single-threaded: fixed-order reductions and honest
# single-core timings. Must be set before numpy first loads.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse
import json
import sys
from pathlib import Path

from . import classifier, corpus, evaluator, server, trainer


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("must be in (0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urldetect",
        description="Character-level Bi-LSTM malicious URL classifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model from a url,type CSV")
    p_train.add_argument("--data", required=True, help="labeled CSV (url,type)")
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument("--epochs", type=_positive_int, default=5)
    p_train.add_argument("--batch", type=_positive_int, default=64)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--max-len", type=_positive_int, default=150)
    p_train.add_argument("--embed", type=_positive_int, default=32)
    p_train.add_argument("--hidden", type=_positive_int, default=64)
    p_train.add_argument("--dropout", type=float, default=0.3)
    p_train.add_argument("--test-fraction", type=_fraction, default=0.2)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--history", help="write per-epoch metrics CSV here")
    p_train.add_argument("--dump-split", help="directory for train.csv/test.csv copies")
    p_train.add_argument("--deterministic", action="store_true",
                         help="force the fixed-order training path")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="classification report on a labeled CSV")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--format", choices=("text", "json"), default="text")
    p_eval.set_defaults(func=cmd_eval)

    p_pred = sub.add_parser("predict", help="classify one URL")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--url", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_serve = sub.add_parser("serve", help="run the HTTP prediction service")
    p_serve.add_argument("--model", required=True)
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--static-dir", help="web UI bundle to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    p_inspect = sub.add_parser("inspect", help="describe a model file")
    p_inspect.add_argument("--model", required=True)
    p_inspect.set_defaults(func=cmd_inspect)

    return parser


def cmd_train(args) -> int:
    records = corpus.load_csv(args.data)
    vocab = corpus.default_vocabulary()
    hp = classifier.Hyperparams(
        embed_dim=args.embed,
        hidden_dim=args.hidden,
        max_len=args.max_len,
        dropout_rate=args.dropout,
        seed=args.seed,
    )
    split = corpus.SplitSpec(test_fraction=args.test_fraction, seed=args.seed)
    train_recs, val_recs = corpus.stratified_split(records, split)
    if args.dump_split:
        out_dir = Path(args.dump_split)
        out_dir.mkdir(parents=True, exist_ok=True)
        corpus.dump_csv(train_recs, str(out_dir / "train.csv"))
        corpus.dump_csv(val_recs, str(out_dir / "test.csv"))
    train_set = trainer.encode_dataset(train_recs, vocab, hp.max_len)
    val_set = trainer.encode_dataset(val_recs, vocab, hp.max_len) or None
    cfg = trainer.TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
        deterministic=args.deterministic,
    )
    params, history = trainer.fit(
        train_set, val_set, hp, cfg, log=lambda line: print(line, file=sys.stderr)
    )
    classifier.save(params, hp, vocab, args.out)
    if args.history:
        history.to_csv(args.history)
    last = history.epochs[-1]
    summary = {"model": args.out, "epochs": len(history.epochs),
               "train_acc": last.train_acc}
    if last.val_acc is not None:
        summary["val_acc"] = last.val_acc
    print(json.dumps(summary))
    return 0


def cmd_eval(args) -> int:
    params, hp, vocab = classifier.load(args.model)
    records = corpus.load_csv(args.data)
    report = trainer.evaluate_on(params, hp, vocab, records)
    if args.format == "json":
        sys.stdout.write(evaluator.render_report_json(report))
    else:
        sys.stdout.write(evaluator.render_report(report))
    return 0


def cmd_predict(args) -> int:
    params, hp, vocab = classifier.load(args.model)
    service = server.PredictionService(params, hp, vocab)
    print(json.dumps(service.predict_one(args.url)))
    return 0


def cmd_serve(args) -> int:
    params, hp, vocab = classifier.load(args.model)
    service = server.PredictionService(params, hp, vocab)
    httpd = server.make_server(service, args.host, args.port, args.static_dir)
    host, port = httpd.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


def cmd_inspect(args) -> int:
    params, hp, vocab = classifier.load(args.model)
    print(f"format_version: {classifier.FORMAT_VERSION}")
    print(f"vocab_size: {hp.vocab_size}")
    print(f"embed_dim: {hp.embed_dim}")
    print(f"hidden_dim: {hp.hidden_dim}")
    print(f"num_classes: {hp.num_classes}")
    print(f"max_len: {hp.max_len}")
    print(f"dropout_rate: {hp.dropout_rate:g}")
    print(f"seed: {hp.seed}")
    print(f"vocabulary_entries: {len(vocab.chars)}")
    print(f"parameters: {params.num_parameters()}")
    print("crc: ok")
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (
        corpus.CorpusError,
        classifier.ModelFileError,
        trainer.TrainingDiverged,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
