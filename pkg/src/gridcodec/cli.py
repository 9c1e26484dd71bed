"""Command-line front end wiring the full pipeline.

Subcommands: ``ingest`` (Ausgrid CSV to internal dataset), ``synth``
(synthetic dataset), ``train`` (klt / linear / ae codec to JSON),
``eval`` (score codecs, optionally quantized), ``sweep`` (rate sweep).
Defaults mirror the headline experiment: 4 coefficients, budget 50,
max-norm objective.  Reports are byte-identical across runs for a fixed
seed.  Exit code 0 on success; errors print one diagnostic line to
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import dataio, evaluate, plots
from .autoencoder import TrainConfig, ae_train
from .errors import GridCodecError
from .profiles import TaskSpec
from .quantize import calibrate
from .transforms import fit_utility_linear, klt_fit


def _parse_exponent(text: str) -> int | float:
    if text.strip().lower() == "inf":
        return math.inf
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"exponent must be a positive integer or 'inf', got {text!r}")


def _parse_bits_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bits must be comma-separated integers, got {text!r}")


def _parse_fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"fraction must be a number, got {text!r}")
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"fraction must be in [0, 1), got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcodec",
        description="Utility-aware compression of smart-grid load profiles.")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="convert an Ausgrid CSV to the internal dataset format")
    ingest.add_argument("--ausgrid", required=True, help="path to the Ausgrid solar-home CSV")
    ingest.add_argument("--customer", default=None, help="customer id to keep (default: all)")
    ingest.add_argument("--category", default="GC", help="consumption category (default GC)")
    ingest.add_argument("--out", required=True, help="internal dataset CSV to write")

    synth = sub.add_parser("synth", help="generate a synthetic dataset")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--t", type=int, required=True, help="number of profiles")
    synth.add_argument("--p", type=int, required=True, help="profile length")
    synth.add_argument("--bump-count", type=int, default=3)
    synth.add_argument("--bump-scale", type=float, default=1.0)
    synth.add_argument("--noise-scale", type=float, default=0.05)
    synth.add_argument("--out", required=True)

    train = sub.add_parser("train", help="fit a codec and write it as JSON")
    train.add_argument("--codec", required=True, choices=["klt", "linear", "ae"])
    train.add_argument("--dataset", required=True)
    train.add_argument("--n", type=int, default=4, help="number of coefficients (default 4)")
    train.add_argument("--p", type=_parse_exponent, default=math.inf,
                       help="norm exponent, integer or 'inf' (default inf)")
    train.add_argument("--e", type=float, default=50.0, help="energy budget (default 50)")
    train.add_argument("--lr", type=float, default=None,
                       help="learning rate (default 0.05 linear, 0.01 ae)")
    train.add_argument("--iters", type=int, default=None,
                       help="iterations/epochs (default 200 linear, 500 ae)")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--init-scale", type=float, default=0.1, help="ae weight init range")
    train.add_argument("--batch-size", type=int, default=0, help="ae batch size, 0 = full batch")
    train.add_argument("--holdout", type=_parse_fraction, default=0.0,
                       help="reserve this trailing fraction of profiles; fit on the rest")
    train.add_argument("--out", required=True)
    train.add_argument("--figures", default=None, help="directory for the loss-trace figure")

    evalp = sub.add_parser("eval", help="score one or more codecs on a dataset")
    evalp.add_argument("--codec", required=True,
                       help="codec JSON path, or several separated by commas")
    evalp.add_argument("--dataset", required=True)
    evalp.add_argument("--p", type=_parse_exponent, default=math.inf)
    evalp.add_argument("--e", type=float, default=50.0)
    evalp.add_argument("--bits", type=int, default=None,
                       help="quantize coefficients to this many bits each")
    evalp.add_argument("--holdout", type=_parse_fraction, default=0.0,
                       help="score only the trailing fraction; calibrate on the rest")
    evalp.add_argument("--out", required=True, help="report JSON to write")
    evalp.add_argument("--csv", default=None, help="also write the flat CSV view")
    evalp.add_argument("--figures", default=None, help="directory for comparison figure")

    sweep = sub.add_parser("sweep", help="rate sweep over quantizer bit widths")
    sweep.add_argument("--codec", required=True)
    sweep.add_argument("--dataset", required=True)
    sweep.add_argument("--p", type=_parse_exponent, default=math.inf)
    sweep.add_argument("--e", type=float, default=50.0)
    sweep.add_argument("--bits", type=_parse_bits_list, default=list(range(1, 9)),
                       help="comma-separated bit widths (default 1..8)")
    sweep.add_argument("--holdout", type=_parse_fraction, default=0.0,
                       help="score only the trailing fraction; calibrate on the rest")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--csv", default=None)
    sweep.add_argument("--figures", default=None, help="directory for the rate-curve figure")

    return parser


def _cmd_ingest(args) -> int:
    dataset = dataio.load_ausgrid(args.ausgrid, customer_id=args.customer,
                                  category=args.category)
    dataio.save_dataset(dataset, args.out)
    print(f"wrote {dataset.count} profiles of length {dataset.dim} to {args.out}")
    return 0


def _cmd_synth(args) -> int:
    dataset = dataio.synth_generate(args.seed, args.t, args.p,
                                    bump_count=args.bump_count,
                                    bump_scale=args.bump_scale,
                                    noise_scale=args.noise_scale)
    dataio.save_dataset(dataset, args.out)
    print(f"wrote {dataset.count} profiles of length {dataset.dim} to {args.out}")
    return 0


def _progress_printer(label: str):
    def emit(iteration: int, loss: float) -> None:
        print(f"{label} iter {iteration}: loss {loss:.6e}", file=sys.stderr)
    return emit


def _cmd_train(args) -> int:
    dataset = dataio.load_dataset(args.dataset)
    if args.holdout > 0.0:
        dataset, _ = dataio.split_dataset(dataset, args.holdout)
    task = TaskSpec(exponent=args.p, budget=args.e, dim=dataset.dim)
    report = None
    if args.codec == "klt":
        codec = klt_fit(dataset, args.n)
    elif args.codec == "linear":
        iters = 200 if args.iters is None else args.iters
        lr = 0.05 if args.lr is None else args.lr
        codec, report = fit_utility_linear(dataset, task, args.n, max_iterations=iters,
                                           learning_rate=lr,
                                           progress=_progress_printer("linear"))
    else:
        config = TrainConfig(epochs=500 if args.iters is None else args.iters,
                             learning_rate=0.01 if args.lr is None else args.lr,
                             batch_size=args.batch_size, seed=args.seed,
                             init_scale=args.init_scale)
        codec, report = ae_train(dataset, task, config, width=args.n,
                                 progress=_progress_printer("ae"))
    dataio.save_codec(codec, args.out)
    if report is not None:
        print(f"stopped after {report.iterations} iterations "
              f"({report.stop_reason.value}), best loss {min(report.loss_trace):.6e}")
        if args.figures:
            fig_dir = Path(args.figures)
            fig_dir.mkdir(parents=True, exist_ok=True)
            fig = plots.save_trace_figure(report.loss_trace,
                                          fig_dir / f"{Path(args.out).stem}_trace.png",
                                          title=f"{args.codec} training loss")
            print(f"wrote {fig}")
    print(f"wrote codec to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    dataset = dataio.load_dataset(args.dataset)
    calibration = dataset
    if args.holdout > 0.0:
        calibration, dataset = dataio.split_dataset(dataset, args.holdout)
    task = TaskSpec(exponent=args.p, budget=args.e, dim=dataset.dim)
    entries = []
    for path_text in args.codec.split(","):
        path = Path(path_text.strip())
        codec = dataio.load_codec(path)
        quantizer = None
        if args.bits is not None:
            spec = calibrate(evaluate.codec_coefficients(codec, calibration),
                             evaluate.default_quant_mode(codec))
            quantizer = (spec, args.bits)
        entries.append(evaluate.eval_codec(codec, dataset, task,
                                           quantizer=quantizer, name=path.stem))
    report = evaluate.build_report(task, entries)
    evaluate.validate_report(report)
    evaluate.write_report_json(report, args.out)
    print(f"wrote report to {args.out}")
    if args.csv:
        evaluate.write_report_csv(report, args.csv)
        print(f"wrote CSV to {args.csv}")
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        fig = plots.save_comparison_figure(report, fig_dir / f"{Path(args.out).stem}_comparison.png")
        print(f"wrote {fig}")
    return 0


def _cmd_sweep(args) -> int:
    dataset = dataio.load_dataset(args.dataset)
    calibration = None
    if args.holdout > 0.0:
        calibration, dataset = dataio.split_dataset(dataset, args.holdout)
    task = TaskSpec(exponent=args.p, budget=args.e, dim=dataset.dim)
    path = Path(args.codec)
    codec = dataio.load_codec(path)
    entry = evaluate.sweep_bits(codec, dataset, task, args.bits, name=path.stem,
                                calibration_dataset=calibration)
    report = evaluate.build_report(task, [entry])
    evaluate.validate_report(report)
    evaluate.write_report_json(report, args.out)
    print(f"wrote report to {args.out}")
    if args.csv:
        evaluate.write_report_csv(report, args.csv)
        print(f"wrote CSV to {args.csv}")
    if args.figures:
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        fig = plots.save_sweep_figure(report, fig_dir / f"{Path(args.out).stem}_sweep.png")
        print(f"wrote {fig}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (GridCodecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
