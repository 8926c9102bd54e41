"""Command line interface: ``shapemine mine | match | segment``.

Exit codes: 0 success (or match), 1 no match, 2 usage or input error.
Verbosity follows the ``SHAPEMINE_LOG`` environment variable (a logging
level name, default WARNING).
"""
import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from shapemine import kernels
from shapemine.matcher import LseSemanticError, LseSyntaxError, noisy_match, parse_lse
from shapemine.pipeline import MineConfig, mine_file
from shapemine.segmentation import segment_fixed_count, segment_min_count
from shapemine.signal import TraceParseError, load_traces

log = logging.getLogger("shapemine")


def _guess_format(path: str) -> str:
    return "ucr-tsv" if Path(path).suffix.lower() in (".tsv", ".txt", "") else "csv"


def _add_trace_args(p, flag):
    p.add_argument(flag, required=True, dest="trace_path", help="trace file")
    p.add_argument("--format", choices=["ucr-tsv", "csv"], default=None,
                   help="trace file format (default: from the file extension)")
    p.add_argument("--period", type=float, default=1.0, help="sampling period in seconds")
    p.add_argument("--label", action="append", dest="labels",
                   help="keep only UCR rows with this class label (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapemine", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine a shape expression from a set of traces")
    _add_trace_args(p, "--input")
    p.add_argument("--max-mse", type=float, required=True, dest="eps_max",
                   help="segmentation MSE cap")
    p.add_argument("--wcss-threshold", type=float, default=10.0)
    p.add_argument("--kmax", type=int, default=None, help="largest k tried (default min(10, #segments))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--plot-data", default=None, help="plot CSV path (default: <out>.plot.csv)")
    p.add_argument("--lse-out", default=None, help="expression text path (default: <out>.lse)")

    p = sub.add_parser("match", help="check traces against a shape expression")
    p.add_argument("--lse", required=True, help="file holding the expression text")
    _add_trace_args(p, "--trace")
    p.add_argument("--nu", type=float, required=True, help="noise tolerance (MSE)")

    p = sub.add_parser("segment", help="piecewise-linear segmentation of traces")
    _add_trace_args(p, "--trace")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--max-mse", type=float, dest="eps_max", help="fewest segments under this MSE")
    g.add_argument("--count", type=int, help="exactly this many segments, minimizing the worst MSE")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    return parser


def _load(args):
    fmt = args.format or _guess_format(args.trace_path)
    return load_traces(args.trace_path, fmt, args.period, args.labels)


def cmd_mine(args) -> int:
    out = Path(args.out)
    config = MineConfig(
        input=args.trace_path, format=args.format or _guess_format(args.trace_path),
        period=args.period, labels=args.labels, eps_max=args.eps_max,
        wcss_threshold=args.wcss_threshold, k_max=args.kmax, seed=args.seed, output=str(out),
    )
    report = mine_file(config)
    stem = out.with_suffix("")
    report.write(
        out,
        plot_data=args.plot_data or f"{stem}.plot.csv",
        lse_path=args.lse_out or f"{stem}.lse",
        timings_path=f"{stem}.timings.json",
    )
    t = report.timings
    print(report.lse_text)
    print(f"k={report.k} letters, {len(report.words)} traces; "
          f"t_s={t['t_s']:.4g}s t_c={t['t_c']:.4g}s t_l={t['t_l']:.4g}s "
          f"t_total={t['t_total']:.4g}s [{t['backend']}]", file=sys.stderr)
    return 0


def cmd_match(args) -> int:
    text = Path(args.lse).read_text()
    try:
        lse = parse_lse(text)
    except (LseSyntaxError, LseSemanticError) as exc:
        print(f"{args.lse}: {exc}", file=sys.stderr)
        return 2
    if args.nu < 0:
        print("--nu must be non-negative", file=sys.stderr)
        return 2
    results = []
    for sig in _load(args):
        res = noisy_match(sig, lse, args.nu)
        results.append({"trace": sig.id, **res.to_json()})
    json.dump({"nu": args.nu, "traces": results}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0 if all(r["match"] for r in results) else 1


def cmd_segment(args) -> int:
    signals = _load(args)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["trace", "start", "end", "a", "b", "d", "mse"])
        for sig in signals:
            if args.count is not None:
                seg = segment_fixed_count(sig, args.count)
            else:
                seg = segment_min_count(sig, args.eps_max)
            for (i, j), f in zip(seg.segments, seg.fits):
                w.writerow([sig.id, i, j, repr(f.a), repr(f.b), repr(f.d), repr(f.mse)])
            print(f"{sig.id}: {len(seg)} segments, max mse {seg.max_mse:.6g}", file=sys.stderr)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SHAPEMINE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    log.debug("kernel backend: %s", kernels.BACKEND)
    handlers = {"mine": cmd_mine, "match": cmd_match, "segment": cmd_segment}
    try:
        return handlers[args.command](args)
    except (TraceParseError, ValueError, OSError) as exc:
        print(f"shapemine {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
