"""Command-line front end.

    ghostimg simulate OBJECT.pgm -o meas.gim
    ghostimg tables --n 16384 -o tables.gitab
    ghostimg reconstruct meas.gim --engine dgi-fixed --lanes 64 -o out.pgm
    ghostimg bench --engine dgi-fixed --lanes 1 16 64 --workers 1 4 8
    ghostimg compare-generators OBJECT.pgm --n 16384 -o recon

Any long option may also come from ``--config FILE`` (``key=value`` lines);
command-line flags win. Errors go to stderr as
``ghostimg: error[<kind>]: <message>``.
"""
from __future__ import annotations

import argparse
import statistics
import sys
import warnings
from pathlib import Path

from . import bench, io
from .core import GhostImagingError
from .forward import build_reference_tables, simulate_measurement
from .metrics import quality_report
from .patterns import GeneratorDescriptor, KINDS
from .reconstruct import ENGINES, FixedSchedule, normalize_for_display, reconstruct

PROG = "ghostimg"


def _positive_int(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _adc_bits(text: str):
    if text.lower() == "none":
        return None
    return _positive_int(text)


def _seed(text: str) -> int:
    return int(text, 0)


def _descriptor(kind: str, seed: int) -> GeneratorDescriptor:
    return GeneratorDescriptor(kind, seed)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=PROG, description="Computational ghost imaging toolkit.")
    p.add_argument("--config", help="key=value defaults file (flags win)")
    sub = p.add_subparsers(dest="command", required=True)

    def add_generator(sp):
        sp.add_argument("--generator", choices=KINDS, default="mseq")
        sp.add_argument("--seed", type=_seed, default=1)

    s = sub.add_parser("simulate", help="simulate bucket measurements of an object")
    s.add_argument("object")
    add_generator(s)
    s.add_argument("--n", type=_positive_int, default=16384)
    s.add_argument("--adc-bits", type=_adc_bits, default=12, help="bits or 'none'")
    s.add_argument("--noise-sigma", type=float, default=0.0)
    s.add_argument("--noise-seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True)

    t = sub.add_parser("tables", help="precompute and store the reference tables")
    add_generator(t)
    t.add_argument("--n", type=_positive_int, default=16384)
    t.add_argument("--width", type=_positive_int, default=32)
    t.add_argument("--height", type=_positive_int, default=32)
    t.add_argument("-o", "--output", required=True)

    r = sub.add_parser("reconstruct", help="reconstruct an image from a measurement file")
    r.add_argument("measurement")
    r.add_argument("--engine", choices=ENGINES, default="dgi-float")
    r.add_argument("--lanes", type=_positive_int, default=64)
    r.add_argument("--workers", type=_positive_int, default=1)
    r.add_argument("--tables", help="reference table file (replayed when omitted)")
    r.add_argument("--bits", type=_positive_int, default=8)
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--dump-metrics", metavar="TRUTH", help="print PSNR/SSIM against TRUTH.pgm")

    b = sub.add_parser("bench", help="time reconstructions across lane and worker counts")
    b.add_argument("--engine", choices=ENGINES, default="dgi-fixed")
    b.add_argument("--lanes", type=_positive_int, nargs="+", default=[64])
    b.add_argument("--workers", type=_positive_int, nargs="+", default=[1])
    b.add_argument("--n", type=_positive_int, default=16384)
    b.add_argument("--repeat", type=_positive_int, default=bench.MIN_RUNS)

    c = sub.add_parser("compare-generators", help="run the pipeline with LCG, MT and M-sequence")
    c.add_argument("object")
    c.add_argument("--n", type=_positive_int, default=16384)
    c.add_argument("--seed", type=_seed, default=1)
    c.add_argument("--engine", choices=ENGINES, default="dgi-float")
    c.add_argument("--adc-bits", type=_adc_bits, default=None)
    c.add_argument("-o", "--output", help="output prefix (default: object name)")
    return p


def _read_config(path: str) -> dict:
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GhostImagingError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _apply_config(parser: argparse.ArgumentParser, argv, cfg: dict) -> argparse.Namespace:
    # config values become subparser defaults, so explicit flags override them
    pre = parser.parse_args(argv)
    sp = parser._subparsers._group_actions[0].choices[pre.command]
    defaults = {}
    for action in sp._actions:
        if action.dest not in cfg:
            continue
        raw = cfg[action.dest]
        values = raw.replace(",", " ").split() if action.nargs == "+" else [raw]
        conv = action.type or str
        try:
            parsed = [conv(v) for v in values]
        except (argparse.ArgumentTypeError, ValueError) as e:
            parser.error(f"config {action.dest}: {e}")
        defaults[action.dest] = parsed if action.nargs == "+" else parsed[0]
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def cmd_simulate(args) -> int:
    obj = io.read_pgm(args.object)
    gen = _descriptor(args.generator, args.seed)
    m = simulate_measurement(obj, gen, args.n, args.adc_bits, args.noise_sigma, args.noise_seed)
    io.write_measurement(m, args.output)
    print(f"n={m.n}")
    print(f"mean_s={statistics.fmean(float(v) for v in m.samples):.6f}")
    print(f"generator={m.generator}")
    return 0


def cmd_tables(args) -> int:
    gen = _descriptor(args.generator, args.seed)
    ref = build_reference_tables(gen, args.n, args.width, args.height)
    io.write_tables(ref, args.output)
    print(f"n={ref.n} mean_r={ref.mean_r:.6f} generator={ref.generator}")
    return 0


def cmd_reconstruct(args) -> int:
    m = io.read_measurement(args.measurement)
    ref = io.read_tables(args.tables) if args.tables else None
    o = reconstruct(m, args.engine, ref, FixedSchedule(lanes=args.lanes), args.workers)
    img = normalize_for_display(o, args.bits)
    io.write_pgm(img, args.output, maxval=(1 << args.bits) - 1)
    print(f"engine={args.engine} provenance={o.provenance} n={m.n} size={m.width}x{m.height}")
    if args.dump_metrics:
        truth = io.read_pgm(args.dump_metrics)
        q = quality_report(truth, img, args.bits)
        print(f"psnr={q.psnr:.4f}")
        print(f"ssim={q.ssim:.6f}")
    return 0


def cmd_bench(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        reports = bench.run_bench(args.engine, args.lanes, args.workers, args.n, args.repeat)
    for w in caught:
        print(f"{PROG}: warning: {w.message}", file=sys.stderr)
    print(bench.format_table(reports))
    for r in reports:
        print(r.line())
    return 0


def cmd_compare_generators(args) -> int:
    obj = io.read_pgm(args.object)
    prefix = args.output or str(Path(args.object).with_suffix(""))
    adc = args.adc_bits
    if args.engine == "dgi-fixed" and adc is None:
        adc = 12
    print(f"{'generator':<10} {'psnr':>8} {'ssim':>8}  file")
    for kind, suffix in (("lcg", "lcg"), ("mt", "mt"), ("mseq", "mseq")):
        gen = GeneratorDescriptor(kind, args.seed)
        m = simulate_measurement(obj, gen, args.n, adc)
        o = reconstruct(m, args.engine)
        img = normalize_for_display(o)
        path = f"{prefix}-{suffix}.pgm"
        io.write_pgm(img, path)
        q = quality_report(obj, img)
        print(f"{kind:<10} {q.psnr:>8.3f} {q.ssim:>8.4f}  {path}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "tables": cmd_tables,
    "reconstruct": cmd_reconstruct,
    "bench": cmd_bench,
    "compare-generators": cmd_compare_generators,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config(parser, argv, _read_config(args.config))
        return COMMANDS[args.command](args)
    except GhostImagingError as e:
        print(f"{PROG}: error[{e.kind}]: {e}", file=sys.stderr)
    except (OSError, ValueError) as e:
        print(f"{PROG}: error[{type(e).__name__}]: {e}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
