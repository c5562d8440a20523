"""Command-line front end.

Exit codes: 0 success, 2 infeasible or undecided, 1 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import mpmath
import numpy as np

from .errors import (CapacityError, DomainError, HorizonError, InfeasibleError,
                     PipelineError, PlannerError, SynthesisError, UnsupportedDepthError)
from .maps import iter_maxmod, max_modulus, parse_map
from .numeric_tower import LevelIndex
from .regions import parse_region
from .schedule import RateSequence, parse_rate

EXIT_OK, EXIT_USAGE, EXIT_UNDECIDED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(x, 30)
    if isinstance(x, LevelIndex):
        return str(x)
    if hasattr(x, "to_dict"):
        return _jsonable(x.to_dict())
    return str(x)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, obj):
    _emit(args, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def load_rate(spec: str) -> RateSequence:
    """A rate formula, or a CSV file of ``n, a_n`` rows."""
    path = Path(spec)
    if path.suffix.lower() == ".csv" or path.is_file():
        rows = []
        with path.open() as fh:
            for row in csv.reader(fh):
                if not row or not row[0].strip().lstrip("-").replace(".", "").isdigit():
                    continue
                rows.append((int(float(row[0])), float(row[1])))
        rows.sort()
        if [n for n, _ in rows] != list(range(1, len(rows) + 1)):
            raise DomainError(f"{spec}: rows must list n = 1, 2, ... without gaps")
        return RateSequence.of([v for _, v in rows], label=path.name)
    return parse_rate(spec)


# -- commands -----------------------------------------------------------------

def cmd_maxmod(args):
    f = parse_map(args.map)
    try:
        print(repr(max_modulus(f, args.r)))
    except CapacityError:
        print(iter_maxmod(f, args.r, 1))
    return EXIT_OK


def cmd_iter_maxmod(args):
    print(iter_maxmod(parse_map(args.map), args.R, args.n))
    return EXIT_OK


def cmd_synth_fast(args):
    from .synthesis import plan_fast_orbit

    thresholds = [float(v) for v in args.thresholds.split(",")] if args.thresholds else None
    plan = plan_fast_orbit(parse_map(args.map), args.R, args.depth, thresholds=thresholds,
                           grid=args.grid)
    _emit_json(args, plan.to_dict())
    return EXIT_OK


def cmd_synth_slow(args):
    from .synthesis import plan_slow_orbit

    pits = {"auto": None, "yes": True, "no": False}[args.pits]
    plan = plan_slow_orbit(parse_map(args.map), load_rate(args.rate), args.horizon, pits=pits,
                           grid=args.grid)
    _emit_json(args, plan.to_dict())
    return EXIT_OK if plan.extras.get("sandwich_ok", False) else EXIT_UNDECIDED


def cmd_check_pits(args):
    from .analysis import detect_pits

    scales = [float(s) for s in args.scales.split(",")] if args.scales else None
    kw = {"scales": scales} if scales else {}
    rep = detect_pits(parse_map(args.map), c=args.c, eps=args.eps, N_max=args.N,
                      seed=args.seed, **kw)
    _emit_json(args, rep.to_dict())
    return EXIT_OK


def cmd_check_thm3(args):
    from .analysis import scan_thm3_conditions

    annuli = [(n - 0.5, n + 0.5) for n in range(1, args.annuli + 1)]
    rep = scan_thm3_conditions(parse_map(args.map), args.cond, args.param, annuli=annuli,
                               L_max=args.L)
    _emit_json(args, rep.to_dict())
    return EXIT_OK


def cmd_check_growth(args):
    from .analysis import growth_check

    grid = [float(r) for r in args.r.split(",")]
    rep = growth_check(parse_map(args.map), A=args.A, r_grid=grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "M_ratio", "log_M_ratio", "logM_over_logr"])
    for row in rep.rows():
        w.writerow([repr(v) for v in row])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_cover(args):
    from .covering import COVERED, NOT_COVERED, certify_covering

    cert = certify_covering(parse_map(args.map), parse_region(args.U), parse_region(args.V),
                            grid=args.grid)
    _emit_json(args, cert.to_dict())
    return EXIT_OK if cert.verdict in (COVERED, NOT_COVERED) else EXIT_UNDECIDED


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (sampling jitter)")
    common.add_argument("--bits", type=int, default=None,
                        help="base working precision (default: $SLOWESCAPE_BITS or 64)")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    p = _Parser(prog="slowescape", description="Escaping-orbit synthesis and map diagnostics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("maxmod", parents=[common], help="M(r, f)")
    s.add_argument("map")
    s.add_argument("--r", type=float, required=True)
    s.set_defaults(func=cmd_maxmod)

    s = sub.add_parser("iter-maxmod", parents=[common], help="M^n(R, f) as a level-index number")
    s.add_argument("map")
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_iter_maxmod)

    s = sub.add_parser("synth-fast", parents=[common], help="orbit tracking the iterated maximum modulus")
    s.add_argument("map")
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--thresholds", default=None, help="comma-separated r_1 <= r_2 <= ...")
    s.add_argument("--grid", type=int, default=32)
    s.set_defaults(func=cmd_synth_fast)

    s = sub.add_parser("synth-slow", parents=[common], help="orbit escaping no faster than a given rate")
    s.add_argument("map")
    s.add_argument("--rate", required=True, help="c*n, c*n^p, c*log(n)+d, or a CSV file")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--pits", choices=("auto", "yes", "no"), default="auto")
    s.add_argument("--grid", type=int, default=32)
    s.set_defaults(func=cmd_synth_slow)

    s = sub.add_parser("check-pits", parents=[common], help="pits-effect classifier")
    s.add_argument("map")
    s.add_argument("--c", type=float, default=3.0)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--N", type=int, default=8)
    s.add_argument("--scales", default=None, help="comma-separated increasing radii")
    s.set_defaults(func=cmd_check_pits)

    s = sub.add_parser("check-thm3", parents=[common], help="small values on consecutive annuli")
    s.add_argument("map")
    s.add_argument("--cond", choices=("b", "c"), default="b")
    s.add_argument("--param", type=float, default=None, help="c for (b), s for (c)")
    s.add_argument("--annuli", type=int, default=20)
    s.add_argument("--L", type=float, default=2.0)
    s.set_defaults(func=cmd_check_thm3)

    s = sub.add_parser("check-growth", parents=[common], help="growth of M(r) as CSV")
    s.add_argument("map")
    s.add_argument("--A", type=float, default=2.0)
    s.add_argument("--r", default="10,100,1000,10000")
    s.set_defaults(func=cmd_check_growth)

    s = sub.add_parser("cover", parents=[common], help="certify f(U) ⊃ V")
    s.add_argument("map")
    s.add_argument("--U", required=True)
    s.add_argument("--V", required=True)
    s.add_argument("--grid", type=int, default=32)
    s.set_defaults(func=cmd_cover)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.bits is not None:
        os.environ["SLOWESCAPE_BITS"] = str(args.bits)
    try:
        return args.func(args)
    except (InfeasibleError, HorizonError, PipelineError, PlannerError, SynthesisError,
            CapacityError, UnsupportedDepthError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (DomainError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
