"""Command-line batch front-end.

    cavsqueeze table1 --preset paper --out out/
    cavsqueeze sdns --preset paper --n 2 --r 1.36 --out out/
    cavsqueeze run --config run.cfg
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import EXPERIMENTS, OPTIONS, parse_config
from .errors import ALL_ERRORS, CavSqueezeError
from .experiments import run

EXIT_CODES_HELP = "exit codes:\n  0  success\n  1  unexpected internal error\n" + "\n".join(
    f"  {cls.exit_code:<2} {cls.code}" for cls in sorted(ALL_ERRORS, key=lambda c: c.exit_code)
)

OPTION_HELP = {
    "n": "Fock number of the initial state (sdns)",
    "alpha": "complex amplitude as 're,im' (displacement for sdns, cat amplitude for sscs)",
    "t_squeeze": "squeeze interaction time in s",
    "r": "target squeeze factor; overrides t_squeeze via t = r / 2|xi|",
    "simulate": "ideal | effective | full",
    "convention": "displacement convention: standard | paper-literal",
    "m": "number of ladder atoms",
    "mode": "deterministic | monte-carlo",
    "trials": "Monte-Carlo repetitions for the empirical success rate",
    "seed": "integer seed for Monte-Carlo sampling",
    "c_g": "cat weight of |alpha> as 're,im'",
    "c_e": "cat weight of |-alpha> as 're,im'",
    "sign": "cat relative sign (+ or -)",
    "grid": "Wigner grid 'x_min,x_max,p_min,p_max,nx,np'",
    "state": "state exported by the wigner experiment: sscs | sdns",
    "t": "validation time in s",
    "samples": "number of intermediate validation times",
    "frame": "validation frame: interaction | rotating | bare",
    "delta_scale": "detuning scale factor of the second validation run",
    "validate_dim": "Fock dimension of the validation runs",
    "sweep_var": "swept quantity: Omega | lambda_g | lambda_e | delta | t_squeeze",
    "sweep_range": "'start,stop,num'",
    "workers": "threads for sweep points",
    "wigner": "also write wigner.csv for sdns/sscs (true/false)",
}

PARAM_FLAGS = ("omega", "lambda_g", "lambda_e", "Omega", "delta", "Delta")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--preset", help="named parameter preset (paper)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--dim", help="Fock truncation dimension (default: 512, sweep 1024)")
    p.add_argument("--tail-tol", dest="tail_tol", help="truncation tail tolerance (default: 1e-12)")
    g = p.add_argument_group("physical parameters (rates in s^-1; complex as 're,im')")
    for name in PARAM_FLAGS:
        g.add_argument(f"--{name.replace('_', '-')}", dest=f"param_{name}", metavar="VALUE",
                       help="'resonant' sets Delta = 2 chi" if name == "Delta" else None)
    o = p.add_argument_group("experiment options")
    for name in OPTIONS:
        o.add_argument(f"--{name.replace('_', '-')}", dest=f"opt_{name}", metavar="VALUE",
                       help=OPTION_HELP.get(name))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavsqueeze",
        description="Squeezed-state engineering experiments in a high-Q cavity.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"cavsqueeze {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("run",):
        helptext = "experiment named in --config" if name == "run" else f"run the {name} experiment"
        sp = sub.add_parser(name, help=helptext, epilog=EXIT_CODES_HELP,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        _common(sp)
    return parser


def overrides_from_args(args) -> dict:
    ov = {}
    if args.command != "run":
        ov["experiment"] = args.command
    for key in ("preset", "dim", "tail_tol"):
        if getattr(args, key) is not None:
            ov[key] = getattr(args, key)
    for name in PARAM_FLAGS:
        val = getattr(args, f"param_{name}")
        if val is not None:
            ov[name] = val
    for name in OPTIONS:
        val = getattr(args, f"opt_{name}")
        if val is not None:
            ov[name] = val
    return ov


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config, overrides_from_args(args))
        report = run(cfg, args.out)
    except CavSqueezeError as exc:
        err = {"error": exc.code, "message": str(exc), "exit_code": exc.exit_code}
        if hasattr(exc, "problems"):
            err["problems"] = exc.problems
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return exc.exit_code
    print(json.dumps({"experiment": report["experiment"], "out": str(args.out),
                      "files": report["files"]}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
