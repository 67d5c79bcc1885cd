"""Command-line front end.

Subcommands::

    sperturb solve --example cde --eps 1e-5 --n 16 --mesh eps-uniform
    sperturb intersections --example cde --eps 1e-10 --n 7 --add last-mid
    sperturb verify invariance --example rde --eps 1e-10 --n 8 --seed 1
    sperturb verify isolation --example cde --eps 1e-5 --n 16
    sperturb table 1
    sperturb convergence --example cde --eps 1e-5

Data go to ``--out`` (or stdout) as CSV with one header line; diagnostics go
to stderr.  Exit status: 0 success, 1 numerical failure or FAIL verdict,
2 usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys
from typing import IO, Iterator, Sequence

from . import assembly, experiments, fem, intersect, mesh
from .exceptions import SperturbError
from .experiments import Augmentation, format_value
from .problem import KINDS, example

INVARIANCE_THRESHOLD = 1e-9
ISOLATION_THRESHOLD = 1e-12
DEFAULT_N_LIST = "4,8,16,32,64,128,256,512"


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _size(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 2:
        raise argparse.ArgumentTypeError(f"need at least 2, got {v}")
    return v


def _n_list(text: str) -> list[int]:
    return [_size(t) for t in text.split(",") if t.strip()]


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def parse_augmentation(text: str) -> Augmentation:
    """``last-mid``, ``first-mid`` or ``interval:k:pos[:pos...]`` (commas also separate positions)."""
    if text == "last-mid":
        return Augmentation(None, (0.5,))
    if text == "first-mid":
        return Augmentation(1, (0.5,))
    parts = text.replace(",", ":").split(":")
    if parts[0] != "interval" or len(parts) < 3:
        raise argparse.ArgumentTypeError(f"bad augmentation {text!r}")
    try:
        k = int(parts[1])
        positions = tuple(float(p) for p in parts[2:])
        return Augmentation(k, positions)
    except (ValueError, SperturbError) as exc:
        raise argparse.ArgumentTypeError(f"bad augmentation {text!r}: {exc}") from None


def _add_problem_args(p: argparse.ArgumentParser, n_default: int | None = None) -> None:
    p.add_argument("--example", choices=KINDS, required=True)
    p.add_argument("--eps", type=_positive_float, required=True)
    if n_default is None:
        p.add_argument("--n", type=_size, required=True)
    else:
        p.add_argument("--n", type=_size, default=n_default)
    p.add_argument("--alpha", type=float, help="point-mass location (green example)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sperturb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one example and write x, value, exact, error")
    _add_problem_args(p)
    p.add_argument("--mesh", choices=("uniform", "shishkin", "eps-uniform"), default="uniform")
    p.add_argument("--out")
    p.add_argument("--dump-mesh", metavar="PATH")
    p.add_argument("--dump-system", metavar="PATH")
    p.add_argument("--left-width-reaction", action="store_true",
                   help="use h_i in the reaction part of a_{i,i+1}")

    p = sub.add_parser("intersections", help="Q_i of the coarse and augmented solutions")
    _add_problem_args(p)
    p.add_argument("--add", type=parse_augmentation, default=parse_augmentation("last-mid"),
                   help="last-mid | first-mid | interval:k:pos[:pos...]")
    p.add_argument("--predicted", action="store_true",
                   help="use the Green-column ratios instead of intersecting the graphs")
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check an invariance or isolation property")
    p.add_argument("check", choices=("invariance", "isolation"))
    _add_problem_args(p, n_default=8)
    p.add_argument("--seed", type=_seed, help="64-bit seed (default: $SPERTURB_SEED or 0)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--interval", type=int, help="augmented interval k (default: last)")

    p = sub.add_parser("table", help="reproduce one of the result tables")
    p.add_argument("number", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--eps", type=_positive_float)
    p.add_argument("--out")

    p = sub.add_parser("convergence", help="errors of the isolated solution and fitted slope")
    p.add_argument("--example", choices=KINDS, default="cde")
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--n-list", type=_n_list, default=_n_list(DEFAULT_N_LIST))
    p.add_argument("--alpha", type=float)
    p.add_argument("--out")
    return parser


def _require_alpha(parser, args) -> None:
    if args.example == "green" and args.alpha is None:
        parser.error("--alpha is required for --example green")


def _cmd_solve(args) -> int:
    p, ex = example(args.example, args.eps, args.alpha)
    if args.mesh == "uniform":
        m = mesh.uniform(args.n)
    elif args.mesh == "shishkin":
        m = mesh.shishkin(args.n, mesh.shishkin_theta(args.example, p.epsilon, args.n, b=p.b, c=p.c))
    else:
        m = mesh.eps_uniform_mesh(mesh.uniform(args.n), p.epsilon, p.b, p.c)
    s = fem.solve(p, m, left_width_reaction=args.left_width_reaction)
    if args.dump_mesh:
        with _output(args.dump_mesh) as fh:
            mesh.write_csv(m, fh)
    if args.dump_system:
        with _output(args.dump_system) as fh:
            assembly.write_csv(s.system, fh)
    with _output(args.out) as fh:
        fem.write_csv(s, fh, exact=ex)
    return 0


def _cmd_intersections(args) -> int:
    p, ex = example(args.example, args.eps, args.alpha)
    m = mesh.uniform(args.n)
    coarse = fem.solve(p, m)
    k = args.add.index(m)
    if args.predicted:
        qs = intersect.predicted_intersections(coarse.system, coarse, k)
    else:
        fine = fem.solve(p, mesh.add_points(m, args.add.points(m)))
        qs = intersect.geometric_intersections(coarse, fine)
    with _output(args.out) as fh:
        intersect.write_csv(qs, fh, exact=ex)
    return 0


def _cmd_verify(args) -> int:
    if args.check == "invariance":
        seed = args.seed if args.seed is not None else _seed(os.environ.get("SPERTURB_SEED", "0"))
        res = experiments.verify_invariance(args.example, args.eps, args.n, args.trials, seed,
                                            args.interval, args.alpha)
        dev, threshold, compared = res.deviation, INVARIANCE_THRESHOLD, len(res.compared)
    else:
        dev = experiments.verify_isolation(args.example, args.eps, args.n, args.alpha)
        threshold, compared = ISOLATION_THRESHOLD, args.n
    verdict = "PASS" if dev <= threshold else "FAIL"
    print("check,example,eps,n,compared,deviation,threshold,result")
    print(",".join([args.check, args.example, format_value(args.eps), str(args.n), str(compared),
                    format_value(dev), format_value(threshold), verdict]))
    return 0 if verdict == "PASS" else 1


def _cmd_table(args) -> int:
    eps = None if args.eps is None else (args.eps,)
    if args.number == 1:
        rep = experiments.table1(eps or experiments.TABLE_EPS)
    elif args.number == 3:
        rep = experiments.table3(eps or experiments.TABLE_EPS)
    elif args.number == 2:
        rep = experiments.table2(args.eps or 1e-10)
    else:
        rep = experiments.table4(args.eps or 1e-5)
    for note in rep.notes:
        print(f"note: {note}", file=sys.stderr)
    with _output(args.out) as fh:
        rep.write_csv(fh)
    return 0


def _cmd_convergence(args) -> int:
    rep = experiments.convergence_study(args.example, args.eps, args.n_list, args.alpha)
    if rep.metadata["below_precision"]:
        print("note: every error is below 1e-13; slope not fitted", file=sys.stderr)
    with _output(args.out) as fh:
        rep.write_csv(fh, footer=("slope", "", rep.metadata["slope"]))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("solve", "intersections"):
        _require_alpha(parser, args)
    if args.command == "verify" and args.trials < 2:
        parser.error("--trials must be at least 2")
    handlers = {"solve": _cmd_solve, "intersections": _cmd_intersections, "verify": _cmd_verify,
                "table": _cmd_table, "convergence": _cmd_convergence}
    try:
        return handlers[args.command](args)
    except (SperturbError, IndexError) as exc:
        print(f"sperturb: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"sperturb: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
