"""``slackapprox`` command line.

Each subcommand prints ``key=value`` lines and then one JSON block; floats
carry 17 significant digits. Exit codes: 0 ok, 2 usage/structure,
3 validation, 4 solver, 5 numerical.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .approx import inner_body, quality_bounds, soc_lift, verify_polarity
from .errors import SlackApproxError, StructuralError
from .factor import NMFOptions, factor_error, nmf, rank_one_factor
from .model import ConeSpec
from .slack import _bits, cor_instance, generalized_slack, matrix_to_dict, slack_matrix
from .solver import SolverOptions


def _opts(args) -> SolverOptions:
    return SolverOptions(tol=args.tol) if args.tol else SolverOptions()


def _cone(args):
    return ConeSpec.parse(args.cone) if args.cone else None


def _emit(args, pairs, block=None):
    head = {"command": args.command, "seed": args.seed}
    sys.stdout.write(io.report({**head, **pairs}, block))


def cmd_slack(args):
    P = io.load_polytope(args.polytope)
    if args.q_facets:
        QH = io.load_matrix(args.q_facets).T
        S = generalized_slack(P, QH).S
    else:
        S = slack_matrix(P).S
    if args.out:
        io.save_matrix(args.out, S)
    _emit(args, {"rows": S.shape[0], "cols": S.shape[1], "out": args.out or "-"},
          {"S": matrix_to_dict(S)})


def cmd_factor(args):
    S = io.load_matrix(args.slack)
    if args.method == "svd1":
        if args.rank not in (None, 1):
            raise StructuralError("svd1 produces rank one factors; drop --rank or pass 1")
        F = rank_one_factor(S)
    else:
        if args.rank is None or args.rank < 1:
            raise StructuralError("nmf needs --rank m >= 1")
        F = nmf(S, args.rank, NMFOptions(max_iters=args.max_iters, seed=args.seed,
                                         target_error=args.target))
    err = factor_error(S, F)
    if args.out:
        io.save_json(args.out, F.to_dict())
    _emit(args, {"method": args.method, "m": F.m,
                 "frobenius": float(np.linalg.norm(err.Delta)),
                 "norm_1_2": err.norm_1_2, "norm_2_inf": err.norm_2_inf,
                 "out": args.out or "-"},
          {"factor": F.to_dict(), "error": err.to_dict()})


def _factor_or_zero(args, P):
    if args.factor:
        return io.load_factor(args.factor, _cone(args))
    return None


def cmd_bounds(args):
    P = io.load_polytope(args.polytope)
    F = io.load_factor(args.factor, _cone(args))
    b = quality_bounds(P, F, _opts(args))
    _emit(args, {"eps_norm_in": b.eps_norm_in, "eps_xi_in": b.eps_xi_in, "eps_mu": b.eps_mu,
                 "eps_norm_out": b.eps_norm_out, "eps_xi_out": b.eps_xi_out,
                 "ordered": b.inner_ordered and b.outer_ordered,
                 "complete": b.complete}, b.to_dict())
    return 0 if b.complete else 4


def cmd_lift(args):
    P = io.load_polytope(args.polytope)
    F = _factor_or_zero(args, P)
    body = inner_body(P, F, _opts(args))
    L = soc_lift(body)
    rng = np.random.default_rng(args.seed)
    pts = rng.uniform(-1.5, 1.5, size=(args.check, P.dim)) * np.max(np.abs(P.V))
    disagree = sum(L.contains(x, 1e-7) != body.contains(x, 1e-7) for x in pts)
    if args.out:
        io.save_json(args.out, L.to_dict())
    _emit(args, {"n": L.n, "m": L.m, "lift_dim": L.lift_dim, "checked": args.check,
                 "disagreements": disagree, "out": args.out or "-"}, L.to_dict())
    return 0 if disagree == 0 else 3


def cmd_nested(args):
    from .nested import NestedPair, containment_chain, grid_points, nested_quality_bounds
    pair = NestedPair.from_dict(io.read_json(args.pair))
    F = io.load_factor(args.factor, _cone(args))
    pts = grid_points(args.grid) if pair.n == 2 else None
    if pts is None:
        from .approx import ray_directions
        pts = ray_directions(pair.n, args.dirs, args.seed)
    chain = containment_chain(pair, F, pts, opts=_opts(args))
    nb = nested_quality_bounds(pair, F, num_dirs=args.dirs, opts=_opts(args))
    _emit(args, {"exact": chain.exact, "chain_passed": chain.passed, "undecided": chain.undecided,
                 "scaled_inner_ok": nb.inner_scaled_ok, "scaled_outer_ok": nb.outer_scaled_ok,
                 "eps_norm_in": nb.bounds.eps_norm_in, "eps_norm_out": nb.bounds.eps_norm_out},
          {"chain": chain.to_dict(), "bounds": nb.bounds.to_dict(), "failures": nb.failures})
    return 0 if chain.passed and not chain.undecided and nb.inner_scaled_ok and nb.outer_scaled_ok else 3


def cmd_cor_gen(args):
    V, H, S = cor_instance(args.n)
    ab = np.array([[(1.0 - a @ b) ** 2 for b in _bits(args.n)] for a in _bits(args.n)])
    identity_ok = bool(np.array_equal(S, ab))
    m = args.rank or args.n
    F = nmf(S, m, NMFOptions(max_iters=args.max_iters, seed=args.seed))
    fro = float(np.linalg.norm(S - F.product()))
    if args.out:
        io.save_matrix(args.out, S)
    _emit(args, {"n": args.n, "rows": S.shape[0], "cols": S.shape[1],
                 "identity_ok": identity_ok, "rank": m, "nmf_error": fro,
                 "out": args.out or "-"},
          {"S": matrix_to_dict(S), "vertices": matrix_to_dict(V.T), "facets": matrix_to_dict(H.T)})
    return 0 if identity_ok else 3


def cmd_render(args):
    from . import render
    doc = io.read_json(args.input)
    if "Q_H" in doc:
        from .nested import NestedPair
        if not args.factor:
            raise StructuralError("rendering a nested pair needs a factor file")
        pair = NestedPair.from_dict(doc)
        fig = render.nested_figure(pair, io.load_factor(args.factor, _cone(args)), args.rays,
                                   opts=_opts(args))
    else:
        from .model import Polytope
        P = Polytope.from_dict(doc)
        F = _factor_or_zero(args, P)
        bodies = tuple(args.bodies.split(",")) if args.bodies else \
            ("P", "Inn", "Out", "inner_scaled", "outer_scaled", "Dikin")
        fig = render.approximation_figure(P, F, args.rays, bodies, args.boundary, _opts(args))
    svg = render.to_svg(fig)
    if not args.out:
        raise StructuralError("render needs --out FILE.svg")
    io.write_text(args.out, svg)
    _emit(args, {"rays": args.rays, "bodies": ",".join(fig.curves), "ordered": True,
                 "out": args.out})


def cmd_verify_polarity(args):
    P = io.load_polytope(args.polytope)
    F = _factor_or_zero(args, P)
    inner_A = None
    if args.perturb:
        if F is None:
            raise StructuralError("--perturb needs a factor file")
        i, j, delta = args.perturb.split(",")
        inner_A = np.array(F.A)
        inner_A[int(i), int(j)] += float(delta)
    tol = args.tol or 1e-4
    rep = verify_polarity(P, F, args.dirs, tol, args.seed, inner_A=inner_A)
    _emit(args, {"passed": rep.passed, "dirs": args.dirs, "tol": tol}, rep.to_dict())
    return 0 if rep.passed else 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="solver / check tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--rank", type=int, default=None)
    common.add_argument("--cone", default=None, help='e.g. "orthant:3,soc:4"')
    common.add_argument("--dirs", type=int, default=64)
    common.add_argument("--out", default=None)
    common.add_argument("--max-iters", type=int, default=5000, help="NMF iterations")

    p = argparse.ArgumentParser(prog="slackapprox", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("slack", parents=[common], help="slack matrix of a polytope file")
    s.add_argument("polytope")
    s.add_argument("--q-facets", default=None, help="matrix file of outer facets (one per row)")
    s.set_defaults(fn=cmd_slack)

    s = sub.add_parser("factor", parents=[common], help="approximate factorization of a slack matrix")
    s.add_argument("slack")
    s.add_argument("--method", choices=("svd1", "nmf"), required=True)
    s.add_argument("--target", type=float, default=0.0,
                   help="nmf: stop once the Frobenius error is at most this")
    s.set_defaults(fn=cmd_factor)

    s = sub.add_parser("bounds", parents=[common], help="quality bounds for a factorization")
    s.add_argument("polytope")
    s.add_argument("factor")
    s.set_defaults(fn=cmd_bounds)

    s = sub.add_parser("lift", parents=[common], help="second-order cone lift of Inn_P(A)")
    s.add_argument("polytope")
    s.add_argument("factor", nargs="?")
    s.add_argument("--check", type=int, default=100, help="random points for the round trip")
    s.set_defaults(fn=cmd_lift)

    s = sub.add_parser("nested", parents=[common], help="containment chain for a nested pair")
    s.add_argument("pair")
    s.add_argument("factor")
    s.add_argument("--grid", type=int, default=41)
    s.set_defaults(fn=cmd_nested)

    s = sub.add_parser("cor-gen", parents=[common], help="COR(n) slack matrix and NMF error")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(fn=cmd_cor_gen)

    s = sub.add_parser("render", parents=[common], help="SVG of a planar instance")
    s.add_argument("input", help="polytope file or nested-pair file")
    s.add_argument("factor", nargs="?")
    s.add_argument("--rays", type=int, default=256)
    s.add_argument("--bodies", default=None, help="comma list, e.g. P,Inn,Out,Dikin")
    s.add_argument("--boundary", choices=("bisect", "gauge"), default="bisect")
    s.set_defaults(fn=cmd_render)

    s = sub.add_parser("verify-polarity", parents=[common], help="sampled polarity check")
    s.add_argument("polytope")
    s.add_argument("factor", nargs="?")
    s.add_argument("--perturb", default=None, help="i,j,delta added to A[i,j] on the Inn side")
    s.set_defaults(fn=cmd_verify_polarity)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.fn(args)
    except SlackApproxError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
