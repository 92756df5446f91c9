"""Command-line surface: analyze, optimize, improve, symmetric, binary,
construct.

Reports are JSON on stdout and deterministic: identical inputs produce
byte-identical output.  Exact rationals are serialized as "p/q" strings;
floating point only appears in fields explicitly suffixed "_approx".
Verbosity is controlled by the CORREQ_LOG environment variable
(error, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .congestion import (
    CongestionFn,
    emit_phi_csv,
    emit_phi_svg,
    enumerate_binary_nash,
    finite_n_ce,
    limit_ce_lp,
    phi_curve,
    two_point_solve,
)
from .exchangeable import mixture_to_dict, symmetric_ce_lp
from .games import (
    Game,
    JointDist,
    ProductDist,
    expected_utility,
    load_dist,
    load_game,
    profile_unindex,
    save_dist,
    save_game,
)
from .improve import (
    Objective,
    improving_direction,
    multi_improve_lp,
    optimize_objective,
    payoff_face_dimension,
)
from .nash import is_quasi_strict, polygon_check, support_of, verify_nash
from .polytope import (
    dimension_report,
    is_ce,
    is_extreme,
    tangent_space,
    winkler_support_bound,
)
from .rational import rat, rat_str

log = logging.getLogger("correq")


def _configure_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("CORREQ_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(message)s")


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, indent=2))
    sys.stdout.write("\n")


def _load_objective(spec: str, game: Game) -> Objective:
    if spec == "welfare":
        return Objective.welfare(game.n)
    with open(spec, "r", encoding="utf-8") as fh:
        return _objective_from_dict(json.load(fh))


def _objective_from_dict(data: dict) -> Objective:
    kind = data.get("type")
    if kind == "agent":
        return Objective.per_agent([rat(w) for w in data["weights"]])
    if kind == "profile":
        return Objective.per_profile([rat(w) for w in data["weights"]])
    raise ValueError("objective 'type' must be 'agent' or 'profile'")


def _as_joint(game: Game, dist) -> JointDist:
    return dist.to_joint() if isinstance(dist, ProductDist) else dist


def _support_entries(game: Game, mu: JointDist) -> list[dict]:
    out = []
    for idx in mu.support():
        out.append(
            {
                "profile": list(profile_unindex(idx, game.action_counts)),
                "p": rat_str(mu.weights[idx]),
            }
        )
    return out


def _cmd_analyze(args) -> int:
    game = load_game(args.game)
    dist = load_dist(args.equilibrium)
    if not isinstance(dist, ProductDist):
        raise ValueError("analyze expects a product (mixed-strategy) distribution")
    nash = verify_nash(game, dist)
    support = support_of(dist)
    report = {
        "nash": nash,
        "support_sizes": list(support.sizes),
        "num_mixers": support.num_mixers,
        "polygon_ok": polygon_check(support.sizes),
        "support_bound": winkler_support_bound(game),
        "payoffs": [rat_str(expected_utility(game, dist, i)) for i in range(game.n)],
    }
    joint = dist.to_joint()
    report["is_ce"] = is_ce(game, joint)
    report["extreme"] = is_extreme(game, joint) if report["is_ce"] else None
    if nash:
        from .nash import is_regular

        reg = is_regular(game, dist)
        report["quasi_strict"] = reg.quasi_strict
        report["jacobian_nonsingular"] = reg.jacobian_nonsingular
        report["regular"] = reg.regular
        if reg.quasi_strict:
            dim = dimension_report(game, dist)
            face = payoff_face_dimension(game, dist)
            report["tangent_dim"] = dim.dim
            report["counting_bound"] = dim.counting_bound
            report["mixer_bound"] = dim.mixer_bound
            report["payoff_face"] = {
                "dim_tangent": face.dim_tangent,
                "kernel_dim": face.kernel_dim,
                "image_dim": face.image_dim,
            }
        else:
            report["tangent_dim"] = None
            report["counting_bound"] = None
            report["mixer_bound"] = None
            report["payoff_face"] = None
    else:
        report["quasi_strict"] = None
        report["jacobian_nonsingular"] = None
        report["regular"] = None
        report["tangent_dim"] = None
        report["counting_bound"] = None
        report["mixer_bound"] = None
        report["payoff_face"] = None
    _emit(report)
    return 0


def _cmd_optimize(args) -> int:
    game = load_game(args.game)
    objective = _load_objective(args.objective, game)
    result = optimize_objective(game, objective)
    report = {
        "value": rat_str(result.value),
        "value_approx": float(result.value),
        "support": _support_entries(game, result.dist),
    }
    if args.emit:
        save_dist(result.dist, args.emit)
        report["emitted"] = args.emit
    _emit(report)
    return 0


def _cmd_improve(args) -> int:
    game = load_game(args.game)
    dist = load_dist(args.equilibrium)
    if not isinstance(dist, ProductDist):
        raise ValueError("improve expects a product (mixed-strategy) distribution")
    if args.pareto or args.objectives:
        if args.pareto:
            objectives = [
                Objective.per_agent([1 if j == i else 0 for j in range(game.n)])
                for i in range(game.n)
            ]
        else:
            with open(args.objectives, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            objectives = [_objective_from_dict(item) for item in data["objectives"]]
        result = multi_improve_lp(game, dist, objectives)
        report = {
            "t_star": rat_str(result.t_star),
            "t_star_approx": float(result.t_star),
            "improved_distribution": _support_entries(game, result.dist),
        }
        if args.emit:
            save_dist(result.dist, args.emit)
            report["emitted"] = args.emit
    else:
        objective = _load_objective(args.objective, game)
        result = improving_direction(game, dist, objective)
        if result is None:
            report = {
                "direction": None,
                "epsilon": None,
                "note": "objective is constant on the face carrying the equilibrium",
            }
        else:
            report = {
                "direction": [rat_str(v) for v in result.direction],
                "epsilon": rat_str(result.step),
                "gain": rat_str(result.gain),
                "improved_distribution": _support_entries(game, result.improved),
            }
            if args.emit:
                save_dist(result.improved, args.emit)
                report["emitted"] = args.emit
    _emit(report)
    return 0


def _cmd_symmetric(args) -> int:
    game = load_game(args.game)
    objective = _load_objective(args.objective, game)
    result = symmetric_ce_lp(game, objective)
    report = {
        "value": rat_str(result.value),
        "value_approx": float(result.value),
        "mixture": mixture_to_dict(result.mixture),
    }
    _emit(report)
    return 0


def _parse_poly(text: str) -> CongestionFn:
    return CongestionFn.from_coeffs([rat(part.strip()) for part in text.split(",")])


def _cmd_binary(args) -> int:
    f = _parse_poly(args.f)
    report: dict = {"f_coeffs": [rat_str(c) for c in f.coeffs]}
    if args.two_point:
        result = two_point_solve(f)
        report["theta_star"] = rat_str(result.theta_star)
        report["theta_star_approx"] = float(result.theta_star)
        report["p_star"] = rat_str(result.p_star)
        report["p_star_approx"] = float(result.p_star)
        report["W_star"] = rat_str(result.w_star)
        report["W_star_approx"] = float(result.w_star)
        report["first_best_theta"] = rat_str(result.first_best_theta)
        report["first_best_theta_approx"] = float(result.first_best_theta)
    elif args.limit:
        result = limit_ce_lp(f, args.grid)
        report["grid"] = args.grid
        report["W_star"] = rat_str(result.w_star)
        report["W_star_approx"] = float(result.w_star)
        report["atoms"] = [
            {"theta": rat_str(t), "p": rat_str(w)} for t, w in result.atoms
        ]
    elif args.n:
        design = finite_n_ce(f, args.n)
        eqs = enumerate_binary_nash(f, args.n)
        report["n"] = args.n
        report["W_n"] = rat_str(design.w_n)
        report["W_n_approx"] = float(design.w_n)
        report["mixture"] = mixture_to_dict(design.result.mixture)
        report["pure_nash_counts"] = list(eqs.pure_counts)
        report["mixed_nash_approx"] = [float(m.midpoint) for m in eqs.mixed]
    else:
        raise ValueError("binary needs one of --n, --limit, or --two-point")
    if args.emit_csv or args.emit_svg:
        points = phi_curve(f, args.grid)
        if args.emit_csv:
            emit_phi_csv(points, args.emit_csv)
            report["csv"] = args.emit_csv
        if args.emit_svg:
            optimum = None
            if args.two_point:
                optimum = (result.w_star, rat(0))
            emit_phi_svg(points, args.emit_svg, optimum=optimum)
            report["svg"] = args.emit_svg
    _emit(report)
    return 0


def _cmd_construct(args) -> int:
    from .packing import (
        canonical_game,
        certify_canonical,
        cylinder_pack,
        packing_report,
        verify_packing,
    )

    sizes = [int(part.strip()) for part in args.sizes.split(",")]
    strategic = [s for s in sizes if s >= 2]
    packing = cylinder_pack(strategic)
    report = {"packing": packing_report(packing), "packing_ok": verify_packing(packing)}
    if not args.pack_only:
        cg = canonical_game(sizes)
        cert = certify_canonical(cg)
        report["certificate"] = {
            "uniform_is_nash": cert.uniform_is_nash,
            "tangent_dim": cert.tangent_dim,
            "expected_tangent_dim": cert.expected_tangent_dim,
            "image_dim": cert.image_dim,
            "expected_image_dim": cert.expected_image_dim,
            "t_star": rat_str(cert.t_star) if cert.t_star is not None else None,
        }
        if args.emit_game:
            save_game(cg.game, args.emit_game)
            report["emitted"] = args.emit_game
    _emit(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="correq",
        description="Exact toolkit for correlated-equilibrium polytopes and "
        "equilibrium improvement",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="equilibrium verdicts for a game + profile")
    p.add_argument("game")
    p.add_argument("--equilibrium", required=True)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("optimize", help="maximize a linear objective over the CE polytope")
    p.add_argument("game")
    p.add_argument("--objective", default="welfare", help="'welfare' or an objective JSON file")
    p.add_argument("--emit", help="write the optimal distribution to this file")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("improve", help="improve a Nash equilibrium inside the CE polytope")
    p.add_argument("game")
    p.add_argument("--equilibrium", required=True)
    p.add_argument("--objective", default="welfare")
    p.add_argument("--pareto", action="store_true", help="simultaneously improve all agents")
    p.add_argument("--objectives", help="JSON file with a list of objectives")
    p.add_argument("--emit", help="write the improved distribution to this file")
    p.set_defaults(func=_cmd_improve)

    p = sub.add_parser("symmetric", help="optimal symmetric CE of a symmetric game")
    p.add_argument("game")
    p.add_argument("--objective", default="welfare")
    p.set_defaults(func=_cmd_symmetric)

    p = sub.add_parser("binary", help="binary-action congestion design")
    p.add_argument("--f", required=True, help="comma-separated rational coefficients, ascending")
    p.add_argument("--n", type=int, help="population size for the finite problem")
    p.add_argument("--limit", action="store_true", help="solve the limit problem on a grid")
    p.add_argument("--two-point", dest="two_point", action="store_true")
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--emit-csv", dest="emit_csv")
    p.add_argument("--emit-svg", dest="emit_svg")
    p.set_defaults(func=_cmd_binary)

    p = sub.add_parser("construct", help="cylinder packing and the canonical game")
    p.add_argument("--sizes", required=True, help="comma-separated action-set sizes")
    p.add_argument("--pack-only", dest="pack_only", action="store_true")
    p.add_argument("--emit-game", dest="emit_game")
    p.set_defaults(func=_cmd_construct)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        log.debug("failing command: %r", argv)
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
