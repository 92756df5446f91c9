"""Optimizing over the CE polytope and improving Nash equilibria.

Improvement directions come from the tangent space at a quasi-strict Nash
equilibrium: any tangent vector pairing nonzero with the objective yields
strictly better and strictly worse correlated equilibria on either side.
Simultaneous (e.g. Pareto) improvement is certified per instance by the
sign of an exact max-min LP, never by genericity reasoning.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .games import Game, JointDist, ProductDist, expected_utility
from .linalg import LpProblem, LpSolution, LpStatus, RationalMatrix, lp_solve, rank
from .polytope import (
    TangentSpace,
    incentive_matrix,
    one_agent_deleted_marginals,
    tangent_space,
)
from .rational import ONE, ZERO, Rat, rat

__all__ = [
    "Objective",
    "OptimizeResult",
    "ImprovementResult",
    "MultiImproveResult",
    "PayoffFaceReport",
    "optimize_objective",
    "improving_direction",
    "max_step",
    "strategic_perturbation",
    "multi_improve_lp",
    "payoff_face_dimension",
]


@dataclass(frozen=True)
class Objective:
    """Linear objective over distributions: per-profile weights, or
    per-agent weights expanded to the weighted utilitarian sum."""

    profile_weights: Optional[tuple[Rat, ...]] = None
    agent_weights: Optional[tuple[Rat, ...]] = None

    def __post_init__(self):
        if (self.profile_weights is None) == (self.agent_weights is None):
            raise ValueError("exactly one of profile_weights / agent_weights required")

    @classmethod
    def per_profile(cls, weights) -> "Objective":
        return cls(profile_weights=tuple(rat(w) for w in weights))

    @classmethod
    def per_agent(cls, alpha) -> "Objective":
        return cls(agent_weights=tuple(rat(a) for a in alpha))

    @classmethod
    def welfare(cls, n: int) -> "Objective":
        return cls.per_agent([ONE] * n)

    def expand(self, game: Game) -> tuple[Rat, ...]:
        """Per-profile weight vector of this objective for ``game``."""
        if self.profile_weights is not None:
            if len(self.profile_weights) != game.num_profiles:
                raise ValueError("profile weights do not match the game")
            return self.profile_weights
        if len(self.agent_weights) != game.n:
            raise ValueError("agent weights do not match the game")
        out = [ZERO] * game.num_profiles
        for alpha, table in zip(self.agent_weights, game.utilities):
            if alpha:
                for idx, u in enumerate(table):
                    out[idx] += alpha * u
        return tuple(out)

    def pair(self, game: Game, vector: Sequence[Rat]) -> Rat:
        """Exact pairing with a (possibly signed) profile-weight vector."""
        weights = self.expand(game)
        acc = ZERO
        for w, v in zip(weights, vector):
            if v and w:
                acc += w * v
        return acc


@dataclass(frozen=True)
class OptimizeResult:
    dist: JointDist
    value: Rat


def _ce_lp(game: Game, objective_vector: Sequence[Rat]) -> LpProblem:
    im = incentive_matrix(game)
    num = game.num_profiles
    neg_rows = [[-v for v in im.matrix.row(r)] for r in range(im.matrix.rows)]
    return LpProblem(
        objective=tuple(objective_vector),
        eq=RationalMatrix.from_rows([[ONE] * num], cols=num),
        eq_rhs=(ONE,),
        ineq=RationalMatrix.from_rows(neg_rows, cols=num),
        ineq_rhs=tuple([ZERO] * im.matrix.rows),
    )


def optimize_objective(game: Game, objective: Objective) -> OptimizeResult:
    """Exact LP optimum of a linear objective over the CE polytope.

    The returned distribution is a vertex, hence an extreme correlated
    equilibrium; ties are resolved deterministically by the fixed pivot
    order.
    """
    solution = lp_solve(_ce_lp(game, objective.expand(game)))
    if solution.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"CE polytope LP unexpectedly {solution.status.value}")
    return OptimizeResult(dist=JointDist(solution.point), value=solution.value)


@dataclass(frozen=True)
class ImprovementResult:
    """Two-sided objective perturbation of a Nash equilibrium."""

    direction: tuple[Rat, ...]
    step: Rat
    improved: JointDist
    worsened: JointDist
    gain: Rat
    loss: Rat


def max_step(game: Game, nu: ProductDist, tau: Sequence[Rat]) -> Optional[Rat]:
    """Largest eps with nu +- eps*tau still a correlated equilibrium.

    ``tau`` must lie in the tangent space at ``nu``; quasi-strictness makes
    the result strictly positive.  ``None`` encodes an unbounded step
    (tau = 0).
    """
    space = tangent_space(game, nu)
    if not space.contains(tau):
        raise ValueError("tau is not in the tangent space at nu")
    if all(v == 0 for v in tau):
        return None
    joint = nu.to_joint().weights
    bound: Optional[Rat] = None
    for idx, t in enumerate(tau):
        if t:
            ratio = joint[idx] / abs(t)
            if bound is None or ratio < bound:
                bound = ratio
    im = incentive_matrix(game)
    values = im.matrix.mul_vector(list(joint))
    moves = im.matrix.mul_vector(list(tau))
    for v, w in zip(values, moves):
        if w:
            ratio = v / abs(w)
            if ratio < bound:
                bound = ratio
    return bound


def improving_direction(
    game: Game, nu: ProductDist, objective: Objective
) -> Optional[ImprovementResult]:
    """Search the tangent space for a direction that moves the objective.

    Returns ``None`` when the objective is constant on the face carrying
    ``nu`` (zero pairing on a basis is zero on the span; a seeded random
    combination is checked as a cheap self-test).  Otherwise the direction
    is normalized so the objective strictly increases, and the step is the
    exact maximal one.
    """
    space = tangent_space(game, nu)
    chosen = None
    for vec in space.basis:
        pairing = objective.pair(game, vec)
        if pairing:
            chosen = (vec, pairing)
            break
    if chosen is None:
        if space.dim:
            rng = random.Random(0)
            mix = [ZERO] * space.num_profiles
            for vec in space.basis:
                c = rat(rng.randint(1, 997))
                for i, v in enumerate(vec):
                    if v:
                        mix[i] += c * v
            assert objective.pair(game, mix) == 0
        return None
    tau, pairing = chosen
    if pairing < 0:
        tau = tuple(-v for v in tau)
    step = max_step(game, nu, tau)
    joint = nu.to_joint().weights
    plus = JointDist(tuple(w + step * t for w, t in zip(joint, tau)))
    minus = JointDist(tuple(w - step * t for w, t in zip(joint, tau)))
    base = objective.pair(game, joint)
    return ImprovementResult(
        direction=tuple(tau),
        step=step,
        improved=plus,
        worsened=minus,
        gain=objective.pair(game, plus.weights) - base,
        loss=objective.pair(game, minus.weights) - base,
    )


def strategic_perturbation(
    game: Game, nu: ProductDist, tau: Sequence[Rat]
) -> list[Optional[list[Rat]]]:
    """A strategically equivalent shift whose welfare pairs with ``tau``.

    Picks the first agent and opponent profile whose one-agent-deleted
    marginal of ``tau`` is nonzero and puts weight 1/marginal there, so the
    shift's welfare pairing with ``tau`` is exactly 1 (scaled to 2 in the
    degenerate case where the original welfare pairing is exactly -1, to
    keep the shifted game improvable along ``tau``).  Raises when every
    deleted marginal vanishes: such ``tau`` pairs to zero with every
    strategically equivalent perturbation.
    """
    space = tangent_space(game, nu)
    if not space.contains(tau):
        raise ValueError("tau is not in the tangent space at nu")
    counts = game.action_counts
    marginals = one_agent_deleted_marginals(tau, counts)
    found = None
    for i, marg in enumerate(marginals):
        for opp_idx, value in enumerate(marg):
            if value:
                found = (i, opp_idx, value)
                break
        if found:
            break
    if found is None:
        raise ValueError(
            "no strategically equivalent perturbation pairs with tau: "
            "all one-agent-deleted marginals vanish (tau lies in the "
            "zero-marginal space)"
        )
    welfare = Objective.welfare(game.n)
    scale = ONE
    if welfare.pair(game, tau) == -1:
        scale = rat(2)
    i, opp_idx, value = found
    deltas: list[Optional[list[Rat]]] = [None] * game.n
    opp_size = game.num_profiles // counts[i]
    delta = [ZERO] * opp_size
    delta[opp_idx] = scale / value
    deltas[i] = delta
    return deltas


@dataclass(frozen=True)
class MultiImproveResult:
    """Best uniform slack over a set of objectives within the CE polytope."""

    t_star: Rat
    dist: JointDist


def multi_improve_lp(
    game: Game, nu: ProductDist, objectives: Sequence[Objective]
) -> MultiImproveResult:
    """Maximize t with mu a CE and every objective improved by at least t.

    ``t_star > 0`` certifies simultaneous strict improvement of all
    objectives over ``nu`` (for objectives = the agents' utilities: a
    correlated equilibrium strictly Pareto dominating ``nu``).  ``t_star
    <= 0`` certifies none exists.
    """
    if not objectives:
        raise ValueError("at least one objective required")
    num = game.num_profiles
    joint = nu.to_joint().weights
    im = incentive_matrix(game)
    ineq_rows = [[-v for v in im.matrix.row(r)] + [ZERO] for r in range(im.matrix.rows)]
    ineq_rhs = [ZERO] * im.matrix.rows
    for objective in objectives:
        weights = objective.expand(game)
        base = objective.pair(game, joint)
        #  f(mu) >= f(nu) + t   <=>   -f(mu) + t <= -f(nu)
        ineq_rows.append([-w for w in weights] + [ONE])
        ineq_rhs.append(-base)
    problem = LpProblem(
        objective=tuple([ZERO] * num + [ONE]),
        eq=RationalMatrix.from_rows([[ONE] * num + [ZERO]], cols=num + 1),
        eq_rhs=(ONE,),
        ineq=RationalMatrix.from_rows(ineq_rows, cols=num + 1),
        ineq_rhs=tuple(ineq_rhs),
        nonneg=tuple([True] * num + [False]),
    )
    solution = lp_solve(problem)
    if solution.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"improvement LP unexpectedly {solution.status.value}")
    return MultiImproveResult(
        t_star=solution.value,
        dist=JointDist(tuple(solution.point[:num])),
    )


@dataclass(frozen=True)
class PayoffFaceReport:
    """Rank data of the payoff map restricted to the tangent space."""

    dim_tangent: int
    kernel_dim: int
    image_dim: int


def payoff_face_dimension(game: Game, nu: ProductDist) -> PayoffFaceReport:
    """Dimension of the payoff-polytope face reachable from ``nu``.

    Computed by rank arithmetic: the payoff map restricted to the tangent
    space has image dimension dim T - dim ker, where the kernel is cut out
    by stacking the agents' utility rows under the tangent system.
    """
    space = tangent_space(game, nu)
    system = space._system
    columns = space._columns
    utility_rows = [
        [game.utilities[i][c] for c in columns] for i in range(game.n)
    ]
    stacked = RationalMatrix.from_rows(
        [list(system.row(r)) for r in range(system.rows)] + utility_rows,
        cols=system.cols,
    )
    kernel_dim = system.cols - rank(stacked)
    return PayoffFaceReport(
        dim_tangent=space.dim,
        kernel_dim=kernel_dim,
        image_dim=space.dim - kernel_dim,
    )
