"""Exchangeable distributions, urns, and symmetric correlated equilibria.

An exchangeable distribution over n agents with m common actions is a
mixture of extreme exchangeable distributions, one per composition (urn):
draw balls without replacement from an urn whose label counts are the
composition.  Symmetric correlated equilibria of symmetric games are
exactly the urn mixtures satisfying m(m-1) incentive rows in urn
coordinates: conditional on drawing label a from urn k, the opponents'
composition is deterministically k - e_a.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .games import AnonymousForm, Game, JointDist, all_profiles, detect_symmetry
from .improve import Objective
from .linalg import LpProblem, LpStatus, RationalMatrix, lp_solve, rank
from .rational import ONE, ZERO, Rat, rat, rat_str

__all__ = [
    "Composition",
    "UrnMixture",
    "enumerate_compositions",
    "frequency_vector",
    "urn_dist",
    "exchangeable_decompose",
    "mixture_to_joint",
    "urn_incentive_rows",
    "urn_lp",
    "symmetric_ce_lp",
    "symmetric_is_extreme",
    "definetti_tv",
    "mixture_to_dict",
    "mixture_from_dict",
]

Composition = tuple[int, ...]


def enumerate_compositions(n: int, m: int) -> list[Composition]:
    """All length-m nonnegative integer vectors summing to n, lex order.

    There are C(n+m-1, m-1) of them (stars and bars).
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")

    def rec(total: int, bins: int) -> list[Composition]:
        if bins == 1:
            return [(total,)]
        return [
            (first,) + rest
            for first in range(total + 1)
            for rest in rec(total - first, bins - 1)
        ]

    return rec(n, m)


def frequency_vector(profile: Sequence[int], m: int) -> Composition:
    counts = [0] * m
    for a in profile:
        counts[a] += 1
    return tuple(counts)


def urn_dist(counts: Composition) -> JointDist:
    """Sampling n balls without replacement from an urn with ``counts``.

    Every profile with frequency vector ``counts`` gets mass
    prod_j counts_j! / n!; all other profiles get zero.
    """
    counts = tuple(int(k) for k in counts)
    if any(k < 0 for k in counts):
        raise ValueError("counts must be nonnegative")
    n = sum(counts)
    m = len(counts)
    if n < 1:
        raise ValueError("urn must contain at least one ball")
    mass = rat(math.prod(math.factorial(k) for k in counts), math.factorial(n))
    weights = []
    for profile in all_profiles([m] * n):
        weights.append(mass if frequency_vector(profile, m) == counts else ZERO)
    return JointDist(tuple(weights))


@dataclass(frozen=True)
class UrnMixture:
    """Distribution over urns; weights aligned with `enumerate_compositions`."""

    n: int
    m: int
    weights: tuple[Rat, ...]

    def __post_init__(self):
        expect = math.comb(self.n + self.m - 1, self.m - 1)
        if len(self.weights) != expect:
            raise ValueError(f"expected {expect} urn weights, got {len(self.weights)}")
        if any(w < 0 for w in self.weights):
            raise ValueError("negative urn weight")
        if sum(self.weights, ZERO) != 1:
            raise ValueError("urn weights must sum to exactly 1")

    @property
    def compositions(self) -> list[Composition]:
        return enumerate_compositions(self.n, self.m)

    def support(self) -> list[tuple[Composition, Rat]]:
        return [
            (comp, w)
            for comp, w in zip(self.compositions, self.weights)
            if w
        ]


def exchangeable_decompose(mu: JointDist, m: int) -> UrnMixture:
    """Decompose an exchangeable distribution into its unique urn mixture.

    Exchangeability is verified exactly on adjacent transpositions (they
    generate all permutations); a violation raises with the offending
    transposition.  The weight of each urn is the total mass on profiles
    with that frequency vector, and the reconstruction
    sum_k w_k * urn_dist(k) equals ``mu`` exactly.
    """
    total = len(mu.weights)
    n = 0
    size = 1
    while size < total:
        size *= m
        n += 1
    if size != total or n < 1:
        raise ValueError(f"weight vector length {total} is not a power of m={m}")
    counts = [m] * n
    profiles = list(all_profiles(counts))
    index_of = {p: i for i, p in enumerate(profiles)}
    for i in range(n - 1):
        for idx, profile in enumerate(profiles):
            swapped = list(profile)
            swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
            if mu.weights[idx] != mu.weights[index_of[tuple(swapped)]]:
                raise ValueError(
                    f"not exchangeable: swapping agents {i} and {i + 1} changes "
                    f"the mass of profile {profile}"
                )
    comps = enumerate_compositions(n, m)
    pos = {c: i for i, c in enumerate(comps)}
    weights = [ZERO] * len(comps)
    for idx, profile in enumerate(profiles):
        w = mu.weights[idx]
        if w:
            weights[pos[frequency_vector(profile, m)]] += w
    return UrnMixture(n=n, m=m, weights=tuple(weights))


def mixture_to_joint(mixture: UrnMixture) -> JointDist:
    """Expand an urn mixture back into the full profile space."""
    counts = [mixture.m] * mixture.n
    weights = [ZERO] * (mixture.m**mixture.n)
    masses = {}
    for comp, w in mixture.support():
        masses[comp] = (
            w
            * rat(
                math.prod(math.factorial(k) for k in comp),
                math.factorial(mixture.n),
            )
        )
    for idx, profile in enumerate(all_profiles(counts)):
        freq = frequency_vector(profile, mixture.m)
        if freq in masses:
            weights[idx] = masses[freq]
    return JointDist(tuple(weights))


def urn_incentive_rows(
    form: AnonymousForm,
) -> tuple[tuple[tuple[int, int], ...], RationalMatrix]:
    """Incentive rows of the symmetric CE polytope in urn coordinates.

    Row (a, b): sum_k p_k * (k_a / n) * [g(a; k - e_a) - g(b; k - e_a)] >= 0.
    Urns with no a-balls contribute zero (the recommendation never occurs).
    """
    n, m = form.n, form.m
    comps = enumerate_compositions(n, m)
    labels = []
    rows = []
    for a in range(m):
        for b in range(m):
            if b == a:
                continue
            row = []
            for comp in comps:
                if comp[a] == 0:
                    row.append(ZERO)
                    continue
                reduced = list(comp)
                reduced[a] -= 1
                reduced = tuple(reduced)
                diff = form.payoff(a, reduced) - form.payoff(b, reduced)
                row.append(rat(comp[a], n) * diff)
            labels.append((a, b))
            rows.append(row)
    return tuple(labels), RationalMatrix.from_rows(rows, cols=len(comps))


def per_urn_agent_payoff(form: AnonymousForm) -> list[Rat]:
    """Expected payoff of a single agent under each urn (same for all agents)."""
    n, m = form.n, form.m
    out = []
    for comp in enumerate_compositions(n, m):
        acc = ZERO
        for a in range(m):
            if comp[a]:
                reduced = list(comp)
                reduced[a] -= 1
                acc += rat(comp[a], n) * form.payoff(a, tuple(reduced))
        out.append(acc)
    return out


def urn_objective(
    objective: Objective, form: AnonymousForm, game: Optional[Game] = None
) -> list[Rat]:
    """Objective coordinates per urn.

    Agent-weight objectives collapse in closed form (every agent has the
    same per-urn expectation).  Profile-weight objectives require the
    explicit profile space and are meant for small n.
    """
    if objective.agent_weights is not None:
        if len(objective.agent_weights) != form.n:
            raise ValueError("agent weights do not match the game")
        scale = sum(objective.agent_weights, ZERO)
        return [scale * v for v in per_urn_agent_payoff(form)]
    if game is None:
        raise ValueError("profile-weight objectives need the explicit game")
    comps = enumerate_compositions(form.n, form.m)
    pos = {c: i for i, c in enumerate(comps)}
    out = [ZERO] * len(comps)
    weights = objective.expand(game)
    for idx, profile in enumerate(all_profiles(game.action_counts)):
        w = weights[idx]
        if w:
            comp = frequency_vector(profile, form.m)
            mass = rat(
                math.prod(math.factorial(k) for k in comp), math.factorial(form.n)
            )
            out[pos[comp]] += w * mass
    return out


@dataclass(frozen=True)
class SymmetricLpResult:
    mixture: UrnMixture
    value: Rat


def urn_lp(form: AnonymousForm, objective_coords: Sequence[Rat]) -> SymmetricLpResult:
    """Exact LP over urn weights; the optimum is a vertex of the symmetric
    CE polytope in urn coordinates."""
    _, rows = urn_incentive_rows(form)
    num = rows.cols
    problem = LpProblem(
        objective=tuple(objective_coords),
        eq=RationalMatrix.from_rows([[ONE] * num], cols=num),
        eq_rhs=(ONE,),
        ineq=RationalMatrix.from_rows(
            [[-v for v in rows.row(r)] for r in range(rows.rows)], cols=num
        ),
        ineq_rhs=tuple([ZERO] * rows.rows),
    )
    solution = lp_solve(problem)
    if solution.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"urn LP unexpectedly {solution.status.value}")
    return SymmetricLpResult(
        mixture=UrnMixture(n=form.n, m=form.m, weights=solution.point),
        value=solution.value,
    )


def symmetric_ce_lp(game: Game, objective: Objective) -> SymmetricLpResult:
    """Optimal symmetric correlated equilibrium of a symmetric game.

    By symmetry it suffices to impose the incentive rows for a single
    agent, which collapses the problem to m(m-1) constraints over urn
    weights regardless of n.
    """
    form = detect_symmetry(game)
    if form is None:
        raise ValueError("game is not symmetric")
    return urn_lp(form, urn_objective(objective, form, game))


def symmetric_is_extreme(game: Game, mixture: UrnMixture) -> bool:
    """Extremality within the symmetric CE polytope, in urn coordinates.

    Active-set rank test: extreme iff no nonzero signed urn-weight
    perturbation keeps the active incentive rows at zero, stays inside the
    mixture's support, and has zero total weight.
    """
    form = detect_symmetry(game)
    if form is None:
        raise ValueError("game is not symmetric")
    if (form.n, form.m) != (mixture.n, mixture.m):
        raise ValueError("mixture shape does not match the game")
    _, rows = urn_incentive_rows(form)
    values = rows.mul_vector(list(mixture.weights))
    if any(v < 0 for v in values):
        raise ValueError("mixture is not a symmetric correlated equilibrium")
    support = [i for i, w in enumerate(mixture.weights) if w]
    active = [
        [rows.at(r, c) for c in support] for r, v in enumerate(values) if v == 0
    ]
    active.append([ONE] * len(support))
    system = RationalMatrix.from_rows(active, cols=len(support))
    return rank(system) == len(support)


def _falling(base: int, steps: int) -> int:
    out = 1
    for s in range(steps):
        out *= base - s
    return out


def definetti_tv(counts: Composition, draws: int) -> Rat:
    """Exact total-variation distance between the first ``draws`` draws
    without replacement from the urn and i.i.d. draws from counts/n.

    By exchangeability every subset of the same size has the same law, so
    fixing the first coordinates is without loss.  Both laws are invariant
    under permuting the drawn sequence, so the sum over sequences collapses
    to a sum over their frequency vectors.
    """
    counts = tuple(int(k) for k in counts)
    n = sum(counts)
    m = len(counts)
    if not 1 <= draws <= n:
        raise ValueError("draws must be between 1 and n")
    total_falling = _falling(n, draws)
    acc = ZERO
    for freq in enumerate_compositions(draws, m):
        arrangements = math.factorial(draws)
        for c in freq:
            arrangements //= math.factorial(c)
        p_wo = rat(
            math.prod(_falling(k, c) for k, c in zip(counts, freq)), total_falling
        )
        p_iid = ONE
        for k, c in zip(counts, freq):
            if c:
                p_iid *= rat(k, n) ** c
        diff = p_wo - p_iid
        acc += arrangements * (diff if diff >= 0 else -diff)
    return acc / 2


def mixture_to_dict(mixture: UrnMixture) -> dict:
    return {
        "n": mixture.n,
        "m": mixture.m,
        "weights": [
            {"counts": list(comp), "p": rat_str(w)} for comp, w in mixture.support()
        ],
    }


def mixture_from_dict(data: dict) -> UrnMixture:
    n = int(data["n"])
    m = int(data["m"])
    comps = enumerate_compositions(n, m)
    pos = {c: i for i, c in enumerate(comps)}
    weights = [ZERO] * len(comps)
    for item in data["weights"]:
        comp = tuple(int(k) for k in item["counts"])
        if comp not in pos:
            raise ValueError(f"counts {comp} do not form a composition of {n}")
        weights[pos[comp]] = rat(item["p"])
    return UrnMixture(n=n, m=m, weights=tuple(weights))
