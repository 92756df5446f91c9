"""Correlated-equilibrium polytope: incentive constraints, tangent spaces,
extremality tests, and dimension reports.

The polytope lives in the simplex over action profiles and is cut out by
one linear inequality per (agent, recommended action, deviation) triple.
At a quasi-strict Nash equilibrium the face containing it is the kernel of
an explicit linear system (on-support incentive rows, zero mass off the
support, zero total mass); its dimension is reported exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .games import (
    Game,
    JointDist,
    ProductDist,
    all_profiles,
    opponent_profile_index,
    profile_index,
)
from .linalg import RationalMatrix, null_space, rank
from .nash import Support, is_quasi_strict, polygon_check, support_of, verify_nash
from .rational import ONE, ZERO, Rat

__all__ = [
    "IncentiveMatrix",
    "TangentSpace",
    "ZeroMarginalSpace",
    "DimensionReport",
    "incentive_matrix",
    "is_ce",
    "tangent_space",
    "is_extreme",
    "zero_marginal_space",
    "one_agent_deleted_marginals",
    "dimension_report",
    "winkler_support_bound",
]


@dataclass(frozen=True)
class IncentiveMatrix:
    """Stacked incentive rows: mu is a correlated equilibrium iff
    ``matrix @ mu >= 0`` componentwise.

    Row order is deterministic: agent ascending, then recommended action,
    then deviation.  ``labels[r] = (agent, recommended, deviation)``.
    """

    labels: tuple[tuple[int, int, int], ...]
    matrix: RationalMatrix


def incentive_matrix(game: Game) -> IncentiveMatrix:
    counts = game.action_counts
    num = game.num_profiles
    profiles = list(all_profiles(counts))
    labels = []
    rows = []
    for i in range(game.n):
        for a in range(counts[i]):
            for b in range(counts[i]):
                if b == a:
                    continue
                row = [ZERO] * num
                for idx, profile in enumerate(profiles):
                    if profile[i] != a:
                        continue
                    deviated = list(profile)
                    deviated[i] = b
                    row[idx] = game.utilities[i][idx] - game.utility(i, deviated)
                labels.append((i, a, b))
                rows.append(row)
    return IncentiveMatrix(
        labels=tuple(labels),
        matrix=RationalMatrix.from_rows(rows, cols=num),
    )


def is_ce(game: Game, mu: JointDist) -> bool:
    """Exact check of every incentive inequality."""
    if len(mu.weights) != game.num_profiles:
        raise ValueError("distribution does not match the game's profile space")
    im = incentive_matrix(game)
    return all(v >= 0 for v in im.matrix.mul_vector(list(mu.weights)))


def _tangent_system(game: Game, support: Support) -> tuple[list[int], RationalMatrix]:
    """Support-restricted linear system whose kernel is the tangent space.

    Columns are the support profiles (ascending profile index).  Rows: one
    per ordered on-support pair (a, b) of each agent, plus the zero-total-
    mass row.
    """
    counts = game.action_counts
    sprofiles = support.profiles()
    cols = [profile_index(p, counts) for p in sprofiles]
    rows = []
    for i in range(game.n):
        acts = support.actions[i]
        for a in acts:
            for b in acts:
                if b == a:
                    continue
                row = [ZERO] * len(cols)
                for k, (idx, profile) in enumerate(zip(cols, sprofiles)):
                    if profile[i] != a:
                        continue
                    deviated = list(profile)
                    deviated[i] = b
                    row[k] = game.utilities[i][idx] - game.utility(i, deviated)
                rows.append(row)
    rows.append([ONE] * len(cols))
    return cols, RationalMatrix.from_rows(rows, cols=len(cols))


@dataclass(frozen=True)
class TangentSpace:
    """Tangent space to the CE polytope at a quasi-strict Nash equilibrium.

    ``dim`` is exact; ``basis`` vectors live in the full profile space
    (zero off the support) and are computed lazily because the dimension
    alone is often all that is needed.
    """

    support: Support
    dim: int
    num_profiles: int
    _columns: tuple[int, ...] = field(repr=False)
    _system: RationalMatrix = field(repr=False)

    @cached_property
    def basis(self) -> tuple[tuple[Rat, ...], ...]:
        vectors = []
        for kernel_vec in null_space(self._system):
            full = [ZERO] * self.num_profiles
            for col, v in zip(self._columns, kernel_vec):
                full[col] = v
            vectors.append(tuple(full))
        return tuple(vectors)

    def contains(self, tau: Sequence[Rat]) -> bool:
        """Exact membership test for a signed profile-weight vector."""
        if len(tau) != self.num_profiles:
            return False
        col_set = set(self._columns)
        if any(v for i, v in enumerate(tau) if i not in col_set):
            return False
        restricted = [tau[c] for c in self._columns]
        return all(v == 0 for v in self._system.mul_vector(restricted))


def tangent_space(game: Game, nu: ProductDist) -> TangentSpace:
    """Tangent space at a quasi-strict Nash equilibrium.

    Raises on non-Nash or non-quasi-strict input; for general correlated
    equilibria (or non-quasi-strict Nash points) use `is_extreme`, which
    handles arbitrary active sets.
    """
    if not verify_nash(game, nu):
        raise ValueError("not a Nash equilibrium; use is_extreme for general points")
    if not is_quasi_strict(game, nu):
        raise ValueError(
            "equilibrium is not quasi-strict, so off-support constraints may bind; "
            "use is_extreme for the exact extremality verdict"
        )
    support = support_of(nu)
    cols, system = _tangent_system(game, support)
    dim = len(cols) - rank(system)
    return TangentSpace(
        support=support,
        dim=dim,
        num_profiles=game.num_profiles,
        _columns=tuple(cols),
        _system=system,
    )


def is_extreme(game: Game, mu: JointDist) -> bool:
    """Extremality of a correlated equilibrium via the active-set rank test.

    ``mu`` is extreme iff the only signed vector supported inside supp(mu),
    with zero total mass, annihilating every incentive row active at ``mu``,
    is zero.
    """
    im = incentive_matrix(game)
    values = im.matrix.mul_vector(list(mu.weights))
    if any(v < 0 for v in values):
        raise ValueError("distribution is not a correlated equilibrium")
    support = mu.support()
    active_rows = [
        [im.matrix.at(r, c) for c in support]
        for r, v in enumerate(values)
        if v == 0
    ]
    active_rows.append([ONE] * len(support))
    system = RationalMatrix.from_rows(active_rows, cols=len(support))
    return rank(system) == len(support)


@dataclass(frozen=True)
class ZeroMarginalSpace:
    """Perturbations on the support whose one-agent-deleted marginals vanish.

    Shaped like `TangentSpace` (support, basis, dim); vectors live in the
    full profile space.
    """

    support: Support
    dim: int
    num_profiles: int
    basis: tuple[tuple[Rat, ...], ...]


def zero_marginal_space(
    support: Support, action_counts: Sequence[int]
) -> ZeroMarginalSpace:
    """Closed-form basis of the zero-marginal space on a product support.

    The basis is indexed by the sub-box of non-reference support actions:
    for each combination c the vector is (-1)^(number of reference
    coordinates) on the box prod_i {c_i, ref_i} and zero elsewhere.  The
    dimension is prod_i (|S_i| - 1), in particular 0 as soon as any agent's
    support is a singleton.
    """
    counts = tuple(int(c) for c in action_counts)
    if len(counts) != len(support.actions):
        raise ValueError("support and action_counts disagree on the number of agents")
    for i, acts in enumerate(support.actions):
        if acts[-1] >= counts[i]:
            raise ValueError(f"agent {i}: support action out of range")
    num = 1
    for c in counts:
        num *= c
    refs = tuple(acts[0] for acts in support.actions)
    non_ref = [acts[1:] for acts in support.actions]

    combos = [()]
    for choices in non_ref:
        combos = [c + (a,) for c in combos for a in choices]
    if any(len(choices) == 0 for choices in non_ref):
        combos = []

    basis = []
    for combo in combos:
        vec = [ZERO] * num
        cells = [()]
        for ref, c in zip(refs, combo):
            cells = [cell + (a,) for cell in cells for a in (ref, c)]
        for cell in cells:
            ref_hits = sum(1 for a, ref in zip(cell, refs) if a == ref)
            vec[profile_index(cell, counts)] = ONE if ref_hits % 2 == 0 else -ONE
        basis.append(tuple(vec))

    return ZeroMarginalSpace(
        support=support,
        dim=len(basis),
        num_profiles=num,
        basis=tuple(basis),
    )


def one_agent_deleted_marginals(
    tau: Sequence[Rat], action_counts: Sequence[int]
) -> list[list[Rat]]:
    """For each agent i, the marginal of ``tau`` on the opponents' profiles."""
    counts = tuple(action_counts)
    out = []
    for i in range(len(counts)):
        opp_size = 1
        for j, c in enumerate(counts):
            if j != i:
                opp_size *= c
        marg = [ZERO] * opp_size
        for idx, profile in enumerate(all_profiles(counts)):
            v = tau[idx]
            if v:
                marg[opponent_profile_index(profile, counts, i)] += v
        out.append(marg)
    return out


def winkler_support_bound(game: Game) -> int:
    """Support-size bound for extreme correlated equilibria: n*m*(m-1)+1."""
    m = max(game.action_counts)
    return game.n * m * (m - 1) + 1


@dataclass(frozen=True)
class DimensionReport:
    """Exact tangent dimension against the closed-form lower bounds."""

    num_mixers: int
    dim: int
    #: |S| - (1 + sum |S_i|(|S_i|-1)); valid for every quasi-strict equilibrium.
    counting_bound: int
    #: 2^k - 2k - 1 (+ prod(|S_i|-1) - 1 when k >= 4); None when k < 3.
    mixer_bound: Optional[int]
    #: n*m*(m-1)+1, the support cap for extreme correlated equilibria.
    support_bound: int
    polygon_ok: bool


def counting_dimension_bound(sizes: Sequence[int]) -> int:
    prod = 1
    for s in sizes:
        prod *= s
    return prod - (1 + sum(s * (s - 1) for s in sizes))


def mixer_dimension_bound(sizes: Sequence[int]) -> Optional[int]:
    mixer_sizes = [s for s in sizes if s >= 2]
    k = len(mixer_sizes)
    if k < 3:
        return None
    extra = 0
    if k >= 4:
        prod = 1
        for s in mixer_sizes:
            prod *= s - 1
        extra = prod - 1
    return 2**k - 2 * k - 1 + extra


def dimension_report(game: Game, nu: ProductDist) -> DimensionReport:
    """Mixer count, exact tangent dimension, and the closed-form bounds."""
    space = tangent_space(game, nu)
    sizes = space.support.sizes
    return DimensionReport(
        num_mixers=space.support.num_mixers,
        dim=space.dim,
        counting_bound=counting_dimension_bound(sizes),
        mixer_bound=mixer_dimension_bound(sizes),
        support_bound=winkler_support_bound(game),
        polygon_ok=polygon_check(sizes),
    )
