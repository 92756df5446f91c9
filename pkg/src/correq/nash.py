"""Nash equilibrium verification, regularity analysis, and fixture generation.

Regularity here is the Harsanyi notion: the equilibrium is quasi-strict
(every off-support action is strictly inferior) and the Jacobian of the
stacked indifference maps is nonsingular.  The Jacobian is exposed for
debugging, but only its nonsingularity is contractual: the matrix itself
depends on the (fixed, documented) choice of reference actions.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .games import Game, ProductDist, all_profiles, profile_index
from .linalg import RationalMatrix, rank, solve_linear_system
from .rational import ONE, ZERO, Rat, rat

__all__ = [
    "Support",
    "RegularityReport",
    "support_of",
    "verify_nash",
    "is_quasi_strict",
    "indifference_jacobian",
    "is_regular",
    "two_mixer_regularity",
    "polygon_check",
    "two_player_support_solve",
    "fit_utilities",
]


@dataclass(frozen=True)
class Support:
    """Product support: a sorted nonempty action subset per agent."""

    actions: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for i, acts in enumerate(self.actions):
            if not acts:
                raise ValueError(f"agent {i}: support must be nonempty")
            if list(acts) != sorted(set(acts)):
                raise ValueError(f"agent {i}: support must be sorted and duplicate-free")
            if acts[0] < 0:
                raise ValueError(f"agent {i}: negative action")

    @classmethod
    def of(cls, actions) -> "Support":
        return cls(tuple(tuple(sorted(set(a))) for a in actions))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.actions)

    @property
    def mixers(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.actions) if len(a) >= 2)

    @property
    def num_mixers(self) -> int:
        return len(self.mixers)

    def profiles(self) -> list[tuple[int, ...]]:
        """Profiles of the support box, in global profile-index order."""
        out = [()]
        for acts in reversed(self.actions):
            out = [(a,) + p for p in out for a in acts]
        out.sort(key=lambda p: tuple(reversed(p)))
        return out


def support_of(nu: ProductDist) -> Support:
    return Support(tuple(nu.support(i) for i in range(len(nu.factors))))


def _check_dims(game: Game, nu: ProductDist) -> None:
    if nu.action_counts != game.action_counts:
        raise ValueError("profile does not match the game's action sets")


def pure_payoffs(game: Game, nu: ProductDist, agent: int) -> list[Rat]:
    """Expected payoff of each pure action of ``agent`` against nu_{-i}."""
    _check_dims(game, nu)
    counts = game.action_counts
    others = [i for i in range(game.n) if i != agent]
    out = [ZERO] * counts[agent]
    supports = [nu.support(i) for i in others]
    for combo in itertools.product(*supports):
        w = ONE
        for i, a in zip(others, combo):
            w *= nu.factors[i][a]
        profile = [0] * game.n
        for i, a in zip(others, combo):
            profile[i] = a
        for a in range(counts[agent]):
            profile[agent] = a
            out[a] += w * game.utility(agent, profile)
    return out


def verify_nash(game: Game, nu: ProductDist) -> bool:
    """True iff every on-support action attains the exact best-response value."""
    _check_dims(game, nu)
    for i in range(game.n):
        payoffs = pure_payoffs(game, nu, i)
        best = max(payoffs)
        for a in nu.support(i):
            if payoffs[a] != best:
                return False
    return True


def is_quasi_strict(game: Game, nu: ProductDist) -> bool:
    """True iff every off-support action is strictly inferior.

    Requires ``nu`` to be a Nash equilibrium.
    """
    if not verify_nash(game, nu):
        raise ValueError("profile is not a Nash equilibrium")
    for i in range(game.n):
        payoffs = pure_payoffs(game, nu, i)
        support = set(nu.support(i))
        value = payoffs[next(iter(support))]
        for a in range(game.action_counts[i]):
            if a not in support and payoffs[a] >= value:
                return False
    return True


def _references(support: Support, reference: Optional[Sequence[int]]) -> tuple[int, ...]:
    if reference is None:
        return tuple(acts[0] for acts in support.actions)
    reference = tuple(reference)
    for i, (ref, acts) in enumerate(zip(reference, support.actions)):
        if ref not in acts:
            raise ValueError(f"agent {i}: reference action {ref} outside the support")
    return reference


def indifference_jacobian(
    game: Game, nu: ProductDist, reference: Optional[Sequence[int]] = None
) -> RationalMatrix:
    """Jacobian of the stacked indifference maps at the equilibrium.

    Rows and columns are indexed by pairs (agent i, action a in S_i minus the
    reference), agents ascending, actions ascending; columns for j = i are
    zero because an agent's own weights do not enter her indifference map.
    """
    _check_dims(game, nu)
    if not verify_nash(game, nu):
        raise ValueError("profile is not a Nash equilibrium")
    support = support_of(nu)
    refs = _references(support, reference)
    coords = [
        (i, a)
        for i in range(game.n)
        for a in support.actions[i]
        if a != refs[i]
    ]
    rows = []
    for (i, ai) in coords:
        row = []
        for (j, aj) in coords:
            if j == i:
                row.append(ZERO)
                continue
            others = [l for l in range(game.n) if l not in (i, j)]
            entry = ZERO
            for combo in itertools.product(*[support.actions[l] for l in others]):
                w = ONE
                for l, a in zip(others, combo):
                    w *= nu.factors[l][a]
                profile = [0] * game.n
                for l, a in zip(others, combo):
                    profile[l] = a

                def du(own: int, opp: int) -> Rat:
                    profile[i] = own
                    profile[j] = opp
                    return game.utility(i, profile)

                diff = (
                    du(ai, aj)
                    - du(refs[i], aj)
                    - du(ai, refs[j])
                    + du(refs[i], refs[j])
                )
                if diff:
                    entry += w * diff
            row.append(entry)
        rows.append(row)
    d = len(coords)
    return RationalMatrix.from_rows(rows, cols=d)


@dataclass(frozen=True)
class RegularityReport:
    quasi_strict: bool
    jacobian: RationalMatrix
    jacobian_nonsingular: bool
    regular: bool


def is_regular(game: Game, nu: ProductDist) -> RegularityReport:
    """Regularity report: quasi-strictness plus an exact Jacobian rank test."""
    quasi = is_quasi_strict(game, nu)  # also enforces the Nash precondition
    jac = indifference_jacobian(game, nu)
    nonsingular = rank(jac) == jac.rows
    return RegularityReport(
        quasi_strict=quasi,
        jacobian=jac,
        jacobian_nonsingular=nonsingular,
        regular=quasi and nonsingular,
    )


def two_mixer_regularity(game: Game, nu: ProductDist) -> bool:
    """Regularity via payoff-difference vector independence, two-mixer case.

    Requires exactly two mixing agents with equal support sizes; agrees with
    `is_regular` whenever that precondition holds.
    """
    _check_dims(game, nu)
    support = support_of(nu)
    mixers = support.mixers
    if len(mixers) != 2:
        raise ValueError("exactly two agents must mix")
    i, j = mixers
    si, sj = support.actions[i], support.actions[j]
    if len(si) != len(sj):
        raise ValueError("the two mixing agents must have equal support sizes")
    quasi = is_quasi_strict(game, nu)  # enforces the Nash precondition
    rest = [0] * game.n
    for l in range(game.n):
        if l not in (i, j):
            rest[l] = support.actions[l][0]

    def family(owner: int, other: int, own_support, other_support) -> RationalMatrix:
        ref = own_support[0]
        rows = []
        for a in own_support[1:]:
            row = []
            for b in other_support:
                profile = list(rest)
                profile[owner] = a
                profile[other] = b
                hi = game.utility(owner, profile)
                profile[owner] = ref
                lo = game.utility(owner, profile)
                row.append(hi - lo)
            rows.append(row)
        return RationalMatrix.from_rows(rows, cols=len(other_support))

    x = family(i, j, si, sj)
    y = family(j, i, sj, si)
    x_independent = rank(x) == x.rows
    y_independent = rank(y) == y.rows
    return quasi and x_independent and y_independent


def polygon_check(sizes: Sequence[int]) -> bool:
    """Support-size feasibility for regular equilibria.

    Each agent's extra-action count may not exceed everyone else's combined:
    size_i - 1 <= sum_{j != i} (size_j - 1).
    """
    if any(s < 1 for s in sizes):
        raise ValueError("support sizes must be >= 1")
    total = sum(s - 1 for s in sizes)
    return all(s - 1 <= total - (s - 1) for s in sizes)


def _nonneg_solutions(matrix: RationalMatrix, rhs: Sequence[Rat]) -> list[list[Rat]]:
    """All basic nonnegative solutions of an exactly-determined-or-small system.

    Enumerates coordinate subsets, keeping solutions that are unique on their
    subset and nonnegative.  Intended for the tiny systems of support
    enumeration; returns deduplicated points in deterministic order.
    """
    ncols = matrix.cols
    seen = []
    for size in range(ncols + 1):
        for subset in itertools.combinations(range(ncols), size):
            sub = RationalMatrix.from_rows(
                [[matrix.at(r, c) for c in subset] for r in range(matrix.rows)],
                cols=size,
            )
            solved = solve_linear_system(sub, list(rhs))
            if solved is None:
                continue
            point, kernel = solved
            if kernel:
                continue
            if any(v < 0 for v in point):
                continue
            full = [ZERO] * ncols
            for c, v in zip(subset, point):
                full[c] = v
            if full not in seen:
                seen.append(full)
    return seen


def two_player_support_solve(game: Game, support: Support) -> list[ProductDist]:
    """All Nash equilibria with the given product support in a 2-agent game.

    The on-support indifference conditions are linear in the opponent's
    weights; candidates are the nonnegative solutions of those systems,
    filtered through `verify_nash`.  Degenerate supports whose solution set
    is a continuum contribute its basic (vertex) solutions.
    """
    if game.n != 2:
        raise ValueError("support enumeration is implemented for 2-agent games only")
    counts = game.action_counts
    for i in range(2):
        if support.actions[i][-1] >= counts[i]:
            raise ValueError(f"agent {i}: support action out of range")

    def side(opponent: int) -> list[list[Rat]]:
        # weights of `opponent` making the other agent indifferent on its support
        me = 1 - opponent
        mine = support.actions[me]
        theirs = support.actions[opponent]
        ref = mine[0]
        rows = []
        rhs = []
        for a in mine[1:]:
            row = []
            for b in theirs:
                profile = [0, 0]
                profile[me] = a
                profile[opponent] = b
                hi = game.utility(me, profile)
                profile[me] = ref
                lo = game.utility(me, profile)
                row.append(hi - lo)
            rows.append(row)
            rhs.append(ZERO)
        rows.append([ONE] * len(theirs))
        rhs.append(ONE)
        matrix = RationalMatrix.from_rows(rows, cols=len(theirs))
        return _nonneg_solutions(matrix, rhs)

    candidates_2 = side(1)
    candidates_1 = side(0)
    out = []
    for w1 in candidates_1:
        for w2 in candidates_2:
            factors = []
            for i, weights in ((0, w1), (1, w2)):
                full = [ZERO] * counts[i]
                for a, v in zip(support.actions[i], weights):
                    full[a] = v
                factors.append(tuple(full))
            nu = ProductDist(tuple(factors))
            if verify_nash(game, nu) and nu not in out:
                out.append(nu)
    return out


def fit_utilities(
    support: Support,
    nu: ProductDist,
    seed: int,
    action_counts: Sequence[int],
) -> Game:
    """Deterministic quasi-strict-Nash fixture generator.

    Samples integer payoffs from ``seed``, then adds own-action constants so
    that every on-support action of each agent has expected payoff exactly 0
    against nu_{-i} and every off-support action exactly -1.  The returned
    game therefore has ``nu`` as a quasi-strict Nash equilibrium with
    off-support margin exactly 1.
    """
    counts = tuple(int(c) for c in action_counts)
    if len(counts) != len(support.actions):
        raise ValueError("support and action_counts disagree on the number of agents")
    if nu.action_counts != counts:
        raise ValueError("nu does not match action_counts")
    for i, acts in enumerate(support.actions):
        if acts[-1] >= counts[i]:
            raise ValueError(f"agent {i}: support action out of range")
        if nu.support(i) != acts:
            raise ValueError(f"agent {i}: nu must be supported exactly on the given support")

    rng = random.Random(seed)
    n = len(counts)
    total = _profiles_total(counts)
    tables = [[rat(rng.randint(-9, 9)) for _ in range(total)] for _ in range(n)]
    game = Game.from_tables(counts, tables)
    corrected = []
    for i in range(n):
        payoffs = pure_payoffs(game, nu, i)
        on_support = set(support.actions[i])
        shift = [
            -payoffs[a] - (0 if a in on_support else 1) for a in range(counts[i])
        ]
        table = list(game.utilities[i])
        for idx, profile in enumerate(all_profiles(counts)):
            table[idx] = table[idx] + shift[profile[i]]
        corrected.append(tuple(table))
    fitted = Game(counts, tuple(corrected))
    assert verify_nash(fitted, nu) and is_quasi_strict(fitted, nu)
    return fitted


def _profiles_total(counts: Sequence[int]) -> int:
    total = 1
    for c in counts:
        total *= c
    return total
