"""Finite normal-form games with exact rational payoffs.

Profiles are indexed with agent 0 as the fastest-varying coordinate:
``index = a_0 + |A_0| * (a_1 + |A_1| * (...))``.  Every serialization and
every matrix in the package uses this order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence, Union

from .rational import ONE, ZERO, Rat, rat, rat_json

__all__ = [
    "Game",
    "JointDist",
    "ProductDist",
    "AnonymousForm",
    "profile_index",
    "profile_unindex",
    "all_profiles",
    "opponent_profile_index",
    "expected_utility",
    "strategic_shift",
    "detect_symmetry",
    "load_game",
    "save_game",
    "load_dist",
    "save_dist",
    "game_to_dict",
    "game_from_dict",
    "dist_to_dict",
    "dist_from_dict",
]


def profile_index(actions: Sequence[int], counts: Sequence[int]) -> int:
    """Index of an action profile, agent 0 fastest-varying."""
    if len(actions) != len(counts):
        raise ValueError("profile length mismatch")
    idx = 0
    for a, c in zip(reversed(actions), reversed(counts)):
        if not 0 <= a < c:
            raise ValueError(f"action {a} out of range [0, {c})")
        idx = idx * c + a
    return idx


def profile_unindex(index: int, counts: Sequence[int]) -> tuple[int, ...]:
    """Inverse of `profile_index`."""
    total = 1
    for c in counts:
        total *= c
    if not 0 <= index < total:
        raise ValueError(f"profile index {index} out of range [0, {total})")
    out = []
    for c in counts:
        index, a = divmod(index, c)
        out.append(a)
    return tuple(out)


def all_profiles(counts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All profiles in index order."""
    for idx in range(_num_profiles(counts)):
        yield profile_unindex(idx, counts)


def _num_profiles(counts: Sequence[int]) -> int:
    total = 1
    for c in counts:
        total *= c
    return total


def opponent_profile_index(profile: Sequence[int], counts: Sequence[int], agent: int) -> int:
    """Index of ``profile`` with ``agent``'s coordinate removed.

    The remaining agents keep their relative order and the same
    fastest-first convention.
    """
    reduced = tuple(a for j, a in enumerate(profile) if j != agent)
    reduced_counts = tuple(c for j, c in enumerate(counts) if j != agent)
    return profile_index(reduced, reduced_counts)


@dataclass(frozen=True)
class Game:
    """Normal-form game: per-agent exact rational utility over profiles."""

    action_counts: tuple[int, ...]
    utilities: tuple[tuple[Rat, ...], ...]

    def __post_init__(self):
        if not self.action_counts:
            raise ValueError("a game needs at least one agent")
        if any(c < 1 for c in self.action_counts):
            raise ValueError("every agent needs at least one action")
        if len(self.utilities) != len(self.action_counts):
            raise ValueError("one utility table per agent required")
        expect = self.num_profiles
        for i, table in enumerate(self.utilities):
            if len(table) != expect:
                raise ValueError(f"agent {i}: expected {expect} utilities, got {len(table)}")

    @classmethod
    def from_tables(cls, action_counts: Sequence[int], utilities) -> "Game":
        return cls(
            tuple(int(c) for c in action_counts),
            tuple(tuple(rat(v) for v in table) for table in utilities),
        )

    @property
    def n(self) -> int:
        return len(self.action_counts)

    @property
    def num_profiles(self) -> int:
        return _num_profiles(self.action_counts)

    def utility(self, agent: int, profile: Union[int, Sequence[int]]) -> Rat:
        if not isinstance(profile, int):
            profile = profile_index(profile, self.action_counts)
        return self.utilities[agent][profile]


@dataclass(frozen=True)
class JointDist:
    """Probability distribution over action profiles, exact and validated."""

    weights: tuple[Rat, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise ValueError("negative weight")
        if sum(self.weights, ZERO) != 1:
            raise ValueError("weights must sum to exactly 1")

    @classmethod
    def from_weights(cls, weights) -> "JointDist":
        return cls(tuple(rat(w) for w in weights))

    @classmethod
    def point_mass(cls, index: int, num_profiles: int) -> "JointDist":
        w = [ZERO] * num_profiles
        w[index] = ONE
        return cls(tuple(w))

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.weights) if w)


@dataclass(frozen=True)
class ProductDist:
    """Mixed-strategy profile: one distribution per agent."""

    factors: tuple[tuple[Rat, ...], ...]

    def __post_init__(self):
        for i, f in enumerate(self.factors):
            if any(w < 0 for w in f):
                raise ValueError(f"agent {i}: negative weight")
            if sum(f, ZERO) != 1:
                raise ValueError(f"agent {i}: weights must sum to exactly 1")

    @classmethod
    def from_factors(cls, factors) -> "ProductDist":
        return cls(tuple(tuple(rat(w) for w in f) for f in factors))

    @classmethod
    def uniform(cls, counts: Sequence[int]) -> "ProductDist":
        return cls(tuple(tuple([rat(1, c)] * c) for c in counts))

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    def support(self, agent: int) -> tuple[int, ...]:
        return tuple(a for a, w in enumerate(self.factors[agent]) if w)

    def weight(self, profile: Sequence[int]) -> Rat:
        w = ONE
        for f, a in zip(self.factors, profile):
            w *= f[a]
            if not w:
                return ZERO
        return w

    def to_joint(self) -> JointDist:
        counts = self.action_counts
        return JointDist(tuple(self.weight(p) for p in all_profiles(counts)))


Dist = Union[JointDist, ProductDist]


def expected_utility(game: Game, dist: Dist, agent: int) -> Rat:
    """Exact expected utility of ``agent`` under ``dist``."""
    if isinstance(dist, ProductDist):
        if dist.action_counts != game.action_counts:
            raise ValueError("distribution does not match the game's action sets")
        weights = dist.to_joint().weights
    else:
        if len(dist.weights) != game.num_profiles:
            raise ValueError("distribution does not match the game's profile space")
        weights = dist.weights
    table = game.utilities[agent]
    acc = ZERO
    for w, u in zip(weights, table):
        if w:
            acc += w * u
    return acc


def strategic_shift(game: Game, deltas: Sequence[Optional[Sequence[Rat]]]) -> Game:
    """Add to each ``u_i`` a function of the opponents' actions only.

    ``deltas[i]`` is indexed by the opponent-profile index (see
    `opponent_profile_index`); ``None`` means no shift for that agent.  The
    result is strategically equivalent: all payoff differences between an
    agent's own actions, and hence the correlated-equilibrium set, are
    unchanged.
    """
    if len(deltas) != game.n:
        raise ValueError("one delta table (or None) per agent required")
    counts = game.action_counts
    new_tables = []
    for i, delta in enumerate(deltas):
        if delta is None:
            new_tables.append(game.utilities[i])
            continue
        opp_size = _num_profiles(counts) // counts[i]
        if len(delta) != opp_size:
            raise ValueError(f"agent {i}: expected {opp_size} delta entries, got {len(delta)}")
        delta = [rat(v) for v in delta]
        table = list(game.utilities[i])
        for idx, profile in enumerate(all_profiles(counts)):
            table[idx] = table[idx] + delta[opponent_profile_index(profile, counts, i)]
        new_tables.append(tuple(table))
    return Game(counts, tuple(new_tables))


def _compositions(total: int, bins: int) -> list[tuple[int, ...]]:
    """Nonnegative integer vectors of length ``bins`` summing to ``total``, lex order."""
    if bins == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in _compositions(total - first, bins - 1):
            out.append((first,) + rest)
    return out


@dataclass(frozen=True)
class AnonymousForm:
    """Payoff table of a symmetric game: own action x opponent composition.

    ``payoff(a, comp)`` is the utility of playing ``a`` when the opponents'
    actions have frequency vector ``comp`` (length ``m``, summing to
    ``n - 1``).
    """

    n: int
    m: int
    table: tuple[tuple[int, tuple[int, ...], Rat], ...]

    def payoff(self, action: int, opponents: tuple[int, ...]) -> Rat:
        return self._lookup[(action, tuple(opponents))]

    @cached_property
    def _lookup(self) -> dict:
        return {(a, comp): v for a, comp, v in self.table}


def detect_symmetry(game: Game) -> Optional[AnonymousForm]:
    """Anonymous payoff table if the game is agent-symmetric, else ``None``.

    Symmetry is verified on adjacent transpositions, which generate the full
    permutation group.
    """
    counts = game.action_counts
    m = counts[0]
    if any(c != m for c in counts):
        return None
    n = game.n
    profiles = list(all_profiles(counts))
    for i in range(n - 1):
        for idx, profile in enumerate(profiles):
            swapped = list(profile)
            swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
            sidx = profile_index(swapped, counts)
            for j in range(n):
                tj = j
                if j == i:
                    tj = i + 1
                elif j == i + 1:
                    tj = i
                if game.utilities[j][idx] != game.utilities[tj][sidx]:
                    return None
    table = []
    for a in range(m):
        for comp in _compositions(n - 1, m):
            arrangement = [a]
            for label, count in enumerate(comp):
                arrangement.extend([label] * count)
            value = game.utilities[0][profile_index(arrangement, counts)]
            table.append((a, comp, value))
    return AnonymousForm(n=n, m=m, table=tuple(table))


# ---------------------------------------------------------------------------
# file formats


def game_to_dict(game: Game) -> dict:
    return {
        "players": game.n,
        "actions": list(game.action_counts),
        "utilities": [[rat_json(v) for v in table] for table in game.utilities],
    }


def game_from_dict(data: dict) -> Game:
    counts = [int(c) for c in data["actions"]]
    if int(data["players"]) != len(counts):
        raise ValueError("'players' does not match the length of 'actions'")
    return Game.from_tables(counts, data["utilities"])


def dist_to_dict(dist: Dist) -> dict:
    if isinstance(dist, ProductDist):
        return {
            "type": "product",
            "weights": [[rat_json(w) for w in f] for f in dist.factors],
        }
    return {"type": "joint", "weights": [rat_json(w) for w in dist.weights]}


def dist_from_dict(data: dict) -> Dist:
    kind = data.get("type")
    if kind == "product":
        return ProductDist.from_factors(data["weights"])
    if kind == "joint":
        return JointDist.from_weights(data["weights"])
    raise ValueError("distribution 'type' must be 'joint' or 'product'")


def load_game(path) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        return game_from_dict(json.load(fh))


def save_game(game: Game, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game_to_dict(game), fh, indent=2)
        fh.write("\n")


def load_dist(path) -> Dist:
    with open(path, "r", encoding="utf-8") as fh:
        return dist_from_dict(json.load(fh))


def save_dist(dist: Dist, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dist_to_dict(dist), fh, indent=2)
        fh.write("\n")
