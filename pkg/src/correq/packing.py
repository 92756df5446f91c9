"""Disjoint cylinder packings and the canonical prediction game.

A cylinder for agent i is a product set (own full action set) x (a box of
opponent actions).  Pairwise-disjoint cylinders with large volume are built
from a binary code on ceil(log2 n) + 1 separation coordinates: each of
those coordinates is split into two halves and the codeword of a cylinder
says which half it occupies.  The canonical game rewards each agent for
exactly predicting the opponers' profile inside her cylinder; at the
uniform equilibrium its incentive rows are independent across agents, which
pins the tangent dimension and fills the payoff image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

from .games import Game, ProductDist, all_profiles
from .improve import Objective, multi_improve_lp, payoff_face_dimension
from .nash import Support, verify_nash
from .polytope import _tangent_system, tangent_space
from .rational import ONE, ZERO, Rat, rat_str

__all__ = [
    "CylinderPacking",
    "CanonicalGame",
    "CanonicalCertificate",
    "CertificationError",
    "cylinder_pack",
    "verify_packing",
    "canonical_game",
    "certify_canonical",
    "packing_report",
]


@dataclass(frozen=True)
class CylinderPacking:
    """Pairwise-disjoint cylinders, one per agent.

    ``boxes[i][j]`` is the set of actions cylinder i allows at coordinate
    j; coordinate i itself always allows the full action set.  Codewords
    have one bit per separation coordinate.
    """

    sizes: tuple[int, ...]
    sep_count: int
    codewords: tuple[tuple[int, ...], ...]
    boxes: tuple[tuple[tuple[int, ...], ...], ...]

    def cylinder_size(self, i: int) -> int:
        return math.prod(len(allowed) for allowed in self.boxes[i])

    def box_size(self, i: int) -> int:
        """Size of the opponent box (cylinder size without the own factor)."""
        return self.cylinder_size(i) // self.sizes[i]


def _halves(size: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # lower half gets floor(size/2) actions
    cut = size // 2
    return tuple(range(cut)), tuple(range(cut, size))


def cylinder_pack(sizes: Sequence[int]) -> CylinderPacking:
    """The codeword construction: separation coordinates are the first
    kc = ceil(log2 n) + 1 coordinates, halved; codewords are e_i + e_(i+1
    mod kc) for i < kc and distinct unused words (excluding all e_j and the
    wrap-around pairs) afterwards.

    Requires n >= 3 agents, every size >= 2; the resulting cylinders are
    pairwise disjoint with |C_i| * 3^kc >= prod(sizes).
    """
    sizes = tuple(int(s) for s in sizes)
    n = len(sizes)
    if n < 3:
        raise ValueError("packing needs at least 3 agents")
    if any(s < 2 for s in sizes):
        raise ValueError("packing needs every action set of size >= 2")
    kc = (n - 1).bit_length() + 1  # ceil(log2 n) + 1 for n >= 2
    codewords: list[tuple[int, ...]] = []
    for i in range(kc):
        word = [0] * kc
        word[i] = 1
        word[(i + 1) % kc] = 1
        codewords.append(tuple(word))
    forbidden = set(codewords)
    for j in range(kc):
        unit = [0] * kc
        unit[j] = 1
        forbidden.add(tuple(unit))
    next_word = 0
    for i in range(kc, n):
        while True:
            bits = tuple((next_word >> b) & 1 for b in range(kc))
            next_word += 1
            if bits not in forbidden:
                forbidden.add(bits)
                codewords.append(bits)
                break
            if next_word > 2**kc:
                raise RuntimeError("ran out of codewords")  # cannot happen
    boxes = []
    for i in range(n):
        row = []
        for j in range(n):
            if j == i:
                row.append(tuple(range(sizes[j])))
            elif j < kc:
                row.append(_halves(sizes[j])[codewords[i][j]])
            else:
                row.append(tuple(range(sizes[j])))
        boxes.append(tuple(row))
    return CylinderPacking(
        sizes=sizes,
        sep_count=kc,
        codewords=tuple(codewords),
        boxes=tuple(boxes),
    )


def verify_packing(packing: CylinderPacking) -> bool:
    """Disjointness, the separation property, and the volume bound.

    Disjointness is coordinate-wise (two boxes are disjoint iff some
    coordinate's allowed sets are); the separation property demands, for
    every pair, a separation coordinate outside the pair with differing
    bits; the volume bound is the exact integer inequality
    |C_i| * 3^kc >= prod(sizes).
    """
    n = len(packing.sizes)
    kc = packing.sep_count
    for i in range(n):
        for j in range(i + 1, n):
            disjoint = any(
                not set(packing.boxes[i][c]) & set(packing.boxes[j][c])
                for c in range(n)
            )
            if not disjoint:
                return False
            separated = any(
                c not in (i, j) and packing.codewords[i][c] != packing.codewords[j][c]
                for c in range(kc)
            )
            if not separated:
                return False
    volume = math.prod(packing.sizes)
    bound = 3**kc
    for i in range(n):
        if packing.cylinder_size(i) * bound < volume:
            return False
    return True


def packing_report(packing: CylinderPacking) -> dict:
    """JSON-ready report: codewords, boxes, sizes, and bound margins."""
    volume = math.prod(packing.sizes)
    bound = 3**packing.sep_count
    return {
        "sizes": list(packing.sizes),
        "separation_coordinates": packing.sep_count,
        "codewords": [list(w) for w in packing.codewords],
        "boxes": [[list(allowed) for allowed in box] for box in packing.boxes],
        "cylinder_sizes": [packing.cylinder_size(i) for i in range(len(packing.sizes))],
        "volume": volume,
        "bound_margins": [
            packing.cylinder_size(i) * bound - volume
            for i in range(len(packing.sizes))
        ],
    }


@dataclass(frozen=True)
class CanonicalGame:
    """Prediction game with 0/1 payoffs certifying the dimension formulas.

    Strategic agent i earns 1 exactly when the other strategic agents play
    the profile her action predicts; dummy agents (single action) carry
    indicator utilities chosen to shrink the payoff-map kernel one step at
    a time.  ``expected_face_dim`` is |A| - 1 - sum |A_i|(|A_i| - 1).
    """

    game: Game
    strategic: tuple[int, ...]
    predictions: tuple[Optional[tuple[tuple[int, ...], ...]], ...]
    expected_face_dim: int


def _box_elements(box: Sequence[Sequence[int]], limit: int) -> list[tuple[int, ...]]:
    """First ``limit`` elements of a coordinate box in lexicographic order.

    Mixed-radix enumeration (last coordinate fastest), so the box is never
    materialized.
    """
    dims = [len(allowed) for allowed in box]
    count = min(limit, math.prod(dims))
    out = []
    for r in range(count):
        idx = r
        positions = []
        for d in reversed(dims):
            idx, pos = divmod(idx, d)
            positions.append(pos)
        positions.reverse()
        out.append(tuple(box[c][pos] for c, pos in enumerate(positions)))
    return out


def canonical_game(sizes: Sequence[int]) -> CanonicalGame:
    """Build the prediction game on the given action sizes.

    Sizes equal to 1 denote dummy agents.  Requires at least 3 strategic
    agents and opponent boxes at least as large as the own action set
    (guaranteed for n >= 12 strategic agents with polygon-feasible sizes);
    raises naming the violating agent otherwise.
    """
    sizes = tuple(int(s) for s in sizes)
    strategic = tuple(i for i, s in enumerate(sizes) if s >= 2)
    strat_sizes = tuple(sizes[i] for i in strategic)
    packing = cylinder_pack(strat_sizes)
    for pos, agent in enumerate(strategic):
        if packing.box_size(pos) < sizes[agent]:
            raise ValueError(
                f"agent {agent}: opponent box holds {packing.box_size(pos)} "
                f"profiles, fewer than the {sizes[agent]} needed for a bijection"
            )
    num = math.prod(sizes)
    profiles = list(all_profiles(sizes))
    predictions: list[Optional[tuple[tuple[int, ...], ...]]] = [None] * len(sizes)
    tables: list[tuple[Rat, ...]] = [tuple([ZERO] * num) for _ in sizes]
    for pos, agent in enumerate(strategic):
        box = [packing.boxes[pos][c] for c in range(len(strategic)) if c != pos]
        chosen = _box_elements(box, sizes[agent])
        predictions[agent] = tuple(chosen)
        others = [a for a in strategic if a != agent]
        table = []
        for profile in profiles:
            observed = tuple(profile[a] for a in others)
            table.append(ONE if observed == chosen[profile[agent]] else ZERO)
        tables[agent] = tuple(table)

    # dummy utilities: indicator rows chosen greedily so that each one
    # shrinks the payoff-map kernel inside the tangent space by exactly one
    q = num - 1 - sum(s * (s - 1) for s in sizes)
    dummies = [i for i, s in enumerate(sizes) if s == 1]
    if dummies:
        provisional = Game(sizes, tuple(tables))
        support = Support.of([range(s) for s in sizes])
        _, system = _tangent_system(provisional, support)
        row_space = _RowSpace([list(system.row(r)) for r in range(system.rows)])
        for agent in strategic:
            row_space.add(list(tables[agent]))
        for agent in dummies:
            chosen_row = None
            for idx in range(num):
                candidate = [ZERO] * num
                candidate[idx] = ONE
                if row_space.add(candidate):
                    chosen_row = candidate
                    break
            tables[agent] = tuple(chosen_row if chosen_row is not None else [ZERO] * num)
    return CanonicalGame(
        game=Game(sizes, tuple(tables)),
        strategic=strategic,
        predictions=tuple(predictions),
        expected_face_dim=q,
    )


class _RowSpace:
    """Incrementally maintained row space with exact membership tests."""

    def __init__(self, rows: list[list[Rat]]):
        from .linalg import _echelon

        self._echelon, self._pivots = _echelon(rows)

    def add(self, row: list[Rat]) -> bool:
        """Reduce ``row`` against the space; add and return True if new."""
        work = list(row)
        for erow, p in zip(self._echelon, self._pivots):
            if work[p]:
                factor = work[p] / erow[p]
                work = [a - factor * b for a, b in zip(work, erow)]
        pivot = next((c for c, v in enumerate(work) if v), None)
        if pivot is None:
            return False
        insert_at = next(
            (k for k, p in enumerate(self._pivots) if p > pivot), len(self._pivots)
        )
        self._echelon.insert(insert_at, work)
        self._pivots.insert(insert_at, pivot)
        return True


class CertificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CanonicalCertificate:
    uniform_is_nash: bool
    tangent_dim: int
    expected_tangent_dim: int
    image_dim: int
    expected_image_dim: int
    t_star: Optional[Rat]


def certify_canonical(cg: CanonicalGame) -> CanonicalCertificate:
    """Certify the canonical game's headline quantities.

    Checks that the uniform profile is Nash, that the uniform tangent
    dimension equals the expected face dimension, that the payoff image has
    dimension min(number of agents, face dimension), and, when the face
    dimension is at least the agent count, that a correlated equilibrium
    strictly improving every agent exists (positive LP slack).  Raises
    `CertificationError` naming the first failing quantity.
    """
    game = cg.game
    nu = ProductDist.uniform(game.action_counts)
    if not verify_nash(game, nu):
        raise CertificationError("uniform profile is not a Nash equilibrium")
    q = cg.expected_face_dim
    space = tangent_space(game, nu)
    if space.dim != q:
        raise CertificationError(
            f"tangent dimension {space.dim} differs from expected {q}"
        )
    face = payoff_face_dimension(game, nu)
    expected_image = min(game.n, q)
    if face.image_dim != expected_image:
        raise CertificationError(
            f"payoff image dimension {face.image_dim} differs from expected "
            f"{expected_image}"
        )
    t_star: Optional[Rat] = None
    if q >= game.n:
        objectives = [Objective.per_agent([ONE if j == i else ZERO for j in range(game.n)]) for i in range(game.n)]
        result = multi_improve_lp(game, nu, objectives)
        t_star = result.t_star
        if t_star <= 0:
            raise CertificationError(
                f"no strict Pareto improvement found (t* = {rat_str(t_star)})"
            )
    return CanonicalCertificate(
        uniform_is_nash=True,
        tangent_dim=space.dim,
        expected_tangent_dim=q,
        image_dim=face.image_dim,
        expected_image_dim=expected_image,
        t_star=t_star,
    )
