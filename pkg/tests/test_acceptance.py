"""Acceptance suite: one test per criterion, at the stated tolerances.

Every test prints a single PASS line (visible with ``pytest -s`` or in the
captured output) and enforces its runtime budget.  Tolerances are exact
rational equality unless a numeric width is stated.
"""

from __future__ import annotations

import itertools
import math
import random
import time

import pytest

from correq.congestion import (
    CongestionFn,
    build_binary_game,
    enumerate_binary_nash,
    finite_n_ce,
    limit_ce_lp,
    nash_payoff_bound_check,
    two_point_solve,
)
from correq.exchangeable import (
    definetti_tv,
    enumerate_compositions,
    exchangeable_decompose,
    symmetric_ce_lp,
    symmetric_is_extreme,
    urn_dist,
)
from correq.games import (
    Game,
    JointDist,
    ProductDist,
    all_profiles,
    profile_index,
    strategic_shift,
)
from correq.improve import (
    Objective,
    improving_direction,
    multi_improve_lp,
    optimize_objective,
    payoff_face_dimension,
    strategic_perturbation,
)
from correq.linalg import RationalMatrix, rank
from correq.nash import (
    Support,
    fit_utilities,
    is_quasi_strict,
    is_regular,
    polygon_check,
    support_of,
    verify_nash,
)
from correq.packing import canonical_game, certify_canonical, cylinder_pack, verify_packing
from correq.polytope import (
    counting_dimension_bound,
    incentive_matrix,
    is_ce,
    is_extreme,
    mixer_dimension_bound,
    one_agent_deleted_marginals,
    tangent_space,
    winkler_support_bound,
    zero_marginal_space,
)
from correq.rational import rat

from .conftest import game_from_profile_map
from .oracles import enumerate_polytope_vertices

HUMP = CongestionFn.from_coeffs([-1, 8, -8])

SQRT2_MINUS_1 = math.sqrt(2) - 1


def _passed(number: int, label: str, t0: float, budget: float) -> None:
    elapsed = time.perf_counter() - t0
    assert elapsed < budget, f"criterion {number} exceeded {budget}s ({elapsed:.1f}s)"
    print(f"ACCEPTANCE {number:02d} PASS ({elapsed:.1f}s): {label}")


def _aumann() -> Game:
    u1 = {(0, 0): 0, (0, 1): 4, (1, 0): 1, (1, 1): 3}
    u2 = {(0, 0): 0, (0, 1): 1, (1, 0): 4, (1, 1): 3}
    return game_from_profile_map((2, 2), u1, u2)


def test_criterion_01_aumann_exactness():
    t0 = time.perf_counter()
    game = _aumann()
    result = optimize_objective(game, Objective.welfare(2))
    assert result.value == rat(16, 3)
    expected = {
        profile_index((0, 1), (2, 2)): rat(1, 3),  # payoff pair (4,1)
        profile_index((1, 0), (2, 2)): rat(1, 3),  # payoff pair (1,4)
        profile_index((1, 1), (2, 2)): rat(1, 3),  # payoff pair (3,3)
    }
    assert {i: w for i, w in enumerate(result.dist.weights) if w} == expected
    uniform = ProductDist.uniform((2, 2))
    assert verify_nash(game, uniform)
    assert is_extreme(game, uniform.to_joint())
    welfare = Objective.welfare(2)
    assert welfare.pair(game, uniform.to_joint().weights) == 4
    _passed(1, "Aumann game exactness (16/3, thirds support, extreme uniform NE)", t0, 1.0)


def _fixture_configs():
    """(action_counts, support lists, mixer count) covering k in {0,2,3,4,5},
    sizes 2-3, n <= 5, all polygon-feasible."""
    return [
        ((2, 2), [[0], [1]], 0),
        ((3, 3, 3), [[1], [0], [2]], 0),
        ((2, 2, 2, 2, 2), [[0], [0], [1], [1], [0]], 0),
        ((2, 2), [[0, 1], [0, 1]], 2),
        ((3, 3), [[0, 1, 2], [0, 1, 2]], 2),
        ((3, 3, 2), [[0, 1, 2], [0, 1, 2], [0]], 2),
        ((2, 2, 2), [[0, 1], [0, 1], [1]], 2),
        ((3, 3, 2, 2), [[0, 2], [1, 2], [0], [1]], 2),
        ((2, 2, 2), [[0, 1], [0, 1], [0, 1]], 3),
        ((3, 3, 3), [[0, 1, 2], [0, 1, 2], [0, 1, 2]], 3),
        ((3, 3, 2), [[0, 1, 2], [0, 1, 2], [0, 1]], 3),
        ((2, 2, 2, 2), [[0, 1], [0, 1], [0, 1], [0]], 3),
        ((3, 2, 2), [[0, 1, 2], [0, 1], [0, 1]], 3),
        ((2, 2, 2, 2), [[0, 1], [0, 1], [0, 1], [0, 1]], 4),
        ((3, 2, 2, 2), [[0, 1, 2], [0, 1], [0, 1], [0, 1]], 4),
        ((3, 3, 3, 3), [[0, 1, 2], [0, 1, 2], [0, 1, 2], [0, 1, 2]], 4),
        ((2, 2, 2, 2, 2), [[0, 1], [0, 1], [0, 1], [0, 1], [0]], 4),
        ((2, 2, 2, 2, 2), [[0, 1], [0, 1], [0, 1], [0, 1], [0, 1]], 5),
        ((2, 2, 3, 3, 2), [[0, 1], [0, 1], [0, 1, 2], [0, 1, 2], [0, 1]], 5),
        ((3, 3, 3, 3, 3), [[0, 1, 2]] * 5, 5),
    ]


def _fixture_profile(counts, support, skew: bool) -> ProductDist:
    factors = []
    for c, acts in zip(counts, support.actions):
        weights = [rat(0)] * c
        if skew and len(acts) >= 2:
            raw = list(range(1, len(acts) + 1))
            for a, w in zip(acts, raw):
                weights[a] = rat(w, sum(raw))
        else:
            for a in acts:
                weights[a] = rat(1, len(acts))
        factors.append(weights)
    return ProductDist.from_factors(factors)


def test_criterion_02_theorem_suite_100_fixtures():
    t0 = time.perf_counter()
    configs = _fixture_configs()
    total = 0
    regular_count = 0
    for seed in range(5):
        for cfg_index, (counts, support_lists, k) in enumerate(configs):
            support = Support.of(support_lists)
            assert polygon_check(support.sizes)
            nu = _fixture_profile(counts, support, skew=(seed + cfg_index) % 2 == 1)
            game = fit_utilities(support, nu, seed=97 * seed + cfg_index, action_counts=counts)
            assert support.num_mixers == k
            report = is_regular(game, nu)
            if report.regular:
                regular_count += 1
                assert is_extreme(game, nu.to_joint()) == (k <= 2)
            if k >= 3:
                space = tangent_space(game, nu)
                assert space.dim >= counting_dimension_bound(support.sizes)
                assert space.dim >= mixer_dimension_bound(support.sizes)
            total += 1
    assert total == 100
    assert regular_count >= 90  # random payoffs are regular in practice
    _passed(2, f"Theorem-1 suite on {total} fixtures ({regular_count} regular)", t0, 120.0)


def test_criterion_03_parity_game_and_shifted_improvement():
    t0 = time.perf_counter()
    counts = (2, 2, 2)
    tables = []
    for i in range(3):
        j = (i + 1) % 3
        tables.append([rat((-1) ** (p[i] + p[j])) for p in all_profiles(counts)])
    game = Game.from_tables(counts, tables)
    nu = ProductDist.uniform(counts)
    space = tangent_space(game, nu)
    assert space.dim == 1
    (direction,) = space.basis
    base = direction[0]
    assert base != 0
    for idx, profile in enumerate(all_profiles(counts)):
        assert direction[idx] == base * (-1) ** (sum(profile) % 2)
    zm = zero_marginal_space(support_of(nu), counts)
    assert zm.dim == 1
    stacked = RationalMatrix.from_rows([list(direction), list(zm.basis[0])])
    assert rank(stacked) == 1  # the two spaces coincide
    assert improving_direction(game, nu, Objective.welfare(3)) is None
    with pytest.raises(ValueError, match="zero-marginal"):
        strategic_perturbation(game, nu, direction)

    support4 = Support.of([[0, 1]] * 4)
    nu4 = ProductDist.uniform((2, 2, 2, 2))
    fixture = fit_utilities(support4, nu4, seed=3, action_counts=(2, 2, 2, 2))
    tau = next(
        vec
        for vec in tangent_space(fixture, nu4).basis
        if any(
            any(v for v in marg)
            for marg in one_agent_deleted_marginals(vec, (2, 2, 2, 2))
        )
    )
    deltas = strategic_perturbation(fixture, nu4, tau)
    shifted = strategic_shift(fixture, deltas)
    assert incentive_matrix(shifted).matrix == incentive_matrix(fixture).matrix
    result = improving_direction(shifted, nu4, Objective.welfare(4))
    assert result is not None and result.gain > 0
    assert is_ce(shifted, result.improved) and is_ce(shifted, result.worsened)
    _passed(3, "parity 2x2x2 game diagnostics and shifted 4-mixer improvement", t0, 10.0)


def test_criterion_04_integer_inequality_oracle():
    t0 = time.perf_counter()
    checked = 0
    for n in range(1, 7):
        for sizes in itertools.product(range(1, 6), repeat=n):
            k = sum(1 for s in sizes if s >= 2)
            if k < 3 or not polygon_check(sizes):
                continue
            counting = counting_dimension_bound(sizes)
            mixer = mixer_dimension_bound(sizes)
            assert counting >= mixer
            checked += 1
    assert checked > 1000
    _passed(4, f"integer-inequality sweep over {checked} size vectors", t0, 60.0)


def test_criterion_05_design_closed_forms():
    t0 = time.perf_counter()
    result = two_point_solve(HUMP)
    assert abs(float(result.theta_star) - (1 - math.sqrt(2) / 4)) < 1e-9
    assert abs(float(result.p_star) - (4 + math.sqrt(2)) / 7) < 1e-9
    assert abs(float(result.w_star) - SQRT2_MINUS_1) < 1e-9
    assert abs(float(result.first_best_theta) - (4 + math.sqrt(10)) / 12) < 1e-9
    assert result.theta_star > result.first_best_theta
    design = limit_ce_lp(HUMP, 2000)
    assert abs(float(design.w_star) - SQRT2_MINUS_1) < 1e-3
    _passed(5, "two-point closed forms to 1e-9 and grid-2000 LP to 1e-3", t0, 30.0)


def test_criterion_06_finite_population_convergence():
    t0 = time.perf_counter()
    from correq.congestion import _indifference_polynomial, _poly_eval

    sizes = [25, 50, 100, 200, 400]
    values = []
    for n in sizes:
        design = finite_n_ce(HUMP, n)
        equilibria = enumerate_binary_nash(HUMP, n)
        best_nash = max(
            (rat(k, n) * HUMP(rat(k, n)) for k in equilibria.pure_counts),
            default=rat(0),
        )
        assert design.w_n >= best_nash
        assert design.w_n >= 0  # symmetric mixed equilibria pay exactly zero
        poly = _indifference_polynomial(HUMP, n)
        for mixed in equilibria.mixed:
            if mixed.exact is not None:
                assert _poly_eval(poly, mixed.exact) == 0
            else:
                lo, hi = _poly_eval(poly, mixed.low), _poly_eval(poly, mixed.high)
                assert lo * hi <= 0  # a genuine bracket: payoff 0 by indifference
        assert nash_payoff_bound_check(HUMP, n, rat(8))
        values.append(design.w_n)
    for prev, nxt in zip(values, values[1:]):
        assert nxt >= prev - rat(1, 10**6)
    assert abs(float(values[-1]) - SQRT2_MINUS_1) < 0.05
    _passed(
        6,
        "W_n trend " + " <= ".join(f"{float(v):.4f}" for v in values) + " toward sqrt(2)-1",
        t0,
        120.0,
    )


def test_criterion_07_canonical_game_certificate():
    t0 = time.perf_counter()
    cg = canonical_game((2,) * 12)
    assert cg.game.num_profiles == 4096
    assert incentive_matrix(cg.game).matrix.rows == 24
    cert = certify_canonical(cg)
    assert cert.uniform_is_nash
    assert cert.tangent_dim == cert.expected_tangent_dim == 4071
    assert cert.image_dim == cert.expected_image_dim == 12
    assert cert.expected_tangent_dim >= cg.game.n  # interiority threshold
    assert cert.t_star is not None and cert.t_star > 0
    # the improving CE strictly dominates the uniform equilibrium
    _passed(
        7,
        f"canonical 12-agent certificate (dim 4071, image 12, t* = {cert.t_star} > 0)",
        t0,
        300.0,
    )


def test_criterion_08_packing_suite():
    t0 = time.perf_counter()
    for n in range(3, 17):
        assert verify_packing(cylinder_pack((2,) * n))
    rng = random.Random(2024)
    for _ in range(200):
        n = rng.randint(3, 16)
        sizes = [rng.randint(2, 5) for _ in range(n)]
        assert verify_packing(cylinder_pack(sizes))
    _passed(8, "binary n=3..16 and 200 random size vectors pack and verify", t0, 60.0)


def test_criterion_09_exchangeable_suite():
    t0 = time.perf_counter()
    comps = enumerate_compositions(3, 2)
    assert len(comps) == 4
    assert comps == [(0, 3), (1, 2), (2, 1), (3, 0)]
    supports = [urn_dist(c).support() for c in comps]
    assert sorted(len(s) for s in supports) == [1, 1, 3, 3]

    mixture = exchangeable_decompose(ProductDist.uniform((2, 2, 2)).to_joint(), 2)
    assert mixture.weights == (rat(1, 8), rat(3, 8), rat(3, 8), rat(1, 8))
    assert all(w > 0 for w in mixture.weights)

    for n in (3, 4, 5):
        game = build_binary_game(HUMP, n)
        result = symmetric_ce_lp(game, Objective.welfare(n))
        assert sum(1 for w in result.mixture.weights if w) <= 2 * 1 + 1
    rng = random.Random(7)
    three_action = _random_symmetric_game(n=3, m=3, rng=rng)
    result3 = symmetric_ce_lp(three_action, Objective.welfare(3))
    assert sum(1 for w in result3.mixture.weights if w) <= 3 * 2 + 1

    for n in range(3, 21):
        for m in range(2, 7):
            assert math.comb(n + m - 1, m - 1) > m * (m - 1) + 1

    for n in range(1, 11):
        for m in (2, 3):
            for counts in enumerate_compositions(n, m):
                for j in range(1, n + 1):
                    assert definetti_tv(counts, j) <= rat(2 * m * j, n)

    linear = CongestionFn.from_coeffs([1, -2])
    for n in (3, 4, 5):
        game = build_binary_game(linear, n)
        p = rat(n - 2, 2 * (n - 1))
        nu = ProductDist.from_factors([[1 - p, p]] * n)
        assert verify_nash(game, nu)
        urns = exchangeable_decompose(nu.to_joint(), 2)
        assert not symmetric_is_extreme(game, urns)
    _passed(9, "urn counts, decomposition, vertex caps, de Finetti, non-extremality", t0, 120.0)


def _random_symmetric_game(n: int, m: int, rng: random.Random) -> Game:
    from correq.games import _compositions

    table = {
        (a, comp): rat(rng.randint(-5, 5))
        for a in range(m)
        for comp in _compositions(n - 1, m)
    }
    counts = (m,) * n
    tables = []
    for i in range(n):
        rows = []
        for profile in all_profiles(counts):
            comp = [0] * m
            for j, action in enumerate(profile):
                if j != i:
                    comp[action] += 1
            rows.append(table[(profile[i], tuple(comp))])
        tables.append(rows)
    return Game.from_tables(counts, tables)


def test_criterion_10_oracle_equivalence():
    t0 = time.perf_counter()
    shapes = [(2, 2), (2, 3), (2, 4), (2, 2, 2)]
    combinatorial_checked = 0
    for index in range(50):
        shape = shapes[index % len(shapes)]
        rng = random.Random(5000 + index)
        total = math.prod(shape)
        game = Game.from_tables(
            shape,
            [[rat(rng.randint(-4, 4)) for _ in range(total)] for _ in shape],
        )
        im = incentive_matrix(game)
        vertices = _sign_pattern_vertices(game, im)
        bound = winkler_support_bound(game)
        for vertex in vertices:
            assert is_extreme(game, vertex)
            assert len(vertex.support()) <= bound
        for a, b in itertools.combinations(vertices[:4], 2):
            mid = JointDist(tuple((x + y) / 2 for x, y in zip(a.weights, b.weights)))
            assert not is_extreme(game, mid)
        objectives = [Objective.welfare(game.n)] + [
            Objective.per_profile([rat(rng.randint(-3, 3)) for _ in range(total)])
            for _ in range(3)
        ]
        for objective in objectives:
            value = optimize_objective(game, objective).value
            weights = objective.expand(game)
            best = max(
                sum((w * v for w, v in zip(weights, vertex.weights)), rat(0))
                for vertex in vertices
            )
            assert value == best
        if index < 6 and shape != (2, 4):
            neg_rows = [
                [-v for v in im.matrix.row(r)] for r in range(im.matrix.rows)
            ]
            full = enumerate_polytope_vertices(
                [[rat(1)] * total],
                [rat(1)],
                neg_rows,
                [rat(0)] * im.matrix.rows,
                total,
            )
            full_set = {tuple(v) for v in full}
            for vertex in vertices:
                assert tuple(vertex.weights) in full_set
            for point in full:
                assert is_extreme(game, JointDist(point))
            combinatorial_checked += 1
    assert combinatorial_checked >= 4
    _passed(10, "50-game oracle suite (sign-pattern + combinatorial vertices)", t0, 120.0)


def _sign_pattern_vertices(game: Game, im) -> list[JointDist]:
    seen: list[JointDist] = []
    num = game.num_profiles
    for signs in itertools.product((1, -1), repeat=num):
        objective = Objective.per_profile([rat(s) for s in signs])
        result = optimize_objective(game, objective)
        if result.dist not in seen:
            seen.append(result.dist)
    return seen
