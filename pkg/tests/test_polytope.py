from __future__ import annotations

import itertools
import random

import pytest

from correq.games import Game, JointDist, ProductDist, all_profiles, profile_index
from correq.linalg import RationalMatrix, rank
from correq.nash import Support, fit_utilities, support_of
from correq.polytope import (
    dimension_report,
    incentive_matrix,
    is_ce,
    is_extreme,
    one_agent_deleted_marginals,
    tangent_space,
    winkler_support_bound,
    zero_marginal_space,
)
from correq.rational import rat

from .oracles import ce_vertices_by_sign_patterns


def test_incentive_matrix_aumann_rows(aumann):
    im = incentive_matrix(aumann)
    assert im.matrix.rows == 4
    mu = [rat("1/4")] * 4  # generic reference point for reading the rows
    # the CE conditions: each of (4,1) [profile (0,1)] and (1,4) [(1,0)]
    # outweighs each of (0,0) [(0,0)] and (3,3) [(1,1)]
    idx = {p: profile_index(p, (2, 2)) for p in all_profiles((2, 2))}
    expected_pairs = {
        ((0, 0, 1), ((0, 1), (0, 0))),
        ((0, 1, 0), ((1, 0), (1, 1))),
        ((1, 0, 1), ((1, 0), (0, 0))),
        ((1, 1, 0), ((0, 1), (1, 1))),
    }
    seen = set()
    for r, label in enumerate(im.labels):
        row = im.matrix.row(r)
        plus = [c for c, v in enumerate(row) if v > 0]
        minus = [c for c, v in enumerate(row) if v < 0]
        assert len(plus) == 1 and len(minus) == 1
        inv = {v: k for k, v in idx.items()}
        seen.add((label, (inv[plus[0]], inv[minus[0]])))
    assert seen == expected_pairs


def test_incentive_matrix_single_action():
    game = Game.from_tables((1, 1), [[rat(3)], [rat(5)]])
    assert incentive_matrix(game).matrix.rows == 0


def test_is_ce_examples(aumann, aumann_uniform):
    third = rat(1, 3)
    assert is_ce(aumann, JointDist.from_weights([0, third, third, third]))
    assert not is_ce(aumann, JointDist.point_mass(0, 4))
    assert is_ce(aumann, aumann_uniform.to_joint())


def test_tangent_space_aumann_trivial(aumann, aumann_uniform):
    space = tangent_space(aumann, aumann_uniform)
    assert space.dim == 0 and space.basis == ()


def test_tangent_space_three_cycle(three_cycle_game, uniform3):
    space = tangent_space(three_cycle_game, uniform3)
    assert space.dim == 1
    (vec,) = space.basis
    # the single direction is the parity vector, up to scale
    base = vec[0]
    assert base != 0
    for idx, profile in enumerate(all_profiles((2, 2, 2))):
        assert vec[idx] == base * (-1) ** (sum(profile) % 2)


def test_tangent_space_rejects_non_nash(aumann):
    with pytest.raises(ValueError, match="is_extreme"):
        tangent_space(aumann, ProductDist.from_factors([[1, 0], [1, 0]]))


def test_tangent_space_rejects_non_quasi_strict():
    # duplicated action: NE exists but an off-support best reply ties
    u = {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 1, (2, 0): 1, (2, 1): 0}
    v = {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 1, (2, 0): 1, (2, 1): 0}
    tables = [
        [u[p] for p in all_profiles((3, 2))],
        [v[(p[0], p[1])] for p in all_profiles((3, 2))],
    ]
    game = Game.from_tables((3, 2), tables)
    nu = ProductDist.from_factors([[rat(1, 2), rat(1, 2), 0], [rat(1, 2), rat(1, 2)]])
    with pytest.raises(ValueError, match="is_extreme"):
        tangent_space(game, nu)


def test_is_extreme_examples(aumann, aumann_uniform, three_cycle_game, uniform3):
    assert is_extreme(aumann, aumann_uniform.to_joint())
    assert is_extreme(aumann, JointDist.point_mass(2, 4))  # strict pure NE (top,right)
    assert not is_extreme(three_cycle_game, uniform3.to_joint())
    with pytest.raises(ValueError):
        is_extreme(aumann, JointDist.point_mass(0, 4))  # not a CE


def test_zero_marginal_space_examples():
    full2 = Support.of([[0, 1]] * 3)
    space = zero_marginal_space(full2, (2, 2, 2))
    assert space.dim == 1
    (vec,) = space.basis
    base = vec[0]
    for idx, profile in enumerate(all_profiles((2, 2, 2))):
        assert vec[idx] == base * (-1) ** (sum(profile) % 2)
    assert zero_marginal_space(Support.of([[0, 1], [0]]), (2, 2)).dim == 0
    assert zero_marginal_space(Support.of([[0, 1, 2]] * 2), (3, 3)).dim == 4


@pytest.mark.parametrize(
    "sizes,counts",
    [((2, 2, 2), (2, 2, 2)), ((2, 3), (3, 3)), ((3, 2, 2), (3, 2, 3))],
)
def test_zero_marginal_basis_properties(sizes, counts):
    support = Support.of([list(range(s)) for s in sizes])
    space = zero_marginal_space(support, counts)
    expected_dim = 1
    for s in sizes:
        expected_dim *= s - 1
    assert space.dim == expected_dim
    for vec in space.basis:
        assert sum(vec, rat(0)) == 0
        for marg in one_agent_deleted_marginals(vec, counts):
            assert all(v == 0 for v in marg)
    # linear independence
    if space.basis:
        m = RationalMatrix.from_rows([list(v) for v in space.basis])
        assert rank(m) == space.dim


def test_zero_marginal_inside_tangent_for_three_cycle(three_cycle_game, uniform3):
    space = tangent_space(three_cycle_game, uniform3)
    zm = zero_marginal_space(support_of(uniform3), (2, 2, 2))
    assert space.dim == zm.dim == 1
    stacked = RationalMatrix.from_rows(
        [list(space.basis[0]), list(zm.basis[0])]
    )
    assert rank(stacked) == 1  # the two spaces coincide


def test_dimension_report_three_cycle(three_cycle_game, uniform3):
    report = dimension_report(three_cycle_game, uniform3)
    assert report.num_mixers == 3
    assert report.dim == 1
    assert report.counting_bound == 1  # 8 - (1 + 6)
    assert report.mixer_bound == 1  # 2^3 - 7
    assert report.support_bound == 7
    assert report.polygon_ok


def test_dimension_report_aumann(aumann, aumann_uniform):
    report = dimension_report(aumann, aumann_uniform)
    assert report.num_mixers == 2 and report.dim == 0
    assert report.mixer_bound is None


def test_mixer_bound_k4():
    from correq.polytope import mixer_dimension_bound

    assert mixer_dimension_bound([2, 2, 2, 2]) == 7  # 2^4 - 9 + (1 - 1)
    assert mixer_dimension_bound([3, 3, 3, 3]) == 2**4 - 9 + (2**4 - 1)
    assert mixer_dimension_bound([2, 2]) is None


def test_extremality_iff_two_mixers_on_fixtures():
    """Regular fitted equilibria are extreme exactly when at most two
    agents mix; for three or more the dimension bounds kick in."""
    cases = [
        ([[0], [0], [0]], (2, 2, 2)),          # k = 0
        ([[0, 1], [0, 1], [0]], (2, 2, 2)),    # k = 2
        ([[0, 1], [0, 1], [0, 1]], (2, 2, 2)),  # k = 3
        ([[0, 1], [0, 1], [0, 1], [0, 1]], (2, 2, 2, 2)),  # k = 4
    ]
    from correq.nash import is_regular
    from correq.polytope import counting_dimension_bound, mixer_dimension_bound

    for seed, (support_lists, counts) in enumerate(cases):
        support = Support.of(support_lists)
        factors = []
        for acts, c in zip(support.actions, counts):
            w = [rat(0)] * c
            for a in acts:
                w[a] = rat(1, len(acts))
            factors.append(w)
        nu = ProductDist.from_factors(factors)
        game = fit_utilities(support, nu, seed=seed, action_counts=counts)
        k = support.num_mixers
        report = is_regular(game, nu)
        extreme = is_extreme(game, nu.to_joint())
        if report.regular:
            assert extreme == (k <= 2)
        if k >= 3:
            space = tangent_space(game, nu)
            assert space.dim >= counting_dimension_bound(support.sizes)
            assert space.dim >= mixer_dimension_bound(support.sizes)


def test_integer_inequality_sweep():
    """Exhaustive check that the counting bound dominates the mixer bound
    for polygon-feasible size vectors with at least three mixers."""
    from correq.nash import polygon_check
    from correq.polytope import counting_dimension_bound, mixer_dimension_bound

    checked = 0
    for n in range(1, 7):
        for sizes in itertools.product(range(1, 6), repeat=n):
            k = sum(1 for s in sizes if s >= 2)
            if k < 3 or not polygon_check(sizes):
                continue
            lower = mixer_dimension_bound(sizes)
            assert counting_dimension_bound(sizes) >= lower
            assert lower >= 2 ** (k - 3)
            checked += 1
    assert checked > 1000


@pytest.mark.parametrize("shape,seed", [((2, 2), 0), ((2, 3), 1), ((2, 2, 2), 2)])
def test_is_extreme_agrees_with_sign_pattern_oracle(shape, seed):
    rng = random.Random(seed)
    total = 1
    for c in shape:
        total *= c
    game = Game.from_tables(
        shape,
        [[rat(rng.randint(-4, 4)) for _ in range(total)] for _ in shape],
    )
    vertices = ce_vertices_by_sign_patterns(game)
    for vertex in vertices:
        assert is_extreme(game, vertex)
        assert len(vertex.support()) <= winkler_support_bound(game)
    for a, b in itertools.combinations(vertices[:6], 2):
        mid = JointDist(tuple((x + y) / 2 for x, y in zip(a.weights, b.weights)))
        assert is_ce(game, mid)
        assert not is_extreme(game, mid)
