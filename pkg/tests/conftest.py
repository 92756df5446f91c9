from __future__ import annotations

import pytest

from correq.games import Game, ProductDist, all_profiles
from correq.rational import rat


def game_from_profile_map(counts, *maps):
    """Build a game from {profile: payoff} dicts, one per agent."""
    tables = [[m[p] for p in all_profiles(counts)] for m in maps]
    return Game.from_tables(counts, tables)


@pytest.fixture
def aumann():
    """Chicken-style 2x2 game: rows (0=top, 1=bottom), cols (0=left, 1=right).

    Payoff pairs: (0,0) (4,1) / (1,4) (3,3).
    """
    u1 = {(0, 0): 0, (0, 1): 4, (1, 0): 1, (1, 1): 3}
    u2 = {(0, 0): 0, (0, 1): 1, (1, 0): 4, (1, 1): 3}
    return game_from_profile_map((2, 2), u1, u2)


@pytest.fixture
def aumann_uniform():
    return ProductDist.uniform((2, 2))


@pytest.fixture
def three_cycle_game():
    """2x2x2 game with u_i depending on own action and the next agent's:
    u_i(a) = (-1)^(a_i + a_{i+1 mod 3}).

    Its uniform equilibrium is regular with one tangent direction, spanned
    by the parity vector; that direction has vanishing deleted marginals.
    """
    counts = (2, 2, 2)
    tables = []
    for i in range(3):
        j = (i + 1) % 3
        tables.append([rat((-1) ** (p[i] + p[j])) for p in all_profiles(counts)])
    return Game.from_tables(counts, tables)


@pytest.fixture
def uniform3():
    return ProductDist.uniform((2, 2, 2))


@pytest.fixture
def matching_pennies():
    u1 = {(0, 0): 1, (0, 1): -1, (1, 0): -1, (1, 1): 1}
    u2 = {p: -v for p, v in u1.items()}
    return game_from_profile_map((2, 2), u1, u2)
