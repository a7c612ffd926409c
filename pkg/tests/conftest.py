"""Shared fixtures: the committed season, candidate pools, and pool builders."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from dfslineup.data import POSITIONS, load_player_weeks
from dfslineup.optimizer import Candidate, ContestRules

FIXTURES = Path(__file__).parent / "fixtures"

# Smallest pool that can cover every flex configuration.
_BASE_POSITIONS = [
    "QB", "QB",
    "RB", "RB", "RB",
    "WR", "WR", "WR", "WR",
    "TE", "TE",
    "DST", "DST",
]


@pytest.fixture(scope="session")
def season_csv() -> Path:
    return FIXTURES / "season.csv"


@pytest.fixture(scope="session")
def contest_csv() -> Path:
    return FIXTURES / "contest_results.csv"


@pytest.fixture(scope="session")
def season_table(season_csv):
    return load_player_weeks(season_csv)


@pytest.fixture(scope="session")
def week8_pool(season_table):
    """Week-8 draftable players with positive actual FPTS, as candidates."""
    return [
        Candidate(rec.player_id, rec.position, rec.salary, rec.fpts, team="")
        for rec in season_table
        if rec.week == 8 and rec.draftable and rec.fpts is not None and rec.fpts > 0
    ]


@pytest.fixture
def rules() -> ContestRules:
    return ContestRules()


def make_pool(rng: np.random.Generator, n: int, tie_heavy: bool = False):
    """Random candidate pool guaranteed to cover all five positions."""
    pool = []
    for i in range(n):
        pos = _BASE_POSITIONS[i] if i < len(_BASE_POSITIONS) else POSITIONS[rng.integers(0, 5)]
        if tie_heavy:
            fpts = float(rng.integers(5, 12))
            salary = int(rng.integers(20, 60)) * 100
        else:
            fpts = float(rng.uniform(1.0, 30.0))
            salary = int(rng.integers(20, 96)) * 100
        pool.append(Candidate(f"P{i:03d}", pos, salary, fpts))
    return pool
