"""Exact salary-capped lineup optimization via dynamic programming.

The solver maximizes predicted FPTS subject to the salary cap and exact
position counts.  Salaries are reduced by their gcd so the DP runs over a
small grid of salary units; the optimum has a zero optimality gap by
construction.  Ties among equal-objective lineups resolve to the
lexicographically smallest sorted player-id tuple.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from math import gcd
from typing import Optional

import numpy as np

from .data import POSITIONS
from .errors import InfeasibleLineupError, MissingActualError, PositionShortfallError

SALARY_CAP_DEFAULT = 50_000
LINEUP_SIZE = 9

# (n_RB, n_WR, n_TE): the three flex placements; QB and DST are always 1.
FLEX_CONFIGS = ((2, 3, 2), (2, 4, 1), (3, 3, 1))
BASE_COUNTS = {"QB": 1, "RB": 2, "WR": 3, "TE": 1, "DST": 1}

_POS_INDEX = {p: i for i, p in enumerate(POSITIONS)}


@dataclass(frozen=True)
class ContestRules:
    salary_cap: int = SALARY_CAP_DEFAULT
    n_rb: int = 2
    n_wr: int = 3
    n_te: int = 2
    require_two_teams: bool = False

    def __post_init__(self):
        if (self.n_rb, self.n_wr, self.n_te) not in FLEX_CONFIGS:
            raise ValueError(
                f"(n_rb, n_wr, n_te) = {(self.n_rb, self.n_wr, self.n_te)} "
                f"is not one of the flex configurations {FLEX_CONFIGS}"
            )

    @property
    def counts(self) -> dict[str, int]:
        return {"QB": 1, "RB": self.n_rb, "WR": self.n_wr, "TE": self.n_te, "DST": 1}

    def with_flex(self, config) -> "ContestRules":
        n_rb, n_wr, n_te = config
        return ContestRules(
            salary_cap=self.salary_cap,
            n_rb=n_rb,
            n_wr=n_wr,
            n_te=n_te,
            require_two_teams=self.require_two_teams,
        )


@dataclass(frozen=True)
class Candidate:
    player_id: str
    position: str
    salary: int
    predicted_fpts: float
    team: str = ""

    def __post_init__(self):
        if self.position not in POSITIONS:
            raise ValueError(f"unknown position {self.position!r}")
        if not isinstance(self.salary, (int, np.integer)) or self.salary <= 0:
            raise ValueError(
                f"salary must be a positive integer, got {self.salary!r} "
                f"for {self.player_id}"
            )


@dataclass
class Lineup:
    players: tuple[str, ...]  # sorted player ids; the lineup's identity
    slots: list[tuple[str, str]]  # (slot label, player_id)
    flex_config: tuple[int, int, int]
    total_salary: int
    predicted_fpts: float
    actual_fpts: Optional[float] = None


def _assign_slots(by_position: dict[str, list[Candidate]], config) -> list[tuple[str, str]]:
    n_rb, n_wr, n_te = config
    required = {"QB": 1, "RB": n_rb, "WR": n_wr, "TE": n_te, "DST": 1}
    flex_pos = next(p for p in ("RB", "WR", "TE") if required[p] > BASE_COUNTS[p])
    slots = []
    for pos in POSITIONS:
        chosen = sorted(by_position[pos], key=lambda c: (-c.predicted_fpts, c.player_id))
        base = BASE_COUNTS[pos]
        for k, cand in enumerate(chosen):
            if pos == flex_pos and k == base:
                label = "FLEX"
            elif base == 1:
                label = pos
            else:
                label = f"{pos}{k + 1}"
            slots.append((label, cand.player_id))
    return slots


def _build_lineup(chosen: list[Candidate], rules: ContestRules) -> Lineup:
    by_position = {p: [] for p in POSITIONS}
    for cand in chosen:
        by_position[cand.position].append(cand)
    config = (rules.n_rb, rules.n_wr, rules.n_te)
    return Lineup(
        players=tuple(sorted(c.player_id for c in chosen)),
        slots=_assign_slots(by_position, config),
        flex_config=config,
        total_salary=sum(c.salary for c in chosen),
        predicted_fpts=float(sum(c.predicted_fpts for c in chosen)),
    )


def _prune_dominated(cands: list[Candidate], required: dict[str, int]) -> list[Candidate]:
    """Drop candidates that can never appear in the lex-min optimal lineup.

    A rival weakly better in both salary and FPTS (strictly better in FPTS,
    or equal FPTS with a smaller id) is a dominator; with at least k_p
    dominators, any lineup using the candidate can swap one in, so the
    candidate is safe to drop.  Equal-FPTS rivals with larger ids are not
    dominators: swapping them in could break the lexicographic tie rule.
    """
    by_pos: dict[str, list[Candidate]] = {}
    for c in cands:
        by_pos.setdefault(c.position, []).append(c)
    keep = []
    for pos, group in by_pos.items():
        k = required[pos]
        for c in group:
            dominators = 0
            for o in group:
                if o is c or o.salary > c.salary:
                    continue
                if o.predicted_fpts > c.predicted_fpts or (
                    o.predicted_fpts == c.predicted_fpts and o.player_id < c.player_id
                ):
                    dominators += 1
                    if dominators >= k:
                        break
            if dominators < k:
                keep.append(c)
    keep.sort(key=lambda c: c.player_id)
    return keep


def _dp_solve(
    cands: list[Candidate],
    required: dict[str, int],
    cap: int,
    cover_sets: tuple[frozenset, ...] = (),
):
    """Suffix DP over (needed counts, salary budget); returns the chosen set.

    Candidates must be sorted by player_id.  Each entry of ``cover_sets``
    demands at least one chosen player from that id set; every such
    constraint adds one binary plane to the DP state.  Only per-candidate
    take-decision bits are stored; the value grid rolls.  Reconstruction
    walks forward preferring to take, which yields the lexicographically
    smallest sorted id tuple among all optimal lineups.
    """
    unit = 0
    for c in cands:
        unit = gcd(unit, c.salary)
    budget_max = cap // unit if unit else 0
    weights = [c.salary // unit for c in cands] if unit else []
    req = tuple(required[p] for p in POSITIONS)
    k = len(cover_sets)
    # Descending unmet-count order: a plane's take source (componentwise <=)
    # must still hold candidate j+1's values when the plane is updated.
    planes = sorted(np.ndindex(*((2,) * k)), key=sum, reverse=True)
    shape = (2,) * k + tuple(r + 1 for r in req) + (budget_max + 1,)

    # value[f_1..f_k, needed counts, budget]: best completion given that
    # constraint i is still unmet when f_i == 1.
    value = np.full(shape, -np.inf)
    value[(0,) * k + (0,) * len(POSITIONS)] = 0.0
    take_bits = [None] * len(cands)

    for j in range(len(cands) - 1, -1, -1):
        cand, w = cands[j], weights[j]
        axis = k + _POS_INDEX[cand.position]
        bits = np.zeros(shape, dtype=bool)
        if w <= budget_max and req[_POS_INDEX[cand.position]] > 0:
            satisfies = [cand.player_id in cs for cs in cover_sets]
            for dest_plane in planes:
                src_plane = tuple(
                    0 if satisfies[i] else dest_plane[i] for i in range(k)
                )
                take_view = list(dest_plane) + [slice(None)] * (len(req) + 1)
                take_view[axis] = slice(1, None)
                take_view[-1] = slice(w, None)
                src_view = list(src_plane) + [slice(None)] * (len(req) + 1)
                src_view[axis] = slice(0, -1)
                src_view[-1] = slice(0, budget_max + 1 - w)
                take_vals = cand.predicted_fpts + value[tuple(src_view)]
                dest = value[tuple(take_view)]
                np.greater_equal(take_vals, dest, out=bits[tuple(take_view)])
                np.maximum(dest, take_vals, out=dest)
        take_bits[j] = bits

    root = (1,) * k + req + (budget_max,)
    if not np.isfinite(value[root]):
        raise InfeasibleLineupError(
            f"no lineup fits the ${cap:,} salary cap for counts {required}"
        )

    chosen = []
    flags = [1] * k
    need = list(req)
    budget = budget_max
    for j, cand in enumerate(cands):
        axis = _POS_INDEX[cand.position]
        w = weights[j]
        if need[axis] == 0 or w > budget:
            continue
        if take_bits[j][tuple(flags) + tuple(need) + (budget,)]:
            chosen.append(cand)
            need[axis] -= 1
            budget -= w
            for i, cs in enumerate(cover_sets):
                if cand.player_id in cs:
                    flags[i] = 0
            if not any(need):
                break
    return chosen


def _check_pool(cands: list[Candidate], required: dict[str, int]) -> None:
    seen = set()
    for c in cands:
        if c.player_id in seen:
            raise ValueError(f"duplicate candidate id {c.player_id!r}")
        seen.add(c.player_id)
    available = Counter(c.position for c in cands)
    for pos, needed in required.items():
        if available[pos] < needed:
            raise PositionShortfallError(pos, needed, available[pos])


def solve_config(candidates: list[Candidate], rules: ContestRules) -> Lineup:
    """Provably optimal lineup for one fixed flex configuration.

    The two-team rule is enforced by iterative cuts: whenever the optimum
    comes out single-team, a cover constraint ("at least one player from
    another team") is added and the DP re-runs.  Each cut names a new team,
    so the loop terminates; pruning is skipped once cuts exist because
    dominance swaps are not team-aware.
    """
    required = rules.counts
    cands = sorted(candidates, key=lambda c: c.player_id)
    _check_pool(cands, required)
    cover_sets: tuple[frozenset, ...] = ()
    while True:
        pool = cands if cover_sets else _prune_dominated(cands, required)
        chosen = _dp_solve(pool, required, rules.salary_cap, cover_sets)
        if not rules.require_two_teams or len({c.team for c in chosen}) >= 2:
            return _build_lineup(chosen, rules)
        sole_team = chosen[0].team
        outsiders = frozenset(c.player_id for c in cands if c.team != sole_team)
        if not outsiders:
            raise InfeasibleLineupError(
                "two-team rule cannot be met: the pool has a single team"
            )
        cover_sets = cover_sets + (outsiders,)


def optimize_all_flex(candidates: list[Candidate], rules: ContestRules) -> Lineup:
    """Best lineup over the three flex configurations.

    Exact objective ties resolve to the lexicographically smallest sorted
    player-id tuple.
    """
    results = []
    errors = []
    for config in FLEX_CONFIGS:
        try:
            results.append(solve_config(candidates, rules.with_flex(config)))
        except (InfeasibleLineupError, PositionShortfallError) as exc:
            errors.append(f"{config}: {exc}")
    if not results:
        raise InfeasibleLineupError(
            "all flex configurations infeasible: " + "; ".join(errors)
        )
    return min(results, key=lambda lu: (-lu.predicted_fpts, lu.players))


def modal_lineup(lineups: list[Lineup]) -> Lineup:
    """Most frequent lineup identity (set of 9 ids, flex assignment ignored).

    Frequency ties resolve to the lexicographically smallest id tuple.
    """
    if not lineups:
        raise ValueError("empty lineup list")
    counts = Counter(lu.players for lu in lineups)
    winner = min(counts, key=lambda ident: (-counts[ident], ident))
    return next(lu for lu in lineups if lu.players == winner)


def score_lineup(lineup: Lineup, actuals: dict[str, float]) -> float:
    """Sum of the lineup's actual FPTS; raises if any player is missing."""
    total = 0.0
    for pid in lineup.players:
        if pid not in actuals:
            raise MissingActualError(pid)
        total += actuals[pid]
    return total


def validate_lineup(
    lineup: Lineup,
    rules: ContestRules,
    salary_by_id: dict[str, int],
    position_by_id: dict[str, str],
    min_salary: int = 0,
    team_by_id: Optional[dict[str, str]] = None,
) -> list[str]:
    """Independent constraint check; returns a list of violations (empty = valid).

    Deliberately recounts everything from the raw player data rather than
    trusting any field the solver filled in.
    """
    problems = []
    if len(set(lineup.players)) != LINEUP_SIZE:
        problems.append(f"expected {LINEUP_SIZE} distinct players, got {lineup.players}")
        return problems
    counts = Counter(position_by_id[pid] for pid in lineup.players)
    for pos, needed in rules.counts.items():
        if counts[pos] != needed:
            problems.append(f"position {pos}: have {counts[pos]}, need {needed}")
    total = sum(salary_by_id[pid] for pid in lineup.players)
    if total > rules.salary_cap:
        problems.append(f"salary {total} exceeds cap {rules.salary_cap}")
    if total < min_salary:
        problems.append(f"salary {total} below minimum {min_salary}")
    if rules.require_two_teams and team_by_id is not None:
        if len({team_by_id[pid] for pid in lineup.players}) < 2:
            problems.append("all players from a single team")
    return problems
