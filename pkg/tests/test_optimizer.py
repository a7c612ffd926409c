"""Exact-solver correctness against brute force, tie rules, and validation."""

from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from dfslineup.errors import (
    InfeasibleLineupError,
    MissingActualError,
    PositionShortfallError,
)
from dfslineup.optimizer import (
    FLEX_CONFIGS,
    LINEUP_SIZE,
    Candidate,
    ContestRules,
    Lineup,
    _dp_solve,
    _prune_dominated,
    modal_lineup,
    optimize_all_flex,
    score_lineup,
    solve_config,
    validate_lineup,
)

from .conftest import make_pool
from .oracles import brute_force_all_flex, brute_force_config


def lineup_positions(lineup, pool):
    pos = {c.player_id: c.position for c in pool}
    return Counter(pos[p] for p in lineup.players)


class TestCandidates:
    def test_rejects_bad_position_and_salary(self):
        with pytest.raises(ValueError):
            Candidate("A", "K", 5000, 10.0)
        with pytest.raises(ValueError):
            Candidate("A", "QB", 0, 10.0)
        with pytest.raises(ValueError):
            Candidate("A", "QB", -100, 10.0)

    def test_rules_reject_unknown_flex_config(self):
        with pytest.raises(ValueError):
            ContestRules(n_rb=3, n_wr=4, n_te=1)

    def test_duplicate_ids_rejected(self, rules):
        pool = make_pool(np.random.default_rng(0), 14)
        pool.append(pool[0])
        with pytest.raises(ValueError, match="duplicate"):
            solve_config(pool, rules)


class TestBruteForceAgreement:
    @pytest.mark.parametrize("tie_heavy", [False, True])
    def test_matches_oracle_objective_and_identity(self, rules, tie_heavy):
        rng = np.random.default_rng(42 if tie_heavy else 43)
        for trial in range(40):
            pool = make_pool(rng, int(rng.integers(13, 17)), tie_heavy=tie_heavy)
            for config in FLEX_CONFIGS:
                flex_rules = rules.with_flex(config)
                want = brute_force_config(pool, flex_rules.counts, rules.salary_cap)
                try:
                    lineup = solve_config(pool, flex_rules)
                    got = (lineup.predicted_fpts, lineup.players)
                except InfeasibleLineupError:
                    got = None
                if want is None:
                    assert got is None
                else:
                    assert got[0] == pytest.approx(want[0], abs=1e-9)
                    assert got[1] == want[1]

    def test_all_flex_matches_oracle(self, rules):
        rng = np.random.default_rng(44)
        for trial in range(30):
            pool = make_pool(rng, 15, tie_heavy=(trial % 2 == 0))
            want = brute_force_all_flex(pool, rules.salary_cap)
            try:
                lineup = optimize_all_flex(pool, rules)
                got = (lineup.predicted_fpts, lineup.players)
            except InfeasibleLineupError:
                got = None
            if want is None:
                assert got is None
            else:
                assert got[0] == pytest.approx(want[0], abs=1e-9)
                assert got[1] == want[1]

    def test_pruning_never_changes_the_answer(self, rules):
        rng = np.random.default_rng(45)
        for trial in range(30):
            pool = sorted(
                make_pool(rng, 20, tie_heavy=(trial % 2 == 0)),
                key=lambda c: c.player_id,
            )
            required = rules.counts
            pruned = _prune_dominated(pool, required)
            assert len(pruned) <= len(pool)
            try:
                full = _dp_solve(pool, required, rules.salary_cap)
            except InfeasibleLineupError:
                with pytest.raises(InfeasibleLineupError):
                    _dp_solve(pruned, required, rules.salary_cap)
                continue
            slim = _dp_solve(pruned, required, rules.salary_cap)
            assert sorted(c.player_id for c in full) == sorted(c.player_id for c in slim)


class TestStructure:
    def test_lineup_shape_and_slots(self, rules):
        rng = np.random.default_rng(46)
        lineup = solve_config(make_pool(rng, 16), rules)
        assert len(lineup.players) == LINEUP_SIZE
        assert lineup.players == tuple(sorted(lineup.players))
        labels = [slot for slot, _ in lineup.slots]
        assert labels.count("QB") == 1 and labels.count("DST") == 1
        assert labels.count("FLEX") == 1
        assert sorted(pid for _, pid in lineup.slots) == sorted(lineup.players)
        assert lineup.total_salary <= rules.salary_cap

    def test_flex_slot_gets_lowest_projection_of_its_position(self, rules):
        pool = [
            Candidate("QB1", "QB", 5000, 20.0),
            Candidate("RB1", "RB", 5000, 15.0),
            Candidate("RB2", "RB", 5000, 14.0),
            Candidate("WR1", "WR", 5000, 13.0),
            Candidate("WR2", "WR", 5000, 12.0),
            Candidate("WR3", "WR", 5000, 11.0),
            Candidate("TE1", "TE", 5000, 10.0),
            Candidate("TE2", "TE", 5000, 9.0),
            Candidate("DST1", "DST", 5000, 8.0),
        ]
        lineup = solve_config(pool, ContestRules(n_rb=2, n_wr=3, n_te=2))
        slots = dict((label, pid) for label, pid in lineup.slots)
        assert slots["FLEX"] == "TE2"  # second TE is the flex
        assert slots["TE"] == "TE1"

    def test_position_shortfall(self, rules):
        pool = [c for c in make_pool(np.random.default_rng(47), 16) if c.position != "DST"]
        with pytest.raises(PositionShortfallError) as exc:
            solve_config(pool, rules)
        assert exc.value.position == "DST"

    def test_infeasible_when_cap_too_tight(self):
        pool = make_pool(np.random.default_rng(48), 16)
        with pytest.raises(InfeasibleLineupError):
            optimize_all_flex(pool, ContestRules(salary_cap=10_000))

    def test_monotone_in_cap(self, rules):
        rng = np.random.default_rng(49)
        for _ in range(10):
            pool = make_pool(rng, 15)
            try:
                tight = optimize_all_flex(pool, ContestRules(salary_cap=50_000))
            except InfeasibleLineupError:
                continue
            loose = optimize_all_flex(pool, ContestRules(salary_cap=60_000))
            assert loose.predicted_fpts >= tight.predicted_fpts - 1e-12

    def test_adding_a_candidate_never_hurts(self, rules):
        rng = np.random.default_rng(50)
        for _ in range(10):
            pool = make_pool(rng, 15)
            base = optimize_all_flex(pool, rules)
            bigger = pool + [Candidate("ZZZ", "WR", 3000, float(rng.uniform(1, 30)))]
            again = optimize_all_flex(bigger, rules)
            assert again.predicted_fpts >= base.predicted_fpts - 1e-12

    def test_scaling_projections_preserves_identity(self, rules):
        rng = np.random.default_rng(51)
        pool = make_pool(rng, 16)
        base = optimize_all_flex(pool, rules)
        scaled = [
            Candidate(c.player_id, c.position, c.salary, 2.0 * c.predicted_fpts)
            for c in pool
        ]
        again = optimize_all_flex(scaled, rules)
        assert again.players == base.players

    def test_two_team_requirement(self):
        # Team A dominates; require_two_teams must pull in a team-B player.
        pool = []
        for i, pos in enumerate(
            ["QB", "RB", "RB", "RB", "WR", "WR", "WR", "WR", "TE", "TE", "DST"]
        ):
            pool.append(Candidate(f"A{i:02d}", pos, 4000, 20.0, team="A"))
        pool.append(Candidate("B00", "QB", 4000, 1.0, team="B"))
        pool.append(Candidate("B01", "DST", 4000, 1.0, team="B"))
        single = optimize_all_flex(pool, ContestRules(require_two_teams=False))
        assert all(p.startswith("A") for p in single.players)
        dual = optimize_all_flex(pool, ContestRules(require_two_teams=True))
        teams = {p[0] for p in dual.players}
        assert teams == {"A", "B"}
        assert dual.predicted_fpts == pytest.approx(8 * 20.0 + 1.0)

    def test_two_team_matches_filtered_brute_force(self):
        rng = np.random.default_rng(55)
        teams = ["T1", "T2", "T3"]
        for trial in range(20):
            pool = [
                Candidate(
                    c.player_id,
                    c.position,
                    c.salary,
                    c.predicted_fpts,
                    team=teams[i % len(teams)] if trial % 2 else "T1",
                )
                for i, c in enumerate(make_pool(rng, 14))
            ]
            rules = ContestRules(require_two_teams=True)
            team_of = {c.player_id: c.team for c in pool}

            # Oracle: brute force over configs, keeping only two-team lineups.
            import itertools

            from dfslineup.data import POSITIONS

            best = None
            for config in FLEX_CONFIGS:
                counts = rules.with_flex(config).counts
                groups = {p: [c for c in pool if c.position == p] for p in POSITIONS}
                combos = [itertools.combinations(groups[p], counts[p]) for p in POSITIONS]
                for parts in itertools.product(*combos):
                    team = [c for part in parts for c in part]
                    if sum(c.salary for c in team) > rules.salary_cap:
                        continue
                    if len({c.team for c in team}) < 2:
                        continue
                    value = sum(c.predicted_fpts for c in team)
                    ids = tuple(sorted(c.player_id for c in team))
                    key = (-value, ids)
                    if best is None or key < best[0]:
                        best = (key, value, ids)
            try:
                lineup = optimize_all_flex(pool, rules)
                got = (lineup.predicted_fpts, lineup.players)
                assert len({team_of[p] for p in lineup.players}) >= 2
            except InfeasibleLineupError:
                got = None
            if best is None:
                assert got is None
            else:
                assert got[0] == pytest.approx(best[1], abs=1e-9)
                assert got[1] == best[2]


class TestModalAndScoring:
    def lineup(self, ids, fpts=100.0):
        players = tuple(sorted(ids))
        return Lineup(
            players=players,
            slots=[("S", p) for p in players],
            flex_config=(2, 3, 2),
            total_salary=45_000,
            predicted_fpts=fpts,
        )

    def test_modal_picks_most_frequent(self):
        a, b = self.lineup("ABCDEFGHI"), self.lineup("ABCDEFGHJ")
        assert modal_lineup([a, b, b, a, b]).players == b.players

    def test_modal_tie_breaks_lexicographically(self):
        a, b = self.lineup("ABCDEFGHJ"), self.lineup("ABCDEFGHI")
        assert modal_lineup([a, b]).players == b.players

    def test_modal_empty_rejected(self):
        with pytest.raises(ValueError):
            modal_lineup([])

    def test_score_lineup(self):
        lu = self.lineup("ABC")
        assert score_lineup(lu, {"A": 1.0, "B": 2.0, "C": 3.5}) == pytest.approx(6.5)
        with pytest.raises(MissingActualError) as exc:
            score_lineup(lu, {"A": 1.0, "B": 2.0})
        assert exc.value.player_id == "C"


class TestValidator:
    def test_accepts_solver_output(self, rules):
        pool = make_pool(np.random.default_rng(52), 16)
        lineup = optimize_all_flex(pool, rules)
        flex_rules = rules.with_flex(lineup.flex_config)
        salary = {c.player_id: c.salary for c in pool}
        position = {c.player_id: c.position for c in pool}
        assert validate_lineup(lineup, flex_rules, salary, position) == []

    def test_flags_violations(self, rules):
        pool = make_pool(np.random.default_rng(53), 16)
        lineup = optimize_all_flex(pool, rules)
        flex_rules = rules.with_flex(lineup.flex_config)
        position = {c.player_id: c.position for c in pool}
        # Inflated salaries push the honest total over the cap.
        salary = {c.player_id: 40_000 for c in pool}
        problems = validate_lineup(lineup, flex_rules, salary, position)
        assert any("exceeds cap" in p for p in problems)
        # Corrupt a position so the counts no longer match.
        position[lineup.players[0]] = "QB" if position[lineup.players[0]] != "QB" else "RB"
        salary = {c.player_id: c.salary for c in pool}
        problems = validate_lineup(lineup, flex_rules, salary, position)
        assert any(p.startswith("position") for p in problems)

    def test_flags_min_salary_and_single_team(self, rules):
        pool = make_pool(np.random.default_rng(54), 16)
        lineup = optimize_all_flex(pool, rules)
        flex_rules = rules.with_flex(lineup.flex_config)
        salary = {c.player_id: c.salary for c in pool}
        position = {c.player_id: c.position for c in pool}
        problems = validate_lineup(lineup, flex_rules, salary, position, min_salary=60_000)
        assert any("below minimum" in p for p in problems)
        two_team_rules = ContestRules(
            n_rb=flex_rules.n_rb,
            n_wr=flex_rules.n_wr,
            n_te=flex_rules.n_te,
            require_two_teams=True,
        )
        team = {c.player_id: "SAME" for c in pool}
        problems = validate_lineup(
            lineup, two_team_rules, salary, position, team_by_id=team
        )
        assert any("single team" in p for p in problems)
