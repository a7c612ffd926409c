#!/usr/bin/env python3
"""Generate the committed synthetic season fixture (300 players x 17 weeks).

32 teams carry 9 players each (1 QB, 2 RB, 3 WR, 2 TE, 1 DST); 12 extra
skill players pad the pool to 300.  Weekly FPTS follow a noisy function of
recent form, home field, spread, and over/under so the signal is learnable.
Every player has a row for all 17 weeks; bye weeks keep the row with an
empty fpts field and draftable=0, giving exactly 5100 records.

Also writes a contest-results fixture (user_rank,fpts) with a small batch
of zero scores mixed in.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
SEED = 20180901

N_TEAMS = 32
WEEKS = range(1, 18)

POSITION_BASE = {"QB": 18.0, "RB": 12.0, "WR": 11.0, "TE": 8.0, "DST": 7.0}
TEAM_ROSTER = ["QB", "RB", "RB", "WR", "WR", "WR", "TE", "TE", "DST"]
EXTRA_PLAYERS = ["RB"] * 4 + ["WR"] * 4 + ["TE"] * 4  # pads 288 -> 300


def main() -> None:
    rng = np.random.default_rng(SEED)

    # Stadium-ish coordinates, one per team.
    lat = rng.uniform(25.0, 48.0, N_TEAMS).round(4)
    lon = rng.uniform(-122.5, -71.0, N_TEAMS).round(4)

    # One bye week per team in weeks 4-12.
    byes = rng.integers(4, 13, N_TEAMS)

    # Weekly rank tables: a slowly drifting permutation of 1..32.
    strength_off = rng.normal(0, 1, N_TEAMS)
    strength_def = rng.normal(0, 1, N_TEAMS)
    off_rank, def_rank = {}, {}
    for wk in WEEKS:
        strength_off += rng.normal(0, 0.25, N_TEAMS)
        strength_def += rng.normal(0, 0.25, N_TEAMS)
        off_rank[wk] = np.argsort(np.argsort(-strength_off)) + 1
        def_rank[wk] = np.argsort(np.argsort(-strength_def)) + 1

    # Weekly pairings among teams not on bye (odd team count: one idles).
    schedule = {}  # (team, week) -> (opp, home, spread, over_under, point_diff)
    for wk in WEEKS:
        active = [t for t in range(N_TEAMS) if byes[t] != wk]
        order = rng.permutation(len(active))
        for i in range(0, len(active) - 1, 2):
            a, b = active[order[i]], active[order[i + 1]]
            edge = strength_off[a] - strength_off[b] + strength_def[b] - strength_def[a]
            spread = float(np.round(-1.5 * edge + rng.normal(0, 1.5), 1))
            total = float(np.round(rng.normal(45.5, 3.5), 1))
            diff = int(np.round(-spread * 1.2 + rng.normal(0, 9)))
            schedule[(a, wk)] = (b, 1, spread, total, diff)
            schedule[(b, wk)] = (a, 0, -spread, total, -diff)

    # A handful of clearly underpriced studs on distinct teams (none on a
    # mid-season bye) mirrors real slates, where consensus value plays exist.
    # Without them every model's optimum is a knife-edge tie and the modal
    # lineup never stabilizes.
    stud_roles = ["QB", "RB", "RB", "RB", "WR", "WR", "WR", "TE", "DST"]
    safe_teams = [t for t in range(N_TEAMS) if byes[t] not in (5, 6, 7, 8)]
    stud_team = {team: stud_roles[i] for i, team in enumerate(safe_teams[: len(stud_roles)])}

    players = []  # (player_id, team, position, skill, misprice)
    stud_ids: set[str] = set()
    counter = {}
    for team in range(N_TEAMS):
        roster = list(TEAM_ROSTER)
        if team < len(EXTRA_PLAYERS):
            roster.append(EXTRA_PLAYERS[team])
        stud_pos = stud_team.get(team)
        for pos in roster:
            counter[pos] = counter.get(pos, 0) + 1
            pid = f"{pos}{counter[pos]:03d}"
            if pos == stud_pos:
                stud_pos = None  # only the first player at the role position
                stud_ids.add(pid)
                skill = 6.0 + float(rng.uniform(0.0, 2.0))
                misprice = -int(1500 + rng.integers(0, 4) * 100)
            else:
                skill = float(rng.normal(0, 3.0))
                # Persistent mild pricing error for everyone else.
                misprice = int(rng.integers(-8, 9)) * 100
            players.append((pid, team, pos, skill, misprice))
    assert len(players) == 300

    rows = []
    recent = {pid: [] for pid, *_ in players}
    for wk in WEEKS:
        for pid, team, pos, skill, misprice in players:
            game = schedule.get((team, wk))
            base = POSITION_BASE[pos] + skill
            if game is None:  # bye: row kept, no game data
                rows.append(
                    [pid, wk, pos, 4000, "", "", "", "", "", "", 0, "", "", "", "", 0]
                )
                continue
            opp, home, spread, total, diff = game
            form = float(np.mean(recent[pid][-3:])) if recent[pid] else base
            fpts = (
                0.55 * base
                + 0.40 * form
                + 1.6 * home
                - 0.30 * spread
                + 0.10 * (total - 45.0)
                + rng.normal(0, 1.2)
            )
            fpts = round(max(0.0, fpts), 2)
            recent[pid].append(fpts)

            missed = rng.random() < 0.04 and pid not in stud_ids  # occasional inactive week
            # Scaled so a random 9-slot lineup sums near the salary cap, the
            # way platform pricing behaves; keeps rejection sampling cheap.
            salary = int(np.clip(round((2500 + 380 * (base - 4)) / 100) * 100, 2000, 9500))
            salary += misprice + int(rng.integers(-1, 2)) * 100
            draftable = 0 if missed and rng.random() < 0.5 else 1
            rows.append(
                [
                    pid,
                    wk,
                    pos,
                    max(salary, 2000),
                    "" if missed else fpts,
                    diff,
                    off_rank[wk][team],
                    def_rank[wk][team],
                    off_rank[wk][opp],
                    def_rank[wk][opp],
                    home,
                    spread,
                    total,
                    lat[opp if home == 0 else team],
                    lon[opp if home == 0 else team],
                    draftable,
                ]
            )

    assert len(rows) == 5100
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    with open(OUT_DIR / "season.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            "player_id,week,position,salary,fpts,point_diff,team_off_rank,"
            "team_def_rank,opp_off_rank,opp_def_rank,home,spread,over_under,"
            "latitude,longitude,draftable".split(",")
        )
        writer.writerows(rows)

    # Real-world contest results: mildly right-shifted vs the random baseline.
    user_scores = rng.normal(138.0, 32.0, 2400).clip(min=0.0).round(2)
    user_scores[rng.random(2400) < 0.02] = 0.0
    order = np.argsort(-user_scores)
    with open(OUT_DIR / "contest_results.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_rank", "fpts"])
        for rank, idx in enumerate(order, start=1):
            writer.writerow([rank, user_scores[idx]])

    print("studs:", sorted(stud_ids))
    print(f"wrote {OUT_DIR / 'season.csv'} ({len(rows)} rows)")
    print(f"wrote {OUT_DIR / 'contest_results.csv'} (2400 rows)")


if __name__ == "__main__":
    main()
