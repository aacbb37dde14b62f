#!/usr/bin/env python3
# Copyright 2026 The lostatsea Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the test fixtures in this directory.

fixture_cohort.jsonl   two small human groups (identified, pseudonymous)
task_key.json          the six-item key used by the fixtures
hi_matched_cohort.jsonl
    88 identified groups built so that, with max_items = 6, the gap totals
    are self = 26, peer = 50, total = 76 items and 57 elected leaders are
    male. Elections are left for the replay session to derive; each group
    has one strict majority winner, so the expected values do not depend on
    the implementation under test.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
KEY = [
    ("q1", "shaving_mirror", ["shaving_mirror", "sextant"]),
    ("q2", "oil_gas_mixture", ["ocean_maps", "oil_gas_mixture"]),
    ("q3", "water", ["water", "transistor_radio"]),
    ("q4", "army_rations", ["mosquito_netting", "army_rations"]),
    ("q5", "plastic_sheeting", ["plastic_sheeting", "shark_repellent"]),
    ("q6", "chocolate_bars", ["rum", "chocolate_bars"]),
]


def answers(correct_mask):
    out = {}
    for (qid, right, options), ok in zip(KEY, correct_mask):
        out[qid] = right if ok else next(o for o in options if o != right)
    return out


def member(pid, name, avatar, pronouns, survey, pseudonym=None, **stage):
    m = {"id": pid, "profile": {"name": name, "avatar": avatar, "pronouns": pronouns}, "survey": survey}
    if pseudonym:
        m["pseudonym"] = pseudonym
    m.update(stage)
    return m


def survey(exp, lead, risk, task, leader):
    return {
        "survival_experience": exp,
        "leadership_experience": lead,
        "risk_willingness": risk,
        "gender_task_belief": task,
        "gender_leader_belief": leader,
    }


def fixture_cohort():
    hi = {
        "group_id": "hi-01",
        "treatment": "identified",
        "origin": "human",
        "members": [
            member("p01", "Marcus", "sailboat", "he/him", survey("Scout camping trips", "Team captain in college", 7, 5, 4),
                   nomination=8, ballot=["p01", "p03"], task_answers=answers([1, 1, 0, 1, 0, 1])),
            member("p02", "Daniel", "anchor", "he/him", survey("None", "None", 4, 5, 5),
                   nomination=3, ballot=["p03", "p01"], task_answers=answers([1, 0, 0, 1, 0, 0])),
            member("p03", "Priya", "compass", "she/her", survey("Sailing lessons", "Shift supervisor", 6, 6, 6),
                   nomination=7, ballot=["p03", "p01"], task_answers=answers([1, 1, 1, 1, 1, 0])),
            member("p04", "Jordan", "lighthouse", "they/them", survey("Hiking", "None", 5, 5, 5),
                   nomination=5, ballot=["p01", "p03"], task_answers=answers([0, 1, 1, 0, 1, 0])),
        ],
        "transcript": [
            {"speaker_alias": "Marcus", "turn_index": 0, "text": "I would keep the mirror and the fuel mixture first."},
            {"speaker_alias": "Priya", "turn_index": 1, "text": "Agreed on signalling, then water before the radio."},
            {"speaker_alias": "Jordan", "turn_index": 2, "text": "Maps seem useless without knowing our position."},
            {"speaker_alias": "Daniel", "turn_index": 3, "text": "Fine by me, rations over the netting too."},
        ],
        "notes": {"collected_with": "fixture"},
    }
    hp = {
        "group_id": "hp-01",
        "treatment": "pseudonymous",
        "origin": "human",
        "members": [
            member("p05", "Ethan", "wave", "he/him", survey("Fishing trips", "Managed a small team", 8, 4, 3), "Otter",
                   nomination=9, ballot=["p05", "p07"], task_answers=answers([1, 0, 1, 0, 1, 0])),
            member("p06", "Lucas", "gull", "he/him", survey("Nothing relevant", "Club treasurer", 3, 5, 5), "Heron",
                   nomination=2, ballot=["p07", "p05"], task_answers=answers([0, 0, 1, 1, 0, 0])),
            member("p07", "Amara", "shell", "she/her", survey("Coast guard cadet", "Choir section lead", 6, 7, 6), "Lynx",
                   nomination=6, ballot=["p07", "p05"], task_answers=answers([1, 1, 1, 1, 1, 1])),
            member("p08", "Sofia", "coral", "she/her", survey("Beach lifeguard", "Tutor", 5, 6, 6), "Crane",
                   nomination=4, ballot=["p05", "p07"], task_answers=answers([1, 1, 0, 0, 0, 1])),
        ],
        "transcript": [
            {"speaker_alias": "Otter", "turn_index": 0, "text": "Mirror and fuel mixture go first for signalling."},
            {"speaker_alias": "Lynx", "turn_index": 1, "text": "Water next, then rations. The sextant needs tables we lack."},
            {"speaker_alias": "Crane", "turn_index": 2, "text": "Sheeting can collect rain, so keep it high."},
            {"speaker_alias": "Heron", "turn_index": 3, "text": "Works for me."},
        ],
    }
    return [hi, hp]


def hi_matched_cohort():
    """Members a,b are male, c,d non-male. Each group picks an elected leader
    E and a second candidate C (top two nominations), two non-candidates, and
    scores that realise the planned gap type."""
    groups = []
    plan = ["self"] * 13 + ["peer"] * 25 + ["zero"] * 50  # 13*2 = 26, 25*2 = 50
    for i, kind in enumerate(plan):
        g = f"ref-{i + 1:03d}"
        ids = {k: f"{g}-{k}" for k in "abcd"}
        male_elected = i < 57
        # Elected and the other candidate always come from opposite genders
        # so that both orders occur; non-candidates are the remaining two.
        if male_elected:
            e, c, n1, n2 = "a", "c", "b", "d"
        else:
            e, c, n1, n2 = "c", "a", "d", "b"
        w = {e: 9, c: 8, n1: 3, n2: 2}
        s = {e: 3, c: 2, n1: 1, n2: 0}
        if kind == "peer":
            s[c] = 5
        elif kind == "self":
            s[n1] = 5
        ballot_e = [ids[e], ids[c]]
        ballot_c = [ids[c], ids[e]]
        ballots = {e: ballot_e, c: ballot_c, n1: ballot_e, n2: ballot_e}  # 3-1 for E
        pron = {"a": "he/him", "b": "he/him", "c": "she/her", "d": "they/them"}
        members = []
        for k in "abcd":
            members.append(member(
                ids[k], f"{g} {k.upper()}", "avatar", pron[k], survey("", "", 5, 5, 5),
                nomination=w[k], ballot=ballots[k], score={"correct": s[k], "max_items": 6}))
        groups.append({
            "group_id": g,
            "treatment": "identified",
            "origin": "human",
            "members": members,
            "transcript": [{"speaker_alias": f"{g} A", "turn_index": 0, "text": "ok"}],
        })
    return groups


def write_jsonl(path, groups):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps({"schema_version": "1"}) + "\n")
        for grp in groups:
            f.write(json.dumps(grp, sort_keys=True) + "\n")


def main():
    write_jsonl(HERE / "fixture_cohort.jsonl", fixture_cohort())
    write_jsonl(HERE / "hi_matched_cohort.jsonl", hi_matched_cohort())
    key = {"items": [{"id": q, "answer": a, "options": o} for q, a, o in KEY], "max_items": 6}
    with open(HERE / "task_key.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(key, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
