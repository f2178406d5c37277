#!/usr/bin/env python3
"""Writes the bundled two-event fixture corpus used by the CLI tests.

Output (into the directory given as argv[1], default data/fixture):
  articles.jsonl, candidates.jsonl, events.jsonl, bias_map.csv
"""
import csv
import datetime as dt
import json
import pathlib
import random
import sys

OUTLETS = {
    "Daily Ledger": "left",
    "Metro Tribune": "left",
    "Harbor Post": "left",
    "Liberty Herald": "right",
    "Frontier Times": "right",
    "National Sentinel": "right",
}

# Each theme: actors, targets, verbs (with tone), tail phrases sharing vocabulary,
# and the probability that an outlet of each side picks it.
EVENTS = [
    {
        "id": "climate-summit",
        "issue": "climate",
        "title": "Global Climate Summit",
        "description": "Negotiators meet to agree on emission targets.",
        "start": dt.date(2023, 11, 28),
        "themes": [
            {
                "actors": ["Senator Maria Lopez", "Governor Alan Reyes", "Climate Envoy Dana Hart"],
                "targets": ["Paris Agreement", "Summit Negotiators"],
                "verbs": [("praised", "+"), ("backed", "+"), ("welcomed", "+")],
                "tails": [
                    "for binding emission targets and faster coal phaseout",
                    "as binding emission targets promise cleaner air",
                    "while pushing binding emission targets before the coal deadline",
                ],
                "weight": {"left": 5, "right": 1},
            },
            {
                "actors": ["Representative Tom Blake", "Senator Ray Collins", "Chamber President Lisa Grant"],
                "targets": ["Energy Department", "Summit Negotiators"],
                "verbs": [("criticized", "-"), ("blamed", "-"), ("warned", "-")],
                "tails": [
                    "over rising gasoline prices and household energy costs",
                    "for higher gasoline prices that squeeze household energy budgets",
                    "that household energy costs and gasoline prices keep climbing",
                ],
                "weight": {"left": 1, "right": 5},
            },
            {
                "actors": ["Secretary Nina Ford", "Mayor Paul Greene", "Economist Jo Park"],
                "targets": ["Clean Energy Fund", "Factory Workers"],
                "verbs": [("promoted", "+"), ("defended", "+"), ("described", "+")],
                "tails": [
                    "as new solar factory jobs reach rural towns",
                    "because solar factory jobs keep growing in rural towns",
                    "with solar factory jobs promised for rural towns",
                ],
                "weight": {"left": 3, "right": 3},
            },
            {
                "actors": ["Commentator Greg Hale", "Senator Ray Collins", "Analyst Kim Moss"],
                "targets": ["Beijing Delegation", "China"],
                "verbs": [("accused", "-"), ("condemned", "-"), ("attacked", "-")],
                "tails": [
                    "of expanding coal plants while foreign pledges stay vague",
                    "over expanding coal plants despite foreign pledges",
                    "for expanding coal plants behind vague foreign pledges",
                ],
                "weight": {"left": 0, "right": 4},
            },
            {
                "actors": ["Activist Rosa Vega", "Scientist Omar Lind", "Professor Eva Stone"],
                "targets": ["Island Nations", "Coastal Communities"],
                "verbs": [("supported", "+"), ("championed", "+"), ("praised", "+")],
                "tails": [
                    "demanding loss and damage funding after flooding disasters",
                    "as flooding disasters drive demands for loss and damage funding",
                    "seeking loss and damage funding for flooding disasters",
                ],
                "weight": {"left": 4, "right": 0},
            },
        ],
    },
    {
        "id": "border-bill",
        "issue": "immigration",
        "title": "Senate Border Bill",
        "description": "Lawmakers debate a bipartisan border security package.",
        "start": dt.date(2024, 2, 1),
        "themes": [
            {
                "actors": ["Senator James Lankford", "Senator Chris Murphy", "Negotiator Ann Cole"],
                "targets": ["Border Package", "Senate Leaders"],
                "verbs": [("defended", "+"), ("praised", "+"), ("backed", "+")],
                "tails": [
                    "as a bipartisan compromise funding asylum officers and border agents",
                    "for funding asylum officers and border agents in a bipartisan compromise",
                    "calling the bipartisan compromise funding for asylum officers overdue",
                ],
                "weight": {"left": 4, "right": 2},
            },
            {
                "actors": ["Speaker Mike Johnson", "Representative Tom Blake", "Commentator Greg Hale"],
                "targets": ["Border Package", "White House"],
                "verbs": [("rejected", "-"), ("attacked", "-"), ("criticized", "-")],
                "tails": [
                    "because migrant crossings would continue under weak enforcement rules",
                    "warning weak enforcement rules leave migrant crossings unchecked",
                    "saying migrant crossings surge under weak enforcement rules",
                ],
                "weight": {"left": 1, "right": 5},
            },
            {
                "actors": ["Mayor Eric Adams", "Governor Kathy Hochul", "Shelter Director Lena Cruz"],
                "targets": ["City Shelters", "Federal Government"],
                "verbs": [("warned", "-"), ("blamed", "-"), ("pressed", "+")],
                "tails": [
                    "over crowded city shelters and strained housing budgets",
                    "as crowded city shelters strain housing budgets",
                    "that crowded city shelters exhaust housing budgets",
                ],
                "weight": {"left": 3, "right": 3},
            },
            {
                "actors": ["Advocate Maria Soto", "Lawyer Ben Ortiz", "Pastor Ruth Allen"],
                "targets": ["Asylum Seekers", "Immigrant Families"],
                "verbs": [("defended", "+"), ("supported", "+"), ("welcomed", "+")],
                "tails": [
                    "urging humane asylum hearings and legal counsel for children",
                    "calling for legal counsel for children and humane asylum hearings",
                    "with humane asylum hearings and legal counsel for children",
                ],
                "weight": {"left": 4, "right": 0},
            },
            {
                "actors": ["Former President Donald Trump", "Senator Ray Collins", "Analyst Kim Moss"],
                "targets": ["Senate Leaders", "Border Package"],
                "verbs": [("condemned", "-"), ("accused", "-"), ("slammed", "-")],
                "tails": [
                    "calling the election year deal a political gift to opponents",
                    "saying the election year deal hands opponents a political gift",
                    "over an election year deal seen as a political gift",
                ],
                "weight": {"left": 1, "right": 4},
            },
        ],
    },
]


SLANTS = {
    "left": ["as supporters cheered", "as advocates rejoiced", "as unions applauded"],
    "right": ["though critics balked", "though skeptics scoffed", "though taxpayers grumbled"],
}


def sentence(rng, theme, side):
    verb, _ = rng.choice(theme["verbs"])
    text = f"{rng.choice(theme['actors'])} {verb} the {rng.choice(theme['targets'])} {rng.choice(theme['tails'])}"
    # Themes both sides cover get a side-specific slant.
    if all(w > 0 for w in theme["weight"].values()):
        text += " " + rng.choice(SLANTS[side])
    return text + "."


def article(rng, event, idx, outlet, when, prefix):
    side = OUTLETS[outlet]
    themes = [t for t in event["themes"] if t["weight"][side] > 0]
    weights = [t["weight"][side] for t in themes]
    chosen = [rng.choices(themes, weights)[0] for _ in range(4)]
    body = " ".join(sentence(rng, t, side) for t in chosen)
    return {
        "id": f"{prefix}-{idx:03d}",
        "event_id": event["id"],
        "title": f"{event['title']} Coverage {idx}",
        "body": body,
        "source": outlet,
        "published_at": when.isoformat(),
        "issue": event["issue"],
    }


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/fixture")
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240207)
    outlets = sorted(OUTLETS)
    articles, candidates = [], []
    for e_index, event in enumerate(EVENTS):
        for i in range(30):
            when = event["start"] + dt.timedelta(days=i % 6)
            articles.append(article(rng, event, i, outlets[i % len(outlets)], when, f"e{e_index + 1}"))
        for i in range(10):
            # Every third candidate falls outside the unseen window.
            offset = 40 if i % 3 == 2 else 6 + i % 3
            when = event["start"] + dt.timedelta(days=offset)
            cand = article(rng, event, i, outlets[(i + 1) % len(outlets)], when, f"c{e_index + 1}")
            cand["event_id"] = "candidate-pool"
            candidates.append(cand)

    def dump(name, rows):
        with open(out / name, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, sort_keys=True) + "\n")

    dump("articles.jsonl", articles)
    dump("candidates.jsonl", candidates)
    dump("events.jsonl", [{k: e[k] for k in ("id", "issue", "title", "description")} for e in EVENTS])
    with open(out / "bias_map.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["source", "bias"])
        for name in outlets:
            w.writerow([name, OUTLETS[name]])


if __name__ == "__main__":
    main()
