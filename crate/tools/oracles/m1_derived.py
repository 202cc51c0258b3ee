"""Independent computation of the text-derived values for fixture M1:
lexical cohesion and boundary depths, TF-IDF ranking for "budget" at
episode granularity, and document links.

Usage: python3 tools/oracles/m1_derived.py
"""
import json
import math
import re
from collections import Counter
from pathlib import Path

from nltk.stem.porter import PorterStemmer

ROOT = Path(__file__).resolve().parents[2]
CORE = ROOT / "crates/core"
STEM = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM).stem
STOP = {
    l.strip().lower()
    for l in (CORE / "data/stopwords.txt").read_text().splitlines()
    if l.strip() and not l.startswith("#")
}


def stems(text):
    words = [w.lower() for w in re.split(r"[^\w]|_", text) if w]
    return [STEM(w) if re.fullmatch("[a-z]+", w) else w for w in words if w not in STOP]


def cosine(a, b):
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return 0.0 if na * nb == 0 else dot / (na * nb)


def load():
    utts, docs = [], []
    for line in (CORE / "fixtures/M1.tsv").read_text().splitlines():
        if line.startswith("#@ document"):
            _, _, rest = line.partition("=")
            did, title, text = [p.strip() for p in rest.split("|", 2)]
            docs.append((did, title + " " + text))
        elif line and not line.startswith("#"):
            f = line.split("\t", 7)
            utts.append((f[1], f[2], float(f[3]), f[7]))
    utts.sort(key=lambda u: u[2])
    turns = []
    for u in utts:
        if turns and turns[-1]["speaker"] == u[1]:
            turns[-1]["text"] += " " + u[3]
        else:
            turns.append({"speaker": u[1], "text": u[3], "start": u[2]})
    episodes = {"e0": (0, len(turns) - 1, None)}
    for line in (CORE / "fixtures/M1.edits").read_text().splitlines():
        if line.startswith("episode"):
            parts = line.split()
            span = parts[4].replace("t", "").split("..")
            a, b = int(span[0]) - 1, int(span[-1]) - 1
            episodes[parts[1]] = (a, b, parts[2])
    return utts, turns, episodes, docs


def main():
    utts, turns, episodes, docs = load()
    counts = [Counter(stems(t["text"])) for t in turns]
    n, w = len(turns), 3
    curve = []
    for g in range(n - 1):
        left = sum((counts[i] for i in range(max(0, g + 1 - w), g + 1)), Counter())
        right = sum((counts[i] for i in range(g + 1, min(n - 1, g + w) + 1)), Counter())
        curve.append(cosine(left, right))
    depths = []
    for g, s in enumerate(curve):
        lp = s
        for v in reversed(curve[:g]):
            if v < lp:
                break
            lp = v
        rp = s
        for v in curve[g + 1:]:
            if v < rp:
                break
            rp = v
        depths.append((lp - s) + (rp - s))
    boundaries = [g for g, d in enumerate(depths) if d >= 0.5]

    def text_of(a, b):
        return " ".join(turns[i]["text"] for i in range(a, b + 1))

    ep_counts = {e: Counter(stems(text_of(a, b))) for e, (a, b, _) in episodes.items()}
    N = len(ep_counts)
    df = Counter()
    for c in ep_counts.values():
        df.update(c.keys())
    idf = {t: math.log(1 + N / d) for t, d in df.items()}
    q = STEM("budget")
    ranking = []
    for e, c in ep_counts.items():
        if q in c:
            norm = math.sqrt(sum((tf * idf[t]) ** 2 for t, tf in c.items()))
            ranking.append((e, (c[q] * idf[q] * idf[q]) / (idf[q] * norm)))
    ranking.sort(key=lambda x: -x[1])

    links = []
    for did, text in docs:
        dc = Counter(stems(text))
        for e, c in ep_counts.items():
            if e == "e0":
                continue
            s = cosine(c, dc)
            if s >= 0.2:
                links.append((did, e, s))

    propos = sorted(
        {f"t{i + 1}" for i, c in enumerate(counts) if "propos" in c}, key=lambda t: int(t[1:])
    )
    out = {
        "cohesion": curve,
        "depth": depths,
        "boundaries_after_turn": boundaries,
        "budget_episode_ranking": ranking,
        "doc_links": links,
        "propos_turns": propos,
    }
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
