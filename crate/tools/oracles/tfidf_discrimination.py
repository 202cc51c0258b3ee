"""Hand computation of meeting-level TF-IDF cosine scores for the
three-meeting discrimination corpus.

score(q, d) = sum_t q_t w_t,d / (|q| |d|), with q_t = qtf * idf, w = tf * idf
and idf = ln(1 + N / df) over the N meeting-level segments.

Usage: python3 tools/oracles/tfidf_discrimination.py
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
QUERIES = ["budget", "printer", "printer training", "staff holiday", "training training schedule"]


def stems(text):
    words = [w.lower() for w in re.split(r"[^\w]|_", text) if w]
    return [STEM(w) for w in words if w not in STOP]


def main():
    docs = {}
    for f in sorted((CORE / "fixtures/discrimination").glob("*.tsv")):
        text = " ".join(l.split("\t", 7)[7] for l in f.read_text().splitlines() if l)
        docs[f.stem] = Counter(stems(text))
    n = len(docs)
    df = Counter()
    for c in docs.values():
        df.update(c.keys())
    idf = {t: math.log(1 + n / d) for t, d in df.items()}
    out = {}
    for q in QUERIES:
        qc = Counter(s for s in stems(q) if s in idf)
        qv = {t: k * idf[t] for t, k in qc.items()}
        qn = math.sqrt(sum(v * v for v in qv.values()))
        hits = []
        for name, c in docs.items():
            dv = {t: k * idf[t] for t, k in c.items()}
            dn = math.sqrt(sum(v * v for v in dv.values()))
            dot = sum(v * dv.get(t, 0.0) for t, v in qv.items())
            if dot > 0:
                hits.append([name, dot / (qn * dn)])
        hits.sort(key=lambda h: -h[1])
        out[q] = hits
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
