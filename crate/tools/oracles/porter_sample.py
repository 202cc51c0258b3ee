"""Writes crates/core/fixtures/porter-sample.tsv: word<TAB>stem pairs from
NLTK's Porter stemmer in ORIGINAL_ALGORITHM mode.

Usage: python3 tools/oracles/porter_sample.py
"""
import glob
import random
import re
import sysconfig
from pathlib import Path

from nltk.stem.porter import PorterStemmer

ROOT = Path(__file__).resolve().parents[2]


def main():
    words = set()
    sources = [ROOT / "README.md"] + sorted(
        glob.glob(sysconfig.get_paths()["stdlib"] + "/**/*.py", recursive=True)
    )[:3000]
    for f in sources:
        try:
            text = Path(f).read_text(errors="ignore")
        except OSError:
            continue
        words.update(w for w in re.findall(r"[a-z]+", text.lower()) if len(w) < 25)
    rng = random.Random(7)
    sample = sorted(rng.sample(sorted(words), min(4000, len(words))))
    # suffix-heavy words exercise every step
    sample += ["caresses", "ponies", "ties", "caress", "cats", "feed", "agreed", "plastered",
               "bled", "motoring", "sing", "conflated", "troubled", "sized", "hopping",
               "tanned", "falling", "hissing", "fizzed", "failing", "filing", "happy", "sky",
               "relational", "conditional", "rational", "valenci", "hesitanci", "digitizer",
               "conformabli", "radicalli", "differentli", "vileli", "analogousli",
               "vietnamization", "predication", "operator", "feudalism", "decisiveness",
               "hopefulness", "callousness", "formaliti", "sensitiviti", "sensibiliti",
               "triplicate", "formative", "formalize", "electriciti", "electrical", "hopeful",
               "goodness", "revival", "allowance", "inference", "airliner", "gyroscopic",
               "adjustable", "defensible", "irritant", "replacement", "adjustment",
               "dependent", "adoption", "homologou", "communism", "activate", "angulariti",
               "homologous", "effective", "bowdlerize", "probate", "rate", "cease",
               "controll", "roll", "generalization", "oscillators", "propose", "proposal",
               "proposed", "proposing"]
    stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    out = ROOT / "crates/core/fixtures/porter-sample.tsv"
    seen = set()
    with out.open("w") as fh:
        fh.write("# word\tstem (NLTK PorterStemmer, ORIGINAL_ALGORITHM)\n")
        for w in sample:
            if w not in seen:
                seen.add(w)
                fh.write(f"{w}\t{stemmer.stem(w)}\n")


if __name__ == "__main__":
    main()
