"""Validates MDS XML exports against crates/core/data/mds.xsd.

Usage: python3 tools/oracles/validate_xsd.py FILE.xml...
"""
import sys
from pathlib import Path

import xmlschema

ROOT = Path(__file__).resolve().parents[2]


def main():
    schema = xmlschema.XMLSchema(str(ROOT / "crates/core/data/mds.xsd"))
    bad = 0
    for path in sys.argv[1:]:
        errors = list(schema.iter_errors(path))
        for e in errors[:3]:
            print(f"{path}: {e.reason} at {e.path}")
        bad += bool(errors)
    print(f"{len(sys.argv) - 1 - bad}/{len(sys.argv) - 1} valid")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
