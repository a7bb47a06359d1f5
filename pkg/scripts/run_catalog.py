#!/usr/bin/env python3
"""Run the condition report on every catalog entry and write one summary table.

usage: python3 scripts/run_catalog.py [--n 65536] [--out catalog-report]
"""
import argparse
import sys
import time
from pathlib import Path

from schwarzlab.boundary import sample_boundary
from schwarzlab.catalog import CATALOG
from schwarzlab.formats import write_csv, write_json
from schwarzlab.verdict import run_conditions

KEYS = ("i", "ii", "iii", "iv", "tail", "a2", "theorem2", "recovery")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=2**16)
    ap.add_argument("--out", default="catalog-report")
    args = ap.parse_args(argv)
    out = Path(args.out)
    rows = []
    for name, e in CATALOG.items():
        t0 = time.perf_counter()
        rep = run_conditions(e.f, name, e.measure, s=sample_boundary(e.f, args.n))
        write_json(out / f"{name}.json", {**rep.to_dict(),
                                          "designed_failures": sorted(e.designed_failures)})
        rows.append((name, *(rep.verdicts.get(k, "") for k in KEYS), rep.smirnov_defect,
                     rep.kolmogorov_constant, rep.hv_limit_estimate, rep.recovered_total_mass))
        cells = " ".join(format(rep.verdicts.get(k, "-"), ">12s") for k in KEYS)
        print(f"{name:18s} {cells}"
              f"  ({time.perf_counter() - t0:.1f}s)", file=sys.stderr)
    write_csv(out / "summary.csv", ("name", *KEYS, "smirnov_defect", "kolmogorov", "hv_limit",
                                    "recovered_mass"), rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
