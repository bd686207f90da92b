"""Certify the Schottky-plus-trivial example and print the gap growth by length.

usage: python scripts/worked_example.py [--max-len 10] [--csv gaps.csv]
"""

import argparse
import math
from collections import defaultdict

from reducible_anosov.certify import certify, series_csv
from reducible_anosov.io import fixture_path, load_rep

THETA = (1, 2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-len", type=int, default=10)
    ap.add_argument("--csv")
    args = ap.parse_args()

    zeta = load_rep(fixture_path("worked_example"))[0]
    rep = certify(zeta, THETA, args.max_len, keep_samples=True)
    print(f"verdict: {rep.verdict}")
    print(f"classes: {rep.n_samples} primitive conjugacy classes up to length {args.max_len}")
    print(rep.unique_config.table())
    for k, st in rep.stats.items():
        print(f"k={k}: min gap/length overall {st.min_ratio:.4f}, on top band {st.min_ratio_top:.4f}, "
              f"fitted slope {st.slope:.4f}")

    # smallest gap per length, and its ratio to the length
    by_len = defaultdict(lambda: math.inf)
    for s in rep.samples:
        for g in s.gaps.values():
            by_len[s.length] = min(by_len[s.length], g)
    print("\nlength  min gap   min gap/length")
    for n in sorted(by_len):
        print(f"{n:6d}  {by_len[n]:8.4f}  {by_len[n] / n:8.4f}")

    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(series_csv(rep.samples))


if __name__ == "__main__":
    main()
