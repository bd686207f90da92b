"""Outer approximations A_L of the deformation domain for the worked example.

Prints, per length L, the number of constraints, how many are irredundant, the
Chebyshev radius and a Monte Carlo area.  Optionally writes slice polygons.

usage: python scripts/domain_convergence.py [--max-len 8] [--samples 200000] [--polygons out_dir]
"""

import argparse
from pathlib import Path

import numpy as np

from reducible_anosov.domain import build_domain, chebyshev_center, mc_volume, remove_redundant, slice_polygon
from reducible_anosov.io import fixture_path, load_rep

THETA = (1, 2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-len", type=int, default=8)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--polygons", help="directory for per-L slice polygons (csv)")
    args = ap.parse_args()

    zeta = load_rep(fixture_path("worked_example"))[0]
    full = build_domain(zeta, THETA, args.max_len)
    print(f"coordinates: {full.basis.labels()}")
    print(" L  constraints  irredundant  cheb_radius   area        area_err")
    prev = None
    for L in range(1, args.max_len + 1):
        dom = full.restrict(L)
        small = remove_redundant(dom)
        _, r = chebyshev_center(small)
        area, err = mc_volume(small, args.samples, seed=L)
        words = sorted({h.word for h in small.halfspaces})
        print(f"{L:2d}  {len(dom.halfspaces):11d}  {len(small.halfspaces):11d}  {r:11.6f}  {area:10.6f}  {err:.1e}")
        if prev is not None:
            new = sorted(set(words) - prev)
            if new:
                print(f"    new facet words: {', '.join(new[:6])}{' ...' if len(new) > 6 else ''}")
        prev = set(words)
        if args.polygons:
            out = Path(args.polygons)
            out.mkdir(parents=True, exist_ok=True)
            np.savetxt(out / f"slice_L{L}.csv", slice_polygon(small, (0, 1)), delimiter=",",
                       header=",".join(full.basis.labels()), comments="")


if __name__ == "__main__":
    main()
