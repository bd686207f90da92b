"""Midpoint test of convexity for the certified deformation set.

Draws pairs of deformations inside a shrunken A_L, certifies both ends and the
midpoint, and reports how often the midpoint keeps the verdict and the
configuration.  Also scales points past one facet to see certification fail.

usage: python scripts/convexity_midpoints.py [--pairs 50] [--length 8] [--seed 0]
"""

import argparse

import numpy as np

from reducible_anosov import lp
from reducible_anosov.blocks import deformed_rep
from reducible_anosov.certify import PLAUSIBLE, certify
from reducible_anosov.domain import build_domain, remove_redundant
from reducible_anosov.io import fixture_path, load_rep

THETA = (1, 2)


def draw(dom, rng, shrink):
    n = dom.reduced_dim
    lo = np.array([-lp.maximize(-e, dom.A, shrink * dom.b).value for e in np.eye(n)])
    hi = np.array([lp.maximize(e, dom.A, shrink * dom.b).value for e in np.eye(n)])
    while True:
        y = rng.uniform(lo, hi)
        if np.all(dom.A @ y < shrink * dom.b):
            return y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=50)
    ap.add_argument("--length", type=int, default=8)
    ap.add_argument("--shrink", type=float, default=0.8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    zeta = load_rep(fixture_path("worked_example"))[0]
    dom = remove_redundant(build_domain(zeta, THETA, args.length))
    q0 = certify(zeta, THETA, args.length).unique_config
    rng = np.random.default_rng(args.seed)

    def run(y):
        return certify(deformed_rep(zeta, dom.basis.phi(y)), THETA, args.length)

    done = skipped = bad = 0
    ratios = []
    while done < args.pairs:
        y0, y1 = draw(dom, rng, args.shrink), draw(dom, rng, args.shrink)
        r0, r1 = run(y0), run(y1)
        if r0.verdict != PLAUSIBLE or r1.verdict != PLAUSIBLE:
            skipped += 1
            continue
        done += 1
        rm = run((y0 + y1) / 2)
        ratios.append(min(s.min_ratio for s in rm.stats.values()) if rm.stats else float("nan"))
        if rm.verdict != PLAUSIBLE or rm.unique_config != q0:
            bad += 1
    print(f"pairs {done}, skipped endpoint draws {skipped}, midpoint failures {bad}")
    print(f"midpoint min gap ratio: min {min(ratios):.4f}, median {np.median(ratios):.4f}")

    print("\nfacet  word        verdict at 1.1x boundary")
    for i, h in enumerate(dom.halfspaces):
        others = [j for j in range(len(dom.halfspaces)) if j != i]
        res = lp.maximize(h.coeffs, np.vstack([dom.A[others], h.coeffs]), np.append(dom.b[others], h.bound))
        p = res.point * (h.bound / float(h.coeffs @ res.point))
        r = run(1.1 * p)
        print(f"{i:5d}  {h.word:10s}  {r.verdict}")


if __name__ == "__main__":
    main()
