#!/usr/bin/env python3
"""Radius selection and the t·ω(t) probe curve at desk scale.

Certifies as many radii as the budget allows, then evaluates the probe curve
and the Wiener-series terms on the certified set and on the reference set
r_k = 10^k (whose terms are what the divergence argument is about).

usage: python3 scripts/construct_demo.py --seed 1 [--generations 3] [--walks 20000]
"""
import argparse
import math
import sys

from schwarzlab.potential import (ConstructionError, SlitDomain, WalkConfig, choose_radii,
                                  liminf_t_omega, wiener_series_terms)


def show_wiener(radii, label):
    terms = [t for t in wiener_series_terms(SlitDomain.from_radii(radii),
                                            int(math.log2(2 * max(radii))) + 1) if t.length]
    print(f"\nWiener terms, {label}:")
    for t in terms:
        print(f"  n={t.n:3d}  piece {t.length:12.5g}  term {t.term:9.4f} {t.flag}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--generations", type=int, default=3)
    ap.add_argument("--walks", type=int, default=20_000)
    ap.add_argument("--max-radius", type=float, default=1e30)
    args = ap.parse_args(argv)
    cfg = WalkConfig(n_walks=args.walks, seed=args.seed)

    def progress(gen, cand, est):
        print(f"  generation {gen}: r = {cand:<10.4g} h(0) = {est.value:.4f} ± {est.standard_error:.4f}")

    try:
        radii, _ = choose_radii(args.generations, cfg, args.max_radius, progress)
    except ConstructionError as exc:
        print(f"stopped: {exc}")
        radii = [1.0] + [h[1] for h in exc.history if h[0] == 2][-1:]
    print("\ncertified radii:", radii)
    print("\nprobe t·ω(t) at t = 2 r_n:")
    for p in liminf_t_omega(radii, cfg):
        bound = "" if p.bound is None else f"  bound 2/r_(n-1) = {p.bound:.4g}"
        print(f"  n={p.n}  t={p.t:<10.4g} t·ω = {p.t_omega:.4f} ± {p.standard_error:.4f}{bound}")
    show_wiener(radii, "certified radii")
    show_wiener([10.0**k for k in range(9)], "reference radii 10^k")
    return 0


if __name__ == "__main__":
    sys.exit(main())
