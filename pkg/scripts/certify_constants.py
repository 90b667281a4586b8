"""Certified (C1, C2, xi0, M) for several noise levels; sigma = 0 reports the failure."""

import argparse
import math

from noise_reg.core import CertificationFailure
from noise_reg.verify import estimate_global_constants


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigmas", default="0,0.5,1,4,8")
    ap.add_argument("--horizon", type=float, default=1.0)
    ap.add_argument("--xi-max", type=float, default=1e3)
    ap.add_argument("--grid-points", type=int, default=4001)
    args = ap.parse_args()
    for sigma in (float(s) for s in args.sigmas.split(",")):
        try:
            c = estimate_global_constants(sigma, args.horizon, args.xi_max, args.grid_points)
        except CertificationFailure as exc:
            w = exc.worst
            print(f"sigma={sigma}: FAILED, F(T)/F(0) = {w['ratio']:.4g} at xi={w['xi']:g} "
                  f"(e^(2 sqrt(xi) T)/2 = {math.exp(2 * math.sqrt(w['xi']) * args.horizon) / 2:.4g})")
            continue
        print(f"sigma={sigma}: C1={c.C1:.5g} C2={c.C2:.5g} xi0={c.xi0:.4g} M={c.M:.5g} "
              f"prefactor={c.prefactor:.5g} worst validation ratio={c.validation_worst:.3g}")


if __name__ == "__main__":
    main()
