"""Truncated L2 norm of the second moment for Gevrey data, with and without noise."""

import argparse

from noise_reg.verify import gevrey_threshold_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cutoffs", default="64,128,256,512")
    ap.add_argument("--horizon", type=float, default=1.0)
    args = ap.parse_args()
    cutoffs = [float(c) for c in args.cutoffs.split(",")]
    for sigma, s in ((0.0, 3.0), (0.0, 1.5), (1.0, 3.0), (1.0, 5.0)):
        tab = gevrey_threshold_demo(sigma, s, cutoffs, args.horizon)
        print(f"sigma={sigma} s_data={s}: {tab.verdict}")
        for c, n in tab.rows():
            print(f"  cutoff {c:6.0f}  norm {n:.6e}")


if __name__ == "__main__":
    main()
