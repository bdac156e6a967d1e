"""Empirical multiplicativity exponent of the output 2-norm against k.

For each k, samples a few Hastings channels at dimension d and prints
alpha_hat = log||E^n||_2 / (n log||E||_2) next to the certified ratio.
k=2 is excluded by default: U and U^dag share eigenvectors, so ||E||_2 = 1.
"""
import argparse

import numpy as np

from unitalcap.config import AscentOptions, derive_stream
from unitalcap.errors import ExponentUndefinedError
from unitalcap.expanders import hastings_channel
from unitalcap.norms import multiplicativity_report


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--ks", type=int, nargs="+", default=[4, 8, 16])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    opts = AscentOptions(restarts=args.restarts, max_iter=300)
    print(f"{'k':>4} {'alpha_hat':>12} {'alpha_cert':>12} {'1-4/log2 k':>12}")
    for k in args.ks:
        hats, certs = [], []
        for s in range(args.samples):
            ch = hastings_channel(args.d, k, derive_stream(args.seed, k, s))
            try:
                rep = multiplicativity_report(ch, args.n, opts)
            except ExponentUndefinedError:
                continue
            hats.append(rep.alpha_hat)
            certs.append(np.nan if rep.alpha_cert is None else rep.alpha_cert)
        if not hats:
            print(f"{k:4d} {'undefined':>12}")
            continue
        cert = np.nan if np.all(np.isnan(certs)) else np.nanmean(certs)
        print(f"{k:4d} {np.mean(hats):12.6f} {cert:12.6f} {1 - 4 / np.log2(k):12.4f}")


if __name__ == "__main__":
    main()
