"""Build games from reversible channel pairs, then recover the weight r and lambda."""

import argparse

import numpy as np

from cbnorm import acceptance
from cbnorm import games as gm


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'r':>6} {'r_hat':>12} {'lambda':>10} {'|dlambda|':>10} {'gap ok':>7} branch")
    for r in np.linspace(0, 1, args.points):
        psi0, psi1 = acceptance.block_channels(args.n, args.m, rng)
        g = gm.construct_game(float(r), psi0, psi1)
        gap = gm.check_max_gap(g, seed=args.seed).verdict
        d = gm.decompose_wh_equivalent(g, seed=args.seed)
        print(f"{r:6.3f} {d.r_weight:12.9f} {g.lam:10.6f} {abs(d.lambda_check - g.lam):10.1e} "
              f"{str(gap):>7} {d.branch}")


if __name__ == "__main__":
    main()
