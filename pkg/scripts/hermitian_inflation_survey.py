"""Survey ||Phi (x) id_k||_{1,H} / ||Phi||_{1,H} over random Hermiticity-preserving maps.

Both norms are see-saw lower bounds, so a ratio above k is a lead to chase
with more restarts, not a proof.
"""

import argparse
import json

import numpy as np

from cbnorm import channels as ch
from cbnorm import games as gm


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    ratios, leads = [], []
    for i, s in enumerate(np.random.SeedSequence(args.seed).spawn(args.count)):
        phi = ch.random_hp_map(args.n, args.m, np.random.default_rng(s))
        info = gm.explore_hermitian_inflation(phi, args.k, args.restarts, args.seed).info
        ratios.append(info["ratio"])
        if info["candidate_counterexample"]:
            leads.append({"index": i, "ratio": info["ratio"], "map": ch.map_to_json(phi)})
    r = np.array(ratios)
    print(json.dumps({"count": args.count, "k": args.k, "max_ratio": float(r.max()),
                      "mean_ratio": float(r.mean()), "quantiles": np.quantile(r, [.5, .9, .99]).tolist(),
                      "candidates": leads}, indent=2))


if __name__ == "__main__":
    main()
