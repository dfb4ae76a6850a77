"""Estimated one-round success probability versus trial budget.

Compares a product basis, the canonical range(Q) basis and a random range(Q)
basis on C^n (x) C^n.
"""

import argparse
import json

import numpy as np

from locc_cert.bipartite import gen_Q_basis, random_Q_basis
from locc_cert.estimator import SearchConfig, estimate_success


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--budgets", type=int, nargs="+", default=[10, 100, 1000])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--refine-steps", type=int, default=200)
    ap.add_argument("--output")
    args = ap.parse_args()

    cfg = SearchConfig(refine_steps=args.refine_steps)
    bases = {
        "product": np.eye(args.n**2),
        "canonical_Q": gen_Q_basis(args.n),
        "random_Q": random_Q_basis(args.n, args.seed),
    }
    table = {}
    for name, U in bases.items():
        table[name] = {}
        for t in args.budgets:
            p = estimate_success(U, trials=t, seed=args.seed, config=cfg).best_probability
            table[name][t] = p
            print(f"{name:12s} trials={t:6d}  p={p:.6f}")
    if args.output:
        with open(args.output, "w") as f:
            json.dump(table, f, indent=1)


if __name__ == "__main__":
    main()
