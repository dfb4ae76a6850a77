"""Sweep random range(Q) bases against sampled one-round measurements.

Writes a JSON summary; a nonzero perfect-hit count would be a counterexample.
"""

import argparse
import json
import time

from locc_cert.certificate import theorem_harness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[3])
    ap.add_argument("--bases", type=int, default=20)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0, help="offset for basis and measurement seeds")
    ap.add_argument("--output")
    args = ap.parse_args()

    rows = []
    for n in args.n:
        t0 = time.perf_counter()
        s = theorem_harness(n, range(args.seed, args.seed + args.bases), range(args.seed, args.seed + args.trials))
        rows.append({**s.to_json(with_records=False), "seconds": round(time.perf_counter() - t0, 3)})
        print(f"n={n}: {s.samples} samples, {s.perfect_hits} hits, best min-diagonal {s.max_best_diagonal:.4f}")
    if args.output:
        with open(args.output, "w") as f:
            json.dump(rows, f, indent=1)


if __name__ == "__main__":
    main()
