"""Run the two-qubit constructor over random subspaces and report worst residuals."""

import argparse

import numpy as np

from locc_cert.linalg import random_unitary
from locc_cert.qubits import distinguishable_basis_2x2, verify_construction


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--dim", type=int, default=3, choices=[0, 1, 2, 3, 4])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    orth = span = 0.0
    products = []
    failures = 0
    for _ in range(args.samples):
        S = random_unitary(4, rng).T[: args.dim]
        rep = verify_construction(S, distinguishable_basis_2x2(S))
        orth = max(orth, rep.orthonormality_residual)
        span = max(span, rep.span_residual)
        products.append(rep.product_count)
        failures += not rep.ok
    print(f"samples {args.samples}, dim {args.dim}")
    print(f"worst orthonormality {orth:.2e}, worst span {span:.2e}")
    print(f"product members: min {min(products)}, mean {np.mean(products):.2f}")
    print(f"failed verifications: {failures}")


if __name__ == "__main__":
    main()
