"""Command-line front end.

Every subcommand prints one JSON document carrying ``"schema": 1``.
Exit status is 0 on success, 1 on a domain failure (a structured error
document is still printed), and 2 on usage or input-parsing errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .bipartite import BipartiteVector, gen_Q_basis, random_Q_basis
from .certificate import find_noncommuting_pair, identity_report, theorem_harness
from .channel import build_counterexample_channel, choi, witness_sweep
from .estimator import SearchConfig, estimate_success
from .linalg import DEFAULT_TOL, ToleranceConfig, random_unitary
from .measurement import (
    Partition,
    RankOneSeparableMeasurement,
    check_perfect,
    merge_proportional,
    sample_one_round_measurement,
)
from .qubits import distinguishable_basis_2x2, verify_construction
from .serialize import SCHEMA_VERSION, decode_vector, dumps


class InputError(Exception):
    """Malformed input; maps to exit status 2."""


class DomainFailure(Exception):
    """Computation ran but the object under test failed; maps to exit status 1."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}


def _basis_choice(text: str):
    if text == "canonical":
        return "canonical"
    if text.startswith("random:"):
        try:
            return int(text.split(":", 1)[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"expected 'canonical' or 'random:<seed>', got {text!r}")


def _read_input(path):
    try:
        raw = sys.stdin.read() if path == "-" else open(path).read()
        return json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON input {path!r}: {exc}") from None


def _parse(fn, obj, what):
    try:
        return fn(obj)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"malformed {what}: {exc}") from None


def _load_vectors(obj) -> np.ndarray:
    items = obj.get("vectors", obj.get("basis")) if isinstance(obj, dict) else obj
    if items is None:
        raise ValueError("expected a 'vectors' or 'basis' list")
    rows = []
    for it in items:
        rows.append(BipartiteVector.from_json(it).vector if "coeff" in it else decode_vector(it))
    if len({len(r) for r in rows}) > 1:
        raise ValueError("vectors have different dimensions")
    return np.array(rows) if rows else np.zeros((0, 4), complex)


def _basis_rows(n: int, choice) -> np.ndarray:
    return gen_Q_basis(n) if choice == "canonical" else random_Q_basis(n, choice)


def _measurement_from(args, tol):
    if args.input:
        obj = _read_input(args.input)
        mobj = obj.get("measurement", obj) if isinstance(obj, dict) else obj
        return obj, _parse(lambda o: RankOneSeparableMeasurement.from_json(o, check=False), mobj, "measurement")
    return None, sample_one_round_measurement(args.n, args.seed)


def cmd_gen_basis(args, tol):
    rows = _basis_rows(args.n, args.basis)
    return {"n": args.n, "basis": [BipartiteVector.from_vector(r, args.n).to_json() for r in rows]}


def cmd_verify_measurement(args, tol):
    obj, m = _measurement_from(args, tol)
    residual = m.completeness_residual()
    out = {
        "n": m.n,
        "outcomes": len(m),
        "completeness_residual": residual,
        "valid": bool(residual < tol.equality_atol),
        "identities": identity_report(m, tol).to_json(),
    }
    if obj is None:
        out["measurement"] = m.to_json()
    elif isinstance(obj, dict) and "basis" in obj and "partition" in obj:
        basis = _parse(_load_vectors, obj, "basis")
        part = _parse(Partition.from_json, obj["partition"], "partition")
        out["distinguishability"] = check_perfect(basis, m, part, tol).to_json()
    if not out["valid"]:
        raise DomainFailure("measurement elements do not sum to the identity", out)
    return out


def cmd_certificate(args, tol):
    _, m = _measurement_from(args, tol)
    if m.completeness_residual() >= tol.equality_atol:
        raise DomainFailure("input is not a valid measurement")
    merged, _ = merge_proportional(m, None, tol)
    cert = find_noncommuting_pair(merged, tol)
    return {"n": m.n, "certificate": cert.to_json(), "merged_outcomes": len(merged)}


def cmd_harness(args, tol):
    base = args.seed * 1_000_003
    summary = theorem_harness(
        args.n,
        range(base, base + args.bases),
        range(base, base + args.trials),
        tol,
    )
    out = summary.to_json(with_records=True)
    if summary.perfect_hits:
        raise DomainFailure("perfect hit on a basis of range(Q): implementation bug", out)
    return out


def cmd_qubit_basis(args, tol):
    if args.input:
        S = _parse(_load_vectors, _read_input(args.input), "subspace")
    else:
        rng = np.random.default_rng(args.seed)
        S = random_unitary(4, rng)[:, : args.dim].T
    basis = distinguishable_basis_2x2(S, tol)
    report = verify_construction(S, basis, tol)
    out = {"m": int(S.shape[0]), "tagged_basis": basis.to_json(), "verification": report.to_json()}
    if not report.ok:
        raise DomainFailure("construction failed verification", out)
    return out


def cmd_channel(args, tol):
    r = build_counterexample_channel(args.n, args.basis)
    out = {"n": args.n, "basis": args.basis if args.basis == "canonical" else f"random:{args.basis}"}
    if args.emit == "isometry":
        out["realization"] = r.to_json()
    elif args.emit == "choi":
        J = choi(r)
        out["choi"] = J.to_json()
        out["trace"] = J.trace.real
        out["min_eigenvalue"] = J.min_eigenvalue()
    else:
        sweep = witness_sweep(r, np.eye(r.d_X), range(args.seed, args.seed + args.trials), tol)
        out["witness_sweep"] = sweep.to_json()
        if sweep.perfect_hits and args.n >= 3:
            raise DomainFailure("perfect witness for the counterexample channel: implementation bug", out)
    return out


def cmd_estimate(args, tol):
    if args.input:
        U = _parse(_load_vectors, _read_input(args.input), "basis")
    elif args.basis == "product":
        U = np.eye(args.n * args.n, dtype=complex)
    else:
        U = _basis_rows(args.n, args.basis)
    cfg = replace(SearchConfig(), refine_steps=args.refine_steps)
    res = estimate_success(U, args.trials, args.seed, cfg, tol)
    return res.to_json()


def _estimate_basis(text: str):
    return "product" if text == "product" else _basis_choice(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locc-cert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"locc-cert {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL.equality_atol, help="equality tolerance (Frobenius scale)")
    common.add_argument("--output", default=None, help="write JSON here instead of standard output")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, n_default=3, with_input=False, **kw):
        p = sub.add_parser(name, parents=[common], **kw)
        p.add_argument("--n", type=int, default=n_default)
        if with_input:
            p.add_argument("--input", default=None, help="JSON input file ('-' for standard input)")
        p.set_defaults(func=fn)
        return p

    p = add("gen-basis", cmd_gen_basis, help="orthonormal basis of the complement of the maximally entangled state")
    p.add_argument("--basis", type=_basis_choice, default="canonical")
    add("verify-measurement", cmd_verify_measurement, with_input=True, help="validate a rank-one separable measurement")
    add("certificate", cmd_certificate, with_input=True, help="non-commuting pair certificate")
    p = add("harness", cmd_harness, help="falsification sweep over random bases and measurements")
    p.add_argument("--bases", type=int, default=20)
    p.add_argument("--trials", type=int, default=500)
    p = add("qubit-basis", cmd_qubit_basis, n_default=2, with_input=True, help="distinguishable basis of a two-qubit subspace")
    p.add_argument("--dim", type=int, default=3, choices=range(0, 5), help="dimension of the random subspace when no input is given")
    p = add("channel", cmd_channel, help="counterexample channel")
    p.add_argument("--basis", type=_basis_choice, default="canonical")
    p.add_argument("--emit", choices=["choi", "isometry", "witness-sweep"], default="isometry")
    p.add_argument("--trials", type=int, default=500)
    p = add("estimate", cmd_estimate, with_input=True, help="stochastic one-round LOCC success estimate")
    p.add_argument("--basis", type=_estimate_basis, default="canonical", help="canonical, random:<seed> or product")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--refine-steps", type=int, default=SearchConfig.refine_steps)
    return parser


def _emit(doc, path):
    text = dumps(doc) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = ToleranceConfig(equality_atol=args.tol)
    except ValueError as exc:
        print(f"locc-cert: error: {exc}", file=sys.stderr)
        return 2
    head = {"schema": SCHEMA_VERSION, "command": args.command}
    try:
        doc = {**head, **args.func(args, tol)}
        status = 0
    except InputError as exc:
        print(f"locc-cert: error: {exc}", file=sys.stderr)
        return 2
    except DomainFailure as exc:
        doc = {**head, **exc.payload, "error": {"type": "DomainFailure", "message": str(exc)}}
        status = 1
    except (ValueError, RuntimeError, IndexError) as exc:
        doc = {**head, "error": {"type": type(exc).__name__, "message": str(exc)}}
        status = 1
    _emit(doc, args.output)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
