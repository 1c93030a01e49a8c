"""Command-line front end.

Subcommands: ``measure``, ``fidelity``, ``protocol``, ``genericity`` and
``validate-sio``. Reports go to stdout as JSON (or CSV for tables with
``--format csv``); diagnostics go to stderr.

Exit codes: 0 success, 2 input error, 3 resource cap, 4 solver failure.
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__, sdp
from .distillation import (
    SDP_CAP,
    asymptotic_fidelity,
    fidelity_mio_bit,
    fidelity_sio_bit,
    filter_failure_rate,
    multicopy_bounds,
)
from .errors import (
    CohereError,
    InputError,
    InvalidStateError,
    NoAdmissiblePairError,
    NotSIOError,
    ResourceCapError,
    SolverError,
)
from .io import read_channel, read_matrix
from .linalg import DensityMatrix, tensor_power
from .measures import (
    DIAG_ZERO_TOL,
    EDGE_TOL,
    coherence_partition,
    eta,
    eta_argmax,
    is_distillable,
    mu_k,
    q_measure,
    rel_entropy_coherence,
)
from .protocols import (
    block_rates,
    pio_rate_estimate,
    pio_rate_stderr,
    random_density,
    simulate_filter_protocol,
    validate_sio,
)
from .rng import DEFAULT_SEED, SEED_ENV, make_rng, task_rng

SDP_CAP_ENV = "COHERE_SDP_CAP"
DISTILLABLE_TOL = 1e-9
EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_SOLVER = 0, 2, 3, 4
PIO_STREAM = 2 ** 63


def _load_state(path):
    try:
        m = read_matrix(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return DensityMatrix(m)
    except InvalidStateError as exc:
        raise InputError(f"{path}: {exc}") from None


def _digest(rho):
    m = rho.mat
    return {
        "dimension": rho.dim,
        "trace": float(np.trace(m).real),
        "hermiticity_residual": float(np.max(np.abs(m - m.conj().T))),
    }


def _header(command):
    return {"command": command, "tool_version": __version__}


def _partition_summary(part):
    return {
        "blocks": [list(b) for b in part.blocks],
        "block_sizes": list(part.sizes),
        "block_probs": [float(p) for p in part.block_probs],
        "edge_tol": part.tolerance,
    }


def cmd_measure(args):
    rho = _load_state(args.input)
    verdict = is_distillable(rho, tol=DISTILLABLE_TOL)
    part = coherence_partition(rho, edge_tol=args.edge_tol)
    report = _header("measure")
    report.update({
        "input": _digest(rho),
        "eta": verdict.eta,
        "argmax": _argmax(rho),
        "verdict": verdict.verdict.value,
        "Q": q_measure(rho, edge_tol=args.edge_tol),
        "C_rel_ent": rel_entropy_coherence(rho),
        "mu_k": {str(k): mu_k(rho, k) for k in sorted(set(args.mu_k)) if k <= rho.dim},
        "partition": _partition_summary(part),
    })
    if args.format == "csv":
        rows = [["block", "size", "probability"]]
        rows += [[s, n, p] for s, (n, p) in enumerate(zip(part.sizes, part.block_probs))]
        return _csv(rows)
    return report


def cmd_fidelity(args):
    rho = _load_state(args.input)
    n = args.copies
    cap = args.sdp_cap
    if rho.dim ** n > cap:
        raise ResourceCapError(f"dimension {rho.dim}**{n} = {rho.dim ** n} exceeds SDP cap {cap}")
    opts = {"gap_tol": args.gap_tol, "sdp_cap": cap}
    sio = fidelity_sio_bit(tensor_power(rho, n, cap=cap), **opts)
    mio = fidelity_mio_bit(rho, **opts)
    table = []
    try:
        for k in range(1, n + 1):
            b = multicopy_bounds(rho, k, exact_cap=0)
            exact = sio.value if k == n else fidelity_sio_bit(tensor_power(rho, k), **opts).value
            table.append({"n": k, "lower": b.lower, "exact": exact, "upper": b.upper, "mu": b.mu})
    except NoAdmissiblePairError:
        table = []
    report = _header("fidelity")
    report.update({
        "input": _digest(rho),
        "copies": n,
        "eta": eta(rho),
        "F_sio_bit": sio.value,
        "F_mio_bit": mio.value,
        "asymptote": asymptotic_fidelity(rho),
        "multicopy": table,
        "solver": {
            "sio_gap": sio.gap,
            "sio_iterations": sio.iterations,
            "mio_gap": mio.gap,
            "mio_iterations": mio.iterations,
        },
    })
    if args.format == "csv":
        rows = [["n", "lower", "exact", "upper"]]
        rows += [[r["n"], r["lower"], r["exact"], r["upper"]] for r in table]
        return _csv(rows)
    return report


def cmd_protocol(args):
    rho = _load_state(args.input)
    report = _header("protocol")
    report.update({"input": _digest(rho), "seed": args.seed, "copies": args.copies,
                   "samples": args.samples})
    try:
        sim = simulate_filter_protocol(rho, args.copies, args.samples, args.seed)
        report["filter"] = {
            "mu": filter_failure_rate(rho),
            "analytic_fidelity": sim.analytic,
            "mc_fidelity": sim.mean,
            "mc_stderr": sim.stderr,
            "successes": sim.successes,
        }
    except NoAdmissiblePairError:
        report["filter"] = None
    q = q_measure(rho, edge_tol=args.edge_tol)
    rate = pio_rate_estimate(rho, args.samples, task_rng(args.seed, PIO_STREAM),
                             edge_tol=args.edge_tol)
    report["pio"] = {
        "Q": q,
        "empirical_rate": rate,
        "stderr": pio_rate_stderr(rho, args.samples, edge_tol=args.edge_tol),
        "block_rates": [float(r) for r in block_rates(rho, args.edge_tol)[1]],
    }
    return report


def _argmax(rho):
    try:
        i, j, _ = eta_argmax(rho)
    except NoAdmissiblePairError:
        return None
    return [i, j]


def cmd_genericity(args):
    if args.dim < 2 or args.samples < 1:
        raise InputError("--dim must be at least 2 and --samples at least 1")
    rank = args.dim if args.rank is None else args.rank
    if not 1 <= rank <= args.dim:
        raise InputError(f"--rank must lie in [1, {args.dim}]")
    rng = make_rng(args.seed)
    values = []
    zero_diag = 0
    distillable = 0
    for _ in range(args.samples):
        rho = random_density(args.dim, rank, rng)
        if np.min(rho.diag()) <= DIAG_ZERO_TOL:
            zero_diag += 1
            continue
        e = eta(rho)
        values.append(e)
        if e >= 1.0 - DISTILLABLE_TOL:
            distillable += 1
    counts, edges = np.histogram(values, bins=args.bins, range=(0.0, 1.0))
    report = _header("genericity")
    report.update({
        "dim": args.dim,
        "rank": rank,
        "samples": args.samples,
        "seed": args.seed,
        "distillable_count": distillable,
        "zero_diagonal_count": zero_diag,
        "eta_max": max(values) if values else None,
        "eta_min": min(values) if values else None,
        "histogram": {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]},
    })
    if args.format == "csv":
        rows = [["bin_low", "bin_high", "count"]]
        rows += [[float(lo), float(hi), int(c)] for lo, hi, c in zip(edges, edges[1:], counts)]
        return _csv(rows)
    return report


def cmd_validate_sio(args):
    try:
        kraus = read_channel(args.input)
    except OSError as exc:
        raise InputError(f"{args.input}: {exc.strerror}") from None
    report = _header("validate-sio")
    report["kraus_count"] = len(kraus)
    try:
        ch = validate_sio(kraus)
    except NotSIOError as exc:
        report.update({"valid": False, "violation": str(exc)})
        return report
    report.update({
        "valid": True,
        "in_dim": ch.in_dim,
        "out_dim": ch.out_dim,
        "structure": [
            {
                "rows": list(s.rows),
                "cols": list(s.cols),
                "amplitudes": [[z.real, z.imag] for z in s.amps],
            }
            for s in ch.structure
        ],
    })
    return report


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def render(report):
    """Serialise a report dict as JSON text (stable under parse/re-dump)."""
    if isinstance(report, str):
        return report
    return json.dumps(report, indent=2) + "\n"


def _env_int(name, default):
    value = os.environ.get(name)
    if not value:
        return default
    try:
        return int(value)
    except ValueError:
        raise InputError(f"environment variable {name} must be an integer") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--edge-tol", type=float, default=EDGE_TOL,
                        help="relative tolerance for coherence-graph edges")
    common.add_argument("--gap-tol", type=float, default=sdp.GAP_TOL,
                        help="relative duality-gap tolerance of the SDP solver")
    common.add_argument("--sdp-cap", type=int, default=None,
                        help=f"largest SDP matrix dimension (env {SDP_CAP_ENV})")
    common.add_argument("--seed", type=int, default=None,
                        help=f"64-bit RNG seed (env {SEED_ENV})")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="cohere", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cohere {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="maximal coherence, Q and friends")
    p.add_argument("input")
    p.add_argument("--mu-k", type=int, action="append", default=None,
                   help="evaluate mu_k for this k (repeatable, default 2)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("fidelity", parents=[common], help="bit-distillation fidelities")
    p.add_argument("input")
    p.add_argument("--copies", type=int, default=1)
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("protocol", parents=[common], help="simulate filter and PIO protocols")
    p.add_argument("input")
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("genericity", parents=[common], help="eta over random states")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--bins", type=int, default=10)
    p.set_defaults(func=cmd_genericity)

    p = sub.add_parser("validate-sio", parents=[common], help="check a Kraus list")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate_sio)
    return parser


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI and return its exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _env_int(SEED_ENV, DEFAULT_SEED)
        if args.sdp_cap is None:
            args.sdp_cap = _env_int(SDP_CAP_ENV, SDP_CAP)
        if getattr(args, "mu_k", 0) is None:
            args.mu_k = [2]
        if getattr(args, "copies", 1) < 1:
            raise InputError("--copies must be at least 1")
        if getattr(args, "samples", 1) < 1:
            raise InputError("--samples must be at least 1")
        if not 0 <= args.seed < 2 ** 64:
            raise InputError("--seed must lie in [0, 2**64)")
        report = args.func(args)
    except InputError as exc:
        print(f"cohere: input error: {exc}", file=stderr)
        return EXIT_INPUT
    except ResourceCapError as exc:
        print(f"cohere: resource cap: {exc}", file=stderr)
        return EXIT_CAP
    except SolverError as exc:
        print(f"cohere: solver failure: {exc}", file=stderr)
        return EXIT_SOLVER
    except CohereError as exc:
        print(f"cohere: error: {exc}", file=stderr)
        return EXIT_INPUT
    stdout.write(render(report))
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
