"""Command-line entry point.

Exit codes: 0 success, 1 invalid input (including a plan that fails the
sufficient conditions), 2 failed verification.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .controller import admissible_strength_range
from .errors import NoRootError, PinningError
from .graph import Connectivity, build_laplacian, load_graph
from .scenario import (example_scenario, load_scenario, parse_grid, plan_from_dict,
                       resolve_initial_state, run_scenario, sweep, sweep_csv, synthesize,
                       write_certificate, read_certificate)
from .simulator import read_trajectory
from .spectral import SpectralData, mmatrix_diagnostics, spectral_data
from .verify import verify_trajectory

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    lap = build_laplacian(load_graph(args.graph))
    out = {"n": lap.n, "classification": lap.classification.value,
           "block_sizes": list(lap.block_sizes), "permutation": lap.permutation.tolist()}
    if lap.classification is not Connectivity.NO_ROOT:
        spec = spectral_data(lap)
        out.update(xi=spec.xi.tolist(), max_xi=spec.max_xi,
                   lambda2=None if math.isinf(spec.lambda2) else spec.lambda2,
                   degenerate_root=spec.degenerate_root,
                   root_support=spec.root_support.tolist(),
                   strength_upper={int(r): admissible_strength_range(spec, r)[1]
                                   for r in spec.root_support})
        if lap.classification is Connectivity.SPANNING_TREE:
            out["nonroot_blocks"] = [
                {"block": d.block_index, "vertices": list(d.vertices), "abscissa": d.abscissa,
                 "K": d.bound_k} for d in mmatrix_diagnostics(lap)]
    if args.json:
        print(json.dumps(out, indent=2))
        return EXIT_OK
    print(f"vertices:        {out['n']}")
    print(f"classification:  {out['classification']}")
    print(f"block sizes:     {_short(out['block_sizes'])}")
    if "xi" in out:
        print(f"xi:              {_short(np.round(out['xi'], 12).tolist())}")
        print(f"max xi:          {out['max_xi']:.6g}")
        lam = out["lambda2"]
        print(f"lambda2:         {'undefined (single-vertex root)' if lam is None else f'{lam:.6e}'}")
    return EXIT_OK


def _short(seq, head=12):
    seq = list(seq)
    if len(seq) <= head:
        return str(seq)
    return f"{seq[:head]} ... ({len(seq)} entries)"


def cmd_synthesize(args) -> int:
    graph = load_graph(args.graph)
    doc = json.loads(Path(args.plan).read_text())
    plan = plan_from_dict(doc.get("plan", doc))
    x0 = None
    if "initial_state" in doc:
        lap = build_laplacian(graph)
        xi = spectral_data(lap).xi if lap.classification is not Connectivity.NO_ROOT else None
        x0 = resolve_initial_state(doc["initial_state"], graph.n, xi)
    _, _, cert = synthesize(graph, plan, x0)
    text = json.dumps(cert.to_dict(), indent=2) + "\n"
    if args.output:
        write_certificate(cert, args.output)
    else:
        sys.stdout.write(text)
    status = "valid" if cert.valid else "invalid: " + ", ".join(cert.reasons)
    print(f"certificate {status}", file=sys.stderr)
    return EXIT_OK if cert.valid else EXIT_INVALID


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    if args.backend:
        sc.backend = args.backend
    result = run_scenario(sc, write=True, out_dir=args.out)
    traj = result.trajectory
    print(f"status {traj.status} after {len(traj.impulses)} impulses, "
          f"final var {traj.var[-1]:.3e}")
    print(f"certificate {'valid' if result.certificate.valid else 'invalid'} "
          f"{list(result.certificate.reasons)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cert = read_certificate(args.certificate)
    traj = read_trajectory(args.trajectory, impulses_path=args.impulses)
    if args.graph:
        lap = build_laplacian(load_graph(args.graph))
        spec = spectral_data(lap)
    else:
        lap = None
        xi = np.asarray(cert.provenance.get("xi", traj.xi), dtype=float)
        lam = math.inf if cert.lambda2 in (None, "inf") else float(cert.lambda2)
        spec = SpectralData(xi, lam, float(xi.max()), np.nonzero(xi > 0)[0], math.isinf(lam))
    report = verify_trajectory(traj, lap, spec, cert)
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.output)
    print(report.summary(), file=sys.stderr)
    return EXIT_VERIFY if report.hard_failure else EXIT_OK


def cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    rows = sweep(sc, parse_grid(args.grid), simulate_runs=not args.no_simulate,
                 workers=args.workers)
    _emit(sweep_csv(rows), args.output)
    return EXIT_OK


def cmd_repro(args) -> int:
    sc = example_scenario(args.example)
    if args.max_impulses is not None:
        sc.horizon = type(sc.horizon)(args.max_impulses, sc.horizon.max_time, sc.horizon.tolerance)
    out = Path(args.out or f"repro_{args.example}")
    result = run_scenario(sc, write=True, out_dir=out)
    cert, traj = result.certificate, result.trajectory
    print(f"{args.example}: xi_r={cert.xi_r:.6g} lambda2={result.spectral.lambda2:.6e} "
          f"C={cert.big_c:.6g} T={cert.min_gap_t:.6g} "
          f"certificate {'valid' if cert.valid else 'invalid ' + str(list(cert.reasons))}")
    print(f"{traj.status} after {len(traj.impulses)} impulses, final var {traj.var[-1]:.3e}")
    print(result.report.summary())
    print(f"outputs written to {out}/")
    return EXIT_VERIFY if result.report.hard_failure else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impulsive-pinning",
                                     description="Single-node impulsive pinning of consensus networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classify a graph and print its spectral data")
    p.add_argument("graph")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="check a pin plan and write its certificate")
    p.add_argument("graph")
    p.add_argument("plan", help="plan JSON, optionally with an initial_state entry")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="run a scenario and write trajectory CSVs")
    p.add_argument("scenario")
    p.add_argument("--out", help="output directory (default: next to the scenario)")
    p.add_argument("--backend", choices=["expm", "rk4"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check a stored trajectory against a certificate")
    p.add_argument("trajectory")
    p.add_argument("certificate")
    p.add_argument("--graph", help="graph file; defaults to the data embedded in the certificate")
    p.add_argument("--impulses", help="impulse log CSV")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="tabulate validity and convergence over a parameter grid")
    p.add_argument("scenario")
    p.add_argument("--grid", action="append", required=True,
                   help="name=lo:hi:step or name=v1,v2 (names: b, dt, r, epsilon, s)")
    p.add_argument("--no-simulate", action="store_true", help="certificates only")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("repro", help="run a reference example end to end")
    p.add_argument("example", choices=["example1", "example2"])
    p.add_argument("--out")
    p.add_argument("--max-impulses", type=int)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PinningError, NoRootError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
