"""Scenario documents, end-to-end runs and parameter sweeps.

A scenario is a JSON document::

    {
      "graph": {"generator": "ring", "n": 100, "weight": 1.0},
      "plan": {"r": 0, "s": 0.0, "strength": {"constant": 11},
               "gap": {"fixed": 1867}, "epsilon": 0.00999, "impulse_at_zero": true},
      "initial_state": {"fixture": "example1"},
      "horizon": {"max_impulses": 200, "max_time": null, "tolerance": 1e-3},
      "backend": "expm",
      "sample_every": null,
      "outputs": {"trajectory": "traj.csv", "impulses": "impulses.csv",
                  "certificate": "certificate.json", "report": "report.json"}
    }

``graph`` is an inline graph document (``n`` + ``edges`` or ``weights``),
``{"file": path}``, or a generator: ``ring`` (``n``, ``weight``) or
``grown_tree`` (``base``, ``total``, ``seed``).  ``initial_state`` is
``{"values": [...]}``, ``{"fixture": "example1" | "example2"}``,
``{"matched": {"xbar", "V", "seed"}}`` or
``{"random": {"distribution": "uniform" | "normal", "seed", ...}}``.
Strength is ``{"constant": b}``, ``{"sequence": [...]}`` or
``{"random": [eta1, eta2], "seed": k}``; gap is ``{"fixed": dt}`` or
``{"adaptive": {"min_gap": 1e-3}}``.  Relative paths resolve against the
scenario file's directory.
"""

from __future__ import annotations

import copy
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import controller as ctl
from .controller import (AdaptiveGap, ConstantStrength, FixedGap, PinPlan, RandomStrength,
                         SequenceStrength, validate_plan)
from .errors import DivergenceError, NoRootError, PinningError
from .generators import (EXAMPLE2_GRAPH_SEED, example1_initial_state, example2_initial_state,
                         gen_grown_tree, gen_ring, matched_initial_state)
from .graph import WeightedDigraph, build_laplacian, graph_from_dict, load_graph
from .prng import SplitMix64
from .simulator import Horizon, run, run_fingerprint, write_trajectory
from .spectral import spectral_data
from .verify import verify_trajectory


class ScenarioError(PinningError, ValueError):
    """Scenario document could not be resolved."""


def resolve_graph(doc: dict, base_dir=".") -> WeightedDigraph:
    if "file" in doc:
        return load_graph(Path(base_dir) / doc["file"])
    gen = doc.get("generator")
    if gen is None:
        return graph_from_dict(doc)
    if gen == "ring":
        return gen_ring(int(doc["n"]), float(doc.get("weight", 1.0)))
    if gen == "grown_tree":
        return gen_grown_tree(int(doc.get("base", 10)), int(doc.get("total", 100)),
                              int(doc.get("seed", EXAMPLE2_GRAPH_SEED)))
    raise ScenarioError(f"unknown graph generator {gen!r}")


def plan_from_dict(doc: dict) -> PinPlan:
    st = doc.get("strength", {"constant": 1.0})
    if "constant" in st:
        strength = ConstantStrength(float(st["constant"]))
    elif "sequence" in st:
        strength = SequenceStrength(tuple(st["sequence"]))
    elif "random" in st:
        lo, hi = st["random"]
        strength = RandomStrength(float(lo), float(hi), int(st.get("seed", 0)))
    else:
        raise ScenarioError(f"unrecognised strength policy {st!r}")
    gp = doc.get("gap", {"adaptive": {}})
    if "fixed" in gp:
        gap = FixedGap(float(gp["fixed"]))
    elif "adaptive" in gp:
        gap = AdaptiveGap(float((gp["adaptive"] or {}).get("min_gap", ctl.DEFAULT_MIN_GAP)))
    else:
        raise ScenarioError(f"unrecognised gap policy {gp!r}")
    eps = doc.get("epsilon")
    return PinPlan(r=int(doc.get("r", 0)), s=float(doc.get("s", 0.0)), strength=strength, gap=gap,
                   epsilon=None if eps is None else float(eps),
                   impulse_at_zero=bool(doc.get("impulse_at_zero", True)))


def plan_to_dict(plan: PinPlan) -> dict:
    st = plan.strength
    if isinstance(st, ConstantStrength):
        strength = {"constant": st.b}
    elif isinstance(st, SequenceStrength):
        strength = {"sequence": list(st.values)}
    else:
        strength = {"random": [st.eta1, st.eta2], "seed": st.seed}
    gap = ({"fixed": plan.gap.dt} if isinstance(plan.gap, FixedGap)
           else {"adaptive": {"min_gap": plan.gap.min_gap}})
    return {"r": plan.r, "s": plan.s, "strength": strength, "gap": gap,
            "epsilon": plan.epsilon, "impulse_at_zero": plan.impulse_at_zero}


def resolve_initial_state(doc: dict, n: int, xi=None) -> np.ndarray:
    if "values" in doc:
        x0 = np.asarray(doc["values"], dtype=float)
    elif "fixture" in doc:
        loaders = {"example1": example1_initial_state, "example2": example2_initial_state}
        if doc["fixture"] not in loaders:
            raise ScenarioError(f"unknown fixture {doc['fixture']!r}")
        x0 = loaders[doc["fixture"]]()
    elif "matched" in doc:
        m = doc["matched"]
        if xi is None:
            raise ScenarioError("matched initial state needs a graph with a spanning tree")
        x0 = matched_initial_state(xi, float(m["xbar"]), float(m["V"]), int(m.get("seed", 0)))
    elif "random" in doc:
        x0 = _random_state(doc["random"], n)
    else:
        raise ScenarioError(f"unrecognised initial_state {doc!r}")
    if x0.shape != (n,):
        raise ScenarioError(f"initial state has {x0.size} entries, graph has {n} vertices")
    return x0


def _random_state(doc: dict, n: int) -> np.ndarray:
    rng = SplitMix64(int(doc.get("seed", 0)))
    dist = doc.get("distribution", "uniform")
    if dist == "uniform":
        lo, hi = float(doc.get("low", -1.0)), float(doc.get("high", 1.0))
        return np.array([rng.uniform(lo, hi) for _ in range(n)])
    if dist == "normal":
        mu, sigma = float(doc.get("mean", 0.0)), float(doc.get("std", 1.0))
        out = []
        while len(out) < n:
            # Box-Muller on (0, 1] x [0, 1)
            u1 = 1.0 - rng.uniform()
            u2 = rng.uniform()
            rad = math.sqrt(-2.0 * math.log(u1))
            out += [rad * math.cos(2 * math.pi * u2), rad * math.sin(2 * math.pi * u2)]
        return mu + sigma * np.array(out[:n])
    raise ScenarioError(f"unknown distribution {dist!r}")


def horizon_from_dict(doc: dict) -> Horizon:
    max_time = doc.get("max_time")
    return Horizon(max_impulses=int(doc.get("max_impulses", 200)),
                   max_time=math.inf if max_time is None else float(max_time),
                   tolerance=float(doc.get("tolerance", 1e-3)))


@dataclass
class Scenario:
    graph: WeightedDigraph
    plan: PinPlan
    initial_state: dict
    horizon: Horizon = field(default_factory=Horizon)
    backend: str = "expm"
    sample_every: float | None = None
    outputs: dict = field(default_factory=dict)
    base_dir: Path = Path(".")
    document: dict = field(default_factory=dict)


def scenario_from_dict(doc: dict, base_dir=".") -> Scenario:
    for key in ("graph", "plan", "initial_state"):
        if key not in doc:
            raise ScenarioError(f"scenario is missing {key!r}")
    return Scenario(
        graph=resolve_graph(doc["graph"], base_dir),
        plan=plan_from_dict(doc["plan"]),
        initial_state=doc["initial_state"],
        horizon=horizon_from_dict(doc.get("horizon", {})),
        backend=doc.get("backend", "expm"),
        sample_every=doc.get("sample_every"),
        outputs=dict(doc.get("outputs", {})),
        base_dir=Path(base_dir),
        document=copy.deepcopy(doc),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    with path.open() as fh:
        return scenario_from_dict(json.load(fh), path.parent)


EXAMPLES = {
    "example1": {
        "graph": {"generator": "ring", "n": 100, "weight": 1.0},
        "plan": {"r": 0, "s": 0.0, "strength": {"constant": 11.0}, "gap": {"fixed": 1867.0},
                 "epsilon": 0.00999, "impulse_at_zero": True},
        "initial_state": {"fixture": "example1"},
        "horizon": {"max_impulses": 200, "tolerance": 1e-3},
    },
    "example2": {
        "graph": {"generator": "grown_tree", "base": 10, "total": 100, "seed": EXAMPLE2_GRAPH_SEED},
        "plan": {"r": 0, "s": 0.0, "strength": {"constant": 5.0}, "gap": {"fixed": 15.0},
                 "epsilon": 0.09, "impulse_at_zero": True},
        "initial_state": {"fixture": "example2"},
        "horizon": {"max_impulses": 200, "tolerance": 1e-3},
    },
}


def example_scenario(name: str) -> Scenario:
    if name not in EXAMPLES:
        raise ScenarioError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    return scenario_from_dict(copy.deepcopy(EXAMPLES[name]))


@dataclass
class ScenarioResult:
    laplacian: object
    spectral: object
    certificate: ctl.Certificate
    trajectory: object
    report: object


def certificate_provenance(lap, spec) -> dict:
    return {
        "graph_hash": lap.fingerprint(),
        "run_hash": run_fingerprint(lap, spec),
        "null_residual": spec.null_residual,
        "xi": spec.xi.tolist(),
        "version": ctl.VERSION,
    }


def synthesize(graph: WeightedDigraph, plan: PinPlan, x0=None):
    """Laplacian, spectral data (None without a root) and certificate for a plan."""
    lap = build_laplacian(graph)
    try:
        spec = spectral_data(lap)
    except NoRootError:
        return lap, None, validate_plan(lap, None, plan, x0)
    cert = validate_plan(lap, spec, plan, x0, provenance=certificate_provenance(lap, spec))
    return lap, spec, cert


def run_scenario(sc: Scenario, write: bool = False, out_dir=None) -> ScenarioResult:
    """Synthesize, simulate and verify; optionally write the configured outputs."""
    lap = build_laplacian(sc.graph)
    spec = spectral_data(lap)
    x0 = resolve_initial_state(sc.initial_state, lap.n, spec.xi)
    cert = validate_plan(lap, spec, sc.plan, x0, provenance=certificate_provenance(lap, spec))
    traj = run(lap, spec, sc.plan, x0, cert, sc.horizon, backend=sc.backend,
               sample_every=sc.sample_every)
    report = verify_trajectory(traj, lap, spec, cert)
    result = ScenarioResult(lap, spec, cert, traj, report)
    if write:
        write_outputs(result, sc, out_dir)
    return result


DEFAULT_OUTPUTS = {"trajectory": "trajectory.csv", "impulses": "impulses.csv",
                   "certificate": "certificate.json", "report": "report.json"}


def write_outputs(result: ScenarioResult, sc: Scenario, out_dir=None) -> dict:
    base = Path(out_dir) if out_dir is not None else sc.base_dir
    base.mkdir(parents=True, exist_ok=True)
    paths = {k: base / sc.outputs.get(k, v) for k, v in DEFAULT_OUTPUTS.items()}
    write_trajectory(result.trajectory, paths["trajectory"], paths["impulses"])
    write_certificate(result.certificate, paths["certificate"])
    paths["report"].write_text(result.report.to_json())
    return paths


def write_certificate(cert: ctl.Certificate, path) -> None:
    Path(path).write_text(json.dumps(cert.to_dict(), indent=2) + "\n")


def read_certificate(path) -> ctl.Certificate:
    return ctl.Certificate.from_dict(json.loads(Path(path).read_text()))


SWEEP_PARAMS = ("b", "dt", "r", "epsilon", "s")


def parse_grid(items) -> dict:
    """``["b=1:120:1", "dt=10,15"]`` -> ``{"b": [...], "dt": [...]}``; ``lo:hi:step`` is inclusive."""
    grid = {}
    for item in items:
        name, _, values = item.partition("=")
        name = name.strip()
        if name not in SWEEP_PARAMS or not values:
            raise ScenarioError(f"grid entry {item!r}: expected one of {SWEEP_PARAMS} as name=values")
        if ":" in values:
            parts = [float(v) for v in values.split(":")]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1.0
            if step <= 0:
                raise ScenarioError("grid step must be positive")
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            grid[name] = [lo + i * step for i in range(count)]
        else:
            grid[name] = [float(v) for v in values.split(",")]
    return grid


def _apply(plan_doc: dict, params: dict) -> dict:
    doc = copy.deepcopy(plan_doc)
    if "b" in params:
        doc["strength"] = {"constant": params["b"]}
        # a fixed epsilon is tied to the old strength; fall back to the default rule
        if "epsilon" not in params:
            doc.pop("epsilon", None)
    if "dt" in params:
        doc["gap"] = {"fixed": params["dt"]}
    if "r" in params:
        doc["r"] = int(params["r"])
    if "epsilon" in params:
        doc["epsilon"] = params["epsilon"]
    if "s" in params:
        doc["s"] = params["s"]
    return doc


def _sweep_point(args):
    lap, spec, x0, sc, plan_doc, params, simulate_runs = args
    plan = plan_from_dict(_apply(plan_doc, params))
    row = dict(params)
    cert = validate_plan(lap, spec, plan, x0)
    row.update(valid=cert.valid, reasons=";".join(cert.reasons), T=cert.min_gap_t)
    if simulate_runs and spec is not None:
        try:
            traj = run(lap, spec, plan, x0, cert, sc.horizon, backend=sc.backend,
                       sample_every=sc.sample_every)
            row.update(outcome=traj.status, impulses=len(traj.impulses),
                       final_var=float(traj.var[-1]))
        except DivergenceError:
            row.update(outcome="diverged", impulses=None, final_var=None)
        except (PinningError, ValueError) as exc:
            row.update(outcome=type(exc).__name__, impulses=None, final_var=None)
    return row


def sweep(sc: Scenario, grid: dict, simulate_runs: bool = True, workers: int = 1) -> list:
    """Certificate validity (and optionally run outcome) at every grid point, in grid order.

    The graph, its spectral data and the initial state are resolved once and
    shared read-only by all points.
    """
    lap = build_laplacian(sc.graph)
    try:
        spec = spectral_data(lap)
    except NoRootError:
        spec = None
    x0 = None if spec is None else resolve_initial_state(sc.initial_state, lap.n, spec.xi)
    names = list(grid)
    points = [dict(zip(names, combo)) for combo in itertools.product(*(grid[k] for k in names))]
    plan_doc = sc.document.get("plan", plan_to_dict(sc.plan))
    jobs = [(lap, spec, x0, sc, plan_doc, p, simulate_runs) for p in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def sweep_csv(rows: list) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join("" if r.get(c) is None else _fmt(r[c]) for c in cols))
    return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)
