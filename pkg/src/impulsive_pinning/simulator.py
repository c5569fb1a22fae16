"""Hybrid flow-and-jump simulation of an impulsively pinned consensus network."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from .controller import AdaptiveGap, Certificate, FixedGap, PinPlan, adaptive_gap
from .errors import DivergenceError, StepSizeError
from .graph import Laplacian
from .observables import impulse_jump, lyapunov_V, variation_metric, weighted_mean
from .spectral import SpectralData

FLOW = "flow"
PRE = "preImpulse"
POST = "postImpulse"
DIVERGENCE_LIMIT = 1e12
BACKENDS = ("expm", "rk4")
# stability alone allows h = 0.5/||L||; accuracy to 1e-8 needs a finer step
RK4_REFINE = 64


def run_fingerprint(lap: Laplacian, spec: SpectralData) -> str:
    """Hash tying a trajectory to the Laplacian and null vector it was produced with."""
    h = hashlib.sha256(lap.fingerprint().encode())
    h.update(spec.fingerprint_bytes())
    return h.hexdigest()


class Propagator:
    """Cached flow maps ``x(t + dt) = P(dt) x(t)`` for ``dx/dt = -L x``.

    ``expm`` uses scipy's scaling-and-squaring Pade exponential.  ``rk4``
    takes classical Runge-Kutta steps of size at most
    ``0.5 / (refine * ||L||_inf)``; on a linear system each step is the
    matrix polynomial ``I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24`` with
    ``M = -L``, and the steps of one sample interval are composed by
    repeated squaring.
    """

    def __init__(self, lap_entries, backend: str = "expm", refine: int = RK4_REFINE):
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
        self.m = -np.asarray(lap_entries, dtype=float)
        self.backend = backend
        norm = np.abs(self.m).sum(axis=1).max()
        self.max_step = 0.5 / (refine * norm) if norm > 0 else math.inf
        self._cache = {}

    def __call__(self, dt: float) -> np.ndarray:
        p = self._cache.get(dt)
        if p is None:
            p = self._build(dt)
            self._cache[dt] = p
        return p

    def _build(self, dt):
        if dt == 0:
            return np.eye(self.m.shape[0])
        if self.backend == "expm":
            return expm(self.m * dt)
        steps = max(1, math.ceil(dt / self.max_step)) if math.isfinite(self.max_step) else 1
        hm = self.m * (dt / steps)
        eye = np.eye(hm.shape[0])
        hm2 = hm @ hm
        one_step = eye + hm + hm2 / 2 + hm2 @ hm / 6 + hm2 @ hm2 / 24
        return np.linalg.matrix_power(one_step, steps)


def sample_times(duration: float, sample_every: float) -> np.ndarray:
    """Interior sample times plus the endpoint; the start is excluded."""
    if sample_every <= 0 or not math.isfinite(sample_every):
        raise StepSizeError(f"sampling interval must be positive and finite, got {sample_every}")
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    if duration == 0:
        return np.array([0.0])
    count = math.ceil(duration / sample_every - 1e-12)
    times = sample_every * np.arange(1, count)
    return np.append(times, duration)


def flow(x0, lap: Laplacian, duration: float, sample_every: float, backend: str = "expm",
         propagator: Propagator | None = None) -> list:
    """States of ``dx/dt = -L x`` at each sample time after the start, endpoint included."""
    prop = propagator or Propagator(lap.entries, backend)
    x = np.array(x0, dtype=float, copy=True)
    out, prev = [], 0.0
    for t in sample_times(duration, sample_every):
        x = prop(t - prev) @ x
        prev = t
        out.append((float(t), x.copy()))
    return out


@dataclass(frozen=True)
class Horizon:
    max_impulses: int = 200
    max_time: float = math.inf
    tolerance: float = 1e-3


@dataclass(frozen=True)
class ImpulseRecord:
    k: int
    t: float
    b: float
    x_r_pre: float
    x_r_post: float


@dataclass(eq=False)
class Trajectory:
    """Right-continuous hybrid trajectory.

    Each impulse appears as a ``preImpulse`` row followed by a
    ``postImpulse`` row at the same time.  ``xbar`` is the raw weighted mean
    (not offset by the target).
    """

    t: np.ndarray
    x: np.ndarray
    phase: tuple
    xi: np.ndarray
    s: float
    r: int
    impulses: list = field(default_factory=list)
    graph_hash: str = ""
    status: str = ""
    impulse_at_zero: bool = True
    tolerance: float = 1e-3

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.phase = tuple(self.phase)
        self.xi = np.asarray(self.xi, dtype=float)
        self.xbar = self.x @ self.xi
        self.V = np.einsum("j,ij->i", self.xi, (self.x - self.xbar[:, None]) ** 2)
        self.var = np.abs(self.x - self.s).sum(axis=1)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def impulse_rows(self) -> list:
        """``(pre_row, post_row)`` index pairs, one per impulse."""
        pre = [i for i, p in enumerate(self.phase) if p == PRE]
        return [(i, i + 1) for i in pre]

    def meta(self) -> dict:
        return {
            "n": self.n, "s": self.s, "r": self.r, "xi": self.xi.tolist(),
            "graph_hash": self.graph_hash, "status": self.status,
            "impulse_at_zero": self.impulse_at_zero, "tolerance": self.tolerance,
        }


def run(lap: Laplacian, spec: SpectralData, plan: PinPlan, x0, cert: Certificate | None = None,
        horizon: Horizon = Horizon(), backend: str = "expm", sample_every: float | None = None,
        samples_per_gap: int = 20) -> Trajectory:
    """Alternate flow and pinning jumps until consensus or the horizon.

    Convergence (``var < tolerance``) is tested at flow samples and right
    after impulses, never between the two halves of an impulse.  When
    ``sample_every`` is None each gap is split into ``samples_per_gap``
    equal intervals.
    """
    x = np.array(x0, dtype=float, copy=True)
    if x.shape != (lap.n,):
        raise ValueError(f"initial state has shape {x.shape}, expected ({lap.n},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("initial state must be finite")
    adaptive = isinstance(plan.gap, AdaptiveGap)
    if adaptive and (cert is None or cert.epsilon is None or cert.xi_r is None):
        raise ValueError("adaptive gaps need a certificate with epsilon and xi_r")
    if isinstance(plan.gap, FixedGap) and plan.gap.dt <= 0:
        raise ValueError("fixed gap must be positive")

    xi, s, r, tol = spec.xi, plan.s, plan.r, horizon.tolerance
    strength = plan.strength.sampler()
    prop = Propagator(lap.entries, backend)
    ts, xs, phases, log = [0.0], [x.copy()], [FLOW], []

    def guard(state, when):
        if np.abs(state).max() > DIVERGENCE_LIMIT:
            raise DivergenceError(f"|x| exceeded {DIVERGENCE_LIMIT:g} at t={when:g}")

    def jump(t, state, k):
        b = float(strength(k))
        new = impulse_jump(state, r, b, s)
        guard(new, t)
        ts.extend([t, t])
        xs.extend([state.copy(), new.copy()])
        phases.extend([PRE, POST])
        log.append(ImpulseRecord(k, t, b, float(state[r]), float(new[r])))
        return new

    if not adaptive and weighted_mean(x, xi) == s and variation_metric(x, s) >= tol:
        warnings.warn("weighted mean starts on the target; convergence to s is not guaranteed",
                      stacklevel=2)

    t, status = 0.0, ""
    k = 0 if plan.impulse_at_zero else 1
    if variation_metric(x, s) < tol:
        status = "converged"
    elif plan.impulse_at_zero:
        x = jump(0.0, x, k)
        k += 1

    while not status:
        if variation_metric(x, s) < tol:
            status = "converged"
            break
        if len(log) >= horizon.max_impulses:
            status = "max_impulses"
            break
        if adaptive:
            gap = adaptive_gap(spec, cert, lyapunov_V(x, xi), weighted_mean(x, xi) - s,
                               plan.gap.min_gap)
        else:
            gap = plan.gap.dt
        end = t + gap
        truncated = end > horizon.max_time
        if truncated:
            end = horizon.max_time
        duration = end - t
        step = sample_every if sample_every is not None else max(gap / samples_per_gap, 1e-12)
        samples = flow(x, lap, duration, step, propagator=prop) if duration > 0 else []
        for i, (dt_rel, state) in enumerate(samples):
            guard(state, t + dt_rel)
            last = i == len(samples) - 1
            if last and not truncated:
                x = state
                break
            ts.append(t + dt_rel)
            xs.append(state)
            phases.append(FLOW)
            x = state
            if variation_metric(x, s) < tol:
                status = "converged"
                t += dt_rel
                break
        if status:
            break
        if truncated:
            t = end
            status = "max_time"
            break
        t = end
        x = jump(t, x, k)
        k += 1

    return Trajectory(np.array(ts), np.array(xs), phases, xi, s, r, log,
                      graph_hash=run_fingerprint(lap, spec), status=status, impulse_at_zero=plan.impulse_at_zero,
                      tolerance=tol)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    path = Path(path)
    header = ["t", "phase"] + [f"x_{i + 1}" for i in range(traj.n)] + ["xbar", "V", "var"]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(traj.t)):
            row = [repr(float(traj.t[i])), traj.phase[i]]
            row += [repr(float(v)) for v in traj.x[i]]
            row += [repr(float(traj.xbar[i])), repr(float(traj.V[i])), repr(float(traj.var[i]))]
            w.writerow(row)


def write_impulse_log_csv(traj: Trajectory, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "t_k", "b_k", "x_r_pre", "x_r_post"])
        for rec in traj.impulses:
            w.writerow([rec.k, repr(rec.t), repr(rec.b), repr(rec.x_r_pre), repr(rec.x_r_post)])


def meta_path_for(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".meta.json")


def write_trajectory(traj: Trajectory, csv_path, impulses_path=None) -> None:
    """Trajectory CSV, its ``.meta.json`` sidecar, and optionally the impulse log."""
    write_trajectory_csv(traj, csv_path)
    meta_path_for(csv_path).write_text(json.dumps(traj.meta(), indent=2) + "\n")
    if impulses_path is not None:
        write_impulse_log_csv(traj, impulses_path)


def read_trajectory(csv_path, meta_path=None, impulses_path=None) -> Trajectory:
    meta = json.loads(Path(meta_path or meta_path_for(csv_path)).read_text())
    with Path(csv_path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    n = meta["n"]
    body = rows[1:]
    t = [float(r[0]) for r in body]
    phase = [r[1] for r in body]
    x = [[float(v) for v in r[2:2 + n]] for r in body]
    log = []
    if impulses_path is not None:
        with Path(impulses_path).open(newline="") as fh:
            for rec in list(csv.reader(fh))[1:]:
                log.append(ImpulseRecord(int(rec[0]), float(rec[1]), float(rec[2]),
                                         float(rec[3]), float(rec[4])))
    return Trajectory(np.array(t), np.array(x).reshape(len(t), n), phase, meta["xi"], meta["s"],
                      meta["r"], log, graph_hash=meta["graph_hash"], status=meta["status"],
                      impulse_at_zero=meta["impulse_at_zero"], tolerance=meta["tolerance"])
