"""Runtime checks of the flow and jump inequalities on a recorded trajectory.

Hard checks are guaranteed by the theory whenever their premise holds;
a negative slack there is a genuine failure.  Checks whose premise does
not hold at some impulse are reported as ``not_established`` rather than
failed, since the underlying conditions are sufficient only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .controller import Certificate
from .errors import MismatchError
from .graph import Laplacian
from .simulator import POST, PRE, Trajectory, run_fingerprint
from .spectral import SpectralData

PASS, FAIL, NOT_ESTABLISHED, NOT_APPLICABLE = "pass", "fail", "not_established", "not_applicable"
HARD, INFO = "hard", "info"

FLOW_TOL = 1e-9
DECAY_REL = 1e-6
JUMP_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    severity: str
    status: str
    worst_slack: float | None = None
    location: str = ""
    evaluated: int = 0
    skipped: int = 0
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list
    certificate: dict = field(default_factory=dict)
    verdict: str = PASS

    @property
    def hard_failure(self) -> bool:
        return self.verdict == FAIL

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "checks": [asdict(c) for c in self.checks],
                "certificate": self.certificate}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(CheckResult.__dataclass_fields__)
        w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        w.writeheader()
        for c in self.checks:
            w.writerow(asdict(c))
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for c in self.checks:
            slack = "n/a" if c.worst_slack is None else f"{c.worst_slack:.3e}"
            lines.append(f"  [{c.severity:4s}] {c.name:22s} {c.status:16s} worst slack {slack}"
                         f" {c.location}")
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


class _Tracker:
    """Keeps the smallest slack and where it happened."""

    def __init__(self):
        self.worst = math.inf
        self.where = ""
        self.count = 0
        self.skipped = 0

    def add(self, slack, where):
        self.count += 1
        if slack < self.worst:
            self.worst, self.where = float(slack), where

    def result(self, name, severity, detail="", status=None) -> CheckResult:
        if status is None:
            if self.count == 0:
                status = NOT_ESTABLISHED
            elif self.worst < 0:
                status = FAIL
            elif self.skipped:
                status = NOT_ESTABLISHED
            else:
                status = PASS
        worst = None if self.count == 0 else self.worst
        return CheckResult(name, severity, status, worst, self.where, self.count, self.skipped,
                           detail)


def _segments(traj: Trajectory):
    """Row ranges of each flow segment: start row (t_k^+ or t=0) through end row (t_{k+1}^- or last)."""
    segs, start = [], 0
    for i, ph in enumerate(traj.phase):
        if ph == PRE:
            segs.append((start, i))
        elif ph == POST:
            start = i
    last = len(traj.phase) - 1
    if traj.phase[last] != PRE and start < last:
        segs.append((start, last))
    return segs


def _ensure_match(traj: Trajectory, lap: Laplacian | None, spec: SpectralData,
                  cert: Certificate) -> None:
    expected = None
    if lap is not None:
        expected = run_fingerprint(lap, spec)
    elif cert.provenance.get("run_hash"):
        expected = cert.provenance["run_hash"]
    if expected is not None and traj.graph_hash and traj.graph_hash != expected:
        raise MismatchError("trajectory was produced on a different graph or null vector")
    if traj.n != len(spec.xi):
        raise MismatchError(f"trajectory has {traj.n} states, graph has {len(spec.xi)} vertices")


def verify_trajectory(traj: Trajectory, lap: Laplacian | None, spec: SpectralData,
                      cert: Certificate) -> VerificationReport:
    """Evaluate every runtime invariant of the hybrid run and report the worst slack of each."""
    _ensure_match(traj, lap, spec, cert)
    s = traj.s
    rate = 0.0 if math.isinf(spec.lambda2) else spec.lambda2 / spec.max_xi
    offset = traj.xbar - s
    scale = np.abs(traj.x).max(axis=1)
    checks = []

    # mean conservation along every flow segment
    tr = _Tracker()
    for a, b in _segments(traj):
        bound = FLOW_TOL * (1 + abs(traj.xbar[a]))
        for i in range(a + 1, b + 1):
            tr.add(bound - abs(traj.xbar[i] - traj.xbar[a]), f"t={traj.t[i]:.6g}")
    checks.append(tr.result("flow_conservation", HARD))

    # exponential decay of the dispersion along the flow
    tr = _Tracker()
    for a, b in _segments(traj):
        for i in range(a + 1, b + 1):
            bound = traj.V[a] * math.exp(-rate * (traj.t[i] - traj.t[a])) * (1 + DECAY_REL) \
                + (1e-12 * scale[a]) ** 2
            tr.add(bound - traj.V[i], f"t={traj.t[i]:.6g}")
    checks.append(tr.result("lyapunov_decay", HARD))

    params_ok = (cert.xi_r is not None and cert.epsilon is not None and cert.eta1 is not None
                 and cert.big_c is not None)
    jump, ratio, geo = _Tracker(), _Tracker(), _Tracker()
    pairs = traj.impulse_rows
    if params_ok:
        xi_r, eps, eta1, eta2 = cert.xi_r, cert.epsilon, cert.eta1, cert.eta2
        lo_f, hi_f = 1 - eta2 * (xi_r + eps), 1 - eta1 * (xi_r - eps)
        # reference state t_0^+ for the geometric bound
        if traj.impulse_at_zero and pairs and traj.t[pairs[0][0]] == traj.t[0]:
            ref_row, first = pairs[0][1], 1
        else:
            ref_row, first = 0, 0
        chain_ok = True
        prev_post = ref_row
        for j, (pre, post) in enumerate(pairs):
            if j < first:
                # the impulse at t=0 only sets up the initial state t_0^+
                continue
            where = f"k={j if traj.impulse_at_zero else j + 1}"
            b_ok = not traj.impulses or eta1 - 1e-12 <= traj.impulses[j].b <= eta2 + 1e-12
            premise = b_ok and _gap_premise(traj, spec, cert, prev_post, pre)
            prev_post = post
            if premise:
                pre_abs, post_abs = abs(offset[pre]), abs(offset[post])
                tol = JUMP_TOL * pre_abs
                jump.add(min(post_abs - lo_f * pre_abs + tol, hi_f * pre_abs + tol - post_abs), where)
                if offset[post] != 0:
                    ratio.add(cert.big_c * (1 + DECAY_REL) - traj.V[post] / offset[post] ** 2, where)
            else:
                jump.skipped += 1
                ratio.skipped += 1
                chain_ok = False
            if chain_ok:
                bound = cert.decay_ratio ** (j - first + 1) * abs(offset[ref_row]) * (1 + DECAY_REL)
                geo.add(bound - abs(offset[post]), where)
            else:
                geo.skipped += 1
    detail = "" if params_ok else "certificate lacks admissible parameters"
    checks.append(jump.result("jump_bounds", HARD, detail))
    checks.append(ratio.result("ratio_bound", HARD, detail))
    checks.append(geo.result("geometric_decay", HARD, detail))

    # consensus at the end of the recorded horizon
    final_var = float(traj.var[-1])
    tr = _Tracker()
    tr.add(traj.tolerance - final_var, f"t={traj.t[-1]:.6g}")
    checks.append(tr.result("consensus", INFO, f"final var {final_var:.3e}"))

    checks.append(_cascade_check(traj, spec))

    verdict = FAIL if any(c.severity == HARD and c.status == FAIL for c in checks) else PASS
    return VerificationReport(checks, cert.to_dict(), verdict)


def _gap_premise(traj, spec, cert, start_row, pre_row) -> bool:
    """Does the gap from ``start_row`` to ``pre_row`` meet the state-dependent lower bound?"""
    v = traj.V[start_row]
    off = traj.xbar[start_row] - traj.s
    if off == 0:
        return False
    gap = traj.t[pre_row] - traj.t[start_row]
    if v <= 0 or math.isinf(spec.lambda2):
        return True
    need = (spec.max_xi / spec.lambda2) * math.log((cert.xi_r / cert.epsilon**2) * v / off**2)
    return gap >= need


def _cascade_check(traj: Trajectory, spec: SpectralData) -> CheckResult:
    """Non-root vertices settle no earlier than the root block."""
    root = np.asarray(spec.xi) > 0
    if root.all():
        return CheckResult("cascade", INFO, NOT_APPLICABLE, detail="strongly connected: no cascade")
    dev = np.abs(traj.x - traj.s)
    tol = traj.tolerance
    root_dev = dev[:, root].sum(axis=1)
    rest_dev = dev[:, ~root].sum(axis=1)

    def settle_time(series):
        above = np.nonzero(series >= tol)[0]
        if len(above) == 0:
            return float(traj.t[0])
        if above[-1] == len(series) - 1:
            return math.inf
        return float(traj.t[above[-1] + 1])

    t_root, t_rest = settle_time(root_dev), settle_time(rest_dev)
    if math.isinf(t_rest):
        return CheckResult("cascade", INFO, FAIL, tol - float(rest_dev[-1]), f"t={traj.t[-1]:.6g}",
                           1, 0, "non-root vertices still outside tolerance")
    return CheckResult("cascade", INFO, PASS if t_rest >= t_root else FAIL, t_rest - t_root, "", 1, 0,
                       f"root settled at t={t_root:.6g}, non-root at t={t_rest:.6g}")
