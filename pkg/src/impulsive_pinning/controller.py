"""Impulsive pinning plans and their sufficient-condition certificates.

A plan pins one vertex ``r`` towards a target ``s``: at each impulse time
``x_r <- x_r + b_k (s - x_r)``.  Between impulses the network follows
``dx/dt = -L x``.  The certificate collects the constants (epsilon, C, T)
that guarantee consensus on ``s`` when every gap is at least ``T``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, NoRootError, NotInRootError, ZeroMeanError
from .graph import Connectivity, Laplacian
from .observables import impulse_jump, lyapunov_V, weighted_mean
from .prng import SplitMix64
from .spectral import SpectralData, spectral_data

DEFAULT_MIN_GAP = 1e-3
EPSILON_BACKOFF = 0.999
BOUNDARY_RTOL = 1e-12
VERSION = "0.1.0"


# reason codes
NO_ROOT = "NoRoot"
NOT_IN_ROOT = "NotInRoot"
STRENGTH_OUT_OF_RANGE = "StrengthOutOfRange"
EPSILON_OUT_OF_RANGE = "EpsilonOutOfRange"
GAP_BELOW_T = "GapBelowT"
ZERO_MEAN = "ZeroMean"
VERTEX_OUT_OF_RANGE = "VertexOutOfRange"
# informational flags
DEGENERATE_ROOT = "DegenerateRoot"
T_CLAMPED = "TClamped"
INITIAL_RATIO_UNKNOWN = "InitialRatioUnknown"


@dataclass(frozen=True)
class ConstantStrength:
    b: float

    def bounds(self):
        return self.b, self.b

    def sampler(self):
        return lambda k: self.b


@dataclass(frozen=True)
class SequenceStrength:
    """Explicit strengths; the last value repeats once the list runs out."""

    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("strength sequence must be non-empty")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def bounds(self):
        return min(self.values), max(self.values)

    def sampler(self):
        vals = self.values
        return lambda k: vals[min(k, len(vals) - 1)]


@dataclass(frozen=True)
class RandomStrength:
    """Uniform draws in ``[eta1, eta2]`` from SplitMix64(seed), one per impulse in order."""

    eta1: float
    eta2: float
    seed: int = 0

    def __post_init__(self):
        if self.eta1 > self.eta2:
            raise ValueError("eta1 must not exceed eta2")

    def bounds(self):
        return self.eta1, self.eta2

    def sampler(self):
        rng = SplitMix64(self.seed)
        drawn = []

        def strength(k):
            while len(drawn) <= k:
                drawn.append(rng.uniform(self.eta1, self.eta2))
            return drawn[k]

        return strength


@dataclass(frozen=True)
class FixedGap:
    dt: float


@dataclass(frozen=True)
class AdaptiveGap:
    """State-dependent gap, recomputed after every impulse, floored at ``min_gap``."""

    min_gap: float = DEFAULT_MIN_GAP


@dataclass(frozen=True)
class PinPlan:
    r: int
    s: float = 0.0
    strength: object = field(default_factory=lambda: ConstantStrength(1.0))
    gap: object = field(default_factory=lambda: AdaptiveGap())
    epsilon: float | None = None
    impulse_at_zero: bool = True

    @property
    def min_gap(self) -> float:
        return self.gap.min_gap if isinstance(self.gap, AdaptiveGap) else DEFAULT_MIN_GAP


def admissible_strength_range(spec: SpectralData, r: int) -> tuple:
    """Open interval ``(0, 1/xi_r)`` containing every admissible impulse strength."""
    xi_r = float(spec.xi[r])
    if xi_r <= 0:
        raise NotInRootError(f"vertex {r} is outside the root component (xi_r = 0)")
    return 0.0, 1.0 / xi_r


def default_epsilon(xi_r: float, eta2: float, factor: float = EPSILON_BACKOFF) -> float:
    return factor * min(xi_r, 1.0 / eta2 - xi_r)


def epsilon_upper(xi_r: float, eta2: float) -> float:
    return min(xi_r, 1.0 / eta2 - xi_r)


def ratio_bound_C(xi_r: float, eta2: float, epsilon: float) -> float:
    """Bound on ``V / xbar**2`` right after each impulse."""
    base = 1.0 - eta2 * (xi_r + epsilon)
    if base <= 0:
        raise DomainError(f"1 - eta2 (xi_r + epsilon) = {base:.3e} is not positive")
    num = (2.0 + 4.0 * eta2**2 * (1.0 - xi_r)) * epsilon**2 / xi_r \
        + 4.0 * eta2**2 * xi_r * (1.0 - xi_r)
    return num / base**2


def gap_bound(max_xi, lambda2, xi_r, epsilon, big_c, ratio0) -> float:
    """Unclamped minimal gap; ``ratio0`` is ``V(0) / xbar(0)**2``."""
    if math.isinf(lambda2):
        return 0.0
    log_ratio = math.log(ratio0) if ratio0 > 0 else -math.inf
    return (max_xi / lambda2) * (max(math.log(big_c), log_ratio) + math.log(xi_r / epsilon**2))


def min_gap_T(max_xi, lambda2, xi_r, epsilon, big_c, v0, xbar0, floor=DEFAULT_MIN_GAP) -> float:
    """Minimal inter-impulse gap guaranteeing consensus, floored at ``floor``.

    ``xbar0`` is the initial weighted mean measured from the target.
    """
    if xbar0 == 0:
        raise ZeroMeanError("weighted mean equals the target at t=0; gap bound undefined")
    return max(gap_bound(max_xi, lambda2, xi_r, epsilon, big_c, v0 / xbar0**2), floor)


def adaptive_gap(spec: SpectralData, cert: "Certificate", v_k: float, xbar_k: float,
                 floor: float = DEFAULT_MIN_GAP) -> float:
    """Gap after an impulse from the post-impulse dispersion ``v_k`` and mean offset ``xbar_k``."""
    if xbar_k == 0:
        raise ZeroMeanError("weighted mean reached the target exactly; adaptive gap undefined")
    if v_k <= 0 or math.isinf(spec.lambda2):
        return floor
    arg = (cert.xi_r / cert.epsilon**2) * v_k / xbar_k**2
    return max((spec.max_xi / spec.lambda2) * math.log(arg), floor)


@dataclass(frozen=True)
class Certificate:
    """Outcome of checking a plan against the sufficient conditions.

    Numeric fields are ``None`` when a failed hypothesis leaves them undefined.
    ``ratio0`` is ``V / xbar**2`` at ``t_0^+`` (after the impulse at zero when
    the plan has one).
    """

    r: int
    s: float
    valid: bool
    reasons: tuple = ()
    flags: tuple = ()
    classification: str = ""
    xi_r: float | None = None
    eta1: float | None = None
    eta2: float | None = None
    epsilon: float | None = None
    big_c: float | None = None
    min_gap_t: float | None = None
    decay_ratio: float | None = None
    max_xi: float | None = None
    lambda2: float | None = None
    v0: float | None = None
    xbar0: float | None = None
    ratio0: float | None = None
    min_gap_floor: float = DEFAULT_MIN_GAP
    gap_policy: dict = field(default_factory=dict)
    strength_policy: dict = field(default_factory=dict)
    impulse_at_zero: bool = True
    provenance: dict = field(default_factory=dict)

    @property
    def eta_bounds(self):
        return self.eta1, self.eta2

    def recompute(self) -> tuple:
        """Re-derive ``(C, T)`` from the stored inputs."""
        c = ratio_bound_C(self.xi_r, self.eta2, self.epsilon)
        t = gap_bound(self.max_xi, _float(self.lambda2), self.xi_r, self.epsilon, c,
                      self.ratio0 if self.ratio0 is not None else 0.0)
        return c, max(t, self.min_gap_floor)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["reasons"] = list(self.reasons)
        d["flags"] = list(self.flags)
        if d["lambda2"] is not None and math.isinf(d["lambda2"]):
            d["lambda2"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        d = dict(d)
        d["reasons"] = tuple(d.get("reasons", ()))
        d["flags"] = tuple(d.get("flags", ()))
        if d.get("lambda2") == "inf":
            d["lambda2"] = math.inf
        known = cls.__dataclass_fields__
        return cls(**{k: v for k, v in d.items() if k in known})


def _float(v):
    return math.inf if v == "inf" else v


def policy_dict(policy) -> dict:
    kind = {ConstantStrength: "constant", SequenceStrength: "sequence",
            RandomStrength: "random", FixedGap: "fixed", AdaptiveGap: "adaptive"}[type(policy)]
    d = asdict(policy)
    if "values" in d:
        d["values"] = list(d["values"])
    return {"kind": kind, **d}


def initial_offsets(x0, xi, plan: PinPlan, b0: float | None = None) -> tuple:
    """``(V, xbar - s)`` at ``t_0^+``."""
    x = np.asarray(x0, dtype=float)
    if plan.impulse_at_zero:
        if b0 is None:
            b0 = plan.strength.sampler()(0)
        x = impulse_jump(x, plan.r, b0, plan.s)
    return lyapunov_V(x, xi), weighted_mean(x, xi) - plan.s


def validate_plan(lap: Laplacian, spec: SpectralData | None, plan: PinPlan, x0=None,
                  provenance: dict | None = None) -> Certificate:
    """Check every hypothesis of the sufficient condition; failures become reason codes.

    Without ``x0`` the initial-ratio term of the gap bound is dropped and
    ``InitialRatioUnknown`` is flagged.
    """
    base = dict(r=plan.r, s=plan.s, classification=lap.classification.value,
                gap_policy=policy_dict(plan.gap), strength_policy=policy_dict(plan.strength),
                impulse_at_zero=plan.impulse_at_zero, min_gap_floor=plan.min_gap,
                provenance=dict(provenance or {}))
    if lap.classification is Connectivity.NO_ROOT:
        return Certificate(valid=False, reasons=(NO_ROOT,), **base)
    if not 0 <= plan.r < lap.n:
        return Certificate(valid=False, reasons=(VERTEX_OUT_OF_RANGE,), **base)
    if spec is None:
        try:
            spec = spectral_data(lap)
        except NoRootError:
            return Certificate(valid=False, reasons=(NO_ROOT,), **base)

    reasons, flags = [], []
    if spec.degenerate_root:
        flags.append(DEGENERATE_ROOT)
    xi_r = float(spec.xi[plan.r])
    eta1, eta2 = (float(v) for v in plan.strength.bounds())
    base.update(xi_r=xi_r, eta1=eta1, eta2=eta2, max_xi=spec.max_xi, lambda2=spec.lambda2)
    if xi_r <= 0:
        return Certificate(valid=False, reasons=(NOT_IN_ROOT,), **base)
    # the interval is open; a strength within roundoff of 1/xi_r counts as on the boundary
    if not (0 < eta1 <= eta2 and eta2 * xi_r < 1.0 - BOUNDARY_RTOL):
        return Certificate(valid=False, reasons=(STRENGTH_OUT_OF_RANGE,), **base)

    epsilon = default_epsilon(xi_r, eta2) if plan.epsilon is None else float(plan.epsilon)
    base["epsilon"] = epsilon
    if not 0 < epsilon < epsilon_upper(xi_r, eta2):
        return Certificate(valid=False, reasons=(EPSILON_OUT_OF_RANGE,), **base)

    big_c = ratio_bound_C(xi_r, eta2, epsilon)
    decay = 1.0 - eta1 * (xi_r - epsilon)
    base.update(big_c=big_c, decay_ratio=decay)

    if x0 is None:
        flags.append(INITIAL_RATIO_UNKNOWN)
        ratio0 = 0.0
    else:
        v0, xbar0 = initial_offsets(x0, spec.xi, plan)
        base.update(v0=v0, xbar0=xbar0)
        if xbar0 == 0:
            return Certificate(valid=False, reasons=(ZERO_MEAN,), flags=tuple(flags), **base)
        ratio0 = v0 / xbar0**2
        base["ratio0"] = ratio0

    raw_t = gap_bound(spec.max_xi, spec.lambda2, xi_r, epsilon, big_c, ratio0)
    if raw_t <= 0:
        flags.append(T_CLAMPED)
    t_min = max(raw_t, plan.min_gap)
    base["min_gap_t"] = t_min

    if isinstance(plan.gap, FixedGap) and plan.gap.dt < t_min:
        reasons.append(GAP_BELOW_T)
    return Certificate(valid=not reasons, reasons=tuple(reasons), flags=tuple(flags), **base)
