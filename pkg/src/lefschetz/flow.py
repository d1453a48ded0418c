"""Normalized discrete Ricci flow on a single fiber, with its monitors.

The flow evolves conformal factors by ``du_i/dt = k*_i - K_i`` until the
angle-defect curvature is uniform.  Along the way every sample records the
curvature extremes, the gradient-energy monitor ``H = (K - k*) + 2|grad Phi|^2``
built from the Poisson potential ``L Phi = k* - K``, and a first-derivative
proxy for the curvature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, NamedTuple, TextIO

import numpy as np

from .mesh import (
    ConformalState,
    InvalidStateError,
    TriSurface,
    corner_angles,
    cotan_laplacian,
    cotan_weights,
    face_areas,
    vertex_areas,
    vertex_curvature,
)

__all__ = [
    "TargetCurvature",
    "FlowConfig",
    "FlowSample",
    "FlowTrace",
    "DecayFit",
    "DegenerateStateError",
    "PoissonSolveError",
    "InsufficientSamplesError",
    "flow_step",
    "run_flow",
    "poisson_potential",
    "gradient_energy_density",
    "h_monitor",
    "curvature_gradient_norm",
    "stable_step_bound",
    "fit_exponential",
    "fit_decay_rate",
    "TRACE_COLUMNS",
]

StepRule = Literal["explicit-euler", "rk4", "adaptive"]
TRACE_COLUMNS = ("t", "max_dev", "min_dev", "sup_dev", "h_max", "grad_norm", "area")
_QUANTITY_COLUMN = {"supdev": "sup_dev", "hmax": "h_max", "gradnorm": "grad_norm"}


class DegenerateStateError(RuntimeError):
    """Step size underflowed while trying to keep every triangle valid."""

    def __init__(self, message: str, time: float = float("nan"), fiber: int | None = None):
        self.time = time
        self.fiber = fiber
        super().__init__(message)


class PoissonSolveError(RuntimeError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class InsufficientSamplesError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TargetCurvature:
    """Uniform per-vertex target ``k*_i = 2 pi chi / V`` and the smooth constant.

    ``k_smooth`` solves ``k * area = 2 pi chi`` for the reference metric.
    """

    k_star: np.ndarray
    k_smooth: float

    @classmethod
    def uniform(cls, surface: TriSurface) -> "TargetCurvature":
        chi = surface.euler_characteristic
        k_star = np.full(surface.n_vertices, 2.0 * math.pi * chi / surface.n_vertices)
        k_star.setflags(write=False)
        area = float(face_areas(surface.state()).sum())
        return cls(k_star, 2.0 * math.pi * chi / area)


@dataclass(frozen=True)
class FlowConfig:
    dt_init: float = 0.05
    dt_max: float = 0.25
    tol: float = 1e-8
    t_max: float = 200.0
    step_rule: StepRule = "adaptive"
    monitor_every: int = 1
    # fraction of the explicit heat-step limit used by the adaptive rule
    stability_factor: float = 0.9
    dt_floor: float = 1e-10

    def __post_init__(self):
        if not self.dt_init > 0:
            raise ValueError("dt_init must be > 0")
        if self.dt_init > self.dt_max:
            raise ValueError("dt_init must not exceed dt_max")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")
        if self.step_rule not in ("explicit-euler", "rk4", "adaptive"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")
        if int(self.monitor_every) != self.monitor_every or self.monitor_every < 1:
            raise ValueError("monitor_every must be an integer >= 1")
        if not 0 < self.stability_factor <= 1:
            raise ValueError("stability_factor must lie in (0, 1]")


class FlowSample(NamedTuple):
    t: float
    max_dev: float
    min_dev: float
    sup_dev: float
    h_max: float
    grad_norm: float
    area: float


class DecayFit(NamedTuple):
    rate: float
    r2: float
    c0: float
    degenerate: bool = False


@dataclass
class FlowTrace:
    samples: list[FlowSample] = field(default_factory=list)
    terminated: Literal["converged", "time-cap", "degenerate", "running"] = "running"
    fitted_rate: float = float("nan")
    fit: DecayFit | None = None
    steps: int = 0
    halvings: int = 0

    def column(self, name: str) -> np.ndarray:
        idx = TRACE_COLUMNS.index(name)
        return np.array([s[idx] for s in self.samples], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def __len__(self) -> int:
        return len(self.samples)

    def to_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(TRACE_COLUMNS)
        for s in self.samples:
            w.writerow([f"{float(x):.17g}" for x in s])

    @classmethod
    def from_csv(cls, fh: TextIO) -> "FlowTrace":
        rows = list(csv.reader(fh))
        if not rows or tuple(rows[0]) != TRACE_COLUMNS:
            raise ValueError("unexpected trace header")
        return cls([FlowSample(*map(float, r)) for r in rows[1:] if r])


# --------------------------------------------------------------------------- steps

def _rhs(state: ConformalState, target: TargetCurvature) -> np.ndarray:
    return target.k_star - vertex_curvature(state)


def _raw_step(state: ConformalState, target: TargetCurvature, dt: float,
              rule: StepRule) -> ConformalState:
    u = state.u
    if rule == "rk4":
        k1 = _rhs(state, target)
        k2 = _rhs(state.with_u(u + 0.5 * dt * k1), target)
        k3 = _rhs(state.with_u(u + 0.5 * dt * k2), target)
        k4 = _rhs(state.with_u(u + dt * k3), target)
        du = (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    else:
        du = _rhs(state, target)
    new = state.with_u(u + dt * du, state.time + dt)
    if not new.is_valid:
        raise InvalidStateError("stepped state violates the triangle inequality",
                                new.invalid_faces())
    return new


def flow_step(state: ConformalState, target: TargetCurvature, dt: float,
              rule: StepRule = "explicit-euler", *, dt_floor: float = 1e-10) -> ConformalState:
    """Advance by one step of ``rule``; halve ``dt`` while the result is invalid.

    The returned state's ``time`` reflects the step actually taken.
    """
    return _step_with_retry(state, target, dt, rule, dt_floor)[0]


def _step_with_retry(state, target, dt, rule, dt_floor):
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not state.is_valid:
        raise InvalidStateError("initial state violates the triangle inequality",
                                state.invalid_faces())
    h = dt
    while h >= dt_floor:
        try:
            return _raw_step(state, target, h, rule), h
        except InvalidStateError:
            h *= 0.5
    raise DegenerateStateError(
        f"step size fell below {dt_floor:g} at t={state.time:.6g}; "
        "mesh too coarse or dt_init too large", state.time)


def stable_step_bound(state: ConformalState, factor: float = 1.0) -> float:
    """Largest explicit step keeping the linearized curvature update monotone.

    Since ``dK/du = -2 L``, the curvature obeys ``dK/dt = 2 L (K - k*)``
    to first order; an explicit step preserves the discrete maximum
    principle when ``dt * 2 * sum_j w_ij <= 1`` at every vertex.
    """
    w = np.maximum(cotan_weights(state), 0.0)
    surf = state.surface
    n = surf.n_vertices
    row = np.bincount(surf.edges[:, 0], w, n) + np.bincount(surf.edges[:, 1], w, n)
    peak = float(row.max())
    return math.inf if peak == 0 else factor / (2.0 * peak)


# ------------------------------------------------------------------------ monitors

def poisson_potential(state: ConformalState, target: TargetCurvature, *,
                      rtol: float = 1e-10, atol: float = 1e-12,
                      maxiter: int | None = None) -> np.ndarray:
    """Solve ``L Phi = k* - K`` with ``sum_i Phi_i A_i = 0``.

    Projected conjugate gradients on ``-L``: every iterate is kept
    orthogonal to the constants, which span the kernel.
    """
    r = target.k_star - vertex_curvature(state)
    L = cotan_laplacian(state)
    areas = vertex_areas(state)
    rmax = float(np.abs(r).max())
    goal = rtol * rmax + atol
    n = len(r)
    if rmax == 0.0:
        return np.zeros(n)
    A = -L
    b = -(r - r.mean())
    x = np.zeros(n)
    res = b.copy()
    p = res.copy()
    rr = res @ res
    maxiter = 20 * n if maxiter is None else maxiter
    for _ in range(maxiter):
        if np.abs(res).max() <= 0.1 * goal:
            break
        Ap = A @ p
        alpha = rr / (p @ Ap)
        x += alpha * p
        x -= x.mean()
        res -= alpha * Ap
        res -= res.mean()
        rr_new = res @ res
        p = res + (rr_new / rr) * p
        p -= p.mean()
        rr = rr_new
    phi = x - (x @ areas) / areas.sum()
    true_res = float(np.abs(L @ phi - r).max())
    if true_res > goal:
        raise PoissonSolveError("Poisson solve did not converge", true_res)
    return phi


def gradient_energy_density(state: ConformalState, phi: np.ndarray) -> np.ndarray:
    """Per-vertex ``sum_j w_ij (phi_i - phi_j)^2 / (2 A_i)``."""
    w = cotan_weights(state)
    areas = vertex_areas(state)
    surf = state.surface
    i, j = surf.edges[:, 0], surf.edges[:, 1]
    e = w * (phi[i] - phi[j]) ** 2
    n = surf.n_vertices
    return (np.bincount(i, e, n) + np.bincount(j, e, n)) / (2.0 * areas)


def h_monitor(state: ConformalState, target: TargetCurvature) -> tuple[np.ndarray, float]:
    phi = poisson_potential(state, target)
    H = (vertex_curvature(state) - target.k_star) + 2.0 * gradient_energy_density(state, phi)
    return H, float(H.max())


def curvature_gradient_norm(state: ConformalState, target: TargetCurvature) -> float:
    """``max over edges |K_i - K_j|^2 / l_ij^2``; the target cancels in the differences."""
    dev = vertex_curvature(state) - target.k_star
    e = state.surface.edges
    return float(np.max((dev[e[:, 0]] - dev[e[:, 1]]) ** 2 / state.edge_lengths() ** 2))


def _sample(state: ConformalState, target: TargetCurvature) -> FlowSample:
    dev = vertex_curvature(state) - target.k_star
    _, hmax = h_monitor(state, target)
    mx, mn = float(dev.max()), float(dev.min())
    return FlowSample(
        t=float(state.time),
        max_dev=mx,
        min_dev=mn,
        sup_dev=max(abs(mx), abs(mn)),
        h_max=hmax,
        grad_norm=curvature_gradient_norm(state, target),
        area=float(face_areas(state).sum()),
    )


# ---------------------------------------------------------------------- driver

def run_flow(state0: ConformalState, target: TargetCurvature,
             cfg: FlowConfig | None = None) -> tuple[ConformalState, FlowTrace]:
    """Flow until ``sup|K - k*| < tol`` or ``t >= t_max``.

    The adaptive rule takes explicit Euler steps of size
    ``min(dt, dt_max, stable_step_bound)``, halves ``dt`` whenever a step
    has to be retried, and grows it by 1.2 after 10 clean steps.
    """
    cfg = cfg or FlowConfig()
    if not state0.is_valid:
        raise InvalidStateError("initial state violates the triangle inequality",
                                state0.invalid_faces())
    trace = FlowTrace()
    state = state0
    trace.samples.append(_sample(state, target))
    sup = trace.samples[-1].sup_dev
    rule: StepRule = "explicit-euler" if cfg.step_rule == "adaptive" else cfg.step_rule
    adaptive = cfg.step_rule == "adaptive"
    dt = cfg.dt_init
    clean = 0
    while sup >= cfg.tol:
        remaining = cfg.t_max - state.time
        if remaining <= 1e-12 * max(1.0, cfg.t_max):
            trace.terminated = "time-cap"
            break
        h = min(dt, remaining)
        if adaptive:
            h = min(h, cfg.dt_max, stable_step_bound(state, cfg.stability_factor))
        try:
            new, taken = _step_with_retry(state, target, h, rule, cfg.dt_floor)
        except DegenerateStateError:
            trace.terminated = "degenerate"
            raise
        if taken < h:
            trace.halvings += 1
            clean = 0
            if adaptive:
                dt = taken
        elif adaptive:
            clean += 1
            if clean >= 10:
                dt = min(dt * 1.2, cfg.dt_max)
                clean = 0
        if taken >= remaining:
            new = new.with_u(new.u, cfg.t_max)
        state = new
        trace.steps += 1
        sup = float(np.abs(vertex_curvature(state) - target.k_star).max())
        if sup < cfg.tol or trace.steps % cfg.monitor_every == 0 \
                or state.time >= cfg.t_max:
            trace.samples.append(_sample(state, target))
    else:
        trace.terminated = "converged"
    if trace.terminated == "running":
        trace.terminated = "converged"
    try:
        trace.fit = fit_decay_rate(trace, "supdev")
        trace.fitted_rate = trace.fit.rate
    except InsufficientSamplesError:
        pass
    return state, trace


# ------------------------------------------------------------------------- fits

def fit_exponential(t: Iterable[float], q: Iterable[float]) -> DecayFit:
    """Least squares ``log q = log c0 + rate * t``."""
    t = np.asarray(list(t), dtype=float)
    q = np.asarray(list(q), dtype=float)
    if len(t) < 2:
        raise InsufficientSamplesError("need at least two samples")
    if np.any(q <= 0):
        raise InsufficientSamplesError("nonpositive samples in fit window")
    y = np.log(q)
    tm, ym = t.mean(), y.mean()
    stt = float(((t - tm) ** 2).sum())
    if stt == 0:
        raise InsufficientSamplesError("all samples at the same time")
    rate = float(((t - tm) * (y - ym)).sum() / stt)
    icpt = ym - rate * tm
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - (icpt + rate * t)) ** 2).sum())
    scale = max(1.0, float(np.abs(y).max()))
    if ss_tot <= (1e-13 * scale) ** 2 * len(y):
        return DecayFit(0.0, float("nan"), float(math.exp(ym)), True)
    return DecayFit(rate, 1.0 - ss_res / ss_tot, float(math.exp(icpt)), False)


def default_window(trace: FlowTrace) -> tuple[float, float]:
    t = trace.times
    return float(t[-1] / 2.0), float(t[-1])


def fit_decay_rate(trace: FlowTrace, quantity: str = "supdev",
                   window: tuple[float, float] | None = None, *,
                   min_samples: int = 10) -> DecayFit:
    """Exponential fit of a trace column over ``window`` (default: second half)."""
    if quantity not in _QUANTITY_COLUMN:
        raise ValueError(f"quantity must be one of {sorted(_QUANTITY_COLUMN)}")
    if not trace.samples:
        raise InsufficientSamplesError("empty trace")
    lo, hi = default_window(trace) if window is None else window
    t = trace.times
    q = trace.column(_QUANTITY_COLUMN[quantity])
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < min_samples:
        raise InsufficientSamplesError(
            f"{int(mask.sum())} samples in window [{lo:g}, {hi:g}], need {min_samples}")
    if np.any(q[mask] <= 0):
        raise InsufficientSamplesError("nonpositive samples in fit window")
    return fit_exponential(t[mask], q[mask])
