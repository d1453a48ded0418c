"""Fibered normalized Ricci flow over a sampled base.

Every base point carries its own conformal factor over one shared
surface.  Fibers are flowed independently; uniformity of convergence is
measured by fitting a single exponential to the envelope of all
deviation curves, and smoothness of the limit family by comparing
Laplace spectra of neighbouring fibers.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal, NamedTuple, Sequence

import numpy as np
from scipy import linalg

from .flow import (
    DecayFit,
    DegenerateStateError,
    FlowConfig,
    FlowTrace,
    InsufficientSamplesError,
    TargetCurvature,
    fit_exponential,
    run_flow,
)
from .mesh import ConformalState, TriSurface, cotan_laplacian, vertex_areas

__all__ = [
    "BaseSample",
    "FiberFamily",
    "Fingerprint",
    "EnvelopeFit",
    "FamilyError",
    "make_family",
    "run_family",
    "uniform_envelope",
    "fingerprint",
    "loop_continuity",
    "write_family",
    "thread_count",
]

BaseKind = Literal["loop", "disk-grid", "sphere-mesh"]


class FamilyError(RuntimeError):
    def __init__(self, message: str, fiber: int | None = None):
        self.fiber = fiber
        super().__init__(message)


@dataclass(frozen=True)
class BaseSample:
    """Finite sample of the base with parameter-space coordinates.

    For loops the last point repeats the first (angle 0), so the sample
    closes up; the adjacency is then a single cycle.
    """

    kind: BaseKind
    coords: np.ndarray
    adjacency: tuple[tuple[int, int], ...]

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "adjacency", tuple((int(a), int(b)) for a, b in self.adjacency))
        if not _graph_connected(len(coords), self.adjacency):
            raise ValueError("base adjacency graph must be connected")
        if self.kind == "loop" and len(self.adjacency) != len(coords):
            raise ValueError("a loop base must be a single cycle")

    @property
    def n_points(self) -> int:
        return len(self.coords)

    @classmethod
    def loop(cls, n: int) -> "BaseSample":
        if n < 3:
            raise ValueError("a loop needs at least 3 points")
        theta = 2 * np.pi * (np.arange(n) % (n - 1)) / (n - 1)
        adj = [(p, p + 1) for p in range(n - 1)] + [(n - 1, 0)]
        return cls("loop", theta[:, None], tuple(adj))

    @classmethod
    def disk_grid(cls, n: int) -> "BaseSample":
        x = np.linspace(-1.0, 1.0, n)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        coords = np.stack([xx.ravel(), yy.ravel()], axis=1)
        adj = []
        for i in range(n):
            for j in range(n):
                p = i * n + j
                if i + 1 < n:
                    adj.append((p, p + n))
                if j + 1 < n:
                    adj.append((p, p + 1))
        return cls("disk-grid", coords, tuple(adj))

    @classmethod
    def sphere_mesh(cls) -> "BaseSample":
        phi = (1 + 5 ** 0.5) / 2
        pts = []
        for s1 in (-1, 1):
            for s2 in (-1, 1):
                pts += [(0, s1, s2 * phi), (s1, s2 * phi, 0), (s2 * phi, 0, s1)]
        coords = np.array(pts, dtype=float)
        coords /= np.linalg.norm(coords, axis=1, keepdims=True)
        d = np.linalg.norm(coords[:, None] - coords[None], axis=2)
        edge = d[d > 1e-9].min()
        adj = [(i, j) for i in range(12) for j in range(i + 1, 12) if abs(d[i, j] - edge) < 1e-9]
        return cls("sphere-mesh", coords, tuple(adj))

    def distance(self, p: int, q: int) -> float:
        if self.kind == "loop":
            d = abs(self.coords[p, 0] - self.coords[q, 0]) % (2 * np.pi)
            return float(min(d, 2 * np.pi - d))
        return float(np.linalg.norm(self.coords[p] - self.coords[q]))

    def _features(self) -> np.ndarray:
        c = self.coords
        if self.kind == "loop":
            t = c[:, 0]
            return np.stack([np.ones_like(t), np.cos(t), np.sin(t), np.cos(2 * t), np.sin(2 * t)], 1)
        if self.kind == "disk-grid":
            x, y = c[:, 0], c[:, 1]
            return np.stack([np.ones_like(x), x, y, x * y, x * x, y * y], 1)
        x, y, z = c[:, 0], c[:, 1], c[:, 2]
        return np.stack([np.ones_like(x), x, y, z, x * y, y * z, z * x, x * x - y * y], 1)


def _graph_connected(n: int, adjacency) -> bool:
    seen, stack = {0}, [0]
    nbrs: dict[int, list[int]] = {}
    for a, b in adjacency:
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    while stack:
        for q in nbrs.get(stack.pop(), []):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return len(seen) == n


@dataclass(frozen=True, eq=False)
class FiberFamily:
    base: BaseSample
    states: tuple[ConformalState, ...]
    traces: tuple[FlowTrace, ...] = ()
    initial: tuple[ConformalState, ...] = ()
    seed: int | None = None
    amplitude: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) != self.base.n_points:
            raise ValueError("one state per base point required")
        surf = self.states[0].surface
        if any(not surf.same_combinatorics(s.surface) for s in self.states):
            raise ValueError("all fibers must share the same triangulation")
        if not self.initial:
            object.__setattr__(self, "initial", self.states)

    @property
    def surface(self) -> TriSurface:
        return self.states[0].surface

    @property
    def converged(self) -> bool:
        return bool(self.traces) and all(t.terminated == "converged" for t in self.traces)

    def with_state(self, index: int, state: ConformalState) -> "FiberFamily":
        states = list(self.states)
        states[index] = state
        return replace(self, states=tuple(states), initial=tuple(states), traces=())


class Fingerprint(NamedTuple):
    spectrum: np.ndarray


class EnvelopeFit(NamedTuple):
    C0: float
    rate: float
    r2: float
    window: tuple[float, float]
    bound_ok: bool
    worst_ratio: float


def _low_modes(surface: TriSurface, count: int) -> np.ndarray:
    """Lowest nonconstant Laplace modes of the reference metric, sup-normalized."""
    ref = surface.state()
    L = -cotan_laplacian(ref).toarray()
    A = vertex_areas(ref)
    k = min(count + 1, surface.n_vertices)
    _, vecs = linalg.eigh(L, np.diag(A), subset_by_index=[0, k - 1])
    modes = vecs[:, 1:]
    return modes / np.abs(modes).max(axis=0, keepdims=True)


def make_family(surface: TriSurface, base: BaseSample, amplitude: float, seed: int,
                *, class_amplitude: float = 0.0, n_modes: int = 6) -> FiberFamily:
    """Initial conformal factors ``u0(p) = amplitude * F(p)``.

    ``F`` combines low Laplace modes of the surface with low-order
    functions on the base, then is rescaled so that ``|F|_inf <= 1`` and
    ``|F(p) - F(q)|_inf <= d(p, q)`` for every pair of base points.

    With the default ``class_amplitude = 0`` every fiber shares ``surface``
    and hence one discrete conformal class, so all limits coincide.  A
    positive ``class_amplitude`` also bends the reference lengths by
    ``exp(class_amplitude * G_ij(p))`` with ``G`` a symmetric product of
    mode pairs (not of the form ``f_i + f_j``), which moves each fiber to
    its own conformal class.
    """
    if amplitude < 0 or class_amplitude < 0:
        raise ValueError("amplitudes must be >= 0")
    if isinstance(seed, bool) or int(seed) != seed:
        raise TypeError("seed must be an integer")
    rng = np.random.default_rng(int(seed))
    modes = _low_modes(surface, n_modes)
    feats = base._features()
    u_field = _lipschitz_normalize(base, feats @ rng.standard_normal((feats.shape[1], modes.shape[1]))
                                   @ modes.T)
    surfaces = [surface] * base.n_points
    if class_amplitude > 0:
        i, j = surface.edges[:, 0], surface.edges[:, 1]
        pairs = [(a, b) for a in range(modes.shape[1]) for b in range(a + 1, modes.shape[1])]
        edge_modes = np.stack([modes[i, a] * modes[j, b] + modes[j, a] * modes[i, b]
                               for a, b in pairs], axis=1) / 2.0
        g_field = _lipschitz_normalize(
            base, feats @ rng.standard_normal((feats.shape[1], len(pairs))) @ edge_modes.T)
        surfaces = [surface.with_lengths(surface.reference_lengths * np.exp(class_amplitude * g))
                    for g in g_field]
    states = tuple(surfaces[p].state(amplitude * u_field[p]) for p in range(base.n_points))
    return FiberFamily(base, states, seed=int(seed), amplitude=float(amplitude))


def _lipschitz_normalize(base: BaseSample, values: np.ndarray) -> np.ndarray:
    scale = float(np.abs(values).max())
    n = base.n_points
    for p in range(n):
        for q in range(p + 1, n):
            d = base.distance(p, q)
            if d > 0:
                scale = max(scale, float(np.abs(values[p] - values[q]).max()) / d)
    return values / scale if scale > 0 else values


def thread_count() -> int:
    """Worker count from ``LEFSCHETZ_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("LEFSCHETZ_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"LEFSCHETZ_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("LEFSCHETZ_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def run_family(family: FiberFamily, cfg: FlowConfig | None = None, *,
               n_jobs: int | None = None) -> FiberFamily:
    """Flow every fiber to convergence; results are merged by base index."""
    cfg = cfg or FlowConfig()
    targets = {}
    for st in family.initial:
        if id(st.surface) not in targets:
            targets[id(st.surface)] = TargetCurvature.uniform(st.surface)
    workers = thread_count() if n_jobs is None else max(1, n_jobs)

    def one(idx: int):
        try:
            st = family.initial[idx]
            return run_flow(st, targets[id(st.surface)], cfg)
        except DegenerateStateError as exc:
            raise FamilyError(f"fiber {idx} degenerated: {exc}", idx) from exc

    indices = range(family.base.n_points)
    if workers == 1:
        results = [one(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, indices))
    for idx, (_, trace) in enumerate(results):
        if trace.terminated != "converged":
            raise FamilyError(f"fiber {idx} did not converge ({trace.terminated})", idx)
    return replace(family, states=tuple(s for s, _ in results),
                   traces=tuple(t for _, t in results))


def uniform_envelope(family: FiberFamily, *, grid_points: int = 400,
                     window: tuple[float, float] | None = None,
                     slack: float = 1.05) -> EnvelopeFit:
    """Fit one exponential ``C0 * exp(rate * t)`` to the sup over fibers of ``sup|K - k*|``.

    Traces are resampled on a common grid by linear interpolation of the
    log-deviation, up to the earliest convergence time.  Fibers converged
    at t = 0 carry no decay information and are skipped.
    """
    if not family.converged:
        raise FamilyError("family has not been run to convergence")
    traces = [t for t in family.traces if len(t) > 1]
    if not traces:
        raise InsufficientSamplesError("every fiber was uniform at t = 0")
    T = min(t.times[-1] for t in traces)
    grid = np.linspace(0.0, T, grid_points)
    logs = np.array([np.interp(grid, t.times, np.log(t.column("sup_dev"))) for t in traces])
    env = np.exp(logs.max(axis=0))
    lo, hi = (T / 2.0, T) if window is None else window
    mask = (grid >= lo) & (grid <= hi)
    if mask.sum() < 10:
        raise InsufficientSamplesError("too few grid points in the envelope window")
    fit: DecayFit = fit_exponential(grid[mask], env[mask])
    worst = 0.0
    for t in traces:
        tt, q = t.times, t.column("sup_dev")
        m = (tt >= lo) & (tt <= hi)
        if m.any():
            worst = max(worst, float(np.max(q[m] / (fit.c0 * np.exp(fit.rate * tt[m])))))
    return EnvelopeFit(fit.c0, fit.rate, fit.r2, (float(lo), float(hi)),
                       worst <= slack, worst)


def fingerprint(state: ConformalState, m: int = 12) -> Fingerprint:
    """Smallest ``m`` eigenvalues of ``-L phi = lam A phi``, times the total area."""
    n = state.surface.n_vertices
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}]")
    L = -cotan_laplacian(state).toarray()
    A = vertex_areas(state)
    try:
        vals = linalg.eigh(L, np.diag(A), eigvals_only=True, subset_by_index=[0, m - 1])
    except linalg.LinAlgError as exc:
        raise FamilyError(f"eigensolver failed: {exc}") from exc
    return Fingerprint(np.sort(vals) * A.sum())


def loop_continuity(family: FiberFamily, m: int = 12, *, tol: float = 1e-8) -> tuple[float, bool]:
    """Largest spectral gap between adjacent fibers, and whether the loop closes."""
    if family.base.kind != "loop":
        raise ValueError("loop_continuity needs a loop base")
    if not family.converged:
        raise FamilyError("family has not been run to convergence")
    prints = [fingerprint(s, m).spectrum for s in family.states]
    gaps = [float(np.abs(prints[p] - prints[q]).max()) for p, q in family.base.adjacency]
    closing = float(np.abs(prints[0] - prints[-1]).max())
    return max(gaps), closing <= tol


def write_family(family: FiberFamily, out: str | Path, *, m: int = 12,
                 envelope: EnvelopeFit | None = None,
                 continuity: tuple[float, bool] | None = None) -> Path:
    """Write ``fiber_<idx>.csv`` per fiber plus ``family.json``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for idx, trace in enumerate(family.traces):
        with open(out / f"fiber_{idx}.csv", "w", newline="") as fh:
            trace.to_csv(fh)
    doc = {
        "base_kind": family.base.kind,
        "adjacency": [list(e) for e in family.base.adjacency],
        "seed": family.seed,
        "amplitude": family.amplitude,
        "envelope": None if envelope is None else {
            "C0": envelope.C0, "rate": envelope.rate, "r2": envelope.r2,
            "window": list(envelope.window), "bound_ok": envelope.bound_ok,
            "worst_ratio": envelope.worst_ratio,
        },
        "continuity": None if continuity is None else {
            "max_gap": continuity[0], "closed": continuity[1]},
        "fingerprints": [[float(x) for x in fingerprint(s, m).spectrum] for s in family.states],
    }
    (out / "family.json").write_text(json.dumps(_finite(doc), indent=2) + "\n")
    return out


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj
