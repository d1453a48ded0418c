"""Intrinsic triangulated surfaces and their discrete conformal geometry.

A :class:`TriSurface` stores combinatorics plus one reference length per
edge; no vertex coordinates are ever used.  A :class:`ConformalState`
rescales those lengths by ``exp(u_i + u_j)`` and everything downstream
(angles, curvature, cotan weights, dual areas) is computed from the
induced lengths alone.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse

__all__ = [
    "TriSurface",
    "ConformalState",
    "ValidationReport",
    "Violation",
    "MeshValidationError",
    "InvalidStateError",
    "validate",
    "corner_angles",
    "vertex_curvature",
    "cotan_weights",
    "cotan_laplacian",
    "vertex_areas",
    "total_area",
]


class MeshValidationError(ValueError):
    """Raised when a surface fails validation; carries the full report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(report.summary())


class InvalidStateError(ValueError):
    """Induced edge lengths violate the strict triangle inequality."""

    def __init__(self, message: str, faces: Sequence[int] = ()):
        self.faces = tuple(int(f) for f in faces)
        super().__init__(message)


@dataclass(frozen=True)
class Violation:
    invariant: str
    simplex: tuple[int, ...]
    detail: str = ""

    def __str__(self) -> str:
        s = f"{self.invariant} at {self.simplex}"
        return f"{s}: {self.detail}" if self.detail else s


@dataclass(frozen=True)
class ValidationReport:
    closed: bool
    orientable: bool
    triangle_inequality: bool
    connected: bool
    euler_characteristic: int
    genus: int | None
    declared_genus: int | None
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.passed:
            return f"valid surface: chi={self.euler_characteristic}, genus={self.genus}"
        lines = [f"{len(self.violations)} violation(s):"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


def _edge_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True, eq=False)
class TriSurface:
    """Closed oriented triangulated surface with reference edge lengths.

    Parameters
    ----------
    n_vertices : int
    triangles : (F, 3) int array
        Vertex triples; orientation is the cyclic order.
    edges : (E, 2) int array
        Sorted unique edges ``i < j`` in lexicographic order.
    reference_lengths : (E,) float array
        Positive length per edge, aligned with ``edges``.
    declared_genus : int, optional
        Genus the surface is supposed to have; checked by :func:`validate`.

    Use :meth:`from_triangles` rather than the raw constructor.
    """

    n_vertices: int
    triangles: np.ndarray
    edges: np.ndarray
    reference_lengths: np.ndarray
    declared_genus: int | None = None
    name: str = ""
    # (F, 3) edge index of the side opposite each corner
    opposite_edge: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self):
        tri = np.ascontiguousarray(self.triangles, dtype=np.int64)
        edges = np.ascontiguousarray(self.edges, dtype=np.int64)
        lengths = np.ascontiguousarray(self.reference_lengths, dtype=float)
        if tri.ndim != 2 or tri.shape[1] != 3:
            raise ValueError("triangles must have shape (F, 3)")
        if lengths.shape != (len(edges),):
            raise ValueError("one reference length per edge required")
        index = {(int(a), int(b)): k for k, (a, b) in enumerate(edges)}
        opp = np.full(tri.shape, -1, dtype=np.int64)
        for f, (a, b, c) in enumerate(tri.tolist()):
            for q, (x, y) in enumerate(((b, c), (c, a), (a, b))):
                opp[f, q] = index.get(_edge_key(x, y), -1)
        for name, arr in (("triangles", tri), ("edges", edges),
                          ("reference_lengths", lengths), ("opposite_edge", opp)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_triangles(
        cls,
        triangles: Sequence[Sequence[int]],
        lengths: Mapping[tuple[int, int], float] | float = 1.0,
        *,
        n_vertices: int | None = None,
        declared_genus: int | None = None,
        name: str = "",
    ) -> "TriSurface":
        """Build a surface, deriving the edge list from the triangles.

        ``lengths`` is either a constant or a mapping keyed by sorted
        vertex pairs.
        """
        tri = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        keys = sorted({_edge_key(int(x), int(y))
                       for a, b, c in tri.tolist() for x, y in ((a, b), (b, c), (c, a))})
        if isinstance(lengths, Mapping):
            missing = [k for k in keys if k not in lengths]
            if missing:
                raise ValueError(f"missing reference length for edge {missing[0]}")
            ref = np.array([lengths[k] for k in keys], dtype=float)
        else:
            ref = np.full(len(keys), float(lengths))
        nv = int(tri.max()) + 1 if n_vertices is None else int(n_vertices)
        return cls(nv, tri, np.array(keys, dtype=np.int64).reshape(-1, 2), ref,
                   declared_genus=declared_genus, name=name)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.triangles)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    def edge_index(self, i: int, j: int) -> int:
        hit = np.flatnonzero((self.edges[:, 0] == min(i, j)) & (self.edges[:, 1] == max(i, j)))
        if not len(hit):
            raise KeyError((i, j))
        return int(hit[0])

    def relabel(self, perm: Sequence[int]) -> "TriSurface":
        """Surface with vertex ``v`` renamed ``perm[v]``; lengths carried along."""
        perm = np.asarray(perm)
        lengths = {_edge_key(int(perm[a]), int(perm[b])): float(l)
                   for (a, b), l in zip(self.edges.tolist(), self.reference_lengths)}
        return TriSurface.from_triangles(perm[self.triangles], lengths,
                                         n_vertices=self.n_vertices,
                                         declared_genus=self.declared_genus,
                                         name=self.name)

    def with_lengths(self, lengths: np.ndarray) -> "TriSurface":
        """Same combinatorics, new reference lengths (aligned with ``edges``)."""
        return TriSurface(self.n_vertices, self.triangles, self.edges, np.asarray(lengths, float),
                          declared_genus=self.declared_genus, name=self.name)

    def same_combinatorics(self, other: "TriSurface") -> bool:
        return other is self or (self.n_vertices == other.n_vertices
                                 and np.array_equal(self.triangles, other.triangles))

    def state(self, u: np.ndarray | float | None = None, time: float = 0.0) -> "ConformalState":
        if u is None:
            u = 0.0
        u = np.broadcast_to(np.asarray(u, dtype=float), (self.n_vertices,)).copy()
        return ConformalState(self, u, time)


def _check_triangle_inequality(a, b, c) -> np.ndarray:
    """Boolean mask of triangles that satisfy the strict inequality."""
    return (a < b + c) & (b < c + a) & (c < a + b) & (a > 0) & (b > 0) & (c > 0)


def validate(surface: TriSurface) -> ValidationReport:
    """Check closedness, orientability, triangle inequalities and genus."""
    violations: list[Violation] = []
    tri = surface.triangles.tolist()

    directed = Counter()
    undirected: dict[tuple[int, int], list[int]] = {}
    for f, (a, b, c) in enumerate(tri):
        if len({a, b, c}) < 3:
            violations.append(Violation("degenerate-face", (a, b, c)))
        for x, y in ((a, b), (b, c), (c, a)):
            directed[(x, y)] += 1
            undirected.setdefault(_edge_key(x, y), []).append(f)

    closed = True
    for e, faces in sorted(undirected.items()):
        if len(faces) != 2:
            closed = False
            violations.append(Violation("closed", e, f"edge in {len(faces)} triangle(s)"))
    known = {tuple(e) for e in surface.edges.tolist()}
    for e in sorted(set(undirected) - known):
        violations.append(Violation("edge-list", e, "edge missing from edge list"))
    for e in sorted(known - set(undirected)):
        violations.append(Violation("edge-list", e, "edge not used by any triangle"))

    orientable = True
    for (x, y), count in sorted(directed.items()):
        if count > 1:
            orientable = False
            violations.append(Violation("orientable", (x, y), "directed edge used twice"))

    a, b, c = _side_lengths(surface.reference_lengths, surface)
    ok = _check_triangle_inequality(a, b, c)
    for f in np.flatnonzero(~ok):
        violations.append(Violation("triangle-inequality", tuple(tri[f]),
                                    f"sides {a[f]:.6g}, {b[f]:.6g}, {c[f]:.6g}"))

    connected = _is_connected(surface)
    if not connected:
        violations.append(Violation("connected", (), "surface has several components"))

    chi = surface.euler_characteristic
    genus = (2 - chi) // 2 if (chi % 2 == 0 and chi <= 2) else None
    if genus is None:
        violations.append(Violation("euler-characteristic", (), f"chi={chi} is not 2-2g"))
    declared = surface.declared_genus
    if declared is not None and genus != declared:
        violations.append(Violation("genus", (), f"declared {declared}, chi={chi} gives {genus}"))

    used = set(surface.triangles.ravel().tolist())
    for v in range(surface.n_vertices):
        if v not in used:
            violations.append(Violation("isolated-vertex", (v,)))

    return ValidationReport(
        closed=closed,
        orientable=orientable,
        triangle_inequality=bool(ok.all()),
        connected=connected,
        euler_characteristic=chi,
        genus=genus,
        declared_genus=declared,
        violations=tuple(violations),
    )


def _is_connected(surface: TriSurface) -> bool:
    if surface.n_vertices == 0:
        return False
    e = surface.edges
    adj = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])),
                            shape=(surface.n_vertices,) * 2)
    n, _ = sparse.csgraph.connected_components(adj, directed=False)
    return n == 1


def _side_lengths(edge_lengths: np.ndarray, surface: TriSurface):
    opp = surface.opposite_edge
    if (opp < 0).any():
        nan = np.full(len(opp), np.nan)
        sides = [np.where(opp[:, q] >= 0, edge_lengths[np.maximum(opp[:, q], 0)], nan)
                 for q in range(3)]
        return tuple(sides)
    return edge_lengths[opp[:, 0]], edge_lengths[opp[:, 1]], edge_lengths[opp[:, 2]]


@dataclass(frozen=True, eq=False)
class ConformalState:
    """Per-vertex conformal factors ``u`` over a fixed surface at flow time ``time``."""

    surface: TriSurface
    u: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.shape != (self.surface.n_vertices,):
            raise ValueError(f"u must have shape ({self.surface.n_vertices},), got {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("u must be finite")
        if self.time < 0:
            raise ValueError("time must be >= 0")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def edge_lengths(self) -> np.ndarray:
        e = self.surface.edges
        return self.surface.reference_lengths * np.exp(self.u[e[:, 0]] + self.u[e[:, 1]])

    def invalid_faces(self) -> np.ndarray:
        a, b, c = _side_lengths(self.edge_lengths(), self.surface)
        return np.flatnonzero(~_check_triangle_inequality(a, b, c))

    @property
    def is_valid(self) -> bool:
        return self.invalid_faces().size == 0

    def with_u(self, u: np.ndarray, time: float | None = None) -> "ConformalState":
        return ConformalState(self.surface, u, self.time if time is None else time)


def _sides(state: ConformalState):
    a, b, c = _side_lengths(state.edge_lengths(), state.surface)
    bad = np.flatnonzero(~_check_triangle_inequality(a, b, c))
    if bad.size:
        raise InvalidStateError(
            f"triangle inequality violated in {bad.size} face(s), first face {int(bad[0])}", bad)
    return a, b, c


def corner_angles(state: ConformalState) -> np.ndarray:
    """Interior angle at each corner, shape (F, 3), aligned with ``triangles``.

    Uses the half-angle tangent form of the law of cosines, which stays
    accurate for needle-shaped triangles.
    """
    a, b, c = _sides(state)
    sides = (a, b, c)
    s = (a + b + c) / 2
    out = np.empty((len(a), 3))
    for q in range(3):
        x = sides[q]
        y, z = sides[(q + 1) % 3], sides[(q + 2) % 3]
        num = (s - y) * (s - z)
        den = s * (s - x)
        out[:, q] = 2.0 * np.arctan(np.sqrt(num / den))
    return out


def vertex_curvature(state: ConformalState) -> np.ndarray:
    """Angle defect ``2*pi - sum of incident corner angles`` at every vertex."""
    ang = corner_angles(state)
    surf = state.surface
    return 2.0 * np.pi - np.bincount(surf.triangles.ravel(), ang.ravel(), surf.n_vertices)


def cotan_weights(state: ConformalState, angles: np.ndarray | None = None) -> np.ndarray:
    """Edge weights ``(cot alpha + cot beta) / 2`` aligned with ``surface.edges``."""
    if angles is None:
        angles = corner_angles(state)
    surf = state.surface
    return np.bincount(surf.opposite_edge.ravel(), 0.5 / np.tan(angles.ravel()),
                       surf.n_edges)


def cotan_laplacian(state: ConformalState, weights: np.ndarray | None = None) -> sparse.csr_matrix:
    """Sparse ``L`` with ``(L f)_i = sum_j w_ij (f_j - f_i)``.

    Symmetric, annihilates constants, negative semidefinite when all
    weights are positive.
    """
    if weights is None:
        weights = cotan_weights(state)
    surf = state.surface
    i, j = surf.edges[:, 0], surf.edges[:, 1]
    n = surf.n_vertices
    off = sparse.coo_matrix((np.concatenate([weights, weights]),
                             (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))
    diag = np.bincount(i, weights, n) + np.bincount(j, weights, n)
    return (off - sparse.diags(diag)).tocsr()


def face_areas(state: ConformalState) -> np.ndarray:
    a, b, c = _sides(state)
    # Kahan's stable Heron formula on sorted sides
    x, y, z = np.sort(np.stack([a, b, c]), axis=0)[::-1]
    return 0.25 * np.sqrt((x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z)))


def vertex_areas(state: ConformalState) -> np.ndarray:
    """Barycentric dual areas: a third of every incident triangle."""
    fa = face_areas(state)
    surf = state.surface
    return np.bincount(surf.triangles.ravel(), np.repeat(fa / 3.0, 3), surf.n_vertices)


def total_area(state: ConformalState) -> float:
    return float(face_areas(state).sum())
