"""Reference surfaces and the ``trisurf`` text format.

Reference meshes are built intrinsically with unit edge lengths:

* genus 0: subdivided icosahedron,
* genus 1: periodic triangulated grid,
* genus >= 2: a chain of periodic grids joined by connected sums along
  hexagonal holes (each join removes one vertex star from both sides and
  identifies the two boundary hexagons with opposite orientation).
"""

from __future__ import annotations

import io
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .mesh import TriSurface, _edge_key

__all__ = [
    "MeshFormatError",
    "regular_tetrahedron",
    "icosphere",
    "torus_grid",
    "connected_sum_chain",
    "reference_mesh",
    "build_reference_mesh",
    "mutation_fixtures",
    "read_trisurf",
    "write_trisurf",
    "load_trisurf",
    "save_trisurf",
]


class MeshFormatError(ValueError):
    """Malformed ``trisurf`` file; ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def regular_tetrahedron(edge: float = 1.0) -> TriSurface:
    tri = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    return TriSurface.from_triangles(tri, edge, declared_genus=0, name="tetrahedron")


def _icosahedron_faces() -> list[tuple[int, int, int]]:
    # north pole 0, upper ring 1..5, lower ring 6..10, south pole 11
    faces = []
    for k in range(5):
        u0, u1 = 1 + k, 1 + (k + 1) % 5
        l0, l1 = 6 + k, 6 + (k + 1) % 5
        faces.append((0, u0, u1))
        faces.append((u0, l0, u1))
        faces.append((u1, l0, l1))
        faces.append((11, l1, l0))
    return faces


def icosphere(subdivisions: int = 1) -> TriSurface:
    """Icosahedron with each face split 1-to-4 ``subdivisions`` times."""
    faces = _icosahedron_faces()
    nv = 12
    for _ in range(subdivisions):
        mid: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            nonlocal nv
            key = _edge_key(a, b)
            if key not in mid:
                mid[key] = nv
                nv += 1
            return mid[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        faces = new
    return TriSurface.from_triangles(faces, 1.0, declared_genus=0,
                                     name=f"icosphere{subdivisions}")


def _grid_faces(n: int, m: int) -> list[tuple[int, int, int]]:
    def v(i: int, j: int) -> int:
        return (i % n) * m + (j % m)

    faces = []
    for i in range(n):
        for j in range(m):
            faces.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            faces.append((v(i, j), v(i + 1, j + 1), v(i, j + 1)))
    return faces


def torus_grid(n: int, m: int | None = None) -> TriSurface:
    """Flat torus: ``n x m`` periodic grid, each square cut along a diagonal."""
    m = n if m is None else m
    if n < 3 or m < 3:
        raise ValueError("grid needs at least 3x3 vertices to be simplicial")
    return TriSurface.from_triangles(_grid_faces(n, m), 1.0, declared_genus=1,
                                     name=f"torus{n}x{m}")


def _link_cycle(faces: Iterable[tuple[int, int, int]], c: int) -> list[int]:
    nxt = {}
    for t in faces:
        if c in t:
            k = t.index(c)
            nxt[t[(k + 1) % 3]] = t[(k + 2) % 3]
    start = min(nxt)
    cyc = [start]
    while nxt[cyc[-1]] != start:
        cyc.append(nxt[cyc[-1]])
    return cyc


def connected_sum_chain(genus: int, n: int = 7) -> TriSurface:
    """Genus-``genus`` surface from a chain of ``n x n`` periodic grids.

    Consecutive tori are joined along hexagonal holes; middle tori carry
    two holes far apart.  ``V = genus*n*n - 8*(genus - 1)``
    for ``genus >= 2``.
    """
    if genus < 2:
        raise ValueError("use icosphere/torus_grid for genus < 2")
    if n < 6:
        raise ValueError("grid too small to keep the holes apart")
    base = _grid_faces(n, n)
    far = (n // 2) * n + n // 2
    faces: list[tuple[int, int, int]] = []
    pending: list[int] | None = None  # right-hand hexagon of the previous torus
    nv = 0
    for k in range(genus):
        left = 0 if k > 0 else None
        right = far if k < genus - 1 else None
        local = list(base)
        bounds = {}
        for h in (left, right):
            if h is not None:
                bounds[h] = _link_cycle(local, h)
                local = [t for t in local if h not in t]
        mapping: dict[int, int] = {}
        if left is not None:
            # opposite orientation: left[i] ~ pending[-i]
            for i, x in enumerate(bounds[left]):
                mapping[x] = pending[(-i) % len(pending)]
        for x in range(n * n):
            if x in (left, right) or x in mapping:
                continue
            mapping[x] = nv
            nv += 1
        faces += [tuple(mapping[x] for x in t) for t in local]
        pending = [mapping[x] for x in bounds[right]] if right is not None else None
    return TriSurface.from_triangles(faces, 1.0, n_vertices=nv, declared_genus=genus,
                                     name=f"genus{genus}_grid{n}")


def reference_mesh(genus: int) -> TriSurface:
    """The bundled reference mesh for ``genus`` in {0, 1, 2, 3}."""
    name = {0: "sphere", 1: "torus", 2: "genus2", 3: "genus3"}.get(genus)
    if name is None:
        raise ValueError(f"no reference mesh for genus {genus}")
    return load_trisurf(name)


def build_reference_mesh(genus: int) -> TriSurface:
    """Regenerate a reference mesh from its construction (used to write the data files)."""
    if genus == 0:
        return icosphere(2)
    if genus == 1:
        return torus_grid(8)
    return connected_sum_chain(genus, 7)


def mutation_fixtures(surface: TriSurface | None = None) -> dict[str, TriSurface]:
    """Broken copies of a valid surface, one per violated invariant."""
    if surface is None:
        surface = reference_mesh(2)
    tri = surface.triangles.copy()
    lengths = {tuple(e): float(l) for e, l in zip(surface.edges.tolist(), surface.reference_lengths)}

    flipped = tri.copy()
    flipped[0] = flipped[0][::-1]
    deleted = tri[1:]
    oversized = dict(lengths)
    oversized[tuple(surface.edges[0].tolist())] = 10.0
    g = surface.declared_genus
    return {
        "flipped-triangle": TriSurface.from_triangles(flipped, lengths, n_vertices=surface.n_vertices,
                                                      declared_genus=g),
        "deleted-face": TriSurface(surface.n_vertices, deleted, surface.edges,
                                   surface.reference_lengths, declared_genus=g),
        "oversized-edge": TriSurface.from_triangles(tri, oversized, n_vertices=surface.n_vertices,
                                                    declared_genus=g),
    }


def write_trisurf(surface: TriSurface, fh: TextIO) -> None:
    fh.write(f"trisurf {surface.n_vertices} {surface.n_faces}\n")
    for a, b, c in surface.triangles.tolist():
        fh.write(f"tri {a} {b} {c}\n")
    for (i, j), l in zip(surface.edges.tolist(), surface.reference_lengths):
        fh.write(f"len {i} {j} {float(l)!r}\n")


def read_trisurf(fh: TextIO, *, declared_genus: int | None = None, name: str = "") -> TriSurface:
    """Parse a ``trisurf`` stream.

    Rejects duplicate edges, edges not in lexicographic ``i < j`` form,
    and edges used by a triangle but missing a ``len`` line.
    """
    lines = [(k + 1, ln.split()) for k, ln in enumerate(fh)]
    lines = [(k, tok) for k, tok in lines if tok and not tok[0].startswith("#")]
    if not lines:
        raise MeshFormatError("empty file", 1)
    k, head = lines[0]
    if len(head) != 3 or head[0] != "trisurf":
        raise MeshFormatError('expected header "trisurf <V> <F>"', k)
    try:
        nv, nf = int(head[1]), int(head[2])
    except ValueError:
        raise MeshFormatError("header counts must be integers", k) from None
    tris: list[tuple[int, int, int]] = []
    lengths: dict[tuple[int, int], float] = {}
    for k, tok in lines[1:]:
        if tok[0] == "tri":
            if len(lengths):
                raise MeshFormatError("tri line after len lines", k)
            if len(tok) != 4:
                raise MeshFormatError("expected 'tri i j k'", k)
            try:
                t = tuple(int(x) for x in tok[1:])
            except ValueError:
                raise MeshFormatError("vertex indices must be integers", k) from None
            if any(not 0 <= x < nv for x in t):
                raise MeshFormatError(f"vertex index out of range 0..{nv - 1}", k)
            tris.append(t)  # type: ignore[arg-type]
        elif tok[0] == "len":
            if len(tok) != 4:
                raise MeshFormatError("expected 'len i j <float>'", k)
            try:
                i, j, l = int(tok[1]), int(tok[2]), float(tok[3])
            except ValueError:
                raise MeshFormatError("malformed len line", k) from None
            if not i < j:
                raise MeshFormatError("edge must be listed as 'len i j' with i < j", k)
            if (i, j) in lengths:
                raise MeshFormatError(f"duplicate edge ({i}, {j})", k)
            if not np.isfinite(l) or l <= 0:
                raise MeshFormatError("edge length must be positive", k)
            lengths[(i, j)] = l
        else:
            raise MeshFormatError(f"unknown record '{tok[0]}'", k)
    if len(tris) != nf:
        raise MeshFormatError(f"header declares {nf} triangles, found {len(tris)}")
    used = {_edge_key(x, y) for a, b, c in tris for x, y in ((a, b), (b, c), (c, a))}
    missing = sorted(used - set(lengths))
    if missing:
        raise MeshFormatError(f"missing len line for edge {missing[0]}")
    extra = sorted(set(lengths) - used)
    if extra:
        raise MeshFormatError(f"len line for edge {extra[0]} not used by any triangle")
    return TriSurface.from_triangles(tris, lengths, n_vertices=nv,
                                     declared_genus=declared_genus, name=name)


def load_trisurf(source: str | Path, *, declared_genus: int | None = None) -> TriSurface:
    """Load from a path, or a bundled mesh by name (``sphere``, ``torus``, ``genus2``, ``genus3``)."""
    path = Path(source)
    if not path.exists() and not path.suffix:
        data = resources.files("lefschetz") / "data" / f"{source}.trisurf"
        text = data.read_text()
        genus = {"sphere": 0, "torus": 1, "genus2": 2, "genus3": 3}.get(str(source))
        return read_trisurf(io.StringIO(text), declared_genus=genus, name=str(source))
    with open(path) as fh:
        return read_trisurf(fh, declared_genus=declared_genus, name=path.stem)


def save_trisurf(surface: TriSurface, path: str | Path) -> None:
    with open(path, "w") as fh:
        write_trisurf(surface, fh)
