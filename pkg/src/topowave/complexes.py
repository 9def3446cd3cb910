"""Filtered complexes over the pixel grid.

Two constructions, both filtered by the sublevel (lower-star) rule where a
cell enters at the maximum intensity of its pixels:

* a clique complex on the 8-connected pixel grid (vertices, neighbor edges,
  3-cliques as triangles), the grid analogue of a Vietoris-Rips complex;
* a cubical complex (vertices, 4-neighbor unit edges, unit squares).

Cells are kept in struct-of-arrays form so construction and persistence
stay vectorized; `FilteredComplex.simplices()` materializes per-cell
records for inspection and small-scale tests.
"""

from __future__ import annotations

import enum
import heapq
from typing import Iterator, NamedTuple

import numpy as np

from .imagecore import ImageGrid, PixelIndex


class ComplexKind(str, enum.Enum):
    VIETORIS_RIPS_GRID = "VietorisRipsGrid"
    CUBICAL = "Cubical"


class Simplex(NamedTuple):
    dim: int
    vertices: tuple  # sorted linear pixel indices; 4 corners for a square
    filtration: float
    critical_pixel: PixelIndex


class FilteredComplex:
    """Cells of dimension 0-2 with filtration values and critical pixels.

    Within each dimension, cells are sorted by (filtration, vertex tuple);
    this makes the global (filtration, dim, vertices) order deterministic.
    Every face of a stored cell is stored, and faces never have a larger
    filtration value than their cofaces.
    """

    def __init__(self, kind, height, width, vertex_ids, vertex_filtration,
                 edges, edge_filtration, edge_critical,
                 cells2, cell2_filtration, cell2_critical):
        self.kind = ComplexKind(kind)
        self.height = int(height)
        self.width = int(width)
        self.vertex_ids = vertex_ids            # (V,) linear pixel ids, ascending
        self.vertex_filtration = vertex_filtration
        self.edges = edges                      # (E, 2) ascending vertex pairs
        self.edge_filtration = edge_filtration
        self.edge_critical = edge_critical      # (E,) linear pixel realizing filt
        self.cells2 = cells2                    # (T, 3) triangles or (S, 4) squares
        self.cell2_filtration = cell2_filtration
        self.cell2_critical = cell2_critical
        for arr in (self.vertex_ids, self.vertex_filtration, self.edges,
                    self.edge_filtration, self.edge_critical, self.cells2,
                    self.cell2_filtration, self.cell2_critical):
            arr.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_ids)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_cells2(self) -> int:
        return len(self.cells2)

    @property
    def max_filtration(self) -> float:
        if len(self.vertex_filtration) == 0:
            return float("nan")
        return float(self.vertex_filtration.max())

    def pixel_index(self, linear: int) -> PixelIndex:
        return PixelIndex(int(linear) // self.width, int(linear) % self.width)

    def simplices(self) -> Iterator[Simplex]:
        """All cells in ascending (filtration, dim, vertices) order."""
        def stream(dim, verts, filts, crits, order):
            for i in order:
                v = tuple(int(x) for x in np.atleast_1d(verts[i]))
                yield Simplex(dim, v, float(filts[i]), self.pixel_index(crits[i]))

        # edges and dim-2 cells are stored filtration-sorted; vertices are
        # stored in pixel order and need sorting here
        v_order = np.lexsort((self.vertex_ids, self.vertex_filtration))
        streams = [
            stream(0, self.vertex_ids, self.vertex_filtration, self.vertex_ids, v_order),
            stream(1, self.edges, self.edge_filtration, self.edge_critical,
                   range(self.num_edges)),
            stream(2, self.cells2, self.cell2_filtration, self.cell2_critical,
                   range(self.num_cells2)),
        ]
        key = lambda s: (s.filtration, s.dim, s.vertices)
        return heapq.merge(*streams, key=key)


def _sorted_by_filtration(verts, filts, crits):
    """Sort cell arrays by (filtration, lexicographic vertex tuple)."""
    if len(filts) == 0:
        return verts, filts, crits
    keys = tuple(verts[:, c] for c in range(verts.shape[1] - 1, -1, -1)) + (filts,)
    order = np.lexsort(keys)
    return verts[order], filts[order], crits[order]


def _edge_arrays(flat, pairs):
    u, v = pairs[:, 0], pairs[:, 1]
    fu, fv = flat[u], flat[v]
    filt = np.maximum(fu, fv)
    crit = np.where(fv > fu, v, u)  # ties go to the smaller linear index
    return _sorted_by_filtration(pairs, filt, crit)


def _cell2_arrays(flat, verts):
    vals = flat[verts]
    filt = vals.max(axis=1)
    # first vertex attaining the max; rows ascend, so that is the smallest index
    first = np.argmax(vals == filt[:, None], axis=1)
    crit = verts[np.arange(len(verts)), first]
    return _sorted_by_filtration(verts, filt, crit)


def _stack_pairs(blocks):
    blocks = [b for b in blocks if b.size]
    if not blocks:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(blocks, axis=0)


def build_vr_grid(img: ImageGrid) -> FilteredComplex:
    """Clique complex of the 8-connected pixel grid under sublevel filtration.

    Edges join every pair of 8-neighbors; triangles are the 3-cliques of
    that graph (four per 2x2 pixel block). Each cell enters at the maximum
    intensity over its pixels.
    """
    h, w = img.height, img.width
    flat = img.data
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)

    def pair_block(u, v):
        return np.stack([u.reshape(-1), v.reshape(-1)], axis=1)

    pairs = _stack_pairs([
        pair_block(idx[:, :-1], idx[:, 1:]),      # right
        pair_block(idx[:-1, :], idx[1:, :]),      # down
        pair_block(idx[:-1, :-1], idx[1:, 1:]),   # down-right
        pair_block(idx[:-1, 1:], idx[1:, :-1]),   # down-left
    ])
    edges, edge_filt, edge_crit = _edge_arrays(flat, pairs)

    tl = idx[:-1, :-1].reshape(-1)
    tr = idx[:-1, 1:].reshape(-1)
    bl = idx[1:, :-1].reshape(-1)
    br = idx[1:, 1:].reshape(-1)
    # the four corners of a 2x2 block are pairwise 8-adjacent: 4 triangles each
    tris = np.concatenate([
        np.stack([tl, tr, bl], axis=1),
        np.stack([tl, tr, br], axis=1),
        np.stack([tl, bl, br], axis=1),
        np.stack([tr, bl, br], axis=1),
    ]) if tl.size else np.empty((0, 3), dtype=np.int64)
    cells2, cell2_filt, cell2_crit = _cell2_arrays(flat, tris)

    return FilteredComplex(
        ComplexKind.VIETORIS_RIPS_GRID, h, w,
        np.arange(h * w, dtype=np.int64), flat.copy(),
        edges, edge_filt, edge_crit, cells2, cell2_filt, cell2_crit,
    )


def build_cubical(img: ImageGrid) -> FilteredComplex:
    """Cubical complex (V-construction): pixels, 4-neighbor edges, unit squares."""
    h, w = img.height, img.width
    flat = img.data
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)

    def pair_block(u, v):
        return np.stack([u.reshape(-1), v.reshape(-1)], axis=1)

    pairs = _stack_pairs([
        pair_block(idx[:, :-1], idx[:, 1:]),
        pair_block(idx[:-1, :], idx[1:, :]),
    ])
    edges, edge_filt, edge_crit = _edge_arrays(flat, pairs)

    tl = idx[:-1, :-1].reshape(-1)
    squares = np.stack(
        [tl, idx[:-1, 1:].reshape(-1), idx[1:, :-1].reshape(-1), idx[1:, 1:].reshape(-1)],
        axis=1,
    ) if tl.size else np.empty((0, 4), dtype=np.int64)
    cells2, cell2_filt, cell2_crit = _cell2_arrays(flat, squares)

    return FilteredComplex(
        ComplexKind.CUBICAL, h, w,
        np.arange(h * w, dtype=np.int64), flat.copy(),
        edges, edge_filt, edge_crit, cells2, cell2_filt, cell2_crit,
    )


def sublevel_subcomplex(cx: FilteredComplex, epsilon: float) -> FilteredComplex:
    """Cells with filtration <= epsilon; face-closed because faces never
    have a larger filtration value than their cofaces."""
    vmask = cx.vertex_filtration <= epsilon
    emask = cx.edge_filtration <= epsilon
    cmask = cx.cell2_filtration <= epsilon
    return FilteredComplex(
        cx.kind, cx.height, cx.width,
        cx.vertex_ids[vmask].copy(), cx.vertex_filtration[vmask].copy(),
        cx.edges[emask].copy(), cx.edge_filtration[emask].copy(),
        cx.edge_critical[emask].copy(),
        cx.cells2[cmask].copy(), cx.cell2_filtration[cmask].copy(),
        cx.cell2_critical[cmask].copy(),
    )


def build_complex(img: ImageGrid, kind: ComplexKind) -> FilteredComplex:
    if ComplexKind(kind) is ComplexKind.VIETORIS_RIPS_GRID:
        return build_vr_grid(img)
    return build_cubical(img)
