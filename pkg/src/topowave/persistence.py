"""Persistence diagrams of filtered complexes.

H0 comes from a union-find sweep over the edges in filtration order with
the elder rule (on a merge the component with the larger birth dies; ties
broken so the component whose birth pixel has the smaller linear index
survives). H1 comes from Z/2 boundary-matrix reduction of the dim-2 cells
over edge rows, with sparse sorted-index columns. Reducing only the dim-2
columns and taking the 1-cycle creators from the union-find sweep is the
clearing ("twist") shortcut: columns of edges that are known pivots never
get reduced at all.

Every birth and death is attributed to the pixel that realizes it, which
is what makes the losses in :mod:`topowave.loss` differentiable almost
everywhere.

Classes that never die are kept with their death truncated to the global
maximum filtration value, so total persistence stays finite. Non-essential
zero-lifespan pairs are dropped eagerly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .complexes import FilteredComplex
from .imagecore import PixelIndex


class PersistencePair(NamedTuple):
    dim: int
    birth: float
    death: float
    birth_pixel: PixelIndex
    death_pixel: PixelIndex
    essential: bool


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs: tuple
    max_filtration: float

    def __len__(self):
        return len(self.pairs)


def fmt_real(x: float) -> str:
    """Decimal form with 17 significant digits (round-trips exactly)."""
    return format(float(x), ".17g")


def _sorted_pairs(pairs) -> tuple:
    return tuple(sorted(pairs, key=lambda p: (p.birth, p.death, p.birth_pixel,
                                              p.death_pixel, p.essential)))


def _elder_pass(cx: FilteredComplex):
    """Union-find sweep in filtration order.

    Returns (finite H0 pairs, essential H0 pairs, creator edge mask); the
    creator mask marks edges that close a cycle instead of merging two
    components, i.e. the candidate H1 births.
    """
    n = cx.num_vertices
    vertex_ids = cx.vertex_ids
    if n == 0:
        return [], [], np.zeros(0, dtype=bool)

    # positions of edge endpoints within the (ascending) vertex id list
    pos_u = np.searchsorted(vertex_ids, cx.edges[:, 0]).tolist()
    pos_v = np.searchsorted(vertex_ids, cx.edges[:, 1]).tolist()
    edge_filt = cx.edge_filtration.tolist()
    edge_crit = cx.edge_critical.tolist()

    parent = list(range(n))
    size = [1] * n
    birth_val = cx.vertex_filtration.tolist()
    birth_pix = vertex_ids.tolist()

    creator = np.zeros(cx.num_edges, dtype=bool)
    finite = []

    for i in range(cx.num_edges):
        u = pos_u[i]
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        v = pos_v[i]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u == v:
            creator[i] = True
            continue
        # elder rule: the component with the larger (birth, birth pixel) dies
        if (birth_val[u], birth_pix[u]) <= (birth_val[v], birth_pix[v]):
            survivor, dier = u, v
        else:
            survivor, dier = v, u
        f = edge_filt[i]
        if f != birth_val[dier]:
            finite.append(PersistencePair(
                0, birth_val[dier], f,
                cx.pixel_index(birth_pix[dier]), cx.pixel_index(edge_crit[i]),
                False,
            ))
        # union by size; the merged root carries the survivor's birth
        if size[u] < size[v]:
            u, v = v, u
        parent[v] = u
        size[u] += size[v]
        if dier == u:
            birth_val[u] = birth_val[survivor]
            birth_pix[u] = birth_pix[survivor]

    max_filt = cx.max_filtration
    top_pos = int(np.argmax(cx.vertex_filtration))
    top_pixel = cx.pixel_index(vertex_ids[top_pos])
    essential = []
    for r in range(n):
        if parent[r] == r:
            essential.append(PersistencePair(
                0, birth_val[r], max_filt,
                cx.pixel_index(birth_pix[r]), top_pixel, True,
            ))
    return finite, essential, creator


def persistence_h0(cx: FilteredComplex) -> PersistenceDiagram:
    """0-dimensional diagram: one pair per connected component ever born."""
    finite, essential, _ = _elder_pass(cx)
    return PersistenceDiagram(_sorted_pairs(finite + essential), cx.max_filtration)


def _cell2_edge_rows(cx: FilteredComplex) -> np.ndarray:
    """Row indices (into the sorted edge list) of each dim-2 cell's boundary."""
    n = cx.height * cx.width
    ekeys = cx.edges[:, 0] * n + cx.edges[:, 1]
    order = np.argsort(ekeys)
    sorted_keys = ekeys[order]

    c = cx.cells2
    if c.shape[1] == 3:  # triangle (a,b,c): edges ab, ac, bc
        keys = np.stack([c[:, 0] * n + c[:, 1],
                         c[:, 0] * n + c[:, 2],
                         c[:, 1] * n + c[:, 2]], axis=1)
    else:  # square (tl,tr,bl,br): edges tl-tr, tl-bl, tr-br, bl-br
        keys = np.stack([c[:, 0] * n + c[:, 1],
                         c[:, 0] * n + c[:, 2],
                         c[:, 1] * n + c[:, 3],
                         c[:, 2] * n + c[:, 3]], axis=1)
    rows = order[np.searchsorted(sorted_keys, keys)]
    rows.sort(axis=1)
    return rows


def _xor_sorted(a, b):
    """Symmetric difference of two ascending-sorted int lists."""
    out = []
    append = out.append
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        x, y = a[i], b[j]
        if x < y:
            append(x)
            i += 1
        elif x > y:
            append(y)
            j += 1
        else:
            i += 1
            j += 1
    out.extend(a[i:] if i < la else b[j:])
    return out


def persistence_h1(cx: FilteredComplex) -> PersistenceDiagram:
    """1-dimensional diagram via Z/2 reduction of the dim-2 boundary columns."""
    _, _, creator = _elder_pass(cx)
    edge_filt = cx.edge_filtration.tolist()
    edge_crit = cx.edge_critical.tolist()
    cell_filt = cx.cell2_filtration.tolist()
    cell_crit = cx.cell2_critical.tolist()

    pivot = {}
    finite = []
    if cx.num_cells2:
        for j, col in enumerate(_cell2_edge_rows(cx).tolist()):
            while col:
                other = pivot.get(col[-1])
                if other is None:
                    break
                col = _xor_sorted(col, other)
            if not col:
                continue
            low = col[-1]
            pivot[low] = col
            b, d = edge_filt[low], cell_filt[j]
            if d != b:
                finite.append(PersistencePair(
                    1, b, d,
                    cx.pixel_index(edge_crit[low]), cx.pixel_index(cell_crit[j]),
                    False,
                ))

    pairs = finite
    unpaired = np.setdiff1d(np.nonzero(creator)[0],
                            np.fromiter(pivot.keys(), dtype=np.int64, count=len(pivot)))
    if unpaired.size:
        max_filt = cx.max_filtration
        top_pos = int(np.argmax(cx.vertex_filtration))
        top_pixel = cx.pixel_index(cx.vertex_ids[top_pos])
        for row in unpaired.tolist():
            pairs.append(PersistencePair(
                1, edge_filt[row], max_filt,
                cx.pixel_index(edge_crit[row]), top_pixel, True,
            ))
    return PersistenceDiagram(_sorted_pairs(pairs), cx.max_filtration)


def diagram_to_json(pd: PersistenceDiagram) -> str:
    """Deterministic serialization; reals carry 17 significant digits."""
    records = sorted(pd.pairs, key=lambda p: (p.dim, p.birth, p.death,
                                              p.birth_pixel, p.death_pixel))
    parts = []
    for p in records:
        parts.append(
            '{"dim":%d,"birth":%s,"death":%s,"birth_pixel":[%d,%d],'
            '"death_pixel":[%d,%d],"essential":%s}' % (
                p.dim, fmt_real(p.birth), fmt_real(p.death),
                p.birth_pixel.row, p.birth_pixel.col,
                p.death_pixel.row, p.death_pixel.col,
                "true" if p.essential else "false",
            )
        )
    return "[" + ",".join(parts) + "]"


def diagram_from_json(text: str) -> PersistenceDiagram:
    records = json.loads(text)
    pairs = []
    for r in records:
        pairs.append(PersistencePair(
            int(r["dim"]), float(r["birth"]), float(r["death"]),
            PixelIndex(*r["birth_pixel"]), PixelIndex(*r["death_pixel"]),
            bool(r["essential"]),
        ))
    max_filt = max((p.death for p in pairs), default=0.0)
    return PersistenceDiagram(_sorted_pairs(pairs), max_filt)


def merge_diagrams(*diagrams: PersistenceDiagram) -> PersistenceDiagram:
    """Single diagram holding the pairs of all inputs (for mixed-dim export)."""
    pairs = []
    max_filt = 0.0
    for d in diagrams:
        pairs.extend(d.pairs)
        max_filt = max(max_filt, d.max_filtration)
    return PersistenceDiagram(_sorted_pairs(pairs), max_filt)
