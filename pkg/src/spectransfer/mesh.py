"""Simplicial meshes, their facet-cone cover and spectral bisection.

Each d-simplex is split into d + 1 cones over its facets with apex at the
barycenter, every cone having volume vol / (d + 1).  The cell attached to
a simplex is the simplex itself together with the cones of its neighbours
that sit on the shared facets, so facet-adjacent simplices overlap in two
cones and the overlap weight is (vol_1 + vol_2) / (d + 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .cover import TwoFoldCover
from .errors import (DegenerateSimplex, Disconnected, NonManifoldFacet,
                     ParseError, TooSmall)
from .graphs import WeightedGraph, fiedler_vector, normalized_laplacian

DEFAULT_BALANCE_FLOOR = 0.1


@dataclass(frozen=True, eq=False)
class SimplicialMesh:
    """d-simplices over vertex coordinates, optionally with periodic gluing.

    ``identify`` maps every vertex to the representative it is glued to;
    topology (facets, adjacency) uses representatives while geometry uses
    the original coordinates of each simplex.
    """

    coords: np.ndarray
    simplices: np.ndarray
    identify: Optional[np.ndarray] = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        simp = np.asarray(self.simplices, dtype=int)
        if coords.ndim != 2 or coords.shape[1] not in (2, 3):
            raise ParseError("coordinates must be an (nv, d) array with d in {2, 3}")
        d = coords.shape[1]
        if simp.ndim != 2 or simp.shape[1] != d + 1:
            raise ParseError(f"simplices must have {d + 1} vertices")
        if simp.size and (simp.min() < 0 or simp.max() >= len(coords)):
            raise ParseError("simplex refers to a missing vertex")
        ident = (np.arange(len(coords)) if self.identify is None
                 else np.asarray(self.identify, dtype=int))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "simplices", simp)
        object.__setattr__(self, "identify", ident)
        eps = self.epsilon
        for i, vol in enumerate(self.volumes):
            if vol <= 1e-14 * eps ** d:
                raise DegenerateSimplex(i)
        for key, owners in self.facets.items():
            if len(owners) > 2:
                raise NonManifoldFacet(key)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def n_simplices(self) -> int:
        return len(self.simplices)

    @property
    def periodic(self) -> bool:
        return bool(np.any(self.identify != np.arange(len(self.coords))))

    @cached_property
    def volumes(self) -> np.ndarray:
        p = self.coords[self.simplices]
        edges = p[:, 1:, :] - p[:, :1, :]
        return np.abs(np.linalg.det(edges)) / math.factorial(self.dim)

    @cached_property
    def diameters(self) -> np.ndarray:
        p = self.coords[self.simplices]
        diff = p[:, :, None, :] - p[:, None, :, :]
        return np.sqrt((diff ** 2).sum(-1)).reshape(len(p), -1).max(axis=1)

    @property
    def epsilon(self) -> float:
        return float(self.diameters.max()) if self.n_simplices else 0.0

    @cached_property
    def facets(self) -> dict:
        """Facet key (sorted glued vertex ids) -> list of (simplex, omitted local index)."""
        out = {}
        glued = self.identify[self.simplices]
        for s, verts in enumerate(glued):
            for omit in range(self.dim + 1):
                key = tuple(sorted(np.delete(verts, omit).tolist()))
                out.setdefault(key, []).append((s, omit))
        return out

    @cached_property
    def adjacent_pairs(self) -> list:
        """(s1, s2, facet key) for every interior facet, s1 < s2."""
        pairs = []
        for key, owners in self.facets.items():
            if len(owners) == 2:
                (a, _), (b, _) = owners
                pairs.append((min(a, b), max(a, b), key))
        return pairs

    @cached_property
    def boundary_facets(self) -> list:
        return [(owners[0][0], key) for key, owners in self.facets.items()
                if len(owners) == 1]

    def facet_measure(self, key) -> float:
        """(d-1)-dimensional measure of a facet, from one owning simplex."""
        s, omit = self.facets[key][0]
        pts = np.delete(self.coords[self.simplices[s]], omit, axis=0)
        e = pts[1:] - pts[0]
        return math.sqrt(max(np.linalg.det(e @ e.T), 0.0)) / math.factorial(self.dim - 1)

    def to_text(self) -> str:
        nv, ns = len(self.coords), self.n_simplices
        pairs = [(int(r), int(v)) for v, r in enumerate(self.identify) if r != v]
        head = f"{self.dim} {nv} {ns}"
        if pairs:
            head += f" periodic {len(pairs)}"
        lines = [head]
        lines += [" ".join(repr(float(x)) for x in row) for row in self.coords]
        lines += [" ".join(str(int(i)) for i in row) for row in self.simplices]
        lines += [f"{r} {v}" for r, v in pairs]
        return "\n".join(lines) + "\n"


def parse_mesh(text: str) -> SimplicialMesh:
    """Parse ``d nv ns [periodic np]``, nv coordinate lines, ns simplex lines
    and np lines ``i j`` gluing vertex j onto vertex i."""
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError("empty mesh file")
    head = rows[0]
    try:
        d, nv, ns = int(head[0]), int(head[1]), int(head[2])
        n_id = 0
        if len(head) == 5 and head[3] == "periodic":
            n_id = int(head[4])
        elif len(head) != 3:
            raise ParseError(f"bad header: {' '.join(head)}")
        if d not in (2, 3):
            raise ParseError(f"dimension {d} not supported")
        if len(rows) != 1 + nv + ns + n_id:
            raise ParseError(f"expected {nv + ns + n_id} body lines, found {len(rows) - 1}")
        body = rows[1:]
        coords = np.array([[float(x) for x in r] for r in body[:nv]])
        simp = np.array([[int(x) for x in r] for r in body[nv:nv + ns]], dtype=int)
        if coords.shape != (nv, d) or simp.shape != (ns, d + 1):
            raise ParseError("row lengths do not match the declared dimension")
        ident = np.arange(nv)
        for r in body[nv + ns:]:
            if len(r) != 2:
                raise ParseError(f"bad identification line: {' '.join(r)}")
            ident = _glue(ident, int(r[0]), int(r[1]))
    except ParseError:
        raise
    except (ValueError, IndexError) as exc:
        raise ParseError(str(exc)) from exc
    return SimplicialMesh(coords, simp, ident)


def _glue(ident, a, b):
    ra, rb = ident[a], ident[b]
    lo, hi = min(ra, rb), max(ra, rb)
    ident = ident.copy()
    ident[ident == hi] = lo
    return ident


def load_mesh(path) -> SimplicialMesh:
    return parse_mesh(Path(path).read_text())


# -- generators --------------------------------------------------------------------

def grid_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0,
              row_heights=None, col_widths=None, periodic: bool = False) -> SimplicialMesh:
    """Rectangle cut into nx * ny cells, each split along its rising diagonal.

    ``row_heights``/``col_widths`` override the uniform spacing (they are
    rescaled to the total height/width).  ``periodic`` glues opposite sides.
    """
    xs = _breaks(nx, width, col_widths)
    ys = _breaks(ny, height, row_heights)
    X, Y = np.meshgrid(xs, ys)
    coords = np.column_stack([X.ravel(), Y.ravel()])
    vid = lambda i, j: j * (nx + 1) + i
    tris = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    ident = np.arange(len(coords))
    if periodic:
        for j in range(ny + 1):
            ident[vid(nx, j)] = vid(0, j)
        for i in range(nx + 1):
            ident[vid(i, ny)] = ident[vid(i, 0)]
    return SimplicialMesh(coords, np.array(tris), ident)


def _breaks(n, total, sizes):
    if sizes is None:
        return np.linspace(0.0, total, n + 1)
    sizes = np.asarray(sizes, dtype=float)
    if len(sizes) != n:
        raise ValueError("need one size per cell")
    return np.concatenate(([0.0], np.cumsum(sizes) * total / sizes.sum()))


def cube_mesh(nx: int, ny: int, nz: int, size=(1.0, 1.0, 1.0)) -> SimplicialMesh:
    """Box split into cubes, each cut into 6 tetrahedra around its main diagonal."""
    xs, ys, zs = (np.linspace(0.0, s, k + 1) for s, k in zip(size, (nx, ny, nz)))
    Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
    coords = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    vid = lambda i, j, k: (k * (ny + 1) + j) * (nx + 1) + i
    paths = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    tets = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                for order in paths:
                    p = [i, j, k]
                    verts = [vid(*p)]
                    for axis in order:
                        p[axis] += 1
                        verts.append(vid(*p))
                    tets.append(verts)
    return SimplicialMesh(coords, np.array(tets))


# -- cover and dual graph ------------------------------------------------------------

def barycentric_cover(m: SimplicialMesh):
    """Facet-cone cover of the mesh and its intersection (dual) graph.

    On meshes with boundary the cones on boundary facets are covered once,
    so the cover is flagged ``almost_two_fold``.
    """
    vol = m.volumes
    k = m.dim + 1
    mu = vol.copy()
    inter = {}
    edges = []
    for a, b, _ in m.adjacent_pairs:
        w = (vol[a] + vol[b]) / k
        mu[a] += vol[b] / k
        mu[b] += vol[a] / k
        key = frozenset((a, b))
        inter[key] = inter.get(key, 0.0) + w
        edges.append((a, b, w))
    cover = TwoFoldCover(tuple((s, mu[s]) for s in range(m.n_simplices)), inter,
                         almost_two_fold=bool(m.boundary_facets))
    return cover, WeightedGraph(m.n_simplices, tuple(edges))


def boundary_cone_volume(m: SimplicialMesh) -> float:
    """Total volume of the facet cones sitting on boundary facets."""
    return float(sum(m.volumes[s] for s, _ in m.boundary_facets) / (m.dim + 1))


def kappa_epsilon(m: SimplicialMesh):
    """(max volume ratio across interior facets, max simplex diameter)."""
    vol = m.volumes
    kappa = 1.0
    for a, b, _ in m.adjacent_pairs:
        kappa = max(kappa, vol[a] / vol[b], vol[b] / vol[a])
    return kappa, m.epsilon


# -- spectral bisection -------------------------------------------------------------

@dataclass
class Partition:
    side: np.ndarray          # 0 for the sweep prefix, 1 for the rest
    cut_edges: list
    cut_weight: float
    conductance: float
    balance: float
    fiedler_value: float
    order: np.ndarray = field(repr=False, default=None)

    def lines(self) -> str:
        return "".join(f"{i} {int(s)}\n" for i, s in enumerate(self.side))


def conductance(g: WeightedGraph, in_set) -> tuple:
    """(conductance, balance, cut weight) of a vertex subset (boolean mask)."""
    in_set = np.asarray(in_set, dtype=bool)
    d = g.degrees()
    cut = sum(w for u, v, w in g.edges if in_set[u] != in_set[v])
    vs = float(d[in_set].sum())
    small = min(vs, float(d.sum()) - vs)
    if small <= 0:
        return math.inf, 0.0, cut
    return cut / small, small / float(d.sum()), cut


def spectral_cut(dual: WeightedGraph, balance_floor: float = DEFAULT_BALANCE_FLOOR,
                 tol: float = 1e-10) -> Partition:
    """Sweep cut along the Fiedler vector of the normalized Laplacian.

    Vertices are ordered by x_v / sqrt(d_v).  Among the n - 1 prefix cuts
    whose balance (smaller side's share of the total degree) reaches
    ``balance_floor``, the one of least conductance wins; ties go to the
    better balanced cut, then to the shorter prefix.  When no prefix meets
    the floor all prefixes compete.
    """
    n = dual.n
    if n < 2:
        raise TooSmall("need at least two simplices to cut")
    if not dual.is_connected():
        raise Disconnected("dual graph is disconnected")
    lam, x = fiedler_vector(normalized_laplacian(dual), tol=tol)
    d = dual.degrees()
    order = np.argsort(x / np.sqrt(d), kind="stable")
    w = dual.weight_matrix()
    total = float(d.sum())
    inside = np.zeros(n, dtype=bool)
    cut = vol = 0.0
    rows = []
    for i, v in enumerate(order[:-1]):
        cut += float(w[v, ~inside].sum() - w[v, v] - w[v, inside].sum())
        inside[v] = True
        vol += d[v]
        small = min(vol, total - vol)
        rows.append((cut / small, small / total, i + 1, cut))
    pool = [r for r in rows if r[1] >= balance_floor - 1e-12] or rows
    best = pool[0]
    for r in pool[1:]:
        if r[0] < best[0] * (1 - 1e-12):
            best = r
        elif r[0] <= best[0] * (1 + 1e-12) and r[1] > best[1] * (1 + 1e-12):
            best = r
    phi, bal, size, cut_w = best
    side = np.ones(n, dtype=int)
    side[order[:size]] = 0
    cut_edges = [(u, v) for u, v, _ in dual.edges if side[u] != side[v]]
    return Partition(side, cut_edges, cut_w, phi, bal, lam, order)


def partition_report(m: SimplicialMesh, p: Partition,
                     lambda1_domain: Optional[float] = None) -> dict:
    """Cut statistics plus, given lambda_1 of the domain, the two measured
    constants fiedler / (kappa^2 lambda_1 eps^2) and cut * eps / (kappa sqrt(lambda_1))."""
    kappa, eps = kappa_epsilon(m)
    cut_pairs = {(min(u, v), max(u, v)) for u, v in p.cut_edges}
    cut_measure = sum(m.facet_measure(key) for a, b, key in m.adjacent_pairs
                      if (a, b) in cut_pairs)
    rep = {
        "n_simplices": m.n_simplices,
        "dimension": m.dim,
        "cut_count": len(p.cut_edges),
        "cut_measure": float(cut_measure),
        "cut_weight": float(p.cut_weight),
        "balance": float(p.balance),
        "conductance": float(p.conductance),
        "fiedler_value": float(p.fiedler_value),
        "kappa": float(kappa),
        "epsilon": float(eps),
    }
    if lambda1_domain is not None:
        rep["lambda1_domain"] = float(lambda1_domain)
        rep["fiedler_ratio"] = float(p.fiedler_value / (kappa ** 2 * lambda1_domain * eps ** 2))
        rep["cut_ratio"] = float(len(p.cut_edges) * eps / (kappa * math.sqrt(lambda1_domain)))
    return rep
