"""Weighted graphs, their Laplacians and a dense symmetric eigensolver."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (Disconnected, NoConvergence, ParseError, SizeCap,
                     WeightedInput, ZeroDegreeVertex, ZeroFunction)

DEFAULT_TOL = 1e-10
SIZE_CAP = 5000


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on vertices ``0..n-1`` with nonnegative edge weights.

    Parallel edges are merged by summing their weights; self-loops are
    rejected.  ``edges`` is stored as a sorted tuple of ``(u, v, w)`` with
    ``u < v``.
    """

    n: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        merged = {}
        for edge in self.edges:
            if len(edge) == 2:
                u, v = edge
                w = 1.0
            else:
                u, v, w = edge
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if not w >= 0:
                raise ValueError(f"edge ({u}, {v}) has negative weight {w}")
            key = (min(u, v), max(u, v))
            merged[key] = merged.get(key, 0.0) + w
        object.__setattr__(
            self, "edges", tuple((u, v, w) for (u, v), w in sorted(merged.items())))

    @classmethod
    def from_adjacency(cls, adjacency) -> "WeightedGraph":
        a = np.asarray(adjacency, dtype=float)
        iu, ju = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], tuple(zip(iu.tolist(), ju.tolist(), a[iu, ju].tolist())))

    @property
    def m(self) -> int:
        return len(self.edges)

    def weight_matrix(self) -> np.ndarray:
        w = np.zeros((self.n, self.n))
        for u, v, x in self.edges:
            w[u, v] = w[v, u] = x
        return w

    def degrees(self) -> np.ndarray:
        """Weighted degrees d_v = sum of incident edge weights."""
        d = np.zeros(self.n)
        for u, v, w in self.edges:
            d[u] += w
            d[v] += w
        return d

    def valences(self) -> np.ndarray:
        """Number of neighbours of each vertex (weights ignored)."""
        d = np.zeros(self.n, dtype=int)
        for u, v, _ in self.edges:
            d[u] += 1
            d[v] += 1
        return d

    @property
    def d_max(self) -> int:
        return int(self.valences().max()) if self.n else 0

    @property
    def d_min(self) -> int:
        return int(self.valences().min()) if self.n else 0

    def neighbors(self) -> list:
        nbrs = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return nbrs

    def components(self) -> list:
        """Connected components (through positive-weight edges) as vertex lists."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v, w in self.edges:
            if w > 0:
                parent[find(u)] = find(v)
        groups = {}
        for x in range(self.n):
            groups.setdefault(find(x), []).append(x)
        return list(groups.values())

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1

    def is_unweighted(self) -> bool:
        return all(w == 1.0 for _, _, w in self.edges)

    def scaled(self, beta: float) -> "WeightedGraph":
        return WeightedGraph(self.n, tuple((u, v, beta * w) for u, v, w in self.edges))


@dataclass
class Spectrum:
    """Ascending eigenvalues with the worst residual reached by the solver."""

    values: np.ndarray
    residual_bound: float
    vectors: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def to_dict(self) -> dict:
        return {"values": [float(x) for x in self.values],
                "residual_bound": float(self.residual_bound)}


def sym_matrix(a) -> np.ndarray:
    """Return a dense symmetric copy of ``a``, symmetrized by averaging.

    Raises ``ValueError`` when ``a`` is not square or is asymmetric beyond
    1e-12 of its largest entry.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def standard_laplacian(g: WeightedGraph) -> np.ndarray:
    w = g.weight_matrix()
    return np.diag(w.sum(axis=1)) - w


def normalized_laplacian(g: WeightedGraph) -> np.ndarray:
    """I - S^{-1/2} W S^{-1/2} with S the weighted degree matrix."""
    w = g.weight_matrix()
    d = w.sum(axis=1)
    bad = np.flatnonzero(d <= 0)
    if bad.size:
        raise ZeroDegreeVertex(int(bad[0]))
    s = 1.0 / np.sqrt(d)
    lap = -(s[:, None] * w * s[None, :])
    lap[np.diag_indices_from(lap)] += 1.0
    return lap


def _residuals(m, values, vectors) -> float:
    if values.size == 0:
        return 0.0
    r = m @ vectors - vectors * values[None, :]
    return float((np.linalg.norm(r, axis=0) / np.linalg.norm(vectors, axis=0)).max())


def eigenvalues(m, tol: float = DEFAULT_TOL, cap: int = SIZE_CAP,
                vectors: bool = False) -> Spectrum:
    """Full ascending spectrum of a dense symmetric matrix.

    Uses LAPACK's divide-and-conquer driver (Householder tridiagonalization
    followed by tridiagonal diagonalization).  ``residual_bound`` is the
    largest ``||Ax - lambda x|| / ||x||`` over the returned eigenpairs; a
    ``NoConvergence`` is raised if it exceeds ``tol * ||A||``.
    """
    m = sym_matrix(m)
    if m.shape[0] > cap:
        raise SizeCap(f"matrix order {m.shape[0]} exceeds cap {cap}")
    if m.shape[0] == 0:
        return Spectrum(np.zeros(0), 0.0, np.zeros((0, 0)) if vectors else None)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    res = _residuals(m, vals, vecs)
    norm = max(float(np.abs(vals).max()), np.finfo(float).tiny)
    if res > tol * norm:
        raise NoConvergence(f"residual {res:.3e} exceeds {tol:.1e} * ||A||")
    return Spectrum(vals, res, vecs if vectors else None)


def lowest_eigenvalues(m, count: int, tol: float = DEFAULT_TOL,
                       cap: int = SIZE_CAP, vectors: bool = False) -> Spectrum:
    """The ``count`` smallest eigenvalues only; cheaper for large orders."""
    m = sym_matrix(m)
    order = m.shape[0]
    if order > cap:
        raise SizeCap(f"matrix order {order} exceeds cap {cap}")
    count = min(count, order)
    try:
        vals, vecs = scipy.linalg.eigh(m, subset_by_index=[0, count - 1])
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    res = _residuals(m, vals, vecs)
    norm = max(np.abs(m).sum(axis=1).max(), np.finfo(float).tiny)
    if res > tol * norm:
        raise NoConvergence(f"residual {res:.3e} exceeds {tol:.1e} * ||A||")
    return Spectrum(vals, res, vecs if vectors else None)


def rayleigh_quotient(g: WeightedGraph, f) -> float:
    """sum_e w_e (f(u) - f(v))^2 / sum_v d_v f(v)^2."""
    f = np.asarray(f, dtype=float)
    d = g.degrees()
    den = float(np.dot(d, f * f))
    if not np.any(f) or den == 0.0:
        raise ZeroFunction("Rayleigh quotient of a function vanishing on the support")
    num = sum(w * (f[u] - f[v]) ** 2 for u, v, w in g.edges)
    return num / den


def cartesian_product(g1: WeightedGraph, g2: WeightedGraph) -> WeightedGraph:
    """Cartesian product; vertex (a, b) is numbered ``a * g2.n + b``."""
    if not (g1.is_unweighted() and g2.is_unweighted()):
        raise WeightedInput("cartesian_product expects unit weights")
    n2 = g2.n
    edges = []
    for a in range(g1.n):
        edges.extend((a * n2 + u, a * n2 + v) for u, v, _ in g2.edges)
    for b in range(n2):
        edges.extend((u * n2 + b, v * n2 + b) for u, v, _ in g1.edges)
    return WeightedGraph(g1.n * n2, tuple(edges))


def fiedler_vector(m, tol: float = DEFAULT_TOL):
    """Second eigenpair ``(lambda_1, x)`` of a Laplacian-type matrix.

    The vector has unit norm and its first entry of non-negligible size is
    positive.  Raises ``Disconnected`` when lambda_1 is numerically zero.
    """
    spec = eigenvalues(m, tol=tol, vectors=True)
    if len(spec) < 2:
        raise Disconnected("matrix of order < 2 has no Fiedler pair")
    lam = float(spec.values[1])
    norm = max(1.0, float(np.abs(spec.values).max()))
    if lam < max(spec.residual_bound, 1e-9 * norm):
        raise Disconnected(f"lambda_1 = {lam:.3e} is numerically zero")
    x = spec.vectors[:, 1] / np.linalg.norm(spec.vectors[:, 1])
    big = np.flatnonzero(np.abs(x) > 1e-8)
    if big.size and x[big[0]] < 0:
        x = -x
    return lam, x


# -- small graph corpus -----------------------------------------------------

def path_graph(n: int) -> WeightedGraph:
    return WeightedGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> WeightedGraph:
    if n < 3:
        raise ValueError("a simple cycle needs at least 3 vertices")
    return WeightedGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def star_graph(leaves: int) -> WeightedGraph:
    """Vertex 0 is the centre."""
    return WeightedGraph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def complete_graph(n: int) -> WeightedGraph:
    return WeightedGraph(n, tuple(itertools.combinations(range(n), 2)))


def disjoint_union(graphs: Sequence[WeightedGraph]) -> WeightedGraph:
    edges, offset = [], 0
    for g in graphs:
        edges.extend((u + offset, v + offset, w) for u, v, w in g.edges)
        offset += g.n
    return WeightedGraph(offset, tuple(edges))


# -- edge-list text format ----------------------------------------------------

def parse_edge_list(text: str, lengths: bool = False) -> WeightedGraph:
    """Parse ``n m`` followed by ``m`` lines ``u v [w]`` (0-indexed).

    Blank lines and ``#`` comments are ignored.  With ``lengths=True`` the
    third column is mandatory (it holds edge lengths of a metric model).
    """
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise ParseError("empty edge list")
    try:
        if len(rows[0]) != 2:
            raise ParseError("header must be 'n m'")
        n, m = int(rows[0][0]), int(rows[0][1])
        if len(rows) - 1 != m:
            raise ParseError(f"header announces {m} edges, found {len(rows) - 1}")
        edges = []
        for row in rows[1:]:
            if len(row) == 2 and not lengths:
                edges.append((int(row[0]), int(row[1]), 1.0))
            elif len(row) == 3:
                edges.append((int(row[0]), int(row[1]), float(row[2])))
            else:
                raise ParseError(f"bad edge line: {' '.join(row)}")
        return WeightedGraph(n, tuple(edges))
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def format_edge_list(g: WeightedGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v} {w!r}" for u, v, w in g.edges)
    return "\n".join(lines) + "\n"
