"""Metric graphs: simple models, their discrete spectra and a continuum oracle.

The continuum spectrum of a metric graph is approximated with continuous
piecewise-linear finite elements (consistent mass) on a uniform refinement
of every edge.  Continuity at the vertices plus natural boundary conditions
is the weak form of the Kirchhoff condition, so no vertex condition needs
to be imposed explicitly.  Stars are additionally solved exactly through
their secular equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .errors import (NoConvergence, NotLengthBalanced, ParseError,
                     RootBracketFailure, SizeCap)
from .graphs import (SIZE_CAP, Spectrum, WeightedGraph, eigenvalues,
                     lowest_eigenvalues, normalized_laplacian, star_graph)


@dataclass(frozen=True)
class MetricGraphModel:
    """Simple connected graph with positive edge lengths."""

    n: int
    edges: tuple
    lengths: tuple

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        lengths = tuple(float(x) for x in self.lengths)
        if len(edges) != len(lengths):
            raise ValueError("one length per edge is required")
        seen = set()
        for (u, v), x in zip(edges, lengths):
            if u == v:
                raise ValueError(f"loop at vertex {u}; use from_multigraph")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}; use from_multigraph")
            seen.add(key)
            if not x > 0:
                raise ValueError(f"edge {key} has non-positive length {x}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "lengths", lengths)
        if not self.weighted_graph().is_connected():
            raise ValueError("model graph must be connected")

    @classmethod
    def from_multigraph(cls, n: int, edges: Sequence) -> "MetricGraphModel":
        """Accept loops and parallel edges ``(u, v, length)``.

        Every loop is split into three equal pieces and every member of a
        parallel class into two, which yields a simple model of the same
        metric graph.
        """
        counts = {}
        for u, v, _ in edges:
            key = (min(u, v), max(u, v))
            counts[key] = counts.get(key, 0) + 1
        out_edges, out_len = [], []
        nxt = n
        for u, v, x in edges:
            key = (min(u, v), max(u, v))
            pieces = 3 if u == v else (2 if counts[key] > 1 else 1)
            chain = [u] + list(range(nxt, nxt + pieces - 1)) + [v]
            nxt += pieces - 1
            for a, b in zip(chain, chain[1:]):
                out_edges.append((a, b))
                out_len.append(x / pieces)
        return cls(nxt, tuple(out_edges), tuple(out_len))

    @classmethod
    def from_graph(cls, g: WeightedGraph, lengths=None) -> "MetricGraphModel":
        if lengths is None:
            lengths = [w for _, _, w in g.edges]
        return cls(g.n, tuple((u, v) for u, v, _ in g.edges), tuple(lengths))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def l_min(self) -> float:
        return min(self.lengths)

    @property
    def l_max(self) -> float:
        return max(self.lengths)

    @property
    def total_length(self) -> float:
        return math.fsum(self.lengths)

    @property
    def length_balanced(self) -> bool:
        return self.l_max <= 2.0 * self.l_min

    def valences(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=int)
        for u, v in self.edges:
            d[u] += 1
            d[v] += 1
        return d

    @property
    def d_max(self) -> int:
        return int(self.valences().max())

    def weighted_graph(self) -> WeightedGraph:
        """Graph of the star cover: edge weight = edge length."""
        return WeightedGraph(self.n, tuple((u, v, x) for (u, v), x in
                                           zip(self.edges, self.lengths)))

    def scaled(self, beta: float) -> "MetricGraphModel":
        return MetricGraphModel(self.n, self.edges, tuple(beta * x for x in self.lengths))


@dataclass(frozen=True)
class MetricStar:
    """Star with branches of the given lengths."""

    lengths: tuple

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        if not lengths:
            raise ValueError("a star needs at least one branch")
        if any(not x > 0 for x in lengths):
            raise ValueError("branch lengths must be positive")
        object.__setattr__(self, "lengths", lengths)

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def l_max(self) -> float:
        return max(self.lengths)

    def model(self) -> MetricGraphModel:
        return MetricGraphModel.from_graph(star_graph(self.d), self.lengths)


def star_lower_bound(s: MetricStar) -> float:
    """pi^2 / (4 l_max^2)."""
    return math.pi ** 2 / (4.0 * s.l_max ** 2)


def parse_model(text: str) -> MetricGraphModel:
    """Edge-list file ``n m`` then ``u v length`` lines; multi-edges allowed."""
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError("empty model file")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        if len(rows[0]) != 2 or len(rows) - 1 != m:
            raise ParseError(f"header announces {m} edges, found {len(rows) - 1}")
        edges = []
        for r in rows[1:]:
            if len(r) != 3:
                raise ParseError(f"expected 'u v length', got {' '.join(r)}")
            edges.append((int(r[0]), int(r[1]), float(r[2])))
        return MetricGraphModel.from_multigraph(n, edges)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# -- discrete spectra -------------------------------------------------------------

def weighted_normalized_spectrum(m: MetricGraphModel) -> Spectrum:
    return eigenvalues(normalized_laplacian(m.weighted_graph()))


def subdivide(m: MetricGraphModel, k: int) -> MetricGraphModel:
    """Split every edge into k equal pieces; new vertices are numbered after n."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return m
    edges, lengths = [], []
    nxt = m.n
    for (u, v), x in zip(m.edges, m.lengths):
        chain = [u] + list(range(nxt, nxt + k - 1)) + [v]
        nxt += k - 1
        for a, b in zip(chain, chain[1:]):
            edges.append((a, b))
            lengths.append(x / k)
    return MetricGraphModel(nxt, tuple(edges), tuple(lengths))


# -- continuum oracle --------------------------------------------------------------

@dataclass
class ContinuumEstimate:
    level: int
    values: np.ndarray        # fine level, lambda_0..lambda_kmax
    coarse: np.ndarray        # level - 1
    segments: int             # segments per edge at the fine level

    @property
    def error(self) -> np.ndarray:
        return np.abs(self.values - self.coarse)

    @property
    def extrapolated(self) -> np.ndarray:
        return (4.0 * self.values - self.coarse) / 3.0

    def to_dict(self) -> dict:
        return {"level": self.level, "segments_per_edge": self.segments,
                "values": self.values.tolist(), "coarse": self.coarse.tolist(),
                "extrapolated": self.extrapolated.tolist(),
                "error": self.error.tolist()}


def base_segments(m: MetricGraphModel) -> int:
    """Smallest s with l_max / s <= l_min / 4."""
    return max(1, math.ceil(4.0 * m.l_max / m.l_min - 1e-12))


def fem_matrices(m: MetricGraphModel, segments: int):
    """Stiffness and consistent mass matrices of P1 elements, ``segments`` per edge."""
    order = m.n + m.m * (segments - 1)
    if order > SIZE_CAP:
        raise SizeCap(f"FEM order {order} exceeds cap {SIZE_CAP}")
    K = np.zeros((order, order))
    M = np.zeros((order, order))
    nxt = m.n
    for (u, v), x in zip(m.edges, m.lengths):
        h = x / segments
        chain = [u] + list(range(nxt, nxt + segments - 1)) + [v]
        nxt += segments - 1
        a = np.array(chain[:-1])
        b = np.array(chain[1:])
        np.add.at(K, (a, a), 1.0 / h)
        np.add.at(K, (b, b), 1.0 / h)
        np.add.at(K, (a, b), -1.0 / h)
        np.add.at(K, (b, a), -1.0 / h)
        np.add.at(M, (a, a), h / 3.0)
        np.add.at(M, (b, b), h / 3.0)
        np.add.at(M, (a, b), h / 6.0)
        np.add.at(M, (b, a), h / 6.0)
    return K, M


def fem_eigenvalues(m: MetricGraphModel, segments: int, count: int) -> np.ndarray:
    K, M = fem_matrices(m, segments)
    count = min(count, K.shape[0])
    try:
        vals = scipy.linalg.eigh(K, M, eigvals_only=True,
                                 subset_by_index=[0, count - 1])
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return vals


def continuum_spectrum(m: MetricGraphModel, k_max: int, level: int) -> ContinuumEstimate:
    """lambda_0..lambda_kmax of the metric graph at refinement ``level >= 1``.

    Each edge is cut into ``s * 2**level`` pieces where ``s`` makes the
    coarsest piece at most l_min / 4; the previous level is kept to form
    the error indicator and the Richardson value.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    s = base_segments(m)
    fine = s * 2 ** level
    vals = fem_eigenvalues(m, fine, k_max + 1)
    coarse = fem_eigenvalues(m, fine // 2, k_max + 1)
    return ContinuumEstimate(level, vals, coarse, fine)


def level_for_resolution(m: MetricGraphModel, h: float) -> int:
    """Smallest level whose longest segment is at most ``h``."""
    s = base_segments(m)
    level = 1
    while m.l_max / (s * 2 ** level) > h:
        level += 1
    return level


# -- stars -----------------------------------------------------------------------

def _tan_sum(x, lengths):
    return float(np.sum(np.tan(x * lengths)))


def star_secular_solve(s: MetricStar, k_max: int) -> list:
    """lambda_0..lambda_kmax of a metric star from its secular equation.

    Eigenfunctions are a_e cos(sqrt(lambda) x_e) on each branch, x_e
    measured from the leaf.  If the central value is nonzero, lambda solves
    sum_e tan(sqrt(lambda) l_e) = 0; this function increases strictly
    between consecutive poles, so each gap holds one root, located by
    bisection.  If the central value vanishes, sqrt(lambda) must be a pole
    of the branches in a set Z and the eigenspace has dimension |Z| - 1.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    lengths = np.array(s.lengths)
    limit = math.pi * (k_max + 1) / lengths.max()
    while True:
        clusters = _pole_clusters(lengths, limit)
        vals = [0.0]
        for (x0, z0), (x1, _) in zip(clusters, clusters[1:]):
            vals.extend([x0 * x0] * (len(z0) - 1))
            vals.append(_gap_root(x0, x1, lengths) ** 2)
        if clusters:
            x_last, z_last = clusters[-1]
            vals.extend([x_last * x_last] * (len(z_last) - 1))
        if len(vals) > k_max:
            return sorted(vals)[: k_max + 1]
        limit *= 2.0


def _pole_clusters(lengths, limit):
    poles = []
    for e, ell in enumerate(lengths):
        j = 0
        while True:
            x = (math.pi / 2 + math.pi * j) / ell
            if x > limit:
                break
            poles.append((x, e))
            j += 1
    poles.sort()
    clusters = []
    for x, e in poles:
        if clusters and x - clusters[-1][0] <= 1e-12 * x:
            clusters[-1][1].add(e)
        else:
            clusters.append((x, {e}))
    return clusters


def _gap_root(x0, x1, lengths):
    width = x1 - x0
    for rel in (1e-9, 1e-11, 1e-13):
        lo, hi = x0 + rel * width, x1 - rel * width
        flo, fhi = _tan_sum(lo, lengths), _tan_sum(hi, lengths)
        if flo < 0 < fhi:
            return brentq(_tan_sum, lo, hi, args=(lengths,), xtol=1e-15 * x1,
                          rtol=4 * np.finfo(float).eps, maxiter=500)
    raise RootBracketFailure(lo, hi, flo, fhi)


# -- bound suite ----------------------------------------------------------------

@dataclass
class BoundReport:
    """Rows of a two-sided comparison between continuum and discrete spectra."""

    name: str
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, key):
        return [r[key] for r in self.rows]

    def to_dict(self) -> dict:
        return {"name": self.name, "meta": dict(self.meta), "rows": list(self.rows)}


def _usable_k(m: MetricGraphModel, k_max: int) -> range:
    return range(1, min(k_max, m.n - 1) + 1)


def lower_bound_check(m: MetricGraphModel, k_max: int, level: int = 4) -> BoundReport:
    """lambda_k(Gamma) >= pi^2 / (8 l_max^2) * lambda_k^nr(G, l).

    ``holds`` means the FEM value plus its error indicator clears the bound;
    ``certified`` asks the FEM value minus the indicator to clear it.
    """
    est = continuum_spectrum(m, k_max, level)
    nr = weighted_normalized_spectrum(m)
    factor = math.pi ** 2 / (8.0 * m.l_max ** 2)
    rep = BoundReport("lower_bound", meta={"l_max": m.l_max, "level": level})
    for k in _usable_k(m, k_max):
        lam, err = float(est.values[k]), float(est.error[k])
        rhs = factor * float(nr.values[k])
        tol = 1e-12 * max(1.0, rhs)
        rep.rows.append({"k": k, "lambda_gamma": lam, "error": err,
                         "lambda_nr": float(nr.values[k]), "bound": rhs,
                         "holds": lam + err >= rhs - tol,
                         "certified": lam - err >= rhs - tol,
                         "slack": lam / rhs if rhs > 0 else math.inf})
    rep.meta["violations"] = sum(not r["holds"] for r in rep.rows)
    rep.meta["uncertified"] = sum(not r["certified"] for r in rep.rows)
    return rep


def _require_balanced(m: MetricGraphModel):
    if not m.length_balanced:
        raise NotLengthBalanced(
            f"l_max = {m.l_max!r} exceeds 2 l_min = {2 * m.l_min!r}")


def sandwich_check(m: MetricGraphModel, k_max: int, level: int = 4) -> BoundReport:
    """Empirical constants of the two-sided bound for a length-balanced model.

    c1_hat = lambda_k^nr / (l_min^2 lambda_k(Gamma)) and c2_hat = d_max * c1_hat;
    the report records whether both stay positive and finite.
    """
    _require_balanced(m)
    est = continuum_spectrum(m, k_max, level)
    nr = weighted_normalized_spectrum(m)
    rep = BoundReport("sandwich", meta={"l_min": m.l_min, "d_max": m.d_max})
    for k in _usable_k(m, k_max):
        scaled = m.l_min ** 2 * float(est.extrapolated[k])
        c1 = float(nr.values[k]) / scaled
        rep.rows.append({"k": k, "lambda_gamma": float(est.extrapolated[k]),
                         "lambda_nr": float(nr.values[k]), "c1_hat": c1,
                         "c2_hat": m.d_max * c1})
    c1s = rep.column("c1_hat")
    rep.meta["c1_range"] = [min(c1s), max(c1s)] if c1s else []
    rep.meta["bounded"] = bool(c1s) and min(c1s) > 0 and math.isfinite(max(c1s))
    return rep


def subdivision_stability(m: MetricGraphModel, k: int,
                          levels: Sequence[int]) -> BoundReport:
    """s^2 lambda_k^nr(G_s, l) for every subdivision count s in ``levels``."""
    _require_balanced(m)
    rep = BoundReport("subdivision_stability", meta={"k": k})
    for s in levels:
        ms = subdivide(m, s)
        if k > ms.n - 1:
            rep.meta.setdefault("skipped_s", []).append(s)
            continue
        lam = float(lowest_eigenvalues(normalized_laplacian(ms.weighted_graph()),
                                       k + 1).values[k])
        rep.rows.append({"s": s, "lambda_nr": lam, "scaled": s * s * lam})
    vals = rep.column("scaled")
    rep.meta["spread"] = max(vals) / min(vals) if vals and min(vals) > 0 else math.inf
    return rep


def dilation_check(m: MetricGraphModel, beta: float, k_max: int,
                   level: int = 4) -> BoundReport:
    """Continuum eigenvalues scale by 1/beta^2; the discrete ones do not move."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    mb = m.scaled(beta)
    e0 = continuum_spectrum(m, k_max, level)
    e1 = continuum_spectrum(mb, k_max, level)
    L0 = normalized_laplacian(m.weighted_graph())
    L1 = normalized_laplacian(mb.weighted_graph())
    rep = BoundReport("dilation", meta={"beta": beta,
                                        "nr_matrix_defect": float(np.abs(L0 - L1).max())})
    for k in range(1, k_max + 1):
        pred = float(e0.values[k]) / beta ** 2
        band = float(e0.error[k]) / beta ** 2 + float(e1.error[k])
        rep.rows.append({"k": k, "lambda_scaled": float(e1.values[k]),
                         "predicted": pred, "band": band,
                         "agrees": abs(float(e1.values[k]) - pred) <= band + 1e-12 * pred})
    return rep


@dataclass
class Interpolation:
    scale: float             # factor applied to lengths so that l_min = 1
    dirichlet_energy: float
    l2_mass: float
    l2_mass_lower: float
    edge_sum: float          # sum over edges of (g(u) - g(v))^2

    @property
    def energy_ok(self) -> bool:
        return self.dirichlet_energy <= 2.0 * self.edge_sum * (1 + 1e-12) + 1e-300

    @property
    def mass_ok(self) -> bool:
        return self.l2_mass >= self.l2_mass_lower * (1 - 1e-12)


def vertex_interpolation(m: MetricGraphModel, g) -> Interpolation:
    """Extend a vertex function to the metric graph (after rescaling l_min to 1).

    The extension is constant g(v) on the ball of radius 1/(4 d_v) around v
    and affine between consecutive balls.  Returns its exact Dirichlet
    energy and L2 mass together with the ball contribution (1/4) sum g(v)^2.
    """
    _require_balanced(m)
    g = np.asarray(g, dtype=float)
    scale = 1.0 / m.l_min
    d = m.valences()
    energy = 0.0
    mass = 0.0
    edge_sum = 0.0
    for (u, v), x in zip(m.edges, m.lengths):
        seg = x * scale - 1.0 / (4 * d[u]) - 1.0 / (4 * d[v])
        a, b = g[u], g[v]
        energy += (a - b) ** 2 / seg
        mass += seg * (a * a + a * b + b * b) / 3.0
        edge_sum += (a - b) ** 2
    balls = 0.25 * float(np.dot(g, g))
    return Interpolation(scale, energy, mass + balls, balls, edge_sum)


# -- model suite ------------------------------------------------------------------

def cycle_model(n: int, length: float = 1.0) -> MetricGraphModel:
    return MetricGraphModel(n, tuple((i, (i + 1) % n) for i in range(n)), (length,) * n)


def theta_model() -> MetricGraphModel:
    """Two vertices joined by three unit edges, made simple by one subdivision."""
    return MetricGraphModel.from_multigraph(2, [(0, 1, 1.0)] * 3)


def random_balanced_model(rng: np.random.Generator, n: int,
                          extra_edges: int = 3) -> MetricGraphModel:
    """Random connected simple graph with lengths uniform in [1, 2]."""
    edges = set()
    for v in range(1, n):
        edges.add((int(rng.integers(0, v)), v))
    tries = 0
    while len(edges) < n - 1 + extra_edges and tries < 100:
        u, v = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        edges.add((u, v))
        tries += 1
    edges = sorted(edges)
    return MetricGraphModel(n, tuple(edges), tuple(rng.uniform(1.0, 2.0, len(edges))))
