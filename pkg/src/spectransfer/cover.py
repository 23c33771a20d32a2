"""Two-fold covers of measured spaces and their cover Laplacians.

A cover is described only by its measure data: the measure of each cell
and the measure of each pairwise intersection.  Geometric constructors
(arcs on a circle, stars of an embedded graph, simplices of a mesh) live
next to the geometry they come from and all end up here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import BadEta, InexactCover, IsolatedCell, NotTwoFold, ParseError
from .graphs import WeightedGraph, eigenvalues, normalized_laplacian

EXACT_TOL = 1e-9


@dataclass(frozen=True)
class TwoFoldCover:
    """Cells ``(id, measure)`` plus intersection measures keyed by id pairs.

    ``almost_two_fold`` marks covers that are known to be 2-fold only away
    from a boundary (mesh covers); such covers skip the exactness gate.
    """

    cells: tuple
    intersections: dict = field(default_factory=dict)
    almost_two_fold: bool = False

    def __post_init__(self):
        cells = tuple((cid, float(mu)) for cid, mu in self.cells)
        ids = [cid for cid, _ in cells]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate cell ids")
        for cid, mu in cells:
            if not mu > 0:
                raise ValueError(f"cell {cid!r} has non-positive measure {mu}")
        known = set(ids)
        inter = {}
        for pair, mu in dict(self.intersections).items():
            a, b = tuple(pair)
            if a == b or a not in known or b not in known:
                raise ValueError(f"bad intersection key {pair!r}")
            if not mu >= 0:
                raise ValueError(f"negative intersection measure for {pair!r}")
            key = frozenset((a, b))
            inter[key] = inter.get(key, 0.0) + float(mu)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "intersections", inter)

    @property
    def ids(self) -> list:
        return [cid for cid, _ in self.cells]

    @property
    def measures(self) -> np.ndarray:
        return np.array([mu for _, mu in self.cells])

    def index(self) -> dict:
        return {cid: i for i, (cid, _) in enumerate(self.cells)}

    def overlap_sums(self) -> np.ndarray:
        """For each cell, the total measure of its intersections with the others."""
        idx = self.index()
        s = np.zeros(len(self.cells))
        for pair, mu in self.intersections.items():
            a, b = tuple(pair)
            s[idx[a]] += mu
            s[idx[b]] += mu
        return s

    @property
    def exactness_defect(self) -> float:
        """max_v |sum_u mu(U_u & U_v) - mu(U_v)| / mu(U_v)."""
        if not self.cells:
            return 0.0
        mu = self.measures
        return float(np.max(np.abs(self.overlap_sums() - mu) / mu))

    @property
    def is_exact(self) -> bool:
        return self.exactness_defect <= EXACT_TOL

    def to_dict(self) -> dict:
        return {
            "cells": [{"id": cid, "measure": mu} for cid, mu in self.cells],
            "intersections": [
                {"a": a, "b": b, "measure": mu}
                for (a, b), mu in sorted((tuple(sorted(p, key=repr)), mu)
                                         for p, mu in self.intersections.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TwoFoldCover":
        try:
            cells = [(c["id"], c["measure"]) for c in data["cells"]]
            inter = {}
            for rec in data.get("intersections", []):
                key = frozenset((rec["a"], rec["b"]))
                inter[key] = inter.get(key, 0.0) + float(rec["measure"])
            return cls(tuple(cells), inter, bool(data.get("almost_two_fold", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid cover description: {exc}") from exc


@dataclass(frozen=True)
class NeumannProfile:
    """Per-cell lower bounds on Neumann values; ``eta`` is their minimum."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(x) for x in self.values)
        if not vals:
            raise ValueError("empty Neumann profile")
        if any(not x >= 0 for x in vals):
            raise ValueError("Neumann values must be nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def eta(self) -> float:
        return min(self.values)

    @classmethod
    def uniform(cls, value: float, count: int) -> "NeumannProfile":
        return cls((value,) * count)


def interval_neumann_value(length: float) -> float:
    """First nonzero Neumann eigenvalue of an interval, pi^2 / s^2."""
    return (math.pi / length) ** 2


def circle_eigenvalue(k: int, circumference: float) -> float:
    """k-th eigenvalue of a circle: (2 pi ceil(k/2) / L)^2."""
    return (2.0 * math.pi * math.ceil(k / 2) / circumference) ** 2


def cover_graph(c: TwoFoldCover) -> WeightedGraph:
    idx = c.index()
    edges = []
    for pair, mu in c.intersections.items():
        if mu > 0:
            a, b = tuple(pair)
            edges.append((idx[a], idx[b], mu))
    return WeightedGraph(len(c.cells), tuple(edges))


def cover_laplacian(c: TwoFoldCover) -> np.ndarray:
    g = cover_graph(c)
    deg = g.degrees()
    for i, (cid, _) in enumerate(c.cells):
        if deg[i] <= 0:
            raise IsolatedCell(cid)
    return normalized_laplacian(g)


def gram_matrix(c: TwoFoldCover) -> np.ndarray:
    """Matrix of inner products of the normalized cell indicators."""
    idx = c.index()
    mu = c.measures
    gram = np.eye(len(c.cells))
    for pair, m in c.intersections.items():
        a, b = tuple(pair)
        i, j = idx[a], idx[b]
        gram[i, j] = gram[j, i] = m / math.sqrt(mu[i] * mu[j])
    return gram


def gram_identity_defect(c: TwoFoldCover, require_exact: bool = True) -> float:
    """Max-norm of (2I - Gram) - cover Laplacian.

    Vanishes (to rounding) for exact covers.  With ``require_exact`` an
    ``InexactCover`` is raised instead of evaluating an inexact cover.
    """
    if require_exact and not c.is_exact:
        raise InexactCover(
            f"exactness defect {c.exactness_defect:.3e} exceeds {EXACT_TOL:.0e}")
    diff = 2.0 * np.eye(len(c.cells)) - gram_matrix(c) - cover_laplacian(c)
    return float(np.abs(diff).max(initial=0.0))


@dataclass
class TransferReport:
    k: list
    graph_values: list
    bounds: list
    holds: list
    slack: list
    eta: float
    skipped: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(not h for h in self.holds)

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "rows": [
                {"k": k, "lambda_cover": lg, "bound": b, "holds": h, "slack": s}
                for k, lg, b, h, s in zip(self.k, self.graph_values, self.bounds,
                                          self.holds, self.slack)
            ],
            "skipped_k": list(self.skipped),
            "violations": self.violations,
        }


def check_transfer(c: TwoFoldCover, continuum: Sequence[float],
                   profile: NeumannProfile, k_max: int,
                   tol: float = 1e-10) -> TransferReport:
    """Compare lambda_k of the cover Laplacian with 2 lambda_k(M) / eta.

    ``continuum`` lists lambda_0, lambda_1, ... of the underlying space.  The
    cover graph only has ``n`` eigenvalues, so indices ``k >= n`` are listed
    in ``skipped``.  ``slack`` is bound / lambda_k (inf when lambda_k = 0).
    """
    eta = profile.eta
    if not eta > 0:
        raise BadEta(f"eta must be positive, got {eta}")
    continuum = [float(x) for x in continuum]
    if any(b < a for a, b in zip(continuum, continuum[1:])):
        raise ValueError("continuum eigenvalues must be ascending")
    if len(continuum) <= k_max:
        raise ValueError(f"need continuum eigenvalues up to index {k_max}")
    spec = eigenvalues(cover_laplacian(c))
    n = len(spec)
    rep = TransferReport([], [], [], [], [], eta)
    for k in range(1, k_max + 1):
        if k >= n:
            rep.skipped.append(k)
            continue
        lam = float(spec.values[k])
        bound = 2.0 * continuum[k] / eta
        rep.k.append(k)
        rep.graph_values.append(lam)
        rep.bounds.append(bound)
        rep.holds.append(lam <= bound + tol + spec.residual_bound)
        rep.slack.append(bound / lam if lam > 0 else math.inf)
    return rep


# -- one-dimensional covers ---------------------------------------------------

def _arc_pieces(center, half_width, total_length, circle):
    """Split an arc into disjoint intervals inside [0, L)."""
    lo, hi = center - half_width, center + half_width
    if circle:
        if hi - lo >= total_length:
            return [(0.0, total_length)]
        lo_m = lo % total_length
        hi_m = lo_m + (hi - lo)
        if hi_m <= total_length:
            return [(lo_m, hi_m)]
        return [(lo_m, total_length), (0.0, hi_m - total_length)]
    lo, hi = max(lo, 0.0), min(hi, total_length)
    return [(lo, hi)] if hi > lo else []


def _overlap(p, q):
    return sum(max(0.0, min(b, d) - max(a, c)) for a, b in p for c, d in q)


def interval_cover_builder(total_length: float, arcs: Sequence,
                           circle: bool = True) -> TwoFoldCover:
    """Cover of a circle (or of the segment [0, L]) by arcs ``(center, half_width)``.

    Coverage multiplicity is checked on every elementary interval between
    arc endpoints; any interval not covered exactly twice raises
    ``NotTwoFold`` with its midpoint as witness.
    """
    L = float(total_length)
    if not L > 0:
        raise ValueError("total length must be positive")
    pieces = [_arc_pieces(float(c), float(h), L, circle) for c, h in arcs]
    breaks = sorted({0.0, L, *(x for p in pieces for iv in p for x in iv)})
    for a, b in zip(breaks, breaks[1:]):
        if b - a <= 1e-15 * L:
            continue
        mid = 0.5 * (a + b)
        count = sum(any(lo <= mid <= hi for lo, hi in p) for p in pieces)
        if count != 2:
            raise NotTwoFold(mid, count)
    cells = []
    for i, p in enumerate(pieces):
        mu = sum(b - a for a, b in p)
        if not mu > 0:
            raise ValueError(f"arc {i} has zero measure")
        cells.append((i, mu))
    inter = {}
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            mu = _overlap(pieces[i], pieces[j])
            if mu > 0:
                inter[frozenset((i, j))] = mu
    return TwoFoldCover(tuple(cells), inter)


def equal_arc_circle_cover(n: int, circumference: float) -> TwoFoldCover:
    """n arcs of length 2L/n centred at multiples of L/n."""
    step = circumference / n
    return interval_cover_builder(circumference, [(j * step, step) for j in range(n)])


def random_circle_cover(rng: np.random.Generator, n: int,
                        circumference: float) -> TwoFoldCover:
    """Arc i spans breakpoints p_i .. p_{i+2} of n random cut points."""
    p = np.sort(rng.uniform(0.0, circumference, n))
    arcs = []
    for i in range(n):
        a = p[i]
        b = p[(i + 2) % n] + (circumference if i + 2 >= n else 0.0)
        arcs.append((0.5 * (a + b), 0.5 * (b - a)))
    return interval_cover_builder(circumference, arcs, circle=True)


def random_interval_cover(rng: np.random.Generator, n: int,
                          length: float) -> TwoFoldCover:
    """Two-fold cover of [0, L] with n + 1 cells from n - 1 random cut points."""
    p = np.concatenate(([0.0], np.sort(rng.uniform(0.0, length, n - 1)), [length]))
    spans = [(p[0], p[1])]
    spans += [(p[i - 1], p[i + 1]) for i in range(1, n)]
    spans.append((p[n - 1], p[n]))
    arcs = [(0.5 * (a + b), 0.5 * (b - a)) for a, b in spans]
    return interval_cover_builder(length, arcs, circle=False)
