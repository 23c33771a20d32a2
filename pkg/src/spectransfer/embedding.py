"""Cellular embeddings of graphs encoded as rotation systems.

Darts (half-edges) are integers.  ``rotations[v]`` lists the darts leaving
vertex ``v`` in cyclic order and ``involution[d]`` is the reverse of dart
``d``.  Faces are traced with the usual rule: the dart following ``d`` on
its face is the rotation successor of ``involution[d]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cover import TwoFoldCover
from .errors import NonOrientableArtifact, ParseError, UnknownFamily
from .graphs import (Spectrum, WeightedGraph, eigenvalues, lowest_eigenvalues,
                     normalized_laplacian)


@dataclass(frozen=True)
class RotationSystem:
    rotations: tuple
    involution: tuple

    def __post_init__(self):
        rot = tuple(tuple(int(d) for d in r) for r in self.rotations)
        inv = tuple(int(d) for d in self.involution)
        n_darts = len(inv)
        seen = [False] * n_darts
        for r in rot:
            for d in r:
                if not 0 <= d < n_darts or seen[d]:
                    raise ValueError(f"dart {d} missing from involution or repeated")
                seen[d] = True
        if not all(seen):
            raise ValueError(f"dart {seen.index(False)} appears in no rotation")
        for d, e in enumerate(inv):
            if not 0 <= e < n_darts or e == d or inv[e] != d:
                raise ValueError(f"involution is not a fixed-point-free pairing at {d}")
        object.__setattr__(self, "rotations", rot)
        object.__setattr__(self, "involution", inv)

    # derived permutations --------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.rotations)

    @property
    def n_darts(self) -> int:
        return len(self.involution)

    @property
    def n_edges(self) -> int:
        return self.n_darts // 2

    def tails(self) -> list:
        tail = [0] * self.n_darts
        for v, r in enumerate(self.rotations):
            for d in r:
                tail[d] = v
        return tail

    def successors(self) -> list:
        succ = [0] * self.n_darts
        for r in self.rotations:
            for i, d in enumerate(r):
                succ[d] = r[(i + 1) % len(r)]
        return succ

    def edge_pairs(self) -> list:
        """(tail, head) of one dart per edge, in dart order."""
        tail = self.tails()
        return [(tail[d], tail[e]) for d, e in enumerate(self.involution) if d < e]

    def graph(self) -> WeightedGraph:
        """Underlying simple graph with unit weights; raises on loops/multi-edges."""
        pairs = self.edge_pairs()
        keys = set()
        for u, v in pairs:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in keys:
                raise ValueError(f"parallel edges between {u} and {v}")
            keys.add(key)
        return WeightedGraph(self.n_vertices, tuple(pairs))

    def is_connected(self) -> bool:
        n = self.n_vertices
        if n == 0:
            return False
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edge_pairs():
            parent[find(u)] = find(v)
        return len({find(x) for x in range(n)}) == 1

    def relabeled(self, vertex_perm, dart_perm=None) -> "RotationSystem":
        """Renumber vertices (``vertex_perm[old] = new``) and optionally darts."""
        nd = self.n_darts
        dp = list(range(nd)) if dart_perm is None else list(dart_perm)
        rot = [None] * self.n_vertices
        for v, r in enumerate(self.rotations):
            rot[vertex_perm[v]] = tuple(dp[d] for d in r)
        inv = [0] * nd
        for d, e in enumerate(self.involution):
            inv[dp[d]] = dp[e]
        return RotationSystem(tuple(rot), tuple(inv))

    def rotated(self, shifts) -> "RotationSystem":
        """Same map with each cyclic order started at a different dart."""
        rot = tuple(r[s % len(r):] + r[:s % len(r)] if r else r
                    for r, s in zip(self.rotations, shifts))
        return RotationSystem(rot, self.involution)

    # constructors ----------------------------------------------------------

    @classmethod
    def from_neighbor_orders(cls, orders) -> "RotationSystem":
        """Build from the cyclic order of neighbours around every vertex.

        The edge ``{u, v}`` with ``u < v`` gets darts ``2e`` (u to v) and
        ``2e + 1`` (v to u), ``e`` being its rank in sorted order.
        """
        edges = sorted({(min(u, v), max(u, v))
                        for u, nbrs in enumerate(orders) for v in nbrs})
        eid = {e: i for i, e in enumerate(edges)}

        def dart(u, v):
            e = eid[(min(u, v), max(u, v))]
            return 2 * e if u < v else 2 * e + 1

        rot = tuple(tuple(dart(u, v) for v in nbrs) for u, nbrs in enumerate(orders))
        inv = tuple(d ^ 1 for d in range(2 * len(edges)))
        return cls(rot, inv)

    @classmethod
    def from_faces(cls, n: int, faces) -> "RotationSystem":
        """Build the map whose faces are the given vertex cycles.

        Faces must be coherently oriented: each directed edge is used by
        exactly one face.  For consecutive ``u, v, w`` on a face the dart
        ``v -> w`` follows ``v -> u`` in the rotation at ``v``.
        """
        directed = set()
        for f in faces:
            k = len(f)
            for i in range(k):
                uv = (f[i], f[(i + 1) % k])
                if uv in directed:
                    raise ValueError(f"directed edge {uv} used by two faces")
                directed.add(uv)
        edges = sorted({(min(u, v), max(u, v)) for u, v in directed})
        eid = {e: i for i, e in enumerate(edges)}

        def dart(u, v):
            e = eid[(min(u, v), max(u, v))]
            return 2 * e if u < v else 2 * e + 1

        succ = {}
        for f in faces:
            k = len(f)
            for i in range(k):
                u, v, w = f[i - 1], f[i], f[(i + 1) % k]
                succ[dart(v, u)] = dart(v, w)
        out = [[] for _ in range(n)]
        for u, v in directed:
            out[u].append(dart(u, v))
        rot = []
        for v in range(n):
            if not out[v]:
                rot.append(())
                continue
            start = min(out[v])
            cyc = [start]
            while True:
                nxt = succ.get(cyc[-1])
                if nxt is None:
                    raise ValueError(f"faces do not close up around vertex {v}")
                if nxt == start:
                    break
                cyc.append(nxt)
            if len(cyc) != len(out[v]):
                raise ValueError(f"neighbourhood of vertex {v} is not a disk")
            rot.append(tuple(cyc))
        inv = tuple(d ^ 1 for d in range(2 * len(edges)))
        return cls(tuple(rot), inv)

    def to_dict(self) -> dict:
        pairs = [[d, e] for d, e in enumerate(self.involution) if d < e]
        return {"rotations": [list(r) for r in self.rotations], "involution": pairs}

    @classmethod
    def from_dict(cls, data) -> "RotationSystem":
        try:
            rot = [list(r) for r in data["rotations"]]
            n_darts = sum(len(r) for r in rot)
            inv = [-1] * n_darts
            for a, b in data["involution"]:
                if not (0 <= a < n_darts and 0 <= b < n_darts):
                    raise ValueError(f"dart pair ({a}, {b}) out of range")
                inv[a], inv[b] = b, a
            if -1 in inv:
                raise ValueError(f"dart {inv.index(-1)} has no partner")
            return cls(tuple(map(tuple, rot)), tuple(inv))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid rotation system: {exc}") from exc


def trace_faces(r: RotationSystem) -> list:
    """Face boundary walks, each a list of darts; every dart lies in one walk."""
    succ = r.successors()
    inv = r.involution
    seen = [False] * r.n_darts
    faces = []
    for d0 in range(r.n_darts):
        if seen[d0]:
            continue
        walk, d = [], d0
        while not seen[d]:
            seen[d] = True
            walk.append(d)
            d = succ[inv[d]]
        faces.append(walk)
    return faces


def face_vertices(r: RotationSystem, walk) -> list:
    tail = r.tails()
    return [tail[d] for d in walk]


def euler_genus(r: RotationSystem) -> int:
    """Genus of the orientable surface carrying the map, from V - E + F."""
    if not r.is_connected():
        raise ValueError("rotation system is not connected")
    twice = 2 - r.n_vertices + r.n_edges - len(trace_faces(r))
    if twice % 2 or twice < 0:
        raise NonOrientableArtifact(f"2 - V + E - F = {twice} is not an even nonnegative integer")
    return twice // 2


# -- cone construction ---------------------------------------------------------

def cone_length(d_max: int) -> float:
    """Length of cone edges: 1 / (2 cos(pi / (2 d_max)))."""
    if d_max < 2:
        raise ValueError("cone length needs d_max >= 2")
    return 1.0 / (2.0 * math.cos(math.pi / (2 * d_max)))


@dataclass(frozen=True)
class TriangleGeometry:
    d_max: int
    cone_length: float
    base_angle: float
    apex_angle: float
    area: float

    @property
    def base_angle_ok(self) -> bool:
        return math.isclose(self.base_angle, math.pi / (2 * self.d_max),
                            rel_tol=1e-12, abs_tol=1e-15)


def triangle_geometry(d_max: int) -> TriangleGeometry:
    """Isosceles triangle with a unit graph edge and two cone edges.

    The angle at the graph vertices is recovered from the side lengths by
    the law of cosines, so that ``base_angle_ok`` is an actual check.
    """
    L = cone_length(d_max)
    base = math.acos((1.0 + L * L - L * L) / (2.0 * L))
    apex = math.acos((2.0 * L * L - 1.0) / (2.0 * L * L))
    s = 0.5 * (1.0 + 2.0 * L)
    area = math.sqrt(max(s * (s - 1.0) * (s - L) ** 2, 0.0))
    return TriangleGeometry(d_max, L, base, apex, area)


@dataclass
class EmbeddedConedGraph:
    """The base map together with its coned weak triangulation.

    ``coned`` is the rotation system of the coned multigraph: G-vertices
    keep their numbers and the cone vertex of face ``i`` is ``n + i``.  Darts
    below ``2 * base_edges`` are edges of G, the others are cone edges.
    """

    base: RotationSystem
    graph: WeightedGraph
    faces: list
    coned: RotationSystem
    coned_faces: list
    cone_edges: list
    geometry: TriangleGeometry

    @property
    def n_base_darts(self) -> int:
        return self.base.n_darts

    def is_graph_dart(self, d: int) -> bool:
        return d < self.n_base_darts

    def edge_length(self, d: int) -> float:
        return 1.0 if self.is_graph_dart(d) else self.geometry.cone_length

    def triangles(self) -> list:
        """(cone vertex, u, v) for every coned face, u -> v its graph edge."""
        tail = self.coned.tails()
        out = []
        for walk in self.coned_faces:
            g = [d for d in walk if self.is_graph_dart(d)]
            c = [tail[d] for d in walk if tail[d] >= self.graph.n]
            out.append((c[0] if c else None, tail[g[0]], tail[self.coned.involution[g[0]]]))
        return out

    def coned_valences(self) -> np.ndarray:
        return np.array([len(r) for r in self.coned.rotations])

    def check(self) -> dict:
        """Evaluate the weak-triangulation properties of the coned map."""
        faces_deg3 = all(len(w) == 3 for w in self.coned_faces)
        one_edge = all(sum(self.is_graph_dart(d) for d in w) == 1
                       for w in self.coned_faces)
        dv = self.coned_valences()[: self.graph.n]
        doubled = bool(np.array_equal(dv, 2 * self.graph.valences()))
        mult = sum(len(w) for w in self.faces) == 2 * self.graph.m
        return {"faces_degree_3": faces_deg3, "one_graph_edge_per_face": one_edge,
                "valence_doubled": doubled, "dart_count": mult}


def cone_construction(r: RotationSystem) -> EmbeddedConedGraph:
    """Cone every face over its boundary walk.

    Each corner of a face (a vertex occurrence on its walk) receives one
    cone edge, so a vertex visited twice by a walk gets two parallel cone
    edges to the same cone vertex.
    """
    g = r.graph()
    n = r.n_vertices
    faces = trace_faces(r)
    inv = r.involution
    tail = r.tails()
    n_darts = r.n_darts
    after = {}           # G-dart e -> cone dart inserted right after e at tail(e)
    cone_rot = []
    cone_edges = []
    next_dart = n_darts
    for fi, walk in enumerate(faces):
        k = len(walk)
        at_cone = []
        for j in range(k):
            corner_dart = inv[walk[j]]          # at head of walk[j]
            a, b = next_dart, next_dart + 1     # a: vertex -> cone, b: cone -> vertex
            next_dart += 2
            after[corner_dart] = a
            at_cone.append(b)
            cone_edges.append((n + fi, tail[corner_dart]))
        cone_rot.append(tuple(reversed(at_cone)))
    rot = []
    for v in range(n):
        new = []
        for e in r.rotations[v]:
            new.append(e)
            new.append(after[e])
        rot.append(tuple(new))
    rot.extend(cone_rot)
    total = next_dart
    cinv = list(inv) + [0] * (total - n_darts)
    for d in range(n_darts, total, 2):
        cinv[d], cinv[d + 1] = d + 1, d
    coned = RotationSystem(tuple(rot), tuple(cinv))
    dm = g.d_max
    geom = triangle_geometry(dm if dm >= 2 else 2)
    return EmbeddedConedGraph(r, g, faces, coned, trace_faces(coned), cone_edges, geom)


def star_cover(e: EmbeddedConedGraph) -> TwoFoldCover:
    """Open stars of the graph vertices in the coned surface.

    Every coned triangle has exactly two graph vertices (the ends of its
    graph edge) and lies in both their stars, contributing one triangle
    area to each star and to their intersection.
    """
    area = e.geometry.area
    n = e.graph.n
    mu = np.zeros(n)
    inter = {}
    for _, u, v in e.triangles():
        mu[u] += area
        mu[v] += area
        key = frozenset((u, v))
        inter[key] = inter.get(key, 0.0) + area
    return TwoFoldCover(tuple((v, mu[v]) for v in range(n)), inter)


def subdivided_star_graph(d: int) -> WeightedGraph:
    """Star with d edges, each split by a midpoint; centre 0, midpoints 1..d."""
    edges = [(0, i) for i in range(1, d + 1)] + [(i, d + i) for i in range(1, d + 1)]
    return WeightedGraph(2 * d + 1, tuple(edges))


def subdivided_star_spectrum(d: int) -> Spectrum:
    if d < 1:
        raise ValueError("d must be >= 1")
    return eigenvalues(normalized_laplacian(subdivided_star_graph(d)))


@dataclass
class GenusBoundReport:
    n: int
    d_max: int
    genus: int
    k: list
    eigenvalues: list
    ratios: list = field(default_factory=list)

    @property
    def sup_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def argsup(self) -> int:
        return self.k[int(np.argmax(self.ratios))] if self.ratios else 0

    def to_dict(self) -> dict:
        return {
            "n": self.n, "d_max": self.d_max, "genus": self.genus,
            "rows": [{"k": k, "lambda_nr": lam, "ratio": r}
                     for k, lam, r in zip(self.k, self.eigenvalues, self.ratios)],
            "sup_ratio": self.sup_ratio, "argsup_k": self.argsup,
        }


def genus_bound_evaluate(r: RotationSystem, k_max: int) -> GenusBoundReport:
    """Ratios lambda_k^nr * n / (d_max (g + k)) for k = 1..k_max.

    ``g`` is the genus of the supplied embedding, an upper bound on the
    graph's minimum genus.  Nothing is asserted about the ratios; their
    supremum is the measured constant.
    """
    g = r.graph()
    if not g.is_connected():
        raise ValueError("graph must be connected")
    n = g.n
    if not 1 <= k_max <= n - 1:
        raise ValueError(f"k_max must lie in [1, {n - 1}]")
    genus = euler_genus(r)
    spec = lowest_eigenvalues(normalized_laplacian(g), k_max + 1)
    dm = g.d_max
    rep = GenusBoundReport(n, dm, genus, [], [])
    for k in range(1, k_max + 1):
        lam = float(spec.values[k])
        rep.k.append(k)
        rep.eigenvalues.append(lam)
        rep.ratios.append(lam * n / (dm * (genus + k)))
    return rep


# -- benchmark families --------------------------------------------------------

def _grid_squares(m: int, wrap: bool):
    faces = []
    last = m if wrap else m - 1
    for i in range(last):
        for j in range(last):
            a = i * m + j
            b = i * m + (j + 1) % m
            c = ((i + 1) % m) * m + (j + 1) % m
            d = ((i + 1) % m) * m + j
            faces.append((a, b, c, d))
    return faces


def planar_grid(m: int) -> RotationSystem:
    """m x m grid in the plane (outer face included)."""
    if m < 2:
        raise ValueError("planar grid needs m >= 2")
    faces = _grid_squares(m, wrap=False)
    ccw = ([j for j in range(m)]
           + [i * m + m - 1 for i in range(1, m)]
           + [(m - 1) * m + j for j in range(m - 2, -1, -1)]
           + [i * m for i in range(m - 2, 0, -1)])
    faces.append(tuple(reversed(ccw)))
    return RotationSystem.from_faces(m * m, faces)


def toroidal_grid(m: int) -> RotationSystem:
    """m x m grid with both directions wrapped; every face a square."""
    if m < 3:
        raise ValueError("toroidal grid needs m >= 3")
    return RotationSystem.from_faces(m * m, _grid_squares(m, wrap=True))


def cycle_map(n: int) -> RotationSystem:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return RotationSystem.from_faces(n, [tuple(range(n)), tuple(reversed(range(n)))])


def complete_planar_k4() -> RotationSystem:
    """K_4 drawn as a triangle with a central vertex 0."""
    faces = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    return RotationSystem.from_faces(4, faces)


def double_torus_grid(m: int) -> RotationSystem:
    """Connected sum of two m x m toroidal grids.

    One square is removed from each torus and the two square holes are
    joined by a tube made of four quadrilaterals.
    """
    if m < 3:
        raise ValueError("double torus grid needs m >= 3")
    n = m * m
    first = _grid_squares(m, wrap=True)
    second = [tuple(v + n for v in f) for f in first]
    hole_a, hole_b = first.pop(0), second.pop(0)
    tube = []
    for i in range(4):
        j = (-i - 1) % 4
        tube.append((hole_a[i], hole_a[(i + 1) % 4], hole_b[j], hole_b[(j + 1) % 4]))
    return RotationSystem.from_faces(2 * n, first + second + tube)


FAMILIES = {
    "planar_grid": planar_grid,
    "toroidal_grid": toroidal_grid,
    "cycle": cycle_map,
    "complete_planar_k4": lambda size=None: complete_planar_k4(),
    "double_torus_grid": double_torus_grid,
}


def family_generators(name: str, size: int) -> RotationSystem:
    try:
        build = FAMILIES[name]
    except KeyError:
        raise UnknownFamily(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    return build(size)


def random_rotation_system(rng: np.random.Generator, n: int,
                           extra_edges: int = 0) -> RotationSystem:
    """Random connected simple graph (random tree plus extra edges) with
    uniformly shuffled cyclic orders."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    tries = 0
    while len(edges) < n - 1 + extra_edges and tries < 50 * (extra_edges + 1):
        u, v = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        edges.add((u, v))
        tries += 1
    nbrs = [[] for _ in range(n)]
    for u, v in sorted(edges):
        nbrs[u].append(v)
        nbrs[v].append(u)
    orders = [list(rng.permutation(x)) for x in nbrs]
    return RotationSystem.from_neighbor_orders(orders)
