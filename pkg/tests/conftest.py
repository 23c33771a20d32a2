import itertools

import numpy as np
import pytest

from spectransfer import metric as mt
from spectransfer.graphs import WeightedGraph

ACCEPTANCE = {}


def record(criterion: int, ok: bool, detail: str):
    """Store the outcome of an acceptance criterion and print it."""
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


def model_suite():
    """Cycles C3..C12, unit stars S1..S6, the subdivided theta graph and
    50 random length-balanced models."""
    suite = [(f"C{n}", mt.cycle_model(n)) for n in range(3, 13)]
    suite += [(f"S{d}", mt.MetricStar((1.0,) * d).model()) for d in range(1, 7)]
    suite.append(("theta", mt.theta_model()))
    rng = np.random.default_rng(7)
    for i in range(50):
        n = int(rng.integers(3, 13))
        extra = int(rng.integers(0, 6))
        suite.append((f"rand{i}", mt.random_balanced_model(rng, n, extra)))
    return suite


@pytest.fixture(scope="session")
def suite():
    return model_suite()


def brute_force_conductance(g: WeightedGraph):
    """Minimum conductance over all 2^(n-1) - 1 bipartitions (vertex 0 on side A)."""
    d = g.degrees()
    total = d.sum()
    best = np.inf
    for bits in itertools.product((0, 1), repeat=g.n - 1):
        side = np.array((0,) + bits, dtype=bool)
        if side.all() or not side.any():
            continue
        cut = sum(w for u, v, w in g.edges if side[u] != side[v])
        vs = d[side].sum()
        best = min(best, cut / min(vs, total - vs))
    return best
