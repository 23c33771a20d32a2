"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for malformed input, 3 for solver failures, 4 for length-balance
violations and 5 for degenerate meshes.
"""


class SpectralError(Exception):
    exit_code = 3


class ParseError(SpectralError, ValueError):
    exit_code = 2


class ZeroDegreeVertex(SpectralError, ValueError):
    def __init__(self, vertex):
        super().__init__(f"vertex {vertex} has zero weighted degree")
        self.vertex = vertex


class NoConvergence(SpectralError, RuntimeError):
    pass


class SizeCap(SpectralError, ValueError):
    pass


class ZeroFunction(SpectralError, ValueError):
    pass


class WeightedInput(SpectralError, ValueError):
    pass


class Disconnected(SpectralError, ValueError):
    pass


class TooSmall(SpectralError, ValueError):
    exit_code = 5


class IsolatedCell(SpectralError, ValueError):
    def __init__(self, cell_id):
        super().__init__(f"cell {cell_id!r} has no positive intersection")
        self.cell_id = cell_id


class InexactCover(SpectralError, ValueError):
    pass


class BadEta(SpectralError, ValueError):
    exit_code = 2


class NotTwoFold(SpectralError, ValueError):
    exit_code = 2

    def __init__(self, point, multiplicity):
        super().__init__(f"point {point!r} is covered {multiplicity} times")
        self.point = point
        self.multiplicity = multiplicity


class NonOrientableArtifact(SpectralError, ValueError):
    exit_code = 2


class UnknownFamily(SpectralError, KeyError):
    exit_code = 2

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class RootBracketFailure(SpectralError, RuntimeError):
    def __init__(self, lo, hi, flo, fhi):
        super().__init__(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}")
        self.interval = (lo, hi)
        self.values = (flo, fhi)


class NotLengthBalanced(SpectralError, ValueError):
    exit_code = 4


class NonManifoldFacet(SpectralError, ValueError):
    exit_code = 5

    def __init__(self, facet):
        super().__init__(f"facet {facet} is shared by more than two simplices")
        self.facet = facet


class DegenerateSimplex(SpectralError, ValueError):
    exit_code = 5

    def __init__(self, index):
        super().__init__(f"simplex {index} has (near) zero volume")
        self.index = index
