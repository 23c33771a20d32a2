"""Spectral transfer between spaces and graphs through 2-fold covers."""

from .cover import TwoFoldCover, check_transfer, cover_laplacian, gram_matrix
from .embedding import RotationSystem, cone_construction, euler_genus, genus_bound_evaluate
from .errors import SpectralError
from .graphs import Spectrum, WeightedGraph, eigenvalues, normalized_laplacian
from .mesh import SimplicialMesh, barycentric_cover, spectral_cut
from .metric import MetricGraphModel, continuum_spectrum, star_secular_solve

__version__ = "0.1.0"

__all__ = [
    "MetricGraphModel", "RotationSystem", "SimplicialMesh", "SpectralError",
    "Spectrum", "TwoFoldCover", "WeightedGraph", "barycentric_cover",
    "check_transfer", "cone_construction", "continuum_spectrum", "cover_laplacian",
    "eigenvalues", "euler_genus", "genus_bound_evaluate", "gram_matrix",
    "normalized_laplacian", "spectral_cut", "star_secular_solve",
]
