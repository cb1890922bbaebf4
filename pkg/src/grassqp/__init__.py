"""Quivers with potentials attached to Grassmannian cluster algebras."""

__version__ = "0.1.0"

from .quiver_core import Arrow, IcedQuiver, mutate_quiver  # noqa: E402
from .path_algebra import Path, PathSum, Potential  # noqa: E402
from .qp import IQP, mutate as mutate_iqp, split  # noqa: E402
from .postnikov import FaceDiagram, Variant, diagram_iqp, geometric_exchange, initial_diagram, validate  # noqa: E402
from .jacobian import IdealBasis, quotient_dimension, rigidity_certificate  # noqa: E402
from .cluster import Seed, explore_exchange_graph, mutate_seed  # noqa: E402

__all__ = [
    "Arrow",
    "FaceDiagram",
    "IQP",
    "IcedQuiver",
    "IdealBasis",
    "Path",
    "PathSum",
    "Potential",
    "Seed",
    "Variant",
    "diagram_iqp",
    "explore_exchange_graph",
    "geometric_exchange",
    "initial_diagram",
    "mutate_iqp",
    "mutate_quiver",
    "mutate_seed",
    "quotient_dimension",
    "rigidity_certificate",
    "split",
    "validate",
]
