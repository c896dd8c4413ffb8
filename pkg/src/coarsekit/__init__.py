"""Finite-scale computational coarse geometry."""

from .coarse_map import CoarseMap, closeness, equivalence_defects, expansion_modulus, graph_of, max_fiber
from .entourage import (Entourage, PartialTranslation, adjoint, asymptotic_parameter, compose,
                        decompose, diagonal, max_degree)
from .operator_model import (BandOperator, alpha0, alpha0_injectivity_check, conjugate,
                             extract_coarse_relation, isometry_from_translation, plan_uniform_cover,
                             propagation, support, uniform_cover)
from .pipeline import pipeline_theorem_a
from .space import (HeightFunction, MetricSpace, PointSubset, components_at_scale, doubling,
                    growth_profile, interval, path_graph, space_of_height, subspace)
from .uf_homology import (H0Class, HallCertificate, UFChain, bijection_to_cycle, bijectivize, boundary,
                          boundary_of_translation, class_witness, h0_class, pushforward)

__version__ = "0.1.0"

__all__ = [
    "adjoint",
    "alpha0",
    "alpha0_injectivity_check",
    "asymptotic_parameter",
    "BandOperator",
    "bijection_to_cycle",
    "bijectivize",
    "boundary",
    "boundary_of_translation",
    "class_witness",
    "closeness",
    "CoarseMap",
    "components_at_scale",
    "compose",
    "conjugate",
    "decompose",
    "diagonal",
    "doubling",
    "Entourage",
    "equivalence_defects",
    "expansion_modulus",
    "extract_coarse_relation",
    "graph_of",
    "growth_profile",
    "h0_class",
    "H0Class",
    "HallCertificate",
    "HeightFunction",
    "interval",
    "isometry_from_translation",
    "max_degree",
    "max_fiber",
    "MetricSpace",
    "PartialTranslation",
    "path_graph",
    "pipeline_theorem_a",
    "plan_uniform_cover",
    "PointSubset",
    "propagation",
    "pushforward",
    "space_of_height",
    "subspace",
    "support",
    "UFChain",
    "uniform_cover",
]
