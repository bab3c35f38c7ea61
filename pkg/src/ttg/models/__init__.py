"""Executable tensor triangulated categories: algebra and poset backends."""

from .algebra import AlgebraModel
from .core import (
    ChainMap,
    Complex,
    Model,
    cone,
    cone_inclusion,
    cone_projection,
    direct_sum,
    identity,
    scalar_map,
    suspend,
    suspend_map,
    suspension_iso_left,
    suspension_iso_right,
    tensor,
    tensor_maps,
    tensor_power,
    zero_complex,
    zero_map,
)
from .homotopy import (
    HomSpace,
    Reduction,
    evaluate,
    find_isomorphism,
    hom_dim,
    hom_space,
    homology_dims,
    induced_on_homology,
    is_acyclic_at,
    is_nullhomotopic,
    is_zero,
    minimize,
    support,
)
from .poset import FinitePoset, PosetModel, Representation, chain_poset

__all__ = [
    "AlgebraModel",
    "ChainMap",
    "Complex",
    "FinitePoset",
    "HomSpace",
    "Model",
    "PosetModel",
    "Reduction",
    "Representation",
    "chain_poset",
    "cone",
    "cone_inclusion",
    "cone_projection",
    "direct_sum",
    "evaluate",
    "find_isomorphism",
    "hom_dim",
    "hom_space",
    "homology_dims",
    "identity",
    "induced_on_homology",
    "is_acyclic_at",
    "is_nullhomotopic",
    "is_zero",
    "minimize",
    "scalar_map",
    "support",
    "suspend",
    "suspend_map",
    "suspension_iso_left",
    "suspension_iso_right",
    "tensor",
    "tensor_maps",
    "tensor_power",
    "zero_complex",
    "zero_map",
]
