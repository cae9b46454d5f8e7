"""Finiteness, Galois theory and truncated profinite fundamental groups of
presheaf toposes on finite sites."""

from .errors import CapExceeded, InputError, MathError, ToposError
from .finiteness import analyze, connected_components, is_decidable, is_locally_finite, kuratowski_check
from .galois import aut_group, fibre, galois_covering, is_galois, monodromy, reconstruct
from .grp import FiniteGroup, FinitePresentation, low_index_reps, truncated_completion, validate_group
from .pi1 import bg_roundtrip, enumerate_galois, fundamental_group, induced_map, pi1_presentation
from .site import FiniteCategory, Presheaf, PresheafMap, SubPresheaf, validate_category, validate_presheaf

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "FiniteCategory",
    "FiniteGroup",
    "FinitePresentation",
    "InputError",
    "MathError",
    "Presheaf",
    "PresheafMap",
    "SubPresheaf",
    "ToposError",
    "analyze",
    "aut_group",
    "bg_roundtrip",
    "connected_components",
    "enumerate_galois",
    "fibre",
    "fundamental_group",
    "galois_covering",
    "induced_map",
    "is_decidable",
    "is_galois",
    "is_locally_finite",
    "kuratowski_check",
    "low_index_reps",
    "monodromy",
    "pi1_presentation",
    "reconstruct",
    "truncated_completion",
    "validate_category",
    "validate_group",
    "validate_presheaf",
]
