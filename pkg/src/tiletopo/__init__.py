"""Self-affine tiles from upper-triangular matrices: construction, topology criteria
and a numerical prism-to-tile homeomorphism."""

__version__ = "0.1.0"

from .criteria import Classification, classify, criterion_value
from .prism import PathProfile, Prism, base_prism, compose_h, iterate_once, profile_from_pair
from .tile import SelfAffinePair, approximate, digit_expansion_point

__all__ = [
    "Classification",
    "PathProfile",
    "Prism",
    "SelfAffinePair",
    "approximate",
    "base_prism",
    "classify",
    "compose_h",
    "criterion_value",
    "digit_expansion_point",
    "iterate_once",
    "profile_from_pair",
]
