"""Finite topped PCMs, separating relations, morphisms and a ticket-lock explorer."""
from .core import (
    TOP,
    LawCheck,
    LawReport,
    PcmStructure,
    PcmUsageError,
    SubjState,
    check_pcm_laws,
    is_separate,
    join,
    product,
    star_split,
    subjective_states,
)
from .morphism import Morphism, apply, check_invertible_morph, check_morphism_laws, compose
from .seprel import SepRel, check_invertible_rel, check_seprel_laws, tern_holds

__version__ = "0.1.0"

__all__ = [
    "TOP",
    "LawCheck",
    "LawReport",
    "PcmStructure",
    "PcmUsageError",
    "SubjState",
    "check_pcm_laws",
    "is_separate",
    "join",
    "product",
    "star_split",
    "subjective_states",
    "Morphism",
    "apply",
    "check_invertible_morph",
    "check_morphism_laws",
    "compose",
    "SepRel",
    "check_invertible_rel",
    "check_seprel_laws",
    "tern_holds",
]
