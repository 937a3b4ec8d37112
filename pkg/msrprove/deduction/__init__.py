"""Dolev-Yao adversary deduction: analysis-closed knowledge and bounded construction."""

from msrprove.deduction.knowledge import (
    EMPTY_KNOWLEDGE,
    Deducer,
    Derivation,
    DerivationStep,
    Instance,
    KnowledgeBase,
    Shape,
    derivable,
    saturate,
)

__all__ = [
    "Deducer",
    "Derivation",
    "DerivationStep",
    "EMPTY_KNOWLEDGE",
    "Instance",
    "KnowledgeBase",
    "Shape",
    "derivable",
    "saturate",
]
