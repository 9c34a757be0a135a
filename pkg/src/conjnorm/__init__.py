"""
Conjnorm: conjugation-invariant norms and metric approximation witnesses

Word norms on finite permutation groups, bounds for conjugation-invariant
word norms on free groups, checks for weak sofic, LEF and residually
finite witnesses, and finite-quotient probes for closure questions.
"""

__version__ = "0.1.0"
__author__ = "Conjnorm Contributors"

from .config import ConjnormConfig
from .logging_config import setup_logging

__all__ = [
    "ConjnormConfig",
    "setup_logging",
]
