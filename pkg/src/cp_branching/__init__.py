"""
cp-branching - circle packings with traditional and generalized branching.

Computes maximal and branched circle packings for combinatorial discs, annuli
and tori, inserts singular and shifted black holes, measures layout holonomy
and searches branching parameters that annihilate it.
"""

__version__ = "0.1.0"

# Make configuration easily accessible
from .config import get_settings

__all__ = ["get_settings"]
