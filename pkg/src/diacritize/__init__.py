"""diacritize: learn to restore missing diacritics in text.

Builds restoration datasets from any diacritically marked corpus, trains
n-gram, linear-classifier and embedding-based restorers, evaluates them with
per-wordkey confusion matrices, and restores whole texts end to end.
"""

from .errors import DataError, FoldError, ModelError, ParseError

__version__ = "0.1.0"

__all__ = ["DataError", "FoldError", "ModelError", "ParseError", "__version__"]
