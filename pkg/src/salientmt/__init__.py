"""Pseudo-document saliency pipelines and disambiguation-aware MT evaluation."""

__version__ = "0.1.0"

from .contextualize import ContextualizedExample, split_on_sep
from .ingest import BitextPair, PseudoDocument
from .saliency import KeywordList, TfidfModel, TokenizedDoc
from .testset import RawDocument, WsdRecord
from .wsd_eval import EvalLabel, SenseInventory, WsdReport

__all__ = [
    "BitextPair",
    "ContextualizedExample",
    "EvalLabel",
    "KeywordList",
    "PseudoDocument",
    "RawDocument",
    "SenseInventory",
    "TfidfModel",
    "TokenizedDoc",
    "WsdRecord",
    "WsdReport",
    "split_on_sep",
    "__version__",
]
