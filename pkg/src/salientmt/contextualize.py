"""Model-input construction for every system variant.

A contextualized example is the source sentence, optionally preceded by a
prefix (salient keywords, a shuffled copy of them, or another sentence from
the same pseudo-document) and a separator token. The target side is never
touched.
"""

import random
from dataclasses import dataclass
from typing import Sequence

from .errors import PreconditionError
from .ingest import BitextPair
from .util import stable_seed

DEFAULT_SEP = "<SEP>"

VARIANT_SENT = "sent"
VARIANT_2SENT = "2sent"


@dataclass(frozen=True)
class ContextualizedExample:
    example_id: int
    variant: str
    prefix_tokens: tuple[str, ...]
    sep: str | None
    src: str
    tgt: str
    doc_key: str = ""

    def __post_init__(self) -> None:
        if self.prefix_tokens and not self.sep:
            raise PreconditionError("a prefixed example needs a separator token")
        if self.sep and not self.prefix_tokens:
            raise PreconditionError("a separator without a prefix is meaningless")

    def render(self) -> str:
        """The effective model input: prefix words, separator, then source."""
        if not self.prefix_tokens:
            return self.src
        return " ".join([*self.prefix_tokens, self.sep, self.src])


def _check_prefix_args(
    pair: BitextPair, words: Sequence[str], sep: str
) -> None:
    if not words:
        raise PreconditionError(f"empty prefix for example {pair.id}")
    if not sep:
        raise PreconditionError("separator token must be non-empty")
    if sep in pair.src:
        raise PreconditionError(
            f"separator {sep!r} occurs in source of example {pair.id}; "
            "splitting the output would be corrupted"
        )
    if sep in " ".join(words):
        raise PreconditionError(
            f"separator {sep!r} occurs in the prefix of example {pair.id}"
        )


def build_salient_prefix(
    pair: BitextPair,
    keywords: Sequence[tuple[str, float]],
    sep: str = DEFAULT_SEP,
    *,
    doc_key: str = "",
    variant: str = "salient",
) -> ContextualizedExample:
    """Prefix the source with keyword words in ranked order."""
    words = [w for w, _ in keywords]
    _check_prefix_args(pair, words, sep)
    return ContextualizedExample(
        pair.id, variant, tuple(words), sep, pair.src, pair.tgt, doc_key
    )


def build_shuffled_prefix(
    pair: BitextPair,
    keywords: Sequence[tuple[str, float]],
    sep: str = DEFAULT_SEP,
    seed: int = 0,
    *,
    doc_key: str = "",
    variant: str = "salient-shuf",
) -> ContextualizedExample:
    """Prefix with the same keyword bag, permuted per example.

    The permutation is drawn from an RNG keyed on (seed, example id) so
    output does not depend on processing order.
    """
    words = [w for w, _ in keywords]
    _check_prefix_args(pair, words, sep)
    rng = random.Random(stable_seed("shuffle", seed, pair.id))
    rng.shuffle(words)
    return ContextualizedExample(
        pair.id, variant, tuple(words), sep, pair.src, pair.tgt, doc_key
    )


def build_2sent_prefix(
    pair: BitextPair,
    doc_pairs: Sequence[BitextPair],
    sep: str = DEFAULT_SEP,
    seed: int = 0,
    *,
    doc_key: str = "",
) -> ContextualizedExample:
    """Prefix with one uniformly sampled other sentence from the same document."""
    candidates = [p for p in doc_pairs if p.id != pair.id]
    if not candidates:
        raise PreconditionError(f"no context sentence available for example {pair.id}")
    rng = random.Random(stable_seed("2sent", seed, pair.id))
    chosen = rng.choice(candidates)
    _check_prefix_args(pair, [chosen.src], sep)
    return ContextualizedExample(
        pair.id, VARIANT_2SENT, (chosen.src,), sep, pair.src, pair.tgt, doc_key
    )


def build_sent(pair: BitextPair, *, doc_key: str = "") -> ContextualizedExample:
    """Context-agnostic variant: the source sentence unchanged."""
    return ContextualizedExample(
        pair.id, VARIANT_SENT, (), None, pair.src, pair.tgt, doc_key
    )


def split_on_sep(output: str, sep: str) -> str:
    """Text after the first separator occurrence, leading whitespace trimmed.

    Returns the whole string when the separator is absent.
    """
    idx = output.find(sep)
    if idx < 0:
        return output
    return output[idx + len(sep):].lstrip()


def example_to_row(example: ContextualizedExample) -> dict:
    return {
        "id": example.example_id,
        "doc_key": example.doc_key,
        "variant": example.variant,
        "prefix": list(example.prefix_tokens),
        "sep": example.sep,
        "src": example.src,
        "tgt": example.tgt,
        "input": example.render(),
    }


def example_from_row(row: dict) -> ContextualizedExample:
    return ContextualizedExample(
        int(row["id"]),
        str(row.get("variant", "")),
        tuple(row.get("prefix", ())),
        row.get("sep"),
        str(row["src"]),
        str(row.get("tgt", "")),
        str(row.get("doc_key", "")),
    )
