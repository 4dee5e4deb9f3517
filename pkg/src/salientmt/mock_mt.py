"""A deterministic dictionary translator for end-to-end pipeline tests.

It copies tokens verbatim except for ambiguous words, which it renders
according to the sense whose cue words appear in the example's prefix
(context-aware mode) or the first listed sense (context-agnostic mode).
This is pipeline validation machinery, not a translation model.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .contextualize import ContextualizedExample
from .errors import InputError, PreconditionError
from .saliency import tokenize_cased
from .util import read_jsonl

MODE_AWARE = "context_aware"
MODE_AGNOSTIC = "context_agnostic"


@dataclass(frozen=True)
class LexiconSense:
    cluster_id: str
    target: str
    cues: frozenset[str]


@dataclass(frozen=True)
class MockLexicon:
    """Ambiguous word -> senses; the first listed sense is the default."""

    entries: Mapping[str, tuple[LexiconSense, ...]]

    def __post_init__(self) -> None:
        for word, senses in self.entries.items():
            if len(senses) < 2:
                raise InputError(f"lexicon word {word!r} has fewer than two senses")
            seen: set[str] = set()
            for sense in senses:
                clash = seen & sense.cues
                if clash:
                    raise InputError(
                        f"lexicon word {word!r}: cue(s) {sorted(clash)} shared "
                        "across senses"
                    )
                seen |= sense.cues


def load_lexicon(path: str | Path) -> MockLexicon:
    """Read JSONL: {word, senses: [{cluster_id, target, cues: [...]}]}."""
    entries: dict[str, tuple[LexiconSense, ...]] = {}
    for line_no, obj in read_jsonl(path):
        if not isinstance(obj, dict) or "word" not in obj or "senses" not in obj:
            raise InputError(f"{path}: bad lexicon row at line {line_no}")
        word = str(obj["word"])
        if word in entries:
            raise InputError(f"{path}: duplicate lexicon word {word!r} at line {line_no}")
        senses = tuple(
            LexiconSense(
                str(s["cluster_id"]),
                str(s["target"]),
                frozenset(str(c) for c in s.get("cues", ())),
            )
            for s in obj["senses"]
        )
        entries[word] = senses
    return MockLexicon(entries)


def mock_translate(
    example: ContextualizedExample,
    lexicon: MockLexicon,
    mode: str = MODE_AWARE,
) -> str:
    """Translate one example; only lexicon words change surface form.

    In context-aware mode each ambiguous token takes the first sense whose
    cue set intersects the prefix words; without a cue hit (or in
    context-agnostic mode) the default sense applies.
    """
    if mode not in (MODE_AWARE, MODE_AGNOSTIC):
        raise PreconditionError(f"unknown translation mode: {mode!r}")
    prefix_words = {
        w.lower()
        for chunk in example.prefix_tokens
        for w in tokenize_cased(chunk)
    }
    out: list[str] = []
    for token in tokenize_cased(example.src):
        senses = lexicon.entries.get(token.lower())
        if senses is None:
            out.append(token)
            continue
        chosen = senses[0]
        if mode == MODE_AWARE:
            for sense in senses:
                if sense.cues & prefix_words:
                    chosen = sense
                    break
        out.append(chosen.target)
    return " ".join(out)
