"""Keyword saliency over pseudo-documents.

Two scorers are provided: a corpus-frequency scorer (term frequency times
inverse document frequency, with add-one smoothing inside the log) and a
single-document unigram statistic in the style of unsupervised keyword
extractors (position, frequency, neighborhood diversity, and sentence
spread). Both return deterministic, deduplicatable ranked word lists.
"""

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from difflib import SequenceMatcher
from pathlib import Path
from statistics import median, pstdev
from typing import Iterable, Mapping, Sequence

from .errors import InputError, PreconditionError
from .ingest import BitextPair

# Alphanumeric runs stay together; every other non-space character (and the
# underscore) becomes a standalone token.
TOKEN_RE = re.compile(r"[^\W_]+|[^\w\s]|_")

# One ranked keyword: (word, saliency weight), higher weight = more salient.
KeywordList = list[tuple[str, float]]

_EPS = 1e-9


def tokenize(text: str) -> list[str]:
    """Lowercase and tokenize: alphanumeric runs plus isolated punctuation."""
    return TOKEN_RE.findall(text.lower())


def tokenize_cased(text: str) -> list[str]:
    """Same token boundaries as tokenize() but with original casing."""
    return TOKEN_RE.findall(text)


@dataclass(frozen=True)
class TokenizedDoc:
    """A flat lowercase token sequence with per-sentence index ranges."""

    tokens: tuple[str, ...]
    sentence_bounds: tuple[tuple[int, int], ...]

    @classmethod
    def from_sentences(cls, sentences: Iterable[str]) -> "TokenizedDoc":
        tokens: list[str] = []
        bounds: list[tuple[int, int]] = []
        for sentence in sentences:
            start = len(tokens)
            tokens.extend(tokenize(sentence))
            bounds.append((start, len(tokens)))
        return cls(tuple(tokens), tuple(bounds))

    @classmethod
    def from_pairs(cls, pairs: Iterable[BitextPair]) -> "TokenizedDoc":
        # Saliency is computed from the source side only: the prefix is
        # consumed by the source encoder.
        return cls.from_sentences(p.src for p in pairs)


@dataclass(frozen=True)
class TfidfModel:
    """Document-frequency statistics fitted over a pseudo-document sample."""

    df: Mapping[str, int]
    num_docs: int


def fit_tfidf(docs: Sequence[TokenizedDoc]) -> TfidfModel:
    """Count, for every token, the number of documents containing it."""
    if not docs:
        raise PreconditionError("no documents")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc.tokens))
    return TfidfModel(dict(df), len(docs))


def merge_tfidf(a: TfidfModel, b: TfidfModel) -> TfidfModel:
    """Combine independent fits: df maps and document counts add."""
    df = Counter(a.df)
    df.update(b.df)
    return TfidfModel(dict(df), a.num_docs + b.num_docs)


def tf(term: str, doc: TokenizedDoc) -> float:
    """Occurrences of term in the document divided by document length."""
    if not doc.tokens:
        raise PreconditionError("term frequency of an empty document")
    return doc.tokens.count(term) / len(doc.tokens)


def idf(term: str, model: TfidfModel) -> float:
    """log((num_docs + 1) / (df + 1)) + 1, natural log; unseen terms use df = 0."""
    return math.log((model.num_docs + 1) / (model.df.get(term, 0) + 1)) + 1.0


def tfidf_extract(doc: TokenizedDoc, k: int, model: TfidfModel) -> KeywordList:
    """The k unique tokens with the highest tf * idf, ties broken by token order.

    Returns fewer than k entries when the document has fewer unique tokens.
    """
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if not doc.tokens:
        raise PreconditionError("cannot extract keywords from an empty document")
    counts = Counter(doc.tokens)
    n = len(doc.tokens)
    scored = [(t, (c / n) * idf(t, model)) for t, c in counts.items()]
    scored.sort(key=lambda e: (-e[1], e[0]))
    return scored[:k]


def _has_alnum(token: str) -> bool:
    return any(ch.isalnum() for ch in token)


def yake_extract(
    doc: TokenizedDoc,
    k: int,
    window: int = 1,
    stopwords: set[str] | None = None,
    dedup_ratio: float = 0.9,
) -> KeywordList:
    """Rank unigram candidates by a single-document saliency statistic.

    Per candidate w the features are
      pos(w)  = ln(ln(3 + median token offset of w))
      freq(w) = count(w) / (mean + population stdev of candidate counts)
      rel(w)  = 1 + (distinct left + right neighbors within `window`,
                respecting sentence bounds) / (2 * count(w))
      sent(w) = fraction of sentences containing w
    combined into score(w) = rel * pos / (freq/rel + sent/rel + eps), where a
    LOWER score is more salient. The returned weight is 1 / (1 + score).

    Candidates are unigrams containing at least one alphanumeric character
    and not on the stop list. Near-duplicates are removed with
    dedup_keywords before truncating to k.
    """
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if not doc.tokens:
        raise PreconditionError("cannot extract keywords from an empty document")
    if window < 1:
        raise PreconditionError(f"window must be >= 1, got {window}")

    counts = Counter(doc.tokens)
    candidates = [
        t for t in counts if _has_alnum(t) and (not stopwords or t not in stopwords)
    ]
    if not candidates:
        return []

    offsets: dict[str, list[int]] = {}
    for i, tok in enumerate(doc.tokens):
        offsets.setdefault(tok, []).append(i)

    n_sentences = max(len(doc.sentence_bounds), 1)
    sentence_hits: Counter[str] = Counter()
    left: dict[str, set[str]] = {}
    right: dict[str, set[str]] = {}
    for start, end in doc.sentence_bounds:
        sentence_hits.update(set(doc.tokens[start:end]))
        for i in range(start, end):
            tok = doc.tokens[i]
            for d in range(1, window + 1):
                if i - d >= start:
                    left.setdefault(tok, set()).add(doc.tokens[i - d])
                if i + d < end:
                    right.setdefault(tok, set()).add(doc.tokens[i + d])

    cand_counts = [counts[t] for t in candidates]
    spread = pstdev(cand_counts) if len(cand_counts) > 1 else 0.0
    tf_norm = sum(cand_counts) / len(cand_counts) + spread

    ranked: KeywordList = []
    for t in candidates:
        t_pos = math.log(math.log(3.0 + median(offsets[t])))
        t_freq = counts[t] / tf_norm
        neighbors = len(left.get(t, ())) + len(right.get(t, ()))
        t_rel = 1.0 + neighbors / (2.0 * counts[t])
        t_sent = sentence_hits[t] / n_sentences
        score = t_rel * t_pos / (t_freq / t_rel + t_sent / t_rel + _EPS)
        ranked.append((t, 1.0 / (1.0 + score)))
    ranked.sort(key=lambda e: (-e[1], e[0]))
    return dedup_keywords(ranked, dedup_ratio)[:k]


def similarity_ratio(a: str, b: str) -> float:
    """2*M / (len(a)+len(b)) where M is the total matching-block length."""
    return SequenceMatcher(None, a, b, autojunk=False).ratio()


def dedup_keywords(ranked: KeywordList, ratio: float = 0.9) -> KeywordList:
    """Greedy near-duplicate removal over a descending-weight keyword list.

    Scanning in rank order, a candidate is dropped when its similarity to
    any already kept word is >= ratio.
    """
    kept: KeywordList = []
    for word, weight in ranked:
        if all(similarity_ratio(word, kw) < ratio for kw, _ in kept):
            kept.append((word, weight))
    return kept


def save_tfidf(model: TfidfModel, path: str | Path) -> None:
    """Persist as JSONL: a {"num_docs": N} header then token rows sorted by token."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"num_docs": model.num_docs}, sort_keys=True) + "\n")
        for token in sorted(model.df):
            fh.write(
                json.dumps({"token": token, "df": model.df[token]},
                           ensure_ascii=False, sort_keys=True)
                + "\n"
            )


def load_tfidf(path: str | Path) -> TfidfModel:
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            num_docs = int(header["num_docs"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: bad model header: {header_line!r}") from exc
        df: dict[str, int] = {}
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                df[str(row["token"])] = int(row["df"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}: bad model row at line {line_no}") from exc
    model = TfidfModel(df, num_docs)
    _validate_model(model, path)
    return model


def _validate_model(model: TfidfModel, origin: object) -> None:
    if model.num_docs < 1:
        raise InputError(f"{origin}: num_docs must be >= 1")
    for token, count in model.df.items():
        if not 1 <= count <= model.num_docs:
            raise InputError(
                f"{origin}: df[{token!r}] = {count} outside [1, {model.num_docs}]"
            )
