"""URL-keyed bitext ingestion.

Parses TSV/JSONL sentence pairs with URL provenance, filters them by a
precomputed similarity score, groups them under canonicalized source URLs,
and length-filters the resulting pseudo-documents.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import InputError, PreconditionError
from .util import read_jsonl, stable_dumps

log = logging.getLogger(__name__)

DEFAULT_MIN_SIMILARITY = 0.85
DEFAULT_MIN_DOC_LEN = 2
DEFAULT_MAX_DOC_LEN = 10


@dataclass(frozen=True)
class BitextPair:
    """One source/target sentence pair with URL provenance.

    `similarity` is an upstream sentence-embedding score in [0, 1]; pairs
    that never went through that gate carry None.
    """

    id: int
    src: str
    tgt: str
    src_urls: frozenset[str] = frozenset()
    tgt_urls: frozenset[str] = frozenset()
    similarity: float | None = None


@dataclass(frozen=True)
class PseudoDocument:
    """A bag of related sentences keyed by canonical URL.

    `sentence_ids` keeps ingestion order purely for reproducible sampling;
    semantically the document is unordered.
    """

    doc_key: str
    sentence_ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.sentence_ids)


def _parse_similarity(raw: object, line_no: int) -> float | None:
    if raw is None or raw == "":
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float, str)):
        raise InputError(f"non-numeric similarity at line {line_no}: {raw!r}")
    try:
        value = float(raw)
    except ValueError as exc:
        raise InputError(f"non-numeric similarity at line {line_no}: {raw!r}") from exc
    if not 0.0 <= value <= 1.0:
        raise InputError(f"similarity out of [0,1] at line {line_no}: {value}")
    return value


def _parse_urls(raw: object, line_no: int) -> frozenset[str]:
    if raw is None:
        return frozenset()
    if isinstance(raw, str):
        return frozenset(u for u in raw.split(";") if u.strip())
    if isinstance(raw, (list, tuple)):
        return frozenset(str(u) for u in raw if str(u).strip())
    raise InputError(f"bad URL field at line {line_no}: {raw!r}")


def _pair_from_tsv(line: str, line_no: int, pair_id: int) -> BitextPair:
    fields = line.rstrip("\n").split("\t")
    if len(fields) < 2:
        raise InputError(f"expected at least src and tgt columns at line {line_no}")
    src = fields[0].strip()
    tgt = fields[1].strip()
    if not src:
        raise InputError(f"empty source at line {line_no}")
    if not tgt:
        raise InputError(f"empty target at line {line_no}")
    src_urls = _parse_urls(fields[2], line_no) if len(fields) > 2 else frozenset()
    tgt_urls = _parse_urls(fields[3], line_no) if len(fields) > 3 else frozenset()
    similarity = _parse_similarity(fields[4], line_no) if len(fields) > 4 else None
    return BitextPair(pair_id, src, tgt, src_urls, tgt_urls, similarity)


def _pair_from_json(obj: object, line_no: int, pair_id: int) -> BitextPair:
    if not isinstance(obj, dict):
        raise InputError(f"expected a JSON object at line {line_no}")
    src = str(obj.get("src", "")).strip()
    tgt = str(obj.get("tgt", "")).strip()
    if not src:
        raise InputError(f"empty source at line {line_no}")
    if not tgt:
        raise InputError(f"empty target at line {line_no}")
    return BitextPair(
        pair_id,
        src,
        tgt,
        _parse_urls(obj.get("src_urls"), line_no),
        _parse_urls(obj.get("tgt_urls"), line_no),
        _parse_similarity(obj.get("similarity"), line_no),
    )


def parse_bitext(
    lines: Iterable[str],
    format: str = "tsv",
    on_error: str = "abort",
) -> Iterator[BitextPair]:
    """Parse a line stream into BitextPairs, assigning ids in stream order.

    Blank lines are ignored. Malformed records raise InputError with the
    1-based line number, or are logged and skipped when on_error="skip".
    """
    if format not in ("tsv", "jsonl"):
        raise PreconditionError(f"unknown bitext format: {format!r}")
    if on_error not in ("abort", "skip"):
        raise PreconditionError(f"on_error must be 'abort' or 'skip', got {on_error!r}")
    pair_id = 0
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            if format == "tsv":
                pair = _pair_from_tsv(line, line_no, pair_id)
            else:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise InputError(f"invalid JSON at line {line_no}: {exc}") from exc
                pair = _pair_from_json(obj, line_no, pair_id)
        except InputError as exc:
            if on_error == "skip":
                log.warning("skipping record: %s", exc)
                continue
            raise
        yield pair
        pair_id += 1


def filter_by_similarity(
    pairs: Iterable[BitextPair], threshold: float = DEFAULT_MIN_SIMILARITY
) -> list[BitextPair]:
    """Keep pairs whose similarity is strictly greater than the threshold.

    Pairs with no similarity score are rejected: absence means the pair
    never passed the upstream embedding gate.
    """
    if not 0.0 <= threshold <= 1.0:
        raise PreconditionError(f"threshold must be in [0,1], got {threshold}")
    return [p for p in pairs if p.similarity is not None and p.similarity > threshold]


def canonicalize_url(url: str) -> str:
    """Reduce a URL to a deterministic canonical form.

    Drops the scheme, query string, fragment, leading "www." and trailing
    slashes; lowercases the host; preserves path case. Unparseable inputs
    fall back to the lowercased, trimmed raw string.
    """
    raw = url.strip()
    if not raw:
        raise PreconditionError("cannot canonicalize an empty URL")
    try:
        work = raw
        if "://" in work:
            work = work.partition("://")[2]
        work = work.split("#", 1)[0].split("?", 1)[0]
        host, slash, path = work.partition("/")
        host = host.lower()
        if host.startswith("www."):
            host = host[4:]
        return (host + slash + path).rstrip("/")
    except Exception:  # pragma: no cover - fallback for exotic inputs
        return raw.lower()


def doc_key_for(pair: BitextPair) -> str:
    """Canonical document key: sorted, deduplicated source URLs joined by '|'.

    Pairs without any source URL get a per-pair singleton key so the later
    length filter drops them.
    """
    if not pair.src_urls:
        return f"__singleton__/{pair.id}"
    return "|".join(sorted({canonicalize_url(u) for u in pair.src_urls}))


def group_into_pseudodocs(pairs: Sequence[BitextPair]) -> list[PseudoDocument]:
    """Partition pairs into pseudo-documents by canonical source-URL key.

    Output is sorted by doc_key so emission order is deterministic no
    matter how the grouping work was sharded.
    """
    groups: dict[str, list[int]] = {}
    for pair in pairs:
        groups.setdefault(doc_key_for(pair), []).append(pair.id)
    return [
        PseudoDocument(key, tuple(ids)) for key, ids in sorted(groups.items())
    ]


def filter_doc_length(
    docs: Iterable[PseudoDocument],
    min_len: int = DEFAULT_MIN_DOC_LEN,
    max_len: int = DEFAULT_MAX_DOC_LEN,
) -> list[PseudoDocument]:
    """Keep documents with min_len <= size <= max_len (inclusive bounds)."""
    if min_len < 1:
        raise PreconditionError(f"min_len must be >= 1, got {min_len}")
    if max_len < min_len:
        raise PreconditionError(f"max_len must be >= min_len, got {max_len} < {min_len}")
    return [d for d in docs if min_len <= len(d) <= max_len]


def ingest(
    lines: Iterable[str],
    format: str = "tsv",
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
    min_len: int = DEFAULT_MIN_DOC_LEN,
    max_len: int = DEFAULT_MAX_DOC_LEN,
    on_error: str = "abort",
) -> tuple[list[PseudoDocument], dict[int, BitextPair]]:
    """Full ingestion pipeline: parse, similarity-filter, group, length-filter.

    Returns the retained pseudo-documents plus an id -> pair lookup for
    their members.
    """
    retained = filter_by_similarity(parse_bitext(lines, format, on_error), min_similarity)
    docs = filter_doc_length(group_into_pseudodocs(retained), min_len, max_len)
    by_id = {p.id: p for p in retained}
    kept_ids = {i for d in docs for i in d.sentence_ids}
    return docs, {i: by_id[i] for i in kept_ids}


def write_pseudodocs(
    path: str | Path, docs: Sequence[PseudoDocument], pairs_by_id: dict[int, BitextPair]
) -> None:
    """Emit one JSON object per document: {"doc_key", "sentences": [{id, src, tgt}]}."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            row = {
                "doc_key": doc.doc_key,
                "sentences": [
                    {"id": i, "src": pairs_by_id[i].src, "tgt": pairs_by_id[i].tgt}
                    for i in doc.sentence_ids
                ],
            }
            fh.write(stable_dumps(row))
            fh.write("\n")


def read_pseudodocs(path: str | Path) -> list[tuple[str, list[BitextPair]]]:
    """Load pseudo-documents written by write_pseudodocs.

    URL and similarity fields are not part of the wire format; loaded pairs
    carry empty provenance.
    """
    out: list[tuple[str, list[BitextPair]]] = []
    for line_no, obj in read_jsonl(path):
        if not isinstance(obj, dict) or "doc_key" not in obj or "sentences" not in obj:
            raise InputError(f"{path}: bad pseudo-document at line {line_no}")
        pairs = [
            BitextPair(int(s["id"]), str(s["src"]), str(s["tgt"]))
            for s in obj["sentences"]
        ]
        out.append((str(obj["doc_key"]), pairs))
    return out
