"""Document-ID reconstruction for ambiguous-word test records.

Test records arrive without provenance; we recover it by searching raw
document-segmented corpora for each record's source sentence. To survive
tokenization and punctuation differences, both needle and haystack are
reduced to their alphanumeric characters before the substring check.

The search itself is multi-pattern: every needle is indexed by a prefix
hash and the haystack is scanned once per subcorpus with a vectorized
rolling hash, so runtime is governed by corpus size, not corpus size times
needle count. Candidate hits are verified by exact string comparison.
"""

import logging
import re
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, PreconditionError
from .util import read_jsonl

log = logging.getLogger(__name__)

_NON_ALNUM_RE = re.compile(r"[\W_]+")

# Rolling-hash parameters: FNV-ish odd multiplier, wrap-around 64-bit arithmetic.
_HASH_BASE = 1099511628211
_HASH_MASK = (1 << 64) - 1
_MAX_ANCHOR = 32


@dataclass(frozen=True)
class WsdRecord:
    """One ambiguous-word test example.

    `id` is the record's ordinal in its input file and is the alignment key
    for system outputs and per-example labels.
    """

    id: int
    lemma: str
    cluster_id: str
    subcorpus: str
    src: str
    tgt: str
    ambiguous_token: str
    doc_id: str | None = None


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    subcorpus: str
    sentences: tuple[str, ...]


@dataclass
class MatchStats:
    n_records: int = 0
    n_matched: int = 0
    n_unmatched: int = 0
    n_ambiguous: int = 0
    n_empty_needle: int = 0


def normalize_for_match(text: str, fold_case: bool = False) -> str:
    """Strip everything but letters and digits; case is preserved by default."""
    out = _NON_ALNUM_RE.sub("", text)
    return out.lower() if fold_case else out


def read_records(path: str | Path) -> list[WsdRecord]:
    """Read headerless TSV: lemma, cluster_id, subcorpus, src, tgt, ambiguous_token[, doc_id]."""
    records: list[WsdRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) < 6:
                raise InputError(f"{path}: expected >= 6 columns at line {line_no}")
            doc_id = fields[6].strip() if len(fields) > 6 and fields[6].strip() else None
            records.append(
                WsdRecord(
                    id=len(records),
                    lemma=fields[0],
                    cluster_id=fields[1],
                    subcorpus=fields[2],
                    src=fields[3],
                    tgt=fields[4],
                    ambiguous_token=fields[5],
                    doc_id=doc_id,
                )
            )
    return records


def write_records(path: str | Path, records: Sequence[WsdRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                "\t".join(
                    (r.lemma, r.cluster_id, r.subcorpus, r.src, r.tgt,
                     r.ambiguous_token, r.doc_id or "")
                )
                + "\n"
            )


def load_corpus_jsonl(path: str | Path) -> list[RawDocument]:
    docs: list[RawDocument] = []
    for line_no, obj in read_jsonl(path):
        if not isinstance(obj, dict) or "doc_id" not in obj or "sentences" not in obj:
            raise InputError(f"{path}: bad document at line {line_no}")
        docs.append(
            RawDocument(
                str(obj["doc_id"]),
                str(obj.get("subcorpus", "")),
                tuple(str(s) for s in obj["sentences"]),
            )
        )
    return docs


def load_corpus_dir(root: str | Path) -> list[RawDocument]:
    """One document per file under root/<subcorpus>/..., doc_id = relative path.

    Files are visited in sorted path order so corpus order is deterministic.
    """
    root = Path(root)
    docs: list[RawDocument] = []
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = path.relative_to(root)
        subcorpus = rel.parts[0] if len(rel.parts) > 1 else ""
        sentences = tuple(
            line.strip()
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        )
        docs.append(RawDocument(rel.as_posix(), subcorpus, sentences))
    return docs


def _prefix_hash(needle: str, length: int) -> int:
    h = 0
    for ch in needle[:length]:
        h = (h * _HASH_BASE + ord(ch)) & _HASH_MASK
    return h


def _scan_chunk(
    texts: Sequence[str],
    doc_order: Sequence[int],
    buckets: dict[int, list[str]],
    anchor_len: int,
    hash_array: np.ndarray,
) -> dict[str, set[int]]:
    """Find, within one shard of documents, every (needle, document) hit."""
    haystack = "\x00".join(texts)
    if len(haystack) < anchor_len:
        return {}
    starts: list[int] = []
    off = 0
    for t in texts:
        starts.append(off)
        off += len(t) + 1

    codes = np.frombuffer(haystack.encode("utf-32-le"), dtype=np.uint32).astype(np.uint64)
    n_win = len(codes) - anchor_len + 1
    h = np.zeros(n_win, dtype=np.uint64)
    base = np.uint64(_HASH_BASE)
    for j in range(anchor_len):
        h *= base
        h += codes[j : j + n_win]

    hits: dict[str, set[int]] = {}
    for pos in np.nonzero(np.isin(h, hash_array))[0]:
        pos = int(pos)
        for needle in buckets[int(h[pos])]:
            if haystack.startswith(needle, pos):
                doc_idx = bisect_right(starts, pos) - 1
                hits.setdefault(needle, set()).add(doc_order[doc_idx])
    return hits


def _match_subcorpus(
    needles: Iterable[str],
    docs: Sequence[tuple[int, str]],
    jobs: int,
) -> dict[str, set[int]]:
    """Map each needle to the set of (corpus-order) document indexes containing it.

    `docs` carries (global corpus order, normalized text). Results are
    independent of how documents are sharded across workers.
    """
    unique = [n for n in set(needles) if n]
    if not unique or not docs:
        return {}
    anchor_len = min(min(len(n) for n in unique), _MAX_ANCHOR)
    buckets: dict[int, list[str]] = {}
    for needle in unique:
        buckets.setdefault(_prefix_hash(needle, anchor_len), []).append(needle)
    hash_array = np.array(sorted(buckets), dtype=np.uint64)

    orders = [o for o, _ in docs]
    texts = [t for _, t in docs]
    jobs = max(1, jobs)
    if jobs == 1 or len(docs) < 2 * jobs:
        return _scan_chunk(texts, orders, buckets, anchor_len, hash_array)

    chunk = -(-len(docs) // jobs)
    merged: dict[str, set[int]] = {}
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(
                _scan_chunk,
                texts[i : i + chunk],
                orders[i : i + chunk],
                buckets,
                anchor_len,
                hash_array,
            )
            for i in range(0, len(docs), chunk)
        ]
        for future in futures:
            for needle, found in future.result().items():
                merged.setdefault(needle, set()).update(found)
    return merged


def assign_doc_ids(
    records: Sequence[WsdRecord],
    corpus: Sequence[RawDocument],
    *,
    fold_case: bool = False,
    jobs: int = 1,
) -> tuple[list[WsdRecord], MatchStats]:
    """Attach to each record the first document whose text contains its sentence.

    Matching is per subcorpus, over normalized text. Records matching more
    than one document keep the first in corpus order and are counted as
    ambiguous; records matching nothing keep doc_id = None.
    """
    stats = MatchStats(n_records=len(records))

    docs_by_sub: dict[str, list[tuple[int, str]]] = {}
    for order, doc in enumerate(corpus):
        text = normalize_for_match(" ".join(doc.sentences), fold_case)
        docs_by_sub.setdefault(doc.subcorpus, []).append((order, text))

    needles_by_sub: dict[str, list[str]] = {}
    needle_of: dict[int, str] = {}
    for record in records:
        needle = normalize_for_match(record.src, fold_case)
        if not needle:
            log.warning("record %d normalizes to an empty needle; left unmatched", record.id)
            stats.n_empty_needle += 1
            stats.n_unmatched += 1
            continue
        needle_of[record.id] = needle
        needles_by_sub.setdefault(record.subcorpus, []).append(needle)

    hits_by_sub = {
        sub: _match_subcorpus(needles, docs_by_sub.get(sub, ()), jobs)
        for sub, needles in needles_by_sub.items()
    }

    out: list[WsdRecord] = []
    for record in records:
        needle = needle_of.get(record.id)
        found = hits_by_sub.get(record.subcorpus, {}).get(needle) if needle else None
        if not found:
            out.append(replace(record, doc_id=None))
            if needle is not None:
                stats.n_unmatched += 1
            continue
        if len(found) > 1:
            stats.n_ambiguous += 1
        stats.n_matched += 1
        out.append(replace(record, doc_id=corpus[min(found)].doc_id))
    return out, stats


@dataclass(frozen=True)
class StatRow:
    subcorpus: str
    n_types: int
    n_sentences: int
    n_doc_ids: int


def testset_stats(records: Sequence[WsdRecord]) -> tuple[list[StatRow], int]:
    """Per-subcorpus and combined coverage counts over doc-assigned records.

    Returns the table (combined row last, labeled "combined") and the number
    of records excluded for having no doc_id.
    """
    assigned = [r for r in records if r.doc_id is not None]
    n_excluded = len(records) - len(assigned)
    rows: list[StatRow] = []
    for sub in sorted({r.subcorpus for r in assigned}):
        group = [r for r in assigned if r.subcorpus == sub]
        rows.append(
            StatRow(
                sub,
                len({r.lemma for r in group}),
                len(group),
                len({r.doc_id for r in group}),
            )
        )
    rows.append(
        StatRow(
            "combined",
            len({r.lemma for r in assigned}),
            len(assigned),
            len({(r.subcorpus, r.doc_id) for r in assigned}),
        )
    )
    return rows, n_excluded


def write_stats(path: str | Path, rows: Sequence[StatRow], n_excluded: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("subcorpus\tn_types\tn_sentences\tn_doc_ids\n")
        for row in rows:
            fh.write(f"{row.subcorpus}\t{row.n_types}\t{row.n_sentences}\t{row.n_doc_ids}\n")
        fh.write(f"# unassigned records: {n_excluded}\n")
