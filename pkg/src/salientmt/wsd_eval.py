"""Translation-disambiguation scoring.

Each system output is lemmatized and checked against the sense inventory of
its record: it is positive when it realizes an acceptable target lemma and
no unacceptable one, negative when it realizes an unacceptable one, and
unknown otherwise. Corpus-level precision is pos/(pos+neg); recall keeps
unknowns in the denominator, pos/(pos+neg+unk); F1 is their harmonic mean.

The module also provides sense-frequency and length binning plus paired
bootstrap / bootstrap t-test significance over aligned label sequences.
"""

import enum
import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .errors import InputError, PreconditionError
from .saliency import tokenize_cased
from .testset import WsdRecord
from .util import read_jsonl, stable_seed, write_jsonl

log = logging.getLogger(__name__)

# Maps a token sequence to an equal-length lemma sequence.
Lemmatizer = Callable[[Sequence[str]], list[str]]


class EvalLabel(enum.Enum):
    POS = "pos"
    NEG = "neg"
    UNK = "unk"


@dataclass(frozen=True)
class SenseInventory:
    """(source lemma, cluster id) -> acceptable target lemmas.

    A lemma with fewer than two clusters is not ambiguous and is rejected.
    """

    clusters: Mapping[tuple[str, str], frozenset[str]]

    def __post_init__(self) -> None:
        per_lemma: dict[str, int] = {}
        for (lemma, cluster_id), members in self.clusters.items():
            if not members:
                raise InputError(f"empty sense cluster ({lemma!r}, {cluster_id!r})")
            per_lemma[lemma] = per_lemma.get(lemma, 0) + 1
        for lemma, count in per_lemma.items():
            if count < 2:
                raise InputError(f"lemma {lemma!r} has only one sense cluster")

    def clusters_for(self, lemma: str) -> dict[str, frozenset[str]]:
        return {
            cid: members
            for (lem, cid), members in self.clusters.items()
            if lem == lemma
        }


def load_inventory(path: str | Path) -> SenseInventory:
    """Read TSV: lemma, cluster_id, comma-separated target lemmas."""
    clusters: dict[tuple[str, str], frozenset[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise InputError(f"{path}: expected 3 columns at line {line_no}")
            lemma, cluster_id, member_field = fields
            members = frozenset(m.strip() for m in member_field.split(",") if m.strip())
            key = (lemma, cluster_id)
            if key in clusters:
                raise InputError(f"{path}: duplicate cluster {key} at line {line_no}")
            clusters[key] = members
    return SenseInventory(clusters)


def lookup_sense_sets(
    record: WsdRecord, inventory: SenseInventory
) -> tuple[frozenset[str], frozenset[str]]:
    """Positive lemmas of the record's cluster; negatives from all its siblings.

    Any lemma shared with the positive cluster is removed from the negative
    set so the classifier precondition holds.
    """
    key = (record.lemma, record.cluster_id)
    if key not in inventory.clusters:
        raise PreconditionError(
            f"record {record.id}: unknown sense cluster "
            f"({record.lemma!r}, {record.cluster_id!r})"
        )
    positive = inventory.clusters[key]
    negative: set[str] = set()
    for cid, members in inventory.clusters_for(record.lemma).items():
        if cid != record.cluster_id:
            negative |= members
    return positive, frozenset(negative - positive)


def classify(
    output_lemmas: Iterable[str],
    positive: frozenset[str],
    negative: frozenset[str],
) -> EvalLabel:
    """POS if the output hits a positive lemma and no negative one; NEG on
    any negative hit; UNK otherwise."""
    if positive & negative:
        raise PreconditionError(
            f"inconsistent inventory: {sorted(positive & negative)} are both "
            "acceptable and unacceptable"
        )
    s = set(output_lemmas)
    if s & positive and not s & negative:
        return EvalLabel.POS
    if s & negative:
        return EvalLabel.NEG
    return EvalLabel.UNK


@dataclass(frozen=True)
class WsdReport:
    n_pos: int
    n_neg: int
    n_unk: int
    precision: float
    recall: float
    f1: float
    bins: Mapping[str, "WsdReport"] | None = field(default=None, compare=False)

    @classmethod
    def from_counts(cls, n_pos: int, n_neg: int, n_unk: int) -> "WsdReport":
        precision = n_pos / (n_pos + n_neg) if n_pos + n_neg > 0 else 0.0
        recall = n_pos / (n_pos + n_neg + n_unk) if n_pos + n_neg + n_unk > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(n_pos, n_neg, n_unk, precision, recall, f1)


def score(labels: Iterable[EvalLabel]) -> WsdReport:
    """Aggregate per-example labels into corpus-level metrics."""
    counts = {EvalLabel.POS: 0, EvalLabel.NEG: 0, EvalLabel.UNK: 0}
    for label in labels:
        counts[label] += 1
    return WsdReport.from_counts(
        counts[EvalLabel.POS], counts[EvalLabel.NEG], counts[EvalLabel.UNK]
    )


def identity_lemmatizer(tokens: Sequence[str]) -> list[str]:
    return list(tokens)


class DictLemmatizer:
    """Surface -> lemma lookup; unknown surfaces map to themselves."""

    def __init__(self, mapping: Mapping[str, str]):
        self.mapping = dict(mapping)

    def __call__(self, tokens: Sequence[str]) -> list[str]:
        return [self.mapping.get(t, t) for t in tokens]


def load_lemmatizer(spec: str) -> Lemmatizer:
    """"identity", or "dict:FILE" where FILE is TSV surface -> lemma."""
    if spec == "identity":
        return identity_lemmatizer
    if spec.startswith("dict:"):
        path = spec[len("dict:"):]
        mapping: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 2:
                    raise InputError(f"{path}: expected 2 columns at line {line_no}")
                mapping[fields[0]] = fields[1]
        return DictLemmatizer(mapping)
    raise PreconditionError(f"unknown lemmatizer spec: {spec!r}")


def output_lemma_set(text: str, lemmatizer: Lemmatizer) -> set[str]:
    return set(lemmatizer(tokenize_cased(text)))


def evaluate_system(
    outputs: Mapping[int, str],
    records: Sequence[WsdRecord],
    inventory: SenseInventory,
    lemmatizer: Lemmatizer = identity_lemmatizer,
) -> tuple[WsdReport, dict[int, EvalLabel]]:
    """Label every record's output and aggregate; outputs align to records by id."""
    record_ids = {r.id for r in records}
    missing = sorted(record_ids - set(outputs))
    extra = sorted(set(outputs) - record_ids)
    if missing or extra:
        raise PreconditionError(
            f"outputs misaligned with records: missing ids {missing[:10]} "
            f"({len(missing)} total), extra ids {extra[:10]} ({len(extra)} total)"
        )
    labels: dict[int, EvalLabel] = {}
    for record in records:
        positive, negative = lookup_sense_sets(record, inventory)
        lemmas = output_lemma_set(outputs[record.id], lemmatizer)
        labels[record.id] = classify(lemmas, positive, negative)
    return score(labels.values()), labels


def compute_sense_frequencies(
    target_lemmas: Iterable[str], inventory: SenseInventory
) -> dict[tuple[str, str], float]:
    """Relative training frequency of each sense, from target-side lemma counts.

    A cluster's count is the number of stream tokens realizing any of its
    member lemmas; frequencies are normalized per source lemma. Source
    lemmas never observed are omitted. A target lemma belonging to several
    clusters of the same source lemma is counted for all of them.
    """
    member_index: dict[str, list[tuple[str, str]]] = {}
    overlap_warned: set[str] = set()
    for key, members in inventory.clusters.items():
        for member in members:
            member_index.setdefault(member, []).append(key)
    for member, keys in member_index.items():
        lemmas = [lemma for lemma, _ in keys]
        dupes = {l for l in lemmas if lemmas.count(l) > 1}
        for lemma in dupes - overlap_warned:
            log.warning(
                "target lemma %r appears in multiple clusters of %r; counted for all",
                member, lemma,
            )
            overlap_warned.add(lemma)

    counts: dict[tuple[str, str], int] = {key: 0 for key in inventory.clusters}
    for token in target_lemmas:
        for key in member_index.get(token, ()):
            counts[key] += 1

    frequencies: dict[tuple[str, str], float] = {}
    lemmas = {lemma for lemma, _ in inventory.clusters}
    for lemma in lemmas:
        keys = [k for k in inventory.clusters if k[0] == lemma]
        total = sum(counts[k] for k in keys)
        if total == 0:
            continue
        for k in keys:
            frequencies[k] = counts[k] / total
    return frequencies


# --- binning -----------------------------------------------------------


def frequency_bin_labels(bin_width: float = 0.2) -> list[str]:
    n_bins = round(1.0 / bin_width)
    return [
        f"{round(i * bin_width * 100)}-{round((i + 1) * bin_width * 100)}%"
        for i in range(n_bins)
    ]


def frequency_bin_index(freq: float, bin_width: float = 0.2) -> int:
    """Left-closed bins; the top bin includes its upper edge."""
    n_bins = round(1.0 / bin_width)
    edges = [round(i * bin_width, 12) for i in range(1, n_bins)]
    return min(bisect_right(edges, freq), n_bins - 1)


def length_bin_labels(edges: Sequence[int]) -> list[str]:
    labels = [f"{edges[i]}-{edges[i + 1]}" for i in range(len(edges) - 1)]
    labels.append(f"{edges[-1]}+")
    return labels


def length_bin_index(length: int, edges: Sequence[int]) -> int:
    return bisect_right(edges, length) - 1


@dataclass
class BinnedResult:
    """Per-bin reports per system, against a named baseline."""

    bin_labels: list[str]
    bin_sizes: dict[str, int]
    reports: dict[str, dict[str, WsdReport]]  # bin label -> system -> report
    baseline: str

    def delta_f1(self, bin_label: str, system: str) -> float:
        row = self.reports[bin_label]
        return row[system].f1 - row[self.baseline].f1

    def delta_pos(self, bin_label: str, system: str) -> int:
        row = self.reports[bin_label]
        return row[system].n_pos - row[self.baseline].n_pos


def _bin_reports(
    labels_per_system: Mapping[str, Mapping[int, EvalLabel]],
    bin_of_record: Mapping[int, int],
    bin_labels: Sequence[str],
    baseline: str,
) -> BinnedResult:
    if baseline not in labels_per_system:
        raise PreconditionError(f"baseline system {baseline!r} not among label sets")
    ids = None
    for system, labels in labels_per_system.items():
        if ids is None:
            ids = set(labels)
        elif set(labels) != ids:
            raise PreconditionError(f"label ids of system {system!r} are misaligned")
    ids = ids or set()
    if set(bin_of_record) != ids:
        raise PreconditionError("records and label sets cover different example ids")

    reports: dict[str, dict[str, WsdReport]] = {}
    sizes: dict[str, int] = {}
    for b, label in enumerate(bin_labels):
        bin_ids = [i for i in ids if bin_of_record[i] == b]
        sizes[label] = len(bin_ids)
        reports[label] = {
            system: score(labels[i] for i in bin_ids)
            for system, labels in labels_per_system.items()
        }
    return BinnedResult(list(bin_labels), sizes, reports, baseline)


def bin_by_sense_frequency(
    labels_per_system: Mapping[str, Mapping[int, EvalLabel]],
    records: Sequence[WsdRecord],
    frequencies: Mapping[tuple[str, str], float],
    baseline: str,
    bin_width: float = 0.2,
) -> BinnedResult:
    """Per-bin metrics as a function of training sense frequency.

    Every record's (lemma, cluster) must have a frequency. All bins are
    emitted even when empty.
    """
    bin_of_record: dict[int, int] = {}
    for record in records:
        key = (record.lemma, record.cluster_id)
        if key not in frequencies:
            raise PreconditionError(f"record {record.id}: no sense frequency for {key}")
        bin_of_record[record.id] = frequency_bin_index(frequencies[key], bin_width)
    return _bin_reports(
        labels_per_system, bin_of_record, frequency_bin_labels(bin_width), baseline
    )


def bin_by_length(
    labels_per_system: Mapping[str, Mapping[int, EvalLabel]],
    records: Sequence[WsdRecord],
    baseline: str,
    edges: Sequence[int] = (0, 10, 20, 30, 40),
    tokenizer: Callable[[str], list[str]] = str.split,
) -> BinnedResult:
    """Per-bin metrics as a function of source sentence length.

    Bins are left-closed over the given ascending edges; the final bin is
    open-ended. Lengths use the supplied tokenizer (whitespace words by
    default).
    """
    if not edges or edges[0] != 0 or list(edges) != sorted(set(edges)):
        raise PreconditionError(f"bin edges must be ascending and start at 0: {edges!r}")
    bin_of_record = {
        r.id: length_bin_index(len(tokenizer(r.src)), edges) for r in records
    }
    return _bin_reports(labels_per_system, bin_of_record, length_bin_labels(edges), baseline)


# --- significance ------------------------------------------------------

_LABEL_CODE = {EvalLabel.POS: 0, EvalLabel.NEG: 1, EvalLabel.UNK: 2}
_METRICS = ("precision", "recall", "f1")
_RESAMPLE_CHUNK = 500


@dataclass(frozen=True)
class SignificanceResult:
    mode: str
    metric: str
    p_value: float
    mean_delta_precision: float
    mean_delta_recall: float
    mean_delta_f1: float


def _codes(labels: Sequence[EvalLabel]) -> np.ndarray:
    return np.array([_LABEL_CODE[l] for l in labels], dtype=np.int8)


def _metric_matrix(codes: np.ndarray, idx: np.ndarray) -> dict[str, np.ndarray]:
    drawn = codes[idx]
    n = idx.shape[1]
    pos = (drawn == 0).sum(axis=1).astype(np.float64)
    neg = (drawn == 1).sum(axis=1).astype(np.float64)
    unk = n - pos - neg
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pos + neg > 0, pos / (pos + neg), 0.0)
        recall = np.where(pos + neg + unk > 0, pos / (pos + neg + unk), 0.0)
        f1 = np.where(precision + recall > 0,
                      2 * precision * recall / (precision + recall), 0.0)
    return {"precision": precision, "recall": recall, "f1": f1}


def _resample_indices(n_examples: int, n_trials: int, sample_size: int,
                      seed: int, chunk_id: int) -> np.ndarray:
    rng = np.random.default_rng(stable_seed("resample", seed, chunk_id))
    return rng.integers(0, n_examples, size=(n_trials, sample_size))


def _check_aligned(labels_a: Sequence[EvalLabel], labels_b: Sequence[EvalLabel]) -> int:
    if len(labels_a) != len(labels_b):
        raise PreconditionError(
            f"label sequences differ in length: {len(labels_a)} vs {len(labels_b)}"
        )
    if not labels_a:
        raise PreconditionError("cannot test significance over zero examples")
    return len(labels_a)


def paired_bootstrap(
    labels_a: Sequence[EvalLabel],
    labels_b: Sequence[EvalLabel],
    resamples: int = 5000,
    seed: int = 0,
    metric: str = "f1",
) -> SignificanceResult:
    """One-sided paired bootstrap of system A improving over system B.

    Each trial resamples example indices with replacement and scores both
    systems on the same draw; the p-value is the fraction of trials where
    A's metric does not exceed B's. Trials are generated in fixed-size
    chunks with chunk seeds derived from (seed, chunk), so results are
    identical however the work is scheduled.
    """
    if metric not in _METRICS:
        raise PreconditionError(f"metric must be one of {_METRICS}, got {metric!r}")
    n = _check_aligned(labels_a, labels_b)
    codes_a, codes_b = _codes(labels_a), _codes(labels_b)

    not_better = 0
    delta_sums = {m: 0.0 for m in _METRICS}
    for chunk_id, start in enumerate(range(0, resamples, _RESAMPLE_CHUNK)):
        n_trials = min(_RESAMPLE_CHUNK, resamples - start)
        idx = _resample_indices(n, n_trials, n, seed, chunk_id)
        metrics_a = _metric_matrix(codes_a, idx)
        metrics_b = _metric_matrix(codes_b, idx)
        not_better += int((metrics_a[metric] <= metrics_b[metric]).sum())
        for m in _METRICS:
            delta_sums[m] += float((metrics_a[m] - metrics_b[m]).sum())

    return SignificanceResult(
        "bootstrap", metric, not_better / resamples,
        delta_sums["precision"] / resamples,
        delta_sums["recall"] / resamples,
        delta_sums["f1"] / resamples,
    )


def bootstrap_ttest(
    labels_a: Sequence[EvalLabel],
    labels_b: Sequence[EvalLabel],
    trials: int = 50,
    samples: int = 750,
    seed: int = 0,
    metric: str = "f1",
) -> SignificanceResult:
    """One-sided t-test over per-trial metric deltas from resampled subsets.

    Shares the resampling core with paired_bootstrap: each trial draws
    `samples` example indices with replacement and the deltas are tested
    against zero (H1: A better than B).
    """
    if metric not in _METRICS:
        raise PreconditionError(f"metric must be one of {_METRICS}, got {metric!r}")
    if trials < 2:
        raise PreconditionError(f"need at least 2 trials, got {trials}")
    n = _check_aligned(labels_a, labels_b)
    codes_a, codes_b = _codes(labels_a), _codes(labels_b)

    deltas = {m: [] for m in _METRICS}
    for chunk_id, start in enumerate(range(0, trials, _RESAMPLE_CHUNK)):
        n_trials = min(_RESAMPLE_CHUNK, trials - start)
        idx = _resample_indices(n, n_trials, samples, seed, chunk_id)
        metrics_a = _metric_matrix(codes_a, idx)
        metrics_b = _metric_matrix(codes_b, idx)
        for m in _METRICS:
            deltas[m].append(metrics_a[m] - metrics_b[m])
    deltas = {m: np.concatenate(chunks) for m, chunks in deltas.items()}

    tested = deltas[metric]
    spread = float(tested.std(ddof=1))
    mean = float(tested.mean())
    if spread == 0.0:
        p_value = 0.0 if mean > 0 else 1.0
    else:
        t_stat = mean / (spread / np.sqrt(trials))
        p_value = float(_scipy_stats.t.sf(t_stat, df=trials - 1))

    return SignificanceResult(
        "ttest", metric, p_value,
        float(deltas["precision"].mean()),
        float(deltas["recall"].mean()),
        float(deltas["f1"].mean()),
    )


# --- label persistence --------------------------------------------------


def write_labels(path: str | Path, labels: Mapping[int, EvalLabel]) -> None:
    write_jsonl(
        path,
        ({"id": i, "label": labels[i].value} for i in sorted(labels)),
    )


def read_labels(path: str | Path) -> dict[int, EvalLabel]:
    labels: dict[int, EvalLabel] = {}
    for line_no, obj in read_jsonl(path):
        if not isinstance(obj, dict) or "id" not in obj or "label" not in obj:
            raise InputError(f"{path}: bad label row at line {line_no}")
        example_id = int(obj["id"])
        if example_id in labels:
            raise InputError(f"{path}: duplicate example id {example_id} at line {line_no}")
        try:
            labels[example_id] = EvalLabel(obj["label"])
        except ValueError as exc:
            raise InputError(f"{path}: unknown label at line {line_no}: {obj['label']!r}") from exc
    return labels
