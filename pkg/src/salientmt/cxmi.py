"""Conditional cross-mutual information between two sets of model scores.

Given per-example log-probabilities of the same references under a
context-aware and a context-agnostic model, the statistic is the mean
log-ratio gain: positive values mean the context made the model more
confident in the references.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError, PreconditionError
from .util import read_jsonl

log = logging.getLogger(__name__)

# Upstream score files sometimes round a ~0 logprob slightly positive.
_POSITIVE_TOLERANCE = 1e-6

_LOG_FACTORS = {"e": 1.0, "2": math.log(2.0), "10": math.log(10.0)}


@dataclass(frozen=True)
class ScoredExample:
    id: int
    logprob: float


@dataclass(frozen=True)
class CxmiReport:
    value: float
    n: int


def parse_scores(path: str | Path) -> list[ScoredExample]:
    """Read JSONL {id, logprob} rows; ids must be unique, logprobs <= 0.

    Tiny positive logprobs (rounding artifacts up to 1e-6) are clamped to
    zero with a warning; anything larger is an error.
    """
    out: list[ScoredExample] = []
    seen: set[int] = set()
    for line_no, obj in read_jsonl(path):
        if not isinstance(obj, dict) or "id" not in obj or "logprob" not in obj:
            raise InputError(f"{path}: expected {{id, logprob}} at line {line_no}")
        example_id = int(obj["id"])
        raw = obj["logprob"]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise InputError(f"{path}: non-numeric logprob at line {line_no}: {raw!r}")
        logprob = float(raw)
        if example_id in seen:
            raise InputError(f"{path}: duplicate id {example_id} at line {line_no}")
        seen.add(example_id)
        if logprob > _POSITIVE_TOLERANCE:
            raise InputError(
                f"{path}: positive logprob {logprob} at line {line_no}"
            )
        if logprob > 0.0:
            log.warning(
                "%s: clamping tiny positive logprob %g at line %d", path, logprob, line_no
            )
            logprob = 0.0
        out.append(ScoredExample(example_id, logprob))
    return out


def compute_cxmi(
    base: Iterable[ScoredExample],
    ctx: Iterable[ScoredExample],
    log_base: str = "e",
) -> CxmiReport:
    """Mean per-example logprob gain of the context model, in nats.

    `log_base` declares the base the input scores were emitted in; the
    result is always natural-log. Summation uses math.fsum, so the value
    is independent of input order and chunking.
    """
    if log_base not in _LOG_FACTORS:
        raise PreconditionError(f"log base must be one of {sorted(_LOG_FACTORS)}")
    factor = _LOG_FACTORS[log_base]
    base_by_id = {e.id: e.logprob for e in base}
    ctx_by_id = {e.id: e.logprob for e in ctx}
    if set(base_by_id) != set(ctx_by_id):
        only_base = sorted(set(base_by_id) - set(ctx_by_id))
        only_ctx = sorted(set(ctx_by_id) - set(base_by_id))
        raise PreconditionError(
            f"score files cover different ids: {len(only_base)} only in base "
            f"(first: {only_base[:5]}), {len(only_ctx)} only in ctx "
            f"(first: {only_ctx[:5]})"
        )
    if not base_by_id:
        raise PreconditionError("no examples to compare")
    n = len(base_by_id)
    total = math.fsum(ctx_by_id[i] - base_by_id[i] for i in base_by_id)
    return CxmiReport(total * factor / n, n)
