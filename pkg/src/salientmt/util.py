"""Small shared helpers: JSONL IO, stable JSON encoding, hashing, seed derivation."""

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import InputError


def stable_dumps(obj: Any) -> str:
    """JSON with sorted keys and no float/whitespace wiggle room."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def read_jsonl(path: str | Path) -> Iterator[tuple[int, Any]]:
    """Yield (line_number, parsed_object) for every non-blank line.

    Line numbers are 1-based. Raises InputError with the offending line
    number on malformed JSON.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: invalid JSON at line {line_no}: {exc}") from exc


def write_jsonl(path: str | Path, rows: Iterable[Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(stable_dumps(row))
            fh.write("\n")


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def stable_seed(*parts: Any) -> int:
    """Derive a 63-bit seed from arbitrary parts, stable across runs and platforms.

    Used to key per-example and per-chunk RNGs so results do not depend on
    processing order.
    """
    payload = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big") >> 1
