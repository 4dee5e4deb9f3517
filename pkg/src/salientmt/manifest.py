"""Reproducibility sidecars.

Every CLI output file gets a `<name>.manifest.json` next to it, recording
the tool version, the resolved stage configuration, and content digests of
the inputs. Paths are stored relative to the output's directory and no
timestamps are included, so reruns of the same configuration produce
byte-identical manifests. Execution-only knobs (worker count) are excluded:
they cannot change the artifact.
"""

import os
from pathlib import Path

from .util import sha256_file, stable_dumps


def manifest_path(output: str | Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


def write_manifest(
    output: str | Path,
    *,
    command: str,
    config: dict,
    inputs: dict[str, str | Path],
    version: str,
) -> Path:
    out_dir = Path(output).parent
    digests = {
        name: {
            "path": os.path.relpath(path, start=out_dir),
            "sha256": sha256_file(path),
        }
        for name, path in sorted(inputs.items())
    }
    payload = {
        "command": command,
        "version": version,
        "config": config,
        "inputs": digests,
    }
    path = manifest_path(output)
    path.write_text(stable_dumps(payload) + "\n", encoding="utf-8")
    return path
