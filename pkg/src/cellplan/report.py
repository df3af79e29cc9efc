"""Run manifests and deterministic JSON output."""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the stamp for reproducible manifests
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.replace(microsecond=0).isoformat()


@dataclass
class RunManifest:
    command: list
    scenario_hash: str | None = None
    seed: int | None = None
    threads: int = 1
    version: str = __version__
    timestamp: str = field(default_factory=_timestamp)
    outputs: list = field(default_factory=list)

    def add(self, path):
        path = Path(path)
        self.outputs.append({"file": path.name, "sha256": sha256_file(path)})

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "scenario_hash": self.scenario_hash,
            "seed": self.seed,
            "threads": self.threads,
            "version": self.version,
            "timestamp": self.timestamp,
            "python": sys.version.split()[0],
            "outputs": sorted(self.outputs, key=lambda o: o["file"]),
        }

    def write(self, out_dir) -> Path:
        return write_json(Path(out_dir) / "manifest.json", self.to_dict())
