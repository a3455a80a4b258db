"""Atomic, bit-reproducible result serialization.

Numbers are written as the shortest decimal that round-trips binary64
(Python's repr), JSON objects with sorted keys, and every file lands via
write-to-temp-then-rename so an interrupted run never leaves a partial
bundle.  The manifest records the artifact version, the config digest and
a sha256 per emitted file; two runs of the same config and seed must
produce byte-identical bundles.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path


def format_number(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return repr(float(x))


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            v if isinstance(v, str) else format_number(v) for v in row
        ))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path, doc: dict) -> None:
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def sha256_path(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class ResultBundle:
    out_dir: Path
    report: dict
    files: dict[str, Path] = field(default_factory=dict)

    def add_csv(self, name: str, header: list[str], rows) -> None:
        path = self.out_dir / name
        write_csv(path, header, rows)
        self.files[name] = path

    def finalize(self, config_digest: str, version: str) -> None:
        """Write report.json, then the manifest over all emitted files."""
        report_path = self.out_dir / "report.json"
        write_json(report_path, self.report)
        self.files["report.json"] = report_path
        manifest = {
            "artifact": "fraclap",
            "version": version,
            "config_sha256": config_digest,
            "files": {name: sha256_path(p) for name, p in sorted(self.files.items())},
        }
        write_json(self.out_dir / "manifest.json", manifest)
        self.files["manifest.json"] = self.out_dir / "manifest.json"
