"""File helpers shared across the package: atomic writes, canonical JSON, JSONL."""

from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatError


def vocabulary_hash(tags) -> str:
    """Stable identity for an ordered tag list, used to pair artifacts with a corpus."""
    return hashlib.sha256("\n".join(tags).encode("utf-8")).hexdigest()


def atomic_write_bytes(path, data: bytes) -> None:
    """Write through a temp file in the target directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def dump_json(obj) -> str:
    """Canonical JSON used for every artifact, so identical inputs rewrite identical bytes."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dump_json(obj))


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def iter_jsonl(path):
    """Yield (line_number, record) from a JSON Lines file, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise FormatError(path, line_no, "expected a JSON object")
            yield line_no, record


def write_jsonl(path, records) -> None:
    lines = [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in records]
    body = "\n".join(lines)
    atomic_write_text(path, body + "\n" if body else "")


def write_array(path, array: np.ndarray) -> None:
    buf = io.BytesIO()
    np.save(buf, array)
    atomic_write_bytes(path, buf.getvalue())


def read_array(path) -> np.ndarray:
    return np.load(path)
