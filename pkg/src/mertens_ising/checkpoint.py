"""Plain-text Mertens checkpoints.

Layout (UTF-8, one field per line)::

    mertens-checkpoint v1
    method=<tag>
    n=<int>
    M=<int>
    crc32=<8 hex digits>

The CRC covers lines 1-4 exactly as written, each with its trailing newline.
"""
from __future__ import annotations

import os
import zlib
from dataclasses import dataclass
from pathlib import Path

from .mobius_core import METHODS, MertensTable

HEADER = "mertens-checkpoint v1"


class CheckpointIntegrityError(ValueError):
    """The checkpoint is truncated, malformed, or fails its CRC."""


@dataclass(frozen=True)
class MertensCheckpoint:
    n: int
    m: int
    method: str
    checksum: int

    @classmethod
    def from_values(cls, n: int, m: int, method: str) -> "MertensCheckpoint":
        return cls(n, m, method, zlib.crc32(_body(n, m, method).encode("utf-8")))


def _body(n: int, m: int, method: str) -> str:
    return f"{HEADER}\nmethod={method}\nn={n}\nM={m}\n"


def checkpoint_write(table: MertensTable, path: str | os.PathLike) -> MertensCheckpoint:
    """Persist the last entry of ``table``; returns the record written."""
    if len(table) == 0:
        raise ValueError("cannot checkpoint an empty table")
    record = MertensCheckpoint.from_values(table.end, table.last, table.generated_by)
    text = _body(record.n, record.m, record.method) + f"crc32={record.checksum:08x}\n"
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return record


def _field(line: str, key: str) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise CheckpointIntegrityError(f"expected '{prefix}...', found {line!r}")
    return line[len(prefix) :]


def checkpoint_read(path: str | os.PathLike) -> MertensCheckpoint:
    """Load and verify a checkpoint. Missing files raise FileNotFoundError."""
    raw = Path(path).read_text(encoding="utf-8")
    lines = raw.split("\n")
    if len(lines) < 5 or lines[0] != HEADER:
        raise CheckpointIntegrityError(f"{path}: truncated or not a v1 checkpoint")
    try:
        method = _field(lines[1], "method")
        n = int(_field(lines[2], "n"))
        m = int(_field(lines[3], "M"))
        stored = int(_field(lines[4], "crc32"), 16)
    except ValueError as exc:
        raise CheckpointIntegrityError(f"{path}: {exc}") from exc
    actual = zlib.crc32("\n".join(lines[:4]).encode("utf-8") + b"\n")
    if actual != stored:
        raise CheckpointIntegrityError(f"{path}: crc32 mismatch (stored {stored:08x}, computed {actual:08x})")
    if method not in METHODS or n < 1:
        raise CheckpointIntegrityError(f"{path}: invalid record method={method!r} n={n}")
    return MertensCheckpoint(n, m, method, stored)
