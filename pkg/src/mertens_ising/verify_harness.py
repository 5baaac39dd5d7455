"""Bound-versus-reality sweeps over computed Mertens values."""
from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator, NamedTuple, Sequence

import numpy as np

from ._fmt import DEFAULT_PRECISION, format_number
from .bounds import BOUND_NAMES, BoundDefinition, bound_values, make_bound
from .mobius_core import MertensTable, mertens_prefix

CSV_COLUMNS = ("n", "M", "bound_name", "params", "value", "ratio", "satisfied")
_CHUNK = 1 << 20


class TheoremViolationError(AssertionError):
    """A proven bound failed; this means a bug, not data."""


def make_grid(rule: str, limit: int) -> np.ndarray:
    """Sample points in [1, limit].

    Rules: ``all``, ``powers`` (powers of ten), ``geometric:R`` (ratio R > 1),
    ``arithmetic:S`` (step S, starting at 1). ``limit`` itself is always included.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    kind, _, arg = rule.partition(":")
    if kind == "all":
        return np.arange(1, limit + 1, dtype=np.int64)
    if kind == "powers":
        pts = [10**k for k in range(0, len(str(limit))) if 10**k <= limit]
    elif kind == "geometric":
        ratio = float(arg or 2.0)
        if not ratio > 1:
            raise ValueError("geometric ratio must exceed 1")
        count = int(math.log(limit) / math.log(ratio)) + 2
        pts = np.unique(np.floor(ratio ** np.arange(count)).astype(np.int64))
        pts = pts[pts <= limit].tolist()
    elif kind == "arithmetic":
        step = int(arg or 1)
        if step < 1:
            raise ValueError("arithmetic step must be >= 1")
        pts = list(range(1, limit + 1, step))
    else:
        raise ValueError(f"unknown grid rule {rule!r}; use all, powers, geometric:R, arithmetic:S")
    return np.union1d(np.asarray(pts, dtype=np.int64), [limit]).astype(np.int64)


def default_bounds(beta: float = 1.0, alpha: float = 0.05, p: float = 1.0) -> list[BoundDefinition]:
    out = []
    for name in BOUND_NAMES:
        kw = {}
        if name.startswith("statmech"):
            kw["beta"] = beta
        if name.endswith("_p"):
            kw["p"] = p
        if name in ("wei_clt", "wei_cheb", "rw_clt", "rw_cheb", "fluct_interval"):
            kw["alpha"] = alpha
        out.append(make_bound(name, **kw))
    return out


_SPEC_RE = re.compile(r"^(?P<name>[a-z0-9_]+)(?::(?P<params>.*))?$")


def parse_bound_spec(spec: str, **defaults: float) -> BoundDefinition:
    """``name`` or ``name:key=value,key=value``; ``defaults`` fill in unspecified parameters the bound accepts."""
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise ValueError(f"bad bound spec {spec!r}")
    params: dict[str, float] = {}
    if m.group("params"):
        for item in m.group("params").split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ValueError(f"bad parameter {item!r} in {spec!r}")
            params[key.strip()] = float(val)
    name = m.group("name")
    probe = make_bound(name)
    for key, val in defaults.items():
        if val is not None and key in probe.params and key not in params:
            params[key] = float(val)
    return make_bound(name, **params)


@dataclass
class BoundSweep:
    """Per-bound summary; full rows are regenerated on demand."""

    bound: BoundDefinition
    evaluated: int
    skipped: int
    violations: np.ndarray
    max_ratio: float
    argmax_n: int | None

    @property
    def domain_note(self) -> str | None:
        if self.skipped == 0:
            return None
        return f"{self.skipped} grid point(s) below n={self.bound.valid_from} skipped (outside stated domain)"


@dataclass
class SweepReport:
    limit: int
    grid: np.ndarray
    mertens: np.ndarray
    per_bound: list[BoundSweep]
    extremal_ratio: float
    extremal_n: int
    notes: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[tuple[str, int]]:
        return [(b.bound.label, int(n)) for b in self.per_bound for n in b.violations]

    @property
    def theorem_violations(self) -> list[tuple[str, int]]:
        return [(b.bound.label, int(n)) for b in self.per_bound if b.bound.is_theorem for n in b.violations]

    def check_theorems(self) -> None:
        bad = self.theorem_violations
        if bad:
            raise TheoremViolationError(f"proven bounds violated at {bad[:10]} ({len(bad)} total)")

    def evaluations(self, index: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
        """Chunks of (n, M, value, ratio, satisfied) for bound ``index`` over its in-domain grid points."""
        bound = self.per_bound[index].bound
        start = int(np.searchsorted(self.grid, bound.valid_from))
        for a in range(start, self.grid.size, _CHUNK):
            n = self.grid[a : a + _CHUNK]
            m = self.mertens[a : a + _CHUNK]
            values = bound_values(bound, n)
            ratio = np.abs(m) / values
            yield n, m, values, ratio, np.abs(m) <= values

    def rows(self, precision: int = DEFAULT_PRECISION) -> Iterator[dict]:
        for idx, sweep_ in enumerate(self.per_bound):
            name, params = sweep_.bound.name, sweep_.bound.params_text
            for n, m, values, ratio, ok in self.evaluations(idx):
                for j in range(n.size):
                    yield {
                        "n": int(n[j]),
                        "M": int(m[j]),
                        "bound_name": name,
                        "params": params,
                        "value": format_number(float(values[j]), precision),
                        "ratio": format_number(float(ratio[j]), precision),
                        "satisfied": "true" if ok[j] else "false",
                    }

    def write_csv(self, fh: IO[str], precision: int = DEFAULT_PRECISION) -> None:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows(precision):
            writer.writerow(row)

    def write_json(self, fh: IO[str], precision: int = DEFAULT_PRECISION) -> None:
        fh.write("[\n")
        first = True
        for row in self.rows(precision):
            row = dict(row, satisfied=row["satisfied"] == "true",
                       value=_json_num(row["value"]), ratio=_json_num(row["ratio"]))
            fh.write(("" if first else ",\n") + "  " + json.dumps(row, sort_keys=False))
            first = False
        fh.write("\n]\n")

    def write_gnuplot(self, directory: str | os.PathLike, precision: int = DEFAULT_PRECISION) -> list[Path]:
        """One two-column ``n value`` file per bound."""
        out_dir = Path(directory)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for idx, sweep_ in enumerate(self.per_bound):
            safe = re.sub(r"[^A-Za-z0-9_.=-]+", "_", sweep_.bound.label).strip("_")
            path = out_dir / f"{safe}.dat"
            with path.open("w", encoding="utf-8") as fh:
                fh.write(f"# n {sweep_.bound.label}\n")
                for n, _, values, _, _ in self.evaluations(idx):
                    fh.writelines(f"{int(a)} {format_number(float(b), precision)}\n" for a, b in zip(n, values))
            paths.append(path)
        return paths

    def summary_lines(self, precision: int = DEFAULT_PRECISION) -> list[str]:
        lines = [
            f"limit={self.limit} grid_points={self.grid.size}",
            f"max |M(n)|/sqrt(n) over n>=2: {format_number(self.extremal_ratio, precision)} at n={self.extremal_n}",
        ]
        for b in self.per_bound:
            tag = "theorem" if b.bound.is_theorem else "probabilistic"
            lines.append(
                f"{b.bound.label} [{tag}] evaluated={b.evaluated} violations={b.violations.size} "
                f"max_ratio={format_number(b.max_ratio, precision)}"
                + (f" at n={b.argmax_n}" if b.argmax_n is not None else "")
            )
        lines.extend(self.notes)
        return lines


def _json_num(text: str):
    if text in ("nan", ""):
        return None
    return int(text) if re.fullmatch(r"-?\d+", text) else float(text)


def sweep(
    limit: int,
    grid: str | np.ndarray = "all",
    bounds: Sequence[BoundDefinition] | None = None,
    table: MertensTable | None = None,
    threads: int | None = None,
) -> SweepReport:
    """Evaluate each bound at every in-domain grid point using one sieve pass for M(n)."""
    if table is None:
        table = mertens_prefix(limit, method="segmented-sieve", threads=threads)
    elif table.start != 1 or table.end < limit:
        raise ValueError("table must start at 1 and reach limit")
    grid_arr = make_grid(grid, limit) if isinstance(grid, str) else np.asarray(grid, dtype=np.int64)
    if grid_arr.size == 0 or grid_arr[0] < 1 or grid_arr[-1] > limit:
        raise ValueError("grid must lie within [1, limit]")
    m = np.asarray(table.values[grid_arr - 1])
    bounds = default_bounds() if bounds is None else list(bounds)

    scaled = np.abs(m[grid_arr >= 2]) / np.sqrt(grid_arr[grid_arr >= 2])
    if scaled.size:
        k = int(np.argmax(scaled))
        extremal_ratio, extremal_n = float(scaled[k]), int(grid_arr[grid_arr >= 2][k])
    else:
        extremal_ratio, extremal_n = float("nan"), 0

    report = SweepReport(limit, grid_arr, m, [], extremal_ratio, extremal_n)
    for bound in bounds:
        start = int(np.searchsorted(grid_arr, bound.valid_from))
        entry = BoundSweep(bound, grid_arr.size - start, start, np.empty(0, np.int64), float("nan"), None)
        report.per_bound.append(entry)
        viol, best, best_n = [], -math.inf, None
        for n, _, _, ratio, ok in report.evaluations(len(report.per_bound) - 1):
            viol.append(n[~ok])
            j = int(np.argmax(ratio))
            if ratio[j] > best:
                best, best_n = float(ratio[j]), int(n[j])
        if viol:
            entry.violations = np.concatenate(viol)
            entry.max_ratio, entry.argmax_n = best, best_n
        note = entry.domain_note
        if note:
            report.notes.append(f"{bound.label}: {note}")
    return report


class CrossoverResult(NamedTuple):
    crossings: list[int]
    reason: str | None = None


def crossover(
    bound_a: BoundDefinition, bound_b: BoundDefinition, lo: int, hi: int, scan_points: int = 4097
) -> CrossoverResult:
    """Integers n in (lo, hi] where sign(A(n) - B(n)) differs from sign(A(n-1) - B(n-1)).

    A coarse scan brackets each sign change, then bisection pins it down on the
    integer lattice. Sign changes that start and end between two scan points
    are not seen.
    """
    start = max(lo, bound_a.valid_from, bound_b.valid_from)
    if start > hi:
        return CrossoverResult([], f"domains do not overlap [{lo}, {hi}] (need n >= {start})")

    def sign(n):
        n = np.atleast_1d(np.asarray(n, dtype=np.int64))
        return np.sign(bound_values(bound_a, n) - bound_values(bound_b, n))

    pts = np.union1d(
        np.round(np.geomspace(start, hi, scan_points)).astype(np.int64),
        np.round(np.linspace(start, hi, scan_points)).astype(np.int64),
    )
    pts = pts[(pts >= start) & (pts <= hi)]
    signs = sign(pts)
    found = []
    for k in np.flatnonzero(signs[1:] != signs[:-1]):
        a, b = int(pts[k]), int(pts[k + 1])
        s_a = signs[k]
        while b - a > 1:
            mid = (a + b) // 2
            if sign(mid)[0] == s_a:
                a = mid
            else:
                b = mid
        found.append(b)
    return CrossoverResult(found)
