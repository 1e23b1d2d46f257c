"""Monte Carlo estimate of how many random states are (detectably) 1-distillable.

Sample ``i`` at dimension ``d`` is a pure function of ``(master_seed, d, i)``,
so runs can be split across processes and resumed from a partial CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

from .criteria import is_ppt
from .families import random_density
from .peasant import SearchConfig, random_search
from .sampling import derive_rng, derive_seed

__all__ = [
    "VolumeConfig",
    "VolumeRecord",
    "DimSummary",
    "RecordFormatError",
    "CSV_HEADER",
    "run_sample",
    "run_volume",
    "summarize",
    "write_records",
    "load_records",
    "load_config",
    "config_to_json",
]

CSV_HEADER = ("d", "sample_index", "npt", "detected", "first_hit", "best_value")


class RecordFormatError(ValueError):
    def __init__(self, path: str, line: int, reason: str):
        self.path, self.line = path, line
        super().__init__(f"{path}, line {line}: {reason}")


@dataclass(frozen=True)
class VolumeRecord:
    d: int
    sample_index: int
    npt: bool
    detected: bool
    first_hit: int | None
    best_value: float

    def __post_init__(self):
        if self.detected and not self.npt:
            raise ValueError("a PPT sample cannot be detected")
        if (self.first_hit is not None) != self.detected:
            raise ValueError("first_hit must be present exactly when detected")

    def to_row(self) -> list[str]:
        return [
            str(self.d),
            str(self.sample_index),
            str(int(self.npt)),
            str(int(self.detected)),
            "" if self.first_hit is None else str(self.first_hit),
            "%.17g" % self.best_value,
        ]


@dataclass(frozen=True)
class VolumeConfig:
    """Survey configuration.

    When ``opt_steps_per_d`` is set, sample searches at dimension ``d`` use
    ``opt_steps_per_d * d`` optimisation steps instead of ``search.opt_steps``.
    """

    dims: tuple[int, ...] = (3, 4, 5, 6, 7)
    samples_per_dim: int = 2000
    search: SearchConfig = field(default_factory=lambda: SearchConfig(n_tests=200))
    master_seed: int = 0
    output_path: str = "volume.csv"
    opt_steps_per_d: int | None = 50

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.samples_per_dim < 1:
            raise ValueError("samples_per_dim must be at least 1")
        if any(d < 2 for d in self.dims):
            raise ValueError("all dims must be at least 2")
        if len(set(self.dims)) != len(self.dims):
            raise ValueError("dims must be distinct")

    def search_for(self, d: int) -> SearchConfig:
        if self.opt_steps_per_d is None:
            return self.search
        return replace(self.search, opt_steps=self.opt_steps_per_d * d)

    def tasks(self) -> list[tuple[int, int]]:
        return [(d, i) for d in self.dims for i in range(self.samples_per_dim)]


def run_sample(d: int, index: int, master_seed: int, search: SearchConfig) -> VolumeRecord:
    """Draw sample ``index`` at dimension ``d`` and search it."""
    rho = random_density(d, d, derive_rng(master_seed, d, index))
    npt = not is_ppt(rho)
    cfg = replace(search, seed=derive_seed(master_seed, d, index, "search"))
    out = random_search(rho, cfg)
    detected = out.detected and npt
    return VolumeRecord(d, index, npt, detected, out.first_hit_index if detected else None, out.best_value)


def _run_task(args) -> VolumeRecord:
    d, i, seed, search = args
    return run_sample(d, i, seed, search)


# --------------------------------------------------------------------------
# persistence


def _format(records: Iterable[VolumeRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in records:
        w.writerow(r.to_row())
    return buf.getvalue()


def write_records(records: Sequence[VolumeRecord], path: str, append: bool = False) -> None:
    """Write records as CSV (header first unless appending to a non-empty file)."""
    need_header = not append or not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a" if append else "w", newline="") as fh:
        if need_header:
            fh.write(",".join(CSV_HEADER) + "\n")
        fh.write(_format(records))


def _parse_bool(s: str, path: str, line: int, name: str) -> bool:
    if s not in ("0", "1"):
        raise RecordFormatError(path, line, f"{name} must be 0 or 1, got {s!r}")
    return s == "1"


def _parse_row(row: list[str], path: str, line: int) -> VolumeRecord:
    if len(row) != len(CSV_HEADER):
        raise RecordFormatError(path, line, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
    try:
        d, idx = int(row[0]), int(row[1])
        first = None if row[4] == "" else int(row[4])
        best = float(row[5])
    except ValueError as exc:
        raise RecordFormatError(path, line, str(exc)) from None
    npt = _parse_bool(row[2], path, line, "npt")
    det = _parse_bool(row[3], path, line, "detected")
    try:
        return VolumeRecord(d, idx, npt, det, first, best)
    except ValueError as exc:
        raise RecordFormatError(path, line, str(exc)) from None


def load_records(path: str) -> list[VolumeRecord]:
    """Read a records CSV; an empty file gives an empty list."""
    with open(path, newline="") as fh:
        text = fh.read()
    if text == "":
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    header = next(csv.reader([lines[0]]))
    if tuple(header) != CSV_HEADER:
        raise RecordFormatError(path, 1, f"bad header {header!r}")
    return [_parse_row(next(csv.reader([ln])), path, n) for n, ln in enumerate(lines[1:], start=2)]


def _valid_prefix(path: str, tasks: list[tuple[int, int]]) -> int:
    """Number of leading records in ``path`` that match ``tasks``; trims anything after them."""
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return 0
    with open(path, newline="") as fh:
        text = fh.read()
    complete = text[: text.rfind("\n") + 1]  # drop a torn final line
    lines = complete.split("\n")[:-1]
    if not lines or tuple(lines[0].split(",")) != CSV_HEADER:
        raise RecordFormatError(path, 1, "existing output has an unexpected header")
    keep = 0
    for n, ln in enumerate(lines[1:], start=2):
        if keep >= len(tasks):
            break
        rec = _parse_row(next(csv.reader([ln])), path, n)
        if (rec.d, rec.sample_index) != tasks[keep]:
            break
        keep += 1
    kept_text = "\n".join(lines[: keep + 1]) + "\n"
    if kept_text != text:
        with open(path, "w", newline="") as fh:
            fh.write(kept_text)
    return keep


# --------------------------------------------------------------------------
# driver


def run_volume(cfg: VolumeConfig, workers: int = 1, resume: bool = True, progress=None) -> list[VolumeRecord]:
    """Run (or finish) the survey, appending each record to ``cfg.output_path``.

    Existing output whose leading records match the task order is kept and
    the run continues after it; with ``resume=False`` the file is rewritten.
    Results are identical for any number of ``workers``.
    """
    tasks = cfg.tasks()
    path = cfg.output_path
    try:
        if not resume or not os.path.exists(path):
            write_records([], path)
        done = _valid_prefix(path, tasks)
    except OSError as exc:
        raise OSError(f"cannot write output {path!r}: {exc}") from exc
    pending = [(d, i, cfg.master_seed, cfg.search_for(d)) for d, i in tasks[done:]]
    with open(path, "a", newline="") as fh:
        if workers > 1 and pending:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_run_task, pending, chunksize=8)
                _drain(results, fh, progress)
        else:
            _drain(map(_run_task, pending), fh, progress)
    return load_records(path)


def _drain(results, fh, progress):
    for rec in results:
        fh.write(_format([rec]))
        fh.flush()
        if progress is not None:
            progress(rec)


# --------------------------------------------------------------------------
# summaries


@dataclass(frozen=True)
class DimSummary:
    d: int
    n_samples: int
    n_npt: int
    frac_npt: float
    frac_npt_undetected: float
    frac_all_undetected: float
    frac_npt_first_hit: float
    se_frac_npt: float
    se_npt_undetected: float
    se_all_undetected: float
    se_npt_first_hit: float


def _se(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n) if n > 0 else float("nan")


def summarize(records: Sequence[VolumeRecord]) -> dict[int, DimSummary]:
    """Per-dimension fractions with binomial standard errors."""
    if not records:
        raise ValueError("no records to summarise")
    out = {}
    for d in sorted({r.d for r in records}):
        rs = [r for r in records if r.d == d]
        n = len(rs)
        npt = [r for r in rs if r.npt]
        n_npt = len(npt)
        undet = sum(1 for r in npt if not r.detected)
        first = sum(1 for r in npt if r.first_hit == 1)
        f_npt = n_npt / n
        f_und = undet / n_npt if n_npt else float("nan")
        f_all = (n - n_npt + undet) / n
        f_first = first / n_npt if n_npt else float("nan")
        out[d] = DimSummary(
            d, n, n_npt, f_npt, f_und, f_all, f_first,
            _se(f_npt, n), _se(f_und, n_npt), _se(f_all, n), _se(f_first, n_npt),
        )
    return out


# --------------------------------------------------------------------------
# configuration files


def config_to_json(cfg: VolumeConfig) -> str:
    data = asdict(cfg)
    data["dims"] = list(cfg.dims)
    return json.dumps(data, indent=2, sort_keys=True)


def load_config(path: str) -> VolumeConfig:
    """Read a JSON file whose keys mirror :class:`VolumeConfig` (``search`` nested)."""
    with open(path) as fh:
        data = json.load(fh)
    known = set(VolumeConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    search = data.pop("search", {})
    bad = set(search) - set(SearchConfig.__dataclass_fields__)
    if bad:
        raise ValueError(f"unknown search keys: {sorted(bad)}")
    return VolumeConfig(search=SearchConfig(**search), **data)
