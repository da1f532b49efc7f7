"""Deterministic CSV tables and 8-bit PGM snapshots."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import convergence_rates

CSV_HEADER = ("resolution", "l2", "linf", "l2_rate", "linf_rate")


@dataclass
class ErrorReport:
    """One row per ladder rung; the first row carries no rates."""

    rows: list[tuple[int, float, float, float | None, float | None]]
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_errors(cls, resolutions, l2, linf, **metadata) -> "ErrorReport":
        l2_rates = convergence_rates(list(zip(resolutions, l2)))
        linf_rates = convergence_rates(list(zip(resolutions, linf)))
        rows = []
        for k, res in enumerate(resolutions):
            rows.append(
                (
                    int(res),
                    float(l2[k]),
                    float(linf[k]),
                    l2_rates[k - 1] if k else None,
                    linf_rates[k - 1] if k else None,
                )
            )
        return cls(rows, dict(metadata))

    @property
    def l2_rates(self) -> list[float]:
        return [r[3] for r in self.rows[1:]]

    @property
    def linf_rates(self) -> list[float]:
        return [r[4] for r in self.rows[1:]]


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.12g}"


def write_csv(report: ErrorReport, path) -> Path:
    path = Path(path)
    lines = [",".join(CSV_HEADER)]
    for res, l2, linf, r2, rinf in report.rows:
        lines.append(",".join([str(res), _fmt(l2), _fmt(linf), _fmt(r2), _fmt(rinf)]))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path) -> ErrorReport:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected header in {path}")
        for rec in reader:
            rows.append(
                (
                    int(rec["resolution"]),
                    float(rec["l2"]),
                    float(rec["linf"]),
                    float(rec["l2_rate"]) if rec["l2_rate"] else None,
                    float(rec["linf_rate"]) if rec["linf_rate"] else None,
                )
            )
    return ErrorReport(rows)


def write_metadata(metadata: dict, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        for key in sorted(metadata):
            fh.write(f"{key} = {metadata[key]}\n")
    return path


def pgm_bytes(field_values) -> tuple[bytes, float, float]:
    """Affine map of ``[min, max]`` onto ``[0, 255]``; constant fields give 128."""
    f = np.asarray(field_values, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError("PGM output needs a two-dimensional field")
    lo, hi = float(f.min()), float(f.max())
    if hi == lo:
        pix = np.full(f.shape, 128, dtype=np.uint8)
    else:
        pix = np.floor((f - lo) / (hi - lo) * 255.0 + 0.5).astype(np.uint8)
    rows, cols = f.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + pix.tobytes(order="C"), lo, hi


def write_pgm(field_values, path) -> Path:
    """Binary P5 image plus a ``<stem>.range.txt`` sidecar holding min/max."""
    path = Path(path)
    data, lo, hi = pgm_bytes(field_values)
    path.write_bytes(data)
    with open(path.with_suffix(".range.txt"), "w") as fh:
        fh.write(f"min = {lo!r}\nmax = {hi!r}\n")
    return path


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols)


def write_trace(rows, names, path) -> Path:
    path = Path(path)
    header = ["step"]
    for name in names:
        header += [f"std_{name}", f"rms_{name}"]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join([str(row[0])] + [_fmt(v) for v in row[1:]]) + "\n")
    return path

