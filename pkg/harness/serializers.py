# harness/serializers.py
"""On-disk formats: MatrixMarket arrays for matrices and vectors, CSV histories, key: value reports."""
from __future__ import annotations

import csv
import logging
from pathlib import Path

import numpy as np
from scipy.io import mmread, mmwrite

from linalg.models import HermitianMatrix
from problems.models import ProblemInstance, ProblemMeta

from .models import ComparisonRow

logger = logging.getLogger(__name__)

CSV_HEADER = ["strategy", "trial", "sweep", "error_sq", "residual"]
PRECISION = 17

# file names inside a problem directory (distinct under case-insensitive file systems)
MATRIX_FILE = "B.mtx"
FACTOR_FILE = "A.mtx"
RHS_FILE = "rhs.mtx"
SOLUTION_FILE = "ybar.mtx"
START_FILE = "y0.mtx"
META_FILE = "meta.txt"


# -------- MatrixMarket --------
def write_matrix(path, matrix) -> None:
    """Hermitian matrices go out as `complex hermitian` (or `real general` when real)."""
    path = Path(path)
    if isinstance(matrix, HermitianMatrix):
        if matrix.is_real:
            mmwrite(str(path), matrix.entries.real, field="real", precision=PRECISION, symmetry="general")
        else:
            mmwrite(str(path), matrix.entries, field="complex", precision=PRECISION, symmetry="hermitian")
        return
    values = np.asarray(matrix)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    if np.iscomplexobj(values) and np.any(values.imag):
        mmwrite(str(path), values, field="complex", precision=PRECISION, symmetry="general")
    else:
        mmwrite(str(path), values.real, field="real", precision=PRECISION, symmetry="general")


def _read_array(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing file {path}")
    values = mmread(str(path))
    if hasattr(values, "toarray"):
        values = values.toarray()
    return np.asarray(values, dtype=np.complex128)


def read_matrix(path) -> HermitianMatrix:
    return HermitianMatrix(_read_array(path))


def read_factor(path) -> np.ndarray:
    return _read_array(path)


def read_vector(path) -> np.ndarray:
    values = _read_array(path)
    if values.ndim != 2 or values.shape[1] != 1:
        raise ValueError(f"{path}: expected an n x 1 array, got {values.shape}")
    return values[:, 0].copy()


# -------- problem directories --------
def write_problem(directory, instance: ProblemInstance) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name, value):
        target = directory / name
        write_matrix(target, value)
        written.append(target)

    put(MATRIX_FILE, instance.b_matrix)
    if instance.a is not None:
        put(FACTOR_FILE, instance.a)
    put(RHS_FILE, instance.b)
    put(SOLUTION_FILE, instance.ybar)
    put(START_FILE, instance.y0)
    meta_path = directory / META_FILE
    meta_path.write_text("\n".join(instance.meta.as_lines()) + "\n", encoding="utf-8")
    written.append(meta_path)
    logger.info("wrote %s problem (n=%d) to %s", instance.meta.kind, instance.n, directory)
    return written


def read_problem(directory) -> ProblemInstance:
    """Load a problem directory; the planted solution is required, start vector defaults to zero."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"problem directory {directory} does not exist")
    b_matrix = read_matrix(directory / MATRIX_FILE)
    n = b_matrix.n
    b = read_vector(directory / RHS_FILE)
    ybar = read_vector(directory / SOLUTION_FILE)
    start = directory / START_FILE
    y0 = read_vector(start) if start.exists() else np.zeros(n, dtype=np.complex128)
    for name, vector in (("rhs", b), ("ybar", ybar), ("y0", y0)):
        if vector.shape[0] != n:
            raise ValueError(f"{name} has length {vector.shape[0]}, expected {n}")

    factor = directory / FACTOR_FILE
    a = read_factor(factor) if factor.exists() else None
    if a is not None and a.shape[0] != n:
        raise ValueError(f"factor has {a.shape[0]} rows, expected {n}")
    meta_path = directory / META_FILE
    meta = (
        ProblemMeta.from_lines(meta_path.read_text(encoding="utf-8").splitlines())
        if meta_path.exists()
        else ProblemMeta(kind="file")
    )
    return ProblemInstance(
        b_matrix=b_matrix,
        b=b,
        ybar=ybar,
        y0=y0,
        meta=meta,
        a=a,
        xbar=a.conj().T @ ybar if a is not None else None,
    )


# -------- CSV histories --------
def write_history_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv_row())


def read_history_csv(path) -> list[ComparisonRow]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty history")
        if list(reader.fieldnames) != CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
        rows = [ComparisonRow.from_csv_row(row) for row in reader]
    if not rows:
        raise ValueError(f"{path}: empty history")
    return rows


def write_table_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# -------- reports --------
def format_value(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (complex, np.complexfloating)):
        if value.imag == 0:
            return f"{float(value.real):.17g}"
        return f"{float(value.real):.17g}{float(value.imag):+.17g}j"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def report_lines(pairs) -> list[str]:
    return [f"{key}: {format_value(value)}" for key, value in pairs]
