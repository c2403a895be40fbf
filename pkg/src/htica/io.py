"""Plain-text sample and matrix files.

Both formats are whitespace-delimited decimal floats, one row per line,
written with 17 significant digits so that a float64 round-trips exactly.
An optional first line ``# key=value key=value ...`` carries metadata, e.g.
``# n=3 N=1000 seed=7`` for samples or ``# method=centroid`` for a matrix.
"""

from __future__ import annotations

import io as _io
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .ica import IcaEstimate
from .orthogonalize import Orthogonalizer

FLOAT_FMT = "%.17g"


def format_header(**fields) -> str:
    """``# k=v ...`` with values formatted by ``str`` (lists comma-joined)."""
    parts = []
    for k, v in fields.items():
        if v is None:
            continue
        if isinstance(v, (list, tuple, np.ndarray)):
            v = ",".join(str(x) for x in np.asarray(v).ravel().tolist())
        parts.append(f"{k}={v}")
    return "# " + " ".join(parts)


def parse_header(line: str) -> dict:
    """Inverse of :func:`format_header`; values are left as strings."""
    body = line.lstrip("#").strip()
    out = {}
    for tok in body.split():
        if "=" not in tok:
            raise InvalidInputError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _write(path, M, header: str | None):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    buf = _io.StringIO()
    if header:
        buf.write(header + "\n")
    np.savetxt(buf, M, fmt=FLOAT_FMT)
    Path(path).write_text(buf.getvalue())


def _read(path) -> tuple[np.ndarray, dict]:
    text = Path(path).read_text()
    lines = text.splitlines()
    header = {}
    if lines and lines[0].startswith("#"):
        header = parse_header(lines[0])
        lines = lines[1:]
    rows = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    try:
        M = np.loadtxt(rows, dtype=float, ndmin=2)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{path}: non-finite entries")
    return M, header


def write_samples(path, samples, seed: int | None = None) -> None:
    """Write an ``(N, n)`` sample matrix with an ``n=, N=, seed=`` header."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    _write(path, X, format_header(n=X.shape[1], N=X.shape[0], seed=seed))


def read_samples(path) -> tuple[np.ndarray, dict]:
    """Samples and header fields (``n``, ``N`` and ``seed`` as ints when present).

    Raises
    ------
    InvalidInputError
        On ragged or non-numeric rows, or if the header disagrees with the data.
    """
    X, header = _read(path)
    for key in ("n", "N", "seed"):
        if key in header:
            header[key] = int(header[key])
    if header.get("n", X.shape[1]) != X.shape[1] or header.get("N", X.shape[0]) != X.shape[0]:
        raise InvalidInputError(f"{path}: header {header} does not match data shape {X.shape}")
    return X, header


def write_matrix(path, M, **header) -> None:
    _write(path, M, format_header(**header) if header else None)


def read_matrix(path) -> tuple[np.ndarray, dict]:
    """Square matrix and raw header fields."""
    M, header = _read(path)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{path}: expected a square matrix, got {M.shape}")
    return M, header


def write_orthogonalizer(path, orth: Orthogonalizer) -> None:
    write_matrix(path, orth.B, method=orth.method, eigen_floor=repr(orth.eigen_floor))


def read_orthogonalizer(path) -> Orthogonalizer:
    B, header = read_matrix(path)
    return Orthogonalizer(B, header.get("method", "identity"), float(header.get("eigen_floor", "nan")))


def write_estimate(path, est: IcaEstimate) -> None:
    """``A_hat`` with a header recording contrast, iterations and converged flags."""
    write_matrix(path, est.A_hat, contrast=est.contrast,
                 iterations=[int(i) for i in est.iterations],
                 converged=[int(c) for c in est.converged], restarts=est.restarts)
