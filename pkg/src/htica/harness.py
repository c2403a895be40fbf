"""Synthetic experiments: sample-size sweeps over several pipelines.

An experiment draws, for every ``(N, trial)``, a fresh instance and sample,
runs every pipeline on that same sample, and records one :class:`ResultRow`
per pipeline.  All randomness is derived from the master seed by key, so the
table does not depend on the order in which the work is done.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import rng as _rng
from .damping import DampingParams
from .errors import EmptyTableError, HticaError, InvalidParameterError
from .ica import CONTRASTS, PipelineConfig, fit_orthogonalizer, run_htica
from .orthogonalize import METHODS, diagnostics
from .sampling import IcaInstance, generate_ica_data, generate_mixing_matrix

MIXINGS = ("random-unit-columns", "orthogonal", "from-file")
CSV_HEADER = ("N", "trial", "method", "contrast", "damping", "frob", "amari",
              "sigma_min", "cond", "R", "accept_rate", "runtime_ms")
NA = "NA"

# the centroid body and B are fitted on at most this many rows
DEFAULT_BODY_SIZE = 1000
DEFAULT_ORTH_SIZE = 10000


def parse_pipeline(label: str, **kwargs) -> PipelineConfig:
    """``method/contrast/damped`` (or ``raw``) into a :class:`PipelineConfig`.

    The contrast and damping parts may be omitted (defaults ``pow3``,
    ``damped``).

    Examples
    --------
    >>> parse_pipeline("covariance/tanh/raw").label
    'covariance/tanh/raw'
    """
    parts = [p.strip() for p in label.strip().split("/")]
    if not 1 <= len(parts) <= 3 or not parts[0]:
        raise InvalidParameterError(f"bad pipeline label {label!r}")
    method = parts[0]
    contrast = parts[1] if len(parts) > 1 else "pow3"
    damp = parts[2] if len(parts) > 2 else "damped"
    if damp not in ("damped", "raw"):
        raise InvalidParameterError(f"damping part of {label!r} must be 'damped' or 'raw'")
    return PipelineConfig(method, damp == "damped", contrast=contrast, **kwargs)


def parse_float_list(text) -> list[float]:
    # "6*8, 2.1*2" expands to eight 6s and two 2.1s
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "*" in tok:
            v, k = tok.split("*", 1)
            out.extend([float(v)] * int(k))
        else:
            out.append(float(tok))
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep over sample sizes, trials and pipelines.

    Attributes
    ----------
    n : int
    eta : tuple of float
        One tail exponent per source.
    mixing : str
        ``random-unit-columns`` (fresh Gaussian A per trial), ``orthogonal``
        (fresh Haar-orthogonal A per trial) or ``from-file``.
    N_grid : tuple of int
        Strictly increasing sample sizes.
    trials : int
    seed : int
        Master seed.
    pipelines : tuple of PipelineConfig
    output_path : str
        CSV destination.
    mixing_file : str or None
        Matrix file for ``from-file``.
    body_size, orth_size : int or None
        Defaults for pipelines that leave them unset.
    normalize_first_moment : bool
    timing : bool
        Record wall-clock ``runtime_ms``; off by default so that the CSV is
        byte-reproducible (the column then reads ``NA``).
    plot_dir : str or None
        Where :func:`emit_plot_data` writes, if anywhere.
    """

    n: int
    eta: tuple
    N_grid: tuple
    seed: int
    mixing: str = "random-unit-columns"
    trials: int = 10
    pipelines: tuple = field(default_factory=lambda: (PipelineConfig(),))
    output_path: str = "results.csv"
    mixing_file: str | None = None
    body_size: int | None = DEFAULT_BODY_SIZE
    orth_size: int | None = DEFAULT_ORTH_SIZE
    normalize_first_moment: bool = False
    timing: bool = False
    plot_dir: str | None = None

    def __post_init__(self):
        eta = tuple(float(e) for e in np.atleast_1d(self.eta))
        if len(eta) == 1 and self.n > 1:
            eta = eta * self.n
        if self.n < 1 or len(eta) != self.n:
            raise InvalidParameterError(f"eta has {len(eta)} entries for n={self.n}")
        grid = tuple(int(N) for N in self.N_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise InvalidParameterError(f"N_grid must be positive and strictly increasing, got {grid}")
        if self.trials < 1:
            raise InvalidParameterError("trials must be at least 1")
        if self.mixing not in MIXINGS:
            raise InvalidParameterError(f"mixing must be one of {MIXINGS}")
        if self.mixing == "from-file" and not self.mixing_file:
            raise InvalidParameterError("mixing=from-file needs mixing_file")
        if self.seed < 0:
            raise InvalidParameterError("seed must be non-negative")
        if not self.pipelines:
            raise InvalidParameterError("at least one pipeline is required")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "N_grid", grid)
        object.__setattr__(self, "pipelines", tuple(self._fill(p) for p in self.pipelines))

    def _fill(self, p: PipelineConfig) -> PipelineConfig:
        return replace(p, body_size=p.body_size if p.body_size is not None else self.body_size,
                       orth_size=p.orth_size if p.orth_size is not None else self.orth_size)


_INT_KEYS = {"n", "trials", "seed", "body_size", "orth_size", "max_restarts", "max_iter"}
_BOOL_WORDS = {"1": True, "true": True, "yes": True, "on": True,
               "0": False, "false": False, "no": False, "off": False}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines into a dict of strings; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"line {lineno}: expected key = value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def config_from_mapping(values: dict) -> ExperimentConfig:
    """Build a config from string (or already typed) values.

    Recognised keys: ``n, eta, mixing, mixing_file, N_grid, trials, seed,
    pipelines, output (or output_path), body_size, orth_size,
    target_rejection, max_restarts, max_iter, normalize_first_moment,
    timing, plot_dir``.  ``body_size``/``orth_size`` accept ``none``.
    """
    v = dict(values)
    known = {"n", "eta", "mixing", "mixing_file", "N_grid", "trials", "seed", "pipelines",
             "output", "output_path", "body_size", "orth_size", "target_rejection",
             "max_restarts", "max_iter", "normalize_first_moment", "timing", "plot_dir"}
    unknown = set(v) - known
    if unknown:
        raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
    try:
        for k in list(v):
            if k in _INT_KEYS and isinstance(v[k], str):
                v[k] = None if v[k].lower() == "none" else int(v[k])
        for k in ("normalize_first_moment", "timing"):
            if isinstance(v.get(k), str):
                v[k] = _BOOL_WORDS[v[k].lower()]
        eta = parse_float_list(v["eta"]) if isinstance(v.get("eta"), str) else v.get("eta")
        grid = v.get("N_grid")
        if isinstance(grid, str):
            grid = [int(float(x)) for x in parse_float_list(grid)]
        n = v.get("n", len(eta) if eta is not None else None)
    except (KeyError, ValueError) as exc:
        raise InvalidParameterError(f"bad config value: {exc}") from exc
    if n is None or eta is None or grid is None or "seed" not in v:
        raise InvalidParameterError("config needs at least eta, N_grid and seed")

    pkw = {}
    if "target_rejection" in v:
        pkw["damping_params"] = DampingParams(target_rejection=float(v["target_rejection"]))
    for k in ("max_restarts", "max_iter"):
        if v.get(k) is not None:
            pkw[k] = v[k]
    labels = v.get("pipelines", "centroid/pow3/damped")
    if isinstance(labels, str):
        labels = [s for s in (t.strip() for t in labels.split(",")) if s]
    pipelines = tuple(p if isinstance(p, PipelineConfig) else parse_pipeline(p, **pkw) for p in labels)

    kw = dict(n=int(n), eta=tuple(eta), N_grid=tuple(grid), seed=int(v["seed"]), pipelines=pipelines)
    for k in ("mixing", "mixing_file", "trials", "body_size", "orth_size",
              "normalize_first_moment", "timing", "plot_dir"):
        if k in v:
            kw[k] = v[k]
    out = v.get("output_path", v.get("output"))
    if out is not None:
        kw["output_path"] = out
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text()))


@dataclass(frozen=True)
class ResultRow:
    """One ``(N, trial, pipeline)`` outcome; ``nan`` marks missing values."""

    N: int
    trial: int
    method: str
    contrast: str
    damping: bool
    frob: float = math.nan
    amari: float = math.nan
    sigma_min: float = math.nan
    cond: float = math.nan
    R: float = math.nan
    accept_rate: float = math.nan
    runtime_ms: float = math.nan

    @property
    def failed(self) -> bool:
        return math.isnan(self.frob)


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name: str, **where) -> np.ndarray:
        """Values of ``name`` over rows matching every ``field=value`` in ``where``."""
        return np.array([getattr(r, name) for r in self.rows
                         if all(getattr(r, k) == val for k, val in where.items())], dtype=float)

    def __eq__(self, other):
        if not isinstance(other, ResultTable) or len(self) != len(other):
            return False
        return all(_row_key(a) == _row_key(b) for a, b in zip(self.rows, other.rows))


def _row_key(r: ResultRow):
    # nan-aware equality
    return tuple("nan" if isinstance(x, float) and math.isnan(x) else x
                 for x in (r.N, r.trial, r.method, r.contrast, r.damping, r.frob, r.amari,
                           r.sigma_min, r.cond, r.R, r.accept_rate, r.runtime_ms))


def instance_for_trial(config: ExperimentConfig, N: int, trial: int, mixing_matrix=None) -> IcaInstance:
    """Instance whose mixing matrix and sources come from ``(seed, TRIAL, N, trial)``."""
    seed = _rng.derive_seed(config.seed, _rng.TRIAL, N, trial)
    if config.mixing == "from-file":
        A = mixing_matrix
    else:
        A = generate_mixing_matrix(config.n, _rng.substream(seed, _rng.MIXING),
                                   orthogonal=config.mixing == "orthogonal")
    return IcaInstance(A, config.eta, seed, config.normalize_first_moment)


def run_trial(config: ExperimentConfig, N: int, trial: int, mixing_matrix=None) -> list[ResultRow]:
    """Run every pipeline on one shared sample; failures become ``nan`` rows."""
    inst = instance_for_trial(config, N, trial, mixing_matrix)
    X = generate_ica_data(inst, N)
    orth_cache = {}
    rows = []
    for k, pipe in enumerate(config.pipelines):
        t0 = time.perf_counter()
        vals = {}
        key = (pipe.orthogonalizer, pipe.body_size, pipe.orth_size)
        try:
            if key not in orth_cache:
                orth_cache[key] = fit_orthogonalizer(X, pipe, inst.A)
            orth = orth_cache[key]
            d = diagnostics(orth, inst.A)
            vals.update(sigma_min=d.sigma_min_normalized, cond=d.condition_number)
            res = run_htica(X, pipe, rng=_rng.derive_seed(inst.seed, _rng.PIPELINE, k),
                            A_truth=inst.A, orthogonalizer=orth)
            if res.damping is not None:
                vals.update(R=res.damping.R, accept_rate=res.damping.acceptance_rate)
            vals.update(frob=res.report.frobenius_error, amari=res.report.amari_index)
        except HticaError:
            # a failed pipeline keeps whatever diagnostics it reached
            vals.pop("frob", None)
            vals.pop("amari", None)
        runtime = (time.perf_counter() - t0) * 1e3 if config.timing else math.nan
        rows.append(ResultRow(N, trial, pipe.orthogonalizer, pipe.contrast, pipe.damping,
                              runtime_ms=runtime, **vals))
    return rows


def run_experiment(config: ExperimentConfig, progress=None) -> ResultTable:
    """All ``(N, trial, pipeline)`` rows, in that order.

    Parameters
    ----------
    progress : callable, optional
        Called as ``progress(N, trial)`` after each trial.
    """
    A_file = None
    if config.mixing == "from-file":
        from .io import read_matrix
        A_file, _ = read_matrix(config.mixing_file)
    rows = []
    for N in config.N_grid:
        for t in range(config.trials):
            rows.extend(run_trial(config, N, t, A_file))
            if progress is not None:
                progress(N, t)
    return ResultTable(rows)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "on" if x else "off"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) and not math.isfinite(x):
        return NA
    return repr(float(x))


def emit_csv(table: ResultTable, path) -> None:
    """Write the table with the fixed header; missing values as ``NA``.

    Raises
    ------
    EmptyTableError
        If the table has no rows.
    OSError
        If ``path`` cannot be written.
    """
    if len(table) == 0:
        raise EmptyTableError("refusing to write an empty result table")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in table:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_HEADER])


def _parse_float(s: str) -> float:
    return math.nan if s == NA else float(s)


def parse_csv(path) -> ResultTable:
    """Inverse of :func:`emit_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise InvalidParameterError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            N, trial, method, contrast, damping, *nums = rec
            rows.append(ResultRow(int(N), int(trial), method, contrast, damping == "on",
                                  *(_parse_float(x) for x in nums)))
    return ResultTable(rows)


def quartiles(values) -> tuple[float, float, float]:
    """``(median, 25th, 75th)`` with linear interpolation between order statistics.

    Examples
    --------
    >>> quartiles([1, 2, 3, 4])
    (2.5, 1.75, 3.25)
    """
    v = np.asarray(values, dtype=float)
    q = np.percentile(v, [50, 25, 75], method="linear")
    return float(q[0]), float(q[1]), float(q[2])


def plot_series(table: ResultTable) -> dict:
    """``{(method, contrast, damping): [(N, median, q25, q75), ...]}`` of ``frob``.

    Failed runs are left out; an ``N`` where every run failed gets ``nan``s.
    """
    groups: dict = {}
    for r in table:
        groups.setdefault((r.method, r.contrast, r.damping), {}).setdefault(r.N, []).append(r.frob)
    out = {}
    for key, by_N in groups.items():
        series = []
        for N in sorted(by_N):
            ok = [x for x in by_N[N] if not math.isnan(x)]
            series.append((N, *quartiles(ok)) if ok else (N, math.nan, math.nan, math.nan))
        out[key] = series
    return out


def emit_plot_data(table: ResultTable, directory) -> list[Path]:
    """One ``<method>_<contrast>_<damped|raw>.dat`` file per pipeline.

    Columns ``N median q25 q75`` (whitespace separated, ``NA`` for cells
    where every run failed).  Returns the written paths.
    """
    if len(table) == 0:
        raise EmptyTableError("refusing to write plot data for an empty table")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for (method, contrast, damping), series in sorted(plot_series(table).items()):
        p = directory / f"{method}_{contrast}_{'damped' if damping else 'raw'}.dat"
        lines = ["# N median q25 q75"]
        lines += [" ".join(_fmt(x) for x in row) for row in series]
        p.write_text("\n".join(lines) + "\n")
        paths.append(p)
    return paths


def median_errors(table: ResultTable, N: int | None = None) -> dict:
    """Median ``frob`` per ``(method, contrast, damping)``, failures counted as ``inf``."""
    out = {}
    for r in table:
        if N is not None and r.N != N:
            continue
        out.setdefault((r.method, r.contrast, r.damping), []).append(
            math.inf if r.failed else r.frob)
    return {k: float(np.median(v)) for k, v in out.items()}


__all__ = [
    "CSV_HEADER", "CONTRASTS", "METHODS", "MIXINGS", "ExperimentConfig", "ResultRow", "ResultTable",
    "config_from_mapping", "emit_csv", "emit_plot_data", "instance_for_trial", "load_config",
    "median_errors", "parse_config_text", "parse_csv", "parse_pipeline", "plot_series", "quartiles",
    "run_experiment", "run_trial",
]
