"""Command-line interface.

Subcommands::

    htica gen    --eta 6,6,2.1 --N 10000 --seed 1 --out x.txt [--mixing-out A.txt]
    htica orth   x.txt --method centroid --out B.txt
    htica damp   x.txt --seed 1 [--R 2.0] [--out y.txt]
    htica run    x.txt --method centroid --contrast pow3 --seed 1 [--truth A.txt] [--out Ahat.txt]
    htica sweep  --config exp.cfg --seed 1 [--out results.csv] [--plot-dir plots/]
    htica eval   A.txt Ahat.txt

Exit status: 0 on success, 1 for usage or input errors, 2 for numerical
failures (singular scatter, unconverged FastICA, LP failure, ...).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as hio
from . import rng as _rng
from .damping import DampingParams, choose_R, damp
from .errors import (
    DegenerateMatrixError,
    DegenerateSampleSpanError,
    EmptyOutputError,
    HticaError,
    SingularScatterError,
    SolverFailure,
    UndampableSampleError,
    UnconvergedResultError,
)
from .evaluation import evaluate
from .harness import (
    config_from_mapping,
    emit_csv,
    emit_plot_data,
    parse_config_text,
    parse_float_list,
    run_experiment,
)
from .ica import CONTRASTS, PipelineConfig, run_htica
from .orthogonalize import METHODS, orthogonalize
from .sampling import IcaInstance, generate_ica_data, generate_mixing_matrix

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

NUMERICAL_ERRORS = (DegenerateMatrixError, DegenerateSampleSpanError, EmptyOutputError,
                    SingularScatterError, SolverFailure, UndampableSampleError,
                    UnconvergedResultError)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for numerical failure here
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def cmd_gen(args) -> int:
    eta = parse_float_list(args.eta)
    if args.n is not None and len(eta) == 1:
        eta = eta * args.n
    if args.mixing == "from-file":
        if not args.mixing_file:
            raise _UsageError("--mixing from-file needs --mixing-file")
        A, _ = hio.read_matrix(args.mixing_file)
    else:
        A = generate_mixing_matrix(len(eta), _rng.substream(args.seed, _rng.MIXING),
                                   orthogonal=args.mixing == "orthogonal")
    inst = IcaInstance(A, eta, args.seed, args.normalize)
    X = generate_ica_data(inst, args.N)
    hio.write_samples(args.out, X, seed=args.seed)
    if args.mixing_out:
        hio.write_matrix(args.mixing_out, inst.A, kind="mixing", seed=args.seed)
    return EXIT_OK


def cmd_orth(args) -> int:
    X, _ = hio.read_samples(args.samples)
    A = hio.read_matrix(args.truth)[0] if args.truth else None
    orth = orthogonalize(X, args.method, A=A, body_size=args.body_size)
    if args.out:
        hio.write_orthogonalizer(args.out, orth)
    else:
        print(hio.format_header(method=orth.method, eigen_floor=repr(orth.eigen_floor)))
        np.savetxt(sys.stdout, orth.B, fmt=hio.FLOAT_FMT)
    return EXIT_OK


def cmd_damp(args) -> int:
    X, _ = hio.read_samples(args.samples)
    params = DampingParams(args.R, args.target_rejection)
    R = args.R if args.R is not None else choose_R(X, params)
    report = damp(X, R, _rng.substream(args.seed, _rng.DAMPING))
    print(",".join(("R", "acceptance_rate", "K_estimate")))
    print(report.summary())
    if args.out:
        hio.write_samples(args.out, report.accepted, seed=args.seed)
    return EXIT_OK


def cmd_run(args) -> int:
    X, _ = hio.read_samples(args.samples)
    A = hio.read_matrix(args.truth)[0] if args.truth else None
    config = PipelineConfig(args.method, not args.no_damping,
                            DampingParams(target_rejection=args.target_rejection),
                            args.contrast, args.max_restarts, body_size=args.body_size,
                            orth_size=args.orth_size)
    res = run_htica(X, config, rng=args.seed, A_truth=A)
    est = res.estimate
    if args.out:
        hio.write_estimate(args.out, est)
    print(f"pipeline {config.label}: restarts={est.restarts} iterations={int(est.iterations.max())}")
    if res.damping is not None:
        print(f"damping R={res.damping.R:.6g} accept_rate={res.damping.acceptance_rate:.4f}")
    if res.report is not None:
        d = res.report.diagnostics
        print(f"frob={res.report.frobenius_error:.6g} amari={res.report.amari_index:.6g} "
              f"sigma_min={d.sigma_min_normalized:.6g} cond={d.condition_number:.6g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = parse_config_text(open(args.config).read()) if args.config else {}
    for key in ("n", "eta", "mixing", "mixing_file", "N_grid", "trials", "pipelines",
                "body_size", "orth_size", "plot_dir"):
        v = getattr(args, key)
        if v is not None:
            values[key] = str(v)
    values["seed"] = str(args.seed)
    if args.out:
        values["output_path"] = args.out
    if args.timing:
        values["timing"] = "true"
    config = config_from_mapping(values)

    def progress(N, t):
        if args.verbose:
            print(f"N={N} trial={t} done", file=sys.stderr)

    table = run_experiment(config, progress)
    emit_csv(table, config.output_path)
    if config.plot_dir:
        emit_plot_data(table, config.plot_dir)
    failed = sum(r.failed for r in table)
    print(f"wrote {len(table)} rows to {config.output_path} ({failed} failed)")
    return EXIT_OK


def cmd_eval(args) -> int:
    A, _ = hio.read_matrix(args.truth)
    A_hat, _ = hio.read_matrix(args.estimate)
    A = A / np.linalg.norm(A, axis=0)
    A_hat = A_hat / np.linalg.norm(A_hat, axis=0)
    rep = evaluate(A, A_hat)
    print("frob,amari,permutation,signs")
    perm = " ".join(str(int(p)) for p in rep.matching.permutation)
    signs = " ".join("+" if s > 0 else "-" for s in rep.matching.signs)
    print(f"{rep.frobenius_error!r},{rep.amari_index!r},{perm},{signs}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="htica", description="Heavy-tailed ICA toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic sample file")
    g.add_argument("--eta", required=True, help="tail exponents, e.g. 6,6,2.1 or 6*8,2.1*2")
    g.add_argument("--n", type=int, help="dimension, when --eta is a single value")
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--mixing", choices=("random-unit-columns", "orthogonal", "from-file"),
                   default="random-unit-columns")
    g.add_argument("--mixing-file")
    g.add_argument("--normalize", action="store_true", help="rescale sources to E|S_i| = 1")
    g.add_argument("--out", required=True)
    g.add_argument("--mixing-out")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("orth", help="compute an orthogonalization matrix B")
    o.add_argument("samples")
    o.add_argument("--method", choices=METHODS, default="centroid")
    o.add_argument("--truth", help="mixing matrix file (needed by --method oracle)")
    o.add_argument("--body-size", type=int)
    o.add_argument("--out")
    o.set_defaults(func=cmd_orth)

    d = sub.add_parser("damp", help="Gaussian damping by rejection sampling")
    d.add_argument("samples")
    d.add_argument("--R", type=float)
    d.add_argument("--target-rejection", type=float, default=0.25)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out")
    d.set_defaults(func=cmd_damp)

    r = sub.add_parser("run", help="run one pipeline on a sample file")
    r.add_argument("samples")
    r.add_argument("--method", choices=METHODS, default="centroid")
    r.add_argument("--contrast", choices=CONTRASTS, default="pow3")
    r.add_argument("--no-damping", action="store_true")
    r.add_argument("--target-rejection", type=float, default=0.25)
    r.add_argument("--max-restarts", type=int, default=10)
    r.add_argument("--body-size", type=int)
    r.add_argument("--orth-size", type=int)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--truth", help="true mixing matrix file, enables the error report")
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a full experiment and write a CSV")
    s.add_argument("--config", help="key = value experiment file; flags override it")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--eta")
    s.add_argument("--mixing")
    s.add_argument("--mixing-file")
    s.add_argument("--N-grid", dest="N_grid")
    s.add_argument("--trials", type=int)
    s.add_argument("--pipelines", help="comma list of method/contrast/damped|raw")
    s.add_argument("--body-size")
    s.add_argument("--orth-size")
    s.add_argument("--plot-dir")
    s.add_argument("--out")
    s.add_argument("--timing", action="store_true", help="record wall-clock runtime_ms")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("eval", help="compare a true and an estimated mixing matrix")
    e.add_argument("truth")
    e.add_argument("estimate")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"htica: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (HticaError, ValueError, OSError) as exc:
        print(f"htica: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
