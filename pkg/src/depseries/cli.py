"""Command line interface.

Five subcommands, one report schema:

* ``criteria``  deterministic criterion sums over a truncation ladder,
* ``simulate``  Monte Carlo check of the maximal-inequality bounds,
* ``schur``     row-ratio boundedness estimate for power-decay kernels,
* ``measure``   decay envelope and dimension witness for a measure,
* ``ae-probe``  tail oscillation of trig partial sums at sampled points.

Every command writes a JSON (or CSV summary) report; the default
location is $DEPSERIES_OUT_DIR/<command>-report.json, falling back to
the working directory. Exit status: 0 success, 2 bad input, 3 numerical
failure, 4 at least one bound comparison failed (the report is written
before exiting). A --config JSON file supplies defaults for any option
not given on the command line.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import criteria, kernels, measures, montecarlo, report
from .errors import DegenerateFitError, NumericalError, ValidationError

OUT_DIR_ENV = "DEPSERIES_OUT_DIR"
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_BOUND_FAILURE = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="depseries",
        description="convergence criteria and Monte Carlo bound checks "
                    "for series of dependent random terms",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="report path ('-' for stdout); default "
                                      f"$%s/<command>-report.json" % OUT_DIR_ENV)
        sp.add_argument("--format", choices=("json", "csv-summary"), default=None,
                        help="report format (default json)")
        sp.add_argument("--config", help="JSON file with option defaults")

    sp = sub.add_parser("criteria", help="deterministic criterion sums")
    sp.add_argument("--coeffs", required=True, help="coefficient file (.csv or .json)")
    sp.add_argument("--kernel", required=True, help="kernel descriptor")
    sp.add_argument("--trunc", required=True,
                    help="comma separated truncation points, e.g. 64,128,256")
    common(sp)

    sp = sub.add_parser("simulate", help="Monte Carlo bound verification")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("-N", dest="n", type=int, default=None, help="truncation length")
    sp.add_argument("--reps", type=int, default=None, help="replicate count")
    sp.add_argument("--seed", type=int, default=None, help="RNG seed (u64)")
    sp.add_argument("--bounds", default=None,
                    help="comma separated subset of lemma,theorem,blocks,sudakov")
    sp.add_argument("--field", choices=("real", "complex"), default=None)
    sp.add_argument("--sigma-margin", type=float, default=None,
                    help="statistical margin in standard errors (default 3)")
    sp.add_argument("--chunk", type=int, default=None, help="replicates per chunk")
    sp.add_argument("--no-repair", action="store_true",
                    help="refuse indefinite covariances instead of clipping")
    sp.add_argument("--dump-maxima", metavar="PATH", default=None,
                    help="write per-replicate sup|S_j| values to this CSV")
    common(sp)

    sp = sub.add_parser("schur", help="row-ratio boundedness estimate")
    sp.add_argument("-a", type=float, required=True, help="off-diagonal decay exponent")
    sp.add_argument("-b", type=float, required=True, help="row/column weight exponent")
    sp.add_argument("-c", type=float, required=True, help="test vector exponent")
    sp.add_argument("--grid", default=None,
                    help="comma separated truncations (default 256,512,1024,2048)")
    common(sp)

    sp = sub.add_parser("measure", help="decay envelope and dimension witness")
    sp.add_argument("--spec", required=True,
                    help="cantor | lebesgue | synthetic:a=..,n_max=.. | table CSV path")
    sp.add_argument("--range", dest="n_range", required=True,
                    help="index window A,B for the fit")
    sp.add_argument("--alpha", type=float, default=None,
                    help="run the dimension witness at this alpha")
    sp.add_argument("--smallness", type=float, default=None,
                    help="witness contraction factor (default 0.9)")
    common(sp)

    sp = sub.add_parser("ae-probe", help="tail oscillation at sampled points")
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--measure", dest="measure_name", required=True)
    sp.add_argument("--truncs", required=True, help="comma separated truncations")
    sp.add_argument("--points", type=int, default=None, help="sample point count")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--osc-tol", type=float, default=None,
                    help="smallness threshold for tail oscillation (default 1e-3)")
    common(sp)

    return p


# ---------------------------------------------------------------------------
# Option plumbing


def _apply_config(args) -> None:
    """Fill None-valued options from the --config JSON file, if any."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            defaults = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {args.config} is not valid JSON: {exc}") from exc
    if not isinstance(defaults, dict):
        raise ValidationError("config file must hold a JSON object")
    for key, value in defaults.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, value)


def _default(args, name, value):
    if getattr(args, name, None) is None:
        setattr(args, name, value)


def _int_list(text, name) -> list[int]:
    try:
        out = [int(x) for x in str(text).split(",") if str(x).strip()]
    except ValueError as exc:
        raise ValidationError(f"{name} must be comma separated integers: {exc}") from exc
    if not out:
        raise ValidationError(f"{name} is empty")
    return out


def _pair(text, name) -> tuple[int, int]:
    parts = _int_list(text, name)
    if len(parts) != 2:
        raise ValidationError(f"{name} must be two integers A,B")
    return parts[0], parts[1]


def _load_coeffs(path) -> criteria.CoefficientSequence:
    low = str(path).lower()
    if low.endswith(".csv"):
        return criteria.load_coefficients_csv(path)
    if low.endswith(".json"):
        return criteria.load_coefficients_json(path)
    raise ValidationError(f"coefficient file {path} must be .csv or .json")


def _write_report(rep: report.Report, args) -> str:
    fmt = args.format or "json"
    payload = rep.to_json() if fmt == "json" else rep.csv_summary()
    if args.out == "-":
        sys.stdout.write(payload)
        return "-"
    if args.out:
        path = args.out
    else:
        ext = "json" if fmt == "json" else "csv"
        out_dir = os.environ.get(OUT_DIR_ENV, ".")
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"{rep.command}-report.{ext}")
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(payload)
    return path


def _history_diagnostics(values: dict) -> list[dict]:
    out = []
    for key, cv in values.items():
        if len(cv.history) < 4:
            continue
        d = criteria.convergence_diagnostic(cv)
        out.append({
            "criterion": key,
            "verdict": d.verdict,
            "growth_exponent_estimate": d.growth_exponent_estimate,
            "last_relative_increment": d.last_relative_increment,
        })
    return out


# ---------------------------------------------------------------------------
# Command handlers


def _cmd_criteria(args) -> tuple[report.Report, int]:
    seq = _load_coeffs(args.coeffs)
    kern = kernels.kernel_from_descriptor(args.kernel)
    truncs = sorted(set(_int_list(args.trunc, "--trunc")))
    n = truncs[-1]
    if len(seq) < n:
        seq = criteria.align_sequence(seq, n)
    values = {
        "mr": criteria.mr_sum(seq, n, marks=truncs),
        "theorem1_L": criteria.theorem1_sum(seq, kern, n, marks=truncs),
        "gaussian": criteria.gaussian_condition_sum(seq, kern, n, marks=truncs),
    }
    rep = report.Report(
        command="criteria",
        config={"coeffs": args.coeffs, "kernel": kern.describe(), "trunc": truncs},
        criterion_values={k: report.plain(v) for k, v in values.items()},
        diagnostics=_history_diagnostics(values),
    )
    for key, cv in values.items():
        print(f"{key}: {cv.partial_value:.12g} at N={cv.truncation}")
    return rep, EXIT_OK


def _cmd_simulate(args) -> tuple[report.Report, int]:
    _default(args, "n", 256)
    _default(args, "reps", 10000)
    _default(args, "seed", 0)
    _default(args, "bounds", "lemma,theorem,blocks,sudakov")
    _default(args, "field", "real")
    _default(args, "sigma_margin", 3.0)
    _default(args, "chunk", 4096)
    seq = _load_coeffs(args.coeffs)
    kern = kernels.kernel_from_descriptor(args.kernel)
    bounds = montecarlo.canonical_bounds(str(args.bounds).split(","))
    config = montecarlo.SimulationConfig(
        n=int(args.n), replicates=int(args.reps), seed=int(args.seed),
        field=args.field, repair=not args.no_repair,
        sigma_margin=float(args.sigma_margin), chunk=int(args.chunk),
    )
    result = montecarlo.run_simulation(seq, kern, config, bounds=bounds,
                                       keep_maxima=bool(args.dump_maxima))
    rep = report.Report(
        command="simulate",
        config={
            "simulation": dataclasses.asdict(config),
            "kernel": result.kernel_desc,
            "sequence": result.sequence_desc,
            "bounds": list(bounds),
            "coeffs": args.coeffs,
        },
        criterion_values={k: report.plain(v) for k, v in result.criterion_values.items()},
        bound_reports=[report.plain(b) for b in result.bound_reports],
        diagnostics=_history_diagnostics(result.criterion_values),
        estimates={
            "stats": report.plain(result.stats),
            "blocks": report.plain(result.blocks),
            "factor": report.plain(result.factor),
            "gram_min_eigen": result.gram_min_eigen,
            "psd_tolerance": result.psd_tolerance,
        },
        seed=config.seed,
    )
    failed = False
    for b in result.bound_reports:
        print(f"{b.bound_name}: {b.verdict} "
              f"(empirical {b.empirical:.6g}, theoretical {b.theoretical:.6g})")
        failed = failed or b.verdict == "fail"
    code = EXIT_BOUND_FAILURE if failed else EXIT_OK
    if not args.dump_maxima:
        return rep, code

    def side_files(rep_path: str) -> None:
        _write_maxima_csv(result.sup_values, args.dump_maxima)
        print(f"maxima: {args.dump_maxima}")

    return rep, code, side_files


def _cmd_schur(args) -> tuple[report.Report, int]:
    _default(args, "grid", "256,512,1024,2048")
    grid = sorted(set(_int_list(args.grid, "--grid")))
    est = criteria.schur_bound_estimate(args.a, args.b, args.c, N=grid[-1], grid=grid)
    try:
        crit_b = criteria.threshold_b(args.a)
    except ValidationError:
        crit_b = None
    rep = report.Report(
        command="schur",
        config={"a": args.a, "b": args.b, "c": args.c, "grid": grid},
        estimates={
            "admissible": est.admissible,
            "r_values": [[n, r] for n, r in est.r_values],
            "ratios": [[n, q] for n, q in est.ratios],
            "critical_b_for_a": crit_b,
        },
    )
    for n, r in est.r_values:
        print(f"N={n}: R_N={r:.9g}")
    print(f"exponent sum {'admissible' if est.admissible else 'not admissible'} "
          f"(a+b+c={args.a + args.b + args.c:g})")
    return rep, EXIT_OK


def _cmd_measure(args) -> tuple[report.Report, int]:
    _default(args, "smallness", 0.9)
    mu = measures.measure_from_name(args.spec)
    lo, hi = _pair(args.n_range, "--range")
    estimates: dict = {"measure": mu.describe()}
    diagnostics: list = []
    try:
        fit = measures.decay_fit(mu, (lo, hi))
        estimates["decay_fit"] = report.plain(fit)
        print(f"decay fit on [{lo}, {hi}]: K_hat={fit.K_hat:.6g} a_hat={fit.a_hat:.6g} "
              f"({fit.records_used} records)")
    except DegenerateFitError as exc:
        estimates["decay_fit"] = None
        diagnostics.append({"kind": "decay_fit", "status": "degenerate", "detail": str(exc)})
        print(f"decay fit degenerate: {exc}")
    if args.alpha is not None:
        wit = measures.fourier_dimension_witness(
            mu, float(args.alpha), (lo, hi), smallness=float(args.smallness)
        )
        estimates["witness"] = report.plain(wit)
        print(f"dimension witness at alpha={args.alpha:g}: "
              f"{'yes' if wit.witness else 'no'} "
              f"(window maxima {wit.first_half_max:.4g} -> {wit.second_half_max:.4g})")
    if mu.variant == "cantor":
        n_hi = min(hi, measures.CANTOR_INDEX_BUDGET // 3)
        probe = np.unique(np.linspace(max(lo, 1), max(n_hi, 1), 200).astype(np.int64))
        gap = float(np.abs(measures.cantor_fourier(3 * probe)
                           - measures.cantor_fourier(probe)).max())
        estimates["self_similarity_max_gap"] = gap
    rep = report.Report(
        command="measure",
        config={"spec": args.spec, "range": [lo, hi], "alpha": args.alpha,
                "smallness": args.smallness},
        estimates=estimates,
        diagnostics=diagnostics,
    )
    return rep, EXIT_OK


def _cmd_ae_probe(args):
    _default(args, "points", 200)
    _default(args, "seed", 0)
    _default(args, "osc_tol", 1e-3)
    seq = _load_coeffs(args.coeffs)
    mu = measures.measure_from_name(args.measure_name)
    truncs = _int_list(args.truncs, "--truncs")
    res = measures.ae_probe(seq, mu, truncs, int(args.points), int(args.seed),
                            osc_tol=float(args.osc_tol))
    rep = report.Report(
        command="ae-probe",
        config={"coeffs": args.coeffs, "measure": mu.describe(),
                "truncations": list(res.truncations), "points": int(args.points),
                "osc_tol": float(args.osc_tol)},
        estimates={
            "medians": report.plain(res.medians),
            "fraction_below": res.fraction_below,
            "verdict": res.verdict,
        },
        diagnostics=[{"kind": "tail_oscillation", "verdict": res.verdict,
                      "fraction_below": res.fraction_below}],
        seed=int(args.seed),
    )
    print(f"tail oscillation medians: "
          + ", ".join(f"{m:.3g}" for m in res.medians))
    print(f"verdict: {res.verdict} "
          f"(fraction below {res.osc_tol:g}: {res.fraction_below:.3f})")

    def side_files(rep_path: str) -> None:
        pts = _points_csv_path(args, rep_path)
        _write_points_csv(res.rows(), pts)
        print(f"points: {pts}")

    return rep, EXIT_OK, side_files


def _points_csv_path(args, rep_path: str) -> str:
    if rep_path == "-":
        out_dir = os.environ.get(OUT_DIR_ENV, ".")
        return os.path.join(out_dir, "ae-probe-points.csv")
    stem, _ = os.path.splitext(rep_path)
    return stem + "-points.csv"


def _write_points_csv(res_rows, path: str) -> None:
    import csv

    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "M", "abs_partial_sum", "tail_osc"])
        for t, M, s, osc in res_rows:
            w.writerow([repr(t), M, repr(s), "" if osc is None else repr(osc)])


def _write_maxima_csv(sup_values, path: str) -> None:
    import csv

    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replicate", "sup_abs"])
        for i, v in enumerate(np.asarray(sup_values).ravel()):
            w.writerow([i, repr(float(v))])


HANDLERS = {
    "criteria": _cmd_criteria,
    "simulate": _cmd_simulate,
    "schur": _cmd_schur,
    "measure": _cmd_measure,
    "ae-probe": _cmd_ae_probe,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        _apply_config(args)
        out = HANDLERS[args.command](args)
        rep, code = out[0], out[1]
        side_files = out[2] if len(out) > 2 else None
        rep.wall_time = time.perf_counter() - started
        path = _write_report(rep, args)
        if path != "-":
            print(f"report: {path}")
        if side_files is not None:
            side_files(path)
        return code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:  # pragma: no cover - last resort
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
