"""Command-line interface: simulate data, fit the autocorrelation, and run
the seeded Monte Carlo experiments.

Exit codes: 0 success, 2 usage/parse/domain error, 3 statistical
degeneracy.  Every report embeds the exact configuration and seed, and
identical command lines produce byte-identical outputs (floats are written
in shortest round-trip form).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

import numpy as np

from .covariance import DiagonalVar, FullPd, GreenMatrix, ScalarVar, build_sigma, gamma_of, Ar1Model
from .errors import DegenerateLikelihoodError, DomainError, ExperimentError
from .likelihood import fit_beta
from .sampling import sample_gaussian
from . import experiments as ex
from .projection import check_design

__all__ = ["main"]


def _fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        return repr(float(value))  # shortest round-trip, also for numpy scalars
    return str(value)


def _load_matrix(path: str) -> np.ndarray:
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            try:
                parsed = [float(cell) for cell in row]
            except ValueError:
                raise DomainError(f"malformed CSV row {lineno} in {path}") from None
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise DomainError(
                    f"malformed CSV row {lineno} in {path}: expected {width} fields"
                )
            rows.append(parsed)
    if not rows:
        raise DomainError(f"no data rows in {path}")
    return np.asarray(rows)


def _parse_sigma(text: str):
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "scalar":
            return ScalarVar(float(rest))
        if kind == "diag":
            return DiagonalVar(tuple(float(v) for v in rest.split(",")))
        if kind == "green":
            a_txt, _, b_txt = rest.partition(";")
            return GreenMatrix(
                tuple(float(v) for v in a_txt.split(",")),
                tuple(float(v) for v in b_txt.split(",")),
            )
        if kind == "full":
            return FullPd(_load_matrix(rest))
    except DomainError:
        raise
    except ValueError:
        raise DomainError(f"cannot parse sigma specification {text!r}") from None
    raise DomainError(
        f"unknown sigma kind {kind!r}; expected scalar:, diag:, full: or green:"
    )


def _parse_int_list(text: str):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise DomainError(f"cannot parse integer list {text!r}") from None


def _parse_float_list(text: str):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise DomainError(f"cannot parse float list {text!r}") from None


def _design_from_args(args, n: int):
    if getattr(args, "design", None):
        return _load_matrix(args.design)
    return ex.polynomial_design(n, getattr(args, "p", 0) or 0)


def _write_csv(path, config: dict, header, rows) -> None:
    lines = ["# " + json.dumps(config, sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit(args, payload: dict, header=None, rows=None) -> None:
    fmt = getattr(args, "format", None) or "json"
    out = getattr(args, "out", None)
    if out and out.endswith(".csv"):
        fmt = "csv"
    if fmt == "csv" and header is not None:
        _write_csv(out, {k: v for k, v in payload.items() if k != "rows"}, header, rows)
        return
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _cmd_simulate(args) -> int:
    sigma_spec = _parse_sigma(args.sigma)
    sigma = build_sigma(sigma_spec, args.k)
    bundle = gamma_of(Ar1Model(args.n), args.beta)
    if args.design:
        # data are mean-zero: residual fits are invariant to any mean in the
        # design span, so only the shape/rank of X needs validating here
        check_design(_load_matrix(args.design), args.n)
    y = sample_gaussian(args.n, args.k, bundle.gamma, sigma, args.seed)
    lines = []
    if args.header:
        lines.append(",".join(f"y{j + 1}" for j in range(args.k)))
    for row in y:
        lines.append(",".join(repr(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def _cmd_fit(args) -> int:
    y = _load_matrix(args.input)
    n, k = y.shape
    x = _load_matrix(args.design) if args.design else None
    config = {
        "command": "fit",
        "model": args.model,
        "input": args.input,
        "design": args.design,
        "n": int(n),
        "k": int(k),
    }
    try:
        result = fit_beta(y, args.model, x)
    except DegenerateLikelihoodError as err:
        payload = dict(config)
        payload.update({"degenerate": True, "error": str(err)})
        _emit(args, payload)
        return 3
    payload = dict(config)
    payload.update(
        {
            "beta_hat": result.beta_hat,
            "se": result.se,
            "loglik": result.loglik_at_max,
            "degenerate": False,
            "boundary": result.boundary,
            "evaluations": result.evaluations,
        }
    )
    _emit(args, payload)
    return 0


def _report_pair_rows(reports):
    rows = []
    for r in reports:
        rows.append((r.label, r.estimate, r.std_error, r.target, r.z, r.passed))
    return rows


def _cmd_experiment(args) -> int:
    name = args.name
    config = {
        "command": "experiment",
        "experiment": name,
        "seed": getattr(args, "seed", None),
        "reps": getattr(args, "reps", None),
    }

    if name == "bartlett":
        if args.k is None:
            raise DomainError("experiment bartlett requires --k")
        x = _design_from_args(args, args.n)
        mean_r, var_r = ex.bartlett_check(
            args.n,
            args.k,
            args.beta,
            args.model,
            _parse_sigma(args.sigma),
            x=x,
            reps=args.reps,
            seed=args.seed,
        )
        config.update(n=args.n, k=args.k, beta=args.beta, model=args.model, sigma=args.sigma, p=args.p)
        rows = _report_pair_rows((mean_r, var_r))
        payload = dict(config, rows=rows)
        payload["pass"] = bool(mean_r.passed and var_r.passed)
        _emit(args, payload, ("statistic", "estimate", "std_error", "target", "z", "passed"), rows)
        return 0

    if name == "info-curve":
        curve = ex.info_curve(args.n, args.beta, args.model, args.reps, args.seed)
        config.update(n=args.n, beta=args.beta, model=args.model)
        rows = [
            (k, f, mc, se, (mc - f) / se if se > 0 else 0.0, abs((mc - f) / se) <= ex.Z_LIMIT if se > 0 else mc == f)
            for k, f, mc, se in curve.rows
        ]
        payload = dict(config, rows=rows)
        payload["pass"] = bool(curve.passed)
        _emit(args, payload, ("k", "formula_info", "mc_info", "mc_se", "z", "passed"), rows)
        return 0

    if name == "deletion":
        if args.k_full is None or args.k_sub is None:
            raise DomainError("experiment deletion requires --k-full and --k-sub")
        rep = ex.deletion_experiment(
            args.n, args.k_full, args.k_sub, args.beta, args.reps, args.seed
        )
        config.update(n=args.n, k_full=args.k_full, k_sub=args.k_sub, beta=args.beta)
        result = dataclasses.asdict(rep)
        payload = dict(config, result=result)
        payload["pass"] = bool(rep.var_ratio > 1.0)
        header = tuple(result.keys())
        _emit(args, payload, header, [tuple(result.values())])
        return 0

    if name == "degeneracy":
        grid = _parse_float_list(args.beta_grid)
        x = _design_from_args(args, args.n)
        rep = ex.degeneracy_check(args.n, grid, _parse_sigma(args.sigma), args.seed, x=x)
        config.update(n=args.n, beta_grid=grid, sigma=args.sigma, p=rep.p)
        rows = list(rep.rows)
        payload = dict(config, rows=rows)
        payload["pass"] = all(ok is not False for *_, ok in rep.rows)
        _emit(args, payload, ("k", "spread", "tol", "degenerate_claimed", "ok"), rows)
        return 0

    if name == "sigma-independence":
        if args.k is None:
            raise DomainError("experiment sigma-independence requires --k")
        rep = ex.sigma_independence_check(
            args.n,
            args.k,
            args.beta,
            _parse_sigma(args.sigma_a),
            _parse_sigma(args.sigma_b),
            args.reps,
            args.seed,
        )
        config.update(n=args.n, k=args.k, beta=args.beta, sigma_a=args.sigma_a, sigma_b=args.sigma_b)
        rows = _report_pair_rows((rep.var_a, rep.var_b))
        rows.append(("z_diff", rep.var_a.estimate - rep.var_b.estimate, 0.0, 0.0, rep.z_diff, rep.passed))
        payload = dict(config, rows=rows)
        payload["pass"] = bool(rep.passed)
        _emit(args, payload, ("statistic", "estimate", "std_error", "target", "z", "passed"), rows)
        return 0

    if name == "ut-curve":
        rep = ex.ut_info_curve(args.n, args.p, args.beta, args.reps, args.seed)
        config.update(n=args.n, p=args.p, beta=args.beta, formula_k1=rep.formula_k1)
        inc = {k: (d, se, ok) for k, d, se, ok in rep.increments}
        rows = []
        for k, mc, se in rep.rows:
            d, dse, ok = inc.get(k, (0.0, 0.0, True))
            rows.append((k, mc, se, d, dse, ok))
        payload = dict(config, rows=rows)
        payload["pass"] = bool(rep.passed)
        _emit(args, payload, ("k", "mc_info", "mc_se", "diff_from_prev", "diff_se", "passed"), rows)
        return 0

    if name == "efficiency":
        if args.k is None:
            raise DomainError("experiment efficiency requires --k (comma list)")
        ks = _parse_int_list(args.k)
        table = ex.efficiency_table(args.n, ks)
        config.update(n=args.n, k=ks, limit=table.limit)
        rows = [(k, v) for k, v in table.rows]
        rows.append(("inf", table.limit))
        payload = dict(config, rows=rows)
        payload["pass"] = True
        _emit(args, payload, ("k", "efficiency"), rows)
        return 0

    if name == "haar-moments":
        reports = ex.haar_trace_moment_check(args.n, args.reps, args.seed)
        config.update(n=args.n)
        rows = _report_pair_rows(reports)
        payload = dict(config, rows=rows)
        payload["pass"] = all(r.passed for r in reports)
        _emit(args, payload, ("statistic", "estimate", "std_error", "target", "z", "passed"), rows)
        return 0

    raise DomainError(f"unknown experiment {name!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parseries",
        description="Likelihood inference for the shared autocorrelation of parallel Gaussian series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw an n x k data matrix and write it as CSV")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--k", type=int, required=True)
    sim.add_argument("--beta", type=float, required=True)
    sim.add_argument("--sigma", default="scalar:1", help="scalar:V | diag:v1,... | full:FILE | green:a1,..;b1,..")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=None, help="output CSV path (stdout when omitted)")
    sim.add_argument("--header", action="store_true", help="write a column header row")
    sim.add_argument("--design", default=None, help="design matrix CSV to validate against n (fits are mean-invariant)")
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="maximum-likelihood autocorrelation from a CSV data matrix")
    fit.add_argument("--model", required=True, choices=("I", "II", "III"))
    fit.add_argument("--input", required=True, help="n x k numeric CSV")
    fit.add_argument("--design", default=None, help="optional n x p design CSV (residual fit)")
    fit.add_argument("--out", default=None)
    fit.add_argument("--format", choices=("json",), default="json")
    fit.set_defaults(func=_cmd_fit)

    exp = sub.add_parser("experiment", help="run a seeded Monte Carlo experiment")
    exp.add_argument(
        "name",
        choices=(
            "bartlett",
            "info-curve",
            "deletion",
            "degeneracy",
            "sigma-independence",
            "ut-curve",
            "efficiency",
            "haar-moments",
        ),
    )
    exp.add_argument("--n", type=int, required=True)
    exp.add_argument("--k", default=None, help="series count (integer; comma list for efficiency)")
    exp.add_argument("--k-full", dest="k_full", type=int, default=None)
    exp.add_argument("--k-sub", dest="k_sub", type=int, default=None)
    exp.add_argument("--p", type=int, default=0, help="design rank; builds polynomial columns of the grid")
    exp.add_argument("--design", default=None, help="design matrix CSV (overrides --p)")
    exp.add_argument("--beta", type=float, default=0.0)
    exp.add_argument("--beta-grid", dest="beta_grid", default="-0.8,-0.6,-0.4,-0.2,0,0.2,0.4,0.6,0.8")
    exp.add_argument("--model", choices=("I", "II", "III"), default="III")
    exp.add_argument("--sigma", default="scalar:1")
    exp.add_argument("--sigma-a", dest="sigma_a", default="scalar:1")
    exp.add_argument("--sigma-b", dest="sigma_b", default="scalar:1")
    exp.add_argument("--reps", type=int, default=50_000)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", default=None)
    exp.add_argument("--format", choices=("json", "csv"), default=None)
    exp.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment":
        # experiments that need an integer --k parse it here so the
        # efficiency experiment can keep its comma-list form
        if args.name in ("bartlett", "sigma-independence") and args.k is not None:
            try:
                args.k = int(args.k)
            except ValueError:
                sys.stderr.write(f"error: --k must be an integer, got {args.k!r}\n")
                return 2
    try:
        return args.func(args)
    except (DomainError, FileNotFoundError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 2
    except (DegenerateLikelihoodError, ExperimentError) as err:
        sys.stderr.write(f"degenerate: {err}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
