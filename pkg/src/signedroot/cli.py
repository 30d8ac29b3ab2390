"""Command-line surface.

Subcommands: fit, statistic, limits, coverage, diagnose. Data comes from a
built-in dataset id or a one-column CSV file. Output is a stable JSON
document (sorted keys, no whitespace) or a fixed-format table; JSON field
names are frozen in docs/output-schema.md and changes bump schema_version.

Exit codes: 0 success, 1 bad usage or bad input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field

from .datasets import DATASET_IDS, get_dataset
from .exceptions import DataError, InvalidInputError, SignedRootError
from .fitting import fit_full
from .inference import upper_limit
from .models import Dataset, get_model
from .simulate import CoverageSpec, coverage_study, normality_diagnostic, rate_probe
from .statistics import KINDS, StatisticEvaluator, statistic_set

__all__ = ["RunConfig", "ingest_csv", "run", "main", "SCHEMA_VERSION",
           "DEFAULT_LEVELS"]

SCHEMA_VERSION = 1
DEFAULT_LEVELS = (0.010, 0.025, 0.050, 0.100, 0.900, 0.950, 0.975, 0.990)


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation; run() maps it to a document and an exit code."""

    command: str
    model_id: str = "linexp"
    data: str | None = None
    psi: float | None = None
    theta: tuple | None = None
    n: int | None = None
    n_list: tuple | None = None
    levels: tuple = DEFAULT_LEVELS
    kinds: tuple = KINDS
    replicates: int = 20000
    seed: int = 0
    workers: int = 1
    probe: str | None = None
    fmt: str = "table"


def ingest_csv(path: str) -> Dataset:
    """Read one observation per row; a single leading header row is allowed."""
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            if len(cells) != 1:
                raise DataError(f"row {row_no}: expected one value, got {len(cells)}")
            try:
                values.append(float(cells[0]))
            except ValueError:
                if not values and row_no == 1:
                    continue  # header row
                raise DataError(
                    f"row {row_no}: could not parse {cells[0]!r} as a number"
                ) from None
    if not values:
        raise DataError(f"no observations in {path}")
    return Dataset.of(values)


def _resolve_data(spec: str) -> tuple[str, Dataset]:
    if spec in DATASET_IDS:
        return spec, get_dataset(spec)
    return spec, ingest_csv(spec)


# ---------------------------------------------------------------------------
# command execution: each returns a plain JSON-ready dict
# ---------------------------------------------------------------------------

def _require(config: RunConfig, name: str):
    value = getattr(config, name)
    if value is None:
        flag = {"data": "--data", "psi": "--psi", "theta": "--theta",
                "n": "--n", "n_list": "--n-list", "probe": "--probe"}[name]
        raise InvalidInputError(f"{flag} is required for '{config.command}'")
    return value


def _cmd_fit(config: RunConfig) -> dict:
    name, data = _resolve_data(_require(config, "data"))
    model = get_model(config.model_id)
    fit = fit_full(model, data)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "model": config.model_id,
        "data": name,
        "n": data.n,
        "theta_hat": list(fit.theta_hat.values),
        "loglik": fit.loglik,
        "observed_info": [list(map(float, row)) for row in fit.observed_info],
        "gradient_norm": fit.gradient_norm,
        "iterations": fit.iterations,
        "converged": fit.converged,
    }


def _cmd_statistic(config: RunConfig) -> dict:
    name, data = _resolve_data(_require(config, "data"))
    psi = float(_require(config, "psi"))
    model = get_model(config.model_id)
    full = fit_full(model, data)
    s = statistic_set(model, data, full, psi)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "statistic",
        "model": config.model_id,
        "data": name,
        "n": data.n,
        "psi": s.psi,
        "R": s.r,
        "Ubar": s.u_bar,
        "Uhat": s.u_hat,
        "Rbar": s.rbar_star,
        "Rhat": s.rhat_star,
        "near_singular": s.near_singular,
        "diagnostics": dict(s.diagnostics),
    }


def _cmd_limits(config: RunConfig) -> dict:
    name, data = _resolve_data(_require(config, "data"))
    model = get_model(config.model_id)
    ev = StatisticEvaluator(model, data, fit_full(model, data))
    limits: dict = {}
    for kind in config.kinds:
        limits[kind] = {}
        for p in config.levels:
            res = upper_limit(model, data, kind, p, evaluator=ev)
            limits[kind][f"{p:g}"] = res.psi
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "limits",
        "model": config.model_id,
        "data": name,
        "n": data.n,
        "kinds": list(config.kinds),
        "levels": list(config.levels),
        "psi_hat": float(ev.full.theta_hat.psi),
        "limits": limits,
    }


def _cmd_coverage(config: RunConfig) -> dict:
    spec = CoverageSpec(
        model_id=config.model_id,
        theta_true=_require(config, "theta"),
        n=int(_require(config, "n")),
        replicates=config.replicates,
        levels=config.levels,
        kinds=config.kinds,
        master_seed=config.seed,
        workers=config.workers,
    )
    report = coverage_study(spec)
    doc = report.to_dict()
    doc["schema_version"] = SCHEMA_VERSION
    doc["command"] = "coverage"
    return doc


def _cmd_diagnose(config: RunConfig) -> dict:
    probe = _require(config, "probe")
    theta = _require(config, "theta")
    if probe == "normality":
        record = normality_diagnostic(config.model_id, theta,
                                      int(_require(config, "n")),
                                      config.replicates, config.seed)
    elif probe == "rate":
        record = rate_probe(config.model_id, theta,
                            _require(config, "n_list"),
                            config.replicates, config.seed)
    else:
        raise InvalidInputError(f"unknown probe {probe!r}; use normality or rate")
    doc = record.to_dict()
    doc["schema_version"] = SCHEMA_VERSION
    doc["command"] = "diagnose"
    doc["probe"] = probe
    return doc


_COMMANDS = {
    "fit": _cmd_fit,
    "statistic": _cmd_statistic,
    "limits": _cmd_limits,
    "coverage": _cmd_coverage,
    "diagnose": _cmd_diagnose,
}


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _render_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _matrix_lines(name, rows, fmt="{:14.6f}"):
    out = [name]
    for row in rows:
        out.append("  " + " ".join(fmt.format(v) for v in row))
    return out


def _render_table(doc: dict) -> str:
    cmd = doc["command"]
    lines = []
    if cmd == "fit":
        lines.append(f"model {doc['model']}  data {doc['data']}  n {doc['n']}")
        lines.append("theta_hat  " + " ".join(f"{v:.8g}" for v in doc["theta_hat"]))
        lines.append(f"loglik     {doc['loglik']:.6f}")
        lines += _matrix_lines("observed_info", doc["observed_info"])
        lines.append(f"gradient_norm {doc['gradient_norm']:.3e}  "
                     f"iterations {doc['iterations']}  converged {doc['converged']}")
    elif cmd == "statistic":
        lines.append(f"model {doc['model']}  data {doc['data']}  n {doc['n']}  "
                     f"psi {doc['psi']:.8g}")
        for key in ("R", "Ubar", "Uhat", "Rbar", "Rhat"):
            note = doc["diagnostics"].get(key)
            suffix = f"   ({note})" if note else ""
            lines.append(f"{key:<5} {doc[key]:12.6f}{suffix}")
        lines.append(f"near_singular {doc['near_singular']}")
    elif cmd == "limits":
        lines.append(f"model {doc['model']}  data {doc['data']}  n {doc['n']}  "
                     f"psi_hat {doc['psi_hat']:.8g}")
        kinds = doc["kinds"]
        lines.append("probability  " + "  ".join(f"{k:>8}" for k in kinds))
        for p in doc["levels"]:
            key = f"{p:g}"
            row = "  ".join(f"{doc['limits'][k][key]:8.4f}" for k in kinds)
            lines.append(f"{p:11.3f}  {row}")
    elif cmd == "coverage":
        lines.append(f"model {doc['model']}  theta "
                     + ",".join(f"{v:g}" for v in doc["theta"])
                     + f"  n {doc['n']}  replicates {doc['replicates']}  seed {doc['seed']}")
        kinds = doc["kinds"]
        lines.append("probability  " + "  ".join(f"{k:>8}" for k in kinds))
        for p in doc["levels"]:
            key = f"{p:g}"
            row = "  ".join(f"{doc['coverage'][k][key]:8.4f}" for k in kinds)
            lines.append(f"{p:11.3f}  {row}")
        lines.append(f"failures {doc['failures']}  valid {doc['valid']}")
    else:  # diagnose
        for key in sorted(doc):
            if key in ("schema_version", "command"):
                continue
            lines.append(f"{key}: {doc[key]}")
    return "\n".join(lines)


def run(config: RunConfig) -> tuple[int, str]:
    """Execute a parsed invocation; return (exit code, document text)."""
    try:
        handler = _COMMANDS[config.command]
    except KeyError:
        return 1, f"error: unknown command {config.command!r}"
    try:
        doc = handler(config)
    except InvalidInputError as exc:
        return 1, f"error: {exc}"
    except SignedRootError as exc:
        return 2, f"error: {exc}"
    if config.fmt == "json":
        return 0, _render_json(doc)
    return 0, _render_table(doc)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; this surface reserves 2
    # for numerical failures, so remap
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _kind_list(text: str) -> tuple:
    return tuple(v for v in text.split(",") if v != "")


def _build_parser() -> _Parser:
    parser = _Parser(prog="signedroot",
                     description="Likelihood-root confidence limits and "
                                 "coverage studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=False):
        p.add_argument("--model", default="linexp",
                       help="built-in model id (linexp, normal)")
        p.add_argument("--format", choices=("json", "table"), default="table")
        if data:
            p.add_argument("--data", required=True,
                           help="built-in dataset id or path to a one-column CSV")

    p_fit = sub.add_parser("fit", help="full maximum likelihood fit")
    common(p_fit, data=True)

    p_stat = sub.add_parser("statistic", help="all statistics at one psi")
    common(p_stat, data=True)
    p_stat.add_argument("--psi", type=float, required=True)

    p_lim = sub.add_parser("limits", help="upper confidence limits")
    common(p_lim, data=True)
    p_lim.add_argument("--kinds", type=_kind_list, default=KINDS)
    p_lim.add_argument("--levels", type=_float_list, default=DEFAULT_LEVELS)

    p_cov = sub.add_parser("coverage", help="Monte Carlo coverage study")
    common(p_cov)
    p_cov.add_argument("--theta", type=_float_list, required=True,
                       help="true parameter, comma separated")
    p_cov.add_argument("--n", type=int, required=True)
    p_cov.add_argument("--reps", type=int, default=20000)
    p_cov.add_argument("--seed", type=int, default=0)
    p_cov.add_argument("--levels", type=_float_list, default=DEFAULT_LEVELS)
    p_cov.add_argument("--kinds", type=_kind_list, default=KINDS)
    p_cov.add_argument("--workers", type=int, default=1,
                       help="throughput hint; never changes results")

    p_diag = sub.add_parser("diagnose", help="normality or rate diagnostics")
    common(p_diag)
    p_diag.add_argument("--probe", choices=("normality", "rate"), required=True)
    p_diag.add_argument("--theta", type=_float_list, required=True)
    p_diag.add_argument("--n", type=int)
    p_diag.add_argument("--n-list", type=_int_list, dest="n_list")
    p_diag.add_argument("--reps", type=int, default=2000)
    p_diag.add_argument("--seed", type=int, default=0)

    return parser


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        model_id=getattr(args, "model", "linexp"),
        data=getattr(args, "data", None),
        psi=getattr(args, "psi", None),
        theta=getattr(args, "theta", None),
        n=getattr(args, "n", None),
        n_list=getattr(args, "n_list", None),
        levels=getattr(args, "levels", DEFAULT_LEVELS),
        kinds=getattr(args, "kinds", KINDS),
        replicates=getattr(args, "reps", 20000),
        seed=getattr(args, "seed", 0),
        workers=getattr(args, "workers", 1),
        probe=getattr(args, "probe", None),
        fmt=getattr(args, "format", "table"),
    )


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    code, text = run(_config_from_args(args))
    print(text, file=sys.stdout if code == 0 else sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
