"""Command-line front door: flat key=value configs, nine subcommands, and
delimited reports.

Precedence is flags over config file over defaults.  The config path itself
comes from --config or the GUESSBENCH_CONFIG environment variable.  Exit
codes: 0 success, 1 a verification suite reported FAIL, 2 usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction

from . import bounds, exact, montecarlo
from .core import DeckSpec, FeedbackModel
from .combinatorics import shuffle_count
from .reporting import emit_table, exact_cells, provenance
from .strategies import parse_strategy

CONFIG_ENV = "GUESSBENCH_CONFIG"

SUBCOMMANDS = (
    "exact-value",
    "optimal",
    "simulate",
    "verify-pointwise",
    "verify-bounds",
    "tj",
    "persistence",
    "lstat",
    "table",
)

# Two recorded growth rates for the second-order error term of the
# partial-feedback optimum at large m; metadata only, asserted nowhere.
ASYMPTOTIC_ERROR_FORMS = ("m^(3/4) * log(m)^(1/4)", "m^(3/4) * log(m)")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    m: int | None = None
    n: int | None = None
    model: str | None = None
    strategy: str | None = None
    trials: int = 10_000
    seed: int = 0
    workers: int = 1
    epsilon: float | None = None
    sense: str = "max"
    max_total: int | None = None
    j: int = 2
    m_grid: str | None = None
    n_grid: str | None = None
    state_limit: int | None = None
    out: str | None = None
    format: str = "csv"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {"m", "n", "trials", "seed", "workers", "max_total", "j", "state_limit"}
_FLOAT_KEYS = {"epsilon"}
_CHOICES = {
    "sense": ("max", "min"),
    "format": ("csv", "json"),
    "model": ("none", "partial", "complete"),
}


def _convert(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise UsageError(f"config key {key} needs a number, got {raw!r}") from None
    return raw


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; blank lines and # comments are skipped."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"config line {lineno} is not key=value: {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise UsageError(f"unknown config key {key!r}")
        values[key] = _convert(key, raw.strip())
    return values


def emit_config(config: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        value = getattr(config, f.name)
        if value is not None:
            lines.append(f"{f.name}={value}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> RunConfig:
    """Inverse of emit_config over valid configs."""
    return merge_config(parse_config_text(text), {})


def merge_config(file_values: dict, flag_values: dict) -> RunConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    config = RunConfig(**merged)
    for key, allowed in _CHOICES.items():
        value = getattr(config, key)
        if value is not None and value not in allowed:
            raise UsageError(f"{key} must be one of {'|'.join(allowed)}, got {value!r}")
    return config


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-m", "--m", dest="m", type=int)
    common.add_argument("-n", "--n", dest="n", type=int)
    common.add_argument("--model", dest="model")
    common.add_argument("--strategy", dest="strategy")
    common.add_argument("--trials", dest="trials", type=int)
    common.add_argument("--seed", dest="seed", type=int)
    common.add_argument("--workers", dest="workers", type=int)
    common.add_argument("--epsilon", dest="epsilon", type=float)
    common.add_argument("--sense", dest="sense")
    common.add_argument("--max-total", dest="max_total", type=int)
    common.add_argument("--out", dest="out")
    common.add_argument("--format", dest="format")
    common.add_argument("--config", dest="config")
    parser = argparse.ArgumentParser(
        prog="guessbench",
        description="Exact values, simulations, and bound checks for card-guessing games.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "tj":
            sp.add_argument("-j", "--j", dest="j", type=int)
        elif name == "table":
            sp.add_argument("--m-grid", dest="m_grid")
            sp.add_argument("--n-grid", dest="n_grid")
        elif name in ("optimal", "persistence"):
            sp.add_argument("--state-limit", dest="state_limit", type=int)
    return parser


def _require_spec(config: RunConfig) -> DeckSpec:
    if config.m is None or config.n is None:
        raise UsageError("--m and --n are required")
    try:
        return DeckSpec(config.m, config.n)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _model_or_none(config: RunConfig) -> FeedbackModel | None:
    return None if config.model is None else FeedbackModel(config.model)


def _require_strategy(config: RunConfig):
    if config.strategy is None:
        raise UsageError("--strategy is required")
    try:
        return parse_strategy(config.strategy)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _parse_grid(text: str | None, fallback: int | None, flag: str) -> list[int]:
    if text is None:
        if fallback is None:
            raise UsageError(f"{flag} is required")
        return [fallback]
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"{flag} must be a comma-separated integer list") from None
    if not values:
        raise UsageError(f"{flag} is empty")
    return values


# ===== subcommand handlers: (exit code, rows, columns) =====


def _cmd_exact_value(config: RunConfig):
    spec = _require_spec(config)
    sspec = _require_strategy(config)
    model = _model_or_none(config) or sspec.native_model
    value = exact.exact_value(
        spec, sspec, model=model, limit=config.max_total or exact.DEFAULT_ENUM_LIMIT
    )
    row = {
        "m": spec.multiplicity,
        "n": spec.num_types,
        "model": model.value,
        "strategy": sspec.label(),
        **dict(exact_cells("value", value)),
        **provenance(),
    }
    cols = ["m", "n", "model", "strategy", "value", "value_decimal", "version", "rng", "timestamp"]
    return 0, [row], cols


def _cmd_optimal(config: RunConfig):
    spec = _require_spec(config)
    if config.model is None:
        raise UsageError("--model is required (none|partial|complete)")
    if config.model == "complete":
        value = exact.optimal_complete(spec, config.sense)
    elif config.model == "partial":
        value = exact.optimal_partial(
            spec, config.sense, state_limit=config.state_limit or exact.DEFAULT_STATE_LIMIT
        )
    else:
        # with no feedback every fixed guess sequence scores m in expectation
        value = Fraction(spec.multiplicity)
    row = {
        "m": spec.multiplicity,
        "n": spec.num_types,
        "model": config.model,
        "sense": config.sense,
        **dict(exact_cells("value", value)),
        **provenance(),
    }
    cols = ["m", "n", "model", "sense", "value", "value_decimal", "version", "rng", "timestamp"]
    return 0, [row], cols


def _cmd_simulate(config: RunConfig):
    spec = _require_spec(config)
    sspec = _require_strategy(config)
    model = _model_or_none(config) or sspec.native_model
    summary = montecarlo.estimate_value(
        spec, model, sspec, config.trials, config.seed, config.workers
    )
    row = {
        "m": spec.multiplicity,
        "n": spec.num_types,
        "model": model.value,
        "strategy": sspec.label(),
        "trials": summary.trials,
        "seed": config.seed,
        "workers": config.workers,
        "mean": summary.mean,
        "sd": summary.sd,
        "se": summary.se,
        "min": summary.min,
        "max": summary.max,
        **provenance(),
    }
    cols = [
        "m", "n", "model", "strategy", "trials", "seed", "workers",
        "mean", "sd", "se", "min", "max", "version", "rng", "timestamp",
    ]
    if config.format == "json":
        row["histogram"] = [list(item) for item in summary.histogram]
        cols.insert(-3, "histogram")
    return 0, [row], cols


def _cmd_verify_pointwise(config: RunConfig):
    report = exact.verify_pointwise(config.max_total or 8)
    row = {
        "max_total": config.max_total or 8,
        "states_checked": report.states_checked,
        **dict(exact_cells("max_ratio", report.max_ratio)),
        "witness_count": report.witness_count,
        "witnesses": [
            [list(state.remaining), list(state.forbidden), card]
            for state, card in report.witnesses
        ],
        "verdict": "PASS" if report.passed else "FAIL",
        **provenance(),
    }
    cols = [
        "max_total", "states_checked", "max_ratio", "max_ratio_decimal",
        "witness_count", "witnesses", "verdict", "version", "rng", "timestamp",
    ]
    return (0 if report.passed else 1), [row], cols


def _bound_report_row(report: bounds.BoundReport) -> dict:
    return {
        "bound": report.bound,
        "params": dict(report.params),
        "lhs": report.lhs,
        "lhs_radius": report.lhs_radius,
        "rhs": report.rhs,
        "verdict": report.verdict,
        "notes": report.notes,
    }


def _cmd_verify_bounds(config: RunConfig):
    reports = bounds.single_tail_grid(config.max_total or 60)
    walk = bounds.WalkSpec(p=0.5, horizon=256, description="binomial")
    reports.append(bounds.empirical_maximal(walk, 1.0, 16, 256, config.trials, config.seed))
    reports.append(
        bounds.hyp_tail_report(
            30, 4, 0, 1.0, mode="maximal", window=(8, 30),
            trials=config.trials, seed=config.seed,
        )
    )
    rows = [_bound_report_row(r) for r in reports]
    for dom in bounds.first_third_dominance_reports(size_limit=720):
        rows.append(
            {
                "bound": "first-third-dominance",
                "params": {
                    "m": dom.spec.multiplicity,
                    "n": dom.spec.num_types,
                    "strategy": dom.strategy,
                    "prefix": dom.prefix_length,
                },
                "lhs": None,
                "lhs_radius": None,
                "rhs": None,
                "verdict": "PASS" if dom.result.dominates else "FAIL",
                "notes": "" if dom.result.dominates else f"witness {dom.result.witness}",
            }
        )
    stamp = provenance()
    for row in rows:
        row.update(stamp)
    cols = [
        "bound", "params", "lhs", "lhs_radius", "rhs", "verdict", "notes",
        "version", "rng", "timestamp",
    ]
    failed = any(row["verdict"] == "FAIL" for row in rows)
    return (1 if failed else 0), rows, cols


def _cmd_tj(config: RunConfig):
    spec = _require_spec(config)
    estimate = montecarlo.estimate_repeat_time(spec, config.j, config.trials, config.seed)
    stamp = provenance()
    rows = []
    for t, count in estimate.histogram:
        row = {
            "m": spec.multiplicity,
            "n": spec.num_types,
            "j": config.j,
            "trials": config.trials,
            "seed": config.seed,
            "t": t,
            "count": count,
            "survival": estimate.survival(t),
            "survival_se": estimate.survival_se(t),
            **stamp,
        }
        if config.j == 2:
            exact_surv = montecarlo.exact_distinct_prefix_probability(spec, t)
            row.update(dict(exact_cells("survival_exact", exact_surv)))
        rows.append(row)
    cols = ["m", "n", "j", "trials", "seed", "t", "count", "survival", "survival_se"]
    if config.j == 2:
        cols += ["survival_exact", "survival_exact_decimal"]
    cols += ["version", "rng", "timestamp"]
    return 0, rows, cols


def _cmd_persistence(config: RunConfig):
    spec = _require_spec(config)
    violations = exact.probe_persistence(
        spec, state_limit=config.state_limit or exact.DEFAULT_STATE_LIMIT
    )
    stamp = provenance()
    rows = [
        {
            "m": spec.multiplicity,
            "n": spec.num_types,
            "violations": len(violations),
            "holds": not violations,
            "state": None,
            "guess": None,
            "successor_optimal": None,
            **stamp,
        }
    ]
    for v in violations:
        rows.append(
            {
                "m": spec.multiplicity,
                "n": spec.num_types,
                "violations": len(violations),
                "holds": False,
                "state": [list(p) for p in v.state],
                "guess": list(v.guess),
                "successor_optimal": [list(p) for p in v.successor_optimal],
                **stamp,
            }
        )
    cols = [
        "m", "n", "violations", "holds", "state", "guess", "successor_optimal",
        "version", "rng", "timestamp",
    ]
    return 0, rows, cols


def _cmd_lstat(config: RunConfig):
    spec = _require_spec(config)
    summary = montecarlo.estimate_chain(spec, config.trials, config.seed)
    row = {
        "m": spec.multiplicity,
        "n": spec.num_types,
        "trials": config.trials,
        "seed": config.seed,
        "mean": summary.mean,
        "sd": summary.sd,
        "se": summary.se,
        **provenance(),
    }
    cols = ["m", "n", "trials", "seed", "mean", "sd", "se"]
    enum_limit = config.max_total or 10**4
    if shuffle_count(spec) <= enum_limit:
        row.update(dict(exact_cells("mean_exact", exact.exact_chain_mean(spec))))
        cols += ["mean_exact", "mean_exact_decimal"]
    cols += ["version", "rng", "timestamp"]
    return 0, [row], cols


def _partial_value_or_none(spec: DeckSpec, sense: str, state_limit: int):
    if spec.total > 16:
        return None
    try:
        return exact.optimal_partial(spec, sense, state_limit=state_limit)
    except RuntimeError:
        return None


def _cmd_table(config: RunConfig):
    m_values = _parse_grid(config.m_grid, config.m, "--m-grid")
    n_values = _parse_grid(config.n_grid, config.n, "--n-grid")
    state_limit = config.state_limit or exact.DEFAULT_STATE_LIMIT
    stamp = provenance()
    rows = []
    for m in m_values:
        for n in n_values:
            try:
                spec = DeckSpec(m, n)
            except ValueError as err:
                raise UsageError(str(err)) from None
            row = {
                "m": m,
                "n": n,
                "shuffles": shuffle_count(spec),
                **dict(exact_cells("nofb", Fraction(m))),
                **dict(exact_cells("complete_max", exact.optimal_complete(spec, "max"))),
                **dict(exact_cells("complete_min", exact.optimal_complete(spec, "min"))),
                "asymptotic_error_forms": list(ASYMPTOTIC_ERROR_FORMS),
                **stamp,
            }
            for sense in ("max", "min"):
                value = _partial_value_or_none(spec, sense, state_limit)
                if value is None:
                    row[f"partial_{sense}"] = None
                    row[f"partial_{sense}_decimal"] = None
                else:
                    row.update(dict(exact_cells(f"partial_{sense}", value)))
            rows.append(row)
    cols = [
        "m", "n", "shuffles", "nofb", "nofb_decimal",
        "partial_max", "partial_max_decimal", "partial_min", "partial_min_decimal",
        "complete_max", "complete_max_decimal", "complete_min", "complete_min_decimal",
        "asymptotic_error_forms", "version", "rng", "timestamp",
    ]
    return 0, rows, cols


_HANDLERS = {
    "exact-value": _cmd_exact_value,
    "optimal": _cmd_optimal,
    "simulate": _cmd_simulate,
    "verify-pointwise": _cmd_verify_pointwise,
    "verify-bounds": _cmd_verify_bounds,
    "tj": _cmd_tj,
    "persistence": _cmd_persistence,
    "lstat": _cmd_lstat,
    "table": _cmd_table,
}


def run(config: RunConfig, subcommand: str) -> int:
    handler = _HANDLERS.get(subcommand)
    if handler is None:
        raise UsageError(f"unknown subcommand {subcommand!r}")
    code, rows, cols = handler(config)
    text = emit_table(rows, cols, fmt=config.format, path=config.out)
    if config.out is None:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        config_path = args.config or os.environ.get(CONFIG_ENV)
        file_values: dict = {}
        if config_path:
            try:
                with open(config_path) as fh:
                    file_values = parse_config_text(fh.read())
            except OSError as err:
                raise UsageError(f"cannot read config {config_path}: {err}") from None
        flag_values = {
            name: getattr(args, name)
            for name in _FIELD_TYPES
            if getattr(args, name, None) is not None
        }
        config = merge_config(file_values, flag_values)
        return run(config, args.subcommand)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
