"""Command-line front end: run or compare solver experiments, validate the
shipped problem registry, and export CSV/JSON/SVG artifacts.

Exit codes are a stable contract: 0 success, 1 numerical failure (message
includes the failing tau), 2 usage error.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .clinalg import frobenius, pinv, vec_axb
from .experiments import (
    MODELS,
    ComparabilityError,
    ComparisonResult,
    RunConfig,
    RunResult,
    compare,
    run,
)
from .experiments import _BUILDERS as _EXAMPLE_BUILDERS
from .integrator import IntegratorConfig, StepBudgetError
from .problem import TimeVariantProblem

OUTPUT_DIR_ENV = "ZNDSOLVE_OUT"

_FORMATS = ("csv", "json", "svg")
_GATE_TOL = 1e-9
_SVG_FLOOR = 1e-16
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e")


def _fmt(value: float) -> str:
    """Round-trippable decimal rendering of a double."""
    return f"{value:.17g}"


def _model_name(raw: str) -> str:
    """Accept CLI spelling con-cznd1 for the internal name con_cznd1."""
    name = raw.replace("-", "_")
    if name not in MODELS:
        raise ValueError(
            f"unknown model {raw!r}; choose from "
            + ", ".join(m.replace("_", "-") for m in MODELS)
        )
    return name


def _parse_interval(raw) -> tuple[float, float]:
    if isinstance(raw, str):
        parts = raw.split(",")
    else:
        parts = list(raw)
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {raw!r}")
    return float(parts[0]), float(parts[1])


def _parse_formats(raw) -> tuple[str, ...]:
    if isinstance(raw, str):
        items = [f.strip() for f in raw.split(",") if f.strip()]
    else:
        items = list(raw)
    for item in items:
        if item not in _FORMATS:
            raise ValueError(f"unknown format {item!r}; choose from {','.join(_FORMATS)}")
    if not items:
        raise ValueError("formats must name at least one of csv,json,svg")
    return tuple(items)


def _load_toml(path: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


# ---------------------------------------------------------------------------
# config assembly


_RUN_KEYS = (
    "example",
    "model",
    "gamma",
    "seed",
    "init_range",
    "span",
    "samples",
    "rel_tol",
    "abs_tol",
    "max_step",
    "initial_step",
    "max_steps",
)


def _merge_config(file_values: dict, flag_values: dict) -> RunConfig:
    """Build a RunConfig from file values overridden by explicit flags."""
    merged = {}
    for key in _RUN_KEYS:
        if flag_values.get(key) is not None:
            merged[key] = flag_values[key]
        elif key in file_values:
            merged[key] = file_values[key]
    unknown = set(file_values) - set(_RUN_KEYS)
    if unknown:
        raise ValueError(f"unknown config file keys: {', '.join(sorted(unknown))}")

    integrator_kwargs = {}
    for key in ("rel_tol", "abs_tol", "max_step", "initial_step", "max_steps"):
        if key in merged:
            integrator_kwargs[key] = merged.pop(key)

    if "model" in merged:
        merged["model"] = _model_name(str(merged["model"]))
    if "init_range" in merged:
        merged["init_range"] = _parse_interval(merged["init_range"])
    if "span" in merged:
        merged["span"] = _parse_interval(merged["span"])
    if "seed" in merged:
        merged["seed"] = int(merged["seed"])
    if "samples" in merged:
        merged["samples"] = int(merged["samples"])
    if integrator_kwargs:
        if "max_steps" in integrator_kwargs:
            integrator_kwargs["max_steps"] = int(integrator_kwargs["max_steps"])
        merged["integrator"] = IntegratorConfig(**integrator_kwargs)
    return RunConfig(**merged)


def _flag_values(args: argparse.Namespace) -> dict:
    values = {key: getattr(args, key, None) for key in _RUN_KEYS}
    if values.get("model") is not None:
        values["model"] = _model_name(values["model"])
    if values.get("init_range") is not None:
        values["init_range"] = _parse_interval(values["init_range"])
    if values.get("span") is not None:
        values["span"] = _parse_interval(values["span"])
    return values


def _resolve_out_dir(args: argparse.Namespace) -> Path:
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# file writers


def _state_headers(m: int, n: int) -> list[str]:
    real = [f"x_r_{i + 1}{j + 1}" for j in range(n) for i in range(m)]
    imag = [f"x_i_{i + 1}{j + 1}" for j in range(n) for i in range(m)]
    return real + imag


def write_trajectory_csv(path: Path, result: RunResult) -> None:
    """One row per sample: tau, state entries in vec order, residuals."""
    m, n = result.problem.m, result.problem.n
    header = ["tau", *_state_headers(m, n), "residual", "eq_residual"]
    lines = [",".join(header)]
    residuals = result.residuals
    for idx, tau in enumerate(result.trajectory.times):
        row = [_fmt(tau)]
        row.extend(_fmt(v) for v in result.trajectory.states[idx])
        row.append(_fmt(residuals[idx]) if residuals is not None else "nan")
        row.append(_fmt(result.equation_residuals[idx]))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _config_echo(config: RunConfig) -> dict:
    echo = asdict(config)
    echo["init_range"] = list(config.init_range)
    echo["span"] = list(config.span)
    return echo


def write_summary_json(path: Path, result: RunResult) -> None:
    payload = {
        "config": _config_echo(result.config),
        "summary": {
            "terminal_residual": result.summary.terminal_residual,
            "max_residual_late": result.summary.max_residual_late,
            "time_to_threshold": result.summary.time_to_threshold,
            "terminal_equation_residual": result.summary.terminal_equation_residual,
        },
        "library_version": __version__,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _svg_document(
    series: list[tuple[str, np.ndarray, np.ndarray]],
    x_label: str = "tau",
    y_label: str = "residual",
) -> str:
    """Self-contained SVG with a linear x axis and log10 y axis.

    Residual values are clamped below at 1e-16 before taking logs, matching
    the plot floor used throughout.
    """
    width, height = 640, 440
    left, right, top, bottom = 72, 20, 20, 52
    plot_w = width - left - right
    plot_h = height - top - bottom

    x_min = min(float(x[0]) for _, x, _ in series)
    x_max = max(float(x[-1]) for _, x, _ in series)
    logs = [np.log10(np.maximum(y, _SVG_FLOOR)) for _, _, y in series]
    y_lo = float(np.floor(min(l.min() for l in logs)))
    y_hi = float(np.ceil(max(l.max() for l in logs)))
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def sx(x: float) -> float:
        return left + (x - x_min) / (x_max - x_min) * plot_w

    def sy(log_y: float) -> float:
        return top + (y_hi - log_y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>',
    ]

    x_ticks = np.linspace(x_min, x_max, 6)
    for xt in x_ticks:
        px = sx(xt)
        parts.append(
            f'<line x1="{px:.2f}" y1="{top + plot_h}" x2="{px:.2f}" '
            f'y2="{top + plot_h + 5}" stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{top + plot_h + 20}" font-family="sans-serif" '
            f'font-size="12" text-anchor="middle">{xt:g}</text>'
        )
    decade_step = max(1, int(np.ceil((y_hi - y_lo) / 8)))
    decade = y_lo
    while decade <= y_hi:
        py = sy(decade)
        parts.append(
            f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 9}" y="{py + 4:.2f}" font-family="sans-serif" '
            f'font-size="12" text-anchor="end">1e{int(decade)}</text>'
        )
        decade += decade_step
    parts.append(
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 12}" '
        f'font-family="sans-serif" font-size="13" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{top + plot_h / 2:.2f}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + plot_h / 2:.2f})">{y_label}</text>'
    )

    for i, (label, x, y) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        log_y = logs[i]
        points = " ".join(
            f"{sx(float(xv)):.2f},{sy(float(lv)):.2f}" for xv, lv in zip(x, log_y)
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        ly = top + 16 + 18 * i
        parts.append(
            f'<line x1="{left + plot_w - 150}" y1="{ly - 4}" '
            f'x2="{left + plot_w - 122}" y2="{ly - 4}" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{left + plot_w - 116}" y="{ly}" font-family="sans-serif" '
            f'font-size="12">{label}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_residual_svg(path: Path, result: RunResult) -> None:
    label = result.config.model.replace("_", "-")
    y = result.residuals if result.residuals is not None else result.equation_residuals
    path.write_text(_svg_document([(label, result.trajectory.times, y)]))


def write_compare_csv(path: Path, comparison: ComparisonResult) -> None:
    header = ["tau"] + [f"residual_{label}" for label in comparison.labels]
    lines = [",".join(header)]
    times = comparison.runs[0].trajectory.times
    columns = [r.residuals for r in comparison.runs]
    for idx, tau in enumerate(times):
        row = [_fmt(tau)] + [_fmt(col[idx]) for col in columns]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_compare_svg(path: Path, comparison: ComparisonResult) -> None:
    series = [
        (label.replace("_", "-"), r.trajectory.times, r.residuals)
        for label, r in zip(comparison.labels, comparison.runs)
    ]
    path.write_text(_svg_document(series))


# ---------------------------------------------------------------------------
# validation checks


def _check_examples(problems: dict[str, TimeVariantProblem], tau_samples: int):
    taus = np.linspace(0.0, 10.0, tau_samples)
    for name, prob in problems.items():
        residuals = [prob.equation_residual(prob.exact_of(t), t) for t in taus]
        worst = int(np.argmax(residuals))
        yield (
            f"{name} exact-solution gate",
            residuals[worst] <= _GATE_TOL,
            f"worst residual {residuals[worst]:.3e} at tau={taus[worst]:.4f} "
            f"(tolerance {_GATE_TOL:.0e}, {tau_samples} samples)",
        )


def _check_vec_product() -> tuple[str, bool, str]:
    rng = np.random.Generator(np.random.Philox(key=0))
    worst = 0.0
    for _ in range(100):
        p, q, r, s = rng.integers(1, 5, size=4)
        a = rng.standard_normal((p, q)) + 1j * rng.standard_normal((p, q))
        x = rng.standard_normal((q, r)) + 1j * rng.standard_normal((q, r))
        b = rng.standard_normal((r, s)) + 1j * rng.standard_normal((r, s))
        direct = (a @ x @ b).reshape(-1, order="F")
        worst = max(worst, float(np.max(np.abs(vec_axb(a, x, b) - direct))))
    return (
        "vec-product identity",
        worst <= 1e-12,
        f"100 random triples, max error {worst:.3e} (tolerance 1e-12)",
    )


def _check_penrose() -> tuple[str, bool, str]:
    rng = np.random.Generator(np.random.Philox(key=1))
    worst = 0.0
    checked = 0
    while checked < 20:
        w = rng.standard_normal((6, 6))
        if np.linalg.cond(w) >= 1e6:
            continue
        checked += 1
        wp = pinv(w)
        scale = frobenius(w)
        residuals = (
            frobenius(w @ wp @ w - w) / scale,
            frobenius(wp @ w @ wp - wp) / frobenius(wp),
            frobenius((w @ wp).T - w @ wp) / max(frobenius(w @ wp), 1.0),
            frobenius((wp @ w).T - wp @ w) / max(frobenius(wp @ w), 1.0),
        )
        worst = max(worst, *residuals)
    return (
        "pseudo-inverse Penrose conditions",
        worst <= 1e-9,
        f"20 random matrices, worst relative residual {worst:.3e} (tolerance 1e-9)",
    )


def run_validation(
    problems: dict[str, TimeVariantProblem] | None = None,
    tau_samples: int = 11,
) -> list[tuple[str, bool, str]]:
    """All validate-subcommand checks as (name, passed, detail) rows."""
    if problems is None:
        problems = {name: build() for name, build in _EXAMPLE_BUILDERS.items()}
    checks = list(_check_examples(problems, tau_samples))
    checks.append(_check_vec_product())
    checks.append(_check_penrose())
    return checks


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args: argparse.Namespace) -> int:
    file_values = _load_toml(args.config) if args.config else {}
    config = _merge_config(file_values, _flag_values(args))
    formats = _parse_formats(args.formats)
    out_dir = _resolve_out_dir(args)
    result = run(config)
    if "csv" in formats:
        write_trajectory_csv(out_dir / "trajectory.csv", result)
    if "json" in formats:
        write_summary_json(out_dir / "summary.json", result)
    if "svg" in formats:
        write_residual_svg(out_dir / "residual.svg", result)
    summary = result.summary
    print(
        f"{config.example} {config.model} gamma={config.gamma:g} seed={config.seed}: "
        f"terminal residual {summary.terminal_residual:.6e}, "
        f"outputs in {out_dir}"
    )
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    flags = _flag_values(args)
    file_dicts = [_load_toml(path) for path in args.config] if args.config else []

    models = [_model_name(m) for m in args.models.split(",")] if args.models else None
    gammas = [float(g) for g in args.gammas.split(",")] if args.gammas else None
    if models and gammas:
        raise ValueError("pass --models or --gammas, not both")

    if models or gammas:
        base = file_dicts[0] if len(file_dicts) == 1 else {}
        if len(file_dicts) > 1:
            raise ValueError("with --models/--gammas pass at most one --config")
        variations = []
        for value in models or gammas:
            var_flags = dict(flags)
            if models:
                var_flags["model"] = value
            else:
                var_flags["gamma"] = value
            variations.append(_merge_config(base, var_flags))
        if len(variations) < 2:
            raise ValueError("comparison needs at least two models or gamma values")
    elif len(file_dicts) >= 2:
        variations = [_merge_config(d, flags) for d in file_dicts]
    else:
        raise ValueError(
            "comparison needs --models m1,m2 or --gammas g1,g2 "
            "(or at least two --config files)"
        )

    comparison = compare(variations)
    formats = _parse_formats(args.formats)
    out_dir = _resolve_out_dir(args)
    if "csv" in formats:
        write_compare_csv(out_dir / "compare.csv", comparison)
    if "svg" in formats:
        write_compare_svg(out_dir / "compare.svg", comparison)
    for label, result, ratio in zip(
        comparison.labels, comparison.runs, comparison.terminal_ratios
    ):
        print(
            f"{label}: terminal residual {result.summary.terminal_residual:.6e} "
            f"({ratio:.3f}x baseline)"
        )
    print(f"outputs in {out_dir}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    checks = run_validation(tau_samples=args.tau_samples)
    failed = [name for name, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _cmd_list(args: argparse.Namespace) -> int:
    print("examples:")
    for name, build in _EXAMPLE_BUILDERS.items():
        prob = build()
        print(
            f"  {name}: F {prob.n}x{prob.n}, A {prob.m}x{prob.m}, "
            f"C and X {prob.m}x{prob.n}"
        )
    print("models:")
    for model in MODELS:
        print(f"  {model.replace('_', '-')}")
    return 0


# ---------------------------------------------------------------------------
# parser and dispatch


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--example", help="problem name (see `zndsolve list`)")
    parser.add_argument("--gamma", type=float, help="convergence gain, positive")
    parser.add_argument("--seed", type=int, help="initial-state seed")
    parser.add_argument("--init-range", dest="init_range", metavar="LO,HI",
                        help="uniform initial-state interval (default -5,5)")
    parser.add_argument("--span", metavar="T0,T1", help="integration window (default 0,10)")
    parser.add_argument("--samples", type=int, help="output grid size (default 1001)")
    parser.add_argument("--rel-tol", dest="rel_tol", type=float, help="integrator relative tolerance")
    parser.add_argument("--abs-tol", dest="abs_tol", type=float, help="integrator absolute tolerance")
    parser.add_argument("--max-step", dest="max_step", type=float, help="integrator max step")
    parser.add_argument("--initial-step", dest="initial_step", type=float, help="integrator first step")
    parser.add_argument("--max-steps", dest="max_steps", type=int, help="integrator step budget")
    parser.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./out)")
    parser.add_argument("--formats", default="csv,json,svg",
                        help="comma-separated subset of csv,json,svg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zndsolve",
        description="Zeroing-dynamics solvers for time-variant conjugate "
        "matrix equations: run experiments, compare models, validate the "
        "shipped examples.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="integrate one model on one example")
    run_p.add_argument("--model", help="con-cznd1 or con-cznd2")
    run_p.add_argument("--config", help="TOML file with RunConfig fields; flags override")
    _add_shared_flags(run_p)
    run_p.set_defaults(handler=_cmd_run)

    cmp_p = sub.add_parser("compare", help="run several configs on a shared seed")
    cmp_p.add_argument("--model", help="fixed model when sweeping --gammas")
    cmp_p.add_argument("--models", help="comma-separated models to compare")
    cmp_p.add_argument("--gammas", help="comma-separated gamma values to compare")
    cmp_p.add_argument("--config", action="append",
                       help="TOML file per run (repeatable); flags override")
    _add_shared_flags(cmp_p)
    cmp_p.set_defaults(handler=_cmd_compare)

    val_p = sub.add_parser("validate", help="run registry and identity self-checks")
    val_p.add_argument("--tau-samples", dest="tau_samples", type=int, default=11,
                       help="sample count for the exact-solution gate (default 11)")
    val_p.set_defaults(handler=_cmd_validate)

    list_p = sub.add_parser("list", help="list registered examples and models")
    list_p.set_defaults(handler=_cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for flag errors; pass both through
        # as return codes so embedding callers never see SystemExit.
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ArithmeticError, StepBudgetError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except (KeyError, ValueError, OSError) as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
