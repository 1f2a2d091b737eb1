#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""dejong: exact moments, shadow constants and normal-approximation bounds for degenerate U-statistics."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from bounds import MODES, SmoothnessConstants, multivariate_A, multivariate_bound, univariate_bound
from errors import EXIT_OK, ContractError, DeJongError, ValidationFailure
from generators import random_space, random_statistic
from hoeffding import (
    DegenerateUStatistic,
    VectorModel,
    check_degenerate,
    degeneracy_residual,
    influences,
    is_normalized,
    normalize,
    orthogonality_residual,
    reconstruction_residual,
    rho_squared,
)
from mc import MAX_SEED, bound_validation, limit_diagnostics, sample
from model_file import Model, load_model
from moments import fourth_moment, s0, tau
from pair import regression_check, squared_increment_residual
from product import components_residual, hoeffding_product, product_oracle
from shadows import (
    CONSTANT_SOURCES,
    PUBLISHED_CONSTANTS,
    SHADOW_CAP,
    compute_Cd,
    enumerate_mixed_shadow_classes,
    enumerate_shadow_classes,
    kappa,
    mixed_shadow_weight,
)
from space import DEFAULT_BUDGET

SCHEMA = "dejong-report/1"
DEFAULT_TOLERANCE = 1e-9
DEFAULT_SAMPLES = 100_000
DEFAULT_TRIALS = 50
COMMANDS = ("decompose", "check", "moments", "bound", "bound-multi", "shadows", "product-check", "simulate", "report")

logger = logging.getLogger("dejong")


def default_budget() -> int:
    return int(os.getenv("DEJONG_BUDGET", str(DEFAULT_BUDGET)))


def default_threads() -> int:
    return int(os.getenv("DEJONG_THREADS", "1"))


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Exact moment engine and Wasserstein bounds for degenerate U-statistics on finite product spaces."
    )
    parser.add_argument("command", choices=COMMANDS, help="Subcommand to run.")
    parser.add_argument("--model", help="Model JSON file, or the name of a bundled model in ./models.")
    parser.add_argument("--seed", type=int, default=None, help="Unsigned 64-bit seed. Required by randomized commands.")
    parser.add_argument(
        "--samples",
        type=int,
        default=DEFAULT_SAMPLES,
        help=f"Monte Carlo sample count. Default: {DEFAULT_SAMPLES}",
    )
    parser.add_argument("--mode", choices=MODES, default="cd-rho", help="Univariate bound mode. Default: cd-rho")
    parser.add_argument("--d", type=int, default=None, help="Shadow order for `shadows`. Defaults to the model order.")
    parser.add_argument("--p", type=int, default=None, help="Mixed shadow sizes |F1| = |F3| (use with --q).")
    parser.add_argument("--q", type=int, default=None, help="Mixed shadow sizes |F2| = |F4| (use with --p).")
    parser.add_argument(
        "--threads",
        type=int,
        default=default_threads(),
        help="Worker threads for enumeration and sampling. Default: $DEJONG_THREADS or 1",
    )
    parser.add_argument(
        "--tolerance",
        type=float,
        default=DEFAULT_TOLERANCE,
        help=f"Tolerance for identity checks and normalization. Default: {DEFAULT_TOLERANCE}",
    )
    parser.add_argument(
        "--budget",
        type=int,
        default=default_budget(),
        help=f"Joint-atom cap for exact enumeration. Default: $DEJONG_BUDGET or {DEFAULT_BUDGET}",
    )
    parser.add_argument("--out", default=None, help="Write the JSON report to this path.")
    parser.add_argument(
        "--constants",
        choices=CONSTANT_SOURCES,
        default="enumerated",
        help="Source of the shadow constant C_d. Default: enumerated (C_2 = 19); use published for C_2 = 13",
    )
    parser.add_argument("--exact-third", action="store_true", help="Use the exact third increment moment in exact mode.")
    parser.add_argument(
        "--trials",
        type=int,
        default=DEFAULT_TRIALS,
        help=f"Random instances for product-check. Default: {DEFAULT_TRIALS}",
    )
    parser.add_argument("--normalize", action="store_true", help="Scale the model to unit variance first.")
    parser.add_argument("--m1", type=float, default=None, help="Bound on |h|_Lip for bound-multi (ii).")
    parser.add_argument("--m2", type=float, default=None, help="Bound on the second derivative for bound-multi (ii).")
    parser.add_argument("--m2-tilde", type=float, default=1.0, help="Bound on the Hessian for bound-multi (i). Default: 1")
    parser.add_argument("--m3", type=float, default=1.0, help="Bound on the third derivative for bound-multi (i). Default: 1")
    parser.add_argument("--verbose", action="store_true", help="Log enumeration sizes and timings to stderr.")
    return parser.parse_args(argv)


def require_model(args: argparse.Namespace) -> Model:
    if not args.model:
        raise ContractError(f"`{args.command}` needs --model.")
    return load_model(args.model, budget=args.budget)


def require_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise ContractError(f"`{args.command}` is randomized and needs --seed.")
    if not 0 <= args.seed <= MAX_SEED:
        raise ContractError(f"--seed must be an unsigned 64-bit integer, got {args.seed}.")
    return args.seed


def scalar_statistic(model: Model, args: argparse.Namespace) -> DegenerateUStatistic:
    u = model.statistic()
    return normalize(u) if args.normalize else u


def vector_statistic(model: Model, args: argparse.Namespace) -> VectorModel:
    v = model.vector_model()
    return VectorModel(tuple(normalize(c) for c in v.components)) if args.normalize else v


def cmd_decompose(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    model = require_model(args)
    dec = model.decomposition()
    sigma2 = dec.variances()
    return {
        "mean": dec.mean(),
        "variance": dec.variance(),
        "components": [
            {"subset": list(s), "sigma2": sigma2.get(s, 0.0), "values": k.flat()} for s, k in dec.components.items()
        ],
        "reconstruction_residual": reconstruction_residual(model.space, model.kernels, dec),
    }, True


def cmd_check(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    model = require_model(args)
    dec = model.decomposition()
    order = model.inferred_order()
    report = check_degenerate(dec, order)
    residuals = {
        "reconstruction": reconstruction_residual(model.space, model.kernels, dec),
        "orthogonality": orthogonality_residual(dec),
        "degeneracy": degeneracy_residual(dec),
        "regression": regression_check(dec, order),
    }
    if report.ok:
        residuals["squared_increment"] = squared_increment_residual(model.statistic())
    ok = report.ok and all(value <= args.tolerance for value in residuals.values())
    return {
        "order": order,
        "degenerate": report.ok,
        "offenders": [list(s) for s in report.offenders],
        "residuals": residuals,
    }, ok


def cmd_moments(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    u = scalar_statistic(require_model(args), args)
    fourth = fourth_moment(u, args.threads)
    s0_value, tau_value = s0(u), tau(u, args.threads)
    rho2 = rho_squared(u)
    data: dict[str, Any] = {
        "order": u.order,
        "n": u.space.n,
        "variance": u.variance(),
        "fourth_moment": fourth,
        "fourth_cumulant_gap": fourth - 3.0,
        "s0": s0_value,
        "tau": tau_value,
        "rho2": rho2,
        "influences": [float(x) for x in influences(u)],
    }
    ok = s0_value >= -tau_value - args.tolerance
    if is_normalized(u, args.tolerance) and u.order <= SHADOW_CAP:
        c_d = compute_Cd(u.order)
        data["tau_over_cd_rho2"] = tau_value / (c_d * rho2) if rho2 > 0 else 0.0
        ok = ok and tau_value <= c_d * rho2 + args.tolerance
    return data, ok


def cmd_bound(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    u = scalar_statistic(require_model(args), args)
    report = univariate_bound(
        u,
        mode=args.mode,
        constant_source=args.constants,
        exact_third=args.exact_third,
        tolerance=args.tolerance,
        threads=args.threads,
    )
    return report.as_dict(), not report.inconsistent


def cmd_bound_multi(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    v = vector_statistic(require_model(args), args)
    report = multivariate_A(v, constant_source=args.constants, tolerance=args.tolerance, threads=args.threads)
    smoothness = SmoothnessConstants(m1=args.m1, m2=args.m2, m2_tilde=args.m2_tilde, m3=args.m3)
    bounds = multivariate_bound(report, smoothness)
    data = report.as_dict()
    data["smoothness"] = {"m1": args.m1, "m2": args.m2, "m2_tilde": args.m2_tilde, "m3": args.m3}
    data["bound_smooth_third"] = bounds.smooth_third
    data["bound_smooth_second"] = bounds.smooth_second
    return data, not report.inconsistent


def shadow_table(d: int) -> dict[str, Any]:
    classes = enumerate_shadow_classes(d)
    data: dict[str, Any] = {
        "d": d,
        "classes": [{"size": c.size, "sets": [list(s) for s in c.subsets()], "gamma": c.gamma} for c in classes],
        "C_d": compute_Cd(d),
        "kappa": kappa(d),
    }
    if d in PUBLISHED_CONSTANTS:
        data["C_d_published"] = float(PUBLISHED_CONSTANTS[d])
        data["kappa_published"] = kappa(d, "published")
    return data


def cmd_shadows(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    if args.p is not None or args.q is not None:
        if args.p is None or args.q is None:
            raise ContractError("Mixed shadows need both --p and --q.")
        classes = enumerate_mixed_shadow_classes(args.p, args.q)
        return {
            "p": args.p,
            "q": args.q,
            "classes": [{"size": c.size, "sets": [list(s) for s in c.subsets()], "gamma": c.gamma} for c in classes],
            "weight": mixed_shadow_weight(args.p, args.q),
        }, True
    d = args.d if args.d is not None else require_model(args).inferred_order()
    return shadow_table(d), True


def product_trials(seed: int, trials: int, tolerance: float, budget: int) -> dict[str, Any]:
    rng = np.random.default_rng(seed)
    matches = 0
    worst = 0.0
    for _ in range(trials):
        space = random_space(rng, int(rng.integers(2, 6)), budget=budget)
        first = random_statistic(rng, space, int(rng.integers(1, 3)))
        second = random_statistic(rng, space, int(rng.integers(1, 3)))
        residual = components_residual(hoeffding_product(first, second), product_oracle(first, second))
        worst = max(worst, residual)
        matches += residual <= tolerance
    return {"seed": seed, "trials": trials, "matches": matches, "max_residual": worst}


def cmd_product_check(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    if args.trials < 1:
        raise ContractError(f"--trials must be >= 1, got {args.trials}.")
    data = product_trials(require_seed(args), args.trials, args.tolerance, args.budget)
    return data, data["matches"] == data["trials"]


def simulate_model(model: Model, args: argparse.Namespace, seed: int) -> tuple[dict[str, Any], bool]:
    if model.kernels:
        u = scalar_statistic(model, args)
        result = bound_validation(u, args.samples, seed, args.mode, args.constants, args.threads)
        return {
            "seed": seed,
            "samples": args.samples,
            "empirical_wasserstein": result.empirical,
            "bound": result.bound,
            "error_proxy": result.error_proxy,
            "margin": result.margin,
            "verdict": result.verdict,
        }, result.passed
    v = vector_statistic(model, args)
    run = sample(v, args.samples, seed, args.threads)
    diagnostics = limit_diagnostics(v, args.threads)
    return {
        "seed": seed,
        "samples": args.samples,
        "component_wasserstein": list(run.wasserstein),
        "component_error_proxy": list(run.error_proxy),
        "covariance": [list(row) for row in diagnostics.covariance],
        "rho2": list(diagnostics.rho2),
        "fourth_gaps": list(diagnostics.fourth_gaps),
        "cross_gaps": {f"{i},{k}": value for (i, k), value in diagnostics.cross_gaps.items()},
    }, True


def cmd_simulate(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    if args.samples < 1:
        raise ContractError(f"--samples must be >= 1, got {args.samples}.")
    return simulate_model(require_model(args), args, require_seed(args))


def cmd_report(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    model = require_model(args)
    seed = require_seed(args)
    sections: dict[str, Any] = {}
    verdicts: dict[str, bool] = {}

    def section(name: str, fn: Callable[[argparse.Namespace], tuple[dict[str, Any], bool]], **overrides: Any) -> None:
        scoped = argparse.Namespace(**{**vars(args), **overrides})
        sections[name], verdicts[name] = fn(scoped)

    if model.kernels:
        section("decompose", cmd_decompose)
        section("check", cmd_check)
        section("moments", cmd_moments)
        section("bound_cd_rho", cmd_bound, mode="cd-rho")
        section("bound_exact", cmd_bound, mode="exact")
        order = model.inferred_order()
        if order <= SHADOW_CAP:
            section("shadows", cmd_shadows, d=order, p=None, q=None)
    if model.vector:
        section("bound_multi", cmd_bound_multi)
    sections["simulate"], verdicts["simulate"] = simulate_model(model, args, seed)
    sections["verdicts"] = verdicts
    return sections, all(verdicts.values())


HANDLERS: dict[str, Callable[[argparse.Namespace], tuple[dict[str, Any], bool]]] = {
    "decompose": cmd_decompose,
    "check": cmd_check,
    "moments": cmd_moments,
    "bound": cmd_bound,
    "bound-multi": cmd_bound_multi,
    "shadows": cmd_shadows,
    "product-check": cmd_product_check,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def format_text(data: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(data, dict):
        for key, value in data.items():
            if isinstance(value, (dict, list)) and value and not all(isinstance(x, (int, float)) for x in value):
                lines.append(f"{pad}{key}:")
                lines.extend(format_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
    elif isinstance(data, list):
        for item in data:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(format_text(item, indent + 1))
            else:
                lines.append(f"{pad}- {item}")
    else:
        lines.append(f"{pad}{data}")
    return lines


def build_report(args: argparse.Namespace) -> tuple[dict[str, Any], bool]:
    logger.debug("running %s (threads=%d, budget=%d)", args.command, args.threads, args.budget)
    data, ok = HANDLERS[args.command](args)
    document = {"schema": SCHEMA, "command": args.command}
    if args.model:
        document["model"] = args.model
    document.update(data)
    document["ok"] = ok
    return document, ok


def run(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        document, ok = build_report(args)
        if args.out:
            path = Path(args.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(document, indent=2), encoding="utf-8")
            print(f"Report written: {path}")
        else:
            print("\n".join(format_text(document)))
        if args.command == "shadows" and "C_d" in document:
            print(f"C_{document['d']} = {document['C_d']:g}")
            if "C_d_published" in document:
                print(f"C_{document['d']} = {document['C_d_published']:g} (published)")
        if not ok:
            raise ValidationFailure(f"{args.command}: a checked identity or inequality failed.")
        return EXIT_OK
    except DeJongError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> int:
    """CLI entry point for dejong."""
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
