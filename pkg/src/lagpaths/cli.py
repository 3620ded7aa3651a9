"""Batch front door: verification suites, simulation and Taylor runners.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.  All outputs are JSON (reports, run summaries) or CSV
(time series); runs are deterministic for a fixed config and seed, bitwise
independent of the worker-thread count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import combinatorics as comb
from . import dynamics, kernels, scenarios, taylor
from .errors import ConfigError, NumericalFailureError


# -- verification reports ------------------------------------------------------


@dataclasses.dataclass
class VerificationReport:
    suite: str
    cases: list
    informational: list

    def counts(self) -> dict:
        passed = sum(1 for c in self.cases if c["passed"])
        return {
            "total": len(self.cases),
            "passed": passed,
            "failed": len(self.cases) - passed,
            "informational": len(self.informational),
        }

    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.cases)

    def to_json(self) -> str:
        payload = {
            "suite": self.suite,
            "summary": self.counts(),
            "cases": self.cases,
            "informational": self.informational,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _frac(x: Fraction) -> str:
    return str(x)


def run_identity_suite(max_n: int, dims: list[int]) -> VerificationReport:
    """Exact identity checks; d >= 2 partition-sum ratios are informational."""
    if max_n < 1:
        raise ConfigError("max_n must be >= 1")
    if max_n > 15:
        raise ConfigError("multivariate identities are capped at max_n = 15")
    if any(d not in (1, 2, 3) for d in dims):
        raise ConfigError("dims must be a subset of {1, 2, 3}")
    cases, info = [], []

    for j in range(2, 31):
        lhs, rhs, equal = comb.check_factorial_bound(j)
        cases.append(
            {
                "name": f"half_binomial_factorial_identity[j={j}]",
                "expected": _frac(rhs),
                "got": _frac(lhs),
                "passed": bool(equal),
            }
        )

    for n in range(1, max_n + 1):
        lhs, rhs, equal = comb.magic_identity_1d(n)
        cases.append(
            {
                "name": f"partition_sum_closed_form_1d[n={n}]",
                "expected": _frac(rhs),
                "got": _frac(lhs),
                "passed": bool(equal),
            }
        )

    if 1 in dims:
        for n in range(1, max_n + 1):
            lhs, rhs, ratio = comb.magic_identity_multi(n, 1)
            cases.append(
                {
                    "name": f"partition_sum_closed_form_multi[d=1,n={n}]",
                    "expected": _frac(rhs),
                    "got": _frac(lhs),
                    "passed": ratio == 1,
                }
            )

    for n in range(1, 41):
        triple, closed, equal, bound = comb.S_n_identity(n)
        cases.append(
            {
                "name": f"coefficient_triple_sum[n={n}]",
                "expected": _frac(closed),
                "got": _frac(triple),
                "passed": bool(equal and bound),
            }
        )

    for m in range(1, 41):
        lhs, rhs, equal = comb.convolution_identity(m)
        cases.append(
            {
                "name": f"coefficient_convolution[m={m}]",
                "expected": _frac(rhs),
                "got": _frac(lhs),
                "passed": bool(equal),
            }
        )
    lhs0, rhs0, _ = comb.convolution_identity(0)
    info.append(
        {
            "name": "coefficient_convolution[m=0]",
            "note": "closed form misses the generating-function constant at m=0",
            "lhs": _frac(lhs0),
            "rhs": _frac(rhs0),
        }
    )

    for d in dims:
        if d == 1:
            continue
        for n in range(1, min(max_n, 10) + 1):
            lhs, rhs, ratio = comb.magic_identity_multi(n, d)
            info.append(
                {
                    "name": f"partition_sum_ratio[d={d},n={n}]",
                    "lhs": _frac(lhs),
                    "rhs": _frac(rhs),
                    "ratio": _frac(ratio),
                }
            )
    return VerificationReport("identities", cases, info)


KERNEL_BOUND_CHECKS = (
    # (label, expr builder, power offset, gaussian decay in the envelope)
    ("sqg_inner", lambda: kernels.split_gaussian(kernels.sqg_velocity_kernel())[0], 2, True),
    ("sqg_outer", lambda: kernels.split_gaussian(kernels.sqg_velocity_kernel())[1], 0, False),
    ("sqg_stream_part", lambda: kernels.decompose_kin("sqg")[0], 1, True),
    ("sqg_bounded_part", lambda: kernels.decompose_kin("sqg")[1], 0, True),
    ("strain2d_inner", lambda: kernels.split_gaussian(kernels.strain_2d_kernel())[0], 2, True),
    ("strain2d_outer", lambda: kernels.split_gaussian(kernels.strain_2d_kernel())[1], 0, False),
    ("biot_savart_inner", lambda: kernels.split_gaussian(kernels.biot_savart_2d_kernel())[0], 1, True),
    ("biot_savart_outer", lambda: kernels.split_gaussian(kernels.biot_savart_2d_kernel())[1], 0, False),
)

CIRCLE_MEAN_KERNELS = (
    ("sqg", kernels.sqg_velocity_kernel),
    ("biot_savart_2d", kernels.biot_savart_2d_kernel),
    ("strain_2d", kernels.strain_2d_kernel),
)


def run_kernel_suite(
    c_k: float, max_order: int, samples: int, seed: int
) -> VerificationReport:
    """Derivative envelopes at the given constant, plus circle means."""
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    if not 0 < max_order <= 6:
        raise ConfigError("max_order must lie in 1..6")
    if c_k <= 0:
        raise ConfigError("c_k must be positive")
    cases, info = [], []
    pts = kernels.bound_samples(samples, 2, seed=seed)
    for label, build, offset, gauss in KERNEL_BOUND_CHECKS:
        rep = kernels.verify_derivative_bound(
            build(), c_k, offset, max_order, pts, gaussian_decay=gauss
        )
        cases.append(
            {
                "name": f"derivative_envelope[{label}]",
                "expected": "worst ratio <= 1",
                "got": {
                    "worst_ratio": rep["worst_ratio"],
                    "per_order": {
                        str(k): v for k, v in rep["worst_ratio_per_order"].items()
                    },
                },
                "passed": bool(rep["passed"]),
            }
        )

    for name, build in CIRCLE_MEAN_KERNELS:
        expr = build()
        inner, outer = kernels.split_gaussian(expr)
        for tag, e in (("", expr), ("_inner", inner), ("_outer", outer)):
            worst = 0.0
            for radius in (0.5, 1.0, 2.0):
                mean = kernels.circle_mean(e, radius, 64)
                worst = max(worst, float(np.max(np.abs(mean))))
            cases.append(
                {
                    "name": f"circle_mean[{name}{tag}]",
                    "expected": "max |mean| < 1e-12 at radii 0.5, 1, 2",
                    "got": worst,
                    "passed": worst < 1e-12,
                }
            )

    # 3D strain kernel: no established envelope constant; measure one
    pts3 = kernels.bound_samples(max(samples // 4, 64), 3, seed=seed + 1)
    strain3 = kernels.strain_3d_kernel()
    rep3 = kernels.verify_derivative_bound(
        strain3, c_k, 3, min(max_order, 3), pts3, gaussian_decay=False
    )
    empirical = max(
        c_k * ratio ** (1.0 / order)
        for order, ratio in rep3["worst_ratio_per_order"].items()
        if order >= 1
    )
    mean3 = float(np.max(np.abs(kernels.circle_mean(strain3, 1.0, 24))))
    info.append(
        {
            "name": "strain3d_empirical_constant",
            "note": "3D strain kernel constant measured, not asserted",
            "constant_at_offset_3": empirical,
            "sphere_mean_radius_1": mean3,
        }
    )
    return VerificationReport("kernels", cases, info)


# -- run configuration ---------------------------------------------------------

_SCHEMA = {
    "model": str,
    "scenario": (str, dict),
    "grid": {"extent": list, "n_per_axis": int},
    "regularization_delta": (int, float),
    "integrator": {
        "kind": str,
        "dt": (int, float),
        "t_end": (int, float),
        "taylor_order": int,
        "safety": (int, float),
    },
    "diagnostics": {"pair_samples": int, "output_every": int},
    "output": {"directory": str},
    "seed": int,
}

_INLINE_FIELD_KEYS = {"field", "amplitude", "width", "center"}

_REQUIRED = ("model", "scenario", "integrator", "output")


def _check_keys(data: dict, schema: dict, path: str = "") -> None:
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown configuration key {path + key!r}")
        expected = schema[key]
        if isinstance(expected, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path + key!r} must be a mapping")
            _check_keys(value, expected, path + key + ".")
        elif expected is not None:
            if key == "scenario" and isinstance(value, dict):
                bad = set(value) - _INLINE_FIELD_KEYS
                if bad:
                    raise ConfigError(f"unknown inline scenario keys {sorted(bad)}")
                continue
            if not isinstance(value, expected):
                raise ConfigError(f"{path + key!r} has the wrong type")


@dataclasses.dataclass
class RunConfig:
    model: str
    scenario: object
    grid: Optional[dict]
    regularization_delta: Optional[float]
    integrator: dict
    diagnostics: dict
    output_dir: Path
    seed: int

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        _check_keys(raw, _SCHEMA)
        for key in _REQUIRED:
            if key not in raw:
                raise ConfigError(f"missing required configuration key {key!r}")
        integ = dict(raw["integrator"])
        kind = integ.get("kind", "rk4")
        if kind not in ("rk4", "taylor"):
            raise ConfigError("integrator.kind must be 'rk4' or 'taylor'")
        if "dt" not in integ or integ["dt"] <= 0:
            raise ConfigError("integrator.dt must be positive")
        if "t_end" not in integ or integ["t_end"] <= 0:
            raise ConfigError("integrator.t_end must be positive")
        integ.setdefault("taylor_order", 12)
        integ.setdefault("safety", 0.5)
        if not 0 < integ["safety"] < 1:
            raise ConfigError("integrator.safety must lie in (0, 1)")
        if not 1 <= integ["taylor_order"] <= taylor.FAST_MAX_ORDER:
            raise ConfigError(
                f"integrator.taylor_order must lie in 1..{taylor.FAST_MAX_ORDER}"
            )
        diag = dict(raw.get("diagnostics", {}))
        diag.setdefault("pair_samples", 2048)
        diag.setdefault("output_every", 10)
        if diag["output_every"] < 1 or diag["pair_samples"] < 0:
            raise ConfigError("invalid diagnostics settings")
        grid = raw.get("grid")
        if grid is not None:
            if "extent" not in grid or "n_per_axis" not in grid:
                raise ConfigError("grid needs 'extent' and 'n_per_axis'")
            if grid["n_per_axis"] < 2:
                raise ConfigError("grid.n_per_axis must be >= 2")
        delta = raw.get("regularization_delta")
        if delta is not None and delta < 0:
            raise ConfigError("regularization_delta must be >= 0")
        return RunConfig(
            model=kernels.normalize_model_tag(raw["model"]),
            scenario=raw["scenario"],
            grid=grid,
            regularization_delta=delta,
            integrator=integ,
            diagnostics=diag,
            output_dir=Path(raw["output"]["directory"]),
            seed=int(raw.get("seed", 0)),
        )


def build_run(config: RunConfig):
    """Resolve the scenario into a (state, spec) pair, honoring overrides."""
    overrides = {}
    if config.grid is not None:
        overrides["extent"] = tuple(tuple(ax) for ax in config.grid["extent"])
        overrides["n_per_axis"] = config.grid["n_per_axis"]
    if config.regularization_delta is not None:
        overrides["delta"] = config.regularization_delta

    if isinstance(config.scenario, str):
        name = config.scenario
        if name in ("two_vortex", "vortex_pair"):
            state, spec = scenarios.build_scenario(name)
        else:
            state, spec = scenarios.build_scenario(name, **overrides)
    else:
        if config.grid is None:
            raise ConfigError("inline scenarios need a grid")
        field_kind = config.scenario.get("field", "gaussian")
        params = {
            k: v for k, v in config.scenario.items() if k in ("amplitude", "width")
        }
        if field_kind == "gaussian":
            field = scenarios.gaussian_field(
                center=config.scenario.get("center", (0.0, 0.0)), **params
            )
        elif field_kind == "stratified":
            field = scenarios.stratified_field(**params)
        else:
            raise ConfigError(f"unknown inline field kind {field_kind!r}")
        extent = overrides["extent"]
        n_axis = overrides["n_per_axis"]
        delta = overrides.get("delta", dynamics.default_delta(extent, n_axis))
        if config.model in ("sqg", "ipm", "boussinesq2d"):
            kw = {"theta0": field}
            if config.model == "boussinesq2d":
                kw["gamma_data"] = dynamics.ScalarField(
                    lambda a: np.zeros(len(a))
                )
            state = dynamics.init_grid(extent, n_axis, **kw)
        elif config.model == "euler2d":
            state = dynamics.init_grid(
                extent, n_axis, gamma_data=dynamics.ScalarField(field.value)
            )
        else:
            raise ConfigError("inline scenarios cover the 2D models only")
        spec = dynamics.ModelSpec(config.model, delta)

    if spec.model != config.model:
        raise ConfigError(
            f"config model {config.model!r} does not match scenario model "
            f"{spec.model!r}"
        )
    return state, spec


# -- output writers -------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x) + 0.0)


def state_csv_header(dim: int) -> str:
    axes = range(1, dim + 1)
    cols = (
        ["t", "particle_id"]
        + [f"a{i}" for i in axes]
        + [f"x{i}" for i in axes]
        + [f"g{i}{j}" for i in axes for j in axes]
        + ["theta0"]
    )
    return ",".join(cols)


def append_state_rows(lines: list[str], state: dynamics.ParticleState) -> None:
    if state.theta0 is not None:
        data_col = state.theta0
    elif state.omega0 is not None and state.omega0.ndim == 1:
        data_col = state.omega0
    else:
        data_col = np.zeros(state.n)
    g = state.grads if state.grads is not None else dynamics.identity_grads(
        state.n, state.dim
    )
    for i in range(state.n):
        row = (
            [_fmt(state.t), str(i)]
            + [_fmt(v) for v in state.labels[i]]
            + [_fmt(v) for v in state.positions[i]]
            + [_fmt(v) for v in g[i].reshape(-1)]
            + [_fmt(data_col[i])]
        )
        lines.append(",".join(row))


DIAG_HEADER = (
    "t,chord_min,chord_max,lambda_bound,grad_u_sup,det_dev,"
    "hamiltonian,p1,p2,ang_imp"
)


def diag_row(rec: dynamics.DiagnosticsRecord) -> str:
    parts = [
        _fmt(rec.t),
        _fmt(rec.chord_arc_min),
        _fmt(rec.chord_arc_max),
        _fmt(rec.lambda_bound),
        _fmt(rec.grad_u_sup),
        _fmt(rec.det_grad_max_dev),
        _fmt(rec.hamiltonian),
        _fmt(rec.momentum[0]) if rec.momentum is not None else "",
        _fmt(rec.momentum[1]) if rec.momentum is not None else "",
        _fmt(rec.angular_impulse),
    ]
    return ",".join(parts)


def _is_point_vortex(state: dynamics.ParticleState, spec: dynamics.ModelSpec):
    return spec.model == "euler2d" and spec.regularization_delta == 0.0


def _collect_diagnostics(
    state, spec, grad_u_hist, times, pair_samples, seed, threads
) -> dynamics.DiagnosticsRecord:
    sup = dynamics.grad_u_sup(
        dataclasses.replace(spec, evolve_gradients=True), state, threads=threads
    )
    grad_u_hist.append(sup)
    times.append(state.t)
    if len(times) >= 2:
        lam = float(
            np.exp(np.trapezoid(np.asarray(grad_u_hist), x=np.asarray(times)))
        )
    else:
        lam = 1.0
    lo, hi = dynamics.chord_arc(state, pair_samples, seed=seed)
    det_dev = (
        dynamics.incompressibility_residual(state)
        if spec.evolve_gradients and state.grads is not None
        else None
    )
    ham = mom = ang = None
    if _is_point_vortex(state, spec):
        ham, p, ang = dynamics.invariants_euler2d(state)
        mom = (float(p[0]), float(p[1]))
    return dynamics.DiagnosticsRecord(
        t=state.t,
        chord_arc_min=lo,
        chord_arc_max=hi,
        lambda_bound=lam,
        grad_u_sup=sup,
        det_grad_max_dev=det_dev,
        hamiltonian=ham,
        momentum=mom,
        angular_impulse=ang,
    )


def run_simulation(config: RunConfig, threads: int = 1) -> dict:
    """RK4 (or Taylor) time loop with periodic diagnostics and snapshots."""
    state, spec = build_run(config)
    integ = config.integrator
    kind = integ["kind"]
    if kind == "taylor":
        taylor.ensure_taylor_model(spec)
    t_end, dt = float(integ["t_end"]), float(integ["dt"])
    every = config.diagnostics["output_every"]
    pair_samples = config.diagnostics["pair_samples"]

    state_lines = [state_csv_header(state.dim)]
    diag_lines = [DIAG_HEADER]
    grad_u_hist: list[float] = []
    times: list[float] = []

    def snapshot(s):
        append_state_rows(state_lines, s)

    rec = _collect_diagnostics(
        state, spec, grad_u_hist, times, pair_samples, config.seed, threads
    )
    diag_lines.append(diag_row(rec))
    snapshot(state)
    first = rec

    step = 0
    while state.t < t_end - 1e-12:
        if kind == "rk4":
            h = min(dt, t_end - state.t)
            state = dynamics.rk4_step(spec, state, h, threads=threads)
        else:
            cap = min(dt, t_end - state.t)
            state, _ = taylor.taylor_step(
                spec,
                state,
                order=integ["taylor_order"],
                safety=integ["safety"],
                h_cap=cap / integ["safety"],
                threads=threads,
            )
        step += 1
        if step % every == 0 or state.t >= t_end - 1e-12:
            rec = _collect_diagnostics(
                state, spec, grad_u_hist, times, pair_samples, config.seed, threads
            )
            diag_lines.append(diag_row(rec))
            snapshot(state)

    drifts = {}
    if _is_point_vortex(state, spec):
        drifts = {
            "hamiltonian": abs(rec.hamiltonian - first.hamiltonian),
            "momentum": [
                abs(rec.momentum[0] - first.momentum[0]),
                abs(rec.momentum[1] - first.momentum[1]),
            ],
            "angular_impulse": abs(rec.angular_impulse - first.angular_impulse),
        }

    summary = {
        "final_t": state.t,
        "steps": step,
        "chord_min": rec.chord_arc_min,
        "chord_max": rec.chord_arc_max,
        "lambda": rec.lambda_bound,
        "det_dev": rec.det_grad_max_dev,
        "invariant_drifts": drifts,
        "extent_sensitivity": _extent_sensitivity(state, spec, threads),
    }

    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "state.csv").write_text("\n".join(state_lines) + "\n")
    (out / "diagnostics.csv").write_text("\n".join(diag_lines) + "\n")
    return summary


def _extent_sensitivity(state, spec, threads) -> Optional[float]:
    """Relative change of the fastest particle's speed when the outermost
    label shell is dropped: a direct measure of domain-truncation error."""
    if state.n < 16 or state.theta0 is None:
        return None
    u_full = dynamics.velocity(spec, state, threads=threads)
    lo = state.labels.min(axis=0)
    hi = state.labels.max(axis=0)
    span = hi - lo
    inner = np.all(
        (state.labels > lo + 0.06 * span) & (state.labels < hi - 0.06 * span),
        axis=1,
    )
    if inner.sum() < 4 or inner.all():
        return None
    trimmed = dynamics.ParticleState(
        dim=state.dim,
        labels=state.labels[inner],
        positions=state.positions[inner],
        weights=state.weights[inner],
        grads=None if state.grads is None else state.grads[inner],
        theta0=None if state.theta0 is None else state.theta0[inner],
        grad_theta0=(
            None if state.grad_theta0 is None else state.grad_theta0[inner]
        ),
        omega0=None if state.omega0 is None else state.omega0[inner],
        boussinesq_w=(
            None if state.boussinesq_w is None else state.boussinesq_w[inner]
        ),
        t=state.t,
    )
    u_trim = dynamics.velocity(spec, trimmed, threads=threads)
    speeds = np.linalg.norm(u_full[inner], axis=1)
    k = int(np.argmax(speeds))
    if speeds[k] == 0.0:
        return None
    return float(np.linalg.norm(u_trim[k] - u_full[inner][k]) / speeds[k])


def run_taylor_analysis(config: RunConfig, threads: int = 1) -> tuple[dict, list[str]]:
    """Jet expansion at the initial state: radius data, envelope, bound."""
    state, spec = build_run(config)
    taylor.ensure_taylor_model(spec)
    order = config.integrator["taylor_order"]
    jets = taylor.time_jets_fast(spec, state, order, threads=threads)
    est = taylor.estimate_radius(jets, method="ratio")
    fitted_c, fitted_r, satisfied = taylor.fit_cauchy(jets)

    lines = ["particle_id,n,coef_norm,ratio_est,root_est"]
    norms = np.linalg.norm(jets.x_coeffs, axis=2)
    for i in range(jets.n_particles):
        for n in range(order + 1):
            coef = norms[n, i]
            ratio = (
                norms[n, i] / norms[n + 1, i]
                if n < order and norms[n + 1, i] > 0
                else None
            )
            root = coef ** (1.0 / n) if n >= 1 and coef > 0 else None
            root = 1.0 / root if root else None
            lines.append(
                f"{i},{n},{_fmt(coef)},{_fmt(ratio)},{_fmt(root)}"
            )

    summary = {
        "aggregate_radius": est.aggregate,
        "aggregate_radius_root": est.aggregate_root,
        "fitted_C": fitted_c,
        "fitted_R": fitted_r,
        "envelope_satisfied": satisfied,
        "growing_estimates": est.growing,
        "order": order,
    }
    if state.theta0 is not None and state.grad_theta0 is not None:
        stats = taylor.holder_stats(state, gamma=0.5, seed=config.seed)
        c1, c0, r_paper, provenance = taylor.paper_radius_bound(stats)
        summary.update(
            {
                "R_paper": r_paper,
                "C0": c0,
                "C1": c1,
                "enforced_constraints": [
                    p["constraint"] for p in provenance if p["enforced"]
                ],
                "unenforced_constraints": [
                    p["constraint"] for p in provenance if not p["enforced"]
                ],
            }
        )
    return summary, lines


def run_radius_bound(config: RunConfig) -> dict:
    state, _spec = build_run(config)
    if state.theta0 is None or state.grad_theta0 is None:
        raise ConfigError("radius bound needs scalar data (theta0) scenarios")
    stats = taylor.holder_stats(state, gamma=0.5, seed=config.seed)
    c1, c0, r_paper, provenance = taylor.paper_radius_bound(stats)
    return {
        "gamma": stats.gamma,
        "lambda": stats.lam,
        "holder_stats": {
            "theta_seminorm": stats.theta_seminorm,
            "theta_l1": stats.theta_l1,
            "theta_linf": stats.theta_linf,
            "grad_theta_seminorm": stats.grad_theta_seminorm,
            "grad_theta_l1": stats.grad_theta_l1,
            "grad_theta_linf": stats.grad_theta_linf,
            "map_norm": stats.map_norm,
        },
        "C0": c0,
        "C1": c1,
        "R_paper": r_paper,
        "constraints": provenance,
    }


# -- command line ----------------------------------------------------------------


def _load_config(path: str) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(raw)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lagpaths",
        description="Lagrangian-path laboratory for inviscid fluid models",
    )
    parser.add_argument(
        "--threads", type=int, default=1, help="worker threads for pairwise sums"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_id = sub.add_parser("verify-identities", help="exact combinatorial identities")
    p_id.add_argument("--max-n", type=int, default=15)
    p_id.add_argument("--dims", type=str, default="1,2,3")
    p_id.add_argument("--output", type=str, default=None)

    p_k = sub.add_parser("verify-kernels", help="kernel derivative envelopes")
    p_k.add_argument("--ck", type=float, default=32.0)
    p_k.add_argument("--max-order", type=int, default=5)
    p_k.add_argument("--samples", type=int, default=1000)
    p_k.add_argument("--seed", type=int, default=7)
    p_k.add_argument("--output", type=str, default=None)

    for name, help_text in (
        ("simulate", "time integration with diagnostics"),
        ("taylor", "jet expansion, radius estimates, Taylor run"),
        ("radius-bound", "Holder statistics and the explicit radius bound"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "verify-identities":
            dims = [int(d) for d in args.dims.split(",") if d.strip()]
            report = run_identity_suite(args.max_n, dims)
            text = report.to_json()
            if args.output:
                Path(args.output).write_text(text + "\n")
            else:
                print(text)
            return 0 if report.all_passed() else 1
        if args.command == "verify-kernels":
            report = run_kernel_suite(args.ck, args.max_order, args.samples, args.seed)
            text = report.to_json()
            if args.output:
                Path(args.output).write_text(text + "\n")
            else:
                print(text)
            return 0 if report.all_passed() else 1
        if args.command == "simulate":
            config = _load_config(args.config)
            summary = run_simulation(config, threads=args.threads)
            config.output_dir.mkdir(parents=True, exist_ok=True)
            text = json.dumps(summary, indent=2, sort_keys=True)
            (config.output_dir / "summary.json").write_text(text + "\n")
            print(text)
            return 0
        if args.command == "taylor":
            config = _load_config(args.config)
            summary, order_lines = run_taylor_analysis(config, threads=args.threads)
            run_summary = run_simulation(config, threads=args.threads)
            summary.update(run_summary)
            config.output_dir.mkdir(parents=True, exist_ok=True)
            (config.output_dir / "orders.csv").write_text(
                "\n".join(order_lines) + "\n"
            )
            text = json.dumps(summary, indent=2, sort_keys=True)
            (config.output_dir / "summary.json").write_text(text + "\n")
            print(text)
            return 0
        if args.command == "radius-bound":
            config = _load_config(args.config)
            payload = run_radius_bound(config)
            config.output_dir.mkdir(parents=True, exist_ok=True)
            text = json.dumps(payload, indent=2, sort_keys=True)
            (config.output_dir / "radius_bound.json").write_text(text + "\n")
            print(text)
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
