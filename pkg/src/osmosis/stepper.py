"""Time integration of the drift-diffusion evolution.

Two update rules are available, both with coefficients lagged from the
previous state (the diffusivity is recomputed from u^k and the operator
reassembled at every step):

* explicit:       u^{k+1} = (I + tau A(u^k)) u^k, valid only while
                  tau <= 1 / max |diag(A)| (the update matrix stays
                  nonnegative); the bound is enforced at every step.
* semi-implicit:  u^{k+1} = (I - tau A(u^k))^{-1} u^k, stable for any
                  tau > 0, solved by the relaxation solver.

Both updates preserve the total intensity (column sums of the update
matrix are one) and map nonnegative states to nonnegative states; the
semi-implicit solve can introduce round-off-level negatives, which are
clamped to zero after each step.  Negatives beyond the round-off guard
trigger a numerical-quality warning.

With the full canonical drift of a reference v, the evolution converges
to (mean(f) / mean(v)) * v, the steady state returned by
:func:`steady_state_target`.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .diffusivity import DiffusivityParams, pointwise_g
from .drift import DriftField
from .errors import NumericalQualityWarning, StabilityError
from .grid import Image
from .operator import StencilOperator, apply_values, assemble, explicit_stability_bound
from .solver import SolverConfig, solve_values

#: Negative values no larger than this fraction of max(u) are treated as
#: solver round-off and clamped silently.
CLAMP_GUARD = 1e-8


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "semi-implicit"
    tau: float | None = None  # None: 1e3 for semi-implicit, per-step bound for explicit
    max_steps: int = 1000
    stop_rule: str = "relative-change"
    stop_tol: float = 1e-3
    diffusivity: DiffusivityParams = dc_field(default_factory=DiffusivityParams)
    mse_reference: Image | None = None

    def __post_init__(self):
        if self.scheme not in ("explicit", "semi-implicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.stop_rule not in ("relative-change", "mse-vs-reference", "fixed-steps"):
            raise ValueError(f"unknown stop rule {self.stop_rule!r}")
        if self.tau is not None and not self.tau > 0:
            raise ValueError(f"time step must be positive, got {self.tau}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.stop_rule == "mse-vs-reference" and self.mse_reference is None:
            raise ValueError("mse-vs-reference stopping needs mse_reference")

    def resolved_tau(self) -> float | None:
        if self.tau is not None:
            return self.tau
        return None if self.scheme == "explicit" else 1e3


@dataclass
class EvolutionReport:
    """Per-run diagnostics; all series have length ``steps``."""

    steps: int = 0
    wall_ms: float = 0.0
    stopped_by: str = ""
    warning: str | None = None
    mass: list[float] = dc_field(default_factory=list)
    min_value: list[float] = dc_field(default_factory=list)  # pre-clamp minimum
    rel_change: list[float] = dc_field(default_factory=list)
    solver_iterations: list[int] = dc_field(default_factory=list)
    residuals: list[float] = dc_field(default_factory=list)
    clamp_added: list[float] = dc_field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "wall_ms": self.wall_ms,
            "stopped_by": self.stopped_by,
            "warning": self.warning,
            "mass": self.mass,
            "min_value": self.min_value,
            "rel_change": self.rel_change,
            "solver_iterations": self.solver_iterations,
            "residuals": self.residuals,
            "clamp_added": self.clamp_added,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def _clamp_negatives(vals: np.ndarray, ref_max: float) -> tuple[np.ndarray, float, float]:
    """Zero out negatives; returns (values, pre-clamp min, clamped magnitude)."""
    pre_min = float(vals.min())
    if pre_min >= 0.0:
        return vals, pre_min, 0.0
    guard = CLAMP_GUARD * ref_max
    if pre_min < -guard:
        warnings.warn(
            f"state dipped to {pre_min:.3e}, beyond the round-off guard "
            f"{-guard:.3e}; clamped to zero",
            NumericalQualityWarning,
            stacklevel=3,
        )
    clamped = np.where(vals < 0.0, 0.0, vals)
    return clamped, pre_min, float(-vals[vals < 0.0].sum())


def _explicit_step_values(u: np.ndarray, op: StencilOperator, tau: float):
    bound = explicit_stability_bound(op)
    if tau > bound * (1.0 + 1e-12):
        raise StabilityError(
            f"explicit step tau={tau:.6e} exceeds the stability bound "
            f"1/max|a_ii| = {bound:.6e}"
        )
    out = u + tau * apply_values(op, u)
    out, pre_min, clamped = _clamp_negatives(out, float(u.max()))
    info = {"iterations": 0, "residual": 0.0, "pre_min": pre_min, "clamped": clamped}
    return out, info


def _semi_implicit_step_values(u: np.ndarray, op: StencilOperator, tau: float, cfg: SolverConfig):
    x, sinfo = solve_values(op, tau, u, cfg)
    out, pre_min, clamped = _clamp_negatives(x, float(u.max()))
    info = {
        "iterations": sinfo.iterations,
        "residual": sinfo.residual,
        "pre_min": pre_min,
        "clamped": clamped,
    }
    return out, info


def explicit_step(u: Image, op: StencilOperator, tau: float) -> Image:
    """One explicit update; refuses time steps above the stability bound."""
    if u.grid != op.grid:
        raise ValueError("state and operator live on different grids")
    out, _ = _explicit_step_values(u.values, op, tau)
    return u.with_values(out)


def semi_implicit_step(u: Image, op: StencilOperator, tau: float, cfg: SolverConfig | None = None) -> Image:
    """One semi-implicit update, stable for any tau > 0."""
    if u.grid != op.grid:
        raise ValueError("state and operator live on different grids")
    if not tau > 0:
        raise ValueError(f"time step must be positive, got {tau}")
    out, _ = _semi_implicit_step_values(u.values, op, tau, cfg or SolverConfig())
    return u.with_values(out)


def steady_state_target(f: Image, v: Image) -> Image:
    """The rescaled reference (mean(f) / mean(v)) * v the flow converges to."""
    if f.grid != v.grid:
        raise ValueError("images live on different grids")
    return v.with_values((f.mean / v.mean) * v.values)


def evolve(
    f: Image,
    v: Image,
    drift: DriftField,
    cfg: SchemeConfig | None = None,
    solver_cfg: SolverConfig | None = None,
) -> tuple[Image, EvolutionReport]:
    """Run the evolution from f until the stop rule fires.

    Every step recomputes the diffusivity from the current state,
    reassembles the operator, then advances by the configured scheme.
    Returns the final image and the per-step report; if ``max_steps``
    is exhausted before a tolerance-based rule fires, the result is
    still returned with ``report.warning`` set.
    """
    cfg = cfg or SchemeConfig()
    solver_cfg = solver_cfg or SolverConfig()
    if f.grid != v.grid or drift.grid != f.grid:
        raise ValueError("initial image, reference and drift grids differ")
    if np.any(f.values < 0):
        raise ValueError("initial image must be nonnegative")
    if cfg.diffusivity.mode == "nonlinear" and np.any(v.values <= 0):
        raise ValueError("reference image must be strictly positive")

    report = EvolutionReport()
    tau_fixed = cfg.resolved_tau()
    u = f.values.copy()
    started = time.perf_counter()
    stopped_by = ""
    for _ in range(cfg.max_steps):
        gf = pointwise_g(f.with_values(u), v, cfg.diffusivity)
        op = assemble(gf, drift, f.grid)
        if cfg.scheme == "explicit":
            tau_k = explicit_stability_bound(op) if tau_fixed is None else tau_fixed
            u_next, info = _explicit_step_values(u, op, tau_k)
        else:
            u_next, info = _semi_implicit_step_values(u, op, tau_fixed, solver_cfg)

        u_norm = np.linalg.norm(u)
        change = float(np.linalg.norm(u_next - u) / u_norm) if u_norm > 0 else 0.0
        report.steps += 1
        report.mass.append(float(u_next.sum()))
        report.min_value.append(info["pre_min"])
        report.rel_change.append(change)
        report.solver_iterations.append(info["iterations"])
        report.residuals.append(info["residual"])
        report.clamp_added.append(info["clamped"])
        u = u_next

        if cfg.stop_rule == "relative-change" and change <= cfg.stop_tol:
            stopped_by = "relative-change"
            break
        if cfg.stop_rule == "mse-vs-reference":
            ref = cfg.mse_reference.values
            if float(np.mean((u - ref) ** 2)) <= cfg.stop_tol:
                stopped_by = "mse-vs-reference"
                break
    else:
        if cfg.stop_rule == "fixed-steps":
            stopped_by = "fixed-steps"
        else:
            stopped_by = "max-steps"
            report.warning = (
                f"stop rule {cfg.stop_rule!r} not satisfied within "
                f"{cfg.max_steps} steps (last change {report.rel_change[-1]:.3e})"
            )
    report.stopped_by = stopped_by
    report.wall_ms = (time.perf_counter() - started) * 1e3
    return f.with_values(u), report
