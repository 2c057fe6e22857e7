"""Eulerian time integration of the CH/DP family.

The weak Cauchy forms put every nonlinearity under the inverse Helmholtz
operator:

    2CH:  u_t = -u u_x - Ainv d/dx (u^2 + u_x^2/2 + rho^2/2)
          rho_t = -u rho_x - rho u_x
    2DP:  u_t = -u u_x - Ainv ((3 u^2/2 - rho^2)_x + rho u_x)
          rho_t = -u rho_x - 2 rho u_x

CH and DP are the rho = 0 reductions.  Time stepping is fixed-step
classical RK4 with 2/3-rule dealiasing inside every stage; blow-up is
detected by thresholds on min u_x and max |rho_x|.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from chdp.connection import Model, VelocityPair, metric
from chdp.spectral import (
    Grid,
    constant_field,
    dealias,
    dealiased_product,
    derivative,
    helmholtz,
    helmholtz_inverse,
    inner_l2,
    zero_field,
)

__all__ = [
    "EvolutionConfig",
    "DiagnosticsRecord",
    "RunStatus",
    "EvolveResult",
    "BlowupError",
    "rhs",
    "rhs_momentum_form",
    "step_rk4",
    "evolve",
    "conserved_energy",
    "mean_invariants",
]


class BlowupError(RuntimeError):
    """Non-finite values appeared during a time step."""


@dataclass(frozen=True)
class EvolutionConfig:
    """Run parameters for an Eulerian integration."""

    model: Model
    dt: float
    t_end: float
    grid_n: int
    blowup_slope_threshold: float = -1e6
    blowup_rhox_threshold: float = 1e6
    diagnostics_stride: int = 10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end <= 0 or self.dt >= self.t_end:
            raise ValueError("need 0 < dt < t_end")
        if not np.isfinite(self.blowup_slope_threshold) or self.blowup_slope_threshold >= 0:
            raise ValueError("slope threshold must be finite and negative")
        if not np.isfinite(self.blowup_rhox_threshold) or self.blowup_rhox_threshold <= 0:
            raise ValueError("rho_x threshold must be finite and positive")
        if self.diagnostics_stride < 1:
            raise ValueError("diagnostics stride must be >= 1")
        Grid(self.grid_n)  # validates evenness / minimum size

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    min_ux: float
    max_abs_rhox: float
    mean_m: float
    mean_rho: float


@dataclass(frozen=True)
class RunStatus:
    """Outcome of a run: 'completed' or 'blowup_detected' with time/reason."""

    kind: str
    t: float | None = None
    reason: str | None = None

    @property
    def completed(self) -> bool:
        return self.kind == "completed"


@dataclass
class EvolveResult:
    times: list[float]
    snapshots: list[VelocityPair]
    diagnostics: list[DiagnosticsRecord]
    status: RunStatus = field(default_factory=lambda: RunStatus("completed"))

    @property
    def final(self) -> VelocityPair:
        return self.snapshots[-1]


def rhs(model: Model, state: VelocityPair) -> VelocityPair:
    """Time derivative (u_t, rho_t) of the weak Cauchy form."""
    u, rho = state.u, state.rho
    ux = derivative(u)
    transport = dealiased_product(u, ux)
    if model in (Model.CH, Model.CH2):
        q = u * u + 0.5 * (ux * ux)
        if model is Model.CH2:
            q = q + 0.5 * (rho * rho)
        u_t = -transport - helmholtz_inverse(derivative(dealias(q)))
    else:
        q = 1.5 * (u * u)
        if model is Model.DP2:
            q = q - rho * rho
        flux = derivative(dealias(q))
        if model is Model.DP2:
            flux = flux + dealiased_product(rho, ux)
        u_t = -transport - helmholtz_inverse(flux)
    if not model.two_component:
        return VelocityPair(u_t, zero_field(u.grid))
    rhox = derivative(rho)
    if model is Model.CH2:
        rho_t = -dealiased_product(u, rhox) - dealiased_product(rho, ux)
    else:
        rho_t = -dealiased_product(u, rhox) - 2.0 * dealiased_product(rho, ux)
    return VelocityPair(u_t, rho_t)


def rhs_momentum_form(model: Model, state: VelocityPair) -> VelocityPair:
    """(m_t, rho_t) in momentum variables m = A u.

    Cross-check oracle only: A applied to the u-component of `rhs` must
    reproduce the m-component returned here.
    """
    u, rho = state.u, state.rho
    m = helmholtz(u)
    ux = derivative(u)
    mx = derivative(m)
    rhox = derivative(rho)
    if model in (Model.CH, Model.CH2):
        m_t = -dealiased_product(u, mx) - 2.0 * dealiased_product(m, ux)
        if model is Model.CH2:
            m_t = m_t - dealiased_product(rho, rhox)
        rho_t = (-derivative(dealiased_product(rho, u)) if model is Model.CH2
                 else zero_field(u.grid))
    else:
        m_t = -3.0 * dealiased_product(m, ux) - dealiased_product(mx, u)
        if model is Model.DP2:
            m_t = (m_t - dealiased_product(rho, ux)
                   + 2.0 * dealiased_product(rho, rhox))
        rho_t = (-2.0 * dealiased_product(rho, ux) - dealiased_product(rhox, u)
                 if model is Model.DP2 else zero_field(u.grid))
    return VelocityPair(m_t, rho_t)


def _check_finite(state: VelocityPair, t: float):
    if not (np.all(np.isfinite(state.u.values)) and np.all(np.isfinite(state.rho.values))):
        raise BlowupError(f"non-finite values at t={t:.6g}")


def step_rk4(model: Model, state: VelocityPair, dt: float, t: float = 0.0) -> VelocityPair:
    """One classical RK4 step; raises BlowupError on non-finite stages."""
    k1 = rhs(model, state)
    _check_finite(k1, t)
    k2 = rhs(model, state + (0.5 * dt) * k1)
    _check_finite(k2, t)
    k3 = rhs(model, state + (0.5 * dt) * k2)
    _check_finite(k3, t)
    k4 = rhs(model, state + dt * k3)
    _check_finite(k4, t)
    new = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = VelocityPair(dealias(new.u), dealias(new.rho))
    _check_finite(out, t + dt)
    return out


def conserved_energy(state: VelocityPair) -> float:
    """Metric energy <(u, rho), (u, rho)>; constant along 2CH/CH solutions."""
    return metric(state, state)


def mean_invariants(state: VelocityPair, model: Model = Model.CH2) -> tuple[float, float]:
    """Integrals of m = A u and rho over the circle.

    Both are conserved by 2CH: rho_t is a perfect x-derivative, and
    m_t = -d/dx(u m + u^2/2 - u_x^2/2 + rho^2/2).
    """
    one = constant_field(state.grid, 1.0)
    return inner_l2(helmholtz(state.u), one), inner_l2(state.rho, one)


def _diagnostics(t: float, state: VelocityPair, model: Model) -> DiagnosticsRecord:
    mean_m, mean_rho = mean_invariants(state, model)
    return DiagnosticsRecord(
        t=t,
        energy=conserved_energy(state),
        min_ux=float(derivative(state.u).values.min()),
        max_abs_rhox=float(np.max(np.abs(derivative(state.rho).values))),
        mean_m=mean_m,
        mean_rho=mean_rho,
    )


def _threshold_reason(config: EvolutionConfig, state: VelocityPair) -> str | None:
    if float(derivative(state.u).values.min()) < config.blowup_slope_threshold:
        return "min_ux"
    if float(np.max(np.abs(derivative(state.rho).values))) > config.blowup_rhox_threshold:
        return "max_abs_rhox"
    return None


def evolve(config: EvolutionConfig, initial: VelocityPair) -> EvolveResult:
    """Integrate to t_end, recording snapshots/diagnostics every stride.

    Stops early with status blowup_detected when a threshold is crossed or
    a stage goes non-finite; the status carries the first offending time
    and the criterion that fired.
    """
    if initial.grid.n != config.grid_n:
        raise ValueError(f"initial data on n={initial.grid.n}, config wants {config.grid_n}")
    if not config.model.two_component and np.max(np.abs(initial.rho.values)) != 0.0:
        raise ValueError(f"model {config.model.value} requires rho = 0 initial data")

    state = VelocityPair(dealias(initial.u), dealias(initial.rho))
    result = EvolveResult(times=[0.0], snapshots=[state],
                          diagnostics=[_diagnostics(0.0, state, config.model)])

    reason = _threshold_reason(config, state)
    if reason is not None:
        result.status = RunStatus("blowup_detected", t=0.0, reason=reason)
        return result

    n_steps = config.n_steps
    for step in range(1, n_steps + 1):
        t = step * config.dt
        try:
            state = step_rk4(config.model, state, config.dt, t - config.dt)
        except BlowupError:
            result.status = RunStatus("blowup_detected", t=t, reason="non_finite")
            return result
        reason = _threshold_reason(config, state)
        record = step % config.diagnostics_stride == 0 or step == n_steps
        if record or reason is not None:
            result.times.append(t)
            result.snapshots.append(state)
            result.diagnostics.append(_diagnostics(t, state, config.model))
        if reason is not None:
            result.status = RunStatus("blowup_detected", t=t, reason=reason)
            return result
    return result
