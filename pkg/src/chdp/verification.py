"""Acceptance suite: every shipped guarantee as a named, timed check.

Each check computes its own oracle (closed forms, quadrature, Richardson
ratios, independent formulations) and compares the implementation against
it at a fixed tolerance.  `run_all` powers both the `verify` CLI command
and the pytest acceptance module, so there is a single source of truth for
what this package promises.

The long 2CH/2DP reference runs (n = 256, dt = 1e-4, t in [0, 1], smooth
amplitude-0.1 mode-1 data) are shared between checks via caches.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from chdp.connection import (
    Model,
    VelocityPair,
    ad_transpose,
    bracket,
    christoffel,
    metric,
)
from chdp.curvature import (
    CosineDirectionPair,
    ch_cosine_curvature,
    closed_form_curvature,
    cosine_pair,
    gram_determinant,
    positivity_scan,
    scan_grid,
    sectional_curvature,
    unnormalized_curvature,
)
from chdp.evolution import (
    EvolutionConfig,
    evolve,
    rhs,
    rhs_momentum_form,
    step_rk4,
)
from chdp.flowmap import evolve_flowmap, momentum_drift, reconstruct_f
from chdp.rigidbody import RigidBodyState, coadjoint_drift, evolve_rigidbody
from chdp.spectral import (
    Grid,
    PeriodicField,
    compose,
    cosine_field,
    dealiased_product,
    derivative,
    helmholtz,
    invert_diffeo,
    random_band_limited,
)

__all__ = ["CheckResult", "CRITERIA", "run_criterion", "run_all", "format_table"]

SMOOTH_N = 256
SMOOTH_DT = 1e-4
SMOOTH_T_END = 1.0
SMOOTH_AMP = 0.1


@dataclass(frozen=True)
class CheckResult:
    criterion: str
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] {self.criterion} {self.name}: "
                f"{self.detail} ({self.seconds:.1f}s)")


def _smooth_initial(model: Model, grid: Grid) -> VelocityPair:
    u = cosine_field(grid, 1, SMOOTH_AMP)
    if model.two_component:
        return VelocityPair(u, cosine_field(grid, 1, SMOOTH_AMP))
    return VelocityPair.single(u)


@lru_cache(maxsize=None)
def _smooth_eulerian_run(model_value: str):
    model = Model(model_value)
    grid = Grid(SMOOTH_N)
    config = EvolutionConfig(model, dt=SMOOTH_DT, t_end=SMOOTH_T_END,
                             grid_n=SMOOTH_N, diagnostics_stride=100)
    return evolve(config, _smooth_initial(model, grid))


@lru_cache(maxsize=None)
def _smooth_flowmap_run(model_value: str):
    model = Model(model_value)
    grid = Grid(SMOOTH_N)
    config = EvolutionConfig(model, dt=SMOOTH_DT, t_end=SMOOTH_T_END,
                             grid_n=SMOOTH_N, diagnostics_stride=100)
    return evolve_flowmap(config, _smooth_initial(model, grid))


def _random_state(grid, rng, model, max_mode=10, scale=0.3):
    u = random_band_limited(grid, rng, max_mode, scale)
    if model.two_component:
        return VelocityPair(u, random_band_limited(grid, rng, max_mode, scale))
    return VelocityPair.single(u)


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def check_curvature_oracle(seed: int) -> tuple[bool, str]:
    """Numeric S agrees with the closed form on all mode tuples <= 4."""
    grid = scan_grid(4)
    assert grid.n == 128
    worst = 0.0
    count = 0
    for ku, kv in itertools.combinations(
            itertools.product(range(1, 5), repeat=2), 2):
        direction = CosineDirectionPair(ku[0], ku[1], kv[0], kv[1])
        u, v = cosine_pair(grid, direction)
        s_num = unnormalized_curvature(u, v)
        s_closed = closed_form_curvature(direction, grid)
        worst = max(worst, abs(s_num - s_closed) / (1.0 + abs(s_closed)))
        count += 1
    return worst <= 1e-8, f"max rel err {worst:.2e} over {count} tuples (tol 1e-8)"


def check_positivity(seed: int) -> tuple[bool, str]:
    """S > 0 on every scanned cosine tuple with modes <= 4."""
    rows = positivity_scan(4, enforce=False)
    full = [r for r in rows if r.m_k1 > 0]
    min_s = min(r.s_numeric for r in full)
    ok = all(r.s_numeric > 0 and r.s_closed > 0 for r in full)
    return ok, f"min S {min_s:.6f} > 0 over {len(full)} tuples"


def check_density_family_bounds(seed: int) -> tuple[bool, str]:
    """Gram = 1/4 and Sec >= 1/8 on zero-velocity cosine pairs, modes <= 6."""
    grid = scan_grid(6)
    worst_gram = 0.0
    min_sec = np.inf
    for mk2, ml2 in itertools.combinations(range(1, 7), 2):
        d = CosineDirectionPair(1, mk2, 1, ml2, first_components_zero=True)
        u, v = cosine_pair(grid, d)
        worst_gram = max(worst_gram, abs(gram_determinant(u, v) - 0.25))
        min_sec = min(min_sec, sectional_curvature(u, v))
    ok = worst_gram <= 1e-12 and min_sec >= 0.125 - 1e-12
    return ok, (f"|gram - 1/4| <= {worst_gram:.2e} (tol 1e-12), "
                f"min Sec {min_sec:.6f} >= 1/8 - 1e-12")


def check_ch_reduction(seed: int) -> tuple[bool, str]:
    """S on zero-density pairs equals the single-component closed form."""
    grid = scan_grid(6)
    worst = 0.0
    for mk, ml in itertools.combinations(range(1, 7), 2):
        u = VelocityPair.single(cosine_field(grid, mk))
        v = VelocityPair.single(cosine_field(grid, ml))
        s_num = unnormalized_curvature(u, v)
        worst = max(worst, abs(s_num - ch_cosine_curvature(mk, ml)))
    return worst <= 1e-9 * (1 + worst), f"max abs err {worst:.2e} (tol 1e-9)"


def check_rhs_equivalence(seed: int) -> tuple[bool, str]:
    """Weak RHS = Christoffel form = Helmholtz-lifted momentum form."""
    grid = Grid(128)
    rng = np.random.default_rng(seed + 5)
    worst_gamma = 0.0
    worst_strong = 0.0
    for model in Model:
        for _ in range(20):
            s = _random_state(grid, rng, model)
            weak = rhs(model, s)
            gamma = christoffel(model, s, s)
            adv_u = weak.u + dealiased_product(s.u, derivative(s.u))
            adv_rho = weak.rho + dealiased_product(s.u, derivative(s.rho))
            worst_gamma = max(worst_gamma,
                              np.max(np.abs(adv_u.values - gamma.u.values)),
                              np.max(np.abs(adv_rho.values - gamma.rho.values)))
            strong = rhs_momentum_form(model, s)
            worst_strong = max(worst_strong,
                               np.max(np.abs(helmholtz(weak.u).values - strong.u.values)),
                               np.max(np.abs(weak.rho.values - strong.rho.values)))
    ok = worst_gamma <= 1e-9 and worst_strong <= 1e-9
    return ok, (f"|weak - Gamma| {worst_gamma:.2e}, "
                f"|A(weak) - momentum form| {worst_strong:.2e} (tol 1e-9)")


def check_energy_conservation(seed: int) -> tuple[bool, str]:
    """Metric energy conserved along the smooth 2CH run; DP family recorded."""
    run = _smooth_eulerian_run(Model.CH2.value)
    e0 = run.diagnostics[0].energy
    drift_2ch = max(abs(d.energy - e0) for d in run.diagnostics) / e0

    recorded = []
    for model in (Model.DP, Model.DP2):
        res = _smooth_eulerian_run(model.value)
        e0_m = res.diagnostics[0].energy
        drift = max(abs(d.energy - e0_m) for d in res.diagnostics) / e0_m
        recorded.append(f"{model.value} drift {drift:.2e} (recorded)")
    ok = drift_2ch <= 1e-7
    return ok, f"2ch relative drift {drift_2ch:.2e} (tol 1e-7); " + ", ".join(recorded)


def check_momentum_conservation(seed: int) -> tuple[bool, str]:
    """Transported momenta constant along the smooth flow-map runs."""
    details = []
    ok = True
    for model in (Model.CH2, Model.DP2):
        res = _smooth_flowmap_run(model.value)
        drifts = momentum_drift(model, res, stride=50)
        rho_scale = np.max(np.abs(res.rho[0]))
        rel_rho = np.max(drifts["rho0"]) / rho_scale
        ok = ok and rel_rho <= 1e-6
        details.append(f"{model.value} rho0 drift {rel_rho:.2e}")
        if "m0" in drifts:
            m_scale = np.max(np.abs(helmholtz(
                PeriodicField(res.grid, res.u[0])).values))
            rel_m = np.max(drifts["m0"]) / m_scale
            ok = ok and rel_m <= 1e-6
            details.append(f"{model.value} m0 drift {rel_m:.2e}")
    return ok, ", ".join(details) + " (tol 1e-6 relative)"


def check_lagrangian_consistency(seed: int) -> tuple[bool, str]:
    """(phi_t, f_t) o phi^{-1} matches the Eulerian fields; f matches quadrature."""
    worst_u = 0.0
    for model in (Model.CH2, Model.DP2):
        flow = _smooth_flowmap_run(model.value)
        eul = _smooth_eulerian_run(model.value)
        i = len(flow.times) - 1
        g = flow.group_element(i)
        inv = invert_diffeo(g.phi)
        phi_t = compose(PeriodicField(flow.grid, flow.u[i]), g.phi)
        f_t = compose(PeriodicField(flow.grid, flow.rho[i]), g.phi)
        recon_u = compose(phi_t, inv)
        recon_rho = compose(f_t, inv)
        worst_u = max(worst_u,
                      float(np.max(np.abs(recon_u.values - eul.final.u.values))),
                      float(np.max(np.abs(recon_rho.values - eul.final.rho.values))))

    ratios = []
    grid = Grid(128)
    initial = VelocityPair(cosine_field(grid, 1, 0.3), cosine_field(grid, 1, 0.3))
    for model in (Model.CH2, Model.DP2):
        def gap(dt):
            config = EvolutionConfig(model, dt=dt, t_end=0.2, grid_n=128)
            res = evolve_flowmap(config, initial)
            quad = reconstruct_f(model, initial.rho, res.times, res.jacobians())
            return np.max(np.abs(res.f[-1] - quad.values))
        ratios.append(gap(1e-2) / gap(5e-3))

    ok = worst_u <= 1e-6 and all(12.0 <= r <= 20.0 for r in ratios)
    return ok, (f"max |phi_t o phi^-1 - u| {worst_u:.2e} (tol 1e-6), "
                f"f-quadrature ratios {[f'{r:.1f}' for r in ratios]} (in [12, 20])")


def check_duality_identity(seed: int) -> tuple[bool, str]:
    """<ad_transpose(a, b), c> = <a, [b, c]> on 50 random triples."""
    grid = Grid(128)
    rng = np.random.default_rng(seed + 9)
    worst = 0.0
    for _ in range(50):
        a = _random_state(grid, rng, Model.CH2)
        b = _random_state(grid, rng, Model.CH2)
        c = _random_state(grid, rng, Model.CH2)
        lhs = metric(ad_transpose(a, b), c)
        rhs_val = metric(a, bracket(b, c))
        worst = max(worst, abs(lhs - rhs_val))
    return worst <= 1e-9, f"max |<B(a,b),c> - <a,[b,c]>| {worst:.2e} (tol 1e-9)"


def check_rigid_body(seed: int) -> tuple[bool, str]:
    """Spatial momentum, energy, and Casimir constant on the reference spin."""
    state = RigidBodyState.from_rest_attitude([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    traj = evolve_rigidbody(state, dt=1e-3, t_end=10.0)
    pi_drift = np.max(np.linalg.norm(
        traj.spatial_momentum - traj.spatial_momentum[0], axis=1))
    energy_drift = np.max(np.abs(traj.energy - traj.energy[0]))
    casimir = np.einsum("ti,ti->t", traj.body_momentum, traj.body_momentum)
    casimir_drift = np.max(np.abs(casimir - casimir[0]))
    ad_drift = coadjoint_drift(traj)
    ok = max(pi_drift, energy_drift, casimir_drift) <= 1e-8
    return ok, (f"pi drift {pi_drift:.2e}, energy drift {energy_drift:.2e}, "
                f"|Pi|^2 drift {casimir_drift:.2e} (tol 1e-8); "
                f"Ad* residual {ad_drift:.2e}")


def check_rk4_order(seed: int) -> tuple[bool, str]:
    """Global error halves by ~16 under dt halving, PDEs and rigid body."""
    ratios = {}
    grid = Grid(64)
    s0 = VelocityPair(cosine_field(grid, 1, 0.3), cosine_field(grid, 2, 0.2))
    for model in (Model.CH2, Model.DP2):
        def integrate(dt, t_end=0.5):
            s = s0
            for _ in range(int(round(t_end / dt))):
                s = step_rk4(model, s, dt)
            return s
        ref = integrate(5e-4).u.values
        e1 = np.max(np.abs(integrate(4e-3).u.values - ref))
        e2 = np.max(np.abs(integrate(2e-3).u.values - ref))
        ratios[model.value] = e1 / e2

    body = RigidBodyState.from_rest_attitude([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    ref = evolve_rigidbody(body, dt=5e-4, t_end=2.0).omega[-1]
    e1 = np.linalg.norm(evolve_rigidbody(body, dt=8e-3, t_end=2.0).omega[-1] - ref)
    e2 = np.linalg.norm(evolve_rigidbody(body, dt=4e-3, t_end=2.0).omega[-1] - ref)
    ratios["rigidbody"] = e1 / e2

    ok = all(14.0 <= r <= 18.0 for r in ratios.values())
    detail = ", ".join(f"{k} {v:.1f}" for k, v in ratios.items())
    return ok, f"halving ratios {detail} (in [14, 18])"


def check_blowup_detector(seed: int) -> tuple[bool, str]:
    """Steep data trips the threshold with the right reason; smooth data never does."""
    grid = Grid(256)
    config = EvolutionConfig(Model.CH2, dt=5e-4, t_end=2.0, grid_n=256,
                             blowup_slope_threshold=-50.0,
                             blowup_rhox_threshold=50.0,
                             diagnostics_stride=100)
    steep = evolve(config, VelocityPair.single(cosine_field(grid, 1, 2.0)))
    fired = (steep.status.kind == "blowup_detected"
             and steep.status.reason == "min_ux" and steep.status.t < 2.0)
    quiet = all(_smooth_eulerian_run(m.value).status.completed
                for m in (Model.CH2, Model.DP, Model.DP2))
    ok = fired and quiet
    return ok, (f"steep run: {steep.status.kind}/{steep.status.reason} "
                f"at t={steep.status.t}; smooth runs completed: {quiet}")


CRITERIA = [
    ("C1", "curvature oracle equivalence", check_curvature_oracle, 10.0),
    ("C2", "curvature positivity", check_positivity, None),
    ("C3", "density-family Gram and Sec bounds", check_density_family_bounds, None),
    ("C4", "single-component curvature reduction", check_ch_reduction, None),
    ("C5", "right-hand-side equivalence", check_rhs_equivalence, None),
    ("C6", "2CH energy conservation", check_energy_conservation, 60.0),
    ("C7", "momentum conservation", check_momentum_conservation, None),
    ("C8", "Eulerian-Lagrangian consistency", check_lagrangian_consistency, None),
    ("C9", "bracket duality identity", check_duality_identity, None),
    ("C10", "rigid-body conservation", check_rigid_body, 5.0),
    ("C11", "RK4 convergence order", check_rk4_order, None),
    ("C12", "blow-up detector", check_blowup_detector, None),
]


def run_criterion(criterion_id: str, seed: int = 0) -> CheckResult:
    for cid, name, fn, budget in CRITERIA:
        if cid == criterion_id:
            start = time.perf_counter()
            passed, detail = fn(seed)
            passed = bool(passed)
            elapsed = time.perf_counter() - start
            if budget is not None:
                within = elapsed < budget
                detail += f"; runtime {elapsed:.1f}s < {budget:.0f}s: {within}"
                passed = passed and within
            return CheckResult(cid, name, passed, detail, elapsed)
    raise KeyError(f"unknown criterion {criterion_id!r}")


def run_all(seed: int = 0) -> list[CheckResult]:
    return [run_criterion(cid, seed) for cid, *_ in CRITERIA]


def format_table(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
