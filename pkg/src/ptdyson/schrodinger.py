"""Dynamics of the decoupled Hermitian systems and grid-level verification.

The Hermitian image h(t) = h_{x,-} + h_{y,+} splits into two Swanson-type
oscillators with time-dependent mass M_pm, frequency omega_pm and a
{z, p_z} coupling g.  Each admits exact eigenfunctions built from a
solution rho_pm of the dissipative Ermakov-Pinney equation

    rho'' + (M'/M) rho' + (omega^2 -+ 2 g' - 4 g^2 -+ 2 g M'/M) rho
        = 1 / (M^2 rho^3).

This module integrates that equation along a coefficient trajectory,
assembles the eigenfunctions and their accumulated phase, measures TDSE
residuals on position grids, and realizes the Dyson map and metric as
sparse flows on grid states so the physical inner product
<psi| rho |psi> can be checked directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .algebra import FlowFactor, GeneratorId
from .dynamic_map import HermitianOscParams, HermitianRates, Trajectory
from .errors import (
    BoundaryContamination,
    ConvergenceFailure,
    NonPositiveRho,
    StepFailure,
)

__all__ = [
    "ErmakovState",
    "Grid1D",
    "GridState2D",
    "WaveSpec",
    "component_params",
    "effective_frequency_sq",
    "ermakov_rhs",
    "fixed_point_state",
    "ErmakovSeries",
    "integrate_ermakov",
    "ermakov_residuals",
    "phase",
    "hermite",
    "eigenfunction",
    "ComponentEvolution",
    "evolve_component",
    "tdse_residual_1d",
    "tdse_residual",
    "apply_flow_grid",
    "apply_flow_chain",
    "quasi_norm",
    "grid_norm_sq",
]

# Roundoff amplified by e^{|f| sigma_max} must stay well below grid tolerances.
_FLOW_TRUST_CAP = 26.0


@dataclass(frozen=True)
class ErmakovState:
    """Ermakov-Pinney variables for one component (+1 -> y, -1 -> x)."""

    rho: float
    rho_dot: float
    component: int

    def __post_init__(self):
        if self.component not in (+1, -1):
            raise ValueError("component tag must be +1 or -1")
        if self.rho <= 0:
            raise NonPositiveRho(f"rho = {self.rho:g} must be positive")


@dataclass(frozen=True)
class Grid1D:
    z_min: float
    z_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("need at least 16 grid points")
        if not self.z_max > self.z_min:
            raise ValueError("empty grid interval")

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n)

    @property
    def spacing(self) -> float:
        return (self.z_max - self.z_min) / (self.n - 1)


@dataclass
class GridState2D:
    """Complex amplitude over the tensor grid; axis 0 is x, axis 1 is y."""

    values: np.ndarray
    grid_x: Grid1D
    grid_y: Grid1D

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid_x.n, self.grid_y.n):
            raise ValueError("value shape does not match the grids")
        self.values = v


@dataclass(frozen=True)
class WaveSpec:
    """Quantum number, component tag and accumulated phase of one factor."""

    n: int
    component: int
    alpha: float = 0.0

    def __post_init__(self):
        if self.n < 0 or self.n > 20:
            raise ValueError("quantum number limited to 0..20 (recurrence range)")
        if self.component not in (+1, -1):
            raise ValueError("component tag must be +1 or -1")


def component_params(
    hp: HermitianOscParams, rates: HermitianRates | None, component: int
) -> tuple[float, float, float, float, float]:
    """(M, omega^2, g, M', g') of the requested component; x carries -1."""
    if component == +1:
        m, w2 = hp.M_plus, hp.omega_plus_sq
        mdot = rates.M_plus_dot if rates else 0.0
    else:
        m, w2 = hp.M_minus, hp.omega_minus_sq
        mdot = rates.M_minus_dot if rates else 0.0
    gdot = rates.g_dot if rates else 0.0
    return m, w2, hp.g, mdot, gdot


def effective_frequency_sq(
    hp: HermitianOscParams, rates: HermitianRates, component: int
) -> float:
    """omega^2 -+ 2 g' - 4 g^2 -+ 2 g M'/M with the sign tied to the component."""
    m, w2, g, mdot, gdot = component_params(hp, rates, component)
    s = float(component)
    return w2 - s * (2.0 * gdot + 2.0 * g * mdot / m) - 4.0 * g**2


def ermakov_rhs(
    state: ErmakovState, hp: HermitianOscParams, rates: HermitianRates
) -> tuple[float, float]:
    """(rho', rho'') of the dissipative Ermakov-Pinney equation."""
    m, _, _, mdot, _ = component_params(hp, rates, state.component)
    if m == 0.0:
        raise ZeroDivisionError("oscillator mass vanished")
    if state.rho <= 0:
        raise NonPositiveRho(f"rho = {state.rho:g}")
    w_eff_sq = effective_frequency_sq(hp, rates, state.component)
    rho_ddot = (
        -(mdot / m) * state.rho_dot
        - w_eff_sq * state.rho
        + 1.0 / (m**2 * state.rho**3)
    )
    return state.rho_dot, float(rho_ddot)


def fixed_point_state(
    hp: HermitianOscParams, rates: HermitianRates, component: int
) -> ErmakovState:
    """Instantaneous Ermakov fixed point rho = (M omega_eff)^{-1/2}, rho' = 0."""
    m, *_ = component_params(hp, rates, component)
    w_eff_sq = effective_frequency_sq(hp, rates, component)
    if w_eff_sq <= 0 or m <= 0:
        raise NonPositiveRho(
            f"no positive fixed point: M = {m:g}, omega_eff^2 = {w_eff_sq:g}"
        )
    return ErmakovState(
        rho=float((m * np.sqrt(w_eff_sq)) ** -0.5), rho_dot=0.0, component=component
    )


@dataclass
class ErmakovSeries:
    """Dense Ermakov solution for one component along a trajectory."""

    component: int
    times: np.ndarray
    rho: np.ndarray
    rho_dot: np.ndarray
    _dense: object = field(default=None, repr=False)

    def at(self, t: float) -> ErmakovState:
        y = self._dense(t)
        if y[0] <= 0:
            raise NonPositiveRho(f"rho({t:g}) = {y[0]:g}")
        return ErmakovState(
            rho=float(y[0]), rho_dot=float(y[1]), component=self.component
        )


def integrate_ermakov(
    initial: ErmakovState,
    hermitian_at,
    window: tuple[float, float],
    tol: float = 1e-11,
    n_samples: int = 201,
) -> ErmakovSeries:
    """Integrate the Ermakov-Pinney equation over the window.

    ``hermitian_at(t)`` must return (HermitianOscParams, HermitianRates),
    e.g. ``Trajectory.hermitian_at``.  Positivity of rho is enforced at
    every sample.
    """
    comp = initial.component

    def rhs(t, y):
        hp, rates = hermitian_at(t)
        st = ErmakovState(rho=max(y[0], 1e-12), rho_dot=y[1], component=comp)
        return ermakov_rhs(st, hp, rates)

    sol = solve_ivp(
        rhs,
        window,
        [initial.rho, initial.rho_dot],
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not sol.success:
        raise StepFailure(f"Ermakov integration failed: {sol.message}")
    ts = np.linspace(window[0], window[1], n_samples)
    vals = sol.sol(ts)
    if np.min(vals[0]) <= 0:
        raise NonPositiveRho("rho crossed zero during integration")
    return ErmakovSeries(
        component=comp, times=ts, rho=vals[0], rho_dot=vals[1], _dense=sol.sol
    )


def ermakov_residuals(
    series: ErmakovSeries, hermitian_at, stencil: float = 4e-3
) -> np.ndarray:
    """|rho''_numeric - rhs| at the series samples.

    rho'' is estimated by a fourth-order five-point stencil applied to the
    dense rho' output, which is independent of the right-hand side being
    verified.
    """
    out = []
    h = stencil
    for t in series.times:
        offs = np.array([-2, -1, 1, 2]) * h
        vals = np.array([series._dense(t + o)[1] for o in offs])
        dd = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
        hp, rates = hermitian_at(t)
        _, rhs_dd = ermakov_rhs(series.at(t), hp, rates)
        out.append(abs(dd - rhs_dd))
    return np.asarray(out)


def phase(
    spec: WaveSpec,
    m_of_t,
    rho_of_t,
    t: float,
    t0: float = 0.0,
    n_steps: int = 512,
) -> float:
    """alpha_{n,pm}(t) = -(n + 1/2) * integral_{t0}^{t} ds / (M(s) rho(s)^2).

    Composite Simpson quadrature over the dense-output callables.
    """
    if t == t0:
        return 0.0
    n = n_steps + (n_steps % 2)  # Simpson needs an even interval count
    ts = np.linspace(t0, t, n + 1)
    f = np.array([1.0 / (m_of_t(s) * rho_of_t(s) ** 2) for s in ts])
    h = (t - t0) / n
    integral = h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())
    return float(-(spec.n + 0.5) * integral)


def hermite(n: int, x: np.ndarray) -> np.ndarray:
    """Physicists' Hermite polynomial by upward three-term recurrence."""
    x = np.asarray(x)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = 2.0 * x
    for k in range(1, n):
        h, h_prev = 2.0 * x * h - 2.0 * k * h_prev, h
    return h


def eigenfunction(
    spec: WaveSpec,
    es: ErmakovState,
    hp: HermitianOscParams,
    z: np.ndarray,
) -> np.ndarray:
    """Exact oscillator eigenfunction of h_{z,pm} at one instant.

    phi = e^{i alpha} / sqrt(rho)
          * exp[ i M (i/(M rho^2) + rho'/rho -+ 2 g) z^2 / 2 ]
          * H_n(z / rho),
    normalized so the z-integral of |phi|^2 is one for every t.
    """
    if es.component != spec.component:
        raise ValueError("state and spec component tags differ")
    m, _, g, _, _ = component_params(hp, None, spec.component)
    rho = es.rho
    s = float(spec.component)
    exponent = (
        1j
        * m
        * (1j / (m * rho**2) + es.rho_dot / rho - s * 2.0 * g)
        * np.asarray(z) ** 2
        / 2.0
    )
    norm = 1.0 / np.sqrt(np.sqrt(np.pi) * 2.0**spec.n * math.factorial(spec.n))
    return (
        norm
        * np.exp(1j * spec.alpha)
        / np.sqrt(rho)
        * np.exp(exponent)
        * hermite(spec.n, np.asarray(z) / rho)
    )


@dataclass
class ComponentEvolution:
    """One decoupled oscillator followed along a coefficient trajectory."""

    trajectory: Trajectory
    spec: WaveSpec
    ermakov: ErmakovSeries
    _alpha_dense: object = field(default=None, repr=False)

    def state_at(self, t: float) -> tuple[ErmakovState, HermitianOscParams, float]:
        hp, _ = self.trajectory.hermitian_at(t)
        es = ErmakovState(
            rho=float(self._alpha_dense(t)[0]),
            rho_dot=float(self._alpha_dense(t)[1]),
            component=self.spec.component,
        )
        return es, hp, float(self._alpha_dense(t)[2])

    def wavefunction(self, t: float, z: np.ndarray) -> np.ndarray:
        es, hp, alpha = self.state_at(t)
        return eigenfunction(replace(self.spec, alpha=alpha), es, hp, z)


def evolve_component(
    traj: Trajectory,
    spec: WaveSpec,
    tol: float = 1e-11,
    initial: ErmakovState | None = None,
) -> ComponentEvolution:
    """Integrate Ermakov variables and phase jointly over a trajectory.

    The default initial condition is the instantaneous fixed point at the
    window start (smoothest available start).
    """
    window = (float(traj.times[0]), float(traj.times[-1]))
    comp = spec.component
    if initial is None:
        hp0, rates0 = traj.hermitian_at(window[0])
        initial = fixed_point_state(hp0, rates0, comp)

    def rhs(t, y):
        hp, rates = traj.hermitian_at(t)
        st = ErmakovState(rho=max(y[0], 1e-12), rho_dot=y[1], component=comp)
        d_rho, dd_rho = ermakov_rhs(st, hp, rates)
        m, *_ = component_params(hp, rates, comp)
        d_alpha = -(spec.n + 0.5) / (m * y[0] ** 2)
        return [d_rho, dd_rho, d_alpha]

    sol = solve_ivp(
        rhs,
        window,
        [initial.rho, initial.rho_dot, spec.alpha],
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not sol.success:
        raise StepFailure(f"component evolution failed: {sol.message}")
    ts = traj.times
    vals = sol.sol(ts)
    if np.min(vals[0]) <= 0:
        raise NonPositiveRho("rho crossed zero during evolution")
    series = ErmakovSeries(
        component=comp, times=ts, rho=vals[0], rho_dot=vals[1], _dense=sol.sol
    )
    return ComponentEvolution(
        trajectory=traj, spec=spec, ermakov=series, _alpha_dense=sol.sol
    )


# ---------------------------------------------------------------------------
# Grid operators.
# ---------------------------------------------------------------------------


def _check_boundary(values: np.ndarray, tol: float) -> None:
    peak = np.max(np.abs(values))
    if peak == 0:
        return
    edge = max(
        np.max(np.abs(values[0, :])),
        np.max(np.abs(values[-1, :])),
        np.max(np.abs(values[:, 0])),
        np.max(np.abs(values[:, -1])),
    )
    if edge > tol * peak:
        raise BoundaryContamination(
            f"boundary amplitude {edge:.2e} exceeds {tol:.0e} of peak {peak:.2e}"
        )


def _d1(grid: Grid1D) -> sparse.csr_matrix:
    """Central first-derivative stencil (antisymmetric, zero past the edge)."""
    n, h = grid.n, grid.spacing
    return sparse.diags([-1.0, 1.0], [-1, 1], shape=(n, n), format="csr") / (2.0 * h)


def _d2(grid: Grid1D) -> sparse.csr_matrix:
    n, h = grid.n, grid.spacing
    return (
        sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n), format="csr") / h**2
    )


def _generator_matrix(gid: GeneratorId, gx: Grid1D, gy: Grid1D) -> sparse.csr_matrix:
    """Sparse grid realization of an interaction generator."""
    x = sparse.diags(gx.points)
    y = sparse.diags(gy.points)
    ix = sparse.identity(gx.n, format="csr")
    iy = sparse.identity(gy.n, format="csr")
    px = -1j * _d1(gx)
    py = -1j * _d1(gy)
    if gid is GeneratorId.Lp:
        return 0.5 * sparse.kron(x, y, format="csr")
    if gid is GeneratorId.Lm:
        return 0.5 * sparse.kron(px, py, format="csr")
    if gid is GeneratorId.Jp:
        return 0.5 * (
            sparse.kron(x, py, format="csr") + sparse.kron(px, y, format="csr")
        )
    if gid is GeneratorId.Jm:
        return 0.5 * (
            sparse.kron(x, py, format="csr") - sparse.kron(px, y, format="csr")
        )
    raise ValueError(f"no grid realization for {gid}")


def _trust_bound(gid: GeneratorId, gx: Grid1D, gy: Grid1D) -> float:
    """Spectral-radius estimate of the discretized generator."""
    xm = max(abs(gx.z_min), abs(gx.z_max))
    ym = max(abs(gy.z_min), abs(gy.z_max))
    if gid is GeneratorId.Lp:
        return 0.5 * xm * ym
    if gid is GeneratorId.Lm:
        return 0.5 / (gx.spacing * gy.spacing)
    return 0.5 * (xm / gy.spacing + ym / gx.spacing)


def apply_flow_grid(
    factor: FlowFactor, state: GridState2D, boundary_tol: float = 1e-8
) -> GridState2D:
    """Apply e^{f G} to a grid state (matrix exponential times vector).

    The L_+ flow is diagonal in position and applied exactly; the others go
    through sparse stencils and ``expm_multiply``.  Rejects applications
    whose worst-case roundoff amplification e^{|f| sigma_max} would poison
    the result.  ``boundary_tol`` bounds the admissible relative amplitude
    at the domain edge; chains over wide intermediate states may need a
    looser guard than the default (edge amplitudes of 1e-5 contribute below
    1e-9 to inner products).
    """
    _check_boundary(state.values, boundary_tol)
    gx, gy = state.grid_x, state.grid_y
    f = factor.coefficient
    if f == 0.0:
        return GridState2D(state.values.copy(), gx, gy)
    amplification = abs(f) * _trust_bound(factor.generator, gx, gy)
    if factor.generator is GeneratorId.Lp:
        if amplification > _FLOW_TRUST_CAP:
            raise ConvergenceFailure(
                f"|f| * max|xy|/2 = {amplification:.1f} exceeds the trust cap "
                f"{_FLOW_TRUST_CAP:g} for the diagonal flow"
            )
        xy = np.outer(gx.points, gy.points)
        return GridState2D(state.values * np.exp(0.5 * f * xy), gx, gy)
    if amplification > _FLOW_TRUST_CAP:
        raise ConvergenceFailure(
            f"|f| * sigma_max = {amplification:.1f} exceeds the trust cap "
            f"{_FLOW_TRUST_CAP:g} for {factor.generator}"
        )
    gen = _generator_matrix(factor.generator, gx, gy)
    vec = expm_multiply(f * gen, state.values.ravel())
    return GridState2D(vec.reshape(gx.n, gy.n), gx, gy)


def apply_flow_chain(
    factors: list[FlowFactor], state: GridState2D, boundary_tol: float = 1e-8
) -> GridState2D:
    """Apply an ordered operator product to a state (rightmost factor first)."""
    out = state
    for factor in reversed(factors):
        out = apply_flow_grid(factor, out, boundary_tol)
    return out


def grid_norm_sq(state: GridState2D) -> float:
    w = state.grid_x.spacing * state.grid_y.spacing
    return float(np.sum(np.abs(state.values) ** 2) * w)


def quasi_norm(
    state: GridState2D, factors: list[FlowFactor], boundary_tol: float = 1e-8
) -> float:
    """<psi| rho |psi> with rho given as an ordered factor chain.

    Real within roundoff for a Hermitian positive chain; the imaginary
    remainder is checked and discarded.
    """
    rho_psi = apply_flow_chain(factors, state, boundary_tol)
    w = state.grid_x.spacing * state.grid_y.spacing
    val = complex(np.sum(np.conj(state.values) * rho_psi.values) * w)
    if abs(val) > 0 and abs(val.imag) > 1e-8 * abs(val):
        raise ConvergenceFailure(
            f"quasi-norm came out non-real: {val:.3e} (metric chain not Hermitian?)"
        )
    return float(val.real)


# ---------------------------------------------------------------------------
# TDSE residuals.
# ---------------------------------------------------------------------------


def _apply_h_1d(
    values: np.ndarray, grid: Grid1D, m: float, w2: float, g: float, s: float
) -> np.ndarray:
    """h_{z,pm} on a 1D amplitude: p^2/2M + M w^2 z^2/2 + s g {z,p}."""
    z = grid.points
    kinetic = -(_d2(grid) @ values) / (2.0 * m)
    potential = 0.5 * m * w2 * z**2 * values
    anticomm = -1j * (2.0 * z * (_d1(grid) @ values) + values)
    return kinetic + potential + s * g * anticomm


def tdse_residual_1d(
    prev: np.ndarray,
    mid: np.ndarray,
    nxt: np.ndarray,
    grid: Grid1D,
    hp: HermitianOscParams,
    component: int,
    dt: float,
) -> float:
    """Relative norm of i d_t phi - h phi for one component, with central
    time differences and second-order spatial stencils."""
    m, w2, g, _, _ = component_params(hp, None, component)
    dtphi = (nxt - prev) / (2.0 * dt)
    res = 1j * dtphi - _apply_h_1d(mid, grid, m, w2, g, float(component))
    return float(np.linalg.norm(res) / np.linalg.norm(mid))


def tdse_residual(
    prev: GridState2D,
    mid: GridState2D,
    nxt: GridState2D,
    hp: HermitianOscParams,
    dt: float,
) -> float:
    """Relative norm of i d_t phi - h phi for a 2D state under
    h = h_{x,-} + h_{y,+}."""
    for st in (prev, mid, nxt):
        _check_boundary(st.values, 1e-8)
    gx, gy = mid.grid_x, mid.grid_y
    dtphi = (nxt.values - prev.values) / (2.0 * dt)
    hx = np.empty_like(mid.values)
    for j in range(gy.n):
        hx[:, j] = _apply_h_1d(
            mid.values[:, j], gx, hp.M_minus, hp.omega_minus_sq, hp.g, -1.0
        )
    hy = np.empty_like(mid.values)
    for i in range(gx.n):
        hy[i, :] = _apply_h_1d(
            mid.values[i, :], gy, hp.M_plus, hp.omega_plus_sq, hp.g, +1.0
        )
    res = 1j * dtphi - hx - hy
    return float(np.linalg.norm(res) / np.linalg.norm(mid.values))
