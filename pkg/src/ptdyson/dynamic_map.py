"""Time-dependent Dyson map for the coupled oscillator.

The map ansatz is the ordered product of four non-unitary flows over the
interaction generators,

    eta(t) = e^{alpha_-(t) L_-} e^{theta_+(t) J_+}
             e^{alpha_+(t) L_+} e^{theta_-(t) J_-},

with real coefficients.  Demanding that

    h(t) = eta H eta^{-1} + i (d_t eta) eta^{-1}

be Hermitian fixes the four coefficient rates; this module carries the
closed-form rate system, the decoupled fourth-order equation for alpha_-
and its per-regime solutions, the recovery of the remaining coefficients
from the alpha_- jet, the Hermitian-oscillator parameters of h(t), and the
positive metric rho = eta^dagger eta.

Ground truth throughout is the Hermiticity of the evaluated h(t): the rate
system can be re-derived at any chart point by a least-squares solve of the
anti-Hermitian part (:func:`rates_from_hermiticity`), and the shipped
closed form is tested against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import algebra
from .algebra import FlowFactor, GeneratorId, QuadraticOperator
from .errors import (
    AlphaMinusZero,
    ExceptionalDenominator,
    LogDomain,
    PtdysonError,
    RegimeMismatch,
    SingularConfiguration,
    StepFailure,
    ThetaPlusDomain,
)
from .model import ModelParams, RegimeKind, build_hamiltonian, classify

__all__ = [
    "MapCoefficients",
    "AlphaJet",
    "IntegrationConstants",
    "RecoveryIntermediates",
    "HermitianOscParams",
    "HermitianRates",
    "Trajectory",
    "dyson_factors",
    "metric_factors",
    "ode_rhs",
    "rates_from_hermiticity",
    "evaluate_tdde",
    "tdde_residual",
    "jet_from_coefficients",
    "alpha_closed_form",
    "closed_form_fourth_derivative",
    "regime_frequencies",
    "recover",
    "recovery_intermediates",
    "select_branches",
    "constants_from_jet",
    "validate_constants",
    "static_fixed_point",
    "hermitian_params",
    "hermitian_params_with_rates",
    "hermitian_operator",
    "integrate",
    "fock_dyson",
    "fock_metric",
]

_CHART_TOL = 1e-9


@dataclass(frozen=True)
class MapCoefficients:
    """Map coefficients (alpha_-, theta_+, alpha_+, theta_-) at time t."""

    t: float
    alpha_minus: float
    theta_plus: float
    alpha_plus: float
    theta_minus: float

    def __post_init__(self):
        vals = (self.alpha_minus, self.theta_plus, self.alpha_plus, self.theta_minus)
        if not all(np.isfinite(v) for v in (self.t, *vals)):
            raise ValueError("coefficients must be finite reals")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.alpha_minus, self.theta_plus, self.alpha_plus, self.theta_minus]
        )


@dataclass(frozen=True)
class AlphaJet:
    """alpha_- and its first three time derivatives at time t."""

    t: float
    a0: float
    a1: float
    a2: float
    a3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3])


@dataclass(frozen=True)
class IntegrationConstants:
    """Four constants of the fourth-order alpha_- equation, tagged by regime."""

    kind: RegimeKind
    values: tuple[float, float, float, float]


@dataclass(frozen=True)
class RecoveryIntermediates:
    beta: float
    gamma: float
    s1: int
    s2: int


@dataclass(frozen=True)
class HermitianOscParams:
    """Parameters of h = h_{x,-} + h_{y,+} with
    h_{z,pm} = p_z^2/(2 M_pm) + M_pm omega_pm^2 z^2 / 2 pm g {z, p_z}."""

    M_plus: float
    M_minus: float
    omega_plus_sq: float
    omega_minus_sq: float
    g: float
    Theta: float
    Gamma_plus: float
    Gamma_minus: float


@dataclass(frozen=True)
class HermitianRates:
    """Time derivatives of the oscillator parameters along a trajectory."""

    M_plus_dot: float
    M_minus_dot: float
    g_dot: float


def dyson_factors(c: MapCoefficients) -> list[FlowFactor]:
    """Ordered flow factors of eta(t), left to right."""
    return [
        FlowFactor(GeneratorId.Lm, c.alpha_minus),
        FlowFactor(GeneratorId.Jp, c.theta_plus),
        FlowFactor(GeneratorId.Lp, c.alpha_plus),
        FlowFactor(GeneratorId.Jm, c.theta_minus),
    ]


def metric_factors(c: MapCoefficients) -> list[FlowFactor]:
    """Ordered factors of rho = eta^dagger eta; Hermitian positive by
    construction for real coefficients."""
    return [
        FlowFactor(GeneratorId.Jm, c.theta_minus),
        FlowFactor(GeneratorId.Lp, c.alpha_plus),
        FlowFactor(GeneratorId.Jp, c.theta_plus),
        FlowFactor(GeneratorId.Lm, 2.0 * c.alpha_minus),
        FlowFactor(GeneratorId.Jp, c.theta_plus),
        FlowFactor(GeneratorId.Lp, c.alpha_plus),
        FlowFactor(GeneratorId.Jm, c.theta_minus),
    ]


def _chart_guards(c: MapCoefficients) -> tuple[float, float]:
    cos_tp = np.cos(c.theta_plus)
    w = 2.0 * cos_tp + c.alpha_plus * c.alpha_minus
    if abs(cos_tp) < _CHART_TOL:
        raise SingularConfiguration("cos(theta_plus) vanished")
    if abs(w) < _CHART_TOL:
        raise SingularConfiguration(
            "2 cos(theta_plus) + alpha_plus alpha_minus vanished"
        )
    return float(cos_tp), float(w)


def ode_rhs(c: MapCoefficients, p: ModelParams) -> tuple[float, float, float, float]:
    """Rates (alpha_-', theta_+', alpha_+', theta_-') that keep h(t) Hermitian.

    Validated against :func:`rates_from_hermiticity` (the mechanical solve of
    the anti-Hermitian part of the evaluated h) over all three regimes.
    """
    cos_tp, w = _chart_guards(c)
    m = p.m
    sin_tp = np.sin(c.theta_plus)
    sh, ch = np.sinh(c.theta_minus), np.cosh(c.theta_minus)
    pterm = 2.0 * m**2 * p.omega_plus_sq - c.alpha_plus**2
    q = m * p.omega_minus_sq * sh - 2.0 * p.lam * ch
    d_alpha_m = -2.0 / m * sin_tp
    d_theta_p = c.alpha_minus * pterm / (4.0 * m * cos_tp) - c.alpha_plus / m
    d_alpha_p = pterm * sin_tp / (2.0 * m * cos_tp) + q
    d_theta_m = c.alpha_minus * (2.0 * p.lam * sh - m * p.omega_minus_sq * ch) / w
    return (float(d_alpha_m), float(d_theta_p), float(d_alpha_p), float(d_theta_m))


def jet_from_coefficients(c: MapCoefficients, p: ModelParams) -> AlphaJet:
    """alpha_- jet implied by a chart point, via the validated rate system
    differentiated in closed form."""
    cos_tp, w = _chart_guards(c)
    m = p.m
    sin_tp = np.sin(c.theta_plus)
    sh, ch = np.sinh(c.theta_minus), np.cosh(c.theta_minus)
    q = m * p.omega_minus_sq * sh - 2.0 * p.lam * ch
    a0 = c.alpha_minus
    a1 = -2.0 / m * sin_tp
    a2 = (
        c.alpha_plus * (4.0 * cos_tp + c.alpha_plus * c.alpha_minus) / (2.0 * m**2)
        - p.omega_plus_sq * c.alpha_minus
    )
    a3 = q * w / m**2 + 4.0 * p.omega_plus_sq * sin_tp / m
    return AlphaJet(t=c.t, a0=float(a0), a1=float(a1), a2=float(a2), a3=float(a3))


# ---------------------------------------------------------------------------
# TDDE evaluation through the algebra engine (ground truth).
# ---------------------------------------------------------------------------


def evaluate_tdde(
    c: MapCoefficients,
    rates: tuple[float, float, float, float],
    p: ModelParams,
) -> QuadraticOperator:
    """eta H eta^{-1} + i (d_t eta) eta^{-1} as a quadratic operator."""
    _chart_guards(c)
    factors = dyson_factors(c)
    h = build_hamiltonian(p)
    s = np.eye(4, dtype=complex)
    for factor in factors:
        s = s @ algebra.flow_matrix(factor)
    conjugated = QuadraticOperator(s @ h.coeff @ s.T)
    return conjugated + algebra.gauge_term(factors, list(rates))


def tdde_residual(
    c: MapCoefficients,
    rates: tuple[float, float, float, float],
    p: ModelParams,
) -> float:
    """Relative anti-Hermitian residual ||Im C_h|| / ||Re C_h|| of h(t)."""
    h = evaluate_tdde(c, rates, p)
    return float(
        np.linalg.norm(h.coeff.imag, 2) / max(np.linalg.norm(h.coeff.real, 2), 1e-300)
    )


def rates_from_hermiticity(
    c: MapCoefficients, p: ModelParams
) -> tuple[np.ndarray, float]:
    """Solve for the rates that null the anti-Hermitian part of h(t).

    The gauge term is linear in the rates, so Im C_h = Im A + sum_k r_k Re M_k
    is a linear system; returns (rates, least-squares residual).  A residual
    at roundoff scale certifies that the four-flow ansatz can absorb the
    anti-Hermitian part at this chart point.
    """
    _chart_guards(c)
    factors = dyson_factors(c)
    h = build_hamiltonian(p)
    s = np.eye(4, dtype=complex)
    basis = []
    for factor in factors:
        g = algebra.generator(factor.generator).coeff
        basis.append(1j * (s @ g @ s.T))
        s = s @ algebra.flow_matrix(factor)
    a = s @ h.coeff @ s.T

    iu = np.triu_indices(4)
    mat = np.stack([b.imag[iu] for b in basis], axis=1)
    rhs = -a.imag[iu]
    rates, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    residual = float(np.linalg.norm(mat @ rates - rhs))
    return rates, residual


# ---------------------------------------------------------------------------
# Closed-form alpha_- solutions per regime.
# ---------------------------------------------------------------------------


def regime_frequencies(p: ModelParams) -> tuple[float, float]:
    """(Delta_+, Delta_-) for delta >= 0, (Delta~_+, Delta~_-) for delta < 0.

    Delta_pm = sqrt(Omega_+^2 pm 2 sqrt(Omega_x^2 Omega_y^2 + lambda^2/m^2));
    the tilde pair swaps the two terms so both stay real in the broken
    regime.  The inner square-root argument is always positive (asserted).
    """
    inner = p.omega_x**2 * p.omega_y**2 + p.lam**2 / p.m**2
    assert inner > 0.0, "inner square root argument must be positive"
    root = 2.0 * np.sqrt(inner)
    if p.delta >= 0:
        return (
            float(np.sqrt(p.omega_plus_sq + root)),
            float(np.sqrt(max(p.omega_plus_sq - root, 0.0))),
        )
    return (
        float(np.sqrt(root + p.omega_plus_sq)),
        float(np.sqrt(root - p.omega_plus_sq)),
    )


def _basis_functions(kind: RegimeKind, p: ModelParams, t, order: int) -> np.ndarray:
    """Values of the four fundamental solutions and their derivatives up to
    ``order`` at time(s) t; shape (order+1, 4) or (order+1, 4, len(t))."""
    f_plus, f_minus = regime_frequencies(p)
    t = np.asarray(t, dtype=float)
    rows = []
    if kind is RegimeKind.UNBROKEN:
        for k in range(order + 1):
            rows.append(
                [
                    f_plus**k * np.cos(f_plus * t + k * np.pi / 2.0),
                    f_plus**k * np.sin(f_plus * t + k * np.pi / 2.0),
                    f_minus**k * np.cos(f_minus * t + k * np.pi / 2.0),
                    f_minus**k * np.sin(f_minus * t + k * np.pi / 2.0),
                ]
            )
    elif kind is RegimeKind.BROKEN:
        ch, sh = np.cosh(f_minus * t), np.sinh(f_minus * t)
        for k in range(order + 1):
            rows.append(
                [
                    f_plus**k * np.cos(f_plus * t + k * np.pi / 2.0),
                    f_plus**k * np.sin(f_plus * t + k * np.pi / 2.0),
                    f_minus**k * (ch if k % 2 == 0 else sh),
                    f_minus**k * (sh if k % 2 == 0 else ch),
                ]
            )
    else:  # exceptional: cos, sin at sqrt(2) Omega_+, then t and 1
        w = np.sqrt(2.0 * p.omega_plus_sq)
        for k in range(order + 1):
            if k == 0:
                tail = [t, np.ones_like(t)]
            elif k == 1:
                tail = [np.ones_like(t), np.zeros_like(t)]
            else:
                tail = [np.zeros_like(t), np.zeros_like(t)]
            rows.append(
                [
                    w**k * np.cos(w * t + k * np.pi / 2.0),
                    w**k * np.sin(w * t + k * np.pi / 2.0),
                    *tail,
                ]
            )
    return np.array(rows)


def alpha_closed_form(k: IntegrationConstants, p: ModelParams, t: float) -> AlphaJet:
    """Analytic alpha_- jet for the given constants; the jet satisfies the
    fourth-order equation identically."""
    regime = classify(p)
    if k.kind is not regime.kind:
        raise RegimeMismatch(
            f"constants are for {k.kind.value}, params classify as {regime.kind.value}"
        )
    b = _basis_functions(k.kind, p, t, order=3)
    vals = b @ np.asarray(k.values)
    return AlphaJet(
        t=float(t),
        a0=float(vals[0]),
        a1=float(vals[1]),
        a2=float(vals[2]),
        a3=float(vals[3]),
    )


def closed_form_fourth_derivative(
    k: IntegrationConstants, p: ModelParams, t: float
) -> float:
    b = _basis_functions(k.kind, p, t, order=4)
    return float(b[4] @ np.asarray(k.values))


def constants_from_jet(jet: AlphaJet, p: ModelParams) -> IntegrationConstants:
    """Fit the four integration constants matching a jet at its time."""
    regime = classify(p)
    b = _basis_functions(regime.kind, p, jet.t, order=3)
    vals = np.linalg.solve(b, jet.as_array())
    return IntegrationConstants(kind=regime.kind, values=tuple(float(v) for v in vals))


def validate_constants(
    k: IntegrationConstants,
    p: ModelParams,
    window: tuple[float, float],
    n_check: int = 1024,
) -> None:
    """Reject constants whose closed form violates |m alpha_-'| < 2 anywhere
    on the window (theta_plus would leave its real domain)."""
    ts = np.linspace(window[0], window[1], n_check)
    b = _basis_functions(k.kind, p, ts, order=1)
    a1 = np.tensordot(np.asarray(k.values), b[1], axes=(0, 0))
    worst = float(np.max(np.abs(p.m * a1)))
    if worst >= 2.0:
        raise ThetaPlusDomain(
            f"constants drive |m alpha_-'| to {worst:.3f} >= 2 on the window"
        )


# ---------------------------------------------------------------------------
# Coefficient recovery from the alpha_- jet.
# ---------------------------------------------------------------------------


def recovery_intermediates(
    jet: AlphaJet, p: ModelParams, branches: tuple[int, int]
) -> RecoveryIntermediates:
    m = p.m
    beta_sq = 4.0 + 2.0 * m**2 * p.omega_plus_sq * jet.a0**2 - m**2 * (
        jet.a1**2 - 2.0 * jet.a0 * jet.a2
    )
    if beta_sq < 0.0:
        raise LogDomain(f"beta radicand negative ({beta_sq:.3g}); jet not liftable")
    gamma = 2.0 * p.omega_plus_sq * jet.a1 + jet.a3
    return RecoveryIntermediates(
        beta=float(np.sqrt(beta_sq)),
        gamma=float(gamma),
        s1=int(branches[0]),
        s2=int(branches[1]),
    )


def recover(
    jet: AlphaJet, p: ModelParams, branches: tuple[int, int] = (1, 1)
) -> MapCoefficients:
    """Rebuild (alpha_-, theta_+, alpha_+, theta_-) from the alpha_- jet.

    branches = (s1, s2) select the sign of the beta term in alpha_+ and of
    the square root inside the theta_- logarithm.  On a real trajectory one
    pair reproduces the rate system; the others fail or violate it.
    """
    m = p.m
    if abs(m * jet.a1) > 2.0:
        raise ThetaPlusDomain(f"|m a1| = {abs(m * jet.a1):.3f} > 2")
    if jet.a0 == 0.0:
        raise AlphaMinusZero("alpha_- = 0 makes the alpha_+ formula singular")
    denom = m * p.omega_minus_sq - 2.0 * p.lam
    if abs(denom) < 1e-12 * max(1.0, abs(m * p.omega_minus_sq)):
        raise ExceptionalDenominator(
            "m Omega_-^2 = 2 lambda: integrate the rate system directly instead"
        )
    inter = recovery_intermediates(jet, p, branches)
    s1, s2 = inter.s1, inter.s2
    theta_p = -np.arcsin(m * jet.a1 / 2.0)
    cos_tp = np.sqrt(max(0.0, 4.0 - m**2 * jet.a1**2)) / 2.0
    alpha_p = (-2.0 * cos_tp + s1 * inter.beta) / jet.a0
    rad = m**2 * inter.gamma**2 + p.delta * inter.beta**2
    if rad < 0.0:
        raise LogDomain(f"theta_- radicand negative ({rad:.3g}); jet not liftable")
    arg = (s1 * m**2 * inter.gamma + s2 * m * np.sqrt(rad)) / (inter.beta * denom)
    if arg <= 0.0:
        raise LogDomain(f"theta_- log argument {arg:.3g} <= 0")
    theta_m = np.log(arg)
    return MapCoefficients(
        t=jet.t,
        alpha_minus=jet.a0,
        theta_plus=float(theta_p),
        alpha_plus=float(alpha_p),
        theta_minus=float(theta_m),
    )


def select_branches(
    k: IntegrationConstants,
    p: ModelParams,
    t0: float,
    h: float = 1e-5,
) -> tuple[int, int]:
    """Pick (s1, s2) at the trajectory start by minimizing the rate residual
    of the recovered coefficients; held fixed afterwards."""
    best = None
    best_pair = None
    for s1 in (1, -1):
        for s2 in (1, -1):
            try:
                c0 = recover(alpha_closed_form(k, p, t0), p, (s1, s2))
                cp = recover(alpha_closed_form(k, p, t0 + h), p, (s1, s2))
                cm = recover(alpha_closed_form(k, p, t0 - h), p, (s1, s2))
                rhs = np.asarray(ode_rhs(c0, p))
            except (PtdysonError, ValueError):
                continue
            fd = (cp.as_array() - cm.as_array()) / (2.0 * h)
            res = float(np.linalg.norm(fd - rhs))
            if best is None or res < best:
                best, best_pair = res, (s1, s2)
    if best_pair is None:
        raise LogDomain("no branch pair yields a real chart point at t0")
    return best_pair


def static_fixed_point(p: ModelParams, t: float = 0.0) -> MapCoefficients:
    """Stationary chart point (0, 0, 0, artanh(2 lambda / m Omega_-^2));
    exists only in the unbroken regime."""
    ratio_den = p.m * p.omega_minus_sq
    if abs(ratio_den) <= 2.0 * abs(p.lam):
        raise LogDomain("no real stationary theta_- outside the unbroken regime")
    theta_m = float(np.arctanh(2.0 * p.lam / ratio_den))
    return MapCoefficients(
        t=t, alpha_minus=0.0, theta_plus=0.0, alpha_plus=0.0, theta_minus=theta_m
    )


# ---------------------------------------------------------------------------
# Hermitian oscillator parameters of h(t).
# ---------------------------------------------------------------------------


def _hermitian_values(am, tp, ap, tm, p: ModelParams):
    """Scalar pipeline for (M+, M-, w+^2, w-^2, g, Theta, Gamma+, Gamma-).

    Holomorphic in the coefficients, so it also evaluates on complex inputs;
    complex-step differentiation rides on that.
    """
    m = p.m
    cos_tp, sin_tp = np.cos(tp), np.sin(tp)
    sh, ch = np.sinh(tm), np.cosh(tm)
    w = 2.0 * cos_tp + ap * am
    theta = (2.0 * p.lam * sh - m * p.omega_minus_sq * ch) / w
    pterm = 2.0 * m**2 * p.omega_plus_sq - ap**2
    gamma_p = pterm / (16.0 * m * cos_tp) + theta * cos_tp / 4.0
    gamma_m = pterm / (16.0 * m * cos_tp) - theta * cos_tp / 4.0
    m_plus = m / (cos_tp + m * am**2 * gamma_p)
    m_minus = m / (cos_tp + m * am**2 * gamma_m)
    w_plus_sq = 4.0 * gamma_m / m_plus
    w_minus_sq = 4.0 * gamma_p / m_minus
    g = am * theta * sin_tp / 4.0
    return m_plus, m_minus, w_plus_sq, w_minus_sq, g, theta, gamma_p, gamma_m


def hermitian_params(c: MapCoefficients, p: ModelParams) -> HermitianOscParams:
    """Mass, frequency and {z, p_z} coupling of the decoupled Hermitian h(t).

    Reassembling h from these values reproduces the Hermitian part of
    :func:`evaluate_tdde` entrywise (tested).  At theta_+ = alpha_pm = 0 and
    stationary theta_- this reduces to M_pm = m, g = 0 and the two model
    eigenfrequencies, omega_- carrying the x oscillator.
    """
    _chart_guards(c)
    vals = _hermitian_values(
        c.alpha_minus, c.theta_plus, c.alpha_plus, c.theta_minus, p
    )
    return HermitianOscParams(*(float(np.real(v)) for v in vals))


def hermitian_params_with_rates(
    c: MapCoefficients, p: ModelParams
) -> tuple[HermitianOscParams, HermitianRates]:
    """Parameters plus their exact time derivatives along the flow.

    The derivatives chain the rate system through the parameter formulas via
    a complex step, which is noise-free (no finite-difference cancellation).
    """
    hp = hermitian_params(c, p)
    rates = np.asarray(ode_rhs(c, p))
    h = 1e-100
    vals = _hermitian_values(
        c.alpha_minus + 1j * h * rates[0],
        c.theta_plus + 1j * h * rates[1],
        c.alpha_plus + 1j * h * rates[2],
        c.theta_minus + 1j * h * rates[3],
        p,
    )
    return hp, HermitianRates(
        M_plus_dot=float(np.imag(vals[0]) / h),
        M_minus_dot=float(np.imag(vals[1]) / h),
        g_dot=float(np.imag(vals[4]) / h),
    )


def hermitian_operator(hp: HermitianOscParams) -> QuadraticOperator:
    """Quadratic form of h = h_{x,-} + h_{y,+} built from oscillator params."""
    c = np.zeros((4, 4), dtype=complex)
    c[0, 0] = hp.M_minus * hp.omega_minus_sq
    c[2, 2] = 1.0 / hp.M_minus
    c[0, 2] = c[2, 0] = -2.0 * hp.g
    c[1, 1] = hp.M_plus * hp.omega_plus_sq
    c[3, 3] = 1.0 / hp.M_plus
    c[1, 3] = c[3, 1] = 2.0 * hp.g
    return QuadraticOperator(c)


# ---------------------------------------------------------------------------
# Trajectory integration.
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled coefficient trajectory with per-sample diagnostics."""

    params: ModelParams
    times: np.ndarray
    coefficients: list[MapCoefficients]
    jets: list[AlphaJet]
    hermitian: list[HermitianOscParams]
    antiherm_residual: np.ndarray
    constants: IntegrationConstants | None = None
    closed_form_mismatch: np.ndarray | None = None
    _dense: object = field(default=None, repr=False)

    def coefficients_at(self, t: float) -> MapCoefficients:
        y = self._dense(t)
        return MapCoefficients(
            t=float(t),
            alpha_minus=float(y[0]),
            theta_plus=float(y[1]),
            alpha_plus=float(y[2]),
            theta_minus=float(y[3]),
        )

    def hermitian_at(self, t: float) -> tuple[HermitianOscParams, HermitianRates]:
        return hermitian_params_with_rates(self.coefficients_at(t), self.params)


def integrate(
    initial: MapCoefficients,
    p: ModelParams,
    window: tuple[float, float],
    tol: float = 1e-10,
    n_samples: int = 201,
    constants: IntegrationConstants | None = None,
) -> Trajectory:
    """Adaptively integrate the rate system over the window.

    Every sample is checked against the TDDE anti-Hermitian residual
    (must stay below 10 * tol, floored at roundoff scale); a failure flags
    either chart breakdown or a defect in the rate system.  When constants
    are supplied, the sampled alpha_- is also compared against the closed
    form and the mismatch recorded.
    """
    _chart_guards(initial)
    if initial.t != window[0]:
        raise ValueError("initial.t must equal the window start")

    def rhs(t, y):
        c = MapCoefficients(
            t=t, alpha_minus=y[0], theta_plus=y[1], alpha_plus=y[2], theta_minus=y[3]
        )
        return ode_rhs(c, p)

    sol = solve_ivp(
        rhs,
        window,
        initial.as_array(),
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not sol.success:
        raise StepFailure(f"integration failed: {sol.message}")

    ts = np.linspace(window[0], window[1], n_samples)
    coeffs, jets, herm, resid, mismatch = [], [], [], [], []
    residual_cap = max(10.0 * tol, 1e-12)
    for t in ts:
        y = sol.sol(t)
        c = MapCoefficients(
            t=float(t),
            alpha_minus=float(y[0]),
            theta_plus=float(y[1]),
            alpha_plus=float(y[2]),
            theta_minus=float(y[3]),
        )
        rates = ode_rhs(c, p)
        r = tdde_residual(c, rates, p)
        if r > residual_cap:
            raise StepFailure(
                f"TDDE residual {r:.3e} exceeds {residual_cap:.3e} at t = {t:.6g}"
            )
        coeffs.append(c)
        jets.append(jet_from_coefficients(c, p))
        herm.append(hermitian_params(c, p))
        resid.append(r)
        if constants is not None:
            mismatch.append(abs(alpha_closed_form(constants, p, t).a0 - c.alpha_minus))
    return Trajectory(
        params=p,
        times=ts,
        coefficients=coeffs,
        jets=jets,
        hermitian=herm,
        antiherm_residual=np.asarray(resid),
        constants=constants,
        closed_form_mismatch=np.asarray(mismatch) if constants is not None else None,
        _dense=sol.sol,
    )


# ---------------------------------------------------------------------------
# Truncated-Fock realizations (oracles for metric positivity and
# quasi-Hermiticity).
# ---------------------------------------------------------------------------


def fock_dyson(c: MapCoefficients, n: int) -> np.ndarray:
    """Truncated-Fock matrix of eta(t)."""
    return algebra.fock_flow_product(dyson_factors(c), n)


def fock_metric(c: MapCoefficients, n: int) -> np.ndarray:
    """Truncated-Fock matrix of rho(t) = eta^dagger eta (the seven-factor
    product; equals fock_dyson(c).conj().T @ fock_dyson(c) up to roundoff)."""
    return algebra.fock_flow_product(metric_factors(c), n)
