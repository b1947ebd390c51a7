"""Time-independent Dyson map eta = e^{theta J_-} and its Hermitian image.

Two theta conventions coexist for this model.  Writing the similarity
condition directly in terms of the J_- = (x p_y - y p_x)/2 generator used
everywhere in this package, the Hermiticity fixed point sits at

    tanh(theta_flow) = 2 lambda / (m Omega_-^2),

while the classic closed-form frequency expressions

    omega_x^2 = (Omega_x^2 cosh^2 theta + Omega_y^2 sinh^2 theta)/cosh 2theta
    omega_y^2 = (Omega_x^2 sinh^2 theta + Omega_y^2 cosh^2 theta)/cosh 2theta

are written for the half parameter theta = theta_flow / 2, i.e. for
tanh(2 theta) = 2 lambda / (m Omega_-^2).  :class:`StaticSolution` carries
both: ``theta`` satisfies the tanh-2theta condition and feeds the frequency
formulas; ``flow_coefficient = 2 theta`` is what must multiply J_- for the
transform to be Hermitian.  The time-dependent system's fixed point
coincides with ``flow_coefficient``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import FlowFactor, GeneratorId, QuadraticOperator, adjoint_apply
from .errors import NotInUnbrokenRegime
from .model import ModelParams, build_hamiltonian

__all__ = ["StaticSolution", "solve_static", "static_hermitian"]


@dataclass(frozen=True)
class StaticSolution:
    """Solved static map; tanh(2 theta) = 2 lambda / (m Omega_-^2)."""

    theta: float
    omega_x_sq: float
    omega_y_sq: float
    mass: float

    @property
    def flow_coefficient(self) -> float:
        """Coefficient of J_- in eta; equals 2 theta."""
        return 2.0 * self.theta


def solve_static(params: ModelParams) -> StaticSolution:
    """Closed-form static solution, valid strictly inside the unbroken regime.

    The frequencies returned are those of the decoupled harmonic image; the
    x label follows the cosh/sinh formulas (it tracks the bare Omega_x as
    lambda -> 0) and as a set they equal the model eigenfrequencies squared.

    Raises NotInUnbrokenRegime when |m Omega_-^2| <= 2 |lambda|, where the
    argument of artanh leaves (-1, 1) and no static metric exists.
    """
    m = params.m
    ratio_den = m * params.omega_minus_sq
    if abs(ratio_den) <= 2.0 * abs(params.lam):
        raise NotInUnbrokenRegime(
            f"|m Omega_-^2| = {abs(ratio_den):g} must exceed "
            f"2|lambda| = {2 * abs(params.lam):g}"
        )
    ratio = 2.0 * params.lam / ratio_den
    theta = 0.5 * np.arctanh(ratio)
    ch2, sh2 = np.cosh(2 * theta), np.sinh(2 * theta)
    ch_sq, sh_sq = (1 + ch2) / 2.0, (ch2 - 1) / 2.0
    wx_sq = (params.omega_x**2 * ch_sq + params.omega_y**2 * sh_sq) / ch2
    wy_sq = (params.omega_x**2 * sh_sq + params.omega_y**2 * ch_sq) / ch2
    return StaticSolution(
        theta=float(theta),
        omega_x_sq=float(wx_sq),
        omega_y_sq=float(wy_sq),
        mass=m,
    )


def static_hermitian(params: ModelParams, theta: float) -> QuadraticOperator:
    """Similarity transform e^{theta J_-} H e^{-theta J_-}.

    ``theta`` here is the raw flow coefficient.  The result is Hermitian
    exactly when theta equals ``StaticSolution.flow_coefficient``; any other
    value leaves an anti-Hermitian x-y residual.
    """
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    h = build_hamiltonian(params)
    return adjoint_apply(FlowFactor(GeneratorId.Jm, theta), h)
