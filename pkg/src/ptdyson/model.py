"""Physical parameters, Hamiltonian construction, spectrum and PT regimes."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import algebra
from .algebra import GeneratorId, QuadraticOperator, generator

__all__ = [
    "ModelParams",
    "RegimeKind",
    "Regime",
    "Spectrum",
    "build_hamiltonian",
    "eigenfrequencies",
    "energy",
    "classify",
    "fock_hamiltonian",
    "fock_low_eigenvalues",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of H = (p_x^2+p_y^2)/2m + m(Omega_x^2 x^2 + Omega_y^2 y^2)/2
    + i*lambda*x*y, with hbar = 1."""

    m: float
    omega_x: float
    omega_y: float
    lam: float

    def __post_init__(self):
        if not (self.m > 0 and self.omega_x > 0 and self.omega_y > 0):
            raise ValueError("m, omega_x, omega_y must all be positive")

    @property
    def omega_plus_sq(self) -> float:
        """Omega_+^2 = Omega_y^2 + Omega_x^2."""
        return self.omega_y**2 + self.omega_x**2

    @property
    def omega_minus_sq(self) -> float:
        """Omega_-^2 = Omega_y^2 - Omega_x^2."""
        return self.omega_y**2 - self.omega_x**2

    def lambda_z(self, axis: str, sign: int) -> float:
        """Lambda^z_pm = (1 pm m^2 Omega_z^2) / (2m), z in {x, y}."""
        om = {"x": self.omega_x, "y": self.omega_y}[axis]
        return (1.0 + sign * self.m**2 * om**2) / (2.0 * self.m)

    @property
    def delta(self) -> float:
        """delta = Omega_-^4 - 4 lambda^2 / m^2; its sign selects the regime."""
        return self.omega_minus_sq**2 - 4.0 * self.lam**2 / self.m**2


class RegimeKind(enum.Enum):
    UNBROKEN = "Unbroken"
    BROKEN = "Broken"
    EXCEPTIONAL = "Exceptional"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    delta: float


@dataclass(frozen=True)
class Spectrum:
    """Effective frequencies; complex conjugate squared pair in the broken
    regime, both real otherwise."""

    omega_x_eff: complex
    omega_y_eff: complex


def build_hamiltonian(params: ModelParams) -> QuadraticOperator:
    """Coefficient matrix of H; real except the x-y entry which carries
    i*lambda.  Identical to the algebraic form
    sum_{z,sigma} Lambda^z_sigma K^z_sigma + i*lambda*(I_+ + I_-)."""
    c = np.zeros((4, 4), dtype=complex)
    c[0, 0] = params.m * params.omega_x**2
    c[1, 1] = params.m * params.omega_y**2
    c[2, 2] = 1.0 / params.m
    c[3, 3] = 1.0 / params.m
    c[0, 1] = c[1, 0] = 1j * params.lam
    return QuadraticOperator(c)


def build_hamiltonian_algebraic(params: ModelParams) -> QuadraticOperator:
    """Same Hamiltonian assembled from the generator set (structural check)."""
    h = (
        params.lambda_z("x", +1) * generator(GeneratorId.KpX)
        + params.lambda_z("x", -1) * generator(GeneratorId.KmX)
        + params.lambda_z("y", +1) * generator(GeneratorId.KpY)
        + params.lambda_z("y", -1) * generator(GeneratorId.KmY)
    )
    coupling = (1j * params.lam) * (
        generator(GeneratorId.Ip) + generator(GeneratorId.Im)
    )
    return h + coupling


def eigenfrequencies(params: ModelParams) -> Spectrum:
    """omega_{x,y}^2 = (m Omega_+^2 pm sqrt(m^2 Omega_-^4 - 4 lambda^2)) / 2m.

    Principal complex square roots; by convention omega_x carries the +
    inner root (at lambda = 0 this picks the larger bare frequency).
    """
    m = params.m
    inner = complex(m**2 * params.omega_minus_sq**2 - 4.0 * params.lam**2)
    root = np.sqrt(inner)
    wx_sq = (m * params.omega_plus_sq + root) / (2.0 * m)
    wy_sq = (m * params.omega_plus_sq - root) / (2.0 * m)
    return Spectrum(omega_x_eff=np.sqrt(wx_sq), omega_y_eff=np.sqrt(wy_sq))


def energy(params: ModelParams, n1: int, n2: int) -> complex:
    """E_{n1,n2} = (n1 + 1/2) omega_x + (n2 + 1/2) omega_y."""
    if n1 < 0 or n2 < 0:
        raise ValueError("quantum numbers must be non-negative")
    s = eigenfrequencies(params)
    return (n1 + 0.5) * s.omega_x_eff + (n2 + 0.5) * s.omega_y_eff


def classify(params: ModelParams, tol: float | None = None) -> Regime:
    """PT regime from the sign of delta; |delta| <= tol maps to Exceptional."""
    if tol is None:
        tol = 1e-12 * max(1.0, params.omega_plus_sq**2)
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    d = params.delta
    if abs(d) <= tol:
        kind = RegimeKind.EXCEPTIONAL
    elif d > 0:
        kind = RegimeKind.UNBROKEN
    else:
        kind = RegimeKind.BROKEN
    return Regime(kind=kind, delta=d)


# ---------------------------------------------------------------------------
# Truncated-Fock diagonalization oracle.
# ---------------------------------------------------------------------------


def fock_hamiltonian(params: ModelParams, n: int) -> np.ndarray:
    return algebra.fock_matrix(build_hamiltonian(params), n)


def fock_low_eigenvalues(params: ModelParams, n: int, k: int = 8) -> np.ndarray:
    """The k lowest-real-part eigenvalues of the truncated Fock Hamiltonian.

    The i*lambda*x*y coupling preserves the per-mode parities up to a joint
    flip, so H block-diagonalizes over {(even,even),(odd,odd)} and
    {(even,odd),(odd,even)}; diagonalizing the two blocks separately keeps
    n = 40 runs fast.
    """
    h = fock_hamiltonian(params, n)
    nx = np.arange(n).repeat(n)
    ny = np.tile(np.arange(n), n)
    sector0 = (nx + ny) % 2 == 0
    vals = []
    for mask in (sector0, ~sector0):
        idx = np.where(mask)[0]
        block = h[np.ix_(idx, idx)]
        vals.append(scipy.linalg.eigvals(block, check_finite=False))
    ev = np.concatenate(vals)
    order = np.argsort(ev.real)
    return ev[order][:k]
