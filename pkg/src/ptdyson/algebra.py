"""Phase-space representation of the quadratic operator algebra.

Every operator handled here is a Weyl-ordered quadratic form

    A_hat = (1/2) * sum_ij C[i, j] v_i v_j,      v = (x, y, p_x, p_y),

stored as its complex symmetric 4x4 coefficient matrix ``C``.  Because the
symmetrized products close under commutation without constant terms, the
whole operator calculus (brackets, non-unitary flows e^{f G}, gauge terms)
reduces to exact 4x4 matrix arithmetic.  A truncated two-mode Fock
representation is provided as an independent oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

__all__ = [
    "COORDINATE_ORDER",
    "OMEGA_SP",
    "QuadraticOperator",
    "GeneratorId",
    "FlowFactor",
    "generator",
    "bracket",
    "flow_matrix",
    "adjoint_apply",
    "adjoint_series",
    "gauge_term",
    "hermitian_split",
    "fock_operators",
    "fock_matrix",
    "fock_flow",
    "fock_flow_product",
    "interior_mask",
]

# Canonical phase-space convention.  Fixed once; the commutation table of the
# ten generators pins both the ordering and the sign of the symplectic form,
# so neither is configurable at runtime.
COORDINATE_ORDER = ("x", "y", "p_x", "p_y")

OMEGA_SP = np.array(
    [
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [-1, 0, 0, 0],
        [0, -1, 0, 0],
    ],
    dtype=float,
)

_SYM_TOL = 1e-13


@dataclass(frozen=True)
class QuadraticOperator:
    """Weyl-ordered quadratic operator, stored as a symmetric 4x4 matrix."""

    coeff: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeff, dtype=complex)
        if c.shape != (4, 4):
            raise ValueError(f"coefficient matrix must be 4x4, got {c.shape}")
        if np.max(np.abs(c - c.T)) > _SYM_TOL * max(1.0, np.max(np.abs(c))):
            raise ValueError("coefficient matrix must be symmetric")
        c = 0.5 * (c + c.T)
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)

    @property
    def is_hermitian(self) -> bool:
        return bool(np.max(np.abs(self.coeff.imag)) <= 1e-12 * max(1.0, self.norm()))

    def norm(self) -> float:
        """Spectral norm of the coefficient matrix."""
        return float(np.linalg.norm(self.coeff, 2))

    def __add__(self, other: "QuadraticOperator") -> "QuadraticOperator":
        return QuadraticOperator(self.coeff + other.coeff)

    def __sub__(self, other: "QuadraticOperator") -> "QuadraticOperator":
        return QuadraticOperator(self.coeff - other.coeff)

    def __mul__(self, scalar) -> "QuadraticOperator":
        return QuadraticOperator(self.coeff * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "QuadraticOperator":
        return QuadraticOperator(-self.coeff)

    def allclose(self, other: "QuadraticOperator", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.coeff, other.coeff, rtol=0.0, atol=atol))


class GeneratorId(enum.Enum):
    """The ten Hermitian generators plus the L combinations used in the
    four-factor map ansatz:  L_+ = (I_+ + I_-)/2 = xy/2 and
    L_- = (I_+ - I_-)/2 = p_x p_y / 2."""

    KpX = "KpX"
    KmX = "KmX"
    K0X = "K0X"
    KpY = "KpY"
    KmY = "KmY"
    K0Y = "K0Y"
    Jp = "Jp"
    Jm = "Jm"
    Ip = "Ip"
    Im = "Im"
    Lp = "Lp"
    Lm = "Lm"


def _c(entries) -> np.ndarray:
    m = np.zeros((4, 4), dtype=float)
    for (i, j), v in entries.items():
        m[i, j] = v
        m[j, i] = v
    return m


# K_pm^z = (p_z^2 +- z^2)/2,  K_0^z = {z, p_z}/2,
# J_pm = (x p_y +- y p_x)/2,  I_pm = (xy +- p_x p_y)/2.
# Index order: x=0, y=1, p_x=2, p_y=3.  The 1/2 in front of each generator is
# the 1/2 of the v^T C v form itself, e.g. K_+^x has C[x,x] = C[px,px] = 1.
_GENERATOR_COEFFS = {
    GeneratorId.KpX: _c({(0, 0): 1.0, (2, 2): 1.0}),
    GeneratorId.KmX: _c({(0, 0): -1.0, (2, 2): 1.0}),
    GeneratorId.K0X: _c({(0, 2): 1.0}),
    GeneratorId.KpY: _c({(1, 1): 1.0, (3, 3): 1.0}),
    GeneratorId.KmY: _c({(1, 1): -1.0, (3, 3): 1.0}),
    GeneratorId.K0Y: _c({(1, 3): 1.0}),
    GeneratorId.Jp: _c({(0, 3): 0.5, (1, 2): 0.5}),
    GeneratorId.Jm: _c({(0, 3): 0.5, (1, 2): -0.5}),
    GeneratorId.Ip: _c({(0, 1): 0.5, (2, 3): 0.5}),
    GeneratorId.Im: _c({(0, 1): 0.5, (2, 3): -0.5}),
    GeneratorId.Lp: _c({(0, 1): 0.5}),
    GeneratorId.Lm: _c({(2, 3): 0.5}),
}


def generator(gid: GeneratorId) -> QuadraticOperator:
    """Return the quadratic form of one of the named generators."""
    return QuadraticOperator(_GENERATOR_COEFFS[gid])


@dataclass(frozen=True)
class FlowFactor:
    """One non-unitary flow e^{coefficient * G} in a factorized map."""

    generator: GeneratorId
    coefficient: float

    def __post_init__(self):
        f = float(self.coefficient)
        if not np.isfinite(f):
            raise ValueError("flow coefficient must be finite")
        object.__setattr__(self, "coefficient", f)


def bracket(a: QuadraticOperator, b: QuadraticOperator) -> QuadraticOperator:
    """Coefficient matrix of C_hat in the operator identity [A_hat, B_hat] = i C_hat.

    For symmetric A, B the result A Omega B - B Omega A is symmetric and the
    Weyl-ordered commutator carries no constant term.
    """
    a_, b_ = a.coeff, b.coeff
    return QuadraticOperator(a_ @ OMEGA_SP @ b_ - b_ @ OMEGA_SP @ a_)


def flow_matrix(factor: FlowFactor) -> np.ndarray:
    """4x4 matrix S with  Ad_{e^{fG}}: C -> S C S^T."""
    g = _GENERATOR_COEFFS[factor.generator]
    return expm(1j * factor.coefficient * g @ OMEGA_SP)


def adjoint_apply(factor: FlowFactor, a: QuadraticOperator) -> QuadraticOperator:
    """Quadratic form of e^{fG} A_hat e^{-fG}.

    Computed by the exact 4x4 conjugation C -> S C S^T with
    S = exp(i f C_G Omega); agrees with the convergent BCH series
    sum_n f^n/n! ad_G^n(A),  ad_G(A) = i (C_G Omega C_A - C_A Omega C_G).
    """
    s = flow_matrix(factor)
    return QuadraticOperator(s @ a.coeff @ s.T)


def adjoint_series(
    factor: FlowFactor,
    a: QuadraticOperator,
    order: int = 10,
    max_chunk: float = 0.125,
) -> QuadraticOperator:
    """Order-``order`` truncated BCH series for the same adjoint action.

    The flow is split into sub-steps of size at most ``max_chunk`` and the
    truncated series applied repeatedly, which keeps the truncation remainder
    of each step below roundoff.  Serves as an independent oracle for
    :func:`adjoint_apply`.
    """
    g = generator(factor.generator)
    n_chunks = max(1, int(np.ceil(abs(factor.coefficient) / max_chunk)))
    f = factor.coefficient / n_chunks
    c = np.asarray(a.coeff, dtype=complex)
    for _ in range(n_chunks):
        term = c
        acc = c.copy()
        for n in range(1, order + 1):
            term = 1j * (g.coeff @ OMEGA_SP @ term - term @ OMEGA_SP @ g.coeff)
            term = term * (f / n)
            acc = acc + term
        c = acc
    return QuadraticOperator(c)


def gauge_term(
    factors: list[FlowFactor], coefficient_rates: list[float]
) -> QuadraticOperator:
    """Quadratic form of i (d_t eta) eta^{-1} for eta = prod_k e^{f_k G_k}.

    Equals i * sum_k fdot_k Ad_{F_1 ... F_{k-1}}(G_k); complex in general.
    """
    if len(factors) != len(coefficient_rates):
        raise ValueError("factors and rates must pair up")
    total = np.zeros((4, 4), dtype=complex)
    left = np.eye(4, dtype=complex)
    for factor, rate in zip(factors, coefficient_rates):
        g = _GENERATOR_COEFFS[factor.generator]
        total = total + 1j * rate * (left @ g @ left.T)
        left = left @ flow_matrix(factor)
    return QuadraticOperator(total)


def hermitian_split(
    a: QuadraticOperator,
) -> tuple[QuadraticOperator, QuadraticOperator]:
    """Split A into (Hermitian, anti-Hermitian) parts: C = Re C + i Im C."""
    return (
        QuadraticOperator(a.coeff.real.astype(complex)),
        QuadraticOperator(1j * a.coeff.imag),
    )


# ---------------------------------------------------------------------------
# Truncated two-mode Fock oracle (unit mass/frequency ladder convention).
# ---------------------------------------------------------------------------


def _mode_xp(n: int) -> tuple[np.ndarray, np.ndarray]:
    lower = np.diag(np.sqrt(np.arange(1, n)), k=1)  # annihilation
    raise_ = lower.T
    x = (lower + raise_) / np.sqrt(2.0)
    p = 1j * (raise_ - lower) / np.sqrt(2.0)
    return x.astype(complex), p


def fock_operators(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(X, Y, Px, Py) on the two-mode space, state index = n_x * n + n_y."""
    if n < 2:
        raise ValueError("need at least two levels per mode")
    x1, p1 = _mode_xp(n)
    eye = np.eye(n)
    x = np.kron(x1, eye)
    y = np.kron(eye, x1)
    px = np.kron(p1, eye)
    py = np.kron(eye, p1)
    return x, y, px, py


def fock_matrix(a: QuadraticOperator, n: int) -> np.ndarray:
    """Matrix of A_hat in the number basis truncated to n_x, n_y < n."""
    ops = fock_operators(n)
    out = np.zeros((n * n, n * n), dtype=complex)
    c = a.coeff
    for i in range(4):
        for j in range(4):
            if c[i, j] != 0:
                out += 0.5 * c[i, j] * (ops[i] @ ops[j])
    return out


_FOCK_EIG_CACHE: dict[tuple[GeneratorId, int], tuple[np.ndarray, np.ndarray]] = {}


def fock_flow(factor: FlowFactor, n: int) -> np.ndarray:
    """Truncated-Fock matrix of e^{f G}.

    Generators are Hermitian, so the flow is V e^{f d} V^dagger with (d, V)
    the eigendecomposition of the truncated generator, cached per (G, n).
    """
    key = (factor.generator, n)
    if key not in _FOCK_EIG_CACHE:
        f = fock_matrix(generator(factor.generator), n)
        d, v = np.linalg.eigh(f)
        _FOCK_EIG_CACHE[key] = (d, v)
    d, v = _FOCK_EIG_CACHE[key]
    return (v * np.exp(factor.coefficient * d)) @ v.conj().T


def fock_flow_product(factors: list[FlowFactor], n: int) -> np.ndarray:
    """Truncated-Fock matrix of an ordered product of flow factors."""
    out = np.eye(n * n, dtype=complex)
    for factor in factors:
        out = out @ fock_flow(factor, n)
    return out


def interior_mask(n: int, margin: int = 2) -> np.ndarray:
    """Boolean mask selecting states with n_x, n_y < n - margin.

    Quadratic operators couple each mode number to its neighbours two steps
    away, so truncation artifacts live in the outer ``margin`` layers.
    """
    keep = np.arange(n) < n - margin
    return np.kron(keep, keep).astype(bool)
