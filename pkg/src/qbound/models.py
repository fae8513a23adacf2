"""Parameterized density-matrix families.

The qubit phase model evolves a Bloch vector around a fixed rotation axis and
carries analytic derivatives of every order.  Pure states mixed with white
noise, user-supplied callables, and Kronecker-power wrappers fall back on
order-2 central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import bisect
from scipy.special import xlogy

from .errors import (
    DimensionCapError,
    NonUnitAxisError,
    OrderUnavailableError,
    OutOfDomainError,
    OutOfRangeError,
)
from .operators import DIMENSION_CAP, hermitian_part, tensor_power

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = np.stack([PAULI_X, PAULI_Y, PAULI_Z])

# Central stencils of order-2 accuracy, keyed by derivative order.
_FD_STENCILS = {
    1: ((-1, 0, 1), (-0.5, 0.0, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 0, 1, 2), (-0.5, 1.0, 0.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}
MAX_FD_ORDER = max(_FD_STENCILS)
DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class Interval:
    """Real interval with individually open or closed endpoints."""

    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = True

    def contains(self, x: float) -> bool:
        above = x >= self.lo if self.closed_lo else x > self.lo
        below = x <= self.hi if self.closed_hi else x < self.hi
        return bool(above and below)

    @property
    def width(self) -> float:
        return self.hi - self.lo


#: Full phase interval: pi is a valid phase, -pi is not.
THETA_FULL = Interval(-math.pi, math.pi, closed_lo=False, closed_hi=True)


def bloch_to_density(r) -> np.ndarray:
    """Qubit density matrix with Bloch vector ``r``."""
    vec = np.asarray(r, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm > 1.0 + 1e-12:
        raise OutOfRangeError(f"Bloch vector has length {norm:.6f} > 1")
    return hermitian_part(0.5 * (np.eye(2, dtype=complex) + np.einsum("i,ijk->jk", vec, PAULI)))


def bloch_evolve(r0, n, theta: float) -> np.ndarray:
    """Rotate Bloch vector ``r0`` by angle ``theta`` about the unit axis ``n``.

    The component along the axis is preserved; the perpendicular part rotates
    in the plane spanned by itself and ``n x r0``.  Length is preserved.
    """
    r0 = np.asarray(r0, dtype=float)
    n = np.asarray(n, dtype=float)
    if abs(float(np.linalg.norm(n)) - 1.0) > 1e-12:
        raise NonUnitAxisError(f"axis norm {np.linalg.norm(n):.12f} != 1")
    par = float(n @ r0) * n
    perp = r0 - par
    return np.cos(theta) * perp + par + np.sin(theta) * np.cross(n, r0)


class StateFamily:
    """One-parameter family of density matrices over a phase interval.

    Subclasses implement ``_state``; ``derivative`` defaults to central finite
    differences and may be overridden with an analytic rule.
    """

    dim: int
    domain: Interval
    derivative_order_available: float = MAX_FD_ORDER

    def _state(self, theta: float) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, theta: float) -> np.ndarray:
        if not self.domain.contains(theta):
            raise OutOfDomainError(f"theta = {theta!r} outside {self.domain}")
        return self._state(float(theta))

    def derivative(self, theta: float, k: int, h: Optional[float] = None) -> np.ndarray:
        """k-th derivative of the state at ``theta``.

        Finite-difference path: order-2 central stencil with step
        ``h = 1e-4 * max(1, |theta|)`` by default.  Raises ``OutOfDomainError``
        when a stencil point leaves the domain and ``OrderUnavailableError``
        beyond the supported order.
        """
        if k < 1:
            raise ValueError(f"derivative order must be >= 1, got {k}")
        if k > self.derivative_order_available or k not in _FD_STENCILS:
            raise OrderUnavailableError(f"derivative order {k} unavailable for {type(self).__name__}")
        if not self.domain.contains(theta):
            raise OutOfDomainError(f"theta = {theta!r} outside {self.domain}")
        step = DEFAULT_FD_STEP * max(1.0, abs(theta)) if h is None else float(h)
        offsets, coeffs = _FD_STENCILS[k]
        points = [theta + o * step for o in offsets]
        for p in points:
            if not self.domain.contains(p):
                raise OutOfDomainError(f"stencil point {p!r} outside {self.domain}")
        acc = sum(c * self._state(p) for c, p in zip(coeffs, points) if c != 0.0)
        return hermitian_part(acc / step ** k)


class QubitPhaseModel(StateFamily):
    """Qubit rotated about a fixed axis; derivatives are analytic to all orders."""

    def __init__(self, r0, n=(0.0, 0.0, 1.0), domain: Interval = THETA_FULL):
        r0 = np.asarray(r0, dtype=float)
        n = np.asarray(n, dtype=float)
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-12:
            raise NonUnitAxisError(f"axis norm {np.linalg.norm(n):.12f} != 1")
        if float(np.linalg.norm(r0)) > 1.0 + 1e-12:
            raise OutOfRangeError("initial Bloch vector longer than 1")
        self.r0 = r0
        self.n = n
        self.domain = domain
        self.dim = 2
        self.derivative_order_available = math.inf
        self._par = float(n @ r0) * n
        self._perp = r0 - self._par
        self._cross = np.cross(n, r0)

    def bloch(self, theta: float) -> np.ndarray:
        return np.cos(theta) * self._perp + self._par + np.sin(theta) * self._cross

    def bloch_derivative(self, theta: float, k: int) -> np.ndarray:
        """k-th derivative of the Bloch vector; shifts the phase by k*pi/2."""
        if k < 1:
            raise ValueError(f"derivative order must be >= 1, got {k}")
        shift = theta + k * (math.pi / 2.0)
        return np.cos(shift) * self._perp + np.sin(shift) * self._cross

    def _state(self, theta: float) -> np.ndarray:
        return bloch_to_density(self.bloch(theta))

    def derivative(self, theta: float, k: int, h: Optional[float] = None) -> np.ndarray:
        if k < 1:
            raise ValueError(f"derivative order must be >= 1, got {k}")
        if not self.domain.contains(theta):
            raise OutOfDomainError(f"theta = {theta!r} outside {self.domain}")
        dr = self.bloch_derivative(theta, k)
        return hermitian_part(0.5 * np.einsum("i,ijk->jk", dr, PAULI))


class DepolarizedPureModel(StateFamily):
    """Pure-state family mixed with white noise: (1-eps)|psi><psi| + eps I/d."""

    def __init__(self, pure_family: Callable[[float], np.ndarray], epsilon: float,
                 dim: int, domain: Interval = THETA_FULL):
        if not 0.0 <= epsilon <= 1.0:
            raise OutOfRangeError(f"epsilon = {epsilon} outside [0, 1]")
        self.pure_family = pure_family
        self.epsilon = float(epsilon)
        self.dim = int(dim)
        self.domain = domain

    def _state(self, theta: float) -> np.ndarray:
        psi = np.asarray(self.pure_family(theta), dtype=complex).reshape(-1)
        if psi.shape[0] != self.dim:
            raise OutOfRangeError(f"pure state has dimension {psi.shape[0]}, expected {self.dim}")
        nrm = float(np.linalg.norm(psi))
        if abs(nrm - 1.0) > 1e-10:
            raise OutOfRangeError(f"pure state norm {nrm:.12f} != 1")
        proj = np.outer(psi, psi.conj())
        return hermitian_part((1.0 - self.epsilon) * proj
                              + (self.epsilon / self.dim) * np.eye(self.dim))


def equatorial_qubit_ket(theta: float) -> np.ndarray:
    """Equal-weight qubit superposition with relative phase ``theta``."""
    return np.array([1.0, np.exp(1j * theta)], dtype=complex) / math.sqrt(2.0)


class CallableFamily(StateFamily):
    """Family defined by a user-supplied ``theta -> density matrix`` callable.

    The returned matrices are validated for Hermiticity and symmetrized, so
    downstream differences of states stay exactly Hermitian even when the
    supplied callable carries roundoff skew (e.g. from matrix exponentials).
    """

    def __init__(self, evaluate_fn: Callable[[float], np.ndarray], dim: int,
                 domain: Interval = THETA_FULL,
                 derivative_fn: Optional[Callable[[float, int], np.ndarray]] = None):
        self.evaluate_fn = evaluate_fn
        self.dim = int(dim)
        self.domain = domain
        self.derivative_fn = derivative_fn
        self.derivative_order_available = math.inf if derivative_fn is not None else MAX_FD_ORDER

    def _state(self, theta: float) -> np.ndarray:
        from .operators import require_hermitian

        arr = require_hermitian(np.asarray(self.evaluate_fn(theta), dtype=complex),
                                tol=1e-10, name="state")
        return hermitian_part(arr)

    def derivative(self, theta: float, k: int, h: Optional[float] = None) -> np.ndarray:
        if self.derivative_fn is None:
            return super().derivative(theta, k, h)
        if k < 1:
            raise ValueError(f"derivative order must be >= 1, got {k}")
        if not self.domain.contains(theta):
            raise OutOfDomainError(f"theta = {theta!r} outside {self.domain}")
        return hermitian_part(np.asarray(self.derivative_fn(theta, k), dtype=complex))


class TensorPowerFamily(StateFamily):
    """m independent copies of a base family, with product-rule derivatives."""

    def __init__(self, base: StateFamily, m: int, cap: int = DIMENSION_CAP):
        if m < 1 or int(m) != m:
            raise ValueError(f"m must be a positive integer, got {m!r}")
        if base.dim ** m > cap:
            raise DimensionCapError(f"dimension {base.dim}^{m} exceeds cap {cap}")
        self.base = base
        self.m = int(m)
        self.dim = base.dim ** int(m)
        self.domain = base.domain
        self.derivative_order_available = base.derivative_order_available

    def _state(self, theta: float) -> np.ndarray:
        return tensor_power(self.base.evaluate(theta), self.m, cap=self.dim)

    def derivative(self, theta: float, k: int, h: Optional[float] = None) -> np.ndarray:
        if k < 1:
            raise ValueError(f"derivative order must be >= 1, got {k}")
        # factors[j] = j-th derivative of the single-copy state (0th = state)
        factors = [self.base.evaluate(theta)]
        factors += [self.base.derivative(theta, j, h) for j in range(1, k + 1)]
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for combo in _weak_compositions(k, self.m):
            coeff = math.factorial(k)
            for kj in combo:
                coeff //= math.factorial(kj)
            term = factors[combo[0]]
            for kj in combo[1:]:
                term = np.kron(term, factors[kj])
            out += coeff * term
        return hermitian_part(out)


def _weak_compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _weak_compositions(total - head, parts - 1):
            yield (head,) + tail


def binary_entropy_nats(r: float) -> float:
    """Entropy in nats of a qubit with Bloch-vector length ``r``."""
    if not 0.0 <= r <= 1.0 + 1e-12:
        raise OutOfRangeError(f"r = {r} outside [0, 1]")
    p = (1.0 + min(r, 1.0)) / 2.0
    q = 1.0 - p
    return float(-(xlogy(p, p) + xlogy(q, q)))


def entropy_to_bloch_length(s: float) -> float:
    """Bloch-vector length of the qubit with entropy ``s`` nats.

    Inverts the binary entropy by bisection to 1e-13; monotone decreasing,
    with exact endpoints r(0) = 1 and r(ln 2) = 0.
    """
    ln2 = math.log(2.0)
    if s < -1e-15 or s > ln2 + 1e-15:
        raise OutOfRangeError(f"entropy {s} outside [0, ln 2]")
    if s <= 0.0:
        return 1.0
    if s >= ln2:
        return 0.0
    return float(bisect(lambda r: binary_entropy_nats(r) - s, 0.0, 1.0, xtol=1e-13))
