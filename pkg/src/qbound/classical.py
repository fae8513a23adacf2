"""Fixed-measurement machinery.

Outcome probabilities, the classical information matrix over the events with
nonzero probability, bound values through the pseudo-inverse with an explicit
range check, the chi-square divergence, and the estimator that attains the
classical bound for a given measurement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, NegativeEigenvalueError, RangeViolationError
from .observables import TestObservableSet
from .operators import hermitian_part, range_residual, require_hermitian, sym_pinv

P_FLOOR = 1e-14
RANGE_TOL = 1e-8
RCOND = 1e-12


@dataclass(frozen=True)
class POVM:
    """Positive operators summing to the identity."""

    elements: tuple

    def __post_init__(self):
        els = tuple(require_hermitian(e, name="POVM element") for e in self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise ValueError("POVM needs at least one element")
        d = els[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in els:
            if e.shape[0] != d:
                raise DimensionMismatchError("POVM elements have mixed dimensions")
            wmin = float(np.linalg.eigvalsh(hermitian_part(e))[0])
            if wmin < -1e-10 * max(1.0, float(np.abs(e).max())):
                raise NegativeEigenvalueError(f"POVM element has eigenvalue {wmin:.3e}")
            total += e
        if float(np.abs(total - np.eye(d)).max()) > 1e-10:
            raise ValueError("POVM elements do not sum to the identity")

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


def projective_povm(hermitian) -> POVM:
    """Rank-1 projective measurement in the eigenbasis of a Hermitian operator."""
    from .operators import spectral_decompose

    dec = spectral_decompose(hermitian)
    v = dec.eigenvectors
    return POVM(elements=tuple(np.outer(v[:, i], v[:, i].conj()) for i in range(v.shape[1])))


@dataclass(frozen=True)
class ProbabilityModel:
    """Outcome distribution restricted to events above a probability floor."""

    probabilities: np.ndarray
    support: np.ndarray
    p_floor: float = P_FLOOR

    def __post_init__(self):
        p = self.probabilities
        tol = 1e-12 + p.size * self.p_floor
        if abs(float(p.sum()) - 1.0) > tol:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        if float(p.min()) < 0.0:
            raise ValueError("negative probability after clipping")


def probabilities(povm: POVM, rho, p_floor: float = P_FLOOR) -> ProbabilityModel:
    """Born probabilities with sub-floor values clipped to exactly zero."""
    rho = require_hermitian(rho, name="rho")
    if rho.shape[0] != povm.dim:
        raise DimensionMismatchError(f"state dimension {rho.shape[0]} != POVM dimension {povm.dim}")
    p = np.array([float(np.trace(e @ rho).real) for e in povm.elements])
    p = np.where(p > p_floor, p, 0.0)
    return ProbabilityModel(probabilities=p, support=np.flatnonzero(p > p_floor), p_floor=p_floor)


@dataclass(frozen=True)
class InformationMatrix:
    """Real symmetric PSD matrix of constraint correlations."""

    matrix: np.ndarray
    kind: str
    offsets: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        scale = max(1.0, float(np.abs(m).max()))
        if float(np.abs(m - m.T).max()) > 1e-10 * scale:
            raise ValueError("information matrix is not symmetric")
        wmin = float(np.linalg.eigvalsh(m)[0])
        if wmin < -1e-9 * scale:
            raise NegativeEigenvalueError(f"information matrix has eigenvalue {wmin:.3e}")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass
class BoundResult:
    """A variance bound with the optimizer state that produced it."""

    value: float
    optimal_a: Optional[np.ndarray] = None
    optimal_offsets: np.ndarray = field(default_factory=lambda: np.zeros(0))
    diagnostics: dict = field(default_factory=dict)
    saturating_povm: Optional[POVM] = None
    attained_at_limit: bool = False


def bound_from_schur(schur: np.ndarray, lam, kind: str, offsets=None,
                     rcond: float = RCOND) -> BoundResult:
    """Bound value from an already rank-one-corrected information matrix.

    Computes ``lam^T S^+ lam`` with an explicit check that ``lam`` lies in the
    range of ``S``; outside the range the bound is reported as ``+inf``.
    """
    lam = np.asarray(lam, dtype=float)
    s = np.asarray(schur, dtype=float)
    sp = sym_pinv(s, rcond=rcond)
    resid = range_residual(s, sp, lam)
    offsets = np.zeros(0) if offsets is None else np.asarray(offsets, dtype=float)
    if resid > RANGE_TOL:
        return BoundResult(value=float("inf"), optimal_a=None, optimal_offsets=offsets,
                           diagnostics={"kind": kind, "range_residual": resid, "in_range": False})
    a = sp @ lam
    value = max(float(lam @ a), 0.0)
    return BoundResult(value=value, optimal_a=a, optimal_offsets=offsets,
                       diagnostics={"kind": kind, "range_residual": resid, "in_range": True})


def classical_bound(info: InformationMatrix, lam, f, rcond: float = RCOND) -> BoundResult:
    """Variance bound for a fixed measurement.

    ``f`` marks the shifted-state entries; subtracting ``f f^T`` accounts for
    the reference state as an implicit extra constraint row, which tightens
    the bound at no extra cost.
    """
    f = np.asarray(f, dtype=float)
    schur = info.matrix - np.outer(f, f)
    return bound_from_schur(schur, lam, kind=info.kind, offsets=info.offsets, rcond=rcond)


def classical_info_matrix(povm: POVM, obs_set: TestObservableSet, rho_theta,
                          p_floor: float = P_FLOOR) -> InformationMatrix:
    """Correlation matrix of the measured test observables over the support."""
    pm = probabilities(povm, rho_theta, p_floor)
    g = np.array([[float(np.trace(e @ op).real) for e in povm.elements]
                  for op in obs_set.operators])
    sup = pm.support
    p_sup = pm.probabilities[sup]
    g_sup = g[:, sup]
    c = (g_sup / p_sup) @ g_sup.T
    return InformationMatrix(matrix=0.5 * (c + c.T), kind="classical",
                             offsets=obs_set.barankin_offsets)


def chi2_divergence(q: ProbabilityModel, p: ProbabilityModel) -> float:
    """Chi-square divergence of ``q`` from ``p``.

    Infinite when ``q`` has mass outside the support of ``p``.  Evaluated in
    the cancellation-free form ``sum (q-p)^2/p + 2 sum q - sum p - 1`` over
    the support, which is exact and remains accurate when ``q`` is close to
    ``p``.
    """
    qp = q.probabilities
    pp = p.probabilities
    if qp.shape != pp.shape:
        raise DimensionMismatchError("distributions have different outcome counts")
    off_support = np.setdiff1d(np.arange(pp.size), p.support)
    if off_support.size and float(qp[off_support].max(initial=0.0)) > q.p_floor:
        return float("inf")
    sup = p.support
    qs, ps = qp[sup], pp[sup]
    value = float(np.sum((qs - ps) ** 2 / ps) + 2.0 * qs.sum() - ps.sum() - 1.0)
    return max(value, 0.0)


def optimal_estimator(povm: POVM, obs_set: TestObservableSet, info: InformationMatrix,
                      lam, f, rho_theta, p_floor: float = P_FLOOR) -> np.ndarray:
    """Centered estimator values attaining the classical bound.

    Outcome ``x`` gets ``(a . g(x) + a0 p(x)) / p(x)`` where ``a`` solves the
    rank-one-corrected system and ``a0 = -f . a`` is the implicit coefficient
    of the reference state.  Zero-probability outcomes get value 0.
    """
    lam = np.asarray(lam, dtype=float)
    f = np.asarray(f, dtype=float)
    result = classical_bound(info, lam, f)
    if result.optimal_a is None:
        raise RangeViolationError("constraint vector outside the range of the information matrix")
    a = result.optimal_a
    a0 = -float(f @ a)
    pm = probabilities(povm, rho_theta, p_floor)
    g = np.array([[float(np.trace(e @ op).real) for e in povm.elements]
                  for op in obs_set.operators])
    values = np.zeros(len(povm))
    sup = pm.support
    values[sup] = (a @ g[:, sup] + a0 * pm.probabilities[sup]) / pm.probabilities[sup]
    return values
