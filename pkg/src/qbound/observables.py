"""Test-observable families and their bias constraints.

A test-observable set pairs Hermitian operators with the constraint values
they impose on an unbiased estimator: shifted states carry their offset,
first derivatives carry 1, higher derivatives carry 0.  The marker vector
``f`` records which entries are shifted states; the reference state itself is
never stored as a row, it enters the bounds through the rank-one subtraction
keyed by ``f``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateOffsetError,
    OutOfDomainError,
    SupportViolationError,
    ZeroOffsetError,
)
from .models import StateFamily
from .operators import hermitian_part, require_hermitian, support_projector

SUPPORT_TOL = 1e-10
REGULARIZATION_EPSILON = 1e-8


class ObservableKind(enum.Enum):
    BARANKIN_POINT = "barankin_point"
    DERIVATIVE_ORDER = "derivative_order"
    BASE_STATE = "base_state"


@dataclass(frozen=True)
class TestObservable:
    """One constraint row: a Hermitian operator, its bias value, and its kind."""

    operator: np.ndarray
    lam: float
    kind: ObservableKind
    offset: float = 0.0
    order: int = 0


@dataclass(frozen=True)
class TestObservableSet:
    entries: tuple
    theta: float

    def __post_init__(self):
        if not self.entries:
            raise ValueError("test-observable set must have at least one entry")
        dims = {e.operator.shape[0] for e in self.entries}
        if len(dims) != 1:
            raise DimensionMismatchError(f"mixed operator dimensions {sorted(dims)}")
        for e in self.entries:
            if e.kind is ObservableKind.BARANKIN_POINT and e.lam != e.offset:
                raise ValueError(f"Barankin entry with lam {e.lam} != offset {e.offset}")
            if e.kind is ObservableKind.DERIVATIVE_ORDER:
                expected = 1.0 if e.order == 1 else 0.0
                if e.lam != expected:
                    raise ValueError(f"derivative order {e.order} must carry lam {expected}, got {e.lam}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def dim(self) -> int:
        return self.entries[0].operator.shape[0]

    @property
    def operators(self) -> list:
        return [e.operator for e in self.entries]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    @property
    def f_vector(self) -> np.ndarray:
        return np.array([1.0 if e.kind is ObservableKind.BARANKIN_POINT else 0.0
                         for e in self.entries])

    @property
    def barankin_offsets(self) -> np.ndarray:
        return np.array([e.offset for e in self.entries
                         if e.kind is ObservableKind.BARANKIN_POINT])


@dataclass(frozen=True)
class SupportDiagnostics:
    """Outcome of the support check, including any regularization applied."""

    max_violation: float
    regularization_epsilon: float
    regularized_state: Optional[np.ndarray] = None


def barankin_set(family: StateFamily, theta: float, offsets: Sequence[float]) -> TestObservableSet:
    """Shifted states ``rho(theta + offset)`` as test observables.

    Offsets must be nonzero, pairwise distinct, and keep ``theta + offset``
    inside the family domain.
    """
    offs = [float(o) for o in offsets]
    if any(o == 0.0 for o in offs):
        raise ZeroOffsetError("Barankin offsets must be nonzero")
    if len(set(offs)) != len(offs):
        raise DuplicateOffsetError(f"duplicate offsets in {offs}")
    entries = []
    for o in offs:
        if not family.domain.contains(theta + o):
            raise OutOfDomainError(f"test point {theta + o!r} outside {family.domain}")
        entries.append(TestObservable(operator=family.evaluate(theta + o), lam=o,
                                      kind=ObservableKind.BARANKIN_POINT, offset=o))
    return TestObservableSet(entries=tuple(entries), theta=float(theta))


def bhattacharyya_set(family: StateFamily, theta: float, s: int,
                      h: Optional[float] = None) -> TestObservableSet:
    """State derivatives up to order ``s``; only the first carries a unit constraint."""
    if s < 1:
        raise ValueError(f"derivative count s must be >= 1, got {s}")
    entries = []
    for k in range(1, s + 1):
        entries.append(TestObservable(operator=family.derivative(theta, k, h),
                                      lam=1.0 if k == 1 else 0.0,
                                      kind=ObservableKind.DERIVATIVE_ORDER, order=k))
    return TestObservableSet(entries=tuple(entries), theta=float(theta))


def abel_set(family: StateFamily, theta: float, offsets: Sequence[float], s: int,
             h: Optional[float] = None) -> TestObservableSet:
    """Hybrid set: shifted states first, then derivatives up to order ``s``."""
    offs = list(offsets)
    if not offs and s < 1:
        raise ValueError("need at least one offset or one derivative order")
    entries = []
    if offs:
        entries.extend(barankin_set(family, theta, offs).entries)
    if s >= 1:
        entries.extend(bhattacharyya_set(family, theta, s, h).entries)
    return TestObservableSet(entries=tuple(entries), theta=float(theta))


def validate_support(obs_set: TestObservableSet, rho, tol: float = SUPPORT_TOL,
                     regularize: bool = False,
                     epsilon: float = REGULARIZATION_EPSILON):
    """Check that no test observable has weight on the kernel of ``rho``.

    Returns the set together with diagnostics.  When the check fails and
    ``regularize`` is set, the diagnostics carry a full-rank replacement state
    ``(1 - epsilon) rho + epsilon I/d``; otherwise ``SupportViolationError``
    is raised.  The violation is compared to ``tol`` relative to each
    operator's largest entry.
    """
    rho = require_hermitian(rho, name="rho")
    if rho.shape[0] != obs_set.dim:
        raise DimensionMismatchError(f"state dimension {rho.shape[0]} != set dimension {obs_set.dim}")
    proj = support_projector(rho)
    if proj.rank == 0:
        return obs_set, SupportDiagnostics(max_violation=0.0, regularization_epsilon=0.0)
    p = proj.projector
    max_violation = 0.0
    ok = True
    for entry in obs_set.entries:
        g = entry.operator
        violation = float(np.abs(p @ g @ p).max())
        max_violation = max(max_violation, violation)
        if violation > tol * max(float(np.abs(g).max()), 1e-300):
            ok = False
    if ok:
        return obs_set, SupportDiagnostics(max_violation=max_violation, regularization_epsilon=0.0)
    if not regularize:
        raise SupportViolationError(
            f"kernel weight {max_violation:.3e} exceeds tolerance; "
            f"regularize or restrict the test observables")
    d = rho.shape[0]
    rho_eps = hermitian_part((1.0 - epsilon) * rho + (epsilon / d) * np.eye(d))
    return obs_set, SupportDiagnostics(max_violation=max_violation,
                                       regularization_epsilon=epsilon,
                                       regularized_state=rho_eps)
