"""Measurement-optimized variance bounds.

The quantum information matrix is the Gram matrix of the test observables in
the inner product generated by symmetric division at the reference state.
Bounds follow from the pseudo-inverse of its rank-one-corrected form; shifted
test points are then maximized over a punctured grid with golden-section
refinement.

For numerical stability the corrected matrix is always assembled directly as
the Gram matrix of state *differences* ``rho(theta+offset) - rho(theta)``
(plus derivative rows), which is algebraically identical under the support
condition and free of cancellation at small offsets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .classical import (
    BoundResult,
    InformationMatrix,
    POVM,
    bound_from_schur,
    chi2_divergence,
    probabilities,
)
from .errors import (
    NonRealEntryError,
    OptimizerBudgetExceededError,
    OutOfDomainError,
    OutOfRangeError,
    SingularStateError,
    SupportViolationError,
)
from .models import QubitPhaseModel, StateFamily, TensorPowerFamily
from .observables import REGULARIZATION_EPSILON, SUPPORT_TOL, TestObservableSet
from .operators import (
    NULL_TOL,
    hermitian_part,
    omega_apply,
    require_hermitian,
    support_projector,
)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    """Grid-plus-refinement settings for the test-point supremum."""

    grid_points: int = 2048
    refine_iterations: int = 60
    offset_exclusion_radius: float = 1e-6
    coarse_grid_points: int = 64
    refine_candidates: int = 8
    refine_sweeps: int = 2
    max_grid_evaluations: int = 1_000_000

    def __post_init__(self):
        if self.grid_points < 8:
            raise ValueError(f"grid_points must be >= 8, got {self.grid_points}")


def quantum_info_matrix(obs_set: TestObservableSet, rho_theta, tol: float = NULL_TOL) -> InformationMatrix:
    """Gram matrix of the test observables in the symmetric-division product.

    Assumes the support condition has been checked (or the state regularized);
    entries with an imaginary part above tolerance raise ``NonRealEntryError``.
    """
    rho = require_hermitian(rho_theta, name="rho")
    ops = obs_set.operators
    omegas = [omega_apply(rho, g, tol) for g in ops]
    q = np.array([[np.trace(gk @ om) for om in omegas] for gk in ops])
    scale = max(1.0, float(np.abs(q).max()))
    worst_imag = float(np.abs(q.imag).max())
    if worst_imag > 1e-9 * scale:
        raise NonRealEntryError(f"information-matrix entry has imaginary part {worst_imag:.3e}")
    m = 0.5 * (q.real + q.real.T)
    return InformationMatrix(matrix=m, kind="quantum", offsets=obs_set.barankin_offsets)


def quantum_info_function(info, a, lam) -> float:
    """Rayleigh-type information functional ``(a^T Q a) / (a^T lam)^2``."""
    q = info.matrix if isinstance(info, InformationMatrix) else np.asarray(info, dtype=float)
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    denom = float(a @ lam) ** 2
    if denom == 0.0:
        return float("inf")
    return float(a @ q @ a) / denom


def pauli_components(g) -> tuple:
    """Decompose a 2x2 Hermitian ``g`` as (identity weight, Pauli 3-vector)/2."""
    from .models import PAULI

    g = require_hermitian(g, name="observable")
    if g.shape != (2, 2):
        raise OutOfRangeError("Pauli decomposition needs a 2x2 operator")
    g0 = float(np.trace(g).real)
    vec = np.array([float(np.trace(g @ p).real) for p in PAULI])
    return g0, vec


def qubit_q_entry(g0k: float, gk, g0l: float, gl, r_theta) -> float:
    """Information-matrix entry for a qubit from Bloch components.

    ``G = (g0 I + g . sigma) / 2``; the entry is
    ``(g0k - gk.r)(g0l - gl.r)/(1 - |r|^2) + gk.gl``.  For a pure state the
    first term is defined only when its numerator vanishes (equatorial
    geometry); otherwise ``SingularStateError`` is raised.
    """
    gk = np.asarray(gk, dtype=float)
    gl = np.asarray(gl, dtype=float)
    r = np.asarray(r_theta, dtype=float)
    r2 = float(r @ r)
    if r2 > 1.0 + 1e-12:
        raise OutOfRangeError(f"Bloch vector longer than 1: |r|^2 = {r2}")
    ak = g0k - float(gk @ r)
    al = g0l - float(gl @ r)
    denom = 1.0 - r2
    if denom < 1e-14:
        scale = max(1.0, float(np.linalg.norm(gk)) * float(np.linalg.norm(gl)))
        if abs(ak * al) > 1e-12 * scale:
            raise SingularStateError("pure qubit: entry diverges for this observable pair")
        first = 0.0
    else:
        first = ak * al / denom
    return first + float(gk @ gl)


def bound_from_matrix(info: InformationMatrix, lam, f) -> BoundResult:
    """Quantum bound from a full information matrix.

    Same contract as the classical bound: ``lam^T (Q - f f^T)^+ lam`` with the
    range of the corrected matrix checked explicitly; out-of-range constraint
    vectors yield ``+inf``.
    """
    f = np.asarray(f, dtype=float)
    schur = info.matrix - np.outer(f, f)
    return bound_from_schur(schur, lam, kind="quantum", offsets=info.offsets)


def _single_copy_qfi(family: StateFamily, theta: float, h: Optional[float] = None) -> float:
    if isinstance(family, QubitPhaseModel):
        dr = family.bloch_derivative(theta, 1)
        return qubit_q_entry(0.0, dr, 0.0, dr, family.bloch(theta))
    drho = family.derivative(theta, 1, h)
    rho = family.evaluate(theta)
    return float(np.trace(drho @ omega_apply(rho, drho)).real)


def qcrb(family: StateFamily, theta: float, m: int = 1, h: Optional[float] = None) -> BoundResult:
    """Lowest-order bound ``1 / (m F)``, using additivity over copies."""
    f1 = _single_copy_qfi(family, theta, h)
    fm = m * f1
    if fm <= 1e-300:
        return BoundResult(value=float("inf"),
                           diagnostics={"kind": "qcrb", "qfi": f1, "m": m, "zero_information": True})
    return BoundResult(value=1.0 / fm, optimal_a=np.array([1.0 / fm]),
                       diagnostics={"kind": "qcrb", "qfi": f1, "m": m})


def quantum_chi2(family: StateFamily, theta: float, lam: float,
                 tol: float = SUPPORT_TOL, regularize: bool = False,
                 epsilon: float = REGULARIZATION_EPSILON) -> float:
    """Measurement-maximized chi-square divergence between the states at
    ``theta + lam`` and ``theta``.

    Computed as the symmetric-division quadratic form of the state
    difference, which is exact under the support condition and keeps full
    relative accuracy as ``lam -> 0`` (where it approaches ``QFI * lam^2``).
    """
    for point in (theta, theta + lam):
        if not family.domain.contains(point):
            raise OutOfDomainError(f"phase {point!r} outside {family.domain}")
    if lam == 0.0:
        return 0.0
    rho = family.evaluate(theta)
    rho2 = family.evaluate(theta + lam)
    delta = rho2 - rho
    proj = support_projector(rho)
    if proj.rank > 0:
        violation = float(np.abs(proj.projector @ rho2 @ proj.projector).max())
        if violation > tol * max(float(np.abs(rho2).max()), 1e-300):
            if not regularize:
                raise SupportViolationError(
                    f"shifted state has kernel weight {violation:.3e}; regularize to proceed")
            d = rho.shape[0]
            rho = hermitian_part((1.0 - epsilon) * rho + (epsilon / d) * np.eye(d))
            delta = (1.0 - epsilon) * delta
    value = float(np.trace(delta @ omega_apply(rho, delta)).real)
    return max(value, 0.0)


def _assemble_schur(family: StateFamily, theta: float, offsets: Sequence[float], s: int,
                    m: int = 1, h: Optional[float] = None, regularize: bool = False,
                    epsilon: float = REGULARIZATION_EPSILON):
    """Rank-one-corrected information matrix for an Abel configuration.

    Returns ``(S, lam, f)`` where ``S`` equals ``Q_A - f f^T`` assembled as
    the symmetric-division Gram matrix of state differences and derivatives.
    Qubit phase models dispatch to Bloch algebra (single copy) or to the
    multi-copy closed forms; everything else goes through dense spectral
    computation on the (tensor-power) state.
    """
    offsets = [float(o) for o in offsets]
    r = len(offsets)
    if r + s < 1:
        raise ValueError("need at least one offset or one derivative order")
    for o in offsets:
        if not family.domain.contains(theta + o):
            raise OutOfDomainError(f"test point {theta + o!r} outside {family.domain}")
    if not family.domain.contains(theta):
        raise OutOfDomainError(f"theta = {theta!r} outside {family.domain}")
    lam = np.array(offsets + [1.0 if k == 1 else 0.0 for k in range(1, s + 1)])
    f = np.array([1.0] * r + [0.0] * s)

    if isinstance(family, QubitPhaseModel):
        rt = family.bloch(theta)
        rlen = float(np.linalg.norm(rt))
        if rlen >= 1.0 - 1e-12 and (r > 0 or s >= 2):
            # shifted test points, and derivatives beyond the first, put
            # weight on the kernel of a pure state
            if not regularize:
                raise SupportViolationError(
                    "test observables on a pure qubit violate the support condition")
            family = QubitPhaseModel(family.r0 * (1.0 - epsilon), family.n, family.domain)
            rt = family.bloch(theta)
        if m == 1:
            vecs = [family.bloch(theta + o) - rt for o in offsets]
            vecs += [family.bloch_derivative(theta, k) for k in range(1, s + 1)]
            n = r + s
            schur = np.empty((n, n))
            for i in range(n):
                for j in range(i, n):
                    schur[i, j] = schur[j, i] = qubit_q_entry(0.0, vecs[i], 0.0, vecs[j], rt)
            return schur, lam, f
        if s <= 1:
            from .mshot import MShotContext, mshot_schur_matrix

            ctx = MShotContext(model=family, m=m, theta=theta)
            return mshot_schur_matrix(ctx, offsets, s), lam, f
        family = TensorPowerFamily(family, m)
    elif m > 1:
        family = TensorPowerFamily(family, m)

    rho = family.evaluate(theta)
    # differences of exactly Hermitian matrices stay Hermitian; symmetrize
    # anyway so tiny-offset rows never trip the relative Hermiticity check
    diffs = [hermitian_part(family.evaluate(theta + o) - rho) for o in offsets]
    ders = [family.derivative(theta, k, h) for k in range(1, s + 1)]
    proj = support_projector(rho)
    if proj.rank > 0:
        p = proj.projector
        worst = 0.0
        for op in diffs + ders:
            viol = float(np.abs(p @ op @ p).max())
            if viol > SUPPORT_TOL * max(float(np.abs(op).max()), 1e-300):
                worst = max(worst, viol)
        if worst > 0.0:
            if not regularize:
                raise SupportViolationError(
                    f"test observables have kernel weight {worst:.3e}; regularize to proceed")
            d = rho.shape[0]
            rho = hermitian_part((1.0 - epsilon) * rho + (epsilon / d) * np.eye(d))
            diffs = [(1.0 - epsilon) * op for op in diffs]
            ders = [(1.0 - epsilon) * op for op in ders]
    ops = diffs + ders
    omegas = [omega_apply(rho, op) for op in ops]
    n = r + s
    schur = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            entry = complex(np.trace(ops[i] @ omegas[j]))
            if abs(entry.imag) > 1e-9 * max(1.0, abs(entry)):
                raise NonRealEntryError(f"matrix entry has imaginary part {entry.imag:.3e}")
            schur[i, j] = schur[j, i] = entry.real
    return schur, lam, f


def abel_bound_at_offsets(family: StateFamily, theta: float, offsets: Sequence[float], s: int,
                          m: int = 1, h: Optional[float] = None,
                          regularize: bool = False) -> BoundResult:
    """Bound value for fixed shifted test points (no supremum)."""
    schur, lam, f = _assemble_schur(family, theta, offsets, s, m, h, regularize)
    result = bound_from_schur(schur, lam, kind="quantum", offsets=np.asarray(offsets, dtype=float))
    result.diagnostics.update(order=(len(list(offsets)), s), m=m)
    return result


def _golden_max(fun, lo: float, hi: float, iterations: int):
    """Golden-section maximization tracking the best evaluated point.

    Endpoints are evaluated too, so a maximum on the boundary is reported at
    the boundary exactly.
    """
    evaluations = []

    def probe(x):
        v = fun(x)
        evaluations.append((v, x))
        return v

    probe(lo)
    probe(hi)
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = probe(c), probe(d)
    for _ in range(iterations):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = probe(d)
    best_v, best_x = max(evaluations, key=lambda t: (t[0], -abs(t[1])))
    return best_x, best_v


def _candidate_axis(domain, theta: float, npts: int, radius: float) -> np.ndarray:
    lo = domain.lo - theta
    hi = domain.hi - theta
    axis = np.linspace(lo, hi, npts + 1)
    if not domain.closed_lo:
        axis = axis[1:]
    if not domain.closed_hi:
        axis = axis[:-1]
    return axis[np.abs(axis) >= radius]


def _clip_bracket(center: float, step: float, lo: float, hi: float, radius: float,
                  lo_closed: bool, others=(), hi_closed: bool = True):
    """Refinement bracket around ``center``, kept away from the degenerate
    manifolds: the zero offset and any coinciding other offset.  Both make the
    corrected matrix exactly rank-deficient; approaching them closer than the
    exclusion radius trades a well-defined limit for noise."""
    a = center - step
    b = center + step
    edge = lo if lo_closed else lo + 1e-9 * max(1.0, abs(lo))
    a = max(a, edge)
    b = min(b, hi if hi_closed else hi - 1e-9 * max(1.0, abs(hi)))
    if center > 0.0:
        a = max(a, radius)
    else:
        b = min(b, -radius)
    for x in others:
        if abs(center - x) < radius:
            return 0.0, -1.0  # pinned to the degenerate manifold; skip
        if center < x:
            b = min(b, x - radius)
        else:
            a = max(a, x + radius)
    return a, b


def sup_over_testpoints(family: StateFamily, theta: float, r: int, s: int,
                        cfg: Optional[OptimizerConfig] = None, m: int = 1,
                        h: Optional[float] = None, regularize: bool = False) -> BoundResult:
    """Supremum of the order-(r, s) bound over the shifted test points.

    Grid search over the phase interval (right edge included, a small radius
    around zero excluded) followed by coordinate-wise golden-section
    refinement of the leading candidates.  The result inherits the value of
    the order-(r-1, s) problem, whose configurations are the degenerate limit
    of a vanishing offset; for (r, s) = (1, 0) that lower problem is the
    lowest-order bound itself.  Ties prefer smaller offsets.
    """
    if r < 0 or s < 0 or r + s < 1:
        raise ValueError(f"invalid order ({r}, {s})")
    cfg = cfg if cfg is not None else OptimizerConfig()
    if r == 0:
        result = abel_bound_at_offsets(family, theta, [], s, m, h, regularize)
        result.diagnostics.update(grid_points=0)
        return result

    if r == 1 and s == 0:
        limit = qcrb(family, theta, m, h)
    else:
        limit = sup_over_testpoints(family, theta, r - 1, s, cfg, m, h, regularize)

    npts = cfg.grid_points if r == 1 else cfg.coarse_grid_points
    axis = _candidate_axis(family.domain, theta, npts, cfg.offset_exclusion_radius)
    if len(axis) == 0:
        raise OutOfDomainError("no admissible test points in the domain")
    if len(axis) ** r > cfg.max_grid_evaluations:
        raise OptimizerBudgetExceededError(
            f"{len(axis)}^{r} grid evaluations exceed the budget {cfg.max_grid_evaluations}")

    def fun_vec(vec) -> float:
        return abel_bound_at_offsets(family, theta, list(vec), s, m, h, regularize).value

    grid = [tuple(v) for v in itertools.product(axis, repeat=r)]
    values = np.array([fun_vec(v) for v in grid])
    order_idx = np.argsort(-values)[: cfg.refine_candidates]

    lo = family.domain.lo - theta
    hi = family.domain.hi - theta
    step = (hi - lo) / npts
    refined = []
    for idx in order_idx:
        vec = list(grid[idx])
        val = float(values[idx])
        for _ in range(cfg.refine_sweeps):
            for i in range(r):
                a, b = _clip_bracket(vec[i], step, lo, hi, cfg.offset_exclusion_radius,
                                     family.domain.closed_lo,
                                     others=[x for j, x in enumerate(vec) if j != i],
                                     hi_closed=family.domain.closed_hi)
                if b <= a:
                    continue

                def line(t, i=i, vec=vec):
                    probe = list(vec)
                    probe[i] = t
                    return fun_vec(probe)

                x, fx = _golden_max(line, a, b, cfg.refine_iterations)
                if fx > val:
                    val, vec[i] = fx, x
        refined.append((val, vec))
    # deterministic maximum: larger value, then smaller offsets, then lexicographic
    best_val, best_vec = min(refined,
                             key=lambda t: (-t[0], float(np.linalg.norm(t[1])), tuple(t[1])))

    diagnostics = {"kind": "quantum-abel", "order": (r, s), "m": m,
                   "grid_points": npts, "grid_best": best_val,
                   "limit_value": limit.value,
                   "refine_iterations": cfg.refine_iterations}
    if limit.value >= best_val:
        offsets = np.append(np.asarray(limit.optimal_offsets, dtype=float), 0.0)
        if limit.optimal_a is not None and limit.optimal_a.shape[0] == (r - 1) + s:
            a_full = np.insert(limit.optimal_a, r - 1, 0.0)
        else:
            a_full = limit.optimal_a
        diagnostics["argmax"] = offsets.tolist()
        return BoundResult(value=limit.value, optimal_a=a_full, optimal_offsets=offsets,
                           diagnostics=diagnostics, attained_at_limit=True)
    final = abel_bound_at_offsets(family, theta, best_vec, s, m, h, regularize)
    diagnostics["argmax"] = list(best_vec)
    final.diagnostics.update(diagnostics)
    final.optimal_offsets = np.asarray(best_vec, dtype=float)
    return final


def hcrb_classical_sup(povm: POVM, family: StateFamily, theta: float,
                       cfg: Optional[OptimizerConfig] = None,
                       h: Optional[float] = None) -> BoundResult:
    """One-test-point classical bound for a fixed measurement, maximized over
    the offset.

    The vanishing-offset limit equals the inverse classical Fisher
    information of the measurement and is included as a candidate; a
    measurement insensitive to the phase yields ``+inf``.
    """
    cfg = cfg if cfg is not None else OptimizerConfig()
    pm0 = probabilities(povm, family.evaluate(theta))

    def objective(lam: float) -> float:
        chi2 = chi2_divergence(probabilities(povm, family.evaluate(theta + lam)), pm0)
        if chi2 <= 1e-13:
            # beneath numerical resolution; the vanishing-offset limit term
            # represents this regime (divergent when the Fisher information
            # vanishes, e.g. for a measurement blind to the phase)
            return -float("inf")
        return lam * lam / chi2

    dp = np.array([float(np.trace(e @ family.derivative(theta, 1, h)).real)
                   for e in povm.elements])
    sup_idx = pm0.support
    fisher = float(np.sum(dp[sup_idx] ** 2 / pm0.probabilities[sup_idx]))
    limit_value = 1.0 / fisher if fisher > 1e-300 else float("inf")

    axis = _candidate_axis(family.domain, theta, cfg.grid_points, cfg.offset_exclusion_radius)
    values = np.array([objective(x) for x in axis])
    best_idx = int(np.argmax(values))
    best_x, best_val = float(axis[best_idx]), float(values[best_idx])
    lo = family.domain.lo - theta
    hi = family.domain.hi - theta
    if math.isfinite(best_val):
        step = (hi - lo) / cfg.grid_points
        a, b = _clip_bracket(best_x, step, lo, hi, cfg.offset_exclusion_radius,
                             family.domain.closed_lo, hi_closed=family.domain.closed_hi)
        if b > a:
            x, fx = _golden_max(objective, a, b, cfg.refine_iterations)
            if fx > best_val:
                best_x, best_val = x, fx
    diagnostics = {"kind": "classical-hcrb", "grid_best": best_val,
                   "limit_value": limit_value, "fisher": fisher}
    if limit_value >= best_val:
        return BoundResult(value=limit_value, optimal_offsets=np.array([0.0]),
                           diagnostics=diagnostics, attained_at_limit=True)
    return BoundResult(value=best_val, optimal_offsets=np.array([best_x]),
                       diagnostics=diagnostics)
