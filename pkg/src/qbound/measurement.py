"""Saturating measurements and locally best unbiased estimators.

The optimal coefficients maximize the generalized Rayleigh quotient; the
saturating measurement projects onto the eigenbasis of the symmetric division
of the optimally combined test observable, with the reference state entering
through its implicit coefficient.  A diagnostic report quantifies how far any
measurement is from the three saturation conditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .classical import (
    InformationMatrix,
    POVM,
    classical_bound,
    classical_info_matrix,
    projective_povm,
)
from .errors import RangeViolationError
from .observables import TestObservableSet
from .operators import omega_apply, range_residual, require_hermitian, sym_pinv
from .quantum import bound_from_matrix, quantum_info_matrix


@dataclass(frozen=True)
class SaturationReport:
    """Residuals of the three saturation conditions plus the classical/quantum gap.

    Condition (i): realness of the measured cross terms.  Condition (ii):
    per-outcome Cauchy-Schwarz equality in trace form.  Condition (iii):
    completeness of the measurement.  ``alpha`` is the Rayleigh normalization
    of the supplied coefficients (1 at the optimum).
    """

    condition_i_residual: float
    condition_ii_residual: float
    condition_iii_residual: float
    classical_equals_quantum_gap: float
    alpha: float
    degeneracy: int = 1


def optimal_coefficients(info: InformationMatrix, lam, f, rcond: float = 1e-12) -> np.ndarray:
    """Coefficients attaining the bound: pseudo-inverse solve of the corrected matrix.

    Normalized so that ``a . lam == a . (Q - f f^T) a``; with the
    pseudo-inverse solution that holds automatically.  Raises
    ``RangeViolationError`` when ``lam`` leaves the range of the corrected
    matrix (the bound is infinite there).
    """
    lam = np.asarray(lam, dtype=float)
    f = np.asarray(f, dtype=float)
    schur = info.matrix - np.outer(f, f)
    sp = sym_pinv(schur, rcond=rcond)
    if range_residual(schur, sp, lam) > 1e-8:
        raise RangeViolationError("constraint vector outside the range of the corrected matrix")
    return sp @ lam


def effective_observable(obs_set: TestObservableSet, rho_theta, a) -> np.ndarray:
    """Optimal combination of the test observables, reference state included.

    The implicit reference-state row carries coefficient ``-f . a``, so the
    shifted-state entries contribute as differences from the reference state.
    """
    a = np.asarray(a, dtype=float)
    rho = require_hermitian(rho_theta, name="rho")
    f = obs_set.f_vector
    out = -float(f @ a) * rho.astype(complex)
    for coeff, op in zip(a, obs_set.operators):
        out = out + coeff * op
    return out


def optimal_povm(obs_set: TestObservableSet, rho_theta, a) -> POVM:
    """Rank-1 projective measurement in the eigenbasis of the symmetric
    division of the optimally combined observable."""
    geff = effective_observable(obs_set, rho_theta, a)
    return projective_povm(omega_apply(rho_theta, geff))


def saturating_measurement(obs_set: TestObservableSet, rho_theta, lam=None, f=None):
    """Convenience path: information matrix, optimal coefficients, and POVM.

    Returns ``(povm, a, info)``.  ``lam``/``f`` default to the set's own
    constraint and marker vectors.
    """
    lam = obs_set.lambdas if lam is None else np.asarray(lam, dtype=float)
    f = obs_set.f_vector if f is None else np.asarray(f, dtype=float)
    info = quantum_info_matrix(obs_set, rho_theta)
    a = optimal_coefficients(info, lam, f)
    return optimal_povm(obs_set, rho_theta, a), a, info


def _coerce_elements(povm: Union[POVM, Sequence]) -> list:
    if isinstance(povm, POVM):
        return list(povm.elements)
    return [require_hermitian(e, name="POVM element") for e in povm]


def saturation_check(povm, obs_set: TestObservableSet, rho_theta, a, lam, f,
                     p_floor: float = 1e-14) -> SaturationReport:
    """Measure how far a measurement is from saturating the quantum bound.

    Accepts a raw element list as well, so incomplete measurements can be
    diagnosed rather than rejected.  Always returns; nothing is asserted.
    """
    elements = _coerce_elements(povm)
    rho = require_hermitian(rho_theta, name="rho")
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    f = np.asarray(f, dtype=float)
    d = rho.shape[0]

    geff = effective_observable(obs_set, rho_theta, a)
    ell = omega_apply(rho, geff)

    cond_i = 0.0
    cond_ii = 0.0
    ell_rho_ell = ell @ rho @ ell
    for e in elements:
        p = float(np.trace(e @ rho).real)
        cross = complex(np.trace(rho @ e @ ell))
        cond_i = max(cond_i, abs(cross.imag))
        if p > p_floor:
            defect = float(np.trace(e @ ell_rho_ell).real) - abs(cross) ** 2 / p
            cond_ii = max(cond_ii, abs(defect))
    total = sum(elements)
    cond_iii = float(np.abs(total - np.eye(d)).max())

    quantum = bound_from_matrix(quantum_info_matrix(obs_set, rho), lam, f)
    gap = float("nan")
    if isinstance(povm, POVM):
        classical = classical_bound(classical_info_matrix(povm, obs_set, rho, p_floor), lam, f)
        gap = classical.value - quantum.value

    schur = quantum_info_matrix(obs_set, rho).matrix - np.outer(f, f)
    denom = float(a @ lam)
    alpha = float(a @ schur @ a) / denom if denom != 0.0 else float("nan")

    eigs = np.linalg.eigvalsh(ell)
    scale = max(1.0, float(np.abs(eigs).max()))
    degeneracy = 1
    if eigs.size > 1:
        gaps = np.diff(eigs)
        runs, current = 1, 1
        for g in gaps:
            current = current + 1 if g <= 1e-9 * scale else 1
            runs = max(runs, current)
        degeneracy = runs

    return SaturationReport(condition_i_residual=cond_i,
                            condition_ii_residual=cond_ii,
                            condition_iii_residual=cond_iii,
                            classical_equals_quantum_gap=gap,
                            alpha=alpha,
                            degeneracy=degeneracy)
