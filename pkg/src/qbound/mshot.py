"""Closed-form multi-copy qubit matrix entries.

The sum over the 4^m eigenvector pairs of an m-fold product state is
reorganized by the number of spin-up factors on each side: all pairs in one
class share the 2/(p+p) weight, and their summed product of single-copy
transfer factors is a trinomial-style coefficient extraction.  Cost is
polynomial in m instead of exponential.

Entries that enter bounds after the rank-one correction are also provided
directly as differences from their zero-offset value, computed by telescoping
so that no large-minus-large cancellation occurs at small offsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .errors import NonRealEntryError, OutOfDomainError, SingularStateError
from .models import QubitPhaseModel

_KEYS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class MShotContext:
    """Reference data for m independent copies of a qubit phase model."""

    model: QubitPhaseModel
    m: int
    theta: float
    r_theta: np.ndarray = field(init=False)
    r_hat: np.ndarray = field(init=False)
    p_plus: float = field(init=False)
    p_minus: float = field(init=False)

    def __post_init__(self):
        if self.m < 1 or int(self.m) != self.m:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not self.model.domain.contains(self.theta):
            raise OutOfDomainError(f"theta = {self.theta!r} outside {self.model.domain}")
        rt = self.model.bloch(self.theta)
        rlen = float(np.linalg.norm(rt))
        if rlen >= 1.0 - 1e-12:
            raise SingularStateError("multi-copy closed forms need a mixed qubit (|r| < 1)")
        # degenerate spectrum at r = 0: any eigenbasis works, pick z
        rhat = rt / rlen if rlen > 1e-14 else np.array([0.0, 0.0, 1.0])
        object.__setattr__(self, "r_theta", rt)
        object.__setattr__(self, "r_hat", rhat)
        object.__setattr__(self, "p_plus", (1.0 + rlen) / 2.0)
        object.__setattr__(self, "p_minus", (1.0 - rlen) / 2.0)

    def shifted_bloch(self, offset: float) -> np.ndarray:
        point = self.theta + offset
        if not self.model.domain.contains(point):
            raise OutOfDomainError(f"test point {point!r} outside {self.model.domain}")
        return self.model.bloch(point)


def _pauli_quartic(a, b, c, d) -> complex:
    """Tr of the product of four (I + v.sigma)/2 factors with Bloch vectors a..d."""
    u = a + b + 1j * np.cross(a, b)
    v = c + d + 1j * np.cross(c, d)
    return ((1.0 + a @ b) * (1.0 + c @ d) + u @ v) / 8.0


def _transfer_factors(ctx: MShotContext, rk, rl):
    """Single-copy factors T[e, h] = <e|rho_k|h><h|rho_l|e> and their stable
    differences from the equal-state reference."""
    r0 = ctx.r_theta
    dbk = rk - r0
    dbl = rl - r0
    t = {}
    t0 = {}
    dt = {}
    for e, h in _KEYS:
        a = e * ctx.r_hat
        c = h * ctx.r_hat
        t0[(e, h)] = _pauli_quartic(a, r0, c, r0)
        u0 = a + r0 + 1j * np.cross(a, r0)
        v0 = c + r0 + 1j * np.cross(c, r0)
        du = dbk + 1j * np.cross(a, dbk)
        dv = dbl + 1j * np.cross(c, dbl)
        lin = (1.0 + a @ r0) * (c @ dbl) + (a @ dbk) * (1.0 + c @ r0) + (a @ dbk) * (c @ dbl)
        quad = u0 @ dv + du @ v0 + du @ dv
        dt[(e, h)] = (lin + quad) / 8.0
        t[(e, h)] = t0[(e, h)] + dt[(e, h)]
    return t, t0, dt


def _power_table(x: complex, m: int) -> np.ndarray:
    out = np.empty(m + 1, dtype=complex)
    out[0] = 1.0
    for j in range(1, m + 1):
        out[j] = out[j - 1] * x
    return out


def _delta_sum(ctx: MShotContext, rk, rl) -> complex:
    """Sum over eigenvalue-pair classes of the telescoped product difference.

    Equals ``Tr{rho_k^(m) Omega(rho_l^(m))} - 1`` exactly: the subtracted unit
    is the same class sum evaluated with both shifted states replaced by the
    reference state.
    """
    m = ctx.m
    t, t0, dt = _transfer_factors(ctx, rk, rl)
    pows = {k: _power_table(t[k], m) for k in _KEYS}
    pows0 = {k: _power_table(t0[k], m) for k in _KEYS}
    # dpow[k][j] = t[k]^j - t0[k]^j, telescoped through the stable factor dt
    dpow = {}
    for k in _KEYS:
        col = np.empty(m + 1, dtype=complex)
        col[0] = 0.0
        for j in range(1, m + 1):
            col[j] = dt[k] * sum(pows[k][i] * pows0[k][j - 1 - i] for i in range(j))
        dpow[k] = col
    pp, pm = ctx.p_plus, ctx.p_minus
    pow_plus = _power_table(pp, m).real
    pow_minus = _power_table(pm, m).real
    total = 0.0 + 0.0j
    for a in range(m + 1):
        pe = pow_plus[a] * pow_minus[m - a]
        for b in range(m + 1):
            ph = pow_plus[b] * pow_minus[m - b]
            weight = 2.0 / (pe + ph)
            class_sum = 0.0 + 0.0j
            for n in range(max(0, a + b - m), min(a, b) + 1):
                alpha, beta, gamma = a - n, b - n, m - a - b + n
                mult = comb(m, n) * comb(m - n, alpha) * comb(m - a, beta)
                diff = (dpow[(1, 1)][n] * pows[(1, -1)][alpha] * pows[(-1, 1)][beta]
                        * pows[(-1, -1)][gamma]
                        + pows0[(1, 1)][n] * dpow[(1, -1)][alpha] * pows[(-1, 1)][beta]
                        * pows[(-1, -1)][gamma]
                        + pows0[(1, 1)][n] * pows0[(1, -1)][alpha] * dpow[(-1, 1)][beta]
                        * pows[(-1, -1)][gamma]
                        + pows0[(1, 1)][n] * pows0[(1, -1)][alpha] * pows0[(-1, 1)][beta]
                        * dpow[(-1, -1)][gamma])
                class_sum += mult * diff
            total += weight * class_sum
    return total


def qba_delta_mshot(ctx: MShotContext, lam_k: float, lam_l: float) -> float:
    """Shifted-state matrix entry minus its unit baseline, stable at small offsets."""
    rk = ctx.shifted_bloch(lam_k)
    rl = ctx.shifted_bloch(lam_l)
    total = _delta_sum(ctx, rk, rl)
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise NonRealEntryError(f"multi-copy entry has imaginary part {total.imag:.3e}")
    return float(total.real)


def qba_entry_mshot(ctx: MShotContext, lam_k: float, lam_l: float) -> float:
    """Entry ``Tr{rho(theta+lam_k)^(m) Omega(rho(theta+lam_l)^(m))}``.

    Symmetric in the two offsets and equal to 1 at zero offsets.  Validated
    against the dense tensor-product computation for small m.
    """
    return 1.0 + qba_delta_mshot(ctx, lam_k, lam_l)


def qbh11_mshot(ctx: MShotContext) -> float:
    """First derivative-derivative entry for m copies: additivity gives m times
    the single-copy value."""
    from .quantum import qubit_q_entry

    dr = ctx.model.bloch_derivative(ctx.theta, 1)
    return ctx.m * qubit_q_entry(0.0, dr, 0.0, dr, ctx.r_theta)


def qh_entry_mshot(ctx: MShotContext, lam_k: float) -> float:
    """Hybrid shifted-state/derivative entry for m copies (additive in m).

    Computed from the Bloch difference of the shifted state, which equals the
    direct single-copy entry because the reference state pairs to zero with
    any derivative row.
    """
    from .quantum import qubit_q_entry

    dvec = ctx.shifted_bloch(lam_k) - ctx.r_theta
    dr = ctx.model.bloch_derivative(ctx.theta, 1)
    return ctx.m * qubit_q_entry(0.0, dvec, 0.0, dr, ctx.r_theta)


def mshot_schur_matrix(ctx: MShotContext, offsets: Sequence[float], s: int) -> np.ndarray:
    """Rank-one-corrected information matrix for m qubit copies, s <= 1."""
    if s not in (0, 1):
        raise ValueError("multi-copy closed forms cover derivative order s <= 1")
    offsets = [float(o) for o in offsets]
    r = len(offsets)
    n = r + s
    out = np.empty((n, n))
    for i in range(r):
        for j in range(i, r):
            out[i, j] = out[j, i] = qba_delta_mshot(ctx, offsets[i], offsets[j])
    if s == 1:
        for i in range(r):
            out[i, r] = out[r, i] = qh_entry_mshot(ctx, offsets[i])
        out[r, r] = qbh11_mshot(ctx)
    return out
