"""Sampling-based verification of bounds and estimators.

Outcome counts are drawn from a counter-based generator (Philox) so that runs
are reproducible across platforms; estimator statistics are compared against
the analytic bound by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import POVM, ProbabilityModel, probabilities
from .errors import DegenerateLikelihoodError
from .models import StateFamily

RNG_ALGORITHM = "philox4x64"


@dataclass(frozen=True)
class SampleRun:
    """Multinomial outcome counts for one measurement setting."""

    seed: int
    n_samples: int
    outcomes: np.ndarray
    theta_true: float

    def __post_init__(self):
        if int(self.outcomes.sum()) != self.n_samples:
            raise ValueError("outcome counts do not sum to n_samples")


def sample(povm: POVM, rho_theta, n_samples: int, seed: int,
           theta_true: float = 0.0) -> SampleRun:
    """Draw outcome counts from the Born distribution of ``povm`` on ``rho_theta``."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    pm = probabilities(povm, rho_theta)
    p = pm.probabilities / pm.probabilities.sum()
    rng = np.random.Generator(np.random.Philox(seed))
    counts = rng.multinomial(int(n_samples), p)
    return SampleRun(seed=int(seed), n_samples=int(n_samples),
                     outcomes=counts, theta_true=float(theta_true))


def evaluate_estimator(run: SampleRun, estimator_values) -> tuple:
    """Sample mean and unbiased sample variance of per-outcome estimator values."""
    values = np.asarray(estimator_values, dtype=float)
    counts = run.outcomes.astype(float)
    n = counts.sum()
    if n < 2:
        raise ValueError("need at least 2 samples for the unbiased variance")
    mean = float(counts @ values) / n
    var = float(counts @ (values - mean) ** 2) / (n - 1.0)
    return mean, var


def exact_moments(pm: ProbabilityModel, estimator_values) -> tuple:
    """Population mean and variance of the estimator under exact probabilities."""
    values = np.asarray(estimator_values, dtype=float)
    p = pm.probabilities
    mean = float(p @ values)
    var = float(p @ (values - mean) ** 2)
    return mean, var


def variance_standard_error(pm: ProbabilityModel, estimator_values, n_samples: int) -> float:
    """Standard error of the unbiased sample variance, from exact moments.

    Uses the exact iid expression ``mu4/n - sigma^4 (n-3)/(n (n-1))``, whose
    second term matters when the centered fourth moment nearly equals the
    squared variance (e.g. two equiprobable outcomes with opposite values).
    """
    n = int(n_samples)
    if n < 2:
        raise ValueError("need at least 2 samples")
    values = np.asarray(estimator_values, dtype=float)
    p = pm.probabilities
    mean = float(p @ values)
    centered = values - mean
    mu2 = float(p @ centered ** 2)
    mu4 = float(p @ centered ** 4)
    var_s2 = mu4 / n - mu2 ** 2 * (n - 3) / (n * (n - 1))
    return float(np.sqrt(max(var_s2, 0.0)))


def grid_mle(run: SampleRun, povm: POVM, family: StateFamily, theta_grid) -> float:
    """Maximum-likelihood phase on a grid; ties go to the smallest magnitude.

    Diagnostic only: the estimate is biased at small sample sizes and is
    never compared against the bounds as an assertion.
    """
    grid = np.asarray(theta_grid, dtype=float)
    counts = run.outcomes.astype(float)
    scores = np.empty(grid.size)
    for i, th in enumerate(grid):
        p = probabilities(povm, family.evaluate(float(th))).probabilities
        with np.errstate(divide="ignore"):
            logp = np.where(p > 0.0, np.log(np.where(p > 0.0, p, 1.0)), -np.inf)
        terms = np.where(counts > 0.0, counts * logp, 0.0)
        scores[i] = terms.sum()
    best = scores.max()
    if bool(np.all(scores == best)) and grid.size > 1:
        raise DegenerateLikelihoodError("all grid points have identical likelihood")
    ties = grid[scores == best]
    order = np.lexsort((ties, np.abs(ties)))
    return float(ties[order[0]])
