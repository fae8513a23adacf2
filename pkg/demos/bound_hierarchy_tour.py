"""Quick tour of the bound family on a single noisy qubit.

Covers: entropy to Bloch length, the lowest-order bound, the divergence-based
one-point bound and where its maximum sits, hybrid refinements, and how a
fixed measurement compares with the measurement-optimized value.

Run:  python demos/bound_hierarchy_tour.py
"""

import numpy as np

from qbound import (
    OptimizerConfig,
    POVM,
    QubitPhaseModel,
    bloch_to_density,
    chi2_divergence,
    entropy_to_bloch_length,
    hcrb_classical_sup,
    probabilities,
    qcrb,
    quantum_chi2,
    sup_over_testpoints,
)

cfg = OptimizerConfig(grid_points=1024, refine_iterations=50)

# --- states of different purity
print("entropy -> Bloch length:")
for s in (0.1, 0.3, 0.6, 0.69):
    print(f"  S = {s:.2f}  ->  r = {entropy_to_bloch_length(s):.4f}")

r = entropy_to_bloch_length(0.6)
model = QubitPhaseModel((0.0, r, 0.0))
print(f"\nworking state: r = {r:.4f}, lowest-order bound {qcrb(model, 0.0).value:.4f}")

# --- divergence between shifted states, and its small-offset limit
print("\nmeasurement-optimized divergence chi2(offset) and offset^2 * information:")
for lam in (0.1, 0.5, 1.5, np.pi):
    chi2 = quantum_chi2(model, 0.0, lam)
    print(f"  offset {lam:5.2f}: chi2 = {chi2:.6f}, objective offset^2/chi2 = {lam**2 / chi2:.4f}")
print(f"  (as the offset vanishes the objective approaches {qcrb(model, 0.0).value:.4f})")

# --- the hierarchy at this state
v01 = sup_over_testpoints(model, 0.0, 0, 1, cfg)
v10 = sup_over_testpoints(model, 0.0, 1, 0, cfg)
v11 = sup_over_testpoints(model, 0.0, 1, 1, cfg)
v20 = sup_over_testpoints(model, 0.0, 2, 0, cfg)
print("\nbound hierarchy (variance lower bounds, tighter is larger):")
print(f"  derivative only      (0,1): {v01.value:.4f}")
print(f"  one test point       (1,0): {v10.value:.4f}  argmax {v10.optimal_offsets}")
print(f"  two test points      (2,0): {v20.value:.4f}  argmax {np.round(v20.optimal_offsets, 4)}")
print(f"  hybrid               (1,1): {v11.value:.4f}  argmax {v11.optimal_offsets}")
print("\nThe two-point bound diverges on the full circle: offsets can straddle a")
print("2 pi rotation, where the same physical state would have to report two")
print("phases 2 pi apart.  No estimator is unbiased over the whole circle, so")
print("the bound is honest.  On a half-width interval it is finite:")

from qbound import Interval

half = QubitPhaseModel((0.0, r, 0.0), domain=Interval(-np.pi / 2, np.pi / 2))
v20_half = sup_over_testpoints(half, 0.0, 2, 0, cfg)
v10_half = sup_over_testpoints(half, 0.0, 1, 0, cfg)
print(f"  one test point  on (-pi/2, pi/2]: {v10_half.value:.4f}")
print(f"  two test points on (-pi/2, pi/2]: {v20_half.value:.4f}  "
      f"argmax {np.round(v20_half.optimal_offsets, 4)}")

# --- fixed measurements versus the optimized value
print("\none-point bound under fixed measurements (optimized value "
      f"{v10.value:.4f}):")
kets = [np.array([1.0, np.exp(2j * np.pi * k / 3)]) / np.sqrt(2) for k in range(3)]
trine = POVM(elements=tuple(2.0 / 3.0 * np.outer(k, k.conj()) for k in kets))
for name, povm in [("three-outcome trine", trine)]:
    res = hcrb_classical_sup(povm, model, 0.0, cfg)
    print(f"  {name}: {res.value:.4f}")
e1 = bloch_to_density((1.0, 0.0, 0.0))
x_axis = POVM(elements=(e1, np.eye(2) - e1))
pm0 = probabilities(x_axis, model.evaluate(0.0))
chi_edge = chi2_divergence(probabilities(x_axis, model.evaluate(np.pi)), pm0)
print(f"  x-axis projective: blind at the edge (chi2(pi) = {chi_edge:.2e}), "
      "so its full-offset supremum diverges")
