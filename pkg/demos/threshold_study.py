"""Few-copy threshold study for a noisy qubit.

A qubit with entropy 0.6 is rotated about z; we compare the lowest-order
variance bound with its one-test-point and hybrid refinements for m = 1..7
independent copies, normalized by the lowest-order value.  Below three copies
the refined bounds are maximized at the edge of the phase interval and exceed
the lowest-order bound; with more data they fall back to it.

Run:  python demos/threshold_study.py [output.csv]
"""

import sys

import numpy as np

from qbound import (
    OptimizerConfig,
    QubitPhaseModel,
    abel_bound_at_offsets,
    entropy_to_bloch_length,
    qcrb,
    sup_over_testpoints,
)

# --- the study state: entropy 0.6 nats, rotating in the equatorial plane
entropy = 0.6
r = entropy_to_bloch_length(entropy)
model = QubitPhaseModel((0.0, r, 0.0))
print(f"entropy {entropy} nats  ->  Bloch length r = {r:.6f}, "
      f"single-copy information r^2 = {r**2:.6f}\n")

cfg = OptimizerConfig(grid_points=1024, refine_iterations=50)

# --- sweep the number of copies
print(f"{'m':>2}  {'lowest order':>13}  {'one point/lowest':>17}  "
      f"{'hybrid/lowest':>14}  {'argmax':>7}  {'edge/lowest':>12}")
rows = []
for m in range(1, 8):
    base = qcrb(model, 0.0, m)
    one_point = sup_over_testpoints(model, 0.0, 1, 0, cfg, m=m)
    hybrid = sup_over_testpoints(model, 0.0, 1, 1, cfg, m=m)
    edge = abel_bound_at_offsets(model, 0.0, [np.pi], 0, m=m)
    argmax = "0 (lim)" if one_point.attained_at_limit else f"{one_point.optimal_offsets[0]:.3f}"
    print(f"{m:>2}  {base.value:>13.6f}  {one_point.value / base.value:>17.6f}  "
          f"{hybrid.value / base.value:>14.6f}  {argmax:>7}  {edge.value / base.value:>12.6f}")
    rows.append((m, base.value, one_point.value, hybrid.value, edge.value,
                 one_point.attained_at_limit))

print("\nBelow m = 3 the one-point bound is maximized at the interval edge and")
print("exceeds the lowest-order bound; from m = 3 on, its supremum is the")
print("vanishing-offset limit and the two coincide.  The hybrid bound keeps its")
print("maximum at the edge for every m and approaches the lowest order from above.")

if len(sys.argv) > 1:
    path = sys.argv[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("m,lowest_order,one_point,hybrid,edge_value,one_point_at_limit\n")
        for m, base, one, hyb, edge, lim in rows:
            fh.write(f"{m},{base:.17g},{one:.17g},{hyb:.17g},{edge:.17g},"
                     f"{'true' if lim else 'false'}\n")
    print(f"\nwrote {path}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ms = [row[0] for row in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(ms, [row[2] / row[1] for row in rows], "o-", label="one test point")
    ax.plot(ms, [row[3] / row[1] for row in rows], "s-", label="hybrid (1,1)")
    ax.axhline(1.0, color="k", lw=0.8, label="lowest order")
    ax.set_xlabel("independent copies m")
    ax.set_ylabel("bound / lowest order")
    ax.legend()
    fig.tight_layout()
    fig.savefig("threshold_study.png", dpi=150)
    print("wrote threshold_study.png")
except ImportError:
    pass
