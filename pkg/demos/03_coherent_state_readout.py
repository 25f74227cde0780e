"""Single-shot read-out, cloning and discrimination of coherent states.

With the two-arm circuit suppressing both measured variances, one homodyne
sample per arm reconstructs the unknown amplitude as (x + i p)/sqrt(2).
The estimator is unbiased with per-component variance V_M / 2; feeding the
estimate back into a displacement produces clones whose mean overlap
fidelity with the original is 1 / (1 + V_M).  Nearest-candidate
discrimination of non-orthogonal coherent states follows for free.
"""

from otcsim.experiments import (
    estimator_component_variance,
    predicted_cloning_fidelity,
    tomography_cloning,
)

ALPHA = 1.0 + 0.5j
SHOTS = 20000

print("true amplitude: %s, candidates for discrimination: %s vs %s" % (ALPHA, ALPHA, -ALPHA))
print()
print("  M  r    comp.var(pred)  comp.var(emp)   fidelity(pred)  fidelity(emp)   disc.error")
for m, r in ((1, 1.0), (3, 1.0), (3, 2.0), (5, 3.0)):
    table = tomography_cloning(alpha=ALPHA, r=r, iterations=m, shots=SHOTS, seed=11)
    row = dict(zip(table.columns, table.rows[0]))
    print("%3d  %-3g  %.6e    %.6e    %.6f        %.6f        %.2e"
          % (m, r, estimator_component_variance(m, r), row["var_est_re"],
             predicted_cloning_fidelity(m, r), row["mean_fidelity"], row["discrimination_error"]))
print()
table = tomography_cloning(alpha=ALPHA, r=3.0, iterations=5, shots=SHOTS, seed=11)
row = dict(zip(table.columns, table.rows[0]))
print("reconstructed amplitude at M=5, r=3: %.5f %+.5fi  (truth %s)"
      % (row["mean_est_re"], row["mean_est_im"], ALPHA))
print("every Monte-Carlo check within 5 standard errors:", table.all_passed())
