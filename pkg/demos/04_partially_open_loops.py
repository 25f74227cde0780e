"""Interpolating between a timelike loop and ordinary quantum mechanics.

Replacing the loop's swap with a beamsplitter of reflectivity xi gives a
family of maps: xi = 0 is the fully decohering loop, xi = 1 is ordinary
evolution, and the interpolation is smooth.  Physically xi is set by how
well the detectors could resolve the clock delay dt picked up on the loop:
for Gaussian temporal envelopes of width sigma the normalized overlap is
exp(-dt^2 / 4 sigma^2).  Delays short against the coherence time are
invisible (xi ~ 1); long delays expose the loop (xi ~ 0).
"""

import numpy as np

from otcsim import WavePacket, xi_overlap
from otcsim.experiments import single_pass_variances, xi_sweep, overlap_experiment

R = 1.0

print("loop reflectivity sweep (r = %g):" % R)
table = xi_sweep(alpha=1.0, r=R, xis=np.linspace(0, 1, 9))
print("  xi      Var X       Var P       <X>")
for row in table.rows:
    print("  %.3f   %.6f   %.6f   %.6f" % (row[0], row[3], row[4], row[1]))
full_loop, _ = single_pass_variances(R)
print("endpoints: full loop Var X = %.6f, ordinary theory Var X = 1" % full_loop)
print()

SIGMA = 1.0
print("detector-resolution chain (envelope width sigma = %g):" % SIGMA)
packet = WavePacket(0.0, SIGMA)
table = overlap_experiment(sigma=SIGMA, delta_ts=[0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 20.0], r=R)
print("  delay/sigma   xi            Var X")
for row in table.rows:
    print("  %-11g   %.6e   %.6f" % (row[0] / SIGMA, row[1], row[2]))
print()
print("closed form check at dt = sigma: overlap = %.12f, exp(-1/4) = %.12f"
      % (xi_overlap(packet, packet, SIGMA), np.exp(-0.25)))
