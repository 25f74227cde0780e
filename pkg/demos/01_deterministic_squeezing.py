"""Deterministic noise reduction from a single open timelike loop.

A coherent state and an X-squeezed ancilla meet on a balanced beamsplitter,
the signal rail traverses the loop (which severs its correlations with the
ancilla), and the beamsplitter is undone.  Without the loop the circuit is
the identity; with it, the output keeps its displacement but its X variance
drops to e^{-r} cosh r, below the vacuum for every r > 0.  A linear
phase-insensitive channel cannot do this.

The exact covariance engine and the brute-force Fock engine are run side by
side.
"""

import math

import numpy as np

from otcsim import Circuit, Beamsplitter, Displacement, OtcElement, Squeezer
from otcsim import run_circuit, vacuum, quad_stats
from otcsim import fock as fk

ALPHA = 1.0
R = 0.8

circuit = Circuit(2, [
    Displacement(0, ALPHA),
    Squeezer(1, R),
    Beamsplitter(0, 1, 0.5),
    OtcElement((0,)),
    Beamsplitter(0, 1, 0.5),
])

print("input: coherent alpha = %g, ancilla squeezing r = %g" % (ALPHA, R))
print("closed form: Var X = e^-r cosh r = %.10f" % (math.exp(-R) * math.cosh(R)))
print("             Var P = e^+r cosh r = %.10f" % (math.exp(R) * math.cosh(R)))
print()

out = run_circuit(circuit, vacuum(2))
mx, vx = quad_stats(out, 0, 0.0)
mp, vp = quad_stats(out, 0, np.pi / 2)
print("covariance engine: <X> = %.10f  Var X = %.10f" % (mx, vx))
print("                   <P> = %.10f  Var P = %.10f" % (mp, vp))
print("displacement preserved: amplitude %.12f (input %.12f)" % (0.5 * abs(mx + 1j * mp), ALPHA))
print()

print("running the Fock-space oracle at cutoff 40 ...")
fout = fk.run_circuit_fock(circuit, fk.fock_vacuum(2, 40))
fmx, fvx = fk.quad_stats_fock(fout, 0, 0.0)
_, fvp = fk.quad_stats_fock(fout, 0, np.pi / 2)
print("fock engine:       <X> = %.10f  Var X = %.10f  Var P = %.10f" % (fmx, fvx, fvp))
print("engine difference: %.2e (X), %.2e (P)" % (abs(vx - fvx), abs(vp - fvp)))
print()

# the same sandwich without the loop element undoes itself
no_loop = Circuit(2, [el for el in circuit.elements if not isinstance(el, OtcElement)])
idn = run_circuit(no_loop, vacuum(2))
print("without the loop element: Var X = %.12f (identity evolution)" % quad_stats(idn, 0, 0.0)[1])
