"""Nonlinear timelike-curve maps on Gaussian states.

An open timelike curve (OTC) with no interaction on the loop acts on the
traversing modes by severing every correlation between them and the rest of
the system: the joint state is replaced by the product of the two marginals.
Its chronology-respecting equivalent circuit swaps the traversing modes with
an identical, independently prepared copy of the state and discards the copy.

Replacing that swap by a beamsplitter of reflectivity xi interpolates
smoothly between the OTC (xi = 0) and ordinary quantum mechanics (xi = 1).
A bare symmetric beamsplitter would rotate the coherent amplitude, so each
traversing mode is followed by the compensating phase rotation that keeps
means fixed for every xi; see :func:`xi_pair_matrix`.
"""

from __future__ import annotations

import numpy as np

from .gaussian import GaussianState, partial_trace, passive_transformation, tensor


def otc_map(state: GaussianState, modes) -> GaussianState:
    """Decohere `modes` from the rest of the system.

    Means and the covariance blocks inside `modes` and inside the complement
    are untouched; every cross-covariance block between the two groups is set
    to exactly zero.  This is the Gaussian image of replacing the joint state
    by the product of its two marginals, so the map is idempotent and the
    output is physical whenever the input is.
    """
    modes = sorted(set(modes))
    if len(modes) == 0:
        raise ValueError("OTC needs at least one mode")
    if any(not 0 <= m < state.num_modes for m in modes):
        raise ValueError("mode index out of range")
    inside = np.zeros(2 * state.num_modes, dtype=bool)
    for m in modes:
        inside[2 * m : 2 * m + 2] = True
    cov = np.array(state.cov)
    cov[np.ix_(inside, ~inside)] = 0.0
    cov[np.ix_(~inside, inside)] = 0.0
    return GaussianState(state.mean, cov)


def xi_pair_matrix(xi: float) -> np.ndarray:
    """Mode/duplicate mixing for one traversing mode, as a 2x2 unitary.

    Row order is (mode, duplicate).  The symmetric beamsplitter
    a -> sqrt(xi) a + i sqrt(1-xi) a' is followed by the phase rotation
    -arctan(sqrt(1-xi)/sqrt(xi)) on the retained output (limit -pi/2 at
    xi = 0), so identical coherent means pass through unchanged: xi = 1 is
    the identity on the mode, xi = 0 routes the duplicate straight through.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    ct = np.sqrt(xi)
    st = np.sqrt(1.0 - xi)
    splitter = np.array([[ct, 1j * st], [1j * st, ct]])
    phase = np.exp(-1j * np.arctan2(st, ct))
    return np.diag([phase, 1.0]) @ splitter


def xi_map(state: GaussianState, modes, xi: float) -> GaussianState:
    """Partially decohere `modes` through a reflectivity-xi timelike loop.

    Implemented literally as the equivalent circuit: tensor the state with an
    identical independent copy, mix each traversing mode with its duplicate
    via :func:`xi_pair_matrix`, then trace the copy out.  xi = 0 reproduces
    :func:`otc_map`; xi = 1 is the identity; in between, cross-covariances to
    external modes shrink by sqrt(xi) while all means stay fixed.
    """
    modes = sorted(set(modes))
    if len(modes) == 0:
        raise ValueError("needs at least one mode")
    if any(not 0 <= m < state.num_modes for m in modes):
        raise ValueError("mode index out of range")
    n = state.num_modes
    pair = xi_pair_matrix(xi)
    t_full = np.eye(2 * n, dtype=complex)
    for m in modes:
        sel = np.array([m, n + m])
        t_full[np.ix_(sel, sel)] = pair
    doubled = passive_transformation(tensor(state, state), t_full)
    return partial_trace(doubled, range(n))
