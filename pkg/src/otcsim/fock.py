"""Truncated Fock-space density-matrix simulator.

Brute-force twin of the Gaussian engine: states are d^N x d^N density
matrices with d photon levels per mode, gates are explicit unitaries, and the
timelike-curve maps are built from their equivalent circuits.  Everything
here is convention-compatible with :mod:`otcsim.gaussian` (same quadrature
scaling, same beamsplitter sign), so the two engines can be compared
directly on means and variances.

Truncation is never silent: state constructors refuse to discard more than
``max_loss`` probability weight, and every :class:`FockState` carries the
weight discarded so far.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import circuits as _circuits
from .timelike import xi_pair_matrix

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-9
PREP_MAX_LOSS = 1e-6
LOSS_BUDGET = 1e-4
# largest Hilbert-space dimension for which the literal doubled-state
# constructions are materialized
DENSE_DOUBLE_LIMIT = 4200


class TruncationError(RuntimeError):
    """Raised when an operation would discard too much probability weight."""


@dataclass(frozen=True)
class FockState:
    """Density matrix of N modes truncated at `cutoff` photons per mode.

    Attributes
    ----------
    rho : ndarray
        Complex (cutoff**N, cutoff**N) density matrix, mode 0 being the most
        significant tensor factor.
    num_modes, cutoff : int
    discarded_weight : float
        Probability weight lost to truncation over the state's history.
    """

    rho: np.ndarray
    num_modes: int
    cutoff: int
    discarded_weight: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        dim = self.cutoff ** self.num_modes
        if self.cutoff < 2 or self.num_modes < 1:
            raise ValueError("need cutoff >= 2 and at least one mode")
        if rho.shape != (dim, dim):
            raise ValueError("rho shape %s inconsistent with %d modes at cutoff %d" % (rho.shape, self.num_modes, self.cutoff))
        skew = rho - rho.conj().T
        if np.abs(skew).max() > HERMITICITY_TOL:
            raise ValueError("rho is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
            raise ValueError("rho trace %.3e deviates from 1" % np.trace(rho).real)
        skew *= 0.5
        rho = rho - skew
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.cutoff ** self.num_modes


@dataclass(frozen=True)
class FockUnitary:
    """A unitary on the truncated space, with a human-readable label."""

    matrix: np.ndarray
    label: str = "custom"


def _matrix(u) -> np.ndarray:
    return u.matrix if isinstance(u, FockUnitary) else np.asarray(u)


def unitarity_defect(u) -> float:
    """max |U^dag U - I|; exponential-map gates are unitary to rounding."""
    m = _matrix(u)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def min_eigenvalue(state: FockState) -> float:
    """Smallest eigenvalue of rho; >= -1e-9 for valid states."""
    return float(np.linalg.eigvalsh(state.rho)[0])


# ---------------------------------------------------------------------------
# operators and state preparation
# ---------------------------------------------------------------------------

def destroy(cutoff: int) -> np.ndarray:
    """Annihilation operator on a single truncated mode."""
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)


def quadrature_operator(theta: float, cutoff: int) -> np.ndarray:
    """X(theta) = e^{-i theta} a + e^{i theta} a^dag (vacuum variance 1)."""
    a = destroy(cutoff)
    return np.exp(-1j * theta) * a + np.exp(1j * theta) * a.conj().T


def state_from_vector(psi: np.ndarray, num_modes: int, cutoff: int, discarded: float = 0.0) -> FockState:
    rho = np.outer(psi, psi.conj())
    return FockState(rho, num_modes, cutoff, discarded)


def fock_vacuum(num_modes: int, cutoff: int) -> FockState:
    psi = np.zeros(cutoff ** num_modes, dtype=complex)
    psi[0] = 1.0
    return state_from_vector(psi, num_modes, cutoff)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Number-basis amplitudes of |alpha>, unnormalized by truncation."""
    if alpha == 0:
        amps = np.zeros(cutoff, dtype=complex)
        amps[0] = 1.0
        return amps
    n = np.arange(cutoff)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))  # log(n!)
    return np.exp(-0.5 * abs(alpha) ** 2) * np.power(complex(alpha), n) / np.exp(0.5 * log_fact)


def coherent(alpha: complex, cutoff: int, max_loss: float = PREP_MAX_LOSS) -> FockState:
    """Coherent state |alpha> as a truncated density matrix.

    Raises :class:`TruncationError` if the cutoff would discard more than
    `max_loss` probability weight; the retained amplitudes are renormalized
    and the discarded weight recorded on the state.
    """
    amps = coherent_amplitudes(alpha, cutoff)
    kept = float(np.sum(np.abs(amps) ** 2))
    discarded = 1.0 - kept
    if discarded > max_loss:
        raise TruncationError(
            "coherent(alpha=%s) discards %.3e weight at cutoff %d (budget %.1e)" % (alpha, discarded, cutoff, max_loss)
        )
    return state_from_vector(amps / np.sqrt(kept), 1, cutoff, max(discarded, 0.0))


def squeezed_vac_amplitudes(r: float, cutoff: int, angle: float = 0.0) -> np.ndarray:
    """Number-basis amplitudes of squeezed vacuum (squeezed along X(angle))."""
    amps = np.zeros(cutoff, dtype=complex)
    amps[0] = 1.0 / np.sqrt(np.cosh(r))
    factor = -np.exp(2j * angle) * np.tanh(r)
    m = 0
    while 2 * (m + 1) <= cutoff - 1:
        # c_{2m+2}/c_{2m} = factor * sqrt((2m+1)(2m+2)) / (2(m+1))
        amps[2 * m + 2] = amps[2 * m] * factor * np.sqrt((2 * m + 1) * (2 * m + 2)) / (2 * (m + 1))
        m += 1
    return amps


def squeezed_vac(r: float, cutoff: int, angle: float = 0.0, max_loss: float = PREP_MAX_LOSS) -> FockState:
    """Squeezed vacuum with Var X(angle) = e^{-2r}, truncation-guarded."""
    amps = squeezed_vac_amplitudes(r, cutoff, angle)
    kept = float(np.sum(np.abs(amps) ** 2))
    discarded = 1.0 - kept
    if discarded > max_loss:
        raise TruncationError(
            "squeezed_vac(r=%.3g) discards %.3e weight at cutoff %d (budget %.1e)" % (r, discarded, cutoff, max_loss)
        )
    return state_from_vector(amps / np.sqrt(kept), 1, cutoff, max(discarded, 0.0))


# ---------------------------------------------------------------------------
# unitaries
# ---------------------------------------------------------------------------

_UNITARY_CACHE: dict = {}


def _expi_hermitian(h: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """exp(1j * sign * H) for Hermitian H via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * sign * w)) @ v.conj().T


def passive_unitary(t_matrix: np.ndarray, cutoff: int) -> FockUnitary:
    """Fock unitary realizing a_i -> sum_j T_ij a_j for unitary T.

    Built as exp(i sum_jk K_jk a_j^dag a_k) with K = -i log T, which is
    photon-number conserving and exactly unitary at any cutoff.  The
    generator is block diagonal in total photon number, so each block is
    exponentiated separately.  Results are cached by (T, cutoff).
    """
    t = np.asarray(t_matrix, dtype=complex)
    key = ("passive", cutoff, np.round(t, 12).tobytes())
    if key in _UNITARY_CACHE:
        return _UNITARY_CACHE[key]
    k_mat = -1j * scipy.linalg.logm(t)
    k_mat = 0.5 * (k_mat + k_mat.conj().T)
    num = t.shape[0]
    configs = np.indices([cutoff] * num).reshape(num, -1).T  # row c: occupation per mode
    totals = configs.sum(axis=1)
    # linear index of a configuration, mode 0 most significant
    weights = cutoff ** np.arange(num - 1, -1, -1)
    u = np.zeros((cutoff ** num,) * 2, dtype=complex)
    for total in range(int(totals.max()) + 1):
        members = np.nonzero(totals == total)[0]
        block_pos = {int(configs[g] @ weights): p for p, g in enumerate(members)}
        h = np.zeros((members.size, members.size), dtype=complex)
        for p, g in enumerate(members):
            occ = configs[g]
            h[p, p] = occ @ np.diag(k_mat).real
            for i in range(num):
                for j in range(num):
                    if i == j or k_mat[i, j] == 0 or occ[j] == 0 or occ[i] + 1 >= cutoff:
                        continue
                    shifted = occ.copy()
                    shifted[j] -= 1
                    shifted[i] += 1
                    q = block_pos[int(shifted @ weights)]
                    h[q, p] += k_mat[i, j] * np.sqrt(occ[j] * (occ[i] + 1))
        u[np.ix_(members, members)] = _expi_hermitian(0.5 * (h + h.conj().T))
    result = FockUnitary(u, "passive")
    _UNITARY_CACHE[key] = result
    return result


def displacement_unitary(alpha: complex, cutoff: int) -> FockUnitary:
    key = ("disp", cutoff, complex(alpha))
    if key not in _UNITARY_CACHE:
        a = destroy(cutoff)
        h = 1j * (alpha * a.conj().T - np.conj(alpha) * a)
        _UNITARY_CACHE[key] = FockUnitary(_expi_hermitian(h, sign=-1.0), "displacement")
    return _UNITARY_CACHE[key]


def squeeze_unitary(r: float, cutoff: int, angle: float = 0.0) -> FockUnitary:
    """Squeezer matching :func:`otcsim.gaussian.squeeze` (reduces Var X(angle))."""
    key = ("sq", cutoff, round(float(r), 14), round(float(angle), 14))
    if key not in _UNITARY_CACHE:
        a = destroy(cutoff)
        z = r * np.exp(2j * angle)
        gen = 0.5 * (np.conj(z) * (a @ a) - z * (a.conj().T @ a.conj().T))
        _UNITARY_CACHE[key] = FockUnitary(_expi_hermitian(1j * gen, sign=-1.0), "squeezer")
    return _UNITARY_CACHE[key]


def rotation_unitary(theta: float, cutoff: int) -> FockUnitary:
    return FockUnitary(np.diag(np.exp(1j * theta * np.arange(cutoff))).astype(complex), "rotation")


def beamsplitter_unitary(transmissivity: float, cutoff: int) -> FockUnitary:
    """Two-mode beamsplitter with the same real orthogonal convention as
    :func:`otcsim.gaussian.beamsplitter_matrix`."""
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    ct = np.sqrt(transmissivity)
    st = np.sqrt(1.0 - transmissivity)
    t = np.array([[ct, st], [st, -ct]], dtype=complex)
    return FockUnitary(passive_unitary(t, cutoff).matrix, "beamsplitter")


def swap_unitary(cutoff: int) -> FockUnitary:
    """Exact two-mode SWAP permutation |m, n> -> |n, m>."""
    d = cutoff
    u = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for n in range(d):
            u[n * d + m, m * d + n] = 1.0
    return FockUnitary(u, "swap")


# ---------------------------------------------------------------------------
# composition and index plumbing
# ---------------------------------------------------------------------------

def _perm_index(order, num_modes: int, cutoff: int) -> np.ndarray:
    """Linear-index table reordering tensor legs so leg k is old mode order[k]."""
    idx = np.arange(cutoff ** num_modes).reshape([cutoff] * num_modes)
    return idx.transpose(order).ravel()


def permute_modes(state: FockState, order) -> FockState:
    """Reorder modes so that new mode k is the input's order[k]."""
    order = list(order)
    if sorted(order) != list(range(state.num_modes)):
        raise ValueError("order must be a permutation of all modes")
    idx = _perm_index(order, state.num_modes, state.cutoff)
    return FockState(state.rho[np.ix_(idx, idx)], state.num_modes, state.cutoff, state.discarded_weight)


def tensor_fock(state_a: FockState, state_b: FockState) -> FockState:
    if state_a.cutoff != state_b.cutoff:
        raise ValueError("cutoffs must match")
    return FockState(
        np.kron(state_a.rho, state_b.rho),
        state_a.num_modes + state_b.num_modes,
        state_a.cutoff,
        state_a.discarded_weight + state_b.discarded_weight,
    )


def partial_trace_fock(state: FockState, keep_modes) -> FockState:
    """Trace out all modes not in `keep_modes` (result ordered as given)."""
    keep = list(keep_modes)
    if len(keep) == 0 or len(set(keep)) != len(keep):
        raise ValueError("keep_modes must be a nonempty set of distinct modes")
    rest = [m for m in range(state.num_modes) if m not in keep]
    moved = permute_modes(state, keep + rest) if keep + rest != list(range(state.num_modes)) else state
    dk = state.cutoff ** len(keep)
    dr = state.cutoff ** len(rest)
    rho = moved.rho.reshape(dk, dr, dk, dr)
    reduced = np.einsum("arbr->ab", rho)
    return FockState(reduced, len(keep), state.cutoff, state.discarded_weight)


def embed_unitary(u, modes, num_modes: int, cutoff: int) -> FockUnitary:
    """Extend a unitary on `modes` to the full N-mode space."""
    m = _matrix(u)
    modes = list(modes)
    rest = [k for k in range(num_modes) if k not in modes]
    if not rest:
        full = m if modes == list(range(num_modes)) else np.asarray(m)
    else:
        full = np.kron(m, np.eye(cutoff ** len(rest)))
    if modes + rest == list(range(num_modes)):
        return FockUnitary(full, "embedded")
    idx = _perm_index(modes + rest, num_modes, cutoff)
    out = np.empty_like(full)
    out[np.ix_(idx, idx)] = full
    return FockUnitary(out, "embedded")


def apply_unitary(state: FockState, u, modes=None) -> FockState:
    """Conjugate the state by a unitary, optionally embedded on `modes`."""
    m = _matrix(u)
    if modes is not None and m.shape[0] != state.dim:
        m = embed_unitary(m, modes, state.num_modes, state.cutoff).matrix
    if m.shape[0] != state.dim:
        raise ValueError("unitary dimension %d does not match state dimension %d" % (m.shape[0], state.dim))
    rho = m @ state.rho @ m.conj().T
    tr = np.trace(rho).real
    rho *= 1.0 / tr
    return FockState(rho, state.num_modes, state.cutoff, state.discarded_weight + max(1.0 - tr, 0.0))


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def expectation(state: FockState, op: np.ndarray) -> complex:
    return complex(np.trace(state.rho @ op))


def quad_stats_fock(state: FockState, mode: int, theta: float = 0.0):
    """Mean and variance of X(theta) on one mode.

    Warns if the top two photon levels of that mode hold more than 1e-6
    population, since the second moment then carries truncation error.
    """
    reduced = partial_trace_fock(state, [mode]) if state.num_modes > 1 else state
    pops = np.diag(reduced.rho).real
    if pops[-2:].sum() > 1e-6:
        warnings.warn("population %.2e in top photon levels; quadrature variance may be truncated" % pops[-2:].sum())
    x = quadrature_operator(theta, state.cutoff)
    m = expectation(reduced, x).real
    m2 = expectation(reduced, x @ x).real
    return float(m), float(m2 - m * m)


def top_level_population(state: FockState, levels: int = 2) -> float:
    """Largest per-mode population of the top `levels` photon numbers.

    Gates on the truncated space are exactly unitary, so weight piling up at
    the cutoff (rather than a trace deficit) is the signature of an
    under-resolved simulation.
    """
    worst = 0.0
    for mode in range(state.num_modes):
        reduced = partial_trace_fock(state, [mode]) if state.num_modes > 1 else state
        worst = max(worst, float(np.diag(reduced.rho).real[-levels:].sum()))
    return worst


def mean_photon_fock(state: FockState) -> float:
    """Total photon number summed over modes."""
    n_op = np.diag(np.arange(state.cutoff).astype(float))
    total = 0.0
    for mode in range(state.num_modes):
        reduced = partial_trace_fock(state, [mode]) if state.num_modes > 1 else state
        total += expectation(reduced, n_op.astype(complex)).real
    return float(total)


def pure_state_fidelity(state: FockState, amplitudes: np.ndarray) -> float:
    """<psi|rho|psi> against a pure state given by its amplitude vector."""
    psi = np.asarray(amplitudes, dtype=complex)
    return float((psi.conj() @ state.rho @ psi).real)


# ---------------------------------------------------------------------------
# timelike-curve maps
# ---------------------------------------------------------------------------

def _marginal_product(state: FockState, modes) -> FockState:
    modes = sorted(modes)
    rest = [m for m in range(state.num_modes) if m not in modes]
    inside = partial_trace_fock(state, modes)
    if not rest:
        return inside
    outside = partial_trace_fock(state, rest)
    product = tensor_fock(inside, outside)
    # product currently ordered modes + rest; restore original positions
    current = modes + rest
    order = [current.index(k) for k in range(state.num_modes)]
    return permute_modes(product, order)


def _otc_circuit_construction(state: FockState, modes) -> FockState:
    n, d = state.num_modes, state.cutoff
    if d ** (2 * n) > DENSE_DOUBLE_LIMIT:
        raise TruncationError("doubled space dimension %d too large for the dense construction" % d ** (2 * n))
    doubled = tensor_fock(state, state)
    order = list(range(2 * n))
    for m in modes:
        order[m], order[n + m] = order[n + m], order[m]
    swapped = permute_modes(doubled, order)
    return partial_trace_fock(swapped, list(range(n)))


def otc_map_fock(state: FockState, modes, method: str = "auto") -> FockState:
    """Open-timelike-curve decoherence of `modes` from everything else.

    method="circuit" runs the literal equivalent circuit (duplicate the
    state, swap the traversing modes with their duplicates, trace the copy
    out) and verifies it against the product of marginals; "marginals"
    builds the product directly; "auto" picks the circuit whenever the
    doubled space fits in memory.
    """
    modes = sorted(set(modes))
    if len(modes) == 0:
        raise ValueError("OTC needs at least one mode")
    if any(not 0 <= m < state.num_modes for m in modes):
        raise ValueError("mode index out of range")
    direct = _marginal_product(state, modes)
    if method == "marginals":
        return direct
    feasible = state.cutoff ** (2 * state.num_modes) <= DENSE_DOUBLE_LIMIT
    if method == "circuit" or (method == "auto" and feasible):
        via_circuit = _otc_circuit_construction(state, modes)
        if np.max(np.abs(via_circuit.rho - direct.rho)) > 1e-10:
            raise RuntimeError("equivalent-circuit and marginal-product constructions disagree")
        return via_circuit
    if method == "auto":
        return direct
    raise ValueError("unknown method %r" % (method,))


def _pair_unitary(modes_count: int, xi: float, cutoff: int) -> np.ndarray:
    """Mixing of k traversing modes with their k duplicates, legs (A, A').

    The endpoints are represented exactly: xi = 1 is the identity and xi = 0
    is the block swap permutation (the phase it would leave on the discarded
    copy cannot survive the partial trace).  Interior values exponentiate the
    truncated quadratic generator, which is exact on photon-number blocks
    below the cutoff.
    """
    dim = cutoff ** (2 * modes_count)
    if xi == 1.0:
        return np.eye(dim, dtype=complex)
    if xi == 0.0:
        order = list(range(modes_count, 2 * modes_count)) + list(range(modes_count))
        return np.eye(dim, dtype=complex)[_perm_index(order, 2 * modes_count, cutoff)]
    pair = xi_pair_matrix(xi)
    t = np.eye(2 * modes_count, dtype=complex)
    for j in range(modes_count):
        sel = np.array([j, modes_count + j])
        t[np.ix_(sel, sel)] = pair
    return passive_unitary(t, cutoff).matrix if modes_count > 1 else passive_unitary(pair, cutoff).matrix


def _xi_map_dense(state: FockState, modes, xi: float) -> FockState:
    n, d = state.num_modes, state.cutoff
    if d ** (2 * n) > DENSE_DOUBLE_LIMIT:
        raise TruncationError("doubled space dimension %d too large for the dense construction" % d ** (2 * n))
    doubled = tensor_fock(state, state)
    u = _pair_unitary(1, xi, d)
    for m in modes:
        doubled = apply_unitary(doubled, u, modes=[m, n + m])
    return partial_trace_fock(doubled, list(range(n)))


def _xi_map_contracted(state: FockState, modes, xi: float) -> FockState:
    """Doubled-circuit map evaluated by tensor contraction.

    The duplicate's non-traversing modes trace out untouched, so the copy
    enters only through its marginal on the traversing block; contracting in
    that order never materializes the doubled density matrix.
    """
    n, d = state.num_modes, state.cutoff
    k = len(modes)
    rest = [m for m in range(n) if m not in modes]
    da, db = d ** k, d ** len(rest)
    moved = permute_modes(state, modes + rest) if modes + rest != list(range(n)) else state
    sigma = partial_trace_fock(state, modes).rho
    u4 = _pair_unitary(k, xi, d).reshape(da, da, da, da)  # legs (x, y, a, c)
    w = np.tensordot(u4, sigma, axes=([3], [0]))  # (x, y, a, C)
    w_mat = w.transpose(0, 2, 1, 3).reshape(da * da, da * da)
    v_mat = u4.conj().transpose(0, 2, 1, 3).reshape(da * da, da * da)
    kernel = (w_mat @ v_mat.T).reshape(da, da, da, da)  # (x, a, X, A)
    rho_blocks = moved.rho.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    out = (kernel.transpose(0, 2, 1, 3).reshape(da * da, da * da) @ rho_blocks).reshape(da, da, db, db)
    rho_out = out.transpose(0, 2, 1, 3).reshape(da * db, da * db)
    rho_out = 0.5 * (rho_out + rho_out.conj().T)
    rho_out = rho_out / np.trace(rho_out).real
    result = FockState(rho_out, n, d, state.discarded_weight)
    if modes + rest != list(range(n)):
        current = modes + rest
        result = permute_modes(result, [current.index(m) for m in range(n)])
    return result


def xi_map_fock(state: FockState, modes, xi: float, method: str = "auto") -> FockState:
    """Reflectivity-xi timelike loop on `modes` (Fock-space twin of
    :func:`otcsim.timelike.xi_map`).

    method="dense" materializes the doubled state (small dimensions only);
    "contracted" evaluates the identical circuit by tensor contraction and
    scales to oracle-grade cutoffs; "auto" prefers dense when it fits.
    Both represent the xi = 0 swap and xi = 1 identity exactly; interior
    values are truncation-exact only below the photon cutoff.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError("xi must lie in [0, 1]")
    modes = sorted(set(modes))
    if len(modes) == 0:
        raise ValueError("needs at least one mode")
    if any(not 0 <= m < state.num_modes for m in modes):
        raise ValueError("mode index out of range")
    if method == "dense":
        return _xi_map_dense(state, modes, xi)
    if method == "contracted":
        return _xi_map_contracted(state, modes, xi)
    if method == "auto":
        if state.cutoff ** (2 * state.num_modes) <= DENSE_DOUBLE_LIMIT:
            return _xi_map_dense(state, modes, xi)
        return _xi_map_contracted(state, modes, xi)
    raise ValueError("unknown method %r" % (method,))


# ---------------------------------------------------------------------------
# Deutsch fixed-point solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointResult:
    rho_ctc: np.ndarray
    rho_out: np.ndarray
    residual: float
    iterations: int
    converged: bool


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def _consistency_map(u: np.ndarray, rho_in: np.ndarray, sigma: np.ndarray, d_sys: int, d_ctc: int) -> np.ndarray:
    """One round trip of the loop state: trace the emitted system out."""
    w = u @ np.kron(rho_in, sigma) @ u.conj().T
    return np.einsum("abac->bc", w.reshape(d_sys, d_ctc, d_sys, d_ctc))


def _output_map(u: np.ndarray, rho_in: np.ndarray, sigma: np.ndarray, d_sys: int, d_ctc: int) -> np.ndarray:
    w = u @ np.kron(rho_in, sigma) @ u.conj().T
    return np.einsum("abcb->ac", w.reshape(d_sys, d_ctc, d_sys, d_ctc))


def deutsch_fixed_point(u, rho_in, tol: float = 1e-12, max_iter: int = 10000, start=None) -> FixedPointResult:
    """Solve the timelike-curve consistency condition for the loop state.

    The interaction `u` acts on (system ⊗ loop); the loop's density matrix
    must be a fixed point of the map that feeds the system in, applies `u`
    and traces the emitted system out.  Iteration starts from the maximally
    mixed state (overridable via `start`); if the plain iteration's residual
    is non-monotone over a trailing window, a running average of the
    iterates is tracked as well (it converges for every unitary, the map
    being linear and trace preserving) and the best candidate wins.

    Returns the loop state, the emitted output state, the achieved trace-norm
    residual and the iteration count; `converged` is False if `max_iter` was
    exhausted, in which case the lowest-residual candidate is returned.
    """
    u = _matrix(u)
    rho_in = np.asarray(rho_in, dtype=complex)
    d_sys = rho_in.shape[0]
    if u.shape[0] % d_sys != 0:
        raise ValueError("unitary dimension %d is not a multiple of the input dimension %d" % (u.shape[0], d_sys))
    d_ctc = u.shape[0] // d_sys
    if tol <= 0:
        raise ValueError("tol must be positive")
    sigma = np.eye(d_ctc, dtype=complex) / d_ctc if start is None else np.asarray(start, dtype=complex)

    def residual_of(s):
        return trace_norm(_consistency_map(u, rho_in, s, d_sys, d_ctc) - s)

    best_sigma, best_res = sigma, residual_of(sigma)
    window: list = []
    avg = None
    count = 0
    iterations = 0
    while best_res > tol and iterations < max_iter:
        iterations += 1
        sigma = _consistency_map(u, rho_in, sigma, d_sys, d_ctc)
        res = residual_of(sigma)
        if res < best_res:
            best_sigma, best_res = sigma, res
        window.append(res)
        engaged_now = False
        if len(window) > 8:
            window.pop(0)
            # oscillating or stalled orbits make no sustained progress over
            # the window; switch to averaging consecutive iterates, whose
            # residual telescopes to |sigma_{k+n} - sigma_k| / n
            if avg is None and window[-1] >= 0.9 * window[0]:
                avg, count = sigma, 1
                engaged_now = True
        if avg is not None and not engaged_now:
            avg = (avg * count + sigma) / (count + 1)
            count += 1
            avg = avg / np.trace(avg).real
            res_avg = residual_of(avg)
            if res_avg < best_res:
                best_sigma, best_res = avg, res_avg
    rho_ctc = 0.5 * (best_sigma + best_sigma.conj().T)
    rho_out = _output_map(u, rho_in, rho_ctc, d_sys, d_ctc)
    rho_out = 0.5 * (rho_out + rho_out.conj().T)
    return FixedPointResult(rho_ctc, rho_out, best_res, iterations, best_res <= tol)


def deutsch_channel(state: FockState, mode: int, u, tol: float = 1e-12, max_iter: int = 10000) -> FockState:
    """Send one mode of a joint state through a timelike curve with
    interaction `u` on (mode ⊗ loop).

    The consistency condition constrains only the reduced state of the
    traversing mode, so correlations to the other modes are severed: the
    result is (emitted state) ⊗ (marginal of the rest).  With `u` = SWAP or
    any non-interacting unitary this reproduces :func:`otc_map_fock`.
    """
    if not 0 <= mode < state.num_modes:
        raise ValueError("mode index out of range")
    reduced = partial_trace_fock(state, [mode])
    solution = deutsch_fixed_point(u, reduced.rho, tol=tol, max_iter=max_iter)
    if not solution.converged:
        raise RuntimeError("fixed-point iteration did not converge (residual %.3e)" % solution.residual)
    out = FockState(solution.rho_out / np.trace(solution.rho_out).real, 1, state.cutoff, state.discarded_weight)
    rest = [m for m in range(state.num_modes) if m != mode]
    if not rest:
        return out
    product = tensor_fock(out, partial_trace_fock(state, rest))
    current = [mode] + rest
    return permute_modes(product, [current.index(m) for m in range(state.num_modes)])


# ---------------------------------------------------------------------------
# circuit execution
# ---------------------------------------------------------------------------

def run_circuit_fock(circuit, state: FockState, loss_budget: float = LOSS_BUDGET) -> FockState:
    """Apply a :class:`otcsim.circuits.Circuit` on the Fock engine."""
    if state.num_modes != circuit.num_modes:
        raise ValueError("state has %d modes, circuit expects %d" % (state.num_modes, circuit.num_modes))
    d = state.cutoff
    for el in circuit.elements:
        if isinstance(el, _circuits.Displacement):
            state = apply_unitary(state, displacement_unitary(el.alpha, d), modes=[el.mode])
        elif isinstance(el, _circuits.Rotation):
            state = apply_unitary(state, rotation_unitary(el.angle, d), modes=[el.mode])
        elif isinstance(el, _circuits.Squeezer):
            state = apply_unitary(state, squeeze_unitary(el.r, d, el.angle), modes=[el.mode])
        elif isinstance(el, _circuits.Beamsplitter):
            state = apply_unitary(state, beamsplitter_unitary(el.transmissivity, d), modes=[el.mode_a, el.mode_b])
        elif isinstance(el, _circuits.OtcElement):
            if el.xi == 0.0:
                state = otc_map_fock(state, el.modes)
            else:
                state = xi_map_fock(state, el.modes, el.xi)
        else:
            raise TypeError("unknown circuit element %r" % (el,))
        overflow = max(state.discarded_weight, top_level_population(state))
        if overflow > loss_budget:
            raise TruncationError(
                "truncation overflow %.3e after %r exceeds budget %.1e" % (overflow, el, loss_budget)
            )
    return state
