"""Gaussian states and the linear symplectic gate set.

A state of N bosonic modes is represented by the mean vector and covariance
matrix of the quadratures, ordered (X1, P1, ..., XN, PN), with

    X = a + a^dag,   P = -i (a - a^dag),

so the vacuum has unit variance in every quadrature and a coherent state of
amplitude alpha has mean (2 Re alpha, 2 Im alpha).  The rotated quadrature is
X(theta) = cos(theta) X + sin(theta) P, i.e. X(0) = X and X(pi/2) = P.

All operations are pure functions returning new states; the arrays inside a
``GaussianState`` are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# enforced / verified numerical tolerances
SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10
PHYSICALITY_TOL = 1e-9


def symplectic_form(num_modes: int) -> np.ndarray:
    """Return the 2N x 2N symplectic form Omega for (X1, P1, ..., XN, PN)."""
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.zeros((2 * num_modes, 2 * num_modes))
    for k in range(num_modes):
        omega[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = j
    return omega


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of an N-mode Gaussian state.

    Attributes
    ----------
    mean : ndarray
        Length-2N quadrature means, ordered (X1, P1, ..., XN, PN).
    cov : ndarray
        Real symmetric 2N x 2N covariance matrix; vacuum = identity.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size == 0 or mean.size % 2 != 0:
            raise ValueError("mean must be a vector of even positive length")
        if cov.shape != (mean.size, mean.size):
            raise ValueError("cov shape %s inconsistent with mean length %d" % (cov.shape, mean.size))
        if np.max(np.abs(cov - cov.T)) > 100 * SYMMETRY_TOL:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def num_modes(self) -> int:
        return self.mean.size // 2

    def mode_mean(self, mode: int) -> np.ndarray:
        """(mean X, mean P) of one mode."""
        _check_mode(self, mode)
        return self.mean[2 * mode : 2 * mode + 2]

    def mode_cov(self, mode: int) -> np.ndarray:
        """2x2 covariance block of one mode."""
        _check_mode(self, mode)
        return self.cov[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]

    def complex_amplitude(self, mode: int) -> complex:
        """Coherent amplitude <a> of one mode (mean / 2 in these units)."""
        mx, mp = self.mode_mean(mode)
        return 0.5 * (mx + 1j * mp)


def _check_mode(state: GaussianState, mode: int):
    if not 0 <= mode < state.num_modes:
        raise ValueError("mode %d out of range for %d-mode state" % (mode, state.num_modes))


# ---------------------------------------------------------------------------
# state constructors
# ---------------------------------------------------------------------------

def vacuum(num_modes: int) -> GaussianState:
    """N-mode vacuum: zero mean, identity covariance.

    Parameters
    ----------
    num_modes : int
        Number of modes, at least 1.
    """
    if num_modes < 1:
        raise ValueError("need at least one mode")
    return GaussianState(np.zeros(2 * num_modes), np.eye(2 * num_modes))


def coherent(alpha: complex) -> GaussianState:
    """Single-mode coherent state of amplitude alpha."""
    return displace(vacuum(1), 0, alpha)


# ---------------------------------------------------------------------------
# symplectic matrices
# ---------------------------------------------------------------------------

def rotation_matrix(theta: float) -> np.ndarray:
    """Single-mode phase rotation a -> e^{i theta} a as a 2x2 symplectic."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def squeeze_matrix(r: float, angle: float = 0.0) -> np.ndarray:
    """Single-mode squeezer reducing Var X(angle) to e^{-2r} on vacuum."""
    if not np.isfinite(r):
        raise ValueError("squeezing parameter must be finite")
    rot = rotation_matrix(angle)
    return rot @ np.diag([np.exp(-r), np.exp(r)]) @ rot.T


def beamsplitter_matrix(transmissivity: float) -> np.ndarray:
    """Two-mode beamsplitter, real orthogonal convention.

    Mode operators transform as a' = sqrt(t) a + sqrt(1-t) b and
    b' = sqrt(1-t) a - sqrt(t) b.  The matrix is symmetric and involutory,
    so the inverting beamsplitter of a sandwich circuit is the same element
    again.  At t = 1 the through port is the identity and the reflected
    port picks up a sign, which no variance or |mean| can see; at t = 1/2
    a coherent state splits into two equal positive-amplitude copies.
    Returns the 4x4 symplectic on (Xa, Pa, Xb, Pb).
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    ct = np.sqrt(transmissivity)
    st = np.sqrt(1.0 - transmissivity)
    return np.kron(np.array([[ct, st], [st, -ct]]), np.eye(2))


def realified(t_matrix: np.ndarray) -> np.ndarray:
    """Symplectic matrix of the passive map a_i -> sum_j T_ij a_j.

    T must be unitary; each complex entry becomes the 2x2 real block
    [[Re, -Im], [Im, Re]] acting on (X, P) pairs.
    """
    t = np.asarray(t_matrix, dtype=complex)
    n = t.shape[0]
    s = np.zeros((2 * n, 2 * n))
    s[0::2, 0::2] = t.real
    s[0::2, 1::2] = -t.imag
    s[1::2, 0::2] = t.imag
    s[1::2, 1::2] = t.real
    return s


def embed(local: np.ndarray, modes, num_modes: int) -> np.ndarray:
    """Embed a symplectic acting on `modes` into the full 2N x 2N space."""
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise ValueError("modes must be distinct")
    if any(not 0 <= m < num_modes for m in modes):
        raise ValueError("mode index out of range")
    full = np.eye(2 * num_modes)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    full[np.ix_(idx, idx)] = local
    return full


def is_symplectic(s: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    """Check S Omega S^T = Omega to the given tolerance."""
    n = s.shape[0] // 2
    omega = symplectic_form(n)
    return np.max(np.abs(s @ omega @ s.T - omega)) <= tol


# ---------------------------------------------------------------------------
# gate application
# ---------------------------------------------------------------------------

def apply_symplectic(state: GaussianState, s: np.ndarray, displacement=None) -> GaussianState:
    """Apply mean -> S mean + d, cov -> S cov S^T (symmetrized)."""
    mean = s @ state.mean
    if displacement is not None:
        mean = mean + displacement
    cov = s @ state.cov @ s.T
    return GaussianState(mean, 0.5 * (cov + cov.T))


def passive_transformation(state: GaussianState, t_matrix: np.ndarray) -> GaussianState:
    """Apply an N-mode passive map a_i -> sum_j T_ij a_j (T unitary)."""
    if t_matrix.shape != (state.num_modes, state.num_modes):
        raise ValueError("T matrix must be num_modes x num_modes")
    return apply_symplectic(state, realified(t_matrix))


def displace(state: GaussianState, mode: int, alpha: complex) -> GaussianState:
    """Displace one mode by alpha: mean shifts by (2 Re alpha, 2 Im alpha)."""
    _check_mode(state, mode)
    shift = np.zeros(2 * state.num_modes)
    shift[2 * mode] = 2.0 * np.real(alpha)
    shift[2 * mode + 1] = 2.0 * np.imag(alpha)
    return GaussianState(state.mean + shift, state.cov)


def rotate(state: GaussianState, mode: int, theta: float) -> GaussianState:
    """Phase-rotate one mode, a -> e^{i theta} a."""
    _check_mode(state, mode)
    s = embed(rotation_matrix(theta), [mode], state.num_modes)
    return apply_symplectic(state, s)


def squeeze(state: GaussianState, mode: int, r: float, angle: float = 0.0) -> GaussianState:
    """Squeeze one mode by r along the X(angle) quadrature.

    On vacuum, Var X(angle) becomes e^{-2r} and Var X(angle + pi/2)
    becomes e^{+2r}.
    """
    _check_mode(state, mode)
    s = embed(squeeze_matrix(r, angle), [mode], state.num_modes)
    return apply_symplectic(state, s)


def beamsplit(state: GaussianState, mode_a: int, mode_b: int, transmissivity: float) -> GaussianState:
    """Mix two modes on a beamsplitter of the given transmissivity."""
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise ValueError("beamsplitter needs two distinct modes")
    s = embed(beamsplitter_matrix(transmissivity), [mode_a, mode_b], state.num_modes)
    return apply_symplectic(state, s)


# ---------------------------------------------------------------------------
# statistics and measurement
# ---------------------------------------------------------------------------

def quad_stats(state: GaussianState, mode: int, theta: float = 0.0):
    """Mean and variance of the rotated quadrature X(theta) of one mode.

    Returns
    -------
    (float, float)
        <X(theta)> and Var X(theta).
    """
    _check_mode(state, mode)
    u = np.array([np.cos(theta), np.sin(theta)])
    mean = float(u @ state.mode_mean(mode))
    var = float(u @ state.mode_cov(mode) @ u)
    return mean, var


def homodyne_sample(state: GaussianState, mode: int, theta: float = 0.0, rng=None, size=None):
    """Sample homodyne outcomes of X(theta) on one mode.

    Draws from the normal distribution with the mean and variance of
    ``quad_stats``; the remaining modes are discarded, not conditioned.

    Parameters
    ----------
    rng : int or numpy.random.Generator
        Seed or generator; a fixed seed reproduces the sequence exactly.
    size : int, optional
        Number of samples; None returns a single float.
    """
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    mean, var = quad_stats(state, mode, theta)
    out = gen.normal(mean, np.sqrt(var), size=size)
    return float(out) if size is None else out


def mean_photon_number(state: GaussianState) -> float:
    """Total <a^dag a> summed over modes: tr(cov - I)/4 + |mean|^2/4."""
    return float(np.trace(state.cov - np.eye(2 * state.num_modes)) / 4.0 + state.mean @ state.mean / 4.0)


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def tensor(state_a: GaussianState, state_b: GaussianState) -> GaussianState:
    """Product state of A's modes followed by B's modes."""
    na, nb = 2 * state_a.num_modes, 2 * state_b.num_modes
    mean = np.concatenate([state_a.mean, state_b.mean])
    cov = np.zeros((na + nb, na + nb))
    cov[:na, :na] = state_a.cov
    cov[na:, na:] = state_b.cov
    return GaussianState(mean, cov)


def partial_trace(state: GaussianState, keep_modes) -> GaussianState:
    """Discard all modes not listed in `keep_modes`.

    The result's mode k is the input's keep_modes[k]; rows and columns of
    discarded modes are deleted, which is exact for Gaussian states.
    """
    keep = list(keep_modes)
    if len(keep) == 0:
        raise ValueError("must keep at least one mode")
    if len(set(keep)) != len(keep):
        raise ValueError("keep_modes must be distinct")
    for m in keep:
        _check_mode(state, m)
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in keep])
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


# ---------------------------------------------------------------------------
# physicality
# ---------------------------------------------------------------------------

def min_physicality_eig(state: GaussianState) -> float:
    """Smallest eigenvalue of cov + i Omega; >= -1e-9 for physical states."""
    omega = symplectic_form(state.num_modes)
    return float(np.linalg.eigvalsh(state.cov + 1j * omega)[0])


def is_physical(state: GaussianState, tol: float = PHYSICALITY_TOL) -> bool:
    """Uncertainty-principle check: cov + i Omega positive semidefinite."""
    return min_physicality_eig(state) >= -tol
