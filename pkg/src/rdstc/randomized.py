"""The relay's randomized matrix: initialisation, MMSE design and ARMO adaptation.

``R`` is ``N x N``; the stacked relay observation sees ``R_eq = block_diag(R, ..., R)``
with ``T`` copies. ARMO gradients are taken with respect to ``R_eq`` and mapped
back to ``R`` by averaging the diagonal blocks (the tied-block chain rule up to
the factor ``T``, which the step size absorbs).
"""

from dataclasses import dataclass, replace

import numpy as np

from rdstc.errors import DivergenceError, InvalidInputError
from rdstc.numerics import hermitian, solve_hermitian
from rdstc.phy import expand_randomized

__all__ = [
    "INIT_KINDS",
    "ArmoState",
    "RandomizedMatrix",
    "armo_gradient",
    "armo_gradient_full",
    "armo_step",
    "expand_block_diag",
    "feedback_to_relay",
    "init_randomized",
    "instantaneous_cost",
    "mmse_randomized_closed_form",
    "project_block_diag",
    "relay_correlations",
]

INIT_KINDS = ("identity", "phase-diagonal", "random-unitary")
LOADING = 1e-10


@dataclass(frozen=True)
class RandomizedMatrix:
    R: np.ndarray
    T: int = 2

    @property
    def N(self):
        return self.R.shape[-1]

    @property
    def R_eq(self):
        return expand_block_diag(self.R, self.T)


@dataclass(frozen=True)
class ArmoState:
    """Adaptation state; ``last_error_norm`` is ``||e||`` of the latest update."""

    R: RandomizedMatrix
    mu: float = 0.01
    iteration: int = 0
    last_error_norm: float = float("nan")

    def __post_init__(self):
        if not self.mu >= 0:
            raise InvalidInputError("step size must be nonnegative")


def expand_block_diag(R, T):
    R = np.asarray(R)
    if R.shape[-1] != R.shape[-2]:
        raise InvalidInputError("randomized matrix must be square")
    return expand_randomized(R, T)


def project_block_diag(M, n):
    """Average the ``T`` diagonal ``n x n`` blocks of ``M``."""
    M = np.asarray(M)
    T = M.shape[-1] // n
    if M.shape[-1] != n * T or M.shape[-2] != n * T:
        raise InvalidInputError(f"{M.shape[-2:]} is not a stack of {n}x{n} blocks")
    acc = np.zeros(M.shape[:-2] + (n, n), dtype=M.dtype)
    for t in range(T):
        acc = acc + M[..., t * n : (t + 1) * n, t * n : (t + 1) * n]
    return acc / T


def _haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def init_randomized(n, rng=None, kind="phase-diagonal", T=2):
    """Starting randomized matrix; every kind has ``||R||_F^2 == n``."""
    if kind == "identity":
        R = np.eye(n, dtype=np.complex128)
    elif kind == "phase-diagonal":
        theta = rng.uniform(0.0, 2 * np.pi, n)
        R = np.diag(np.exp(1j * theta))
    elif kind == "random-unitary":
        R = _haar_unitary(n, rng)
    else:
        raise InvalidInputError(f"unknown init kind {kind!r}; expected one of {INIT_KINDS}")
    return RandomizedMatrix(R, T)


def relay_correlations(C, G_eq, gain, sigma2_sr, sigma_s2=1.0):
    """Analytic ``E[r r^H]`` and ``E[s r^H]`` of the relay observation before randomization.

    ``r = C s + a G_eq n_SR`` with independent unit-power symbols and relay
    noise of variance ``sigma2_sr``.
    """
    a = gain.scalar_gain if hasattr(gain, "scalar_gain") else float(gain)
    C = np.asarray(C)
    G_eq = np.asarray(G_eq)
    auto = sigma_s2 * (C @ hermitian(C)) + sigma2_sr * a * a * (G_eq @ hermitian(G_eq))
    cross = sigma_s2 * hermitian(C)
    return auto, cross


def mmse_randomized_closed_form(W, autocorr, crosscorr, loading=LOADING):
    """``R = (W^H E[r r^H] W)^-1 E[s r^H] W`` for a fixed receive filter.

    ``W`` is the relay-row block of the receive filter (``NT x N``), the
    correlations come from :func:`relay_correlations`. The result is already
    ``N x N``.
    """
    W = np.asarray(W)
    if W.shape[-2] != autocorr.shape[-1] or crosscorr.shape[-1] != W.shape[-2]:
        raise InvalidInputError("filter and correlation dimensions disagree")
    n = W.shape[-1]
    inner = hermitian(W) @ autocorr @ W
    R = solve_hermitian(inner, crosscorr @ W, loading=loading)
    return RandomizedMatrix(R, W.shape[-2] // n)


def instantaneous_cost(R, T, s, C, W, n):
    """``||s - W^H (R_eq C s + n)||^2`` for a frozen noise vector ``n``."""
    r = expand_block_diag(R, T) @ (C @ s) + n
    e = s - hermitian(W) @ r
    return float(np.real(np.vdot(e, e)))


def armo_gradient_full(e, s, C, W):
    """Instantaneous gradient of the squared error with respect to ``conj(R_eq)``."""
    e = np.asarray(e)
    s = np.asarray(s)
    C = np.asarray(C)
    W = np.asarray(W)
    if W.shape != C.shape or e.shape[-1] != W.shape[-1] or s.shape[-1] != C.shape[-1]:
        raise InvalidInputError(
            f"shape mismatch: e{e.shape} s{s.shape} C{C.shape} W{W.shape}"
        )
    we = np.einsum("...ij,...j->...i", W, e)
    cs = np.einsum("...ij,...j->...i", C, s)
    return -we[..., :, None] * np.conj(cs)[..., None, :]


def armo_gradient(e, s, C, W):
    """Block-averaged ``-W e (C s)^H``: the ``N x N`` ARMO search direction (negated)."""
    full = armo_gradient_full(e, s, C, W)
    return project_block_diag(full, np.shape(s)[-1])


def armo_step(state, e, s, C, W):
    """One ARMO update ``R <- R - mu * grad`` (no matrix inversion involved)."""
    g = armo_gradient(e, s, C, W)
    R_new = state.R.R - state.mu * g
    if not np.all(np.isfinite(R_new)):
        raise DivergenceError(
            f"ARMO update diverged at iteration {state.iteration}", iteration=state.iteration
        )
    return replace(
        state,
        R=RandomizedMatrix(R_new, state.R.T),
        iteration=state.iteration + 1,
        last_error_norm=float(np.linalg.norm(e)),
    )


def feedback_to_relay(R):
    """Idealised feedback link: the relay receives ``R`` exactly, without delay."""
    return RandomizedMatrix(np.array(R.R, copy=True), R.T)
