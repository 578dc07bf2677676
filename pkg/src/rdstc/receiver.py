"""Joint linear MMSE reception at the destination."""

from dataclasses import dataclass

import numpy as np

from rdstc.errors import InvalidInputError
from rdstc.numerics import hermitian, solve_hermitian
from rdstc.phy import qpsk_demodulate

__all__ = [
    "NOISE_MODES",
    "Detection",
    "MmseFilter",
    "analytic_correlations",
    "filter_and_detect",
    "mmse_filter",
    "sample_correlations",
]

NOISE_MODES = ("white", "exact")
LOADING = 1e-10


@dataclass(frozen=True)
class MmseFilter:
    W: np.ndarray
    autocorr: np.ndarray
    crosscorr: np.ndarray


@dataclass(frozen=True)
class Detection:
    estimates: np.ndarray
    bits: np.ndarray
    error: np.ndarray | None = None


def analytic_correlations(model, sigma_s2=1.0, noise_mode="white"):
    """``E[r r^H]`` and ``E[r s^H]`` of the stacked model under perfect CSI.

    ``noise_mode="white"`` uses the per-row white variances of the model
    (direct rows ``sigma2``, relay rows ``sigma2 (1 + ||R_eq G_eq A||_F^2)``);
    ``"exact"`` uses the full coloured covariance of the amplified relay noise.
    """
    D = model.D
    if noise_mode == "white":
        noise = np.zeros(model.noise_cov.shape, dtype=np.complex128)
        idx = np.arange(D.shape[-2])
        noise[..., idx, idx] = model.noise_var
    elif noise_mode == "exact":
        noise = model.noise_cov
    else:
        raise InvalidInputError(f"unknown noise mode {noise_mode!r}")
    auto = sigma_s2 * (D @ hermitian(D)) + noise
    return auto, sigma_s2 * D


def sample_correlations(r, s):
    """Sample-average estimates of ``E[r r^H]`` and ``E[r s^H]`` from rows of ``r``, ``s``."""
    r = np.asarray(r)
    s = np.asarray(s)
    m = r.shape[0]
    return (r.T @ r.conj()) / m, (r.T @ s.conj()) / m


def mmse_filter(autocorr, crosscorr, loading=LOADING):
    """``W = E[r r^H]^-1 E[r s^H]`` by a regularised Hermitian solve."""
    autocorr = np.asarray(autocorr)
    if autocorr.shape[-1] != autocorr.shape[-2]:
        raise InvalidInputError("autocorrelation must be square")
    W = solve_hermitian(autocorr, crosscorr, loading=loading)
    return MmseFilter(W, autocorr, np.asarray(crosscorr))


def filter_and_detect(W, r, s=None):
    """Apply ``W^H``, slice to QPSK bits and, given pilots ``s``, return ``e = s - W^H r``."""
    W = W.W if isinstance(W, MmseFilter) else np.asarray(W)
    r = np.asarray(r)
    if r.shape[-1] != W.shape[-2]:
        raise InvalidInputError(f"received vector has {r.shape[-1]} rows, filter {W.shape[-2]}")
    est = np.einsum("...ij,...i->...j", np.conj(W), r)
    err = None if s is None else np.asarray(s) - est
    return Detection(est, qpsk_demodulate(est), err)
