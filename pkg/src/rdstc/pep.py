"""Pairwise error probability of randomized and plain distributed STC.

Conditional on the channel, deciding ``s2`` when ``s1`` was sent costs
``Q(sqrt(gamma/2) ||R_eq H (s1 - s2)||)``. The squared distance is evaluated
through two Hermitian eigendecompositions,

    ||R_eq H d||^2 = sum_m sum_n lam_R[m] lam_s[n] |V[n, m]|^2,

where ``d d^H = U diag(lam_s) U^H`` and ``(R_eq H U)^H (R_eq H U) = V diag(lam_R) V^H``,
and the Chernoff-type bound ``Q(x) <= exp(-x^2/2)/2`` turns it into a closed form.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from rdstc.channel import ChannelSet, NoiseModel, SystemDims, draw_channel_set, substream
from rdstc.errors import InvalidInputError
from rdstc.numerics import frobenius_norm, hermitian, hermitian_eig
from rdstc.phy import (
    QPSK_POINTS,
    amplify_gain,
    assemble_full_model,
    build_equivalent_channel,
    expand_randomized,
)
from rdstc.randomized import mmse_randomized_closed_form, relay_correlations
from rdstc.receiver import analytic_correlations, mmse_filter

__all__ = [
    "BOUND_CASES",
    "BoundCurve",
    "PepInputs",
    "average_bound_curve",
    "average_bound_curves",
    "eigen_distance",
    "pep_exact_conditional",
    "pep_upper_bound_randomized",
    "pep_upper_bound_traditional",
    "q_function",
    "q_upper_bound",
    "qpsk_codebook",
    "union_bound",
]

BOUND_CASES = ("traditional", "randomized")


def q_function(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def q_upper_bound(x):
    """``exp(-x^2 / 2) / 2``, an upper bound on ``Q(x)`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidInputError("the exponential Q bound only holds for x >= 0")
    return 0.5 * np.exp(-0.5 * x * x)


@dataclass(frozen=True)
class PepInputs:
    """Codeword pair, total channel ``H = G_eq F`` (``NT x N``), ``R_eq`` and linear SNR."""

    s1: np.ndarray
    s2: np.ndarray
    H_total: np.ndarray
    R_eq: np.ndarray | None
    gamma: float

    def __post_init__(self):
        if np.array_equal(np.asarray(self.s1), np.asarray(self.s2)):
            raise InvalidInputError("pairwise error needs two distinct codewords")
        if self.gamma < 0:
            raise InvalidInputError("gamma must be nonnegative")

    @property
    def effective_channel(self):
        H = np.asarray(self.H_total, dtype=np.complex128)
        return H if self.R_eq is None else np.asarray(self.R_eq) @ H


def eigen_distance(RH, d):
    """``sum lam_R lam_s |xi|^2`` for effective channel ``RH`` and difference ``d``.

    Batched over leading axes of ``RH`` and ``d``.
    """
    d = np.asarray(d, dtype=np.complex128)
    dd = d[..., :, None] * np.conj(d)[..., None, :]
    es = hermitian_eig(dd, psd=True)
    B = np.asarray(RH) @ es.eigenvectors
    ev = hermitian_eig(hermitian(B) @ B, psd=True)
    xi2 = np.abs(ev.eigenvectors) ** 2
    # xi2[..., n, m] pairs codeword eigenvalue n with channel eigenvalue m
    return np.einsum("...m,...n,...nm->...", ev.eigenvalues, es.eigenvalues, xi2)


def pep_exact_conditional(inputs):
    d = np.asarray(inputs.s1) - np.asarray(inputs.s2)
    dist = np.linalg.norm(inputs.effective_channel @ d)
    return float(q_function(np.sqrt(inputs.gamma / 2.0) * dist))


def pep_upper_bound_randomized(inputs):
    d = np.asarray(inputs.s1) - np.asarray(inputs.s2)
    total = eigen_distance(inputs.effective_channel, d)
    return float(0.5 * np.exp(-inputs.gamma / 4.0 * total))


def pep_upper_bound_traditional(inputs):
    """The bound without randomization: ``R_eq`` is taken as the identity."""
    plain = PepInputs(inputs.s1, inputs.s2, inputs.H_total, None, inputs.gamma)
    return pep_upper_bound_randomized(plain)


def qpsk_codebook(n):
    """All ``4**n`` QPSK vectors; the first one is the all-``00`` reference."""
    return np.array(list(itertools.product(QPSK_POINTS, repeat=n)))


def union_bound(codebook, evaluator, cap=True):
    """``sum_{i >= 2} P(c_1 -> c_i)``, capped at one for reporting."""
    if len(codebook) < 2:
        raise InvalidInputError("union bound needs at least two codewords")
    ref = codebook[0]
    total = float(sum(evaluator(ref, c) for c in codebook[1:]))
    return min(total, 1.0) if cap else total


@dataclass(frozen=True)
class BoundCurve:
    case: str
    snr_db: np.ndarray
    values: np.ndarray
    channel_draws: int


def _bound_terms(dims, noise, F, G, case, noise_mode):
    """Per-draw union bound at one SNR for the relay-only two-hop link."""
    gain = amplify_gain(noise)
    a = gain.scalar_gain
    G_eq, _ = build_equivalent_channel(G, "alamouti")
    H_total = a * (G_eq @ F)
    n = dims.N
    if case == "traditional":
        R_eq = np.broadcast_to(np.eye(2 * n), H_total.shape[:-2] + (2 * n, 2 * n))
    elif case == "randomized":
        relay_dims = SystemDims(n, 1, 2, False)
        cs = ChannelSet(F=[F], H=np.zeros_like(F), G=[G])
        model = assemble_full_model(cs, None, gain, relay_dims, noise)
        W = mmse_filter(*analytic_correlations(model, noise_mode=noise_mode)).W
        auto, cross = relay_correlations(model.C[0], G_eq, gain, noise.sr)
        R = mmse_randomized_closed_form(W, auto, cross).R
        R_eq = expand_randomized(R, 2)
    else:
        raise InvalidInputError(f"unknown bound case {case!r}")
    # destination SNR after the relay noise is folded in
    gamma_eff = 1.0 / (noise.rd + noise.sr * frobenius_norm(a * R_eq @ G_eq) ** 2)
    RH = R_eq @ H_total
    book = qpsk_codebook(n)
    diffs = book[0] - book[1:]
    dist = eigen_distance(RH[..., None, :, :], diffs)
    terms = 0.5 * np.exp(-gamma_eff[..., None] / 4.0 * dist)
    return np.minimum(terms.sum(axis=-1), 1.0)


def average_bound_curves(dims, snr_grid_db, n_channel_draws, seed, cases=BOUND_CASES, noise_mode="white"):
    """Channel-averaged union bounds for each case on one shared set of channel draws.

    The analysis link is one relay, no direct link, Alamouti at the relay. The
    destination SNR of each draw is ``gamma / (1 + ||R_eq G_eq A||_F^2)``, so the
    amplified relay noise counts against the bound.
    """
    if n_channel_draws < 1:
        raise InvalidInputError("need at least one channel draw")
    link = SystemDims(dims.N, 1, 2, False)
    cs = draw_channel_set(link, substream(seed, 7), batch=n_channel_draws)
    F, G = cs.F[0], cs.G[0]
    curves = []
    snr = np.asarray(snr_grid_db, dtype=float)
    for case in cases:
        vals = np.array(
            [_bound_terms(link, NoiseModel.from_snr_db(x), F, G, case, noise_mode).mean() for x in snr]
        )
        curves.append(BoundCurve(case, snr, vals, n_channel_draws))
    return curves


def average_bound_curve(dims, snr_grid_db, n_channel_draws, seed, case="traditional", noise_mode="white"):
    return average_bound_curves(dims, snr_grid_db, n_channel_draws, seed, (case,), noise_mode)[0]
