"""QPSK mapping, Alamouti encoding, AF relaying and the stacked linear model.

Two relay schemes share this module:

``"alamouti"``
    the relay Alamouti-encodes its amplified observation over ``T = 2`` slots;
    slot-2 receptions are conjugated before stacking so the relay path becomes
    linear in the symbol vector.
``"sm"``
    the relay forwards its amplified observation in one slot (``T = 1``).

The randomized matrix acts on the stacked relay observation as
``R_eq = block_diag(R, ..., R)``. At slot level this is ``R`` on plain slots and
``conj(R)`` on conjugated ones, applied ahead of the destination noise.
"""

from dataclasses import dataclass

import numpy as np

from rdstc.channel import NoiseModel
from rdstc.errors import InvalidInputError
from rdstc.numerics import batch_shape, frobenius_norm, hermitian

__all__ = [
    "AmplifyGain",
    "EquivalentModel",
    "QPSK_POINTS",
    "alamouti_encode",
    "amplify_gain",
    "assemble_full_model",
    "build_equivalent_channel",
    "conj_mask_for",
    "draw_link_noise",
    "expand_randomized",
    "qpsk_demodulate",
    "qpsk_modulate",
    "relay_slot_output",
    "scheme_slots",
    "simulate_reception",
    "stack_slots",
]

_SQRT_HALF = np.sqrt(0.5)
# index = 2*b0 + b1
QPSK_POINTS = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) * _SQRT_HALF

SCHEMES = ("alamouti", "sm")


def scheme_slots(scheme):
    if scheme == "alamouti":
        return 2
    if scheme == "sm":
        return 1
    raise InvalidInputError(f"unsupported relay scheme {scheme!r}")


def qpsk_modulate(bits):
    """Gray-mapped unit-energy QPSK; bit pair ``(b0, b1)`` sets (imag, real) signs.

    00 -> (1+j)/sqrt2, 01 -> (-1+j)/sqrt2, 11 -> (-1-j)/sqrt2, 10 -> (1-j)/sqrt2.
    Works on the last axis, which must have even length.
    """
    bits = np.asarray(bits)
    if bits.shape[-1] % 2:
        raise InvalidInputError("QPSK needs an even number of bits")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise InvalidInputError("bits must be 0 or 1")
    b = bits.reshape(bits.shape[:-1] + (-1, 2)).astype(np.int64)
    return QPSK_POINTS[2 * b[..., 0] + b[..., 1]]


def qpsk_demodulate(estimates):
    """Nearest-point QPSK decisions; a zero component decides bit 0."""
    x = np.asarray(estimates)
    b0 = (x.imag < 0).astype(np.int8)
    b1 = (x.real < 0).astype(np.int8)
    return np.stack([b0, b1], axis=-1).reshape(x.shape[:-1] + (-1,))


@dataclass(frozen=True)
class AmplifyGain:
    """Fixed-gain AF amplification ``A = a I``."""

    scalar_gain: float

    def matrix(self, n):
        return self.scalar_gain * np.eye(n)


def amplify_gain(noise, symbol_power=1.0):
    """``a = sqrt(P / (P + sigma2_sr))`` for per-antenna signal power ``P``."""
    if not symbol_power > 0:
        raise InvalidInputError("symbol_power must be positive")
    sigma2 = noise.sr if isinstance(noise, NoiseModel) else float(noise)
    return AmplifyGain(float(np.sqrt(symbol_power / (symbol_power + sigma2))))


def alamouti_encode(s_tilde):
    """Alamouti codeword ``[[s1, -s2*], [s2, s1*]]``; columns are time slots."""
    s = np.asarray(s_tilde, dtype=np.complex128)
    if s.shape[-1] != 2:
        raise InvalidInputError("Alamouti encodes exactly two symbols")
    s1, s2 = s[..., 0], s[..., 1]
    col1 = np.stack([s1, s2], axis=-1)
    col2 = np.stack([-np.conj(s2), np.conj(s1)], axis=-1)
    return np.stack([col1, col2], axis=-1)


def conj_mask_for(scheme, n):
    """Rows of the stacked relay observation that are conjugated."""
    T = scheme_slots(scheme)
    mask = np.zeros(n * T, dtype=bool)
    if scheme == "alamouti":
        mask[n:] = True
    return mask


def build_equivalent_channel(G, scheme="alamouti"):
    """Equivalent ``NT x N`` channel and the per-row conjugation mask.

    For Alamouti, conjugating the slot-2 rows of ``vec(G M(s))`` gives
    ``G_eq @ s`` exactly.
    """
    G = np.asarray(G, dtype=np.complex128)
    n = G.shape[-1]
    if scheme == "sm":
        return G.copy(), np.zeros(n, dtype=bool)
    if scheme != "alamouti":
        raise InvalidInputError(f"unsupported relay scheme {scheme!r}")
    if G.shape[-2:] != (2, 2):
        raise InvalidInputError("Alamouti needs N = T = 2")
    g1, g2 = G[..., :, 0], G[..., :, 1]
    top = np.stack([g1, g2], axis=-1)
    bottom = np.stack([np.conj(g2), -np.conj(g1)], axis=-1)
    return np.concatenate([top, bottom], axis=-2), conj_mask_for("alamouti", 2)


def stack_slots(Y, conj_mask):
    """Stack the columns of slot matrix ``Y`` (..., N, T) and conjugate masked rows."""
    Y = np.asarray(Y)
    v = np.swapaxes(Y, -1, -2).reshape(Y.shape[:-2] + (-1,))
    return np.where(conj_mask, np.conj(v), v)


def expand_randomized(R, T):
    """``block_diag(R, ..., R)`` with ``T`` copies; batch axes are kept."""
    R = np.asarray(R, dtype=np.complex128)
    n = R.shape[-1]
    out = np.zeros(R.shape[:-2] + (n * T, n * T), dtype=np.complex128)
    for t in range(T):
        out[..., t * n : (t + 1) * n, t * n : (t + 1) * n] = R
    return out


def relay_slot_output(G, s_tilde, R=None, scheme="alamouti", order="stacked"):
    """Noise-free slot matrix (..., N, T) seen at the destination from one relay.

    ``order="stacked"`` applies the randomization the way the stacked model
    does (``R`` on plain slots, ``conj(R)`` on conjugated slots).
    ``order="codeword"`` puts ``R`` on the codeword before the channel,
    ``G R M(s)``; its stacked equivalent channel is that of ``G @ R``.
    """
    G = np.asarray(G, dtype=np.complex128)
    s_tilde = np.asarray(s_tilde, dtype=np.complex128)
    if scheme == "alamouti":
        M = alamouti_encode(s_tilde)
    elif scheme == "sm":
        M = s_tilde[..., :, None]
    else:
        raise InvalidInputError(f"unsupported relay scheme {scheme!r}")
    if R is None:
        return G @ M
    R = np.asarray(R, dtype=np.complex128)
    if order == "codeword":
        return G @ R @ M
    if order != "stacked":
        raise InvalidInputError(f"unknown randomization order {order!r}")
    n = G.shape[-1]
    mask = conj_mask_for(scheme, n)
    Y = G @ M
    cols = []
    for t in range(M.shape[-1]):
        Rt = np.conj(R) if mask[t * n] else R
        cols.append(Rt @ Y[..., :, t : t + 1])
    return np.concatenate(cols, axis=-1)


@dataclass
class EquivalentModel:
    """Stacked linear model ``r = D s + n`` of one block (or a batch).

    Attributes
    ----------
    D : (..., rows, N)
        Full-system channel: direct block ``H`` on top (if enabled), then the
        superposed relay observation ``sum_k R_eq_k C_k``.
    C, G_eq, R_eq : lists over relays
        ``C_k = G_eq_k A_k F_k`` and the expanded randomized matrices.
    noise_var : (..., rows)
        White per-row noise variance: ``sigma2`` on direct rows and
        ``sigma2 (1 + sum_k ||R_eq_k G_eq_k A_k||_F^2)`` on relay rows.
    noise_cov : (..., rows, rows)
        Exact covariance of direct, amplified-relay and destination noise.
    """

    D: np.ndarray
    C: list
    G_eq: list
    R_eq: list
    gains: list
    conj_mask: np.ndarray
    noise_var: np.ndarray
    noise_cov: np.ndarray
    n_direct_rows: int
    scheme: str

    @property
    def relay_rows(self):
        return slice(self.n_direct_rows, self.D.shape[-2])


def _as_list(x, n):
    if x is None:
        return [None] * n
    if isinstance(x, (list, tuple)):
        if len(x) != n:
            raise InvalidInputError(f"expected {n} per-relay entries, got {len(x)}")
        return list(x)
    return [x] * n


def assemble_full_model(cs, R, gains, dims, noise, scheme="alamouti"):
    """Build the stacked model for channel set ``cs``.

    ``R`` is one ``N x N`` randomized matrix per relay (or one shared matrix, or
    ``None`` for identity); ``gains`` holds one :class:`AmplifyGain` per relay
    (or a shared one). The SM relay scheme ignores ``R``.
    """
    n = dims.N
    T = scheme_slots(scheme) if dims.n_relays else 0
    if dims.n_relays and scheme == "alamouti" and dims.T != 2:
        raise InvalidInputError("Alamouti needs codeword_slots == 2")
    if np.shape(cs.H)[-2:] != (n, n):
        raise InvalidInputError("channel dimensions do not match dims")
    R_list = _as_list(R, dims.n_relays)
    gain_list = _as_list(gains, dims.n_relays)
    batch = np.shape(cs.H)[:-2]

    C, G_eq, R_eq = [], [], []
    relay_D = np.zeros(batch + (n * T, n), dtype=np.complex128)
    relay_noise = np.zeros(batch + (n * T, n * T), dtype=np.complex128)
    amp_norm = np.zeros(batch)
    mask = np.zeros(n * T, dtype=bool)
    for k in range(dims.n_relays):
        if np.shape(cs.F[k])[-2:] != (n, n) or np.shape(cs.G[k])[-2:] != (n, n):
            raise InvalidInputError("relay channel dimensions do not match dims")
        Gk, mask = build_equivalent_channel(cs.G[k], scheme)
        a = gain_list[k].scalar_gain
        Ck = a * (Gk @ cs.F[k])
        if scheme == "sm" or R_list[k] is None:
            Rk = np.eye(n * T, dtype=np.complex128)
        else:
            Rk = expand_randomized(R_list[k], T)
            if Rk.shape[-1] != n * T:
                raise InvalidInputError("randomized matrix does not match N")
        RG = a * (Rk @ Gk)
        relay_D = relay_D + Rk @ Ck
        relay_noise = relay_noise + noise.sr * (RG @ hermitian(RG))
        amp_norm = amp_norm + frobenius_norm(RG) ** 2
        C.append(Ck)
        G_eq.append(Gk)
        R_eq.append(Rk)

    blocks, var_blocks = [], []
    n_direct = n if dims.direct_link else 0
    if dims.direct_link:
        blocks.append(np.asarray(cs.H, dtype=np.complex128))
        var_blocks.append(np.full(batch + (n,), noise.sd))
    if dims.n_relays:
        blocks.append(relay_D)
        relay_var = noise.rd + noise.sr * amp_norm
        var_blocks.append(np.repeat(np.asarray(relay_var)[..., None], n * T, axis=-1))
    D = np.concatenate(blocks, axis=-2)
    noise_var = np.concatenate(var_blocks, axis=-1)

    rows = D.shape[-2]
    cov = np.zeros(batch + (rows, rows), dtype=np.complex128)
    idx = np.arange(n_direct)
    cov[..., idx, idx] = noise.sd
    if dims.n_relays:
        ridx = np.arange(n_direct, rows)
        cov[..., n_direct:, n_direct:] = relay_noise
        cov[..., ridx, ridx] += noise.rd
    return EquivalentModel(
        D=D,
        C=C,
        G_eq=G_eq,
        R_eq=R_eq,
        gains=gain_list,
        conj_mask=np.concatenate([np.zeros(n_direct, dtype=bool), mask]),
        noise_var=noise_var,
        noise_cov=cov,
        n_direct_rows=n_direct,
        scheme=scheme,
    )


def draw_link_noise(dims, noise, rng, batch=None, slots=2):
    """Noise for every link of a packet batch, drawn in a fixed order.

    Returns a dict with ``"sd"`` (..., N), ``"sr"`` (list over relays of (..., N))
    and ``"rd"`` (..., N, slots). Schemes needing fewer slots use the first ones,
    so schemes fed the same draws share their noise.
    """
    n = dims.N
    shape = batch_shape(batch)

    def awgn(tail, var):
        z = rng.standard_normal(shape + tail + (2,))
        return np.sqrt(var / 2.0) * (z[..., 0] + 1j * z[..., 1])

    return {
        "sd": awgn((n,), noise.sd),
        "sr": [awgn((n,), noise.sr) for _ in range(dims.n_relays)],
        "rd": awgn((n, slots), noise.rd),
    }


def simulate_reception(cs, s, R, gains, dims, noise_draws, scheme="alamouti"):
    """Run the two-phase chain at slot level and return the stacked receive vector.

    Phase 1: ``r_SD = H s + n_SD`` and ``r_SR_k = F_k s + n_SR_k``.
    Phase 2: each relay amplifies, encodes and (optionally) randomizes; the
    destination superposes the relay slots, adds noise and stacks them.
    ``noise_draws`` comes from :func:`draw_link_noise`; pass ``None`` for a
    noise-free reception.
    """
    n = dims.N
    s = np.asarray(s, dtype=np.complex128)
    batch = s.shape[:-1]
    R_list = _as_list(R, dims.n_relays)
    gain_list = _as_list(gains, dims.n_relays)
    nd = noise_draws

    parts = []
    if dims.direct_link:
        r_sd = np.einsum("...ij,...j->...i", cs.H, s)
        parts.append(r_sd if nd is None else r_sd + nd["sd"])
    if dims.n_relays:
        T = scheme_slots(scheme)
        Y = np.zeros(batch + (n, T), dtype=np.complex128)
        for k in range(dims.n_relays):
            r_sr = np.einsum("...ij,...j->...i", cs.F[k], s)
            if nd is not None:
                r_sr = r_sr + nd["sr"][k]
            s_tilde = gain_list[k].scalar_gain * r_sr
            Rk = None if scheme == "sm" else R_list[k]
            Y = Y + relay_slot_output(cs.G[k], s_tilde, Rk, scheme)
        if nd is not None:
            Y = Y + nd["rd"][..., :T]
        parts.append(stack_slots(Y, conj_mask_for(scheme, n)))
    return np.concatenate(parts, axis=-1)
