"""Monte Carlo BER engine: SNR sweeps, ARMO convergence traces and bound overlays.

Every unit of work draws from its own substream of the master seed, keyed by
(stream tag, SNR, chunk), so results do not depend on worker count or order.
All schemes at one SNR see the same bits, channels and noise (common random
numbers), which keeps scheme comparisons paired.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from rdstc.channel import ChannelSet, NoiseModel, SystemDims, draw_channel_set, substream
from rdstc.errors import DivergenceError, RdstcError, SingularMatrixError
from rdstc.pep import average_bound_curves
from rdstc.phy import (
    amplify_gain,
    assemble_full_model,
    draw_link_noise,
    qpsk_modulate,
    simulate_reception,
)
from rdstc.randomized import (
    ArmoState,
    armo_step,
    feedback_to_relay,
    init_randomized,
    mmse_randomized_closed_form,
    relay_correlations,
)
from rdstc.receiver import analytic_correlations, filter_and_detect, mmse_filter
from rdstc.records import BerRecord, BoundRecord, ConvergenceRecord, write_csv

__all__ = [
    "TRACE_SCHEMES",
    "fixed_randomized",
    "run_bound_curves",
    "run_convergence_trace",
    "run_point",
    "run_sweep",
    "train_armo",
]

log = logging.getLogger(__name__)

# substream tags
_BITS, _CHAN, _NOISE, _TRAIN, _FIXED_R, _TRACE = range(6)

TRACE_SCHEMES = ("SM", "D-Alamouti", "R-Alamouti-fixed", "ARMO")


def _snr_key(snr_db):
    return int(round(float(snr_db) * 1000)) + 2**31


def _link_dims(cfg, scheme):
    if scheme == "Direct":
        return SystemDims(cfg.n_antennas, 0, cfg.codeword_slots, True)
    return cfg.dims


def _relay_scheme(scheme):
    return "sm" if scheme == "SM" else "alamouti"


def _draw_packets(cfg, dims, noise, key, batch):
    n = dims.N
    bits = substream(cfg.master_seed, _BITS, *key).integers(0, 2, (batch, 2 * n), dtype=np.int8)
    cs = draw_channel_set(dims, substream(cfg.master_seed, _CHAN, *key), batch, fading=cfg.fading)
    nd = draw_link_noise(dims, noise, substream(cfg.master_seed, _NOISE, *key), batch, cfg.codeword_slots)
    return bits, cs, nd


def _slice_cs(cs, i):
    return ChannelSet(F=[f[i] for f in cs.F], H=cs.H[i], G=[g[i] for g in cs.G], block_index=i)


def _slice_noise(nd, i):
    return {"sd": nd["sd"][i], "sr": [x[i] for x in nd["sr"]], "rd": nd["rd"][i]}


def _filter(cfg, model):
    return mmse_filter(*analytic_correlations(model, noise_mode=cfg.noise_mode)).W


def _mmse_randomized(cfg, dims, cs, gain, noise):
    """Per-block closed-form randomized matrices (one per relay).

    The closed form belongs to the relay-only model, so its filter ignores the
    direct link even when the receiver later uses it.
    """
    relay_only = replace(dims, direct_link=False)
    model = assemble_full_model(cs, None, gain, relay_only, noise)
    W = _filter(cfg, model)
    out = []
    for k in range(dims.n_relays):
        auto, cross = relay_correlations(model.C[k], model.G_eq[k], gain, noise.sr)
        out.append(mmse_randomized_closed_form(W, auto, cross).R)
    return out


def _detect(cfg, dims, scheme, cs, s, R, gain, noise, nd):
    """MMSE-filter and slice one block or a batch; returns (detection, model, W)."""
    rs = _relay_scheme(scheme)
    if scheme == "R-Alamouti-MMSE":
        R = _mmse_randomized(cfg, dims, cs, gain, noise)
    model = assemble_full_model(cs, R, gain, dims, noise, rs)
    W = _filter(cfg, model)
    r = simulate_reception(cs, s, R, gain, dims, nd, rs)
    return filter_and_detect(W, r, s), model, W


def fixed_randomized(cfg):
    """The run-wide randomized matrices of the fixed scheme, one per relay."""
    return [
        init_randomized(cfg.n_antennas, substream(cfg.master_seed, _FIXED_R, k), cfg.fixed_r_kind).R
        for k in range(cfg.n_relays)
    ]


def _armo_update(states, det, s, model, W):
    Wr = W[model.relay_rows, :]
    return [armo_step(st, det.error, s, model.C[k], Wr) for k, st in enumerate(states)]


def train_armo(cfg, snr_db):
    """Adapt one randomized matrix per relay on ``training_packets`` pilot packets.

    The receive filter is recomputed every packet for the current channel and
    matrix; the updated matrix reaches the relay through the ideal feedback link.
    """
    dims = cfg.dims
    noise = NoiseModel.from_snr_db(snr_db)
    gain = amplify_gain(noise)
    key = (_snr_key(snr_db),)
    init_rng = substream(cfg.master_seed, _TRAIN, *key, 0)
    states = [
        ArmoState(init_randomized(dims.N, init_rng, cfg.r_init), mu=cfg.mu)
        for _ in range(dims.n_relays)
    ]
    if cfg.training_packets == 0:
        return states
    bits, cs, nd = _draw_packets(cfg, dims, noise, (_TRAIN,) + key, cfg.training_packets)
    s_all = qpsk_modulate(bits)
    for i in range(cfg.training_packets):
        R = [feedback_to_relay(st.R).R for st in states]
        s = s_all[i]
        try:
            det, model, W = _detect(cfg, dims, "ARMO", _slice_cs(cs, i), s, R, gain, noise, _slice_noise(nd, i))
            states = _armo_update(states, det, s, model, W)
        except (SingularMatrixError, DivergenceError) as exc:
            exc.packet = i
            raise
    return states


def run_point(cfg, snr_db, scheme=None):
    """Bit error count for one scheme at one SNR.

    Runs ``packets_per_point`` data packets in chunks, then keeps adding
    chunks while fewer than ``min_errors`` errors were seen, up to
    ``max_packets``.
    """
    scheme = scheme or cfg.scheme[0]
    dims = _link_dims(cfg, scheme)
    noise = NoiseModel.from_snr_db(snr_db)
    gain = amplify_gain(noise)
    R = None
    if scheme == "R-Alamouti-fixed":
        R = fixed_randomized(cfg)
    elif scheme == "ARMO":
        R = [feedback_to_relay(st.R).R for st in train_armo(cfg, snr_db)]

    packets = errors = chunk = 0
    while packets < cfg.packets_per_point or (errors < cfg.min_errors and packets < cfg.packet_cap):
        limit = cfg.packets_per_point if packets < cfg.packets_per_point else cfg.packet_cap
        batch = min(cfg.chunk_packets, limit - packets)
        bits, cs, nd = _draw_packets(cfg, dims, noise, (_snr_key(snr_db), chunk), batch)
        try:
            det, _, _ = _detect(cfg, dims, scheme, cs, qpsk_modulate(bits), R, gain, noise, nd)
        except SingularMatrixError as exc:
            exc.packet = packets
            raise
        errors += int(np.count_nonzero(det.bits != bits))
        packets += batch
        chunk += 1
    bits_sent = packets * 2 * dims.N
    return BerRecord(
        snr_db=float(snr_db),
        scheme=scheme,
        bits_sent=bits_sent,
        bit_errors=errors,
        ber=errors / bits_sent,
        packets=packets,
        seed=cfg.master_seed,
    )


def _unit(args):
    cfg, snr_db, scheme = args
    return run_point(cfg, snr_db, scheme)


def run_sweep(cfg, workers=None, out_path=None):
    """One :class:`BerRecord` per (SNR, scheme), sorted by SNR then scheme name.

    With ``workers > 1`` the units run in a process pool; each unit's streams
    depend only on the seed and its SNR, so the output matches a serial run.
    If a unit fails, the records finished so far are written to ``out_path``
    before the error propagates.
    """
    workers = workers or cfg.workers
    units = [(cfg, snr, scheme) for snr in cfg.snr_grid_db for scheme in cfg.scheme]
    records = []
    try:
        if workers > 1 and len(units) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for rec in pool.map(_unit, units):
                    log.info("%s @ %g dB: ber=%.3g", rec.scheme, rec.snr_db, rec.ber)
                    records.append(rec)
        else:
            for u in units:
                rec = _unit(u)
                log.info("%s @ %g dB: ber=%.3g", rec.scheme, rec.snr_db, rec.ber)
                records.append(rec)
    except RdstcError:
        if out_path is not None:
            write_csv(records, out_path, BerRecord)
        raise
    records.sort(key=BerRecord.sort_key)
    if out_path is not None:
        write_csv(records, out_path, BerRecord)
    return records


def run_convergence_trace(cfg, snr_db, schemes=TRACE_SCHEMES):
    """Running BER against received symbol vectors on one shared packet stream.

    Fixed schemes keep their matrix; ARMO adapts on every packet (pilot mode)
    after the packet has been detected and counted.
    """
    dims = cfg.dims
    noise = NoiseModel.from_snr_db(snr_db)
    gain = amplify_gain(noise)
    P = cfg.trace_packets
    bits, cs, nd = _draw_packets(cfg, dims, noise, (_TRACE, _snr_key(snr_db)), P)
    s = qpsk_modulate(bits)
    bits_per_packet = 2 * dims.N
    checkpoints = np.arange(cfg.trace_every, P + 1, cfg.trace_every)
    out = []
    for scheme in schemes:
        if scheme == "ARMO":
            init_rng = substream(cfg.master_seed, _TRACE, _snr_key(snr_db), 1)
            states = [
                ArmoState(init_randomized(dims.N, init_rng, cfg.r_init), mu=cfg.mu)
                for _ in range(dims.n_relays)
            ]
            errs = np.zeros(P, dtype=np.int64)
            for i in range(P):
                R = [feedback_to_relay(st.R).R for st in states]
                det, model, W = _detect(cfg, dims, scheme, _slice_cs(cs, i), s[i], R, gain, noise, _slice_noise(nd, i))
                errs[i] = np.count_nonzero(det.bits != bits[i])
                states = _armo_update(states, det, s[i], model, W)
        else:
            R = fixed_randomized(cfg) if scheme == "R-Alamouti-fixed" else None
            det, _, _ = _detect(cfg, dims, scheme, cs, s, R, gain, noise, nd)
            errs = np.count_nonzero(det.bits != bits, axis=-1)
        cum = np.cumsum(errs)
        for c in checkpoints:
            out.append(ConvergenceRecord(int(c), scheme, float(cum[c - 1] / (c * bits_per_packet))))
    return out


def run_bound_curves(cfg):
    """Channel-averaged union bounds plus the simulated BER they should dominate.

    Returns ``(bound_records, ber_records)``. The bounds describe the
    one-relay link without direct path; the overlays simulate the same link
    with D-Alamouti (plain case) and per-block MMSE randomization.
    """
    link = replace(cfg, n_relays=1, direct_link=False, scheme=("D-Alamouti", "R-Alamouti-MMSE"))
    curves = average_bound_curves(
        link.dims, link.snr_grid_db, cfg.bound_draws, cfg.master_seed, noise_mode=cfg.noise_mode
    )
    bounds = [
        BoundRecord(float(x), c.case, float(v), c.channel_draws)
        for c in curves
        for x, v in zip(c.snr_db, c.values)
    ]
    bounds.sort(key=BoundRecord.sort_key)
    return bounds, run_sweep(link, workers=cfg.workers)


BOUND_OVERLAY = {"traditional": "D-Alamouti", "randomized": "R-Alamouti-MMSE"}
