"""Monte Carlo engine: end-to-end slot simulation used to check the closed forms.

Each slot draws fresh channels and (by default) fresh RVQ codebooks,
quantizes the interference and user channels, builds ZF beams and measures
interference, SINR and sum rate against the true channels.

Seeding: trials are cut into fixed blocks of ``BLOCK_SIZE`` slots, and block
``j`` draws from ``SeedSequence(seed, spawn_key=(j,))``. Results therefore do
not depend on how many workers run the blocks or in which order they finish.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import closed_form as cf
from .beamforming import interference_batch, sinr_batch, zf_beams_batch
from .channel_model import (apply_delay, complex_normal, quantize_batch,
                            rvq_batch, sample_channels)
from .errors import InvalidParameterError

BLOCK_SIZE = 4096
CODEBOOK_MODES = ("per_trial", "fixed")
# spawn key reserved for the shared codebooks of fixed-codebook runs
_FIXED_CODEBOOK_KEY = 2 ** 31 - 1


@dataclass
class SimStats:
    trials: int
    mean: float
    std_error: float
    extra: dict = field(default_factory=dict)


def _summarize(samples: np.ndarray, **extra) -> SimStats:
    n = samples.shape[0]
    mean = float(np.sum(samples) / n)
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return SimStats(trials=n, mean=mean, std_error=se, extra=extra)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _blocks(trials: int):
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    starts = range(0, trials, BLOCK_SIZE)
    return [(j, min(BLOCK_SIZE, trials - s)) for j, s in enumerate(starts)]


def _run_blocks(fn, trials, seed, workers):
    blocks = _blocks(trials)
    job = lambda jb: fn(block_rng(seed, jb[0]), jb[1])
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(b) for b in blocks]
    # concatenate in block order so the reduction is order-independent
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


class _Quantizer:
    """RVQ for one link: fresh codebook per slot, or one codebook shared by all."""

    def __init__(self, bits, n_t, shared_rng=None):
        self.bits = bits
        self.codewords = None
        if shared_rng is not None:
            cw = complex_normal(shared_rng, (2 ** bits, n_t))
            self.codewords = cw / np.linalg.norm(cw, axis=-1, keepdims=True)

    def __call__(self, rng, channels):
        if self.codewords is None:
            return rvq_batch(rng, channels, self.bits)
        cw = np.broadcast_to(self.codewords, channels.shape[:-1] + self.codewords.shape)
        return quantize_batch(cw, channels)


def _quantizers(cfg, mode, b_bits, seed, codebook):
    if codebook not in CODEBOOK_MODES:
        raise InvalidParameterError(f"codebook must be one of {CODEBOOK_MODES}")
    if codebook == "per_trial":
        return _Quantizer(b_bits, cfg.n_t), [_Quantizer(cfg.c_bits, cfg.n_t)] * mode
    shared = block_rng(seed, _FIXED_CODEBOOK_KEY)
    g_q = _Quantizer(b_bits, cfg.n_t, shared)
    return g_q, [_Quantizer(cfg.c_bits, cfg.n_t, shared) for _ in range(mode)]


def _slot_fn(cfg, mode, b_bits, power, seed, *, delayed=False, codebook="per_trial",
             null_primary=True):
    """Build the per-block simulator returning interference, quantization error
    and the SINR of every user."""
    if mode < 2 or mode > cfg.n_t - (1 if null_primary else 0):
        raise InvalidParameterError(f"mode {mode} not supported for n_t={cfg.n_t}")
    g_quant, user_quants = _quantizers(cfg, mode, b_bits, seed, codebook)

    def run(rng, n):
        g = sample_channels(rng, n, cfg.n_t)
        h = sample_channels(rng, (n, mode), cfg.n_t)
        ghat, a = g_quant(rng, g)
        hhat = np.stack([q(rng, h[:, k])[0] for k, q in enumerate(user_quants)], axis=1)
        beams = zf_beams_batch(ghat if null_primary else None, hhat, rng)
        g_true = apply_delay(g, cfg.rho, rng) if delayed else g
        return {
            "interference": interference_batch(g_true, beams, power, cfg.alpha),
            "quant_error": a,
            "sinr": sinr_batch(h, beams, power, cfg.sigma2) if power > 0
            else np.zeros((n, mode)),
        }

    return run


def simulate_interference(cfg: cf.SystemConfig, mode: int, b_bits: int, power: float,
                          trials: int, seed: int, *, delayed: bool = False,
                          codebook: str = "per_trial", workers: int = 1) -> SimStats:
    """Average interference at the primary receiver for transmit power ``power``.

    With ``delayed`` the beams are built from outdated CSI and the
    interference is measured on the current channel (correlation cfg.rho).
    ``extra`` carries the empirical mean quantization error and the
    analytical bound for comparison.
    """
    if power < 0:
        raise InvalidParameterError(f"power must be >= 0, got {power}")
    fn = _slot_fn(cfg, mode, b_bits, power, seed, delayed=delayed, codebook=codebook)
    out = _run_blocks(fn, trials, seed, workers)
    return _summarize(out["interference"],
                      mean_quant_error=float(np.mean(out["quant_error"])),
                      bound=cf.interference_bound(power, b_bits, cfg))


def simulate_sum_rate(cfg: cf.SystemConfig, mode: int, b_bits: int, trials: int,
                      seed: int, delayed: bool = False, *, codebook: str = "per_trial",
                      workers: int = 1) -> SimStats:
    """Average sum rate at the AIC-limited power for (mode, b_bits)."""
    power = cf.power_cap_delayed(b_bits, cfg) if delayed else cf.power_cap(b_bits, cfg)
    fn = _slot_fn(cfg, mode, b_bits, power, seed, delayed=delayed, codebook=codebook)
    out = _run_blocks(fn, trials, seed, workers)
    rates = np.log2(1.0 + out["sinr"]).sum(axis=1)
    return _summarize(rates, power=power,
                      mean_interference=float(np.mean(out["interference"])))


def simulate_fixed_scheme(cfg: cf.SystemConfig, trials: int, seed: int, *,
                          mode: int | None = None, workers: int = 1) -> SimStats:
    """No-cooperation baseline: ZF among ``mode`` (default n_t) users only,
    no interference CSI, power from the B = 0 cap."""
    mode = cfg.n_t if mode is None else mode
    power = cf.power_cap(0, cfg)
    fn = _slot_fn(cfg, mode, 0, power, seed, null_primary=False)
    out = _run_blocks(fn, trials, seed, workers)
    rates = np.log2(1.0 + out["sinr"]).sum(axis=1)
    return _summarize(rates, power=power,
                      mean_interference=float(np.mean(out["interference"])))


DEFAULT_CDF_GRID = np.concatenate([[0.0], np.logspace(-3, 3, 121)])


def empirical_sinr_cdf(cfg: cf.SystemConfig, mode: int, b_bits: int, trials: int,
                       seed: int, grid=None, *, workers: int = 1) -> SimStats:
    """Empirical CDF of the first served user's SINR at the AIC-limited power.

    ``extra`` holds the grid, the empirical and analytical CDF on it and the
    Kolmogorov-Smirnov distance between the sample and the analytical CDF.
    """
    if trials < 10_000:
        raise InvalidParameterError(f"need at least 10^4 trials, got {trials}")
    grid = DEFAULT_CDF_GRID if grid is None else np.asarray(grid, dtype=float)
    power = cf.power_cap(b_bits, cfg)
    fn = _slot_fn(cfg, mode, b_bits, power, seed)
    samples = _run_blocks(fn, trials, seed, workers)["sinr"][:, 0]
    ordered = np.sort(samples)
    ecdf = np.searchsorted(ordered, grid, side="right") / ordered.size
    analytic = lambda x: cf.sinr_cdf(x, mode, b_bits, cfg)
    ks = stats.kstest(samples, analytic).statistic
    return _summarize(samples, grid=grid, ecdf=ecdf, cdf=analytic(grid), ks=float(ks))
