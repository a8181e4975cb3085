"""Zero-forcing beams from quantized CSI, and per-slot interference / SINR.

Beam ``m`` is drawn isotropically from the null space of the quantized
interference channel and the other served users' quantized channels, so
the primary receiver and co-scheduled users are nulled as far as the
codebooks resolve them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel_model import QuantizedCsi, complex_normal
from .errors import DegenerateGeometryError, InvalidParameterError

# singular values below RANK_TOL * largest count as zero
RANK_TOL = 1e-10


@dataclass(frozen=True)
class ChannelRealization:
    """True channels of one slot.

    users : (M, n_t) downlink channels h_k
    interference_channel : (n_t,) small-scale channel g to the primary receiver
    alpha : path-loss ratio of the interference link
    """

    users: np.ndarray
    interference_channel: np.ndarray
    alpha: float

    def __post_init__(self):
        if self.users.ndim != 2 or self.users.shape[1] != self.interference_channel.shape[-1]:
            raise InvalidParameterError("user and interference channels must share n_t")
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise InvalidParameterError(f"alpha must be finite and >= 0, got {self.alpha}")


@dataclass(frozen=True)
class BeamSet:
    beams: np.ndarray  # (M, n_t), unit-norm rows

    @property
    def mode(self) -> int:
        return self.beams.shape[0]


def null_space(constraints: np.ndarray) -> np.ndarray:
    """Orthonormal basis of {w : c^H w = 0 for every row c of ``constraints``}.

    Returns an array of shape (n_t, k), k >= 0.
    """
    constraints = np.atleast_2d(constraints)
    _, s, vh = np.linalg.svd(constraints.conj(), full_matrices=True)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def zf_beams_batch(ghat, hhat: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random ZF beams for a stack of slots.

    Parameters
    ----------
    ghat : (n, n_t) quantized interference directions, or None to skip
        nulling toward the primary receiver.
    hhat : (n, M, n_t) quantized user directions.

    Returns
    -------
    (n, M, n_t) unit-norm beams.
    """
    n, mode, n_t = hhat.shape
    n_constraints = mode - 1 + (ghat is not None)
    null_dim = n_t - n_constraints
    if null_dim < 1:
        raise DegenerateGeometryError(
            f"{n_constraints} constraints leave no null space in {n_t} dimensions")
    beams = np.empty((n, mode, n_t), dtype=complex)
    for m in range(mode):
        rows = [hhat[:, k] for k in range(mode) if k != m]
        if ghat is not None:
            rows.insert(0, ghat)
        if rows:
            a = np.stack(rows, axis=1).conj()  # (n, r, n_t)
            # Trailing right singular vectors are null even if a slot's rows
            # happen to be rank deficient, so one slice serves every slot.
            vh = np.linalg.svd(a, full_matrices=True)[2]
            basis = vh[:, n_constraints:, :].conj()  # (n, null_dim, n_t)
        else:
            basis = np.broadcast_to(np.eye(n_t, dtype=complex), (n, n_t, n_t))
        coeff = complex_normal(rng, (n, null_dim))
        w = np.einsum("nk,nkd->nd", coeff, basis)
        beams[:, m] = w / np.linalg.norm(w, axis=-1, keepdims=True)
    return beams


def zfbf_beams(quantized_g: QuantizedCsi, quantized_users: Sequence[QuantizedCsi],
               mode: int, rng: np.random.Generator) -> BeamSet:
    """ZF beams for one slot.

    Each beam lies in the null space of [g^, h^_1 .. h^_{m-1}, h^_{m+1} .. h^_M]
    and is drawn isotropically within it when that space has dimension > 1.
    """
    n_t = quantized_g.codeword.shape[0]
    if not 2 <= mode <= n_t - 1:
        raise InvalidParameterError(f"mode must lie in [2, {n_t - 1}], got {mode}")
    if len(quantized_users) != mode:
        raise InvalidParameterError(
            f"expected {mode} quantized users, got {len(quantized_users)}")
    ghat = quantized_g.codeword
    hhat = np.stack([q.codeword for q in quantized_users])
    beams = np.empty((mode, n_t), dtype=complex)
    for m in range(mode):
        rows = np.vstack([ghat[None, :], np.delete(hhat, m, axis=0)])
        basis = null_space(rows)
        if basis.shape[1] == 0:
            raise DegenerateGeometryError(f"empty null space for beam {m}")
        w = basis @ complex_normal(rng, (basis.shape[1],))
        beams[m] = w / np.linalg.norm(w)
    return BeamSet(beams)


# ---------------------------------------------------------------------------
# Per-slot metrics. Batch forms take stacks: g (n, n_t), h (n, M, n_t),
# beams (n, M, n_t).
# ---------------------------------------------------------------------------

def interference_batch(g, beams, power, alpha) -> np.ndarray:
    mode = beams.shape[-2]
    leak = np.abs(np.einsum("nd,nmd->nm", g.conj(), beams)) ** 2
    return power / mode * alpha * leak.sum(axis=-1)


def sinr_batch(h, beams, power, sigma2) -> np.ndarray:
    """(n, M) SINR of every served user."""
    mode = beams.shape[-2]
    gains = np.abs(np.einsum("nkd,nmd->nkm", h.conj(), beams)) ** 2
    signal = np.einsum("nkk->nk", gains)
    cross = gains.sum(axis=-1) - signal
    if power == 0:
        return np.zeros_like(signal)
    return signal / (sigma2 * mode / power + cross)


def sum_rate_batch(h, beams, power, sigma2) -> np.ndarray:
    return np.log2(1.0 + sinr_batch(h, beams, power, sigma2)).sum(axis=-1)


def interference(real: ChannelRealization, beams: BeamSet, power: float) -> float:
    """Interference power at the primary receiver, (P/M) alpha sum |g^H w_m|^2."""
    if power < 0:
        raise InvalidParameterError(f"power must be >= 0, got {power}")
    return float(interference_batch(real.interference_channel[None], beams.beams[None],
                                    power, real.alpha)[0])


def sinr(real: ChannelRealization, beams: BeamSet, user_index: int,
         power: float, noise: float) -> float:
    if not 0 <= user_index < beams.mode:
        raise InvalidParameterError(f"user_index {user_index} out of range")
    if not noise > 0:
        raise InvalidParameterError(f"noise variance must be > 0, got {noise}")
    h = real.users[: beams.mode]
    return float(sinr_batch(h[None], beams.beams[None], power, noise)[0, user_index])


def sum_rate(real: ChannelRealization, beams: BeamSet, power: float, noise: float) -> float:
    """Sum of log2(1 + SINR) over the served users, bits/s/Hz."""
    if not noise > 0:
        raise InvalidParameterError(f"noise variance must be > 0, got {noise}")
    h = real.users[: beams.mode]
    return float(sum_rate_batch(h[None], beams.beams[None], power, noise)[0])
