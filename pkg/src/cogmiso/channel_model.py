"""Rayleigh channels, random vector quantization (RVQ) and the delay model.

Single-vector functions follow the textbook definitions; the ``*_batch``
variants do the same work on stacks of realizations and are what the
Monte Carlo engine uses. Random sources are always passed in explicitly as
``numpy.random.Generator`` objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateInputError, InvalidDimensionError,
                     InvalidParameterError)

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class Codebook:
    bits: int
    codewords: np.ndarray  # (2**bits, n_t), unit-norm rows

    @property
    def n_t(self) -> int:
        return self.codewords.shape[1]

    def __len__(self):
        return self.codewords.shape[0]


@dataclass(frozen=True)
class QuantizedCsi:
    """Outcome of quantizing one channel direction.

    ``direction = sqrt(1 - error) * codeword + sqrt(error) * residual_direction``
    holds up to a global phase.
    """

    index: int
    codeword: np.ndarray
    error: float
    residual_direction: np.ndarray


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: real and imaginary parts each with variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * _INV_SQRT2


def _check_dim(n_t):
    if int(n_t) != n_t or n_t < 2:
        raise InvalidDimensionError(f"n_t must be an integer >= 2, got {n_t!r}")


def sample_channel(n_t: int, rng: np.random.Generator) -> np.ndarray:
    _check_dim(n_t)
    return complex_normal(rng, (int(n_t),))


def sample_channels(rng: np.random.Generator, size, n_t: int) -> np.ndarray:
    """Stack of i.i.d. CN(0, I) vectors, shape ``(*size, n_t)``."""
    _check_dim(n_t)
    size = (size,) if np.isscalar(size) else tuple(size)
    return complex_normal(rng, size + (int(n_t),))


def normalize(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise DegenerateInputError("cannot normalize a zero vector")
    return v / norm


def generate_codebook(n_t: int, bits: int, rng: np.random.Generator) -> Codebook:
    """RVQ codebook: 2**bits independent isotropic unit vectors."""
    if int(bits) != bits or bits < 0:
        raise InvalidParameterError(f"bits must be a non-negative integer, got {bits!r}")
    _check_dim(n_t)
    return Codebook(int(bits), normalize(complex_normal(rng, (2 ** int(bits), int(n_t)))))


def quantize(codebook: Codebook, channel: np.ndarray) -> QuantizedCsi:
    """Pick the codeword with the largest |c^H h~|^2 (lowest index on ties)."""
    channel = np.asarray(channel, dtype=complex)
    if channel.shape != (codebook.n_t,):
        raise InvalidDimensionError(
            f"channel shape {channel.shape} does not match codebook dimension {codebook.n_t}")
    norm = np.linalg.norm(channel)
    if norm == 0:
        raise DegenerateInputError("cannot quantize a zero channel vector")
    direction = channel / norm
    inner = codebook.codewords.conj() @ direction
    gains = np.abs(inner) ** 2
    idx = int(np.argmax(gains))  # argmax returns the first maximizer
    c = codebook.codewords[idx]
    error = float(min(max(1.0 - gains[idx], 0.0), 1.0))
    phase = inner[idx] / abs(inner[idx]) if gains[idx] > 0 else 1.0
    resid = direction - c * inner[idx]
    rnorm = np.linalg.norm(resid)
    if rnorm > 1e-12:
        # rotate so that direction = phase * (sqrt(1-a) c + sqrt(a) s)
        s = resid / rnorm / phase
    else:
        # any unit vector orthogonal to c will do when the error vanishes
        s = _orthogonal_unit(c)
    return QuantizedCsi(idx, c, error, s)


def _orthogonal_unit(c: np.ndarray) -> np.ndarray:
    basis = np.linalg.svd(c.conj()[None, :])[2][1:].conj()
    return basis[0]


def quantize_batch(codewords: np.ndarray, channels: np.ndarray):
    """Quantize many channels, each against its own codebook.

    Parameters
    ----------
    codewords : (..., 2**bits, n_t) complex
    channels : (..., n_t) complex

    Returns
    -------
    chosen : (..., n_t) selected codewords
    error : (...) quantization error 1 - |c^H h~|^2
    """
    directions = channels / np.linalg.norm(channels, axis=-1, keepdims=True)
    gains = np.abs(np.einsum("...kd,...d->...k", codewords.conj(), directions)) ** 2
    idx = np.argmax(gains, axis=-1)
    chosen = np.take_along_axis(codewords, idx[..., None, None], axis=-2)[..., 0, :]
    best = np.take_along_axis(gains, idx[..., None], axis=-1)[..., 0]
    return chosen, np.clip(1.0 - best, 0.0, 1.0)


def rvq_batch(rng: np.random.Generator, channels: np.ndarray, bits: int):
    """Draw a fresh RVQ codebook per channel and quantize; see ``quantize_batch``."""
    shape = channels.shape[:-1] + (2 ** bits, channels.shape[-1])
    codewords = complex_normal(rng, shape)
    codewords /= np.linalg.norm(codewords, axis=-1, keepdims=True)
    return quantize_batch(codewords, channels)


def apply_delay(outdated: np.ndarray, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Current channel given an outdated one: sqrt(rho) h_o + sqrt(1-rho) e.

    Works for single vectors and stacks alike; at rho = 1 the input is
    returned unchanged and no randomness is consumed.
    """
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameterError(f"rho must lie in [0, 1], got {rho}")
    outdated = np.asarray(outdated)
    if rho == 1.0:
        return outdated
    return np.sqrt(rho) * outdated + np.sqrt(1.0 - rho) * complex_normal(rng, outdated.shape)
