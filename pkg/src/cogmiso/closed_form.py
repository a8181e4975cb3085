"""Analytical performance model of limited-feedback ZF beamforming.

Everything here is on a linear scale (powers, interference levels, noise);
dB conversion happens only at the CLI boundary.

The feedback utility of serving ``M`` users with ``B`` purchased bits of
interference CSI is

    f(M, B) = M log2(e) / delta^(M-1) * I1(nu, 1/delta, M-1) - mu B

with ``delta = 2^(-C/(Nt-1))`` and ``nu = sigma2 M / P`` where ``P`` is the
largest power that keeps the average interference below ``I_AIC``.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, InvalidParameterError, QuadratureError

LOG2E = 1.0 / math.log(2.0)
EULER_GAMMA = 0.57721566490153286061

# Relative error we are willing to accept from cancellation in the
# alternating closed forms before switching to quadrature.
_CANCELLATION_TOL = 1e-10
_SINGULAR_Y_TOL = 1e-6


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters, all linear scale.

    Parameters
    ----------
    n_t : int
        Number of BS antennas (>= 3, so that mode M=2 exists).
    c_bits : int
        Feedback bits per cognitive user (C).
    b_max : int
        Maximum purchasable interference-CSI bits (B0).
    mu : float
        Pricing factor, rate penalty per purchased bit.
    alpha : float
        Path-loss ratio of the interference link.
    sigma2 : float
        Noise variance at the cognitive users.
    i_aic : float
        Allowed average interference at the primary receiver.
    rho : float
        Correlation between outdated and current interference CSI.
    """

    n_t: int = 5
    c_bits: int = 2
    b_max: int = 4
    mu: float = 0.1
    alpha: float = 0.01
    sigma2: float = 1.0
    i_aic: float = 0.1
    rho: float = 1.0

    def __post_init__(self):
        problems = []
        if not isinstance(self.n_t, (int, np.integer)) or self.n_t < 3:
            problems.append(f"n_t must be an integer >= 3, got {self.n_t!r}")
        for name in ("c_bits", "b_max"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                problems.append(f"{name} must be a non-negative integer, got {v!r}")
        for name in ("mu", "alpha", "sigma2", "i_aic", "rho"):
            if not math.isfinite(getattr(self, name)):
                problems.append(f"{name} must be finite")
        if self.mu < 0:
            problems.append(f"mu must be >= 0, got {self.mu}")
        for name in ("alpha", "sigma2", "i_aic"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 <= self.rho <= 1.0:
            problems.append(f"rho must lie in [0, 1], got {self.rho}")
        if problems:
            raise InvalidParameterError("; ".join(problems))

    @property
    def eta(self) -> float:
        """Composite noise constant alpha Nt sigma2 / ((Nt-1) I_AIC)."""
        return self.alpha * self.n_t * self.sigma2 / ((self.n_t - 1) * self.i_aic)

    @property
    def delta(self) -> float:
        """Residual inter-user interference scale 2^(-C/(Nt-1))."""
        return 2.0 ** (-self.c_bits / (self.n_t - 1))

    @property
    def modes(self) -> range:
        return range(2, self.n_t)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class UtilityGrid:
    """Utility values on the (M, B) lattice; row i is mode ``modes[i]``."""

    values: np.ndarray
    modes: tuple
    bits: tuple

    def at(self, mode: int, b_bits: int) -> float:
        return float(self.values[self.modes.index(mode), self.bits.index(b_bits)])


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-17 * max(abs(total), 1e-300) or k > 200:
            break
    return -EULER_GAMMA - math.log(x) - total


def _scaled_e1_cf(x: float) -> float:
    # e^x E1(x) by modified Lentz on the even continued fraction, x > 1.
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"continued fraction for E1({x}) did not converge")


def scaled_exp_integral_e1(x: float) -> float:
    """Return exp(x) * E1(x) without overflow for large ``x``."""
    if not x > 0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x <= 1.0:
        return math.exp(x) * _e1_series(x)
    return _scaled_e1_cf(x)


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Power series for x <= 1, continued fraction above.
    """
    if not x > 0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x <= 1.0:
        return _e1_series(x)
    return math.exp(-x) * _scaled_e1_cf(x)


def laplace_quad(g, x: float) -> float:
    """Return int_0^inf exp(-x t) g(t) dt by adaptive quadrature.

    Raises QuadratureError if scipy reports that the tolerance was not met.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if x >= 1.0:
                # substitute u = x t so the exponential has unit scale
                val, err = integrate.quad(
                    lambda u: math.exp(-u) * g(u / x), 0.0, math.inf,
                    epsabs=0.0, epsrel=1e-13, limit=500)
                val, err = val / x, err / x
            else:
                val, err = integrate.quad(
                    lambda t: math.exp(-x * t) * g(t), 0.0, math.inf,
                    epsabs=0.0, epsrel=1e-13, limit=500)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature failed for x={x}: {exc}") from exc
    return val


def _check_xyz(x, y, z):
    if not (x > 0 and y > 0):
        raise DomainError(f"need x > 0 and y > 0, got x={x}, y={y}")
    if int(z) != z or z < 1:
        raise DomainError(f"z must be an integer >= 1, got {z}")


def _cancelled(terms, total) -> bool:
    scale = max(abs(t) for t in terms)
    return np.finfo(float).eps * scale * len(terms) > _CANCELLATION_TOL * abs(total)


def i2(x: float, y: float, z: int) -> float:
    """int_0^inf exp(-x t) / (t + y)^z dt in closed form.

    Falls back to quadrature when the alternating sum loses too many digits
    (large ``x y`` with ``z >= 2``).
    """
    _check_xyz(x, y, z)
    z = int(z)
    core = scaled_exp_integral_e1(x * y)
    if z == 1:
        return core
    fz = math.factorial(z - 1)
    terms = [math.factorial(k - 1) / fz * (-x) ** (z - k - 1) / y ** k
             for k in range(1, z)]
    terms.append((-x) ** (z - 1) / fz * core)
    total = math.fsum(terms)
    if total <= 0 or _cancelled(terms, total):
        return laplace_quad(lambda t: (t + y) ** (-z), x)
    return total


def i1(x: float, y: float, z: int) -> float:
    """int_0^inf exp(-x t) / ((t + 1)(t + y)^z) dt.

    Uses the partial-fraction expansion over ``i2``; the expansion is singular
    at y = 1, where direct quadrature is used instead.
    """
    _check_xyz(x, y, z)
    z = int(z)
    if abs(y - 1.0) < _SINGULAR_Y_TOL:
        return laplace_quad(lambda t: 1.0 / ((t + 1.0) * (t + y) ** z), x)
    terms = [(-1) ** (i - 1) * (1.0 - y) ** (-i) * i2(x, y, z - i + 1)
             for i in range(1, z + 1)]
    terms.append((y - 1.0) ** (-z) * i2(x, 1.0, 1))
    total = math.fsum(terms)
    if total <= 0 or _cancelled(terms, total):
        return laplace_quad(lambda t: 1.0 / ((t + 1.0) * (t + y) ** z), x)
    return total


# ---------------------------------------------------------------------------
# Interference and power
# ---------------------------------------------------------------------------

def interference_bound(power: float, b_bits: float, cfg: SystemConfig) -> float:
    """Upper bound on the average residual interference after ZF toward the
    quantized interference channel."""
    n = cfg.n_t
    return cfg.alpha * power * n / (n - 1) * 2.0 ** (-b_bits / (n - 1))


def power_cap(b_bits: float, cfg: SystemConfig) -> float:
    """Largest transmit power meeting the average interference constraint."""
    n = cfg.n_t
    return (n - 1) * cfg.i_aic / (cfg.alpha * n) * 2.0 ** (b_bits / (n - 1))


def power_cap_delayed(b_bits: float, cfg: SystemConfig) -> float:
    """Power cap when the interference CSI is outdated with correlation rho."""
    rho = cfg.rho
    if rho == 1.0:
        return power_cap(b_bits, cfg)
    n = cfg.n_t
    denom = n * rho / (n - 1) * 2.0 ** (-b_bits / (n - 1)) + (1.0 - rho)
    return cfg.i_aic / (cfg.alpha * denom)


def noise_coeff(mode: float, b_bits: float, cfg: SystemConfig,
                delayed: bool = False) -> float:
    """Effective noise term sigma2 M / P at the AIC-limited power.

    Without delay this equals eta M 2^(-B/(Nt-1)).
    """
    p = power_cap_delayed(b_bits, cfg) if delayed else power_cap(b_bits, cfg)
    return cfg.sigma2 * mode / p


# ---------------------------------------------------------------------------
# SINR distribution
# ---------------------------------------------------------------------------

def _resolve_nu(mode, b_bits, cfg, nu):
    if nu is None:
        nu = noise_coeff(mode, b_bits, cfg)
    if not nu > 0:
        raise InvalidParameterError(f"noise coefficient must be > 0, got {nu}")
    if mode < 2:
        raise InvalidParameterError(f"mode must be >= 2, got {mode}")
    return nu


def sinr_cdf(x, mode: int, b_bits: float, cfg: SystemConfig, noise_coeff=None):
    """CDF of a served user's SINR: 1 - exp(-nu x) / (1 + delta x)^(M-1).

    ``noise_coeff`` defaults to the AIC-capped value for (mode, b_bits).
    Accepts scalars or arrays.
    """
    nu = _resolve_nu(mode, b_bits, cfg, noise_coeff)
    x = np.asarray(x, dtype=float)
    out = -np.expm1(-nu * x - (mode - 1) * np.log1p(cfg.delta * x))
    return out[()] if out.ndim == 0 else out


def sinr_pdf(x, mode: int, b_bits: float, cfg: SystemConfig, noise_coeff=None):
    """Density of a served user's SINR; the exact derivative of ``sinr_cdf``."""
    nu = _resolve_nu(mode, b_bits, cfg, noise_coeff)
    d = cfg.delta
    x = np.asarray(x, dtype=float)
    tail = np.exp(-nu * x - (mode - 1) * np.log1p(d * x))
    out = tail * (nu + d * (mode - 1) / (1.0 + d * x))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Feedback utility
# ---------------------------------------------------------------------------

def ergodic_rate(mode: int, nu: float, cfg: SystemConfig) -> float:
    """Average sum rate of ``mode`` ZF users with effective noise ``nu``."""
    d = cfg.delta
    return LOG2E * mode / d ** (mode - 1) * i1(nu, 1.0 / d, mode - 1)


def _check_lattice(mode, b_bits, cfg):
    if int(mode) != mode or not 2 <= mode <= cfg.n_t - 1:
        raise InvalidParameterError(
            f"mode must be an integer in [2, {cfg.n_t - 1}], got {mode}")
    if int(b_bits) != b_bits or not 0 <= b_bits <= cfg.b_max:
        raise InvalidParameterError(
            f"b_bits must be an integer in [0, {cfg.b_max}], got {b_bits}")


def utility(mode: int, b_bits: int, cfg: SystemConfig, delayed: bool = False) -> float:
    """Feedback utility f(M, B): average sum rate minus mu B.

    With ``delayed`` the power cap accounts for outdated interference CSI
    (correlation ``cfg.rho``); at rho = 1 both variants coincide exactly.
    """
    _check_lattice(mode, b_bits, cfg)
    nu = noise_coeff(mode, b_bits, cfg, delayed)
    return ergodic_rate(int(mode), nu, cfg) - cfg.mu * b_bits


def utility_grid(cfg: SystemConfig, delayed: bool = False) -> UtilityGrid:
    modes = tuple(cfg.modes)
    bits = tuple(range(cfg.b_max + 1))
    values = np.array([[utility(m, b, cfg, delayed) for b in bits] for m in modes])
    return UtilityGrid(values=values, modes=modes, bits=bits)


def utility_relaxed(mode: float, b_bits: float, cfg: SystemConfig,
                    delayed: bool = False) -> float:
    """Utility with real-valued (M, B), by direct quadrature.

    Matches ``utility`` on integer points. Raises QuadratureError with the
    offending point if the integral does not converge.
    """
    if not 2.0 <= mode <= cfg.n_t - 1:
        raise InvalidParameterError(f"mode {mode} outside [2, {cfg.n_t - 1}]")
    if not 0.0 <= b_bits <= cfg.b_max:
        raise InvalidParameterError(f"b_bits {b_bits} outside [0, {cfg.b_max}]")
    nu = noise_coeff(mode, b_bits, cfg, delayed)
    d = cfg.delta
    expo = mode - 1.0
    try:
        val = laplace_quad(lambda t: 1.0 / ((t + 1.0) * (1.0 + d * t) ** expo), nu)
    except QuadratureError as exc:
        raise QuadratureError(
            f"utility_relaxed(M={mode}, B={b_bits}) did not converge: {exc}") from exc
    return LOG2E * mode * val - cfg.mu * b_bits


# ---------------------------------------------------------------------------
# Asymptotic regimes
# ---------------------------------------------------------------------------

def asymptotic_rate_fixed_power(mode: int, power: float, cfg: SystemConfig) -> float:
    """Average sum rate at a fixed transmit power with no interference CSI."""
    if not power > 0:
        raise InvalidParameterError(f"power must be > 0, got {power}")
    return ergodic_rate(int(mode), cfg.sigma2 * mode / power, cfg)


def asymptotic_utility_noise_free(mode: int, b_bits: int, cfg: SystemConfig) -> float:
    """Utility when inter-user interference is negligible against noise."""
    _check_lattice(mode, b_bits, cfg)
    nu = noise_coeff(mode, b_bits, cfg)
    return mode * LOG2E * scaled_exp_integral_e1(nu) - cfg.mu * b_bits
