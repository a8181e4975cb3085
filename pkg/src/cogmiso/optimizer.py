"""Joint choice of transmission mode M and purchased feedback bits B."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from . import closed_form as cf
from .errors import QuadratureError

METHODS = ("exhaustive", "relaxed", "asymptotic")


@dataclass(frozen=True)
class OptResult:
    """Chosen operating point.

    ``negative_utility`` is set when even the best point has f < 0, i.e. the
    cognitive network gains nothing from the spectrum at this price; what to
    do then is up to the caller. ``fallback`` marks a relaxed run that had
    to revert to the exhaustive search.
    """

    mode: int
    b_bits: int
    utility: float
    grid: Optional[cf.UtilityGrid]
    method: str
    negative_utility: bool = False
    fallback: bool = False
    relaxed_point: Optional[tuple] = None


def _better(u, m, b, best):
    """Strictly better, with ties going to fewer bits and then fewer users."""
    if best is None:
        return True
    bu, bm, bb = best
    if u != bu:
        return u > bu
    return (b, m) < (bb, bm)


def optimize_exhaustive(cfg: cf.SystemConfig, delayed: bool = False) -> OptResult:
    """Evaluate f on every lattice point of [2, Nt-1] x [0, B0] and maximize."""
    grid = cf.utility_grid(cfg, delayed)
    best = None
    for i, m in enumerate(grid.modes):
        for j, b in enumerate(grid.bits):
            u = float(grid.values[i, j])
            if _better(u, m, b, best):
                best = (u, m, b)
    u, m, b = best
    return OptResult(mode=m, b_bits=b, utility=u, grid=grid, method="exhaustive",
                     negative_utility=u < 0)


def _starts(lo, hi):
    fracs = [(0.5, 0.5), (0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]
    return [np.array([lo[0] + fm * (hi[0] - lo[0]), lo[1] + fb * (hi[1] - lo[1])])
            for fm, fb in fracs]


def _continuous_max(cfg, delayed):
    lo = np.array([2.0, 0.0])
    hi = np.array([cfg.n_t - 1.0, float(cfg.b_max)])
    free = hi > lo

    def full(z):
        x = lo.copy()
        x[free] = z
        return x

    def neg(z):
        m, b = np.clip(full(z), lo, hi)
        return -cf.utility_relaxed(m, b, cfg, delayed)

    if not free.any():
        return lo, True
    best_x, best_val, converged = None, math.inf, False
    for x0 in _starts(lo, hi):
        res = optimize.minimize(neg, x0[free], method="L-BFGS-B",
                                bounds=list(zip(lo[free], hi[free])),
                                options={"ftol": 1e-12, "gtol": 1e-9})
        converged |= bool(res.success)
        if res.success and res.fun < best_val:
            best_x, best_val = full(res.x), res.fun
    return best_x, converged


def optimize_relaxed(cfg: cf.SystemConfig, delayed: bool = False) -> OptResult:
    """Maximize f over real (M, B) in the box, then round.

    The continuous optimum (M', B') is found with bounded L-BFGS-B from five
    fixed interior starts; the integer answer is the best of the floor/ceil
    combinations of M' and B'. If no start converges the exhaustive result
    is returned with ``fallback=True``.
    """
    try:
        point, converged = _continuous_max(cfg, delayed)
    except QuadratureError as exc:
        point, converged = None, False
        warnings.warn(f"relaxed optimizer hit a quadrature failure: {exc}")
    if not converged or point is None:
        warnings.warn("relaxed optimizer did not converge; using exhaustive search")
        res = optimize_exhaustive(cfg, delayed)
        return OptResult(res.mode, res.b_bits, res.utility, res.grid, "relaxed",
                         res.negative_utility, fallback=True)
    m_star, b_star = (float(v) for v in point)
    modes = {min(max(f(m_star), 2), cfg.n_t - 1) for f in (math.floor, math.ceil)}
    bits = {min(max(f(b_star), 0), cfg.b_max) for f in (math.floor, math.ceil)}
    best = None
    for m in sorted(modes):
        for b in sorted(bits):
            u = cf.utility(m, b, cfg, delayed)
            if _better(u, m, b, best):
                best = (u, m, b)
    u, m, b = best
    return OptResult(mode=m, b_bits=b, utility=u, grid=None, method="relaxed",
                     negative_utility=u < 0, relaxed_point=(m_star, b_star))


@dataclass(frozen=True)
class RegimeThresholds:
    """Cut-offs for the asymptotic shortcuts.

    ``fixed_power`` is the transmit power assumed in the high-AIC regime;
    None means the B = 0 power cap.
    """

    eta_high: float = 1e3
    eta_low: float = 1e-3
    c_large: int = 20
    fixed_power: Optional[float] = None


def select_asymptotic_regime(cfg: cf.SystemConfig,
                             thresholds: RegimeThresholds = RegimeThresholds()):
    """(M, B) predicted by the asymptotic analysis, or None if no regime applies.

    Strict AIC / large path loss (eta large) and large C both favour full
    multiplexing without purchased feedback. A loose AIC (eta small) needs no
    feedback and M is picked by a one-dimensional rate search.
    """
    eta = cfg.eta
    if eta >= thresholds.eta_high or cfg.c_bits >= thresholds.c_large:
        return cfg.n_t - 1, 0
    if eta <= thresholds.eta_low:
        power = thresholds.fixed_power or cf.power_cap(0, cfg)
        rates = [(cf.asymptotic_rate_fixed_power(m, power, cfg), -m) for m in cfg.modes]
        return -max(rates)[1], 0
    return None


def optimize_asymptotic(cfg: cf.SystemConfig,
                        thresholds: RegimeThresholds = RegimeThresholds()):
    choice = select_asymptotic_regime(cfg, thresholds)
    if choice is None:
        return None
    m, b = choice
    u = cf.utility(m, b, cfg)
    return OptResult(mode=m, b_bits=b, utility=u, grid=None, method="asymptotic",
                     negative_utility=u < 0)
