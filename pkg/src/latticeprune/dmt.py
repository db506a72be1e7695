"""Diversity-multiplexing curves, decoder radius planning, and tail numerics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .channel import EffectiveChannel
from .constellation import Constellation
from .equalize import StreamSnrs


def dmt_mmse(n_t: int, n_r: int, r: float) -> float:
    """Diversity of the MMSE receiver: (n_r - n_t + 1) * (1 - r/n_t), floored at 0."""
    if r < 0 or r > min(n_t, n_r):
        raise ValueError(f"multiplexing gain {r} outside [0, {min(n_t, n_r)}]")
    return max(0.0, (n_r - n_t + 1) * (1.0 - r / n_t))


def dmt_optimal(n_t: int, n_r: int, r: float) -> float:
    """Optimal diversity curve: piecewise-linear through (k, (n_t-k)(n_r-k))."""
    if r < 0 or r > min(n_t, n_r):
        raise ValueError(f"multiplexing gain {r} outside [0, {min(n_t, n_r)}]")
    ks = np.arange(min(n_t, n_r) + 1)
    return float(np.interp(r, ks, (n_t - ks) * (n_r - ks)))


@dataclass(frozen=True)
class RadiusPlan:
    """Search radii of the tree-pruning detector.

    r_sd is the hypersphere radius, r_zsd the per-layer window radii around
    the equalized coordinates: r_zsd[k] = d_q + gamma / (d_q * snr_mmse[k])
    with gamma = (d_ml - d_mmse) * ln(rho), and r_sd^2 = d_ml * ln(rho) / rho.
    """

    r_sd: float
    r_zsd: np.ndarray = field(repr=False)
    gamma: float
    d_ml: float
    d_mmse: float


def radius_plan(
    ch: EffectiveChannel,
    cons: Constellation,
    snrs: StreamSnrs,
    r: float,
    d_ml: float | None = None,
    d_mmse: float | None = None,
) -> RadiusPlan:
    """Build the radius plan for one channel realization.

    The diversity curves default to the optimal curve and the MMSE curve for
    the channel's antenna configuration; pass `d_ml`/`d_mmse` to drive the
    radii with a different tradeoff curve (e.g. for codes whose ML diversity
    is not the optimal one).
    """
    if not math.isfinite(ch.rho) or ch.rho <= 1:
        raise ValueError(f"radius plan needs finite rho > 1, got {ch.rho}")
    if d_ml is None or d_mmse is None:
        if ch.n_t is None or ch.n_r is None:
            raise ValueError("channel lacks antenna metadata; pass d_ml and d_mmse")
        d_ml = dmt_optimal(ch.n_t, ch.n_r, r) if d_ml is None else d_ml
        d_mmse = dmt_mmse(ch.n_t, ch.n_r, r) if d_mmse is None else d_mmse
    log_rho = math.log(ch.rho)
    gamma = (d_ml - d_mmse) * log_rho
    r_zsd = cons.d_q + gamma / (cons.d_q * np.asarray(snrs.mmse, dtype=float))
    r_sd = math.sqrt(d_ml * log_rho / ch.rho)
    return RadiusPlan(r_sd=r_sd, r_zsd=r_zsd, gamma=gamma, d_ml=d_ml, d_mmse=d_mmse)


def q_function(x) -> float | np.ndarray:
    """Gaussian tail probability Q(x) = P(N(0,1) > x), via erfc."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def upper_gamma_reg(n: int, x: float) -> float:
    """Regularized upper incomplete gamma at integer shape n.

    Gamma(n, x) = exp(-x) * sum_{m=0}^{n-1} x^m / m!, the tail probability
    P(chi2_{2n} / 2 > x).
    """
    if n < 1 or n != int(n):
        raise ValueError(f"shape must be a positive integer, got {n}")
    if x < 0:
        raise ValueError(f"need x >= 0, got {x}")
    acc = term = 1.0
    for m in range(1, int(n)):
        term *= x / m
        acc += term
    return min(1.0, math.exp(-x) * acc)


def inverse_upper_gamma(n: int, p: float) -> float:
    """x such that upper_gamma_reg(n, x) = p, by bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"need 0 < p < 1, got {p}")
    lo, hi = 0.0, 1.0
    while upper_gamma_reg(n, hi) > p:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if upper_gamma_reg(n, mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sd_overflow_probability(n_r: int, T: int, rho: float, r_sd: float) -> float:
    """Probability that the noise falls outside the detector hypersphere.

    ||w||^2 sums 2*n_r*T real N(0, 1/(2 rho)) components, so rho*||w||^2 is
    Gamma(n_r*T, 1)-distributed and

        P(||w|| > r_sd) = upper_gamma_reg(n_r * T, rho * r_sd^2).
    """
    return upper_gamma_reg(n_r * T, rho * r_sd * r_sd)
