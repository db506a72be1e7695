"""PAM/QAM signal sets and rate-to-modulation mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Constellation:
    """Uniform Q-ary PAM set c_i = (2i - Q + 1) * d_q, i = 0..Q-1.

    Points are strictly increasing, symmetric about zero, with constant
    spacing 2*d_q (d_q is the half-spacing).
    """

    q: int
    d_q: float
    symbols: np.ndarray = field(repr=False)

    @property
    def min_distance(self) -> float:
        return 2.0 * self.d_q

    def nearest_index(self, x: float) -> int:
        """Index of the constellation point closest to x (clamped to range)."""
        i = int(math.floor(x / (2.0 * self.d_q) + (self.q - 1) / 2.0 + 0.5))
        return min(max(i, 0), self.q - 1)

    def index_range(self, lo: float, hi: float) -> tuple[int, int]:
        """Indices of points inside [lo, hi] as an inclusive range (i_lo, i_hi).

        The range is empty when i_lo > i_hi.  Infinite bounds are allowed.
        """
        t_lo = max(lo / (2.0 * self.d_q) + (self.q - 1) / 2.0, 0.0)
        t_hi = min(hi / (2.0 * self.d_q) + (self.q - 1) / 2.0, float(self.q - 1))
        if t_lo > t_hi:
            return 1, 0
        return int(math.ceil(t_lo - _GRID_EPS)), int(math.floor(t_hi + _GRID_EPS))


# Relative slack when mapping interval endpoints to grid indices, so that
# points lying exactly on an interval boundary are kept.
_GRID_EPS = 1e-9


def build_pam(q: int, d_q: float) -> Constellation:
    """Build the Q-ary PAM constellation {(2i - Q + 1) * d_q}."""
    if q < 2:
        raise ValueError(f"PAM order must be >= 2, got {q}")
    if d_q <= 0:
        raise ValueError(f"half-spacing must be positive, got {d_q}")
    symbols = (2.0 * np.arange(q) - q + 1) * d_q
    return Constellation(q=q, d_q=d_q, symbols=symbols)


def dq_for_rate(r_bits: float) -> float:
    """Half-spacing giving unit average energy at `r_bits` per complex symbol.

    A square QAM symbol is two independent PAM coordinates; for Q^2 = 2^r_bits
    points the mean energy is 2 * d_q^2 * (Q^2 - 1) / 3, so unit energy needs
    d_q = sqrt(1.5 / (2^r_bits - 1)).
    """
    if r_bits <= 0:
        raise ValueError(f"rate must be positive, got {r_bits}")
    return math.sqrt(1.5 / (2.0 ** r_bits - 1.0))


def pam_order_for(rho: float, r: float, n_t: int) -> int:
    """PAM order for multiplexing gain r at SNR rho (variable-rate scenario).

    Chooses Q = 2^max(1, round(r * log2(rho) / (2 n_t))) so the total rate
    grows like r * log2(rho) while Q stays a power of two and never drops
    below the binary floor.
    """
    if rho <= 1:
        raise ValueError(f"need rho > 1, got {rho}")
    exponent = max(1, round(r * math.log2(rho) / (2 * n_t)))
    return 2 ** exponent
