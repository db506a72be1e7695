"""Rayleigh MIMO channels, complex-to-real embedding, and lattice generators.

The real-valued system model is y = H s + w with H = (I_T kron r(H_c)) @ C,
where r(.) expands each complex entry h into [[Re h, -Im h], [Im h, Re h]],
C is the (real) block-code encoding matrix, and w has i.i.d. N(0, sigma^2/2)
real components with sigma^2 = 1/rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DegenerateChannelError(RuntimeError):
    """Raised when the effective lattice generator is numerically singular."""


@dataclass(frozen=True)
class ComplexChannel:
    """Complex n_r x n_t channel matrix with i.i.d. CN(0, 1) entries."""

    n_r: int
    n_t: int
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Codebook:
    """Real linear encoding matrix for a block code: vec(X) = C @ s."""

    kind: str
    matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class EffectiveChannel:
    """Real lattice generator with cached QR factors and noise level.

    H = Q1 @ R with R upper triangular (positive diagonal); Q2 spans the
    orthogonal complement of the column space (empty when H is square).
    Dimension metadata (n_t, n_r, coherence T) is optional: synthetic test
    channels built straight from a matrix leave it unset.
    """

    H: np.ndarray = field(repr=False)
    Q1: np.ndarray = field(repr=False)
    Q2: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    rho: float
    n_t: int | None = None
    n_r: int | None = None
    T: int | None = None

    @property
    def n_dims(self) -> int:
        """Number of real symbol dimensions (search-tree depth)."""
        return self.H.shape[1]

    @classmethod
    def from_matrix(
        cls,
        H: np.ndarray,
        rho: float,
        n_t: int | None = None,
        n_r: int | None = None,
        T: int | None = None,
    ) -> "EffectiveChannel":
        """Wrap an arbitrary real tall/square matrix as an effective channel."""
        H = np.asarray(H, dtype=float)
        m, n = H.shape
        if m < n:
            raise ValueError(f"need at least as many rows as columns, got {H.shape}")
        Qf, Rf = np.linalg.qr(H, mode="complete")
        R = Rf[:n, :].copy()
        diag = np.diag(R).copy()
        scale = float(np.linalg.norm(H)) or 1.0
        if np.min(np.abs(diag)) < 1e-12 * scale:
            raise DegenerateChannelError("effective channel is numerically rank deficient")
        sign = np.where(diag < 0, -1.0, 1.0)
        R *= sign[:, None]
        Q1 = Qf[:, :n] * sign[None, :]
        Q2 = Qf[:, n:]
        return cls(H=H, Q1=Q1, Q2=Q2, R=R, rho=float(rho), n_t=n_t, n_r=n_r, T=T)


def sample_rayleigh(n_r: int, n_t: int, rng: np.random.Generator) -> ComplexChannel:
    """Draw an n_r x n_t channel with i.i.d. circularly-symmetric CN(0, 1) entries."""
    if n_r < n_t:
        raise ValueError(
            f"unsupported configuration: need n_r >= n_t, got n_r={n_r}, n_t={n_t}"
        )
    entries = (
        rng.normal(size=(n_r, n_t)) + 1j * rng.normal(size=(n_r, n_t))
    ) / math.sqrt(2.0)
    return ComplexChannel(n_r=n_r, n_t=n_t, entries=entries)


def realify(channel: ComplexChannel, T: int) -> np.ndarray:
    """Real embedding of the channel over T symbol slots.

    Each complex entry h becomes the 2x2 block [[Re h, -Im h], [Im h, Re h]];
    the per-slot expansion is repeated block-diagonally T times, matching the
    Re/Im-interleaved, slot-major vectorisation of signals.
    """
    if T < 1:
        raise ValueError(f"coherence time must be >= 1, got {T}")
    Hc = channel.entries
    block = np.zeros((2 * channel.n_r, 2 * channel.n_t))
    block[0::2, 0::2] = Hc.real
    block[0::2, 1::2] = -Hc.imag
    block[1::2, 0::2] = Hc.imag
    block[1::2, 1::2] = Hc.real
    if T == 1:
        return block
    return np.kron(np.eye(T), block)


def vec_real(X: np.ndarray) -> np.ndarray:
    """Slot-major, Re/Im-interleaved vectorisation of a complex matrix."""
    cols = []
    for t in range(X.shape[1]):
        col = np.empty(2 * X.shape[0])
        col[0::2] = X[:, t].real
        col[1::2] = X[:, t].imag
        cols.append(col)
    return np.concatenate(cols)


def identity_code(n_t: int, T: int) -> Codebook:
    """Uncoded transmission: C is the identity on the 2*n_t*T real symbols."""
    return Codebook(kind="identity", matrix=np.eye(2 * n_t * T))


def golden_code_matrix() -> Codebook:
    """8x8 real encoding matrix of the golden-ratio 2x2 full-rate block code.

    With theta = (1+sqrt(5))/2, thetabar = 1-theta, alpha = 1 + j(1-theta),
    alphabar = 1 + j(1-thetabar), the codeword carrying complex symbols
    s1..s4 is

        X = (1/sqrt(5)) * [[alpha*(s1 + s2*theta),     alpha*(s3 + s4*theta)],
                           [j*alphabar*(s3 + s4*thetabar),
                                                  alphabar*(s1 + s2*thetabar)]]

    and C maps the 8 real entries of s (Re/Im interleaved) to vec(X).  The
    1/sqrt(5) scale makes every column unit norm, so E||C s||^2 = E||s||^2.
    """
    theta = (1.0 + math.sqrt(5.0)) / 2.0
    thetabar = 1.0 - theta
    alpha = 1.0 + 1j * (1.0 - theta)
    alphabar = 1.0 + 1j * (1.0 - thetabar)
    scale = 1.0 / math.sqrt(5.0)
    C = np.zeros((8, 8))
    for j in range(8):
        s_real = np.zeros(8)
        s_real[j] = 1.0
        s = s_real[0::2] + 1j * s_real[1::2]
        X = scale * np.array(
            [
                [alpha * (s[0] + s[1] * theta), alpha * (s[2] + s[3] * theta)],
                [1j * alphabar * (s[2] + s[3] * thetabar), alphabar * (s[0] + s[1] * thetabar)],
            ]
        )
        C[:, j] = vec_real(X)
    return Codebook(kind="golden", matrix=C)


def effective_channel(script_h: np.ndarray, code: Codebook, rho: float) -> EffectiveChannel:
    """Form H = script_h @ C and its QR factorisation.

    Raises DegenerateChannelError when H is numerically rank deficient
    (|R_kk| < 1e-12 * ||H||); the caller is expected to resample the channel.
    """
    if rho <= 0:
        raise ValueError(f"noise level rho must be positive, got {rho}")
    H = script_h @ code.matrix
    return EffectiveChannel.from_matrix(H, rho)


def transmit(
    ch: EffectiveChannel, s: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Observe y = H s + w with N(0, sigma^2/2) real noise components.

    sigma^2 = 1/rho is the complex-noise variance; the real embedding splits
    it evenly over the two real dimensions of each complex entry.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (ch.H.shape[1],):
        raise ValueError(f"symbol vector has shape {s.shape}, expected ({ch.H.shape[1]},)")
    sigma = math.sqrt(0.5 / ch.rho) if math.isfinite(ch.rho) else 0.0
    w = rng.normal(0.0, sigma, size=ch.H.shape[0])
    return ch.H @ s + w
