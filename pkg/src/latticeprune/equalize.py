"""MMSE equalization and per-stream post-equalization SNRs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import EffectiveChannel


@dataclass(frozen=True)
class StreamSnrs:
    """Per-stream SNRs of the linear equalizers.

    mmse[k] = rho / [(H^T H + rho^-1 I)^-1]_kk - 1  (= rho * z[k])
    zf[k]   = rho / [(H^T H)^-1]_kk, or 0 with `zf_degenerate` set when
              H^T H is singular and the zero-forcing SNR is undefined.
    """

    mmse: np.ndarray = field(repr=False)
    zf: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    zf_degenerate: bool = False


def _regularized_gram(ch: EffectiveChannel) -> np.ndarray:
    G = ch.H.T @ ch.H
    if np.isfinite(ch.rho):
        G = G + np.eye(G.shape[0]) / ch.rho
    return G


def mmse_equalize(ch: EffectiveChannel, y: np.ndarray) -> np.ndarray:
    """MMSE-equalized observation (H^T H + rho^-1 I)^-1 H^T y via an SPD solve."""
    c, low = cho_factor(_regularized_gram(ch))
    return cho_solve((c, low), ch.H.T @ np.asarray(y, dtype=float))


def stream_snrs(ch: EffectiveChannel) -> StreamSnrs:
    """Compute the per-stream MMSE and zero-forcing SNRs of the channel."""
    n = ch.H.shape[1]
    c, low = cho_factor(_regularized_gram(ch))
    inv_diag = np.diag(cho_solve((c, low), np.eye(n)))
    z = 1.0 / inv_diag - (1.0 / ch.rho if np.isfinite(ch.rho) else 0.0)
    mmse = ch.rho * z if np.isfinite(ch.rho) else np.full(n, np.inf)

    gram = ch.H.T @ ch.H
    try:
        cz, lowz = cho_factor(gram)
        zf = ch.rho / np.diag(cho_solve((cz, lowz), np.eye(n)))
        degenerate = False
    except np.linalg.LinAlgError:
        zf = np.zeros(n)
        degenerate = True
    return StreamSnrs(mmse=mmse, zf=zf, z=z, zf_degenerate=degenerate)
