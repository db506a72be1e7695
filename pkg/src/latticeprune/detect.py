"""Lattice detectors: brute-force ML, conventional sphere decoding with
increased-radius restarts, and the window-pruned tree search.

The pruned detector runs a depth-first search over layers k = n..1 of the
QR-triangularized system.  At each layer the candidate set is the
intersection of the sphere-decoder interval (driven by the remaining squared
budget) with the window interval centered on the MMSE-equalized coordinate;
an empty intersection falls back to the window set alone, so the search
always reaches a leaf.  Candidates are enumerated zig-zag by distance from
the unconstrained layer center (natural index order is available for
strict-fidelity runs).  The global budget shrinks to the best leaf distance
found, never exceeding the initial sphere.

Instrumentation: every candidate drawn from a layer set and evaluated counts
as one visited node; flop accounting follows the deterministic model defined
by the module constants below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import EffectiveChannel
from .constellation import Constellation
from .dmt import RadiusPlan

# Deterministic flop model.  Search costs are counted per event; dense
# preprocessing uses closed-form counts with m observation rows and n symbol
# columns.  Every visited node costs at least one flop, so flops are strictly
# increasing in visited nodes.
NODE_FLOPS = 5            # branch residual: sub, mul, square, add, compare
LEAF_FLOPS = 3            # total distance: add tail term, compare, record
SPHERE_INTERVAL_FLOPS = 12  # sqrt, two bounds (add+div each), grid mapping
WINDOW_INTERVAL_FLOPS = 8   # two bounds, grid mapping
INTERSECT_FLOPS = 2
BUDGET_RECURSION_FLOPS = 4
RESTART_FLOPS = 2
IRS_RADIUS_FLOPS = 32     # quantile lookup for the initial sphere


def qr_flops(m: int, n: int) -> int:
    return round(4 * m * n * n - 4 * n ** 3 / 3)


def spd_solve_flops(n: int) -> int:
    return round(n ** 3 / 3 + 2 * n * n)


def gram_flops(m: int, n: int) -> int:
    return m * n * n


def matvec_flops(m: int, n: int) -> int:
    return 2 * m * n


def plan_flops(n: int) -> int:
    return 4 * n + 8


def pruned_preprocessing_flops(m: int, n: int) -> int:
    """Per-channel setup of the pruned detector: QR, MMSE solve, radius plan."""
    return (
        qr_flops(m, n)
        + gram_flops(m, n)
        + matvec_flops(m, n)
        + spd_solve_flops(n)
        + plan_flops(n)
    )


def conventional_preprocessing_flops(m: int, n: int) -> int:
    """Per-channel setup of the conventional decoder: QR and initial radius."""
    return qr_flops(m, n) + IRS_RADIUS_FLOPS


@dataclass
class DetectionOutcome:
    """Decoded vector plus search instrumentation."""

    s_hat: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    visited_nodes: int
    flops: int
    fallback_layers: int = 0
    leaves_reached: int = 0
    restarts: int = 0
    # (incremental, exact, improved) per leaf, filled on request
    leaf_checks: list[tuple[float, float, bool]] | None = None


def ml_detect(
    y: np.ndarray,
    ch: EffectiveChannel,
    cons: Constellation,
    cap: int = 1 << 24,
) -> DetectionOutcome:
    """Exhaustive maximum-likelihood search over all Q^n candidate vectors.

    Ties are broken toward the lexicographically smallest index vector.  This
    is the desk-scale oracle; it refuses instances beyond `cap` candidates.
    """
    m, n = ch.H.shape
    total = cons.q ** n
    if total > cap:
        raise ValueError(f"enumeration of {total} candidates exceeds cap {cap}")
    y = np.asarray(y, dtype=float)
    weights = cons.q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_dist = math.inf
    best_offset = -1
    chunk = 1 << 16
    for start in range(0, total, chunk):
        linear = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (linear[:, None] // weights[None, :]) % cons.q
        cands = cons.symbols[digits]
        resid = cands @ ch.H.T - y[None, :]
        dists = np.einsum("ij,ij->i", resid, resid)
        i = int(np.argmin(dists))
        # strict < keeps the earliest (lexicographically smallest) minimizer
        if dists[i] < best_dist:
            best_dist = float(dists[i])
            best_offset = start + i
    idx = (best_offset // weights) % cons.q
    flops = total * (2 * m * n + 3 * m)
    return DetectionOutcome(
        s_hat=cons.symbols[idx],
        indices=idx.astype(np.int64),
        visited_nodes=total,
        flops=flops,
        leaves_reached=total,
    )


def zsd_interval(k: int, y_tilde_k: float, r_zsd_k: float, cons: Constellation) -> list[int]:
    """Indices of points within the layer-k window [y~_k - r, y~_k + r].

    Clamped to the constellation range; when no point falls inside, the
    single nearest point is returned so the set is never empty.
    """
    lo, hi = cons.index_range(y_tilde_k - r_zsd_k, y_tilde_k + r_zsd_k)
    if lo > hi:
        j = cons.nearest_index(y_tilde_k)
        return [j]
    return list(range(lo, hi + 1))


def sd_interval(
    k: int, y_bar_cond: float, r_k_sq: float, r_kk: float, cons: Constellation
) -> list[int]:
    """Indices admitted by the sphere at layer k, empty if the budget r_k_sq < 0."""
    if r_kk <= 0:
        raise ValueError(f"triangular diagonal must be positive, got {r_kk}")
    if r_k_sq < 0:
        return []
    r_k = math.sqrt(r_k_sq)
    lo, hi = cons.index_range((y_bar_cond - r_k) / r_kk, (y_bar_cond + r_k) / r_kk)
    return list(range(lo, hi + 1)) if lo <= hi else []


def _ordered_range(lo: int, hi: int, center: float, natural: bool) -> list[int]:
    """Candidate order within [lo, hi]: zig-zag from the index nearest `center`
    (given in index units), or plain ascending indices when `natural`."""
    if natural:
        return list(range(lo, hi + 1))
    size = hi - lo + 1
    i0 = int(math.floor(center + 0.5))  # center already in index units
    i0 = min(max(i0, lo), hi)
    order = [i0]
    step = 1
    direction = 1 if center >= i0 else -1
    while len(order) < size:
        a = i0 + direction * step
        if lo <= a <= hi:
            order.append(a)
        b = i0 - direction * step
        if lo <= b <= hi:
            order.append(b)
        step += 1
    return order


def _tree_search(
    y: np.ndarray,
    ch: EffectiveChannel,
    cons: Constellation,
    sphere_radius_sq: float,
    window_radii: np.ndarray | None,
    y_tilde: np.ndarray | None,
    natural_order: bool,
    collect_leaf_checks: bool,
):
    """Shared depth-first engine for the pruned and conventional detectors.

    Returns (best_indices | None, visited, flops, fallbacks, leaves,
    leaf_records) where leaf_records holds (incremental_dist, exact_dist,
    improved) triples when requested.
    """
    m, n = ch.H.shape
    q = cons.q
    d2 = 2.0 * cons.d_q
    half_span = (q - 1) / 2.0
    sym = cons.symbols.tolist()
    Rrows = ch.R.tolist()
    Rdiag = [Rrows[k][k] for k in range(n)]
    ybar = (ch.Q1.T @ y).tolist()
    proj_sq = float(np.sum((ch.Q2.T @ y) ** 2)) if ch.Q2.shape[1] else 0.0

    pruning = window_radii is not None
    if pruning:
        wrad = [float(v) for v in window_radii]
        yt = [float(v) for v in y_tilde]

    sd_budget = sphere_radius_sq
    best_dist = math.inf
    best: list[int] | None = None

    cand: list[list[int]] = [[] for _ in range(n)]
    pos = [0] * n
    cost_above = [0.0] * n
    ycond = [0.0] * n
    skip_budget = [False] * n
    idx = [0] * n

    visited = 0
    flops = 0
    fallbacks = 0
    leaves = 0
    leaf_records: list[tuple[float, float, bool]] = []

    def enter_layer(k: int) -> None:
        nonlocal flops, fallbacks
        yc = ybar[k]
        row = Rrows[k]
        for j in range(k + 1, n):
            yc -= row[j] * sym[idx[j]]
        flops += 2 * (n - 1 - k) + BUDGET_RECURSION_FLOPS
        ycond[k] = yc
        rkk = Rdiag[k]
        center_idx = yc / rkk / d2 + half_span
        budget = sd_budget - cost_above[k]
        if budget < 0:
            sd_lo, sd_hi = 1, 0
        else:
            hw = math.sqrt(budget) / rkk / d2
            sd_lo = max(int(math.ceil(center_idx - hw - 1e-9)), 0)
            sd_hi = min(int(math.floor(center_idx + hw + 1e-9)), q - 1)
        flops += SPHERE_INTERVAL_FLOPS
        if pruning:
            w = wrad[k] / d2
            c = yt[k] / d2 + half_span
            z_lo = max(int(math.ceil(c - w - 1e-9)), 0)
            z_hi = min(int(math.floor(c + w + 1e-9)), q - 1)
            if z_lo > z_hi:
                z_lo = z_hi = min(max(int(math.floor(c + 0.5)), 0), q - 1)
            flops += WINDOW_INTERVAL_FLOPS + INTERSECT_FLOPS
            lo = max(sd_lo, z_lo)
            hi = min(sd_hi, z_hi)
            if lo > hi:
                fallbacks += 1
                lo, hi = z_lo, z_hi
                skip_budget[k] = True
            else:
                skip_budget[k] = False
        else:
            lo, hi = sd_lo, sd_hi
            skip_budget[k] = False
        cand[k] = (
            _ordered_range(lo, hi, center_idx, natural_order) if lo <= hi else []
        )
        pos[k] = 0

    k = n - 1
    enter_layer(k)
    while True:
        if pos[k] >= len(cand[k]):
            k += 1
            if k == n:
                break
            continue
        ci = cand[k][pos[k]]
        pos[k] += 1
        visited += 1
        flops += NODE_FLOPS
        t = ycond[k] - Rdiag[k] * sym[ci]
        new_cost = cost_above[k] + t * t
        if not skip_budget[k] and new_cost > sd_budget:
            if natural_order:
                continue  # later candidates may still fit under natural order
            pos[k] = len(cand[k])  # zig-zag order: remaining are no closer
            continue
        idx[k] = ci
        if k == 0:
            dist = new_cost + proj_sq
            leaves += 1
            flops += LEAF_FLOPS
            improved = False
            if dist < best_dist:
                improved = True
                best_dist = dist
                best = list(idx)
                sd_budget = min(sd_budget, best_dist)
            elif dist == best_dist and best is not None and idx < best:
                best = list(idx)  # exact tie: keep lexicographically smallest
            if collect_leaf_checks:
                s = np.array([sym[i] for i in idx])
                exact = float(np.sum((y - ch.H @ s) ** 2))
                leaf_records.append((dist, exact, improved))
            continue
        k -= 1
        cost_above[k] = new_cost
        enter_layer(k)

    return best, best_dist, visited, flops, fallbacks, leaves, leaf_records


def pruned_sd_detect(
    y: np.ndarray,
    ch: EffectiveChannel,
    plan: RadiusPlan,
    cons: Constellation,
    y_tilde: np.ndarray,
    natural_order: bool = False,
    collect_leaf_checks: bool = False,
) -> DetectionOutcome:
    """Window-pruned depth-first sphere search; total by construction.

    `plan` must have been built for this channel realization and `y_tilde`
    must be the MMSE-equalized observation.  Returns the best leaf found with
    full instrumentation; `outcome.leaf_checks` carries (incremental, exact,
    improved) leaf distances when `collect_leaf_checks` is set.
    """
    y = np.asarray(y, dtype=float)
    m, n = ch.H.shape
    best, _, visited, flops, fallbacks, leaves, records = _tree_search(
        y,
        ch,
        cons,
        plan.r_sd * plan.r_sd,
        plan.r_zsd,
        np.asarray(y_tilde, dtype=float),
        natural_order,
        collect_leaf_checks,
    )
    idx = np.array(best, dtype=np.int64)
    return DetectionOutcome(
        s_hat=cons.symbols[idx],
        indices=idx,
        visited_nodes=visited,
        flops=flops + pruned_preprocessing_flops(m, n),
        fallback_layers=fallbacks,
        leaves_reached=leaves,
        leaf_checks=records if collect_leaf_checks else None,
    )


def conventional_sd_detect(
    y: np.ndarray,
    ch: EffectiveChannel,
    cons: Constellation,
    initial_radius: float,
    growth: float = 2.0,
    natural_order: bool = False,
    collect_leaf_checks: bool = False,
) -> DetectionOutcome:
    """Sphere decoding with increased-radius restarts; always exact ML.

    When the sphere of `initial_radius` contains no lattice point the radius
    is multiplied by `growth` and the search restarts, so the decoder
    terminates with the ML point; node and flop counts accumulate across
    restarts.
    """
    if initial_radius <= 0:
        raise ValueError(f"initial radius must be positive, got {initial_radius}")
    if growth <= 1:
        raise ValueError(f"growth factor must exceed 1, got {growth}")
    y = np.asarray(y, dtype=float)
    m, n = ch.H.shape
    radius_sq = initial_radius * initial_radius
    visited = flops = leaves = restarts = 0
    records: list[tuple[float, float, bool]] = []
    while True:
        best, _, v, f, _, l, recs = _tree_search(
            y, ch, cons, radius_sq, None, None, natural_order, collect_leaf_checks
        )
        visited += v
        flops += f
        leaves += l
        records.extend(recs)
        if best is not None:
            break
        restarts += 1
        flops += RESTART_FLOPS
        radius_sq *= growth * growth
    idx = np.array(best, dtype=np.int64)
    return DetectionOutcome(
        s_hat=cons.symbols[idx],
        indices=idx,
        visited_nodes=visited,
        flops=flops + conventional_preprocessing_flops(m, n),
        leaves_reached=leaves,
        restarts=restarts,
        leaf_checks=records if collect_leaf_checks else None,
    )
