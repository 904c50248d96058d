"""Per-round simulation kernels in two interchangeable flavors.

The numba flavor compiles the per-node loops with ``@njit``; the numpy
flavor vectorizes the same arithmetic.  Both evaluate identical
floating-point expressions in identical order, so a simulation run is
bit-for-bit reproducible across backends.

Backend selection: the ``DEECSIM_BACKEND`` environment variable ("numba" or
"numpy"), overridable per call via :func:`get_backend`.  The default is
numba when importable, else the numpy fallback.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

# Assignment codes (per node, per round).
ASSIGN_NONE = -3  # dead this round
ASSIGN_CH = -2  # node is a cluster head
ASSIGN_DIRECT_BS = -1  # no head elected; node uplinks straight to the BS

# Epoch lengths round(1/p) beyond this exceed exact float64 integers.
_EPOCH_LIMIT = 2.0**53

ENV_VAR = "DEECSIM_BACKEND"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy flavor


def _elect_numpy(residual, alive, ineligible_until, node_class, u, rnd,
                 p_opt, denom, w_normal, w_adv, w_super, t_low, w_low, p_max):
    """Threshold-draw election for one round.

    Every node id owns one entry of ``u``; entries of dead or ineligible
    nodes are skipped.  Elected nodes leave the eligible set for
    ``round(1/p)`` rounds.  Returns the elected mask.
    """
    e = residual
    w = np.where(node_class == 0, w_normal, np.where(node_class == 1, w_adv, w_super))
    if t_low >= 0.0:
        w = np.where(e <= t_low, w_low, w)
    p = np.minimum(p_opt * w * e / denom, p_max)
    with np.errstate(divide="ignore"):
        inv = 1.0 / p
    epoch = np.rint(np.minimum(inv, _EPOCH_LIMIT)).astype(np.int64)
    rmod = rnd % epoch
    t = np.minimum(p / (1.0 - p * rmod), 1.0)
    eligible = alive & (ineligible_until <= rnd) & (p > 0.0)
    elected = eligible & (u < t)
    ineligible_until[elected] = rnd + epoch[elected]
    return elected


def _assign_numpy(x, y, alive, ch_ids):
    """Nearest-head cluster assignment, ties to the lower head id.

    With no heads, every alive node is marked direct-to-BS.
    """
    n = x.shape[0]
    codes = np.full(n, ASSIGN_NONE, dtype=np.int64)
    if ch_ids.size == 0:
        codes[alive] = ASSIGN_DIRECT_BS
        return codes
    codes[ch_ids] = ASSIGN_CH
    member = alive.copy()
    member[ch_ids] = False
    mi = np.flatnonzero(member)
    if mi.size:
        dx = x[mi][:, None] - x[ch_ids][None, :]
        dy = y[mi][:, None] - y[ch_ids][None, :]
        d2 = dx * dx + dy * dy
        # argmin keeps the first (lowest-id) head on ties
        codes[mi] = ch_ids[np.argmin(d2, axis=1)]
    return codes


def _steady_numpy(x, y, dist_to_bs, residual, alive, codes,
                  bits, e_elec, eps_fs, eps_mp, e_da, d0):
    """Steady-state data transfer: charge every alive node once.

    Members transmit to their head over the actual distance; each head is
    charged reception per member, aggregation over members + 1 signals, and
    one transmission to the BS; direct nodes transmit to the BS.  Nodes
    complete the round's action even when it kills them (clamped at zero;
    the shortfall is reported as overdraft).
    """
    n = x.shape[0]
    charge = np.zeros(n, dtype=np.float64)
    electronics = bits * e_elec

    mi = np.flatnonzero(codes >= 0)
    if mi.size:
        head = codes[mi]
        dx = x[mi] - x[head]
        dy = y[mi] - y[head]
        d = np.sqrt(dx * dx + dy * dy)
        d2 = d * d
        charge[mi] = np.where(
            d < d0,
            electronics + bits * eps_fs * d2,
            electronics + bits * eps_mp * (d2 * d2),
        )

    di = np.flatnonzero(codes == ASSIGN_DIRECT_BS)
    if di.size:
        d = dist_to_bs[di]
        d2 = d * d
        charge[di] = np.where(
            d < d0,
            electronics + bits * eps_fs * d2,
            electronics + bits * eps_mp * (d2 * d2),
        )

    ch = np.flatnonzero(codes == ASSIGN_CH)
    if ch.size:
        counts = np.bincount(codes[mi], minlength=n)[ch].astype(np.float64) if mi.size \
            else np.zeros(ch.size, dtype=np.float64)
        d = dist_to_bs[ch]
        d2 = d * d
        tx_bs = np.where(
            d < d0,
            electronics + bits * eps_fs * d2,
            electronics + bits * eps_mp * (d2 * d2),
        )
        charge[ch] = counts * electronics + bits * e_da * (counts + 1.0) + tx_bs

    remaining = residual - charge
    dying = alive & (remaining <= 0.0)
    overdraft = np.where(dying, charge - residual, 0.0)
    residual[:] = np.where(alive, np.maximum(remaining, 0.0), residual)
    alive &= remaining > 0.0

    packets_to_ch = int(mi.size)
    packets_to_bs = int(ch.size + di.size)
    return charge, overdraft, packets_to_bs, packets_to_ch


# ---------------------------------------------------------------------------
# numba flavor: same arithmetic, loop form


def _elect_loop(residual, alive, ineligible_until, node_class, u, rnd,
                p_opt, denom, w_normal, w_adv, w_super, t_low, w_low, p_max):
    n = residual.shape[0]
    elected = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if not alive[i] or ineligible_until[i] > rnd:
            continue
        e = residual[i]
        if node_class[i] == 0:
            w = w_normal
        elif node_class[i] == 1:
            w = w_adv
        else:
            w = w_super
        if t_low >= 0.0 and e <= t_low:
            w = w_low
        p = p_opt * w * e / denom
        if p > p_max:
            p = p_max
        if p <= 0.0:
            continue
        inv = 1.0 / p
        if inv > _EPOCH_LIMIT:
            inv = _EPOCH_LIMIT
        epoch = np.int64(np.rint(inv))
        rmod = rnd % epoch
        t = p / (1.0 - p * rmod)
        if t > 1.0:
            t = 1.0
        if u[i] < t:
            elected[i] = True
            ineligible_until[i] = rnd + epoch
    return elected


def _assign_loop(x, y, alive, ch_ids):
    n = x.shape[0]
    codes = np.full(n, ASSIGN_NONE, dtype=np.int64)
    if ch_ids.size == 0:
        for i in range(n):
            if alive[i]:
                codes[i] = ASSIGN_DIRECT_BS
        return codes
    for j in range(ch_ids.size):
        codes[ch_ids[j]] = ASSIGN_CH
    for i in range(n):
        if not alive[i] or codes[i] == ASSIGN_CH:
            continue
        best = -1
        best_d2 = np.inf
        for j in range(ch_ids.size):
            c = ch_ids[j]
            dx = x[i] - x[c]
            dy = y[i] - y[c]
            d2 = dx * dx + dy * dy
            if d2 < best_d2:
                best_d2 = d2
                best = c
        codes[i] = best
    return codes


def _steady_loop(x, y, dist_to_bs, residual, alive, codes,
                 bits, e_elec, eps_fs, eps_mp, e_da, d0):
    n = x.shape[0]
    charge = np.zeros(n, dtype=np.float64)
    overdraft = np.zeros(n, dtype=np.float64)
    member_count = np.zeros(n, dtype=np.int64)
    electronics = bits * e_elec
    packets_to_ch = 0
    packets_to_bs = 0

    for i in range(n):
        code = codes[i]
        if code >= 0:
            dx = x[i] - x[code]
            dy = y[i] - y[code]
            d = math.sqrt(dx * dx + dy * dy)
            d2 = d * d
            if d < d0:
                charge[i] = electronics + bits * eps_fs * d2
            else:
                charge[i] = electronics + bits * eps_mp * (d2 * d2)
            member_count[code] += 1
            packets_to_ch += 1
        elif code == ASSIGN_DIRECT_BS:
            d = dist_to_bs[i]
            d2 = d * d
            if d < d0:
                charge[i] = electronics + bits * eps_fs * d2
            else:
                charge[i] = electronics + bits * eps_mp * (d2 * d2)
            packets_to_bs += 1

    for i in range(n):
        if codes[i] == ASSIGN_CH:
            d = dist_to_bs[i]
            d2 = d * d
            if d < d0:
                tx_bs = electronics + bits * eps_fs * d2
            else:
                tx_bs = electronics + bits * eps_mp * (d2 * d2)
            counts = np.float64(member_count[i])
            charge[i] = counts * electronics + bits * e_da * (counts + 1.0) + tx_bs
            packets_to_bs += 1

    for i in range(n):
        if not alive[i]:
            continue
        remaining = residual[i] - charge[i]
        if remaining <= 0.0:
            overdraft[i] = charge[i] - residual[i]
            residual[i] = 0.0
            alive[i] = False
        else:
            residual[i] = remaining

    return charge, overdraft, packets_to_bs, packets_to_ch


if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    _elect_numba = _jit(_elect_loop)
    _assign_numba = _jit(_assign_loop)
    _steady_numba = _jit(_steady_loop)


@dataclass(frozen=True)
class Backend:
    name: str
    elect: Callable
    assign: Callable
    steady: Callable


_NUMPY_BACKEND = Backend("numpy", _elect_numpy, _assign_numpy, _steady_numpy)
if HAVE_NUMBA:
    _NUMBA_BACKEND = Backend("numba", _elect_numba, _assign_numba, _steady_numba)


def get_backend(name: str | None = None) -> Backend:
    """Resolve a kernel backend by name, the environment, or availability."""
    if name is None:
        name = os.environ.get(ENV_VAR, "").strip().lower() or None
    if name is None:
        return _NUMBA_BACKEND if HAVE_NUMBA else _NUMPY_BACKEND
    if name == "numpy":
        return _NUMPY_BACKEND
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _NUMBA_BACKEND
    raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")


if not HAVE_NUMBA and os.environ.get(ENV_VAR, "").strip().lower() not in ("", "numpy"):
    warnings.warn("numba unavailable; falling back to the numpy backend", RuntimeWarning)
