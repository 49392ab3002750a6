"""Direct O(targets x sources) Newtonian-kernel sums.

This is the hot loop of the package. The compiled path parallelises over
target points; each target accumulates privately in a fixed source order,
so results are deterministic for any thread count.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _direct_sum_numpy(targets, sources, values, weights, power, self_value, chunk=256):
    m = targets.shape[0]
    out = np.zeros((m, values.shape[1]))
    wv = values * weights[:, None]
    for start in range(0, m, chunk):
        t = targets[start:start + chunk]
        diff = t[:, None, :] - sources[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        with np.errstate(divide="ignore"):
            k = np.where(r2 == 0.0, self_value, r2 ** (-0.5 * power))
        out[start:start + chunk] = k @ wv
    return out


if numba is not None:

    @numba.njit(parallel=True, cache=True)
    def _direct_sum_numba(targets, sources, values, weights, power, self_value):  # pragma: no cover - compiled
        m, n = targets.shape
        s = sources.shape[0]
        c = values.shape[1]
        out = np.zeros((m, c))
        half = -0.5 * power
        for i in numba.prange(m):
            acc = np.zeros(c)
            for j in range(s):
                r2 = 0.0
                for d in range(n):
                    t = targets[i, d] - sources[j, d]
                    r2 += t * t
                if r2 == 0.0:
                    k = self_value
                elif power == 1.0:
                    k = 1.0 / np.sqrt(r2)
                elif power == 2.0:
                    k = 1.0 / r2
                else:
                    k = r2 ** half
                k *= weights[j]
                for q in range(c):
                    acc[q] += k * values[j, q]
            for q in range(c):
                out[i, q] = acc[q]
        return out


def _gradient_sum_numpy(targets, sources, values, weights, power, chunk=128):
    m, n = targets.shape
    out = np.zeros((m, n, values.shape[1]))
    wv = values * weights[:, None]
    for start in range(0, m, chunk):
        t = targets[start:start + chunk]
        diff = t[:, None, :] - sources[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(r2 == 0.0, 0.0, power * r2 ** (-0.5 * power - 1.0))
        out[start:start + chunk] = np.einsum("ij,ijk,jq->ikq", g, diff, wv)
    return out


if numba is not None:

    @numba.njit(parallel=True, cache=True)
    def _gradient_sum_numba(targets, sources, values, weights, power):  # pragma: no cover - compiled
        m, n = targets.shape
        s = sources.shape[0]
        c = values.shape[1]
        out = np.zeros((m, n, c))
        expo = -0.5 * power - 1.0
        for i in numba.prange(m):
            acc = np.zeros((n, c))
            diff = np.empty(n)
            for j in range(s):
                r2 = 0.0
                for d in range(n):
                    diff[d] = targets[i, d] - sources[j, d]
                    r2 += diff[d] * diff[d]
                if r2 == 0.0:
                    continue
                g = power * r2 ** expo * weights[j]
                for d in range(n):
                    gd = g * diff[d]
                    for q in range(c):
                        acc[d, q] += gd * values[j, q]
            for d in range(n):
                for q in range(c):
                    out[i, d, q] = acc[d, q]
        return out


def gradient_sum(targets, sources, values, weights, power, backend="auto"):
    """``out[i, l, q] = sum_j dK/dx'_l (t_i - s_j) * w_j * values[j, q]``.

    For ``K = r**-power`` the source-side derivative is
    ``power * (t_l - s_l) / r**(power + 2)``; coincident points contribute 0.
    """
    targets = np.ascontiguousarray(targets, dtype=float)
    sources = np.ascontiguousarray(sources, dtype=float)
    values = np.ascontiguousarray(values, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if backend == "auto":
        backend = "numba" if numba is not None else "numpy"
    if backend == "numba":
        return _gradient_sum_numba(targets, sources, values, weights, float(power))
    if backend == "numpy":
        return _gradient_sum_numpy(targets, sources, values, weights, float(power))
    raise ValueError(f"unknown backend {backend!r}")


def direct_sum(targets, sources, values, weights, power, self_value, backend="auto"):
    """``out[i, q] = sum_j K(|t_i - s_j|) * w_j * values[j, q]`` with
    ``K(r) = r**-power`` and ``K(0) = self_value``.
    """
    targets = np.ascontiguousarray(targets, dtype=float)
    sources = np.ascontiguousarray(sources, dtype=float)
    values = np.ascontiguousarray(values, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if backend == "auto":
        backend = "numba" if numba is not None else "numpy"
    if backend == "numba":
        if numba is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return _direct_sum_numba(targets, sources, values, weights, float(power), float(self_value))
    if backend == "numpy":
        return _direct_sum_numpy(targets, sources, values, weights, float(power), float(self_value))
    raise ValueError(f"unknown backend {backend!r}")
