"""Exact solver for the chain-structured LP behind the smooth calibration error.

Solves::

    maximize    sum_i c_i * w_i
    subject to  -1 <= w_i <= 1
                |w_{i+1} - w_i| <= d_i

by dynamic programming over concave piecewise-linear value functions.  Let
``g_i(w)`` be the best partial objective with ``w_i = w``.  Then
``g_i = h_{i-1} + c_i * w`` where ``h_{i-1}(w) = max_{|u - w| <= d} g_{i-1}(u)``.
For a concave ``g`` the windowed max shifts the rising part left by ``d``, the
falling part right by ``d`` and stretches the peak into a plateau, so each step
only moves breakpoints.  The witness is recovered by clipping each stored peak
into the window allowed by its successor.

Cost is O(m) per step (breakpoint arrays), O(m^2) overall.
"""

from __future__ import annotations

import numpy as np


def solve_chain_lp(c, gaps) -> tuple[float, np.ndarray]:
    """Maximize ``c @ w`` over the box [-1, 1]^m with chained difference bounds.

    Parameters
    ----------
    c : array_like, shape (m,)
        Objective coefficients.
    gaps : array_like, shape (m - 1,)
        Nonnegative bounds on ``|w[i+1] - w[i]|``; ``inf`` removes a constraint.

    Returns
    -------
    value : float
        Optimal objective.
    w : ndarray, shape (m,)
        One optimal point.  The optimum need not be unique.
    """
    c = np.asarray(c, dtype=float)
    m = c.size
    if m == 0:
        return 0.0, np.zeros(0)
    # a gap of 2 already spans the whole box
    d = np.minimum(np.asarray(gaps, dtype=float), 2.0)
    if d.size != m - 1:
        raise ValueError(f"expected {m - 1} gaps, got {d.size}")
    if np.any(d < 0):
        raise ValueError("gaps must be nonnegative")

    xs = np.array([-1.0, 1.0])
    vals = np.array([-c[0], c[0]])
    peaks = np.empty(m)
    for i in range(1, m):
        k = int(np.argmax(vals))
        peaks[i - 1] = xs[k]
        step = d[i - 1]
        if step > 0.0:
            xs = np.concatenate((xs[: k + 1] - step, xs[k:] + step))
            vals = np.concatenate((vals[: k + 1], vals[k:]))
            lo, hi = np.interp([-1.0, 1.0], xs, vals)
            inner = (xs > -1.0) & (xs < 1.0)
            xs = np.concatenate(([-1.0], xs[inner], [1.0]))
            vals = np.concatenate(([lo], vals[inner], [hi]))
        vals = vals + c[i] * xs

    k = int(np.argmax(vals))
    value = float(vals[k])
    w = np.empty(m)
    w[-1] = xs[k]
    for i in range(m - 1, 0, -1):
        lo = max(-1.0, w[i] - d[i - 1])
        hi = min(1.0, w[i] + d[i - 1])
        w[i - 1] = min(max(peaks[i - 1], lo), hi)
    return value, w
