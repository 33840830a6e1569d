"""Derivative-free 1-D maximization: uniform grid scan, then golden-section refinement."""
from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, a: float, b: float, tol: float = 1e-8, max_iter: int = 200):
    """Maximize a unimodal ``f`` on ``[a, b]`` until the bracket is shorter than ``tol``.

    Returns ``(x, f(x))``.  The bracket endpoints are candidates too, so a
    maximum sitting on the boundary is not lost.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best = max(((c, fc), (d, fd), (a, f(a)), (b, f(b))), key=lambda pair: pair[1])
    return best


def grid_refine_max(f_vec, f, lo: float, hi: float, points: int, tol: float, interior=False):
    """Global maximum of ``f`` on ``(lo, hi]``.

    ``f_vec`` evaluates the objective on an array of points.  The best of
    ``points`` uniform samples is refined by golden section inside its two
    neighbouring cells.  With ``interior=True`` only strict local maxima of the
    sampled curve (not the left end) qualify, which skips a maximum the search
    starts out on.  Returns ``(x, f(x))`` or ``None`` when no candidate exists.
    """
    step = (hi - lo) / points
    xs = lo + step * np.arange(1, points + 1)
    ys = np.asarray(f_vec(xs), dtype=float)
    if interior:
        left = np.concatenate(([f(lo)], ys[:-1]))
        right = np.concatenate((ys[1:], [-np.inf]))
        candidates = np.flatnonzero((ys > left) & (ys >= right))
        if candidates.size == 0:
            return None
        i = candidates[np.argmax(ys[candidates])]
    else:
        i = int(np.argmax(ys))
    a = xs[i] - step
    b = min(xs[i] + step, hi)
    x, y = golden_section_max(f, a, b, tol=tol)
    if y < ys[i] or x <= lo:
        x, y = xs[i], ys[i]
    return float(x), float(y)
