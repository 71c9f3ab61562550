"""
Independent oracles used by the tests: brute-force hulls, quadrature and
exhaustive isotonic projection.
"""

import numpy as np


def upper_hull(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Vertices of the least concave majorant of points sorted by x.

    Gift wrapping: from each vertex take the steepest slope, the farthest point on ties.
    """
    i, vx, vy = 0, [x[0]], [y[0]]
    while i < x.size - 1:
        slopes = (y[i + 1 :] - y[i]) / (x[i + 1 :] - x[i])
        best = np.max(slopes)
        j = i + 1 + int(np.flatnonzero(slopes >= best - 1e-15 * max(1.0, abs(best)))[-1])
        vx.append(x[j])
        vy.append(y[j])
        i = j
    return np.array(vx), np.array(vy)


def hull_slopes_at(x: np.ndarray, y: np.ndarray, probes: np.ndarray) -> np.ndarray:
    """Slope of the upper hull at probe points that are not vertices."""
    vx, vy = upper_hull(x, y)
    slopes = np.diff(vy) / np.diff(vx)
    idx = np.clip(np.searchsorted(vx, probes, side="right") - 1, 0, slopes.size - 1)
    return slopes[idx]


def riemann_l1(f, g, a: float, b: float, n: int = 200_000) -> float:
    """Midpoint-rule approximation of the integral of |f - g| over [a, b]."""
    t = a + (np.arange(n) + 0.5) * (b - a) / n
    return float(np.sum(np.abs(f.eval(t) - g.eval(t))) * (b - a) / n)


def isotonic_minmax(y: np.ndarray, w: np.ndarray, increasing: bool) -> np.ndarray:
    """Exhaustive min-max formula for weighted isotonic regression."""
    if not increasing:
        return -isotonic_minmax(-y, w, True)
    n = y.size
    out = np.empty(n)
    for i in range(n):
        best = -np.inf
        for j in range(i + 1):
            inner = np.inf
            for k in range(i, n):
                avg = np.sum(w[j : k + 1] * y[j : k + 1]) / np.sum(w[j : k + 1])
                inner = min(inner, avg)
            best = max(best, inner)
        out[i] = best
    return out
