import numpy as np

TWO_PI = 2.0 * np.pi


def wrap(x):
    """Reduce angles to the half-open interval (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    out = np.pi - np.mod(np.pi - x, TWO_PI)
    if out.ndim == 0:
        return float(out)
    return out


def circ_dist(a, b):
    """Unsigned geodesic distance on the circle."""
    return np.abs(wrap(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))
