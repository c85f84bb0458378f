import numpy as np

from calibrationlab.core.geometry import HEXAGON_VERTICES


_VERTICES = np.array([w.as_tuple() for w in HEXAGON_VERTICES])
# counterclockwise
HEXAGON = _VERTICES[np.argsort(np.arctan2(_VERTICES[:, 1], _VERTICES[:, 0]))]


def in_hexagon(p, slack=0.) -> bool:
    """
    membership in the convex hull of the six hexagon vertices, counterclockwise edges
    """
    for a, b in zip(HEXAGON, np.roll(HEXAGON, -1, axis=0)):
        d = b - a
        if d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0]) < -slack:
            return False
    return True


def hex_norm_by_bisection(v, iterations=80) -> float:
    """
    smallest t with v / t inside the hexagon hull, found by bisection
    """
    v = np.asarray(v, dtype=float)
    if not v.any():
        return 0.
    lo, hi = 0., 1.
    while not in_hexagon(v / hi):
        hi *= 2
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if in_hexagon(v / mid):
            hi = mid
        else:
            lo = mid
    return hi


def hexagon_boundary_samples(count=2000) -> np.ndarray:
    """
    points spread along the boundary of the hexagon hull
    """
    ts = np.linspace(0, 6, count, endpoint=False)
    k = ts.astype(int)
    frac = (ts - k)[:, None]
    return HEXAGON[k] * (1 - frac) + HEXAGON[(k + 1) % 6] * frac


def square(x):
    return x ** 2
