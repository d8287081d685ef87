"""Independent reference computations shared by the test modules."""

import numpy as np

from lidarcam.polygon import ccw_sort


def random_convex(rng, n=12, center=(0, 0), scale=1.0):
    pts = rng.normal(size=(n, 2)) * scale + np.asarray(center)
    return ccw_sort(pts)


def mc_iou(a, b, rng, n=100_000):
    """Point-sampling IoU over the joint bounding box, using half-plane membership."""
    lo = np.minimum(a.min(0), b.min(0))
    hi = np.maximum(a.max(0), b.max(0))
    s = rng.uniform(lo, hi, (n, 2))

    def inside(poly):
        # angular order about the centroid is counter-clockwise for a convex polygon
        c = poly.mean(axis=0)
        p = poly[np.argsort(np.arctan2(poly[:, 1] - c[1], poly[:, 0] - c[0]))]
        e = np.roll(p, -1, axis=0) - p
        rel = s[:, None, :] - p[None]
        cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        return np.all(cross >= 0, axis=1)

    ia, ib = inside(a), inside(b)
    union = np.sum(ia | ib)
    return np.sum(ia & ib) / union if union else 0.0
