import math

import numpy as np
import pytest

from thickknot.polygon import Polygon3


def regular_polygon(n, radius=1.0):
    th = 2.0 * math.pi * np.arange(n) / n
    v = np.stack([radius * np.cos(th), radius * np.sin(th), np.zeros(n)], axis=1)
    return Polygon3(v)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_embedded_polygon(rng, n, min_gap=0.05):
    """Perturbed space circle, rejected until comfortably embedded."""
    for _ in range(200):
        th = 2.0 * math.pi * np.arange(n) / n
        r = 1.0 + rng.uniform(-0.25, 0.25, size=n)
        z = rng.uniform(-0.3, 0.3, size=n)
        v = np.stack([r * np.cos(th), r * np.sin(th), z], axis=1)
        try:
            P = Polygon3(v)
        except Exception:
            continue
        from thickknot.polygon import min_nonadjacent_gap
        if min_nonadjacent_gap(P.vertices) >= min_gap:
            return P
    raise RuntimeError("could not generate an embedded polygon")


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
