import numpy as np
import pytest

from avica.polyring import Monomial, PolyVector, kernel_as_poly


def circle_points(n, radius, noise, rng):
    """Uniform random angles on a circle, plus per-coordinate Gaussian noise."""
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    pts = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    if noise > 0:
        pts = pts + rng.normal(0.0, noise, pts.shape)
    return pts


def expand_to_poly(alphas, Y, spec):
    """Symbolic expansion of a kernel feature sum_j alphas[j] * k(y_j, .)."""
    poly = PolyVector(Y.shape[1], {})
    for j, a in enumerate(alphas):
        if a != 0.0:
            poly = poly + kernel_as_poly(spec, Y[j]) * float(a)
    return poly


@pytest.fixture
def radius10_quadric():
    """x1^2 + x2^2 - 100, the vanishing polynomial of the radius-10 circle."""
    return PolyVector(
        2,
        {
            Monomial((2, 0)): 1.0,
            Monomial((0, 2)): 1.0,
            Monomial((0, 0)): -100.0,
        },
    )
