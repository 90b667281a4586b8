"""Reference computations that share no code with the package under test."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _rhs(m, xi, g):
    return np.array([2.0 * m[1], xi * m[0] - g * m[1] + m[2], 2.0 * xi * m[1]])


@njit(cache=True)
def rk4_moments(m0, xi, sigma, t, h_max=1e-4):
    """Classical RK4 on m1' = 2 m2, m2' = xi m1 - gamma m2 + m3, m3' = 2 xi m2.

    The step is h_max, shrunk to 0.1 / ||A||_1 for stiff modes so the
    fast eigenvalue (about -gamma) stays well inside the stability region.
    """
    g = 0.5 * sigma * sigma * xi * xi
    norm1 = max(abs(xi), 2.0 + g + 2.0 * abs(xi), 1.0)
    h = min(h_max, 0.1 / norm1)
    n = int(math.ceil(t / h - 1e-12)) if t > 0 else 0
    m = m0.copy()
    if n == 0:
        return m
    h = t / n
    for _ in range(n):
        k1 = _rhs(m, xi, g)
        k2 = _rhs(m + 0.5 * h * k1, xi, g)
        k3 = _rhs(m + 0.5 * h * k2, xi, g)
        k4 = _rhs(m + h * k3, xi, g)
        m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return m


def em_moment_map(xi, sigma, dt):
    """Exact one-step map of E-moments under Euler-Maruyama for the Ito mode SDE.

    U' = a U + dt V + i sigma xi dW U with a = 1 - gamma dt, V' = V + xi dt U.
    Expanding |U'|^2, Re(conj(U') V'), |V'|^2 and using E dW = 0, E dW^2 = dt.
    """
    g = 0.5 * sigma**2 * xi**2
    a = 1.0 - g * dt
    return np.array([
        [a * a + sigma**2 * xi**2 * dt, 2.0 * a * dt, dt * dt],
        [a * xi * dt, a + xi * dt * dt, dt],
        [xi**2 * dt * dt, 2.0 * xi * dt, 1.0],
    ])


def lambda_plus_direct(xi, sigma):
    """-sigma^2 xi^2 / 4 + sqrt(sigma^4 xi^4 + 64 xi) / 4, textbook form."""
    xi = np.asarray(xi, dtype=float)
    return -(sigma**2) * xi**2 / 4 + np.sqrt((sigma**4 * xi**4 + 64 * xi).astype(complex)) / 4


def random_cone_moments(rng, n, scale3=None):
    """n moment vectors with m1, m3 >= 0 and |m2| <= sqrt(m1 m3)."""
    m1 = rng.uniform(0.0, 2.0, n)
    m3 = rng.uniform(0.0, 2.0, n) if scale3 is None else rng.uniform(0.0, 2.0, n) * scale3
    rho = rng.uniform(-1.0, 1.0, n)
    return np.stack([m1, rho * np.sqrt(m1 * m3), m3], axis=-1)


def heun_moment_map(xi, sigma, dt):
    """Exact one-step map of E-moments under the Stratonovich Heun step.

    U' = alpha U + beta V with alpha = 1 + g dW + g^2 dW^2 / 2, beta = dt + g dt dW / 2,
    g = i sigma xi; V' = V + xi dt U. E|alpha|^2 = 1 + 3 gamma^2 dt^2,
    E|beta|^2 = dt^2 (1 + gamma dt / 2), E[conj(alpha) beta] = dt, E alpha = 1 - gamma dt.
    """
    g = 0.5 * sigma**2 * xi**2
    return np.array([
        [1.0 + 3.0 * g * g * dt * dt, 2.0 * dt, dt * dt * (1.0 + 0.5 * g * dt)],
        [xi * dt * (1.0 - g * dt), 1.0 - g * dt + xi * dt * dt, dt],
        [xi**2 * dt * dt, 2.0 * xi * dt, 1.0],
    ])
