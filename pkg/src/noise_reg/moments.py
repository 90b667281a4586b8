"""Exact evolution of the per-mode second-moment system m' = A(xi) m.

For a mode with noise amplitude sigma, write gamma = sigma^2 xi^2 / 2 and
Delta = sqrt(gamma^2 + 16 xi) (principal branch). Then

    A(xi) = [[0, 2, 0], [xi, -gamma, 1], [0, 2 xi, 0]]

has eigenvalues 0 and (-gamma +- Delta) / 2 with eigenvectors
(1, 0, -xi) and (1, lambda/2, xi). Moments are propagated in these
eigen-coordinates when the basis is well conditioned and by a
scaling-and-squaring matrix exponential otherwise (xi ~ 0, Delta ~ 0).

Everything here is vectorised over leading array axes; the ``MomentVector``
wrappers are thin conveniences on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TOL,
    DegenerateSpectrum,
    MomentVector,
    NonPositiveSigma,
    ZeroFrequency,
    japanese_bracket,
)

_TAYLOR_DEGREE = 16


def build_moment_matrix(xi, sigma):
    xi = np.asarray(xi, dtype=float)
    a = np.zeros(xi.shape + (3, 3))
    a[..., 0, 1] = 2.0
    a[..., 1, 0] = xi
    a[..., 1, 1] = -0.5 * sigma**2 * xi**2
    a[..., 1, 2] = 1.0
    a[..., 2, 1] = 2.0 * xi
    return a


def eigenvalues(xi, sigma):
    """Return (gamma, Delta, lambda_plus, lambda_minus), complex where needed.

    For real Delta, lambda_plus is evaluated as 8 xi / (gamma + Delta), which
    equals (-gamma + Delta) / 2 but avoids cancellation when gamma >> 1. For
    imaginary Delta there is no cancellation and the real part is exactly
    -gamma / 2.
    """
    xi = np.asarray(xi, dtype=float)
    gamma = 0.5 * sigma**2 * xi**2
    disc = gamma**2 + 16.0 * xi
    delta = np.sqrt(disc.astype(complex))
    denom = gamma + delta
    with np.errstate(invalid="ignore", divide="ignore"):
        stable = np.where(denom == 0, 0.0, 8.0 * xi / np.where(denom == 0, 1.0, denom))
    lam_plus = np.where(disc < 0, 0.5 * (delta - gamma), stable)
    lam_minus = -0.5 * (gamma + delta)
    return gamma, delta, lam_plus, lam_minus


def complex_regime_boundary(sigma: float) -> float:
    """The xi < 0 where Delta vanishes; Delta is imaginary strictly between it and 0."""
    if sigma <= 0:
        return -math.inf
    return -((64.0 / sigma**4) ** (1.0 / 3.0))


@dataclass(frozen=True)
class ModeEigenData:
    xi: float
    gamma: float
    delta: complex
    lambda0: float
    lambda_plus: complex
    lambda_minus: complex
    v0: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray

    def basis(self) -> np.ndarray:
        """Columns v0, v+, v-."""
        return np.stack([self.v0, self.v_plus, self.v_minus], axis=1)


def _is_degenerate(delta, gamma):
    return np.abs(delta) < TOL.degenerate_rel * (1.0 + gamma)


def eigen_data(xi: float, sigma: float) -> ModeEigenData:
    if not sigma > 0:
        raise NonPositiveSigma(f"eigen_data needs sigma > 0, got {sigma}")
    gamma, delta, lp, lm = (complex(v) for v in eigenvalues(float(xi), sigma))
    gamma = gamma.real
    if _is_degenerate(delta, gamma):
        raise DegenerateSpectrum(f"double eigenvalue at xi={xi}, sigma={sigma} (|Delta|={abs(delta):.3g})")
    return ModeEigenData(
        xi=float(xi),
        gamma=gamma,
        delta=delta,
        lambda0=0.0,
        lambda_plus=lp,
        lambda_minus=lm,
        v0=np.array([1.0, 0.0, -xi], dtype=complex),
        v_plus=np.array([1.0, lp / 2.0, xi], dtype=complex),
        v_minus=np.array([1.0, lm / 2.0, xi], dtype=complex),
    )


@dataclass(frozen=True)
class EigenCoefficients:
    q0: complex
    q_plus: complex
    q_minus: complex

    def reconstruct(self, ed: ModeEigenData) -> np.ndarray:
        return self.q0 * ed.v0 + self.q_plus * ed.v_plus + self.q_minus * ed.v_minus


def _left_rows(xi, delta, lam_plus, lam_minus):
    """Rows of the inverse eigenbasis: q_j = row_j . m. Shapes (..., 3)."""
    xi = np.asarray(xi, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_xi = 1.0 / xi
        inv_d = 1.0 / delta
    zero = np.zeros_like(delta)
    l0 = np.stack([0.5 + zero, zero, -0.5 * inv_xi + zero], axis=-1)
    lp = np.stack([-0.5 * lam_minus * inv_d, 2.0 * inv_d, -0.5 * lam_minus * inv_d * inv_xi], axis=-1)
    lm = np.stack([0.5 * lam_plus * inv_d, -2.0 * inv_d, 0.5 * lam_plus * inv_d * inv_xi], axis=-1)
    return l0, lp, lm


def decompose_initial(m0: MomentVector, ed: ModeEigenData) -> EigenCoefficients:
    if abs(ed.xi) < TOL.zero_xi:
        raise ZeroFrequency(f"|xi| = {abs(ed.xi):.3g} below {TOL.zero_xi}")
    if _is_degenerate(ed.delta, ed.gamma):
        raise DegenerateSpectrum(f"double eigenvalue at xi={ed.xi}")
    m = m0.as_array()
    l0, lp, lm = _left_rows(ed.xi, ed.delta, ed.lambda_plus, ed.lambda_minus)
    return EigenCoefficients(complex(l0 @ m), complex(lp @ m), complex(lm @ m))


def expm(x) -> np.ndarray:
    """Matrix exponential of a stack of square matrices.

    Scaling and squaring: each matrix is scaled by 2^-s until its 1-norm is at
    most ``TOL.expm_norm``, a degree-16 Taylor polynomial is evaluated by
    Horner's rule (truncation < 1e-19 at that norm), then squared s times.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    norms = np.abs(x).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.ceil(np.log2(np.where(norms > 0, norms, 1.0) / TOL.expm_norm))
    s = np.maximum(s, 0).astype(int)
    y = np.ldexp(x, -s[..., None, None])
    eye = np.broadcast_to(np.eye(n), x.shape)
    e = eye.copy()
    for k in range(_TAYLOR_DEGREE, 0, -1):
        e = eye + (y @ e) / k
    for j in range(int(s.max(initial=0))):
        sel = s > j
        e[sel] = e[sel] @ e[sel]
    return e


def _decomposition_propagator(xi, sigma, t):
    """exp(tA) via eigen-coordinates plus a per-entry 'trust' mask."""
    with np.errstate(all="ignore"):
        return _decomposition_propagator_raw(xi, sigma, t)


def _decomposition_propagator_raw(xi, sigma, t):
    gamma, delta, lp, lm = eigenvalues(xi, sigma)
    l0, lpr, lmr = _left_rows(xi, delta, lp, lm)
    zero = np.zeros_like(delta)
    v0 = np.stack([1.0 + zero, zero, -xi + zero], axis=-1)
    vp = np.stack([1.0 + zero, 0.5 * lp, xi + zero], axis=-1)
    vm = np.stack([1.0 + zero, 0.5 * lm, xi + zero], axis=-1)
    ep = np.exp(lp * t)
    em = np.exp(lm * t)
    terms = (
        v0[..., :, None] * l0[..., None, :],
        ep[..., None, None] * vp[..., :, None] * lpr[..., None, :],
        em[..., None, None] * vm[..., :, None] * lmr[..., None, :],
    )
    p = terms[0] + terms[1] + terms[2]

    def inf_norm(v):
        return np.abs(v).max(axis=-1)

    cond = inf_norm(v0) * inf_norm(l0) + inf_norm(vp) * inf_norm(lpr) + inf_norm(vm) * inf_norm(lmr)
    scale = sum(np.abs(term).max(axis=(-2, -1)) for term in terms)
    resid = np.abs(p.imag).max(axis=(-2, -1))
    ok = (
        (np.abs(xi) >= TOL.zero_xi)
        & ~_is_degenerate(delta, gamma)
        & np.isfinite(cond)
        & (cond <= TOL.max_condition)
        & np.isfinite(scale)
        & (resid <= TOL.imag_residue * np.maximum(scale, 1e-300))
    )
    return p.real, ok


def propagator(xi, sigma, t) -> np.ndarray:
    """exp(t A(xi)) for broadcast arrays xi, t; shape (..., 3, 3), real."""
    xi, t = np.broadcast_arrays(np.asarray(xi, dtype=float), np.asarray(t, dtype=float))
    p, ok = _decomposition_propagator(xi, sigma, t)
    if not ok.all():
        bad = ~ok
        p = np.array(p)
        p[bad] = expm(t[bad][..., None, None] * build_moment_matrix(xi[bad], sigma))
    p = np.array(p)
    p[t == 0] = np.eye(3)
    return p


def propagate(m0, xi, sigma, t) -> np.ndarray:
    """m(t) for broadcast m0 (..., 3), xi (...), t (...)."""
    m0 = np.asarray(m0, dtype=float)
    p = propagator(xi, sigma, t)
    return np.einsum("...ij,...j->...i", p, m0)


def evolve_moments_exact(m0: MomentVector, xi: float, sigma: float, t: float) -> MomentVector:
    if not sigma > 0:
        raise NonPositiveSigma(f"evolve_moments_exact needs sigma > 0, got {sigma}")
    try:
        ed = eigen_data(xi, sigma)
        q = decompose_initial(m0, ed)
    except (ZeroFrequency, DegenerateSpectrum):
        return evolve_moments_expm(m0, xi, sigma, t)
    l0, lp, lm = _left_rows(ed.xi, ed.delta, ed.lambda_plus, ed.lambda_minus)
    cond = sum(np.abs(v).max() * np.abs(row).max()
               for v, row in ((ed.v0, l0), (ed.v_plus, lp), (ed.v_minus, lm)))
    if cond > TOL.max_condition:
        return evolve_moments_expm(m0, xi, sigma, t)
    terms = (
        q.q0 * ed.v0,
        np.exp(ed.lambda_plus * t) * q.q_plus * ed.v_plus,
        np.exp(ed.lambda_minus * t) * q.q_minus * ed.v_minus,
    )
    m = terms[0] + terms[1] + terms[2]
    scale = max(np.abs(m).max(), max(np.abs(term).max() for term in terms) * 1e-3)
    if np.abs(m.imag).max() > TOL.imag_residue * scale:
        return evolve_moments_expm(m0, xi, sigma, t)
    return MomentVector.from_array(m.real)


def evolve_moments_expm(m0: MomentVector, xi: float, sigma: float, t: float) -> MomentVector:
    if t == 0:
        return m0
    a = build_moment_matrix(xi, sigma)
    return MomentVector.from_array(expm(t * a) @ m0.as_array())


def weighted_energy(m, xi):
    """F = m1 + m3 / <xi>; accepts a MomentVector or an array (..., 3)."""
    if isinstance(m, MomentVector):
        return m.m1 + m.m3 / float(japanese_bracket(xi))
    m = np.asarray(m, dtype=float)
    return m[..., 0] + m[..., 2] / japanese_bracket(xi)


def spectral_abscissa_bound(sigma: float) -> tuple[float, float]:
    """(sup_xi Re lambda_plus, its maximiser) = (2 sigma^-2/3, 2 sigma^-4/3)."""
    if not sigma > 0:
        raise NonPositiveSigma(f"no uniform abscissa bound for sigma={sigma}")
    return 2.0 * sigma ** (-2.0 / 3.0), 2.0 * sigma ** (-4.0 / 3.0)
