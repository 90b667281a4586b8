"""Monte Carlo simulation of the single-mode SDE.

Ito form:          dU = (V - gamma U) dt + i sigma xi U dB,   dV = xi U dt
Stratonovich form: dU = V dt + i sigma xi U o dB,             dV = xi U dt

with gamma = sigma^2 xi^2 / 2. Three schemes are available:

``euler_maruyama_ito``
    Euler-Maruyama on the Ito form.
``heun_stratonovich``
    Heun predictor-corrector on the Stratonovich diffusion, Euler drift.
``exponential_split``
    Strang splitting: half a step of the exact coupling flow
    (dU = V dt, dV = xi U dt), the exact noise flow U -> U exp(i sigma xi dW),
    another half coupling step. The noise factor is the exact solution of the
    Ito equation dU = -gamma U dt + i sigma xi U dB, so this scheme has no
    gamma^2 dt weak bias and stays accurate at large |xi|.

Paths run in fixed blocks of ``BLOCK_SIZE``; each block returns a mean and a
centred sum of squares per recorded moment, and blocks are merged in block
order. Results therefore do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _rng
from .core import (
    TOL,
    InsufficientResolution,
    ModeState,
    MomentVector,
    NonPositiveSigma,
    NumericalBlowup,
    SeedPolicy,
    ValidationError,
)
from .moments import evolve_moments_exact

SCHEMES = ("euler_maruyama_ito", "heun_stratonovich", "exponential_split")
BLOCK_SIZE = 4096


def _check_step(u, v, t, step, xi):
    if not (np.isfinite(u) and np.isfinite(v)) or abs(u) > TOL.overflow or abs(v) > TOL.overflow:
        raise NumericalBlowup(f"mode state left the finite range at t={t}", step=step)
    return ModeState(complex(u), complex(v), xi, t)


def step_euler_maruyama(state: ModeState, sigma: float, dt: float, dw: float) -> ModeState:
    u, v, xi = state.u_hat, state.v_hat, state.xi
    gamma = 0.5 * sigma**2 * xi**2
    u_new = u + (v - gamma * u) * dt + 1j * sigma * xi * u * dw
    v_new = v + xi * u * dt
    return _check_step(u_new, v_new, state.t + dt, None, xi)


def step_heun_stratonovich(state: ModeState, sigma: float, dt: float, dw: float) -> ModeState:
    u, v, xi = state.u_hat, state.v_hat, state.xi
    g = 1j * sigma * xi
    u_pred = u + v * dt + g * u * dw
    u_new = u + v * dt + g * 0.5 * (u + u_pred) * dw
    v_new = v + xi * u * dt
    return _check_step(u_new, v_new, state.t + dt, None, xi)


def _coupling_coeffs(xi, tau):
    """exp(tau [[0, 1], [xi, 0]]) = [[c, s], [xi s, c]]."""
    if xi > 0:
        r = math.sqrt(xi)
        return math.cosh(r * tau), math.sinh(r * tau) / r
    if xi < 0:
        r = math.sqrt(-xi)
        return math.cos(r * tau), math.sin(r * tau) / r
    return 1.0, tau


def step_exponential_split(state: ModeState, sigma: float, dt: float, dw: float) -> ModeState:
    u, v, xi = state.u_hat, state.v_hat, state.xi
    c, s = _coupling_coeffs(xi, 0.5 * dt)
    u, v = c * u + s * v, xi * s * u + c * v
    u = u * complex(math.cos(sigma * xi * dw), math.sin(sigma * xi * dw))
    u, v = c * u + s * v, xi * s * u + c * v
    return _check_step(u, v, state.t + dt, None, xi)


STEPPERS = {
    "euler_maruyama_ito": step_euler_maruyama,
    "heun_stratonovich": step_heun_stratonovich,
    "exponential_split": step_exponential_split,
}


@dataclass(frozen=True)
class SchemeSpec:
    scheme: str
    dt: float
    steps: int

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not self.dt > 0 or self.steps < 1:
            raise ValidationError("dt must be positive and steps >= 1")

    @property
    def horizon(self) -> float:
        return self.dt * self.steps

    @staticmethod
    def rate(xi: float, sigma: float) -> float:
        return max(sigma**2 * xi**2, math.sqrt(abs(xi)), 1.0)

    def within_budget(self, xi: float, sigma: float) -> bool:
        return self.dt * self.rate(xi, sigma) <= TOL.stability_budget * (1 + 1e-12)

    def refined(self, xi: float, sigma: float) -> "SchemeSpec":
        """Split each step into the fewest equal substeps that meet the budget."""
        factor = max(1, math.ceil(self.dt * self.rate(xi, sigma) / TOL.stability_budget - 1e-12))
        if factor == 1:
            return self
        return SchemeSpec(self.scheme, self.horizon / (self.steps * factor), self.steps * factor)

    @classmethod
    def for_budget(cls, scheme: str, horizon: float, xi: float, sigma: float, multiple_of: int = 1,
                   dt_max: float | None = None) -> "SchemeSpec":
        """Fewest steps meeting the stability budget (and dt <= dt_max if given)."""
        steps = math.ceil(horizon * cls.rate(xi, sigma) / TOL.stability_budget - 1e-12)
        if dt_max is not None:
            steps = max(steps, math.ceil(horizon / dt_max - 1e-9))
        steps = multiple_of * math.ceil(steps / multiple_of)
        return cls(scheme, horizon / steps, steps)


@dataclass(frozen=True)
class MonteCarloEstimate:
    t: float
    m_hat: MomentVector
    stderr: tuple[float, float, float]
    n_paths: int


@njit(cache=True, nogil=True)
def _advance(scheme, u, v, xi, sigma, dt, dw, gamma, c, s):
    g = 1j * sigma * xi
    if scheme == 0:
        return u + (v - gamma * u) * dt + g * u * dw, v + xi * u * dt
    if scheme == 1:
        u_pred = u + v * dt + g * u * dw
        return u + v * dt + g * 0.5 * (u + u_pred) * dw, v + xi * u * dt
    u, v = c * u + s * v, xi * s * u + c * v
    phase = sigma * xi * dw
    u = u * complex(math.cos(phase), math.sin(phase))
    return c * u + s * v, xi * s * u + c * v


@njit(cache=True, nogil=True)
def _run_block(scheme, xi, sigma, dt, n_steps, u0, v0, record_steps, path_start, n_paths,
               mode, k0, k1, guard, c, s):
    n_rec = record_steps.shape[0]
    out = np.empty((n_paths, n_rec, 3))
    gamma = 0.5 * sigma * sigma * xi * xi
    sqdt = math.sqrt(dt)
    for p in range(n_paths):
        path = path_start + p
        u = u0
        v = v0
        r = 0
        while r < n_rec and record_steps[r] == 0:
            out[p, r, 0] = (u * u.conjugate()).real
            out[p, r, 1] = (u.conjugate() * v).real
            out[p, r, 2] = (v * v.conjugate()).real
            r += 1
        zb = 0.0
        for k in range(n_steps):
            if k % 2 == 0:
                za, zb = _rng.normal_pair(k // 2, path, mode, k0, k1)
                z = za
            else:
                z = zb
            u, v = _advance(scheme, u, v, xi, sigma, dt, sqdt * z, gamma, c, s)
            if not (abs(u) <= guard and abs(v) <= guard):
                return out, path, k + 1
            while r < n_rec and record_steps[r] == k + 1:
                out[p, r, 0] = (u * u.conjugate()).real
                out[p, r, 1] = (u.conjugate() * v).real
                out[p, r, 2] = (v * v.conjugate()).real
                r += 1
    return out, -1, -1


@njit(cache=True, nogil=True)
def _block_stats(samples):
    """Per (record, moment): Neumaier-summed mean and two-pass centred M2."""
    n, n_rec, _ = samples.shape
    mean = np.zeros((n_rec, 3))
    m2 = np.zeros((n_rec, 3))
    for r in range(n_rec):
        for j in range(3):
            total = 0.0
            comp = 0.0
            for p in range(n):
                x = samples[p, r, j]
                t = total + x
                if abs(total) >= abs(x):
                    comp += (total - t) + x
                else:
                    comp += (x - t) + total
                total = t
            mu = (total + comp) / n
            total = 0.0
            comp = 0.0
            for p in range(n):
                d = samples[p, r, j] - mu
                x = d * d
                t = total + x
                if abs(total) >= abs(x):
                    comp += (total - t) + x
                else:
                    comp += (x - t) + total
                total = t
            mean[r, j] = mu
            m2[r, j] = total + comp
    return mean, m2


def _record_steps(record_times, spec: SchemeSpec) -> np.ndarray:
    times = np.asarray(record_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValidationError("record_times must be a non-empty list")
    if np.any(np.diff(times) < 0):
        raise ValidationError("record_times must be sorted")
    if times[0] < 0 or times[-1] > spec.horizon * (1 + 1e-12):
        raise ValidationError(f"record_times must lie in [0, {spec.horizon}]")
    idx = np.rint(times / spec.dt).astype(np.int64)
    if np.any(np.abs(idx * spec.dt - times) > 1e-9 * max(spec.horizon, 1.0)):
        raise ValidationError("record_times must be integer multiples of dt")
    return idx


def simulate_paths(
    xi: float,
    sigma: float,
    init: ModeState,
    spec: SchemeSpec,
    n_paths: int,
    seeds: SeedPolicy,
    record_times,
    *,
    mode_index: int = 0,
    workers: int = 1,
) -> list[MonteCarloEstimate]:
    """Empirical (m1, m2, m3) with standard errors at each recording time.

    ``spec`` is refined automatically to satisfy the stability budget. Path i
    draws its increments from stream (mode_index, i) of ``seeds``.
    """
    if not sigma > 0:
        raise NonPositiveSigma(f"simulate_paths needs sigma > 0, got {sigma}")
    if n_paths < 2:
        raise ValidationError("need at least two paths for a standard error")
    spec = spec.refined(xi, sigma)
    rec = _record_steps(record_times, spec)
    scheme = SCHEMES.index(spec.scheme)
    c, s = _coupling_coeffs(xi, 0.5 * spec.dt)
    k0, k1 = seeds.key
    starts = list(range(0, n_paths, BLOCK_SIZE))

    def run(start):
        count = min(BLOCK_SIZE, n_paths - start)
        samples, bad_path, bad_step = _run_block(
            scheme, float(xi), float(sigma), spec.dt, spec.steps,
            complex(init.u_hat), complex(init.v_hat), rec, start, count,
            mode_index, k0, k1, TOL.overflow, c, s,
        )
        if bad_path >= 0:
            raise NumericalBlowup(
                f"path {bad_path} exceeded {TOL.overflow:g} at step {bad_step}",
                path=int(bad_path), step=int(bad_step),
            )
        mean, m2 = _block_stats(samples)
        return count, mean, m2

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, starts))
    else:
        blocks = [run(s0) for s0 in starts]

    # Chan et al. pairwise merge, always in block order
    n_tot, mean, m2 = blocks[0]
    for n_b, mean_b, m2_b in blocks[1:]:
        n_new = n_tot + n_b
        delta = mean_b - mean
        mean = mean + delta * (n_b / n_new)
        m2 = m2 + m2_b + delta * delta * (n_tot * n_b / n_new)
        n_tot = n_new

    stderr = np.sqrt(np.maximum(m2, 0.0) / (n_tot - 1) / n_tot)
    return [
        MonteCarloEstimate(
            t=float(rec[r] * spec.dt),
            m_hat=MomentVector.from_array(mean[r]),
            stderr=tuple(float(x) for x in stderr[r]),
            n_paths=n_tot,
        )
        for r in range(len(rec))
    ]


@dataclass(frozen=True)
class WeakOrderFit:
    order: float
    dts: tuple
    bias: tuple
    stderr: tuple
    reference: float


def weak_order_estimate(
    xi: float,
    sigma: float,
    init: ModeState,
    dts,
    n_paths: int,
    *,
    scheme: str = "euler_maruyama_ito",
    horizon: float = 1.0,
    seeds: SeedPolicy | None = None,
    workers: int = 1,
) -> WeakOrderFit:
    """Least-squares slope of log|bias(m1(T))| against log dt."""
    dts = np.asarray(sorted(dts, reverse=True), dtype=float)
    if dts.size < 3:
        raise ValidationError("need at least three step sizes")
    ratios = dts[:-1] / dts[1:]
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ValidationError("step sizes must form a geometric ladder")
    seeds = seeds or SeedPolicy()
    m0 = MomentVector.from_state(init.u_hat, init.v_hat)
    ref = evolve_moments_exact(m0, xi, sigma, horizon).m1
    biases, errs = [], []
    for dt in dts:
        steps = int(round(horizon / dt))
        spec = SchemeSpec(scheme, horizon / steps, steps)
        est = simulate_paths(xi, sigma, init, spec, n_paths, seeds, [horizon], workers=workers)[-1]
        biases.append(est.m_hat.m1 - ref)
        errs.append(est.stderr[0])
    if abs(biases[0]) < 3 * errs[0]:
        raise InsufficientResolution(
            f"bias {biases[0]:.3g} at dt={dts[0]} is within 3 standard errors ({errs[0]:.3g})"
        )
    order = float(np.polyfit(np.log(dts), np.log(np.abs(biases)), 1)[0])
    return WeakOrderFit(order, tuple(dts), tuple(biases), tuple(errs), ref)
