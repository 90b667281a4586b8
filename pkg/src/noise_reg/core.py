"""Shared value types, validation, tolerances and the seeding policy."""

from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import _rng

SCHEMA_VERSION = 1
DEFAULT_SEED = 0x5EED


class NoiseRegError(Exception):
    """Base class for domain errors."""


class ValidationError(NoiseRegError, ValueError):
    pass


class NonPositiveSigma(ValidationError):
    pass


class NonPositiveHorizon(ValidationError):
    pass


class ZeroFrequency(NoiseRegError):
    pass


class DegenerateSpectrum(NoiseRegError):
    pass


class NumericalBlowup(NoiseRegError, FloatingPointError):
    def __init__(self, message, path=None, step=None):
        super().__init__(message)
        self.path = path
        self.step = step


class InsufficientResolution(NoiseRegError):
    pass


class CertificationFailure(NoiseRegError):
    def __init__(self, message, worst=None, constants=None):
        super().__init__(message)
        self.worst = worst or {}
        self.constants = constants


@dataclass(frozen=True)
class Tolerances:
    """Every numerical tolerance used in the package, in one place."""

    cone: float = 1e-9
    degenerate_rel: float = 1e-8  # |Delta| < degenerate_rel * (1 + gamma)
    zero_xi: float = 1e-12
    imag_residue: float = 1e-9
    # eigen-coordinates are abandoned for expm beyond this condition estimate
    max_condition: float = 1e6
    vieta_rel: float = 1e-12
    eigen_residual: float = 1e-10
    abscissa_abs: float = 1e-12
    overflow: float = 1e300
    stability_budget: float = 0.25
    expm_norm: float = 0.5
    round_trip: float = 1e-12
    parseval: float = 1e-12
    divergence_factor: float = 10.0
    stability_rel: float = 0.01
    constant_margin: float = 0.1


TOL = Tolerances()


@dataclass(frozen=True)
class ModelParams:
    sigma: float = 1.0
    horizon: float = 1.0


def validate_params(p: ModelParams, mode: str = "stochastic") -> ModelParams:
    if mode not in ("stochastic", "deterministic"):
        raise ValueError(f"unknown mode {mode!r}")
    if not math.isfinite(p.horizon) or p.horizon <= 0:
        raise NonPositiveHorizon(f"horizon must be positive, got {p.horizon}")
    if not math.isfinite(p.sigma) or p.sigma < 0:
        raise NonPositiveSigma(f"sigma must be nonnegative, got {p.sigma}")
    if mode == "stochastic" and p.sigma <= 0:
        raise NonPositiveSigma(f"stochastic runs need sigma > 0, got {p.sigma}")
    return p


@dataclass(frozen=True)
class MomentVector:
    """(E|U|^2, E Re(conj(U) V), E|V|^2) for one Fourier mode."""

    m1: float
    m2: float
    m3: float

    @classmethod
    def from_array(cls, a) -> "MomentVector":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    @classmethod
    def from_state(cls, u: complex, v: complex) -> "MomentVector":
        return cls(abs(u) ** 2, (np.conj(u) * v).real, abs(v) ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])

    def cone_excess(self) -> float:
        """Amount by which |m2| exceeds sqrt(m1 m3); <= 0 inside the cone."""
        return abs(self.m2) - math.sqrt(max(self.m1, 0.0)) * math.sqrt(max(self.m3, 0.0))

    def is_valid(self, tol: float = TOL.cone) -> bool:
        return self.m1 >= -tol and self.m3 >= -tol and self.cone_excess() <= tol


@dataclass(frozen=True)
class ModeState:
    u_hat: complex
    v_hat: complex
    xi: float
    t: float = 0.0

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.u_hat) and np.isfinite(self.v_hat))


@dataclass(frozen=True)
class SeedPolicy:
    """Master seed; per-(mode, path) streams are Philox counter blocks.

    Stream id rule: Philox key = master_seed (64 bit), counter words
    (draw_lo, draw_hi, path_index, mode_index). Indices must fit in 32 bits.
    """

    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValidationError("master_seed must be a 64-bit unsigned integer")

    @property
    def key(self):
        return _rng.split_seed(self.master_seed)


@dataclass(frozen=True)
class Stream:
    """Handle on one deterministic Gaussian stream."""

    policy: SeedPolicy
    mode_index: int
    path_index: int

    def normals(self, count: int, start: int = 0) -> np.ndarray:
        k0, k1 = self.policy.key
        out = np.empty(int(count))
        return _rng.fill_normals(out, int(start), self.path_index, self.mode_index, k0, k1)


def derive_stream(policy: SeedPolicy, mode_index: int, path_index: int) -> Stream:
    for name, idx in (("mode_index", mode_index), ("path_index", path_index)):
        if not 0 <= int(idx) < 2**32:
            raise ValidationError(f"{name} must be in [0, 2**32), got {idx}")
    return Stream(policy, int(mode_index), int(path_index))


def japanese_bracket(xi):
    return np.sqrt(1.0 + np.square(xi))


def build_id() -> str:
    """git-describe style identifier, falling back to the package version."""
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"v{__version__}-{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"v{__version__}"


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


@dataclass
class RunManifest:
    """Provenance for one CLI run. ``options`` holds every resolved setting."""

    command: str
    options: dict[str, Any] = field(default_factory=dict)
    params: ModelParams = field(default_factory=ModelParams)
    grids: dict[str, Any] = field(default_factory=dict)
    seed_policy: SeedPolicy | None = None
    scheme: dict[str, Any] | None = None
    outputs: list[str] = field(default_factory=list)
    build: str = ""
    timestamp: str = ""
    schema_version: int = SCHEMA_VERSION

    def stamp(self) -> "RunManifest":
        self.build = build_id()
        self.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return self

    def to_dict(self) -> dict:
        d = _jsonable(self)
        d["seed_policy"] = None if self.seed_policy is None else {
            "master_seed": int(self.seed_policy.master_seed),
            "rule": "philox4x32-10 key=master_seed, counter=(draw_lo, draw_hi, path, mode)",
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        sp = d.get("seed_policy")
        return cls(
            command=d["command"],
            options=dict(d.get("options", {})),
            params=ModelParams(**d.get("params", {})),
            grids=dict(d.get("grids", {})),
            seed_policy=None if sp is None else SeedPolicy(int(sp["master_seed"])),
            scheme=d.get("scheme"),
            outputs=list(d.get("outputs", [])),
            build=d.get("build", ""),
            timestamp=d.get("timestamp", ""),
            schema_version=int(d.get("schema_version", SCHEMA_VERSION)),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls.from_dict(json.loads(text))
