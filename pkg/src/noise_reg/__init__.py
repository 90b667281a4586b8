"""Spectral laboratory for a Stratonovich-perturbed weakly hyperbolic equation.

The model is du = v dt + sigma u_x o dB, dv = -i u_x dt on the line. Each
Fourier mode obeys a 2-dimensional linear SDE whose second moments solve a
closed 3x3 ODE; this package evolves those moments exactly, simulates the
mode SDE by Monte Carlo, and checks numerically that sigma > 0 yields
Sobolev bounds uniform in frequency while sigma = 0 does not.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    TOL,
    CertificationFailure,
    DegenerateSpectrum,
    InsufficientResolution,
    ModeState,
    ModelParams,
    MomentVector,
    NonPositiveHorizon,
    NonPositiveSigma,
    NumericalBlowup,
    RunManifest,
    SeedPolicy,
    ZeroFrequency,
    derive_stream,
    validate_params,
)

__all__ = [
    "TOL",
    "CertificationFailure",
    "DegenerateSpectrum",
    "InsufficientResolution",
    "ModeState",
    "ModelParams",
    "MomentVector",
    "NonPositiveHorizon",
    "NonPositiveSigma",
    "NumericalBlowup",
    "RunManifest",
    "SeedPolicy",
    "ZeroFrequency",
    "derive_stream",
    "validate_params",
]
