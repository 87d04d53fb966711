"""Interferometer bench: state evolution and detection probabilities.

The bench is a common-path polarization interferometer. A photon is
pre-selected along H, rotated onto the diagonal by a half-wave plate at pi/8,
split into two displaced paths carrying a relative phase phi1, optionally
attenuated by an object in one or both paths, swapped by a half-wave plate at
pi/4, recombined with a second relative phase phi2, and finally post-selected
by a polarizer at theta_post in front of the detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from . import jones
from .exceptions import DomainError, InternalConsistencyError

_QUARTER_PI = math.pi / 4
_EIGHTH_PI = math.pi / 8


@dataclass(frozen=True)
class NoAbsorber:
    """Empty object slot; equivalent to a one-arm absorber with mu = 1."""


@dataclass(frozen=True)
class OneArmAbsorber:
    """Partial absorber in the displaced (V) path."""

    mu: float
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and 0.0 <= self.mu <= 1.0):
            raise DomainError(f"mu must be in [0, 1], got {self.mu}")
        if not math.isfinite(self.delta):
            raise DomainError("delta must be finite")


@dataclass(frozen=True)
class TwoArmAbsorber:
    """Absorber spanning both paths with a common phase delta."""

    mu1: float
    mu2: float
    delta: float = 0.0

    def __post_init__(self):
        for name, mu in (("mu1", self.mu1), ("mu2", self.mu2)):
            if not (math.isfinite(mu) and 0.0 <= mu <= 1.0):
                raise DomainError(f"{name} must be in [0, 1], got {mu}")
        if not math.isfinite(self.delta):
            raise DomainError("delta must be finite")


AbsorberSpec = Union[NoAbsorber, OneArmAbsorber, TwoArmAbsorber]

NO_ABSORBER = NoAbsorber()


@dataclass(frozen=True)
class BenchConfig:
    """Settings of the bench elements.

    contrast_envelope multiplies the interference (off-diagonal) term of the
    final state: 1 means the two paths stay within the coherence length and
    interfere fully, 0 means the fringe is completely washed out. The wave
    plate angles default to the standard bench (pi/8 then pi/4) and the
    closed-form detection expressions below assume those defaults.
    """

    epsilon: float = 1.0
    phi1: float = 0.0
    phi2: float = 0.0
    theta_post: float = _QUARTER_PI
    hwp1_angle: float = _EIGHTH_PI
    hwp2_angle: float = _QUARTER_PI
    contrast_envelope: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and 0.0 <= self.epsilon <= 1.0):
            raise DomainError(f"epsilon must be in [0, 1], got {self.epsilon}")
        g = self.contrast_envelope
        if not (math.isfinite(g) and 0.0 <= g <= 1.0):
            raise DomainError(f"contrast_envelope must be in [0, 1], got {g}")
        for name in ("phi1", "phi2", "theta_post", "hwp1_angle", "hwp2_angle"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def phi(self) -> float:
        """Total accumulated relative phase phi1 + phi2."""
        return self.phi1 + self.phi2

    def with_total_phase(self, phi: float) -> "BenchConfig":
        """Copy with phi2 chosen so that phi1 + phi2 equals phi."""
        return replace(self, phi2=phi - self.phi1)


def _absorber_operator(spec: AbsorberSpec) -> jones.Operator:
    if isinstance(spec, NoAbsorber):
        return jones.absorber(1.0, 0.0)
    if isinstance(spec, OneArmAbsorber):
        return jones.absorber(spec.mu, spec.delta)
    if isinstance(spec, TwoArmAbsorber):
        return jones.two_arm_absorber(spec.mu1, spec.mu2, spec.delta)
    raise DomainError(f"unknown absorber spec {spec!r}")


def evolve_bench(
    cfg: BenchConfig, absorber: AbsorberSpec = NO_ABSORBER
) -> jones.DensityMatrix:
    """Propagate the pre-selected state through the bench elements in order.

    Returns the (generally sub-normalized) state arriving at the post-selection
    polarizer. The second prism pair recombines the physically displaced paths;
    because the intervening half-wave plate swapped which polarization occupies
    the delayed path, its relative phase enters the polarization basis with the
    opposite sign to the first one.
    """
    rho = jones.initial_state(cfg.epsilon)
    rho = jones.apply_operator(jones.half_wave_plate(cfg.hwp1_angle), rho)
    rho = jones.apply_operator(jones.relative_phase(cfg.phi1), rho)
    rho = jones.apply_operator(_absorber_operator(absorber), rho)
    rho = jones.apply_operator(jones.half_wave_plate(cfg.hwp2_angle), rho)
    rho = jones.apply_operator(jones.relative_phase(-cfg.phi2), rho)

    gamma = cfg.contrast_envelope
    if gamma != 1.0:
        m = rho.matrix.copy()
        m[0, 1] *= gamma
        m[1, 0] *= gamma
        rho = jones.DensityMatrix(m)
    return rho


def detection_prob(
    cfg: BenchConfig, absorber: AbsorberSpec = NO_ABSORBER
) -> float:
    """Click probability behind the post-selection polarizer at theta_post."""
    rho = evolve_bench(cfg, absorber)
    proj = jones.polarizer(cfg.theta_post)
    p = float(np.trace(proj.matrix @ rho.matrix).real)
    if p < -jones.COMPOSITE_TOL or p > 1.0 + jones.COMPOSITE_TOL:
        raise InternalConsistencyError(f"detection probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def detection_prob_washed(mu: float, theta_post: float = _QUARTER_PI) -> float:
    """Detection probability when the fringe is fully washed out.

    With no interference term the two paths add incoherently:
    (mu cos^2 theta + sin^2 theta) / 2, which is (1 + mu)/4 at theta = pi/4.
    """
    if not (math.isfinite(mu) and 0.0 <= mu <= 1.0):
        raise DomainError(f"mu must be in [0, 1], got {mu}")
    c, s = math.cos(theta_post), math.sin(theta_post)
    return 0.5 * (mu * c * c + s * s)


def two_arm_detection(mu1: float, mu2: float, epsilon: float, phi: float) -> float:
    """Closed-form click probability with attenuation in both paths.

    (mu1 + mu2 + 2 eps sqrt(mu1 mu2) cos phi) / 4 at the standard bench
    settings (theta_post = pi/4, full contrast).
    """
    for name, mu in (("mu1", mu1), ("mu2", mu2)):
        if not (math.isfinite(mu) and 0.0 <= mu <= 1.0):
            raise DomainError(f"{name} must be in [0, 1], got {mu}")
    if not (math.isfinite(epsilon) and 0.0 <= epsilon <= 1.0):
        raise DomainError(f"epsilon must be in [0, 1], got {epsilon}")
    return 0.25 * (mu1 + mu2 + 2.0 * epsilon * math.sqrt(mu1 * mu2) * math.cos(phi))


def i_prob(mu: float, epsilon: float) -> float:
    """Interrogation probability: drop of the bright-fringe detection rate.

    Difference between the constructive-fringe probability without the object
    and the washed-out probability with it: (1 + 2 eps - mu) / 4. For a fully
    opaque object and a pure input this is 3/4; for a transparent object it
    falls to 1/2.
    """
    if not (math.isfinite(mu) and 0.0 <= mu <= 1.0):
        raise DomainError(f"mu must be in [0, 1], got {mu}")
    if not (math.isfinite(epsilon) and 0.0 <= epsilon <= 1.0):
        raise DomainError(f"epsilon must be in [0, 1], got {epsilon}")
    return 0.25 * (1.0 + 2.0 * epsilon - mu)
