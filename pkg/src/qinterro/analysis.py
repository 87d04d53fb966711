"""Fringe analysis: visibility extraction, parameter estimation, weak values.

Visibility conventions: V = (d_max - d_min)/(d_max + d_min). For the standard
bench the closed forms are eps |sin 2 theta| with no object, 2 eps sqrt(mu) /
(1 + mu) for a one-arm object, and 2 eps sqrt(mu1 mu2)/(mu1 + mu2) for a
two-arm object. The estimators below invert those laws.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import jones
from .exceptions import (
    DomainError,
    InfeasibleError,
    InternalConsistencyError,
    UndefinedVisibilityError,
)
from .sources import FringeScan

# A sinusoid fit whose rms residual exceeds this many Poisson sigmas of the
# mean count level is treated as a model failure and falls back to extrema.
_FALLBACK_RESIDUAL_SIGMAS = 5.0

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class VisibilityResult:
    """Fringe visibility with its fitted sinusoid and propagated error."""

    visibility: float
    std_error: float
    d_max: float
    d_min: float
    fit_offset: float
    fit_amplitude: float
    fit_phase: float
    used_fallback: bool = False

    def __post_init__(self):
        if self.d_min < 0.0 or self.d_max < self.d_min:
            raise InternalConsistencyError(
                f"extrema out of order: d_max={self.d_max}, d_min={self.d_min}"
            )
        total = self.d_max + self.d_min
        if total > 0.0:
            v = (self.d_max - self.d_min) / total
            if abs(v - self.visibility) > 1e-12:
                raise InternalConsistencyError(
                    "stored visibility disagrees with stored extrema"
                )


def visibility_from_extrema(d_max: float, d_min: float) -> float:
    """(d_max - d_min)/(d_max + d_min) for measured fringe extremes."""
    if not (math.isfinite(d_max) and math.isfinite(d_min)):
        raise DomainError("extrema must be finite")
    if d_min < 0.0 or d_max < d_min:
        raise DomainError(f"need d_max >= d_min >= 0, got ({d_max}, {d_min})")
    total = d_max + d_min
    if total == 0.0:
        raise UndefinedVisibilityError("both extrema are zero")
    return (d_max - d_min) / total


def _extrema_result(scan: FringeScan) -> VisibilityResult:
    counts = scan.counts
    i_max = int(np.argmax(counts))
    d_max = float(counts[i_max])
    d_min = float(counts.min())
    if d_max + d_min == 0.0:
        raise UndefinedVisibilityError("all counts are zero")
    v = (d_max - d_min) / (d_max + d_min)
    # Poisson errors on the two extreme bins propagated through the ratio.
    total_sq = (d_max + d_min) ** 2
    var = (2.0 * d_min / total_sq) ** 2 * d_max + (2.0 * d_max / total_sq) ** 2 * d_min
    return VisibilityResult(
        visibility=v,
        std_error=math.sqrt(var),
        d_max=d_max,
        d_min=d_min,
        fit_offset=0.5 * (d_max + d_min),
        fit_amplitude=0.5 * (d_max - d_min),
        fit_phase=float(scan.phases[i_max]),
        used_fallback=True,
    )


def fit_fringe(scan: FringeScan) -> VisibilityResult:
    """Least-squares sinusoid fit of a fringe scan.

    Fits counts ~ a + b cos(phase - phase0) as a linear model in
    (a, b cos phase0, b sin phase0). Parameter errors are propagated from
    Poisson count variances sigma_k^2 = counts_k through the unweighted
    least-squares covariance, and sigma_V follows from V = b/a.

    If the rms residual exceeds _FALLBACK_RESIDUAL_SIGMAS Poisson sigmas of
    the mean count level, or the fitted offset or amplitude is unusable, the
    raw extrema are reported instead with used_fallback set.
    """
    if len(scan) < 4:
        raise DomainError(f"need at least 4 scan points, got {len(scan)}")
    phases = scan.phases
    y = scan.counts
    x = np.column_stack([np.ones_like(phases), np.cos(phases), np.sin(phases)])
    if np.linalg.matrix_rank(x) < 3:
        raise DomainError("phase grid does not determine a fringe")

    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    a, p, q = (float(v) for v in beta)
    b = math.hypot(p, q)
    residuals = y - x @ beta
    rms = math.sqrt(float(np.mean(residuals**2)))
    threshold = _FALLBACK_RESIDUAL_SIGMAS * math.sqrt(float(np.mean(y)) + 1.0)

    if rms > threshold or a <= 0.0 or b > a * (1.0 + 1e-9):
        return _extrema_result(scan)
    if b > a:
        b = a  # numerical guard for an exactly saturated fringe

    # Covariance of beta for the unweighted estimator with heteroscedastic
    # Poisson noise: (X^T X)^-1 X^T diag(sigma^2) X (X^T X)^-1.
    pinv = np.linalg.pinv(x)
    cov = pinv @ (pinv * np.maximum(y, 0.0)).T
    var_a = float(cov[0, 0])
    if b > 0.0:
        jac = np.array([p / b, q / b])
        var_b = float(jac @ cov[1:, 1:] @ jac)
    else:
        var_b = 0.5 * float(cov[1, 1] + cov[2, 2])
    v = b / a
    # Same algebra as V sqrt((sb/b)^2 + (sa/a)^2) but finite at b = 0.
    std_error = math.sqrt(max(var_b, 0.0) / a**2 + (b * math.sqrt(max(var_a, 0.0)) / a**2) ** 2)
    return VisibilityResult(
        visibility=v,
        std_error=std_error,
        d_max=a + b,
        d_min=a - b,
        fit_offset=a,
        fit_amplitude=b,
        fit_phase=math.atan2(q, p),
        used_fallback=False,
    )


def _check_eps(epsilon: float) -> None:
    if not (math.isfinite(epsilon) and 0.0 <= epsilon <= 1.0):
        raise DomainError(f"epsilon must be in [0, 1], got {epsilon}")


def _check_mu(name: str, mu: float) -> None:
    if not (math.isfinite(mu) and 0.0 <= mu <= 1.0):
        raise DomainError(f"{name} must be in [0, 1], got {mu}")


def visibility_no_absorber(theta: float, epsilon: float) -> float:
    """Fringe visibility with an empty bench: eps |sin 2 theta|."""
    _check_eps(epsilon)
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    return epsilon * abs(math.sin(2.0 * theta))


def visibility_one_arm(mu: float, epsilon: float) -> float:
    """Visibility with a one-arm object: 2 eps sqrt(mu) / (1 + mu)."""
    _check_mu("mu", mu)
    _check_eps(epsilon)
    return 2.0 * epsilon * math.sqrt(mu) / (1.0 + mu)


def visibility_two_arm(mu1: float, mu2: float, epsilon: float) -> float:
    """Visibility with attenuation in both arms: 2 eps sqrt(mu1 mu2)/(mu1 + mu2)."""
    _check_mu("mu1", mu1)
    _check_mu("mu2", mu2)
    _check_eps(epsilon)
    if mu1 + mu2 == 0.0:
        raise UndefinedVisibilityError("both arms are fully opaque")
    return 2.0 * epsilon * math.sqrt(mu1 * mu2) / (mu1 + mu2)


def _branch_root(visibility: float, epsilon: float, larger: bool) -> float:
    # Roots of V x^2 - 2 eps x + V = 0; they come in reciprocal pairs.
    disc = epsilon * epsilon - visibility * visibility
    if disc < 0.0:
        # Guard against roundoff at V = eps.
        if visibility - epsilon < 1e-12 * max(1.0, epsilon):
            disc = 0.0
        else:
            raise InfeasibleError(
                f"visibility {visibility} exceeds epsilon {epsilon}; no "
                "transmittance is consistent with this input purity"
            )
    root = math.sqrt(disc)
    return (epsilon + root) / visibility if larger else (epsilon - root) / visibility


def estimate_mu(visibility: float, epsilon: float = 1.0) -> float:
    """Invert the one-arm visibility law for the transmittance mu.

    Solves 2 eps sqrt(mu)/(1 + mu) = V on the physical branch mu <= 1. The
    two mathematical roots are reciprocal; the discarded one is 1/mu.
    """
    _check_eps(epsilon)
    if not math.isfinite(visibility) or visibility <= 0.0:
        raise DomainError(f"visibility must be positive, got {visibility}")
    x = _branch_root(visibility, epsilon, larger=False)
    return min(x * x, 1.0)


def estimate_mu_two_arm(
    visibility: float,
    mu1: float,
    epsilon: float = 1.0,
    larger_branch: bool = False,
) -> float:
    """Invert the two-arm visibility law for mu2 given a known mu1.

    Both quadratic branches are mathematically valid; the default returns the
    one with mu2 <= mu1, larger_branch=True the reciprocal partner (which can
    exceed 1 and then describes gain rather than loss).
    """
    _check_mu("mu1", mu1)
    _check_eps(epsilon)
    if not math.isfinite(visibility) or visibility <= 0.0:
        raise DomainError(f"visibility must be positive, got {visibility}")
    if mu1 == 0.0:
        raise DomainError("mu1 must be positive to estimate the other arm")
    y = _branch_root(visibility, epsilon, larger=larger_branch)
    return mu1 * y * y


def fit_epsilon_iprob(data: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares purity from (mu, measured interrogation probability) pairs.

    The model I(mu) = (1 - mu)/4 + eps/2 is linear in eps, so the minimizer
    is the mean of 2 (I_i - (1 - mu_i)/4), clamped to [0, 1]. Returns
    (epsilon_hat, rmse at the clamped value).
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise DomainError("need at least 2 (mu, i_prob) pairs")
    mu, iprob = arr[:, 0], arr[:, 1]
    if (mu < 0).any() or (mu > 1).any():
        raise DomainError("mu values must lie in [0, 1]")
    eps = float(np.mean(2.0 * (iprob - 0.25 * (1.0 - mu))))
    eps = min(max(eps, 0.0), 1.0)
    resid = iprob - 0.25 * (1.0 + 2.0 * eps - mu)
    return eps, float(np.sqrt(np.mean(resid**2)))


def fit_epsilon_visibility(
    data: Sequence[tuple[float, float]], mu1: float
) -> tuple[float, float]:
    """Least-squares purity from (mu2, visibility) pairs at fixed mu1.

    The model V = eps g(mu2) with g = 2 sqrt(mu1 mu2)/(mu1 + mu2) is linear
    in eps; the minimizer is sum(g V)/sum(g^2), clamped to [0, 1]. Returns
    (epsilon_hat, rmse at the clamped value).
    """
    _check_mu("mu1", mu1)
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise DomainError("need at least 1 (mu2, visibility) pair")
    mu2, vis = arr[:, 0], arr[:, 1]
    if (mu2 < 0).any() or (mu2 > 1).any():
        raise DomainError("mu2 values must lie in [0, 1]")
    with np.errstate(invalid="ignore", divide="ignore"):
        g = 2.0 * np.sqrt(mu1 * mu2) / (mu1 + mu2)
    g = np.where(mu1 + mu2 == 0.0, 0.0, g)
    denom = float(np.sum(g * g))
    if denom == 0.0:
        raise DomainError("all points have zero model visibility; eps is undetermined")
    eps = float(np.sum(g * vis) / denom)
    eps = min(max(eps, 0.0), 1.0)
    resid = vis - eps * g
    return eps, float(np.sqrt(np.mean(resid**2)))


def weak_value(theta: float, delta: float, mu: float) -> complex:
    """Weak value of the absorber between the diagonal input and P(theta).

    (cos theta + sin theta e^{i delta} sqrt(mu)) / sqrt(2) for the input
    (|H> + |V>)/sqrt(2) post-selected at angle theta.
    """
    _check_mu("mu", mu)
    if not (math.isfinite(theta) and math.isfinite(delta)):
        raise DomainError("theta and delta must be finite")
    return _SQRT_HALF * (
        math.cos(theta) + math.sin(theta) * cmath.exp(1j * delta) * math.sqrt(mu)
    )


def weak_value_detection_identity(phase: float, mu: float) -> float:
    """|weak value|^2 at the equal-superposition post-selection theta = pi/4.

    Equals the pure-input one-arm detection probability
    (1 + mu + 2 sqrt(mu) cos phase)/4, with phase the total accumulated
    phase phi + delta.
    """
    _check_mu("mu", mu)
    if not math.isfinite(phase):
        raise DomainError("phase must be finite")
    return abs(weak_value(math.pi / 4.0, phase, mu)) ** 2


def weak_value_visibility(mu: float) -> float:
    """Visibility implied by the weak-value picture: 2 sqrt(mu)/(1 + mu)."""
    _check_mu("mu", mu)
    return 2.0 * math.sqrt(mu) / (1.0 + mu)


@dataclass(frozen=True)
class NonunitaryVisibilityResult:
    """Operator-expectation visibility and its ingredients.

    weak_value is the weak value of the Hermitian factor R between the input
    and the polar post-state U^dagger |i>; it is None when that overlap
    vanishes and the decomposition is undefined. expectation is <i|F|i>.
    """

    visibility: float
    expectation: complex
    weak_value: Optional[complex]


def nonunitary_expectation_visibility(
    f: jones.Operator, i_state: Sequence[complex]
) -> NonunitaryVisibilityResult:
    """Visibility of a general nonunitary evolution F on a pure input.

    V = 2 |<i|F|i>| / (1 + <i|R^2|i>) with F = U R the polar decomposition.
    This operator-expectation form does not reduce to the one-arm fringe law
    2 eps sqrt(mu)/(1 + mu); the two quantify different comparisons and both
    are kept.
    """
    i = np.asarray(i_state, dtype=complex).reshape(-1)
    if i.shape != (2,):
        raise DomainError("i_state must be a 2-component vector")
    norm = float(np.linalg.norm(i))
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"i_state must be normalized, got norm {norm}")
    u, r = jones.polar_decompose(f)
    expectation = complex(np.vdot(i, f.matrix @ i))
    r2_mean = float(np.vdot(i, r.matrix @ (r.matrix @ i)).real)
    visibility = 2.0 * abs(expectation) / (1.0 + r2_mean)

    post = u.matrix.conj().T @ i
    overlap = complex(np.vdot(post, i))
    if abs(overlap) > 1e-12:
        wv = complex(np.vdot(post, r.matrix @ i)) / overlap
    else:
        wv = None
    return NonunitaryVisibilityResult(
        visibility=visibility, expectation=expectation, weak_value=wv
    )
