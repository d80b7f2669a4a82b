"""The five smoothing kernels and bandwidth selection.

Each kernel is a pdf/CDF/inverse-CDF triple in a unit form, scaled into a
bandwidth family by epsilon: pdf_eps(x) = pdf1(x/eps)/eps and
inv_cdf_eps(u) = eps * inv_cdf1(u). All five pdfs are symmetric and
normalized; shrinking eps concentrates the mass toward a point mass, which
is what makes convolving with pdf_eps a smoothing operator.

Kind names are the lowercase strings used by the CLI and JSON interfaces:
"gaussian", "poisson", "hyperbolic", "sigmoid", "rect".

The poisson kernel is the Cauchy density: it has no mean or variance, and
its heavy tails produce visibly different smoothing from the other four.
Nothing here depends on moments, but downstream interpretation should.

solve_epsilon picks the bandwidth from a confidence pair (r, alpha),
defined by: half the confidence mass inside [0, r], i.e.
alpha/2 = CDF_eps(r) - CDF_eps(0). Numeric inversion of that relation is
the ground truth; closed forms are a verified fast path. Two commonly
quoted closed-form variants (arctan instead of artanh for hyperbolic,
2r/alpha instead of r/alpha for rect) fail the defining relation and are
kept only so reports can flag the discrepancy.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import ConfigInvalid, DomainError

__all__ = [
    "KERNEL_KINDS", "Kernel", "solve_epsilon", "closed_form_epsilon",
    "quoted_closed_form_epsilon", "epsilon_residual",
]

KERNEL_KINDS = ("gaussian", "poisson", "hyperbolic", "sigmoid", "rect")

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_HALF_PI = math.pi / 2.0


def _pdf1(kind, t):
    if kind == "gaussian":
        return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    if kind == "poisson":
        return 1.0 / (math.pi * (1.0 + t * t))
    if kind == "hyperbolic":
        e = math.exp(-2.0 * abs(t))
        return 2.0 * e / (1.0 + e) ** 2
    if kind == "sigmoid":
        e = math.exp(-abs(t))
        return e / (1.0 + e) ** 2
    return 0.5 if abs(t) <= 1.0 else 0.0  # rect, closed support


def _cdf1(kind, t):
    if kind == "gaussian":
        return 0.5 * (math.erf(t / math.sqrt(2.0)) + 1.0)
    if kind == "poisson":
        return math.atan(t) / math.pi + 0.5
    if kind == "hyperbolic":
        return 0.5 * (math.tanh(t) + 1.0)
    if kind == "sigmoid":
        if t >= 0.0:
            return 1.0 / (1.0 + math.exp(-t))
        e = math.exp(t)
        return e / (1.0 + e)
    if t < -1.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return 0.5 * (t + 1.0)


def _inv_cdf1(kind, u):
    if kind == "gaussian":
        return math.sqrt(2.0) * specfun.erfinv(2.0 * u - 1.0)
    if kind == "poisson":
        return math.tan(_HALF_PI * (2.0 * u - 1.0))
    if kind == "hyperbolic":
        return specfun.artanh(2.0 * u - 1.0)
    if kind == "sigmoid":
        return math.log(u) - math.log1p(-u)
    return 2.0 * u - 1.0


def _log_pdf1(kind, t):
    if kind == "gaussian":
        return -0.5 * t * t - _LOG_SQRT_2PI
    if kind == "poisson":
        return -math.log(math.pi) - math.log1p(t * t)
    if kind == "hyperbolic":
        return math.log(2.0) - 2.0 * (abs(t) + math.log1p(math.exp(-2.0 * abs(t))))
    if kind == "sigmoid":
        return -abs(t) - 2.0 * math.log1p(math.exp(-abs(t)))
    return math.log(0.5) if abs(t) <= 1.0 else -math.inf


def _pdf1_array(kind, t):
    if kind == "gaussian":
        return np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)
    if kind == "poisson":
        return 1.0 / (np.pi * (1.0 + t * t))
    if kind == "hyperbolic":
        e = np.exp(-2.0 * np.abs(t))
        return 2.0 * e / (1.0 + e) ** 2
    if kind == "sigmoid":
        e = np.exp(-np.abs(t))
        return e / (1.0 + e) ** 2
    return np.where(np.abs(t) <= 1.0, 0.5, 0.0)


def _cdf1_array(kind, t):
    if kind == "gaussian":
        from scipy.special import erf as erf_arr
        return 0.5 * (erf_arr(t / np.sqrt(2.0)) + 1.0)
    if kind == "poisson":
        return np.arctan(t) / np.pi + 0.5
    if kind == "hyperbolic":
        return 0.5 * (np.tanh(t) + 1.0)
    if kind == "sigmoid":
        out = np.empty_like(t)
        pos = t >= 0.0
        out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
        e = np.exp(t[~pos])
        out[~pos] = e / (1.0 + e)
        return out
    return np.clip(0.5 * (t + 1.0), 0.0, 1.0)


def _inv_cdf1_array(kind, u):
    if kind == "gaussian":
        from . import backend
        return np.sqrt(2.0) * backend.impl().erfinv_array(2.0 * u - 1.0)
    if kind == "poisson":
        return np.tan(_HALF_PI * (2.0 * u - 1.0))
    if kind == "hyperbolic":
        return np.arctanh(2.0 * u - 1.0)
    if kind == "sigmoid":
        return np.log(u) - np.log1p(-u)
    return 2.0 * u - 1.0


@dataclass(frozen=True)
class Kernel:
    """One smoothing kernel at a fixed bandwidth. Immutable, thread-safe."""

    kind: str
    epsilon: float

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ConfigInvalid(
                f"unknown kernel kind {self.kind!r}, expected one of {KERNEL_KINDS}")
        if not (isinstance(self.epsilon, (int, float)) and math.isfinite(self.epsilon)
                and self.epsilon > 0):
            raise ConfigInvalid(f"epsilon must be finite and > 0, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", float(self.epsilon))

    # scalar forms

    def pdf(self, x: float) -> float:
        return _pdf1(self.kind, x / self.epsilon) / self.epsilon

    def cdf(self, x: float) -> float:
        return _cdf1(self.kind, x / self.epsilon)

    def inv_cdf(self, u: float) -> float:
        if not 0.0 < u < 1.0:
            raise DomainError(f"inv_cdf domain is (0, 1), got {u!r}")
        return self.epsilon * _inv_cdf1(self.kind, u)

    def log_pdf(self, x: float) -> float:
        return _log_pdf1(self.kind, x / self.epsilon) - math.log(self.epsilon)

    # array forms (same math, numpy semantics)

    def pdf_array(self, x):
        x = np.asarray(x, dtype=np.float64)
        return _pdf1_array(self.kind, x / self.epsilon) / self.epsilon

    def cdf_array(self, x):
        x = np.asarray(x, dtype=np.float64)
        return _cdf1_array(self.kind, x / self.epsilon)

    def inv_cdf_array(self, u):
        u = np.asarray(u, dtype=np.float64)
        if u.size and not (u.min() > 0.0 and u.max() < 1.0):
            raise DomainError("inv_cdf domain is (0, 1)")
        return self.epsilon * _inv_cdf1_array(self.kind, u)

    # product extension over i.i.d. coordinates

    def pdf_nd(self, x) -> float:
        """Product of per-coordinate pdfs. Underflows to 0 beyond a few
        hundred dimensions; use log_pdf_nd for weights."""
        x = np.asarray(x, dtype=np.float64)
        return float(np.prod(self.pdf_array(x)))

    def log_pdf_nd(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        t = x / self.epsilon
        if self.kind == "gaussian":
            lp = -0.5 * t * t - _LOG_SQRT_2PI
        elif self.kind == "poisson":
            lp = -np.log(np.pi) - np.log1p(t * t)
        elif self.kind == "hyperbolic":
            lp = np.log(2.0) - 2.0 * (np.abs(t) + np.log1p(np.exp(-2.0 * np.abs(t))))
        elif self.kind == "sigmoid":
            lp = -np.abs(t) - 2.0 * np.log1p(np.exp(-np.abs(t)))
        else:
            lp = np.where(np.abs(t) <= 1.0, math.log(0.5), -np.inf)
        return float(np.sum(lp) - x.size * math.log(self.epsilon))

    def with_epsilon(self, epsilon: float) -> "Kernel":
        return Kernel(self.kind, epsilon)


def epsilon_residual(kind: str, r: float, alpha: float, epsilon: float) -> float:
    """Signed defect of the defining relation alpha/2 = CDF_eps(r) - 1/2."""
    return (_cdf1(kind, r / epsilon) - 0.5) - 0.5 * alpha


def _check_confidence(kind, r, alpha):
    if kind not in KERNEL_KINDS:
        raise ConfigInvalid(
            f"unknown kernel kind {kind!r}, expected one of {KERNEL_KINDS}")
    if not (isinstance(r, (int, float)) and math.isfinite(r) and r > 0):
        raise ConfigInvalid(f"radius r must be finite and > 0, got {r!r}")
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise ConfigInvalid(f"confidence alpha must be in (0, 1), got {alpha!r}")


def closed_form_epsilon(kind: str, r: float, alpha: float) -> float:
    """Closed-form bandwidth satisfying alpha/2 = CDF_eps(r) - 1/2."""
    _check_confidence(kind, r, alpha)
    if kind == "gaussian":
        return r / (math.sqrt(2.0) * specfun.erfinv(alpha))
    if kind == "poisson":
        return r / math.tan(_HALF_PI * alpha)
    if kind == "hyperbolic":
        return r / specfun.artanh(alpha)
    if kind == "sigmoid":
        return r / (math.log1p(alpha) - math.log1p(-alpha))
    return r / alpha


def quoted_closed_form_epsilon(kind: str, r: float, alpha: float) -> float:
    """Commonly quoted closed forms, two of which are wrong.

    The hyperbolic variant uses arctan where the defining relation needs
    artanh, and the rect variant reads 2r/alpha instead of r/alpha. Both
    fail the residual check; they exist here so callers can detect and
    report the disagreement instead of silently using either.
    """
    _check_confidence(kind, r, alpha)
    if kind == "hyperbolic":
        return r / math.atan(alpha)
    if kind == "rect":
        return 2.0 * r / alpha
    return closed_form_epsilon(kind, r, alpha)


def _bisect_epsilon(kind, r, alpha):
    # residual is strictly decreasing in epsilon: bracket then bisect
    lo = hi = closed_form_epsilon(kind, r, alpha)
    for _ in range(200):
        lo *= 0.25
        if epsilon_residual(kind, r, alpha, lo) > 0.0:
            break
    for _ in range(200):
        hi *= 4.0
        if epsilon_residual(kind, r, alpha, hi) < 0.0:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if epsilon_residual(kind, r, alpha, mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def solve_epsilon(kind: str, r: float, alpha: float) -> float:
    """Bandwidth from the confidence pair (r, alpha).

    Uses the closed form when it passes the defining-relation residual at
    1e-9, otherwise falls back to bisection (the ground truth).
    """
    _check_confidence(kind, r, alpha)
    eps = closed_form_epsilon(kind, r, alpha)
    if abs(epsilon_residual(kind, r, alpha, eps)) <= 1e-9:
        return eps
    return _bisect_epsilon(kind, r, alpha)
