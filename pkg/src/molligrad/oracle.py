"""Brute-force references: adaptive quadrature of the smoothing integrals.

Used by tests and the convergence command, never by the estimator itself,
so the Monte Carlo path and this path stay independent. Integration is
QUADPACK with the integrand's known kink positions pre-seeded as panel
boundaries (naive adaptive estimates fall apart on piecewise integrands)
and tails truncated at T = inv_cdf(1 - 1e-12) * 1.1; for a bounded f the
discarded tail mass is below 4e-12 * sup|f|.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigInvalid, ConvergenceFailure
from .kernels import Kernel
from .models import ToyFunction

__all__ = ["QuadratureResult", "mollify_quadrature", "gradient_reference",
           "lemma_checks"]

_TAIL = 1e-12


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _truncation(kernel: Kernel) -> float:
    return kernel.inv_cdf(1.0 - _TAIL) * 1.1


def _quad(fn, lo, hi, points, epsabs, epsrel):
    pts = sorted({float(p) for p in points if lo < p < hi})
    out = integrate.quad(fn, lo, hi, points=pts or None, limit=500,
                         epsabs=epsabs, epsrel=epsrel, full_output=1)
    value, abserr, info = out[0], out[1], out[2]
    return value, abserr, int(info["neval"])


def mollify_quadrature(f, kernel: Kernel, x: float, derivative: bool = False,
                       fprime=None, kinks=(), epsabs: float = 1e-10) -> QuadratureResult:
    """Adaptive quadrature of the smoothing integral at one point:
    integral of f(x - t) * pdf_eps(t) dt, or of fprime(x - t) * pdf_eps(t)
    when derivative is requested (pass the analytic derivative).

    kinks: abscissae where f (or fprime) is non-smooth; they seed panel
    boundaries at t = x - kink. Raises ConvergenceFailure when the error
    estimate exceeds 1e-8.
    """
    if derivative:
        if fprime is None:
            raise ConfigInvalid("derivative=True needs the derivative callable")
        g = fprime
    else:
        g = f
    T = _truncation(kernel)
    pts = [x - k for k in kinks] + [0.0]
    if kernel.kind == "rect":
        # pdf discontinuity at the support edge
        pts += [-kernel.epsilon, kernel.epsilon]

    def integrand(t):
        return g(x - t) * kernel.pdf(t)

    value, abserr, neval = _quad(integrand, -T, T, pts, epsabs, epsabs)
    if abserr > 1e-8:
        raise ConvergenceFailure(
            f"quadrature error estimate {abserr:.3e} exceeds 1e-8 "
            f"(kernel={kernel.kind}, eps={kernel.epsilon}, x={x})")
    return QuadratureResult(value, abserr, neval)


def _toy_kinks(f):
    return ToyFunction.KINKS if isinstance(f, ToyFunction) else ()


def gradient_reference(f, kernel: Kernel, x0) -> np.ndarray:
    """Quadrature value of the smoothed gradient at x0, dimensions 1 and 2.

    The toy function uses its analytic piecewise derivative with kink
    seeding; anything else must expose grad_input. Beyond two dimensions
    quadrature is the wrong tool (that is the estimator's job), so this
    refuses.
    """
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    d = x0.shape[0]
    if d == 1:
        if isinstance(f, ToyFunction):
            res = mollify_quadrature(f.f, kernel, float(x0[0]), derivative=True,
                                     fprime=f.fprime, kinks=ToyFunction.KINKS)
            return np.array([res.value])
        res = mollify_quadrature(None, kernel, float(x0[0]), derivative=True,
                                 fprime=lambda s: float(f.grad_input([s])[0]))
        return np.array([res.value])
    if d == 2:
        T = _truncation(kernel)
        out = np.empty(2)
        for comp in range(2):
            def integrand(t2, t1, comp=comp):
                g = f.grad_input(np.array([x0[0] - t1, x0[1] - t2]))
                return g[comp] * kernel.pdf(t1) * kernel.pdf(t2)
            val, abserr = integrate.dblquad(integrand, -T, T, -T, T,
                                            epsabs=1e-8, epsrel=1e-8)
            if abserr > 1e-6:
                raise ConvergenceFailure(
                    f"2-d quadrature error estimate {abserr:.3e} exceeds 1e-6")
            out[comp] = val
        return out
    raise ConfigInvalid(f"quadrature reference supports 1-2 dimensions, got {d}")


def _smoothed_value(f, kernel, x, kinks):
    return mollify_quadrature(f.f, kernel, x, kinks=kinks).value


def lemma_checks() -> dict:
    """Numerical checks of the convolution identities on the toy function.

    Returns a report dict with one entry per check:
      commutativity        f*phi == phi*f (same integral, two panel layouts)
      derivative_interchange d/dx(f*phi) == f'*phi at smooth points far
                           from the jump (the jump adds a transport term,
                           checked separately)
      jump_identity        d/dx(f*phi) == f'*phi + jump * pdf_eps(x - 1.5)
      dirac_limit          f*phi_eps -> f as eps -> 0 at a smooth point

    Each entry reports max_deviation, tolerance and ok.
    """
    toy = ToyFunction()
    kinks = ToyFunction.KINKS
    report = {}

    # commutativity: integrate f(x-t) pdf(t) vs f(s) pdf(x-s)
    k = Kernel("gaussian", 0.3)
    T = _truncation(k)
    dev = 0.0
    for x in (0.5, 2.0, 3.5):
        a = _smoothed_value(toy, k, x, kinks)

        def flipped(s, x=x):
            return toy.f(s) * k.pdf(x - s)

        b, abserr, _ = _quad(flipped, x - T, x + T, list(kinks) + [x], 1e-10, 1e-10)
        dev = max(dev, abs(a - b))
    report["commutativity"] = {"max_deviation": dev, "tolerance": 1e-8,
                               "ok": dev <= 1e-8}

    # derivative interchange at smooth points; eps and points chosen so the
    # jump transport term pdf_eps(x - 1.5) is far below the tolerance
    k = Kernel("gaussian", 0.1)
    h = 1e-4
    dev = 0.0
    for x in (0.5, 3.5, 4.5):
        lhs = (_smoothed_value(toy, k, x + h, kinks)
               - _smoothed_value(toy, k, x - h, kinks)) / (2.0 * h)
        rhs = mollify_quadrature(toy.f, k, x, derivative=True,
                                 fprime=toy.fprime, kinks=kinks).value
        dev = max(dev, abs(lhs - rhs))
    report["derivative_interchange"] = {"max_deviation": dev, "tolerance": 1e-5,
                                        "ok": dev <= 1e-5}

    # the jump contributes exactly jump * pdf_eps(x - jump_at) to d/dx(f*phi)
    k = Kernel("gaussian", 0.3)
    x = 1.0
    lhs = (_smoothed_value(toy, k, x + h, kinks)
           - _smoothed_value(toy, k, x - h, kinks)) / (2.0 * h)
    rhs = (mollify_quadrature(toy.f, k, x, derivative=True,
                              fprime=toy.fprime, kinks=kinks).value
           + ToyFunction.JUMP * k.pdf(x - ToyFunction.JUMP_AT))
    dev = abs(lhs - rhs)
    report["jump_identity"] = {"max_deviation": dev, "tolerance": 1e-5,
                               "ok": dev <= 1e-5}

    # shrinking bandwidth recovers f at a smooth interior point
    k = Kernel("gaussian", 1e-3)
    dev = abs(_smoothed_value(toy, k, 2.0, kinks) - toy.f(2.0))
    report["dirac_limit"] = {"max_deviation": dev, "tolerance": 1e-3,
                             "ok": dev <= 1e-3}
    return report
