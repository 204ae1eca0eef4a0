"""Closed-form CHSH values for two-branch atom-field states.

The state is

    cos(nu) |s, alpha_s> + sin(nu) |g, alpha_g>

with the off-diagonal atom-field block scaled by ``coherence * exp(1j*phase)``
(``coherence = 1`` is pure, ``coherence = 0`` the separable mixture). The
photonic side is measured with one of two dichotomized observables:

* ``B0 = 2 Pi_nc - 1`` with the no-click element ``Pi_nc = (1 - eta)**n``,
* ``B1 = 2 P_[-b, b] - 1`` with ``P`` the projector of the quadrature
  ``X = (a + a^dag)/sqrt(2)`` onto the bin ``|x| <= b``.

The atom is measured along ``A_{0,1} = cos(gamma) sz +/- sin(gamma) sx`` with
``sz = |s><s| - |g><g|`` and ``sx = |s><g| + |g><s|``.

Amplitude convention: the homodyne axis is X, and the field amplitudes that
maximise the violation sit on the orthogonal axis. :func:`family_state`
therefore places a field of magnitude ``|alpha|`` at ``alpha_g = 1j*|alpha|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, special

from .errors import ParameterDomainError

__all__ = [
    "HybridState",
    "MeasurementSettings",
    "family_state",
    "coherent_overlap",
    "photodetection_element",
    "homodyne_element",
    "apply_loss",
    "correlators",
    "chsh_expectation",
    "TSIRELSON",
]

TSIRELSON = 2.0 * math.sqrt(2.0)
_SQRT2 = math.sqrt(2.0)


def _check_unit_interval(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ParameterDomainError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class HybridState:
    """Two-branch atom + single-mode field state.

    ``nu`` is the atomic mixing angle, ``alpha_s``/``alpha_g`` the coherent
    amplitudes attached to ``|s>`` and ``|g>``, and ``coherence`` the factor on
    the off-diagonal block (production visibility times loss decoherence).
    ``phase`` is a relative phase on that block; it stays zero unless both
    branches carry light and pass through loss.
    """

    nu: float
    alpha_g: complex
    alpha_s: complex = 0.0
    coherence: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        _check_unit_interval("coherence", self.coherence)


@dataclass(frozen=True)
class MeasurementSettings:
    """Atomic angle ``gamma``, homodyne bin half-width ``b``, detector efficiency
    ``eta`` and line power transmittance ``T``."""

    gamma: float
    b: float
    eta: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        _check_unit_interval("eta", self.eta)
        _check_unit_interval("T", self.T)
        if self.b < 0 or math.isnan(self.b):
            raise ParameterDomainError(f"bin half-width b must be >= 0, got {self.b!r}")


def family_state(nu, alpha, coherence=1.0):
    """State with vacuum on ``|s>`` and a field of magnitude ``alpha`` on ``|g>``.

    The amplitude is put on the quadrature orthogonal to the homodyne axis.
    """
    return HybridState(nu=nu, alpha_g=1j * abs(alpha), alpha_s=0.0, coherence=coherence)


def coherent_overlap(beta1, beta2):
    """<beta1|beta2>."""
    beta1, beta2 = complex(beta1), complex(beta2)
    return cmath.exp(beta1.conjugate() * beta2 - 0.5 * (abs(beta1) ** 2 + abs(beta2) ** 2))


def photodetection_element(beta1, beta2, eta):
    """<beta1| (2 (1-eta)**n - 1) |beta2> for a detector of efficiency ``eta``."""
    _check_unit_interval("eta", eta)
    beta1, beta2 = complex(beta1), complex(beta2)
    cross = beta1.conjugate() * beta2
    norm = -0.5 * (abs(beta1) ** 2 + abs(beta2) ** 2)
    return 2.0 * cmath.exp(norm + (1.0 - eta) * cross) - cmath.exp(norm + cross)


def _coherent_wavefunction(beta, x):
    beta = complex(beta)
    return np.pi ** -0.25 * np.exp(
        -0.5 * x * x + _SQRT2 * beta * x - 0.5 * beta * beta - 0.5 * abs(beta) ** 2
    )


def _homodyne_erf(beta1, beta2, b):
    # conj(psi_1) psi_2 is a Gaussian of unit width centred at mu, weighted by <beta1|beta2>.
    mu = (beta1.conjugate() + beta2) / _SQRT2
    bin_weight = 0.5 * (special.erf(b - mu) + special.erf(b + mu))
    return complex(coherent_overlap(beta1, beta2) * (2.0 * bin_weight - 1.0))


def _homodyne_quad(beta1, beta2, b):
    if b == 0:
        return -coherent_overlap(beta1, beta2)

    def integrand(x):
        return np.conj(_coherent_wavefunction(beta1, x)) * _coherent_wavefunction(beta2, x)

    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    re = integrate.quad(lambda x: integrand(x).real, -b, b, **opts)[0]
    im = integrate.quad(lambda x: integrand(x).imag, -b, b, **opts)[0]
    return 2.0 * complex(re, im) - coherent_overlap(beta1, beta2)


def homodyne_element(beta1, beta2, b, method="auto"):
    """<beta1| (2 int_{-b}^{b} |x><x| dx - 1) |beta2>.

    ``method="erf"`` uses the closed form with complex-argument error
    functions, ``method="quad"`` integrates the wavefunction product
    adaptively. ``"auto"`` takes the closed form unless its argument is so far
    into the complex plane that cancellation would cost accuracy.
    """
    if b < 0 or math.isnan(b):
        raise ParameterDomainError(f"bin half-width b must be >= 0, got {b!r}")
    beta1, beta2 = complex(beta1), complex(beta2)
    if math.isinf(b):
        return coherent_overlap(beta1, beta2)
    if method == "quad":
        return _homodyne_quad(beta1, beta2, b)
    if method == "erf":
        return _homodyne_erf(beta1, beta2, b)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    mu = (beta1.conjugate() + beta2) / _SQRT2
    if abs(mu.imag) > 6.0:
        return _homodyne_quad(beta1, beta2, b)
    return _homodyne_erf(beta1, beta2, b)


def apply_loss(state: HybridState, tau: float) -> HybridState:
    """Pass the field through a pure-loss channel of power transmittance ``tau``."""
    _check_unit_interval("tau", tau)
    if tau == 1.0:
        return state
    a_g, a_s = complex(state.alpha_g), complex(state.alpha_s)
    root = math.sqrt(tau)
    # The traced environment leaves <e_g|e_s> on the off-diagonal block.
    separation = abs(a_g - a_s) ** 2
    return replace(
        state,
        alpha_g=root * a_g,
        alpha_s=root * a_s,
        coherence=state.coherence * math.exp(-0.5 * (1.0 - tau) * separation),
        phase=state.phase + (1.0 - tau) * (a_g.conjugate() * a_s).imag,
    )


def correlators(state: HybridState, settings: MeasurementSettings):
    """The four correlators <A_i B_j> after line loss, keyed by ``(i, j)``."""
    lossy = apply_loss(state, settings.T)
    a_s, a_g = complex(lossy.alpha_s), complex(lossy.alpha_g)
    cc, ss = math.cos(state.nu) ** 2, math.sin(state.nu) ** 2
    cross = lossy.coherence * math.cos(state.nu) * math.sin(state.nu) * cmath.exp(1j * lossy.phase)

    def atomic_parts(element):
        z = cc * element(a_s, a_s).real - ss * element(a_g, a_g).real
        x = 2.0 * (cross * element(a_g, a_s)).real
        return z, x

    z0, x0 = atomic_parts(lambda u, v: photodetection_element(u, v, settings.eta))
    z1, x1 = atomic_parts(lambda u, v: homodyne_element(u, v, settings.b))
    cg, sg = math.cos(settings.gamma), math.sin(settings.gamma)
    return {
        (0, 0): cg * z0 + sg * x0,
        (0, 1): cg * z1 + sg * x1,
        (1, 0): cg * z0 - sg * x0,
        (1, 1): cg * z1 - sg * x1,
    }


def chsh_expectation(state: HybridState, settings: MeasurementSettings) -> float:
    """<A0 B0> + <A0 B1> + <A1 B0> - <A1 B1>."""
    c = correlators(state, settings)
    return c[0, 0] + c[0, 1] + c[1, 0] - c[1, 1]
