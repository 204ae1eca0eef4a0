"""Frequency-domain model of the atom-cavity state source.

A coherent pulse ``alpha_in * s_L(omega)`` enters through mirror ``b``. The
cavity transmits it through mirror ``c`` onto a displacement beam splitter
whose local oscillator cancels the empty-cavity (atom in ``|s>``) output. What
remains in the measured port is the amplitude ``t_BS alpha_in s_L (t_g - t_s)``
when the atom is in ``|g>``. Light left behind in the other ports (the second
beam-splitter output ``o``, the cavity reflection ``b``, mirror loss ``L`` and
spontaneous emission ``E``) reduces the coherence of the atom-field state.

Units: angular frequencies in rad/us, times in us. Use
:func:`CavityParams.from_mhz` to build parameters from nu/2pi values in MHz.
Frequencies passed to the scattering functions are absolute; with the
default ``omega_c = 0`` they are detunings from the bare cavity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .errors import DegenerateFilterError, ParameterDomainError, QuadratureError
from .units import mhz_to_angular

SQRT_PI = math.sqrt(math.pi)
DEFAULT_RBS2 = 0.001
# Number of Gauss-Legendre nodes per panel.
_GL_ORDER = 20
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class CavityParams:
    """Cavity and atom rates (rad/us) plus the displacement beam splitter.

    ``Delta`` is the atomic transition frequency minus the cavity frequency.
    """

    g: float
    kappa_b: float
    kappa_c: float
    kappa_L: float
    Gamma: float
    Delta: float
    omega_c: float = 0.0
    r_BS: float = math.sqrt(DEFAULT_RBS2)

    def __post_init__(self):
        for name in ("g", "kappa_b", "kappa_c", "kappa_L", "Gamma"):
            v = getattr(self, name)
            if not (v >= 0.0 and math.isfinite(v)):
                raise ParameterDomainError(f"{name} must be a finite rate >= 0, got {v!r}")
        if self.kappa_c <= 0.0:
            raise ParameterDomainError("kappa_c must be > 0")
        if not 0.0 <= self.r_BS < 1.0:
            raise ParameterDomainError(f"r_BS must lie in [0, 1), got {self.r_BS!r}")

    @classmethod
    def from_mhz(cls, g_MHz, kappa_b_MHz, kappa_c_MHz, kappa_L_MHz, Gamma_MHz, gOverDelta=0.1, rBS2=DEFAULT_RBS2):
        """Build from nu/2pi values in MHz; the detuning is ``g / gOverDelta``."""
        if gOverDelta <= 0:
            raise ParameterDomainError(f"gOverDelta must be > 0, got {gOverDelta!r}")
        g = mhz_to_angular(g_MHz)
        return cls(
            g=g,
            kappa_b=mhz_to_angular(kappa_b_MHz),
            kappa_c=mhz_to_angular(kappa_c_MHz),
            kappa_L=mhz_to_angular(kappa_L_MHz),
            Gamma=mhz_to_angular(Gamma_MHz),
            Delta=g / gOverDelta,
            r_BS=math.sqrt(rBS2),
        )

    @property
    def kappa(self):
        return self.kappa_b + self.kappa_c + self.kappa_L

    @property
    def f_cav(self):
        return (self.kappa_b + self.kappa_L) / self.kappa_c

    @property
    def cooperativity(self):
        denom = self.Gamma * self.kappa
        return math.inf if denom == 0 else self.g ** 2 / denom

    @property
    def t_BS(self):
        return math.sqrt(1.0 - self.r_BS ** 2)

    @property
    def omega_a(self):
        return self.omega_c + self.Delta


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian input pulse.

    ``window`` is an optional measurement duration (us) on the output side;
    light arriving outside the best-placed window of that length is lost.
    """

    gamma_L: float
    omega_L: float = 0.0
    alpha_in: complex = 1.0
    window: float | None = None

    def __post_init__(self):
        if not (self.gamma_L > 0 and math.isfinite(self.gamma_L)):
            raise ParameterDomainError(f"gamma_L must be > 0, got {self.gamma_L!r}")
        if self.window is not None and not self.window > 0:
            raise ParameterDomainError(f"window must be > 0, got {self.window!r}")

    def spectrum_sq(self, omega):
        """|s_L(omega)|**2, unit area."""
        x = (np.asarray(omega) - self.omega_L) / self.gamma_L
        return np.exp(-x * x) / (self.gamma_L * SQRT_PI)

    def amplitude(self, omega):
        """s_L(omega), taken real and positive."""
        x = (np.asarray(omega) - self.omega_L) / self.gamma_L
        return np.exp(-0.5 * x * x) / math.sqrt(self.gamma_L * SQRT_PI)

    def with_alpha_in(self, alpha_in):
        return replace(self, alpha_in=alpha_in)


# ---------------------------------------------------------------- scattering


@dataclass(frozen=True)
class EmptyScattering:
    r_b: np.ndarray
    t_b: np.ndarray
    l_b: np.ndarray
    r_c: np.ndarray
    l_c: np.ndarray
    r_L: np.ndarray

    @property
    def matrix(self):
        """U_s with shape ``(..., 3, 3)`` in mode order (b, c, L)."""
        rows = [
            [self.r_b, self.t_b, self.l_b],
            [self.t_b, self.r_c, self.l_c],
            [self.l_b, self.l_c, self.r_L],
        ]
        return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def scattering_empty(omega, params: CavityParams) -> EmptyScattering:
    omega = np.asarray(omega, dtype=float)
    kappa = params.kappa
    pole = 0.5 * kappa + 1j * (omega - params.omega_c)

    def reflection(k_alpha):
        return -(0.5 * (kappa - 2.0 * k_alpha) + 1j * (omega - params.omega_c)) / pole

    return EmptyScattering(
        r_b=reflection(params.kappa_b),
        t_b=math.sqrt(params.kappa_b * params.kappa_c) / pole,
        l_b=math.sqrt(params.kappa_L * params.kappa_b) / pole,
        r_c=reflection(params.kappa_c),
        l_c=math.sqrt(params.kappa_L * params.kappa_c) / pole,
        r_L=reflection(params.kappa_L),
    )


def denominator(omega, params: CavityParams):
    """D(omega) = (Gamma/2 + i delta_a)(kappa/2 + i delta_c) + g**2."""
    omega = np.asarray(omega, dtype=float)
    delta_c = omega - params.omega_c
    delta_a = omega - params.omega_a
    return (0.5 * params.Gamma + 1j * delta_a) * (0.5 * params.kappa + 1j * delta_c) + params.g ** 2


@dataclass(frozen=True)
class AtomScattering:
    """U_g with shape ``(..., 4, 4)`` in mode order (b, c, L, E)."""

    matrix: np.ndarray

    @property
    def r_b(self):
        return self.matrix[..., 0, 0]

    @property
    def t_b(self):
        return self.matrix[..., 0, 1]

    @property
    def l_b(self):
        return self.matrix[..., 0, 2]

    @property
    def e_b(self):
        return self.matrix[..., 0, 3]


def scattering_atom(omega, params: CavityParams) -> AtomScattering:
    omega = np.asarray(omega, dtype=float)
    delta_c = omega - params.omega_c
    delta_a = omega - params.omega_a
    cav = 0.5 * params.kappa + 1j * delta_c
    atom = 0.5 * params.Gamma + 1j * delta_a
    D = atom * cav + params.g ** 2
    Us = scattering_empty(omega, params).matrix
    nu = np.sqrt([params.kappa_b, params.kappa_c, params.kappa_L])
    coupling = 1j * params.g * math.sqrt(params.Gamma)

    U = np.zeros(omega.shape + (4, 4), dtype=complex)
    U[..., :3, :3] = Us * (atom * cav)[..., None, None]
    U[..., :3, 3] = coupling * nu
    U[..., 3, :3] = coupling * nu
    U[..., 3, 3] = (0.5 * params.Gamma - 1j * delta_a) * cav
    U -= params.g ** 2 * np.eye(4)
    return AtomScattering(U / D[..., None, None])


def t_s(omega, params: CavityParams):
    return scattering_empty(omega, params).t_b


def t_g(omega, params: CavityParams):
    omega = np.asarray(omega, dtype=float)
    atom = 0.5 * params.Gamma + 1j * (omega - params.omega_a)
    return math.sqrt(params.kappa_b * params.kappa_c) * atom / denominator(omega, params)


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class SpectralGrid:
    nodes: np.ndarray
    weights: np.ndarray
    level: int
    change: float = field(default=math.nan)


def integration_window(params: CavityParams, pulse: PulseSpec):
    half = max(10.0 * pulse.gamma_L, 10.0 * params.kappa)
    return min(params.omega_c, pulse.omega_L) - half, max(params.omega_c, pulse.omega_L) + half


def _base_edges(params, pulse, n_uniform=32):
    lo, hi = integration_window(params, pulse)
    features = [
        (pulse.omega_L, pulse.gamma_L),
        (params.omega_c, 0.5 * params.kappa),
        (params.omega_a, 0.5 * params.Gamma + params.g),
    ]
    if params.Delta != 0:
        features.append((params.omega_c - params.g ** 2 / params.Delta, 0.5 * params.kappa))
    edges = [np.linspace(lo, hi, n_uniform + 1)]
    scales = np.array([0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    for centre, width in features:
        if width > 0:
            edges.append(centre + width * scales)
            edges.append(centre - width * scales)
    edges = np.unique(np.clip(np.concatenate(edges), lo, hi))
    return edges


def spectral_grid(params: CavityParams, pulse: PulseSpec, level=0) -> SpectralGrid:
    """Composite Gauss-Legendre rule; each level halves every panel."""
    edges = _base_edges(params, pulse)
    if level:
        parts = 2 ** level
        frac = np.arange(parts) / parts
        starts = edges[:-1, None] + np.diff(edges)[:, None] * frac[None, :]
        edges = np.append(starts.ravel(), edges[-1])
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return SpectralGrid(nodes, weights, level)


def converged_grid(fn, params: CavityParams, pulse: PulseSpec, rtol=1e-10, max_level=9):
    """Refine until every component of ``sum(fn(nodes) * weights)`` changes by < rtol.

    ``fn`` maps a node array of shape (N,) to (..., N). Returns the finer of the
    last two grids and the integral on it.
    """
    grid = spectral_grid(params, pulse, 0)
    prev = np.asarray(fn(grid.nodes)) @ grid.weights
    change = math.inf
    for level in range(1, max_level + 1):
        grid = spectral_grid(params, pulse, level)
        value = np.asarray(fn(grid.nodes)) @ grid.weights
        scale = max(float(np.max(np.abs(value))), 1e-300)
        change = float(np.max(np.abs(value - prev))) / scale
        if change < rtol:
            return replace(grid, change=change), value
        prev = value
    raise QuadratureError(
        f"spectral integral not converged after {max_level} refinements",
        diagnostics={"level": max_level, "relative_change": change, "nodes": grid.nodes.size},
    )


def spectral_integral(fn, params: CavityParams, pulse: PulseSpec, rtol=1e-10):
    return converged_grid(fn, params, pulse, rtol)[1]


# ---------------------------------------------------------------- amplitudes


FILTER_FLOOR = 1e-30


def filter_integral(params: CavityParams, pulse: PulseSpec):
    """int |s_L (t_g - t_s)|**2 d omega."""
    if params.g == 0:
        return 0.0
    return float(spectral_integral(
        lambda w: pulse.spectrum_sq(w) * np.abs(t_g(w, params) - t_s(w, params)) ** 2, params, pulse
    ))


def alpha_tilde_sq(params: CavityParams, pulse: PulseSpec):
    """Mean photon number of the measured output mode when the atom is in |g>."""
    return params.t_BS ** 2 * abs(pulse.alpha_in) ** 2 * filter_integral(params, pulse)


def required_alpha_in_sq(params: CavityParams, pulse: PulseSpec, alpha_tilde=2.1):
    """Input photon number |alpha_in|**2 that yields ``|alpha_tilde|`` at the output."""
    value = filter_integral(params, pulse)
    if value < FILTER_FLOOR:
        raise DegenerateFilterError(
            f"atom barely changes the transmission (integral {value:.3g}); no input reaches the target"
        )
    return abs(alpha_tilde) ** 2 / (params.t_BS ** 2 * value)


def pulse_for_target(params: CavityParams, gamma_L, alpha_tilde=2.1, omega_L=None, window=None):
    pulse = PulseSpec(gamma_L=gamma_L, omega_L=params.omega_c if omega_L is None else omega_L, window=window)
    return pulse.with_alpha_in(math.sqrt(required_alpha_in_sq(params, pulse, alpha_tilde)))


def spectral_factor(params: CavityParams, pulse: PulseSpec):
    """I_sL: ratio of the two D-weighted spectral integrals."""
    kappa = params.kappa

    def parts(w):
        base = pulse.spectrum_sq(w) / np.abs(denominator(w, params)) ** 2
        lorentz = np.abs(1.0 + 2j * (w - params.omega_c) / kappa) ** 2
        return np.array([base, base / lorentz])

    num, den = spectral_integral(parts, params, pulse)
    return float(num / den)


def visibility_exponent(params: CavityParams, pulse: PulseSpec):
    """F = r_BS**2 + f_cav + I_sL (1 + f_cav) / (4 C)."""
    C = params.cooperativity
    if not C > 0:
        raise ParameterDomainError("visibility closed form needs cooperativity > 0")
    f = params.f_cav
    return params.r_BS ** 2 + f + spectral_factor(params, pulse) * (1.0 + f) / (4.0 * C)


def visibility_closed_form(params: CavityParams, pulse: PulseSpec, alpha_tilde_sq_value=2.1 ** 2):
    F = visibility_exponent(params, pulse)
    return math.exp(-F * alpha_tilde_sq_value / (2.0 * params.t_BS ** 2))


def traced_mode_differences(omega, params: CavityParams):
    """Per unit input amplitude, the g-minus-s amplitude in the traced modes o, b, L, E."""
    empty = scattering_empty(omega, params)
    atom = scattering_atom(omega, params)
    return {
        "o": params.r_BS * (atom.t_b - empty.t_b),
        "b": atom.r_b - empty.r_b,
        "L": atom.l_b - empty.l_b,
        "E": atom.e_b,
    }


def overlap_exponents(params: CavityParams, pulse: PulseSpec):
    """Per-mode ``int |alpha_in s_L (amp_g - amp_s)|**2 d omega``."""
    names = ("o", "b", "L", "E")

    def parts(w):
        diff = traced_mode_differences(w, params)
        return np.array([np.abs(diff[k]) ** 2 for k in names]) * pulse.spectrum_sq(w)

    values = spectral_integral(parts, params, pulse) * abs(pulse.alpha_in) ** 2
    return dict(zip(names, map(float, values)))


def visibility_overlap_oracle(params: CavityParams, pulse: PulseSpec):
    """V as the product of coherent-state overlaps in the traced modes."""
    return math.exp(-0.5 * sum(overlap_exponents(params, pulse).values()))


# ---------------------------------------------------------------- truncation


def output_time_profile(params: CavityParams, pulse: PulseSpec, n=2 ** 16):
    """Intensity |f(t)|**2 of the measured g-branch output, unit input amplitude.

    Computed by FFT of ``s_L (t_g - t_s)`` on a uniform grid over the
    integration window. Returns ``(t, intensity)`` with ``t`` ascending.
    """
    lo, hi = integration_window(params, pulse)
    w = np.linspace(lo, hi, n, endpoint=False)
    dw = w[1] - w[0]
    amp = pulse.amplitude(w) * (t_g(w, params) - t_s(w, params))
    # |f(t_k)| with t_k = 2 pi k / (n dw); the offset lo only adds a phase.
    f = np.fft.fft(amp) * dw / math.sqrt(2.0 * math.pi)
    t = np.fft.fftfreq(n, d=dw / (2.0 * math.pi))
    order = np.argsort(t)
    return t[order], np.abs(f[order]) ** 2


def window_loss_fraction(params: CavityParams, pulse: PulseSpec, duration):
    """Fraction of the output energy outside the best-placed window of ``duration`` us."""
    t, intensity = output_time_profile(params, pulse)
    dt = t[1] - t[0]
    cumulative = np.concatenate([[0.0], np.cumsum(intensity) * dt])
    total = cumulative[-1]
    span = int(round(duration / dt))
    if span >= intensity.size:
        return 0.0
    captured = np.max(cumulative[span:] - cumulative[:-span])
    return float(max(0.0, 1.0 - captured / total))


def truncation_correction(params: CavityParams, pulse: PulseSpec, alpha_tilde_sq_value=2.1 ** 2, duration=None):
    """Multiplicative factor on V from discarding output light outside the window.

    The discarded part of the measured mode is traced out, contributing
    ``exp(-|alpha_out|**2 / 2)`` to the overlap.
    """
    duration = pulse.window if duration is None else duration
    if duration is None:
        return 1.0
    frac = window_loss_fraction(params, pulse, duration)
    return math.exp(-0.5 * frac * alpha_tilde_sq_value)


# ---------------------------------------------------------------- excitation


@dataclass(frozen=True)
class ExcitationReport:
    max_pe: float
    t_max: float
    alpha_in_sq: float
    delta_over_gamma: float
    delta_over_support: float

    @property
    def dispersive(self):
        """Both detuning ratios at least 10."""
        return self.delta_over_gamma >= 10.0 and self.delta_over_support >= 10.0


def _excitation_amplitude(w, params, pulse):
    delta_c = w - params.omega_c
    delta_a = w - params.omega_a
    denom = (0.5 * params.Gamma - 1j * delta_a) * (0.5 * params.kappa - 1j * delta_c) + params.g ** 2
    return 1j * params.g * math.sqrt(params.kappa_b) * pulse.amplitude(w) / denom


def _time_span(params, pulse):
    return 6.0 * math.sqrt(2.0) / pulse.gamma_L + 10.0 / params.kappa


def _excitation_grid(params, pulse):
    span = _time_span(params, pulse)
    probe = np.linspace(-span, span, 17)

    def fn(w):
        amp = _excitation_amplitude(w, params, pulse)
        return amp[None, :] * np.exp(-1j * np.outer(probe, w - params.omega_c))

    grid, _ = converged_grid(fn, params, pulse, rtol=1e-8)
    return grid


def _pe_on(t, grid, params, pulse):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    amp = _excitation_amplitude(grid.nodes, params, pulse) * grid.weights
    out = np.empty(t.shape)
    step = max(1, 2 ** 22 // max(grid.nodes.size, 1))
    for i in range(0, t.size, step):
        chunk = t[i:i + step]
        phase = np.exp(-1j * np.outer(chunk, grid.nodes - params.omega_c))
        out[i:i + step] = np.abs(phase @ amp) ** 2
    return abs(pulse.alpha_in) ** 2 * out / (2.0 * math.pi)


def excitation_probability(t, params: CavityParams, pulse: PulseSpec):
    """P_e(t) in the linearised (atom mostly in |g>) regime; ``t`` in us."""
    if pulse.alpha_in == 0:
        return np.zeros(np.shape(t))
    grid = _excitation_grid(params, pulse)
    out = _pe_on(t, grid, params, pulse)
    return out if np.ndim(t) else float(out[0])


def max_excitation(params: CavityParams, pulse: PulseSpec, n_grid=801) -> ExcitationReport:
    """Maximum of P_e(t) by a grid scan plus a bounded local refinement."""
    support = abs(pulse.omega_L - params.omega_c) + 3.0 * pulse.gamma_L
    checks = dict(
        alpha_in_sq=abs(pulse.alpha_in) ** 2,
        delta_over_gamma=abs(params.Delta) / params.Gamma if params.Gamma > 0 else math.inf,
        delta_over_support=abs(params.Delta) / support,
    )
    if pulse.alpha_in == 0:
        return ExcitationReport(max_pe=0.0, t_max=0.0, **checks)
    grid = _excitation_grid(params, pulse)
    span = _time_span(params, pulse)
    t = np.linspace(-span, span, n_grid)
    pe = _pe_on(t, grid, params, pulse)
    i = int(np.argmax(pe))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, n_grid - 1)]
    res = optimize.minimize_scalar(
        lambda s: -_pe_on(s, grid, params, pulse)[0], bounds=(lo, hi), method="bounded",
        options=dict(xatol=1e-6 * (hi - lo)),
    )
    if -res.fun > pe[i]:
        return ExcitationReport(max_pe=float(-res.fun), t_max=float(res.x), **checks)
    return ExcitationReport(max_pe=float(pe[i]), t_max=float(t[i]), **checks)


def max_excitation_for_target(params: CavityParams, gamma_L, alpha_tilde=2.1) -> ExcitationReport:
    """max_t P_e with the input amplitude set by the output target ``alpha_tilde``."""
    return max_excitation(params, pulse_for_target(params, gamma_L, alpha_tilde))


@dataclass(frozen=True)
class GammaSearchResult:
    """``gamma`` is None when no bandwidth in the search range reaches ``p_target``."""

    gamma: float | None
    p_target: float
    bracket: tuple | None
    max_pe: float | None
    reason: str = ""

    @property
    def found(self):
        return self.gamma is not None


def gamma_01_search(params: CavityParams, alpha_tilde=2.1, p_target=0.1, rel_width=1e-3,
                    gamma_min=None, gamma_max=None) -> GammaSearchResult:
    """Smallest bandwidth at which max_t P_e reaches ``p_target`` (bisection in log gamma_L).

    The search starts at ``gamma_min`` (default kappa/100) and doubles until
    ``p_target`` is exceeded or ``gamma_max`` (default 1000 kappa) is passed.
    """
    if not p_target > 0:
        raise ParameterDomainError(f"p_target must be > 0, got {p_target!r}")
    lo = params.kappa / 100.0 if gamma_min is None else gamma_min
    top = 1000.0 * params.kappa if gamma_max is None else gamma_max

    def pe(gamma):
        return max_excitation_for_target(params, gamma, alpha_tilde).max_pe

    p_lo = pe(lo)
    if p_lo >= p_target:
        return GammaSearchResult(None, p_target, None, p_lo, "max P_e already above target at the smallest bandwidth")
    hi = lo
    while True:
        hi = min(2.0 * hi, top)
        p_hi = pe(hi)
        if p_hi >= p_target:
            break
        if hi >= top:
            return GammaSearchResult(None, p_target, None, p_hi, "target not reached below the largest bandwidth")
        lo, p_lo = hi, p_hi
    while hi / lo - 1.0 > rel_width:
        mid = math.sqrt(lo * hi)
        p_mid = pe(mid)
        if p_mid >= p_target:
            hi, p_hi = mid, p_mid
        else:
            lo = mid
    return GammaSearchResult(hi, p_target, (lo, hi), p_hi)


# ---------------------------------------------------------------- validity scan


VALIDITY_G_OVER_GAMMA = 5.0 / 3.0
VALIDITY_F_CAV = 0.04


def validity_params(g_over_kappa, g_over_delta, g=mhz_to_angular(5.0), f_cav=VALIDITY_F_CAV,
                    g_over_gamma=VALIDITY_G_OVER_GAMMA, rBS2=DEFAULT_RBS2) -> CavityParams:
    """Lossless asymmetric cavity (kappa_L = 0) at fixed g, g/Gamma and f_cav."""
    kappa = g / g_over_kappa
    kappa_c = kappa / (1.0 + f_cav)
    return CavityParams(
        g=g, kappa_b=kappa - kappa_c, kappa_c=kappa_c, kappa_L=0.0,
        Gamma=g / g_over_gamma, Delta=g / g_over_delta, r_BS=math.sqrt(rBS2),
    )


def pe_scan(panel, g_over_delta, g_over_kappa, alpha_tilde=2.1, **kw):
    """``[(g/kappa, max_t P_e)]`` for the validity plot.

    ``panel="right"`` sets gamma_L = kappa at every point; ``panel="left"``
    uses the single bandwidth gamma_L = g / max(g/kappa).
    """
    if panel not in ("left", "right"):
        raise ValueError(f"panel must be 'left' or 'right', got {panel!r}")
    g_over_kappa = np.asarray(g_over_kappa, dtype=float)
    out = []
    for x in g_over_kappa:
        params = validity_params(x, g_over_delta, **kw)
        gamma_L = params.kappa if panel == "right" else params.g / g_over_kappa.max()
        out.append((float(x), max_excitation_for_target(params, gamma_L, alpha_tilde).max_pe))
    return out
