"""Brute-force number-basis oracle.

Everything here is dense linear algebra on atom(2) x field(n_max + 1), kept
deliberately independent of the closed forms in :mod:`hybridbell.bellcore`:
coherent states come from their number expansion, the homodyne bin from
Hermite-function integrals, and line loss from the pure-loss Kraus family.
Atomic index 0 is ``|s>``, index 1 is ``|g>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .bellcore import HybridState, MeasurementSettings
from .errors import ParameterDomainError, TruncationError

DEFAULT_N_MAX = 64
TAIL_TOLERANCE = 1e-12

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class FockOperator:
    entries: np.ndarray

    @property
    def dim(self):
        return self.entries.shape[0]

    def is_hermitian(self, atol=1e-12):
        return np.allclose(self.entries, self.entries.conj().T, atol=atol, rtol=0)


@dataclass(frozen=True)
class FockState:
    """Density matrix over atom(2) x field(dim)."""

    matrix: np.ndarray
    dim: int

    @property
    def trace(self):
        return complex(np.trace(self.matrix))

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T)).min())


def poisson_tail(mean_photons, n_max):
    """Probability of more than ``n_max`` photons in a coherent state."""
    return float(stats.poisson.sf(n_max, mean_photons))


def required_n_max(mean_photons, tail=TAIL_TOLERANCE):
    n = 1
    while poisson_tail(mean_photons, n) >= tail:
        n += 1
    return n


def coherent_ket(alpha, n_max):
    """Number-basis coefficients of |alpha>, truncated at ``n_max``."""
    alpha = complex(alpha)
    n = np.arange(n_max + 1)
    out = np.empty(n_max + 1, dtype=complex)
    out[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for k in n[1:]:
        out[k] = out[k - 1] * alpha / math.sqrt(k)
    return out


def _check_tail(alpha, n_max):
    mean = abs(complex(alpha)) ** 2
    if poisson_tail(mean, n_max) >= TAIL_TOLERANCE:
        need = required_n_max(mean)
        raise TruncationError(
            f"n_max={n_max} too small for |alpha|^2={mean:.4g}; need n_max >= {need}",
            required_n_max=need,
        )


def embed_state(state: HybridState, n_max=DEFAULT_N_MAX) -> FockState:
    for amp in (state.alpha_s, state.alpha_g):
        _check_tail(amp, n_max)
    ket_s = coherent_ket(state.alpha_s, n_max)
    ket_g = coherent_ket(state.alpha_g, n_max)
    c, s = math.cos(state.nu), math.sin(state.nu)
    dim = n_max + 1
    rho = np.zeros((2 * dim, 2 * dim), dtype=complex)
    rho[:dim, :dim] = c * c * np.outer(ket_s, ket_s.conj())
    rho[dim:, dim:] = s * s * np.outer(ket_g, ket_g.conj())
    off = state.coherence * np.exp(1j * state.phase) * c * s * np.outer(ket_s, ket_g.conj())
    rho[:dim, dim:] = off
    rho[dim:, :dim] = off.conj().T
    return FockState(matrix=rho, dim=dim)


def build_B0(eta, n_max=DEFAULT_N_MAX) -> FockOperator:
    if not 0.0 <= eta <= 1.0:
        raise ParameterDomainError(f"eta must lie in [0, 1], got {eta!r}")
    n = np.arange(n_max + 1)
    no_click = np.where(n == 0, 1.0, (1.0 - eta) ** n)
    return FockOperator(np.diag(2.0 * no_click - 1.0).astype(complex))


def hermite_functions(x, n_max):
    """Normalised Hermite functions psi_0..psi_n_max at points ``x``; shape (n_max+1, len(x))."""
    x = np.asarray(x, dtype=float)
    psi = np.empty((n_max + 1,) + x.shape)
    psi[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for n in range(1, n_max):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * x * psi[n] - math.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def _bin_gram(b, n_max, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    panels = max(1, int(math.ceil(2.0 * b)))
    edges = np.linspace(-b, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    psi = hermite_functions(x, n_max)
    return (psi * w) @ psi.T


def build_B1(b, n_max=DEFAULT_N_MAX, order=None) -> FockOperator:
    """Homodyne bin observable; Gauss-Legendre order doubled until entries settle to 1e-12."""
    if b < 0:
        raise ParameterDomainError(f"bin half-width b must be >= 0, got {b!r}")
    dim = n_max + 1
    if b == 0:
        return FockOperator(-np.eye(dim, dtype=complex))
    if math.isinf(b):
        return FockOperator(np.eye(dim, dtype=complex))
    if order is None:
        order = 32
        gram = _bin_gram(b, n_max, order)
        while True:
            finer = _bin_gram(b, n_max, 2 * order)
            order *= 2
            if np.max(np.abs(finer - gram)) < 1e-12 or order > 2048:
                gram = finer
                break
            gram = finer
    else:
        gram = _bin_gram(b, n_max, order)
    return FockOperator((2.0 * gram - np.eye(dim)).astype(complex))


def loss_kraus(tau, n_max=DEFAULT_N_MAX):
    """Kraus operators E_k = sum_n sqrt(C(n,k) tau^(n-k) (1-tau)^k) |n-k><n|."""
    if not 0.0 <= tau <= 1.0:
        raise ParameterDomainError(f"tau must lie in [0, 1], got {tau!r}")
    dim = n_max + 1
    ops = []
    for k in range(dim):
        E = np.zeros((dim, dim))
        for n in range(k, dim):
            if tau == 0.0:
                amp = 1.0 if n == k else 0.0
            elif tau == 1.0:
                amp = 1.0 if k == 0 else 0.0
            else:
                log_amp = 0.5 * (
                    special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
                    + (n - k) * math.log(tau) + k * math.log1p(-tau)
                )
                amp = math.exp(log_amp)
            E[n - k, n] = amp
        ops.append(E)
    return ops


def loss_channel(state: FockState, tau) -> FockState:
    if tau == 1.0:
        return state
    rho = state.matrix
    out = np.zeros_like(rho)
    for E in loss_kraus(tau, state.dim - 1):
        K = np.kron(np.eye(2), E)
        out += K @ rho @ K.conj().T
    return FockState(matrix=out, dim=state.dim)


def bell_operator(settings: MeasurementSettings, n_max=DEFAULT_N_MAX) -> np.ndarray:
    cg, sg = math.cos(settings.gamma), math.sin(settings.gamma)
    A0 = cg * SIGMA_Z + sg * SIGMA_X
    A1 = cg * SIGMA_Z - sg * SIGMA_X
    B0 = build_B0(settings.eta, n_max).entries
    B1 = build_B1(settings.b, n_max).entries
    return np.kron(A0, B0) + np.kron(A0, B1) + np.kron(A1, B0) - np.kron(A1, B1)


def oracle_chsh(state: FockState, settings: MeasurementSettings) -> float:
    """Tr(rho B) after passing the field through the line loss."""
    lossy = loss_channel(state, settings.T)
    B = bell_operator(settings, state.dim - 1)
    return float(np.real(np.trace(lossy.matrix @ B)))
