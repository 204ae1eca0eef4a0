"""Closed-form versus number-basis cross-checks on random draws.

:func:`run_validation` returns a plain dict report (deterministic for a given
seed) listing the largest deviation per check and whether it is within its
tolerance. Draw parameters of the worst case are kept so failures can be
reproduced.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from . import bellcore, fockoracle
from .errors import TruncationError

MAX_AMPLITUDE = 3.5
TOLERANCES = {
    "chsh": 1e-8,
    "photodetection": 1e-8,
    "homodyne": 1e-8,
    "loss": 1e-8,
    "trace": 1e-12,
    "positivity": 1e-10,
    "tsirelson": 1e-9,
    "separable": 1e-9,
}


def random_draw(rng, max_amplitude=MAX_AMPLITUDE):
    """One (state, settings) pair with field magnitudes up to ``max_amplitude``."""

    def amplitude():
        return max_amplitude * rng.uniform() * cmath.exp(2j * math.pi * rng.uniform())

    state = bellcore.HybridState(
        nu=rng.uniform(0, math.pi / 2),
        alpha_g=amplitude(),
        alpha_s=amplitude(),
        coherence=rng.uniform(),
        phase=rng.uniform(-math.pi, math.pi),
    )
    settings = bellcore.MeasurementSettings(
        gamma=rng.uniform(0, math.pi / 2),
        b=rng.uniform(0, 3),
        eta=rng.uniform(),
        T=rng.uniform(),
    )
    return state, settings


def _describe(state, settings):
    return {
        "nu": state.nu,
        "alpha_g": [state.alpha_g.real, state.alpha_g.imag],
        "alpha_s": [state.alpha_s.real, state.alpha_s.imag],
        "coherence": state.coherence,
        "phase": state.phase,
        "gamma": settings.gamma,
        "b": settings.b,
        "eta": settings.eta,
        "T": settings.T,
    }


def _element_deviation(state, settings, n_max):
    kets = {k: fockoracle.coherent_ket(getattr(state, k), n_max) for k in ("alpha_s", "alpha_g")}
    B0 = fockoracle.build_B0(settings.eta, n_max).entries
    B1 = fockoracle.build_B1(settings.b, n_max).entries
    worst_p = worst_h = 0.0
    for u in kets:
        for v in kets:
            a, b = getattr(state, u), getattr(state, v)
            p = bellcore.photodetection_element(a, b, settings.eta)
            h = bellcore.homodyne_element(a, b, settings.b)
            worst_p = max(worst_p, abs(p - kets[u].conj() @ B0 @ kets[v]))
            worst_h = max(worst_h, abs(h - kets[u].conj() @ B1 @ kets[v]))
    return worst_p, worst_h


def run_validation(n_max=fockoracle.DEFAULT_N_MAX, draws=100, seed=0):
    rng = np.random.default_rng(seed)
    worst = {k: 0.0 for k in TOLERANCES}
    where = {}
    truncation = None

    def record(name, deviation, state, settings):
        if deviation > worst[name] or name not in where:
            worst[name] = max(worst[name], deviation)
            where[name] = _describe(state, settings)

    for _ in range(draws):
        state, settings = random_draw(rng)
        try:
            embedded = fockoracle.embed_state(state, n_max)
        except TruncationError as exc:
            truncation = {"n_max": n_max, "required_n_max": exc.required_n_max, "message": str(exc),
                          "draw": _describe(state, settings)}
            break
        record("chsh", abs(bellcore.chsh_expectation(state, settings)
                           - fockoracle.oracle_chsh(embedded, settings)), state, settings)
        p_dev, h_dev = _element_deviation(state, settings, n_max)
        record("photodetection", p_dev, state, settings)
        record("homodyne", h_dev, state, settings)

        lossy = fockoracle.loss_channel(embedded, settings.T)
        direct = fockoracle.embed_state(bellcore.apply_loss(state, settings.T), n_max)
        record("loss", float(np.max(np.abs(lossy.matrix - direct.matrix))), state, settings)
        record("trace", abs(lossy.trace - embedded.trace), state, settings)
        record("positivity", max(0.0, -lossy.min_eigenvalue()), state, settings)

        value = bellcore.chsh_expectation(state, settings)
        record("tsirelson", max(0.0, abs(value) - bellcore.TSIRELSON), state, settings)
        mixed = bellcore.HybridState(state.nu, state.alpha_g, state.alpha_s, coherence=0.0)
        record("separable", max(0.0, bellcore.chsh_expectation(mixed, settings) - 2.0), state, settings)

    checks = []
    for name, tol in TOLERANCES.items():
        checks.append({
            "check": name,
            "max_deviation": worst[name],
            "tolerance": tol,
            "passed": truncation is None and worst[name] <= tol,
            "worst_case": where.get(name),
        })
    if truncation is not None:
        checks.append({"check": "truncation", "max_deviation": None, "tolerance": fockoracle.TAIL_TOLERANCE,
                       "passed": False, "worst_case": truncation})
    return {
        "n_max": n_max,
        "draws": draws,
        "seed": seed,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
    }
