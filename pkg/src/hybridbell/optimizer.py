"""CHSH maximisation, critical lines and contour lines in the (eta, T) plane.

The search runs over any subset of ``alpha`` (field magnitude), ``nu``,
``gamma`` and ``b`` inside box bounds. Each start is a Nelder-Mead simplex in
unconstrained coordinates ``u`` mapped onto the box by
``p = lo + (hi - lo) * sin(u)**2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .bellcore import MeasurementSettings, chsh_expectation, family_state, homodyne_element, photodetection_element
from .errors import ParameterDomainError

PARAMETERS = ("alpha", "nu", "gamma", "b")
DEFAULT_BOUNDS = {
    "alpha": (0.0, 5.0),
    "nu": (0.0, math.pi / 2),
    "gamma": (0.0, math.pi / 2),
    "b": (0.0, 3.0),
}
DEFAULT_STARTS = 64
BISECTION_WIDTH = 1e-3
# Below this excess an optimised value counts as sitting on the local bound.
VIOLATION_FLOOR = 1e-9


@dataclass(frozen=True)
class OptimizationProblem:
    """Which of ``alpha, nu, gamma, b`` are pinned, the box for the rest, and the channel."""

    eta: float
    T: float
    coherence: float = 1.0
    fixed: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    seed: int = 0
    n_starts: int = DEFAULT_STARTS
    maxiter: int = 4000

    def __post_init__(self):
        for name in ("eta", "T", "coherence"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterDomainError(f"{name} must lie in [0, 1], got {v!r}")
        unknown = set(self.fixed) - set(PARAMETERS)
        if unknown:
            raise ValueError(f"unknown fixed parameters {sorted(unknown)}")
        for name in self.free:
            lo, hi = self.bounds[name]
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"bad bounds for {name}: {(lo, hi)}")

    @property
    def free(self):
        return tuple(p for p in PARAMETERS if p not in self.fixed)

    def at(self, **channel):
        return replace(self, **channel)


def ideal_problem(eta, T, **kw):
    """All four parameters free, pure state."""
    return OptimizationProblem(eta=eta, T=T, coherence=1.0, **kw)


def realistic_problem(eta, T, visibility=0.727, alpha=2.1, **kw):
    """Field magnitude pinned, production visibility as coherence."""
    return OptimizationProblem(eta=eta, T=T, coherence=visibility, fixed={"alpha": alpha}, **kw)


def evaluate(params, problem: OptimizationProblem) -> float:
    """CHSH value for a full parameter dict under the problem's channel."""
    state = family_state(params["nu"], params["alpha"], problem.coherence)
    settings = MeasurementSettings(gamma=params["gamma"], b=params["b"], eta=problem.eta, T=problem.T)
    return chsh_expectation(state, settings)


@dataclass(frozen=True)
class OptimizationResult:
    params: dict
    value: float
    converged: bool
    n_starts: int
    seed: int


def _to_box(u, lo, hi):
    return lo + (hi - lo) * np.sin(u) ** 2


def _from_box(p, lo, hi):
    span = np.where(hi > lo, hi - lo, 1.0)
    frac = np.clip((p - lo) / span, 0.0, 1.0)
    return np.arcsin(np.sqrt(frac))


def _local_search(args):
    u0, lo, hi, free, problem = args

    def full(u):
        p = dict(problem.fixed)
        p.update(zip(free, _to_box(np.asarray(u), lo, hi)))
        return p

    res = optimize.minimize(
        lambda u: -evaluate(full(u), problem),
        u0,
        method="Nelder-Mead",
        options=dict(xatol=1e-10, fatol=1e-13, maxiter=problem.maxiter, adaptive=len(free) > 2),
    )
    params = {k: float(v) for k, v in full(res.x).items()}
    return evaluate(params, problem), params, bool(res.success)


def _start_points(problem, lo, hi, initial):
    rng = np.random.default_rng(problem.seed)
    starts = [rng.uniform(lo, hi) for _ in range(problem.n_starts)]
    for guess in initial or ():
        starts.append(np.array([guess[k] for k in problem.free], dtype=float))
    return [_from_box(np.asarray(p), lo, hi) for p in starts]


def optimize_chsh(problem: OptimizationProblem, initial=None, workers=None) -> OptimizationResult:
    """Best CHSH value over ``problem.n_starts`` seeded simplex searches.

    ``initial`` adds warm starts (parameter dicts) on top of the random ones.
    Ties between starts are broken by lexicographic parameter order, so the
    result depends only on the problem and the warm starts.
    """
    free = problem.free
    if not free:
        params = dict(problem.fixed)
        return OptimizationResult(params, evaluate(params, problem), True, 0, problem.seed)
    lo = np.array([problem.bounds[k][0] for k in free], dtype=float)
    hi = np.array([problem.bounds[k][1] for k in free], dtype=float)
    jobs = [(u0, lo, hi, free, problem) for u0 in _start_points(problem, lo, hi, initial)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_local_search, jobs))
    else:
        runs = [_local_search(job) for job in jobs]
    value, params, ok = min(runs, key=lambda r: (-r[0], tuple(r[1][k] for k in PARAMETERS)))
    return OptimizationResult(params, evaluate(params, problem), ok, len(jobs), problem.seed)


def onset_margin(alpha, b, eta, T, coherence=1.0):
    """Log-margin of the instability of the product state |s,0> (nu = gamma = 0).

    For small ``nu`` and ``gamma`` the CHSH value is
    ``2 - gamma**2 - 2 (1 + P) nu**2 + 4 c H gamma nu`` with ``P`` the
    photodetection value on the field branch, ``c`` the coherence after loss
    and ``H`` the homodyne cross element. Some small ``nu, gamma > 0`` beat 2
    exactly when ``2 c**2 H**2 > 1 + P``; the returned value is
    ``log(2 c**2 H**2 / (1 + P))``.
    """
    state = family_state(0.0, alpha, coherence)
    a_g = 1j * math.sqrt(T) * abs(alpha)
    c = state.coherence * math.exp(-0.5 * (1.0 - T) * abs(alpha) ** 2)
    h = homodyne_element(a_g, 0.0, b).real
    p = photodetection_element(a_g, a_g, eta).real
    if h <= 0.0 or c == 0.0:
        return -math.inf
    return math.log(2.0 * c * c * h * h) - math.log1p(p)


def max_onset_margin(problem: OptimizationProblem) -> float:
    """Largest :func:`onset_margin` over the free ``alpha`` and ``b``; -inf if nu or gamma are pinned."""
    for name in ("nu", "gamma"):
        if name in problem.fixed or problem.bounds[name][0] != 0.0:
            return -math.inf
    names = [k for k in ("alpha", "b") if k not in problem.fixed]
    lo = np.array([problem.bounds[k][0] for k in names], dtype=float)
    hi = np.array([problem.bounds[k][1] for k in names], dtype=float)

    def margin(p):
        values = dict(problem.fixed)
        values.update(zip(names, p))
        return onset_margin(values["alpha"], values["b"], problem.eta, problem.T, problem.coherence)

    if not names:
        return margin([])
    # the best alpha frequently sits on its upper bound, so seed the grid there too
    grids = [np.unique(np.r_[np.linspace(l, h, 25), h]) for l, h in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*grids, indexing="ij"), -1).reshape(-1, len(names))
    scores = np.array([margin(p) for p in mesh])
    best = -math.inf
    for idx in np.argsort(scores)[::-1][:5]:
        if not math.isfinite(scores[idx]):
            continue
        res = optimize.minimize(
            lambda u: -margin(_to_box(u, lo, hi)),
            _from_box(mesh[idx], lo, hi),
            method="Nelder-Mead",
            options=dict(xatol=1e-12, fatol=1e-14, maxiter=2000),
        )
        best = max(best, -res.fun, scores[idx])
    return best


@dataclass(frozen=True)
class BoundaryPoint:
    """One column of a level-set trace. ``transmission`` is None when no T <= 1 reaches the level."""

    eta: float
    level: float
    transmission: float | None
    value: float | None = None
    params: dict | None = None
    bracket: tuple | None = None

    @property
    def attainable(self):
        return self.transmission is not None


@dataclass(frozen=True)
class BoundaryCurve:
    samples: list
    target: float
    tolerance: float = BISECTION_WIDTH

    def attainable(self):
        return [s for s in self.samples if s.attainable]

    def as_pairs(self):
        return [(s.eta, s.transmission) for s in self.attainable()]


def _exceeds(problem, level, warm):
    result = optimize_chsh(problem, initial=warm)
    above = result.value > level + VIOLATION_FLOOR
    if not above and level == 2.0:
        above = max_onset_margin(problem) > 0.0
    return above, result


def level_transmission(eta, level, template: OptimizationProblem, width=BISECTION_WIDTH) -> BoundaryPoint:
    """Smallest line transmittance at which the optimised CHSH value exceeds ``level``.

    Bisection in ``T`` on whether the optimum beats ``level``, stopped when the
    bracket is narrower than ``width``. At ``level == 2`` the optimum can
    exceed the bound by an arbitrarily small amount near the boundary, so the
    exact onset test :func:`max_onset_margin` is also consulted.
    """
    hi_problem = template.at(eta=eta, T=1.0)
    above, best = _exceeds(hi_problem, level, None)
    if not above:
        return BoundaryPoint(eta=eta, level=level, transmission=None, value=best.value, params=best.params)
    lo, hi = 0.0, 1.0
    warm = [best.params]
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        above, res = _exceeds(template.at(eta=eta, T=mid), level, warm)
        if above:
            hi, best = mid, res
            warm = [res.params]
        else:
            lo = mid
    return BoundaryPoint(eta=eta, level=level, transmission=hi, value=best.value, params=best.params, bracket=(lo, hi))


def critical_transmission(eta, template: OptimizationProblem, width=BISECTION_WIDTH) -> BoundaryPoint:
    """Critical line: the level-2 crossing."""
    return level_transmission(eta, 2.0, template, width)


@dataclass(frozen=True)
class EfficiencyPoint:
    """Detector-efficiency crossing at fixed ``T``; ``eta`` is None when unattainable."""

    T: float
    level: float
    eta: float | None
    value: float | None = None
    params: dict | None = None
    bracket: tuple | None = None


def level_efficiency(T, level, template: OptimizationProblem, width=BISECTION_WIDTH) -> EfficiencyPoint:
    """Smallest detector efficiency at which the optimum exceeds ``level``, bisected in eta."""
    above, best = _exceeds(template.at(eta=1.0, T=T), level, None)
    if not above:
        return EfficiencyPoint(T=T, level=level, eta=None, value=best.value, params=best.params)
    lo, hi = 0.0, 1.0
    warm = [best.params]
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        above, res = _exceeds(template.at(eta=mid, T=T), level, warm)
        if above:
            hi, best = mid, res
            warm = [res.params]
        else:
            lo = mid
    return EfficiencyPoint(T=T, level=level, eta=hi, value=best.value, params=best.params, bracket=(lo, hi))


def critical_efficiency(T, template: OptimizationProblem, width=BISECTION_WIDTH) -> EfficiencyPoint:
    return level_efficiency(T, 2.0, template, width)


def _column(args):
    eta, level, template, width = args
    return level_transmission(eta, level, template, width)


def contour(level, etas, template: OptimizationProblem, width=BISECTION_WIDTH, workers=None) -> BoundaryCurve:
    if not 2.0 <= level < 2.0 * math.sqrt(2.0):
        raise ParameterDomainError(f"level must lie in [2, 2*sqrt(2)), got {level!r}")
    jobs = [(float(eta), level, template, width) for eta in sorted(etas, reverse=True)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(_column, jobs))
    else:
        samples = [_column(job) for job in jobs]
    return BoundaryCurve(samples=samples, target=level, tolerance=width)


def eberhard_reference(eta):
    """Transmittance on the curve eta*T = 2/3, or None when it would exceed 1."""
    if not 0.0 < eta <= 1.0:
        raise ParameterDomainError(f"eta must lie in (0, 1], got {eta!r}")
    t = 2.0 / (3.0 * eta)
    return None if t > 1.0 else t
