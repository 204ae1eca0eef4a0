import math

import numpy as np
import pytest

from hybridbell.bellcore import MeasurementSettings, chsh_expectation, family_state
from hybridbell.errors import ParameterDomainError
from hybridbell.optimizer import (
    OptimizationProblem,
    contour,
    critical_transmission,
    eberhard_reference,
    evaluate,
    ideal_problem,
    level_efficiency,
    level_transmission,
    max_onset_margin,
    onset_margin,
    optimize_chsh,
    realistic_problem,
)


def test_box_respected():
    res = optimize_chsh(ideal_problem(0.8, 0.8, n_starts=8))
    for name, (lo, hi) in OptimizationProblem(1, 1).bounds.items():
        assert lo <= res.params[name] <= hi


def test_evaluate_matches_bellcore():
    p = {"alpha": 2.1, "nu": 0.77, "gamma": 0.55, "b": 0.53}
    direct = chsh_expectation(family_state(0.77, 2.1), MeasurementSettings(0.55, 0.53, 0.9, 0.7))
    assert evaluate(p, ideal_problem(0.9, 0.7)) == direct


def test_ideal_optimum_point_a():
    res = optimize_chsh(ideal_problem(1.0, 1.0, n_starts=16))
    assert res.value == pytest.approx(2.32, abs=0.01)
    assert res.value >= evaluate({"alpha": 2.1, "nu": 0.77, "gamma": 0.55, "b": 0.53}, ideal_problem(1, 1)) - 1e-9


def test_realistic_optimum_point_a():
    res = optimize_chsh(realistic_problem(1.0, 1.0, n_starts=16))
    assert res.params["alpha"] == 2.1
    assert res.value == pytest.approx(2.17, abs=0.01)


def test_deterministic_for_seed():
    a = optimize_chsh(realistic_problem(0.8, 0.9, n_starts=8, seed=4))
    b = optimize_chsh(realistic_problem(0.8, 0.9, n_starts=8, seed=4))
    assert a == b


@pytest.mark.slow
@pytest.mark.parametrize("family,eta,T", [
    ("ideal", 1.0, 1.0), ("ideal", 0.8, 0.8), ("ideal", 0.15, 1.0), ("ideal", 1.0, 0.55),
    ("realistic", 1.0, 1.0), ("realistic", 0.75, 0.9), ("realistic", 0.63, 0.83),
])
def test_seed_robust(family, eta, T):
    make = ideal_problem if family == "ideal" else realistic_problem
    a = optimize_chsh(make(eta, T, seed=0))
    b = optimize_chsh(make(eta, T, seed=1))
    assert abs(a.value - b.value) < 1e-4


def test_all_pinned_is_plain_evaluation():
    fixed = {"alpha": 2.1, "nu": 0.77, "gamma": 0.55, "b": 0.53}
    res = optimize_chsh(OptimizationProblem(1.0, 1.0, fixed=fixed))
    assert res.n_starts == 0 and res.params == fixed
    assert res.value == pytest.approx(2.3240, abs=1e-4)


def test_problem_validation():
    with pytest.raises(ParameterDomainError):
        ideal_problem(1.2, 1.0)
    with pytest.raises(ValueError):
        OptimizationProblem(1.0, 1.0, fixed={"beta": 1.0})
    with pytest.raises(ValueError):
        OptimizationProblem(1.0, 1.0, bounds={"alpha": (2, 1), "nu": (0, 1), "gamma": (0, 1), "b": (0, 1)})


@pytest.mark.slow
def test_monotone_in_channel():
    """A better channel never lowers the optimum (warm-started from worse neighbours)."""
    grid = np.linspace(0.6, 1.0, 5)
    values = {}
    for i, eta in enumerate(grid):
        for j, T in enumerate(grid):
            warm = [values[k][1] for k in ((i - 1, j), (i, j - 1)) if k in values]
            res = optimize_chsh(realistic_problem(eta, T, n_starts=8), initial=warm)
            values[i, j] = (res.value, res.params)
    for (i, j), (v, _) in values.items():
        for k in ((i - 1, j), (i, j - 1)):
            if k in values:
                assert v >= values[k][0] - 1e-7


def test_no_violation_without_channel():
    res = optimize_chsh(ideal_problem(0.0, 1.0, n_starts=8))
    assert res.value <= 2.0 + 1e-9


# onset criterion -------------------------------------------------------------


def test_onset_margin_predicts_small_angle_violation():
    alpha, b, eta, T = 2.1, 0.53, 1.0, 0.9
    assert onset_margin(alpha, b, eta, T) > 0
    x = 1e-3
    best = max(evaluate({"alpha": alpha, "b": b, "nu": x * k, "gamma": x}, ideal_problem(eta, T))
               for k in np.linspace(0.05, 2, 40))
    assert best > 2.0


def test_onset_margin_negative_means_no_small_angle_violation():
    alpha, b, eta, T = 2.1, 0.53, 1.0, 0.3
    assert onset_margin(alpha, b, eta, T) < 0
    x = 1e-3
    best = max(evaluate({"alpha": alpha, "b": b, "nu": x * k, "gamma": x}, ideal_problem(eta, T))
               for k in np.linspace(0.05, 2, 40))
    assert best <= 2.0


def test_max_onset_margin_needs_free_angles():
    assert max_onset_margin(OptimizationProblem(1, 1, fixed={"nu": 0.1})) == -math.inf


# boundaries ------------------------------------------------------------------


def test_eberhard_reference():
    assert eberhard_reference(1.0) == 2.0 / 3.0
    assert eberhard_reference(0.8) == 2.0 / (3.0 * 0.8)
    assert eberhard_reference(0.5) is None
    with pytest.raises(ParameterDomainError):
        eberhard_reference(0.0)


def test_critical_transmission_perfect_detector():
    point = critical_transmission(1.0, ideal_problem(1, 1, n_starts=16))
    assert point.transmission == pytest.approx(0.537, abs=0.01)
    lo, hi = point.bracket
    assert hi - lo <= 1e-3 and point.value > 2.0 - 1e-12


def test_level_unattainable_reports_none():
    point = level_transmission(0.5, 2.15, realistic_problem(1, 1, n_starts=8))
    assert point.transmission is None and not point.attainable
    assert point.value < 2.15


def test_level_efficiency_unattainable():
    assert level_efficiency(0.5, 2.15, realistic_problem(1, 1, n_starts=8)).eta is None


def test_contour_level_domain():
    template = realistic_problem(1, 1, n_starts=4)
    for level in (1.99, 2 * math.sqrt(2), 3.0):
        with pytest.raises(ParameterDomainError):
            contour(level, [1.0], template)


def test_contour_points_reach_their_level():
    template = realistic_problem(1, 1, n_starts=16)
    curve = contour(2.1, [1.0, 0.8], template)
    assert [s.eta for s in curve.samples] == [1.0, 0.8]
    for s in curve.attainable():
        again = optimize_chsh(template.at(eta=s.eta, T=s.transmission), initial=[s.params])
        assert again.value == pytest.approx(2.1, abs=5e-3)


def test_contour_tends_to_critical_line():
    template = realistic_problem(1, 1, n_starts=16)
    near = level_transmission(1.0, 2.0 + 1e-4, template).transmission
    crit = critical_transmission(1.0, template).transmission
    assert abs(near - crit) < 5e-3
