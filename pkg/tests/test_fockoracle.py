import math

import numpy as np
import pytest
from scipy import special

from hybridbell import bellcore, fockoracle
from hybridbell.bellcore import HybridState, MeasurementSettings, family_state
from hybridbell.errors import TruncationError
from hybridbell.validation import random_draw


def test_required_n_max_default_covers_max_amplitude():
    assert fockoracle.poisson_tail(3.5 ** 2, fockoracle.DEFAULT_N_MAX) < fockoracle.TAIL_TOLERANCE
    n = fockoracle.required_n_max(4.41)
    assert fockoracle.poisson_tail(4.41, n) < 1e-12 <= fockoracle.poisson_tail(4.41, n - 1)


def test_embed_product_state():
    rho = fockoracle.embed_state(family_state(0.0, 2.1), 32)
    expected = np.zeros_like(rho.matrix)
    expected[0, 0] = 1.0
    assert np.max(np.abs(rho.matrix - expected)) < 1e-15


def test_embed_pure_state():
    rho = fockoracle.embed_state(family_state(0.77, 2.1), 64)
    assert rho.purity() == pytest.approx(1.0, abs=1e-10)
    assert rho.trace == pytest.approx(1.0, abs=1e-10)
    assert rho.min_eigenvalue() > -1e-10


@pytest.mark.parametrize("nu", [0.3, 0.77, 1.2])
def test_embed_partial_coherence_purity(nu):
    k = 0.5
    rho = fockoracle.embed_state(family_state(nu, 2.1, k), 64)
    c2, s2 = math.cos(nu) ** 2, math.sin(nu) ** 2
    direct = np.real(np.trace(rho.matrix @ rho.matrix))
    assert rho.purity() == pytest.approx(direct, abs=1e-14)
    # the off-diagonal block contributes 2 k^2 cos^2 sin^2 since both kets are normalised
    assert direct == pytest.approx(c2 ** 2 + s2 ** 2 + 2 * k * k * c2 * s2, abs=1e-10)


def test_embed_truncation_reported():
    with pytest.raises(TruncationError) as err:
        fockoracle.embed_state(family_state(0.5, 2.1), 8)
    assert err.value.required_n_max == fockoracle.required_n_max(4.41)
    assert err.value.required_n_max > 8


def test_b0_perfect_detector():
    B0 = fockoracle.build_B0(1.0, 6).entries
    assert np.allclose(np.diag(B0), [1, -1, -1, -1, -1, -1, -1])


def test_b1_limits():
    assert np.allclose(fockoracle.build_B1(math.inf, 10).entries, np.eye(11))
    assert np.allclose(fockoracle.build_B1(0.0, 10).entries, -np.eye(11))
    assert np.allclose(fockoracle.build_B1(12.0, 10).entries, np.eye(11), atol=1e-12)


def test_b1_vacuum_entry():
    B1 = fockoracle.build_B1(0.53, 40).entries
    assert B1[0, 0].real == pytest.approx(2 * special.erf(0.53) - 1, abs=1e-13)
    assert B1[0, 0].real == pytest.approx(bellcore.homodyne_element(0, 0, 0.53).real, abs=1e-13)


@pytest.mark.parametrize("b", [0.2, 0.53, 1.5])
def test_b1_hermitian_and_bounded(b):
    op = fockoracle.build_B1(b, 64)
    assert op.is_hermitian()
    eig = np.linalg.eigvalsh(op.entries)
    assert eig.min() >= -1 - 1e-10 and eig.max() <= 1 + 1e-10


def test_b1_parity_structure():
    """The bin is symmetric in x, so odd/even entries never mix."""
    B1 = fockoracle.build_B1(0.7, 20).entries
    m, n = np.indices(B1.shape)
    assert np.max(np.abs(B1[(m + n) % 2 == 1])) < 1e-14


def _b1_square_defect(n_max, b=0.53, block=10):
    """Defect of B1^2 = 1 on the lowest ``block`` levels, where a cutoff should matter least."""
    B1 = fockoracle.build_B1(b, n_max).entries
    return np.linalg.norm((B1 @ B1 - np.eye(n_max + 1))[:block, :block], 2)


@pytest.mark.xfail(strict=True, reason="sharp bin edges couple every level; truncation defect ~0.1 at n_max=64")
def test_b1_squares_to_identity_on_top_block():
    assert _b1_square_defect(64) <= 1e-6


def test_b1_square_defect_shrinks_with_cutoff():
    defects = [_b1_square_defect(n) for n in (32, 64, 128, 256)]
    assert all(a > b for a, b in zip(defects, defects[1:]))


def test_loss_identity_and_coherent_family():
    state = fockoracle.embed_state(HybridState(math.pi / 2, alpha_g=1.5 - 0.5j), 48)
    assert fockoracle.loss_channel(state, 1.0) is state
    out = fockoracle.loss_channel(state, 0.6)
    expected = fockoracle.embed_state(HybridState(math.pi / 2, alpha_g=math.sqrt(0.6) * (1.5 - 0.5j)), 48)
    assert np.max(np.abs(out.matrix - expected.matrix)) < 1e-12


def test_loss_kraus_completeness():
    ops = fockoracle.loss_kraus(0.37, 30)
    total = sum(E.T @ E for E in ops)
    assert np.allclose(total, np.eye(31), atol=1e-12)


def test_loss_cptp_on_random_states():
    rng = np.random.default_rng(3)
    for _ in range(10):
        state, s = random_draw(rng)
        rho = fockoracle.embed_state(state, 64)
        out = fockoracle.loss_channel(rho, s.T)
        assert abs(out.trace - rho.trace) < 1e-12
        assert out.min_eigenvalue() > -1e-10


def test_oracle_table1_point_a():
    rho = fockoracle.embed_state(family_state(0.77, 2.1), 64)
    assert fockoracle.oracle_chsh(rho, MeasurementSettings(0.55, 0.53)) == pytest.approx(2.32, abs=0.01)


def test_oracle_matches_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(20):
        state, s = random_draw(rng)
        oracle = fockoracle.oracle_chsh(fockoracle.embed_state(state, 64), s)
        assert abs(oracle - bellcore.chsh_expectation(state, s)) < 1e-8


def test_oracle_separable_bound():
    rng = np.random.default_rng(5)
    for _ in range(10):
        state, s = random_draw(rng)
        mixed = HybridState(state.nu, state.alpha_g, state.alpha_s, coherence=0.0)
        assert fockoracle.oracle_chsh(fockoracle.embed_state(mixed, 64), s) <= 2 + 1e-9
