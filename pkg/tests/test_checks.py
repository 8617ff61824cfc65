import numpy as np
import numpy.testing as npt
import pytest

from slq.checks import (
    check_asymptotics,
    check_condition_i,
    compare_modulo_gauge,
    completeness_proxy,
)
from slq.core import SpectralDataSet
from slq.errors import GridMismatch
from slq.model import build_model_constants, model_spectral_data


@pytest.fixture(scope="module")
def mixed_consts(mixed2_problem):
    return build_model_constants(mixed2_problem.T1, mixed2_problem.T2)


@pytest.fixture(scope="module")
def mixed_model_data(mixed_consts):
    return model_spectral_data(mixed_consts, 8)


def _rebuild(data, mutate):
    items = [mutate(e) for e in data.entries]
    return SpectralDataSet.build(m=data.m, items=[i for i in items if i],
                                 shift=data.shift)


def test_condition_i_passes_on_extracted_data(robin1_data, trig2_data,
                                              dirichlet2_data):
    for data in (robin1_data, trig2_data, dirichlet2_data):
        report = check_condition_i(data)
        assert report.passed
        assert all(v.hermitian and v.psd and v.rank_matches
                   and v.cluster_consistent for v in report.entries)


def test_condition_i_flags_negated_weight(mixed_model_data):
    bad = _rebuild(mixed_model_data,
                   lambda e: (e.n, e.k, e.lam,
                              -e.alpha if (e.n, e.k) == (2, 1) else e.alpha))
    report = check_condition_i(bad)
    assert not report.passed
    verdict = next(v for v in report.entries if (v.n, v.k) == (2, 1))
    assert not verdict.psd


def test_condition_i_flags_rank_violation(mixed_model_data):
    bad = _rebuild(mixed_model_data,
                   lambda e: (e.n, e.k, e.lam,
                              np.eye(2) if (e.n, e.k) == (2, 1) else e.alpha))
    report = check_condition_i(bad)
    assert not report.passed
    verdict = next(v for v in report.entries if (v.n, v.k) == (2, 1))
    assert verdict.rank == 2 and not verdict.rank_matches


def test_asymptotics_exact_on_model(mixed_model_data, mixed_consts):
    report = check_asymptotics(mixed_model_data, mixed_consts)
    assert report.passed
    assert max(abs(v) for v in report.kappa.values()) < 1e-12
    assert max(report.K_norm.values()) < 1e-12


def test_asymptotics_accepts_decaying_remainder(robin1_data):
    one = np.eye(1)
    consts = build_model_constants(one, one)
    report = check_asymptotics(robin1_data, consts)
    assert report.passed
    # (pi/2) alpha_n - 1 = -1/(n^2+1) for sigma identically 1
    assert report.K_norm[(3, 1)] == pytest.approx(0.1, abs=1e-6)
    assert report.kappa[(2, 1)] == pytest.approx(np.sqrt(5.0) - 2.0, abs=1e-8)


def test_asymptotics_flags_constant_offset(mixed_model_data, mixed_consts):
    bad = _rebuild(mixed_model_data,
                   lambda e: (e.n, e.k, (e.rho + 0.1) ** 2, e.alpha))
    report = check_asymptotics(bad, mixed_consts)
    assert not report.kappa_passed
    assert not report.passed


def test_completeness_on_model_family(mixed_model_data, mixed_consts):
    proxy = completeness_proxy(mixed_model_data, mixed_consts, n_cut=8)
    assert proxy.gram_min > 0.9
    assert proxy.slot_coverage > 0.9
    assert proxy.family_size > 0


def test_completeness_sees_deleted_level(mixed_model_data, mixed_consts):
    pruned = _rebuild(mixed_model_data,
                      lambda e: None if e.n == 3 else (e.n, e.k, e.lam, e.alpha))
    proxy = completeness_proxy(pruned, mixed_consts, n_cut=8)
    # the surviving family stays near-orthogonal, but the missing slot
    # cannot be represented by it
    assert proxy.gram_min > 0.9
    assert proxy.slot_coverage < 0.5


def test_gauge_comparison_zero_for_identical():
    x = np.linspace(0.0, np.pi, 41)
    sigma = np.tile(0.2 * np.eye(2), (41, 1, 1))
    H2 = np.diag([0.3, 0.0]).astype(complex)
    rep = compare_modulo_gauge(x, sigma, H2, sigma, H2,
                               np.diag([1.0, 0.0]), np.eye(2))
    assert rep.sigma_distance == 0.0
    assert rep.H2_distance == 0.0


def test_gauge_comparison_absorbs_valid_gauge(mixed2_problem):
    T1, T2 = mixed2_problem.T1, mixed2_problem.T2
    T1p = mixed2_problem.T1p
    x = np.linspace(0.0, np.pi, 101)
    rng = np.random.default_rng(11)
    H = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    H1 = T1p @ (0.5 * (H + H.conj().T)) @ T1p
    sigmaA = np.tile(0.1 * np.eye(2), (101, 1, 1))
    H2A = np.diag([0.4, 0.0]).astype(complex)
    rep = compare_modulo_gauge(x, sigmaA, H2A, sigmaA + H1,
                               H2A - T2 @ H1 @ T2, T1, T2, tol=1e-10)
    assert rep.passed
    assert rep.sigma_distance < 1e-12
    assert rep.H2_distance < 1e-12
    npt.assert_allclose(rep.H1_est, -H1, atol=1e-12)
    assert rep.sigma_raw_max > 0.1  # the raw difference is not small


def test_gauge_comparison_flags_real_difference(mixed2_problem):
    x = np.linspace(0.0, np.pi, 101)
    sigmaA = np.zeros((101, 2, 2), dtype=complex)
    sigmaB = sigmaA + 0.05 * np.sin(x)[:, None, None] * np.eye(2)
    H2 = np.zeros((2, 2))
    rep = compare_modulo_gauge(x, sigmaA, H2, sigmaB, H2,
                               mixed2_problem.T1, mixed2_problem.T2, tol=1e-3)
    assert not rep.passed
    assert rep.sigma_distance > 0.01


def test_gauge_comparison_rejects_foreign_grid(mixed2_problem):
    x = np.linspace(0.0, np.pi, 41)
    sigma = np.zeros((41, 2, 2))
    H2 = np.zeros((2, 2))
    with pytest.raises(GridMismatch):
        compare_modulo_gauge(x, sigma, H2, sigma, H2, mixed2_problem.T1,
                             mixed2_problem.T2, xB=np.linspace(0, np.pi, 43)[:41])
    with pytest.raises(GridMismatch):
        compare_modulo_gauge(x, sigma, H2, sigma[:-1], H2, mixed2_problem.T1,
                             mixed2_problem.T2)
