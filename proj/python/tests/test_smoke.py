import math

import numpy as np
import pytest

import kgood

F1_X = np.array([[1.0], [-1.0], [0.5]])
F1_Y = [1, -1, 1]


def f1_kernels():
    return [kgood.Kernel.linear(1.0), kgood.Kernel.rbf(1.0)]


def test_kernel_evaluation():
    lin, rbf = f1_kernels()
    assert lin([1.0], [-1.0]) == -1.0
    assert rbf([0.3], [0.3]) == 1.0
    z, prod = kgood.kspace_map(f1_kernels(), [1.0], 1, [-1.0], -1)
    assert prod == -1.0
    assert z[0] == -1.0
    assert z[1] == pytest.approx(math.exp(-4.0), abs=1e-15)


def test_kappa_norms():
    assert kgood.kappa_norms([3.0, 4.0]) == (5.0, 4.0)


def test_f1_risks():
    ks = f1_kernels()
    assert kgood.empirical_risk([0.0, 0.0], F1_X, F1_Y, ks) == 1.0
    assert kgood.empirical_risk([1.0, 0.0], F1_X, F1_Y, ks) == pytest.approx(1 / 3, abs=1e-12)
    assert kgood.empirical_risk([2.0, 0.0], F1_X, F1_Y, ks) == 0.0
    assert kgood.ordered_pair_risk([2.0, 0.0], F1_X, F1_Y, ks) == pytest.approx(1 / 18, abs=1e-12)
    total = kgood.empirical_risk_with_diagonal([1.0, 0.0], F1_X, F1_Y, ks)
    assert total == pytest.approx(1 / 3 + 0.125, abs=1e-12)
    assert kgood.mean_embedding_goodness([2.0, 0.0], F1_X, F1_Y, ks) == pytest.approx(1 / 18, abs=1e-12)


def test_gram_matrix():
    g = kgood.gram_matrix([1.0, 0.0], f1_kernels(), F1_X)
    expected = np.array([[1, -1, 0.5], [-1, 1, -0.5], [0.5, -0.5, 0.25]])
    np.testing.assert_allclose(g, expected, atol=1e-15)


@pytest.mark.parametrize("reg", ["l2", "l1"])
def test_solve_certificate(reg):
    res = kgood.solve(F1_X, F1_Y, f1_kernels(), lambda_=0.5, reg=reg)
    mu = np.array(res["mu_hat"])
    assert (mu >= 0).all()
    if reg == "l2":
        assert np.linalg.norm(mu) <= math.sqrt(2 / 0.5) + 1e-9
        assert res["objective"] <= 1.0 + 1e-6
    else:
        assert mu.sum() <= 2 / 0.5 + 1e-9
        assert res["objective"] <= 0.5 + 1e-6


def test_bound_report():
    rep = kgood.bound_report(1152, 2.0, 0.5, math.exp(-1), math.sqrt(2), 1.0, reg="l2", form="simplified")
    assert rep["gen_bound"] == pytest.approx(6 * math.sqrt(2) / 24, abs=1e-12)
    assert kgood.rad_bound_l2(1.0, 1.0, 4) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    with pytest.raises(ArithmeticError):
        kgood.rad_bound_l1(1.0, 1.0, 10, 2.0)


def test_oracle_sizes():
    assert kgood.oracle_sample_size_l2(1.0, 1.0, 0.5, math.exp(-1))[0] == 4000
    assert kgood.oracle_sample_size_l1(1.0, 1.0, 1.0, math.exp(-1), math.e)[0] == 270


def test_empirical_rademacher():
    z = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert kgood.empirical_rademacher(z, "l2", 1.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)


def test_run_experiment():
    cfg = {
        "trials": 2,
        "n": 30,
        "seed": 3,
        "mc_pairs": 2000,
        "planted": {"p": 3},
        "solver": {"lambda": 1.0, "reg": "l2", "max_iters": 2000},
    }
    rep = kgood.run_experiment("bound-check", cfg)
    assert rep["format_version"] == 1
    assert rep["aggregate"]["trials_completed"] == 2
