import csv
import io
import math

import numpy as np
import pytest

import pypass


def test_auc_hand_example():
    assert pypass.auc(np.array([0.1, 0.4, 0.35, 0.8]), np.array([0.0, 0.0, 1.0, 1.0])) == 0.75


def test_bss_hand_example():
    assert pypass.bss(np.array([0.8, 0.2]), np.array([1.0, 0.0])) == pytest.approx(0.84, abs=1e-12)


def test_weighted_l1_orthonormal_soft_threshold():
    # Columns with mean 0 and (1/n)||x||^2 = 1: linear solution is a soft
    # threshold of the least-squares coefficient at lam / 2.
    X = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
    y = X @ np.array([2.0, -0.5])
    fit = pypass.fit_weighted_l1(X, y, lam=1.0, loss="linear")
    np.testing.assert_allclose(fit["coefficients"], [1.5, 0.0], atol=1e-9)
    assert fit["kkt_max_violation"] <= 1e-6


def test_infinite_weight_pins_coordinate():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] + rng.normal(size=60) > 0).astype(float)
    fit = pypass.fit_weighted_l1(X, y, lam=0.01, weights=np.array([1.0, math.inf, 1.0]))
    assert fit["coefficients"][1] == 0.0


def test_simulate_and_fit_pass_end_to_end():
    sim = pypass.simulate("I", n=100, N=600, p=20, seed=5, test_size=400)
    train = sim["train"]
    assert train["X"].shape == (600, 20)
    assert len(train["labeled_index"]) == 100

    a = pypass.fit_alpha(train["X"], train["S"])
    assert a["alpha"].shape == (20,)
    assert len(a["support"]) > 0

    idx = np.asarray(train["labeled_index"])
    fit = pypass.tune_pass(train["X"][idx], train["S"][idx], train["Y"], a["alpha"],
                           support=a["support"], n_folds=5, seed=5)
    np.testing.assert_allclose(fit["beta"], fit["delta"] + fit["rho"] * a["alpha"], atol=1e-12)

    test = sim["test"]
    eta = fit["zeta"] + fit["gamma"] * test["S"] + test["X"] @ fit["beta"]
    labels = np.zeros(test["X"].shape[0])
    labels[np.asarray(test["labeled_index"])] = test["Y"]
    assert pypass.auc(eta, labels) > 0.7


def test_fit_method_by_name():
    sim = pypass.simulate("I", n=60, N=400, p=12, seed=2, test_size=10)
    t = sim["train"]
    out = pypass.fit_method("ss_prior", t["X"], t["S"], t["labeled_index"], t["Y"], seed=2,
                            n_folds=5)
    assert out["method"] == "ss_prior"
    assert out["beta"].shape == (12,)


def test_make_folds_stratified():
    labels = np.array([1.0] * 6 + [0.0] * 4)
    folds = pypass.make_folds(labels, 2, seed=9)
    for f in (0, 1):
        members = [labels[i] for i in range(10) if folds[i] == f]
        assert sum(members) == 3 and len(members) == 5


def test_bench_smoke_rows_and_pairing():
    out = pypass.bench({"scenario": "I", "n": 60, "N": 300, "p": 10, "test_size": 200,
                        "reps": 2, "seed": 4, "n_folds": 5, "methods": ["lasso", "pass"]})
    rows = list(csv.DictReader(io.StringIO(out["results_csv"])))
    # replicate x method x metric (auc, er, mse_p)
    assert len(rows) == 2 * 2 * 3
    assert out["summary"]["paired_folds"] is True


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        pypass.simulate("iii", n=10, N=50, p=10)
    with pytest.raises(ValueError):
        pypass.auc(np.array([0.1, 0.2]), np.array([1.0, 1.0]))
