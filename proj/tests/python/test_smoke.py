import json
import math

import numpy as np
import pytest

import robust_t


def test_group_and_angle():
    g = robust_t.group("heisenberg", q=3)
    assert g["order"] == 27
    rep = robust_t.angle_report("heisenberg", ["x"], ["y"], q=3, r=[2.0])
    assert rep["hilbert_cos"] == pytest.approx(1 / math.sqrt(3), rel=1e-12)
    assert rep["schatten"]["2"] == pytest.approx(math.sqrt(2), rel=1e-12)
    assert rep["agrees"]


def test_constants():
    assert robust_t.threshold(2) == 0.2
    s1, s2, s0 = robust_t.s_constants(0.5, 2)
    assert s0 == min(s1, s2)
    delta, theta = robust_t.class_params(0.04, 0.045)
    assert 2 * (0.02 ** theta) == pytest.approx(0.045, rel=1e-12)
    assert robust_t.schatten_M(2.0, 2.0, 3.0) > 0


def test_criterion():
    ok = robust_t.criterion(steinberg=(3, 1, 1031))
    assert ok["verdict"] == "certified"
    assert ok["flp_exponent"] > 2
    refused = robust_t.criterion(steinberg=(3, 1, 439))
    assert refused["verdict"] == "not_certified"
    scheme = {"n_generators": 2, "pairs": [{"pair": [1, 2], "kind": "heisenberg", "q": 29}], "origin": "python"}
    assert robust_t.criterion(scheme=scheme)["verdict"] == "certified"
    with pytest.raises(ValueError):
        robust_t.criterion()


def test_errors_carry_codes():
    with pytest.raises(robust_t.Error) as info:
        robust_t.criterion(steinberg=(3, 1, 8))
    assert info.value.code
    with pytest.raises(robust_t.Error):
        robust_t.group("heisenberg", q=4)


def test_numeric_helpers():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    lo, hi = robust_t.op_norm(a, 1.0)
    assert lo == hi == 6.0
    p1 = np.diag([1.0, 1.0, 0.0])
    p2 = np.diag([1.0, 0.0, 1.0])
    p12 = np.diag([1.0, 0.0, 0.0])
    assert robust_t.cos_angle(p1, p2, p12) == pytest.approx(0.0, abs=1e-14)


def test_iterate_and_expander():
    fam = {
        "space": {"dim": 3, "p": 2},
        "projections": [[[1, 0, 0], [0, 1, 0], [0, 0, 0]], [[1, 0, 0], [0, 0, 0], [0, 0, 1]]],
    }
    cert = robust_t.iterate(fam)
    assert cert["converged"]
    assert cert["rank_t_infinity"] == 1
    ex = robust_t.expander(3, 2, 1)
    assert ex["order"] == 168
    assert ex["diameter"] == 8


def test_cli_in_process():
    status, out, err = robust_t.run_cli("criterion", "--steinberg", 3, 1, 1031)
    assert status == 0
    assert json.loads(out)["verdict"] == "certified"
    status, out, err = robust_t.run_cli("criterion", "--steinberg", 3, 1, 8)
    assert status == 1
    assert "code" in json.loads(err)
