import json
import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sketchtest import generators as gen
from sketchtest import linalg, oracles
from sketchtest.errors import DegenerateInput, InvalidArgument
from sketchtest.testers import (DimConfig, KnownDesignConfig, UnknownDesignConfig, Verdict, query_budget,
                                test_dimension, test_known, test_unknown)


# -- configs ---------------------------------------------------------------------

def test_known_config_defaults():
    cfg = KnownDesignConfig(k=4, eps=0.3, delta=0.1)
    assert cfg.sketch_constant == 100 and cfg.membership_tol == pytest.approx(0.075)
    assert cfg.sketch_rows(128) == math.ceil(100 * 4 * math.log(1280))
    tol = KnownDesignConfig(k=4, eps=0.3, delta=0.1, tolerant=True)
    assert tol.sketch_constant == 200
    assert tol.sketch_rows(128) == math.ceil(200 * 4 * math.log(1280) / 0.09)
    assert tol.threshold == pytest.approx(0.6)


@pytest.mark.parametrize("kwargs", [dict(k=0, eps=0.3, delta=0.1), dict(k=1, eps=1.0, delta=0.1),
                                    dict(k=1, eps=0.3, delta=0.0), dict(k=1, eps=0.3, delta=0.1, membership_tol=-1)])
def test_known_config_invalid(kwargs):
    with pytest.raises(InvalidArgument):
        KnownDesignConfig(**kwargs)


def test_unknown_config_defaults_and_invariants():
    cfg = UnknownDesignConfig(k=4, m=64, eps=0.1, delta=0.1)
    base = math.sqrt(12 * math.log(16))
    assert cfg.width_threshold == pytest.approx(4 * base)
    assert cfg.width_error_target == pytest.approx(base)
    with pytest.raises(InvalidArgument):
        UnknownDesignConfig(k=4, m=8, eps=0.1, delta=0.1)
    with pytest.raises(InvalidArgument):
        UnknownDesignConfig(k=1, m=8, eps=0.3, delta=0.1)
    with pytest.raises(InvalidArgument):
        UnknownDesignConfig(k=1, m=8, eps=0.1, delta=0.1, width_threshold=0.0)


def test_dim_config_defaults():
    cfg = DimConfig(k=2, eps=0.1, delta=0.1)
    assert cfg.width_threshold == pytest.approx(2 * math.sqrt(2))
    assert cfg.width_error_target == pytest.approx(math.sqrt(2))


# -- known design ------------------------------------------------------------------

def test_known_accepts_planted():
    cfg = KnownDesignConfig(k=4, eps=0.3, delta=0.1, sketch_constant=2)
    for s in range(20):
        inst = gen.gen_planted(64, 128, 4, 1, "gaussian-normalized", s)
        v = test_known(inst.A, inst.Y[:, 0], cfg, s)
        assert v.accept and v.estimates["distance"] <= cfg.membership_tol


def test_known_default_constant_accepts_planted():
    inst = gen.gen_planted(16, 32, 3, 1, "gaussian-normalized", 4)
    assert test_known(inst.A, inst.Y[:, 0], KnownDesignConfig(k=3, eps=0.3, delta=0.1), 4).accept


def test_known_rejects_orthogonal_vector():
    A = gen.gen_subspace_dictionary(32, 48, 16, 0)
    cfg = KnownDesignConfig(k=2, eps=0.3, delta=0.1, sketch_constant=3)
    rejects = 0
    for s in range(500):
        y = gen.gen_far_known(A, 0.3, 2, s, method="complement").y
        rejects += not test_known(A, y, cfg, s).accept
    assert rejects >= 450


def test_known_accepts_zero():
    A = gen.gen_dictionary(10, 20, "gaussian-normalized", 0)
    assert test_known(A, np.zeros(10), KnownDesignConfig(k=1, eps=0.3, delta=0.1), 0).accept


def test_known_rejects_bad_dictionary():
    A = np.eye(3)
    A[0, 0] = 1.001
    with pytest.raises(InvalidArgument, match="invalid dictionary"):
        test_known(A, np.zeros(3), KnownDesignConfig(k=1, eps=0.3, delta=0.1), 0)


def test_known_agrees_with_exhaustive_oracle():
    # reject implies the oracle sees a positive k-sparse residual;
    # a unit-norm k-sparse fit within tol implies accept
    for s in range(60):
        g = linalg.rng(s, "case")
        d, m, k = int(g.integers(2, 7)), int(g.integers(2, 11)), int(g.integers(1, 3))
        A = gen.gen_dictionary(d, m, "gaussian-normalized", s)
        y = A @ gen.gen_sparse_vector(m, min(k, m), g) if s % 2 else linalg.unit_sphere(d, 1, g)[:, 0]
        cfg = KnownDesignConfig(k=k, eps=0.3, delta=0.1)
        v = test_known(A, y, cfg, s)
        fit = oracles.best_sparse_fit(A, y, k)
        if not v.accept:
            assert fit.residual > 0
        if fit.residual <= cfg.membership_tol and np.linalg.norm(fit.coefficients) <= 1 + 1e-9:
            assert v.accept


def test_known_tolerant_uses_two_eps():
    inst = gen.gen_planted(64, 128, 4, 1, "gaussian-normalized", 0)
    cfg = KnownDesignConfig(k=4, eps=0.3, delta=0.1, tolerant=True, sketch_constant=0.2)
    y = gen.add_noise(inst, 0.15, 0)[:, 0]
    v = test_known(inst.A, y, cfg, 0)
    assert v.threshold == pytest.approx(0.6)
    assert v.accept == (v.estimates["distance"] <= 0.6)


# -- unknown design -------------------------------------------------------------------

def test_unknown_accepts_rotated_sparse():
    cfg = UnknownDesignConfig(k=4, m=64, eps=0.1, delta=0.1)
    acc = sum(test_unknown(gen.gen_planted(64, 64, 4, 200, "orthogonal", s).Y, cfg, s).accept for s in range(20))
    assert acc >= 18


def test_unknown_norm_screen_rejects_norm_two():
    Y = gen.gen_planted(32, 32, 2, 20, "orthogonal", 0).Y.copy()
    Y[:, 5] *= 2
    v = test_unknown(Y, UnknownDesignConfig(k=2, m=32, eps=0.1, delta=0.1), 0)
    assert not v.accept and not v.estimates["norm_screen_passed"]


def test_unknown_rejects_certified_wide_sets():
    # small thresholds: sqrt(2 ln p) for random unit vectors sits above threshold + error
    cfg = UnknownDesignConfig(k=1, m=3, eps=0.1, delta=0.1, width_threshold=1.0, width_error_target=0.5)
    rejects = 0
    for s in range(30):
        Y = linalg.unit_sphere(64, 500, s)
        mc = oracles.mc_width(Y, 4000, s)
        assert mc.estimate - 3 * mc.standard_error > cfg.width_threshold + cfg.width_error_target
        rejects += not test_unknown(Y, cfg, s).accept
    assert rejects >= 27


def test_unknown_empty_input():
    with pytest.raises(DegenerateInput):
        test_unknown(np.zeros((4, 0)), UnknownDesignConfig(k=1, m=3, eps=0.1, delta=0.1), 0)


@given(st.integers(0, 2**20), st.floats(0.5, 30.0), st.floats(0.0, 10.0))
def test_unknown_threshold_monotone(seed, thr, bump):
    Y = linalg.unit_sphere(8, 6, seed)
    base = dict(k=1, m=3, eps=0.1, delta=0.1, width_error_target=1.0, width_trials=40)
    lo = test_unknown(Y, UnknownDesignConfig(width_threshold=thr, **base), seed)
    hi = test_unknown(Y, UnknownDesignConfig(width_threshold=thr + bump, **base), seed)
    assert lo.estimates == hi.estimates
    assert (not lo.accept) or hi.accept
    assert lo.accept == (lo.estimates["norm_screen_passed"] and lo.estimates["width"] <= thr)


def test_unknown_records_regime(caplog):
    cfg = UnknownDesignConfig(k=1, m=3, eps=0.1, delta=0.1)
    with caplog.at_level(logging.DEBUG, logger="sketchtest.testers"):
        v = test_unknown(linalg.unit_sphere(4, 3, 0), cfg, 0)
    assert set(v.config["regime"]) == {"k_over_m_condition", "eps_below_one_hundredth", "k_at_least_10_log_inv_eps"}
    assert v.config["log_base"] == "natural"
    assert "regime" in caplog.text


# -- dimensionality -----------------------------------------------------------------

def test_dim_accepts_plane_and_rejects_isotropic():
    cfg = DimConfig(k=2, eps=0.1, delta=0.1)
    acc = rej = 0
    for s in range(20):
        U, _ = np.linalg.qr(linalg.rng(s).standard_normal((64, 2)))
        acc += test_dimension(U @ linalg.unit_sphere(2, 500, s), cfg, s).accept
        rej += not test_dimension(linalg.unit_sphere(64, 500, s + 1000), cfg, s).accept
    assert acc >= 18 and rej >= 18


def test_dim_single_basis_vector():
    assert test_dimension(np.eye(5)[:, :1], DimConfig(k=1, eps=0.1, delta=0.1), 0).accept


def test_dim_empty_input():
    with pytest.raises(DegenerateInput):
        test_dimension(np.zeros((4, 0)), DimConfig(k=1, eps=0.1, delta=0.1), 0)


# -- verdicts and accounting -----------------------------------------------------------

def test_verdict_json_fields_and_replay():
    inst = gen.gen_planted(16, 24, 2, 1, "gaussian-normalized", 1)
    cfg = KnownDesignConfig(k=2, eps=0.3, delta=0.1, sketch_constant=3)
    v1 = test_known(inst.A, inst.Y[:, 0], cfg, 9)
    v2 = test_known(inst.A, inst.Y[:, 0], cfg, 9)
    assert v1.to_json() == v2.to_json()
    data = json.loads(v1.to_json())
    assert set(data) == {"accept", "estimates", "threshold", "queries_used", "seed", "config"}
    assert data["estimates"]["distance"] == v1.estimates["distance"]  # 17 digits round-trip exactly
    assert isinstance(v1, Verdict)


@given(st.integers(0, 2**20), st.integers(1, 5), st.integers(1, 12))
def test_queries_equal_budget(seed, k, p):
    g = linalg.rng(seed)
    d = int(g.integers(2, 10))
    Y = linalg.unit_sphere(d, p, g)
    ucfg = UnknownDesignConfig(k=k, m=2 * k + 3, eps=0.1, delta=0.2)
    assert test_unknown(Y, ucfg, seed).queries_used == query_budget(ucfg, p=p)
    dcfg = DimConfig(k=k, eps=0.1, delta=0.2, width_trials=int(g.integers(1, 50)))
    assert test_dimension(Y, dcfg, seed).queries_used == query_budget(dcfg, p=p)
    kcfg = KnownDesignConfig(k=k, eps=0.5, delta=0.2, sketch_constant=1.5)
    A = gen.gen_dictionary(d, 6, "gaussian-normalized", seed)
    assert test_known(A, Y[:, 0], kcfg, seed).queries_used == query_budget(kcfg, m=6)


def test_budget_needs_m_for_known():
    with pytest.raises(InvalidArgument):
        query_budget(KnownDesignConfig(k=1, eps=0.3, delta=0.1))
