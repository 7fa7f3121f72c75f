import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sketchtest import generators as gen
from sketchtest import linalg, oracles
from sketchtest.errors import BudgetExceeded, CertificationFailure, InvalidArgument


def test_identity_dictionary():
    np.testing.assert_array_equal(gen.gen_dictionary(4, 4, "identity", 0), np.eye(4))


@pytest.mark.parametrize("kind,d,m", [("gaussian-normalized", 64, 256), ("orthogonal", 16, 10),
                                      ("union-of-orthobases", 8, 24), ("identity", 5, 3)])
def test_dictionary_columns_are_unit(kind, d, m):
    A = gen.gen_dictionary(d, m, kind, 1)
    assert A.shape == (d, m)
    assert np.all(np.abs(np.linalg.norm(A, axis=0) - 1) <= 1e-12)


def test_union_of_orthobases_incoherence():
    A = gen.gen_dictionary(64, 128, "union-of-orthobases", 2)
    cross = np.abs(A[:, :64].T @ A[:, 64:]).max()
    assert abs(gen.certify_incoherence(A) - cross) <= 1e-12


def test_dictionary_shape_errors():
    with pytest.raises(InvalidArgument):
        gen.gen_dictionary(4, 5, "orthogonal", 0)
    with pytest.raises(InvalidArgument):
        gen.gen_dictionary(4, 6, "union-of-orthobases", 0)
    with pytest.raises(ValueError):
        gen.gen_dictionary(4, 4, "bogus", 0)


def test_sparse_vector_examples():
    x = gen.gen_sparse_vector(5, 5, 0)
    assert np.count_nonzero(x) == 5 and math.isclose(np.linalg.norm(x), 1)
    x = gen.gen_sparse_vector(100, 1, 3)
    assert np.count_nonzero(x) == 1 and abs(np.abs(x).max() - 1) <= 1e-15


def test_sparse_support_frequencies_uniform():
    g = linalg.rng(0)
    counts = np.zeros(100)
    for _ in range(10_000):
        counts[np.flatnonzero(gen.gen_sparse_vector(100, 3, g))] += 1
    p = 3 / 100
    assert np.all(np.abs(counts - 10_000 * p) <= 3 * math.sqrt(10_000 * p * (1 - p)))


@given(st.integers(0, 2**31), st.integers(1, 30), st.integers(1, 30))
def test_sparse_vector_property(seed, m, k):
    k = min(k, m)
    x = gen.gen_sparse_vector(m, k, seed)
    assert np.count_nonzero(x) == k
    assert abs(np.linalg.norm(x) - 1) <= 1e-12


def test_planted_examples():
    inst = gen.gen_planted(5, 5, 1, 1, "identity", 3)
    y = inst.Y[:, 0]
    assert np.count_nonzero(y) == 1 and abs(np.abs(y).max() - 1) <= 1e-15
    inst = gen.gen_planted(64, 64, 4, 200, "orthogonal", 0)
    assert np.all(np.abs(np.linalg.norm(inst.Y, axis=0) - 1) <= 1e-10)
    np.testing.assert_allclose(inst.A @ inst.X, inst.Y)


def test_sampled_rip_of_gaussian_dictionary():
    A = gen.gen_dictionary(64, 256, "gaussian-normalized", 0)
    cert = gen.certify_rip(A, 4, mode="sampled", budget=500, seed=0)
    assert cert.is_lower_bound and cert.supports_checked == 500
    assert cert.value <= 0.5


def test_noise_examples():
    inst = gen.gen_planted(10, 20, 2, 30, "gaussian-normalized", 0)
    np.testing.assert_array_equal(gen.add_noise(inst, 0.0, 1), inst.Y)
    Y = gen.add_noise(inst, 0.1, 1)
    np.testing.assert_allclose(np.linalg.norm(Y - inst.Y, axis=0), 0.1, atol=1e-12)
    Z = gen.add_noise(inst, 0.7, 1, on_sphere=True)
    np.testing.assert_allclose(np.linalg.norm(Z - inst.Y, axis=0), 0.7, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(Z, axis=0), np.linalg.norm(inst.Y, axis=0), atol=1e-12)


def test_noisy_orthogonal_instances_pass_tolerant_known_tester():
    from sketchtest.testers import KnownDesignConfig, test_known
    cfg = KnownDesignConfig(k=2, eps=0.3, delta=0.1, tolerant=True, sketch_constant=0.5)
    accepted = 0
    for s in range(200):
        inst = gen.gen_planted(64, 64, 2, 1, "orthogonal", s)
        accepted += test_known(inst.A, gen.add_noise(inst, 0.1, s)[:, 0], cfg, s).accept
    assert accepted >= 180


def test_noise_bound_formula():
    b = gen.substituted_noise_bound(4, 64, 200)
    assert math.isclose(b, (math.sqrt(2) - 1) * 2 * math.sqrt(12 * math.log(16)) / math.sqrt(math.log(200)))


def test_far_from_complement():
    A = gen.gen_subspace_dictionary(12, 20, 5, 0)
    far = gen.gen_far_known(A, 0.3, 3, 1)
    assert far.method == "orthogonal-complement"
    assert np.abs(A.T @ far.y).max() <= 1e-12
    assert oracles.best_sparse_fit(A, far.y, 3).residual >= 1 - 1e-12


def test_far_identity_example():
    y = np.full(4, 0.5)
    assert abs(oracles.best_sparse_fit(np.eye(4), y, 1).residual - math.sqrt(3) / 2) <= 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_far_oracle_certified_small_m(seed):
    g = linalg.rng(seed, "shape")
    m = int(g.integers(3, 13))
    d = int(g.integers(3, 9))
    A = gen.gen_dictionary(d, m, "gaussian-normalized", seed)
    try:
        far = gen.gen_far_known(A, 0.2, 2, seed, method="oracle")
    except CertificationFailure:
        pytest.skip("no random unit vector is 0.2-far from 2-sparse combinations here")
    assert oracles.best_sparse_fit(A, far.y, 2).residual > 0.2


def test_far_complement_needs_rank_deficiency():
    with pytest.raises(InvalidArgument):
        gen.gen_far_known(np.eye(3), 0.3, 1, 0, method="complement")


def test_discretized_examples():
    s = gen.gen_discretized_sparse(6, 6, 10, 0)
    np.testing.assert_allclose(np.abs(s.vectors), 1 / math.sqrt(6))
    s = gen.gen_discretized_sparse(30, 4, 200, 1)
    np.testing.assert_allclose(np.linalg.norm(s.vectors, axis=0), 1.0, atol=1e-15)
    assert np.all(np.count_nonzero(s.vectors, axis=0) == 4)


def test_discretized_sample_width_matches_enumeration():
    full = gen.enumerate_discretized_sparse(20, 2)
    assert full.shape == (20, math.comb(20, 2) * 4)
    sample = gen.gen_discretized_sparse(20, 2, 10_000, 0).vectors
    est = oracles.mc_width(sample, 50_000, 1).estimate
    ref = oracles.mc_width(full, 50_000, 2).estimate
    assert abs(est - ref) <= 0.15


def test_rip_examples():
    Q = gen.gen_dictionary(8, 8, "orthogonal", 0)
    for k in (1, 3, 8):
        assert gen.certify_rip(Q, k).value <= 1e-10
    D = np.column_stack([Q[:, 0], Q[:, 0], Q[:, 1]])
    assert abs(gen.certify_rip(D, 2).value - 1) <= 1e-12
    assert abs(gen.certify_incoherence(D) - 1) <= 1e-12
    assert gen.certify_incoherence(Q) <= 1e-10


def test_rip_budget_and_modes():
    A = gen.gen_dictionary(10, 20, "gaussian-normalized", 0)
    with pytest.raises(BudgetExceeded):
        gen.certify_rip(A, 3, budget=10)
    exact = gen.certify_rip(A, 2)
    sampled = gen.certify_rip(A, 2, mode="sampled", budget=30, seed=1)
    assert not exact.is_lower_bound and sampled.is_lower_bound
    assert sampled.value <= exact.value + 1e-12


def test_rip_and_incoherence_both_directions_random_20x40():
    A = gen.gen_dictionary(20, 40, "gaussian-normalized", 3)
    mu = gen.certify_incoherence(A)
    for k in (1, 2):
        zeta = gen.certify_rip(A, 2 * k, convention="energy").value
        assert mu <= zeta + 1e-12
        if 4 * k * mu < 1:
            assert zeta <= 4 * k * mu


def test_norm_convention_breaks_rip_to_incoherence_direction():
    # two unit columns with inner product c: norm-style constant 1 - sqrt(1 - c) < c
    c = 0.3
    A = np.array([[1.0, c], [0.0, math.sqrt(1 - c * c)]])
    norm_style = gen.certify_rip(A, 2, convention="norm").value
    energy = gen.certify_rip(A, 2, convention="energy").value
    assert norm_style < c - 0.1
    assert abs(energy - c) <= 1e-12
