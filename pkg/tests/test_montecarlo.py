import logging
import math

import numpy as np
import pytest

from depseries import montecarlo as mc
from depseries.criteria import one_sided, two_sided
from depseries.errors import (
    ContractViolationError,
    InsufficientDataError,
    NumericalError,
    UnsupportedConfigurationError,
    ValidationError,
)
from depseries.kernels import gram_from_array, gram_matrix, make_kernel, validate_psd

# independently recomputed Monte Carlo references (distinct RNG streams)
IID_SUP4_SQ_MEAN = 5.129852508959984
IID_SUP4_SQ_STDERR = 0.0017942166150937207
BLOCKS_R3_SUM_MEAN = 1.6383933657295702
BLOCKS_R3_SUM_STDERR = 0.0004816666061024021


def _config(**kw):
    base = dict(n=4, replicates=200, seed=1)
    base.update(kw)
    return mc.SimulationConfig(**base)


# ---------------------------------------------------------------------------
# Configuration


@pytest.mark.parametrize("kw", [
    {"n": 0}, {"n": 4097}, {"replicates": 0}, {"seed": -1},
    {"field": "quaternion"}, {"sigma_margin": 0.0}, {"chunk": 0},
])
def test_config_validation(kw):
    with pytest.raises(ValidationError):
        _config(**kw)


def test_canonical_bounds_aliases_and_dedup():
    got = mc.canonical_bounds(["theorem", "blocks_4L", "THEOREM", "sudakov"])
    assert got == ("theorem_8L", "blocks_4L", "sudakov")
    with pytest.raises(ValidationError):
        mc.canonical_bounds(["newton"])
    with pytest.raises(ValidationError):
        mc.canonical_bounds([])


# ---------------------------------------------------------------------------
# Factorization


def test_factor_identity_uses_cholesky():
    g = gram_matrix(make_kernel("identity"), 4)
    info = mc.factor_covariance(g)
    assert info.method == "cholesky"
    np.testing.assert_allclose(info.factor @ info.factor.conj().T, np.eye(4),
                               atol=1e-12)
    assert mc.factor_covariance(g) is info  # cached on the gram


def test_factor_singular_psd_falls_back_to_eigh():
    g = gram_matrix(make_kernel("all_ones"), 3)  # rank 1
    info = mc.factor_covariance(g)
    assert info.method == "eigh"
    assert not info.repaired
    np.testing.assert_allclose(info.factor @ info.factor.conj().T,
                               np.ones((3, 3)), atol=1e-10)


def test_factor_indefinite_repairs_with_warning(caplog):
    g = gram_matrix(make_kernel("power_decay:K=1,a=1"), 3)
    validate_psd(g)
    with caplog.at_level(logging.WARNING, logger="depseries.montecarlo"):
        info = mc.factor_covariance(g)
    assert info.method == "eigh+clip"
    assert info.repaired
    assert info.repair_magnitude > 0.0
    assert any("repaired" in r.message for r in caplog.records)
    C = info.factor @ info.factor.conj().T
    np.testing.assert_allclose(C.diagonal().real, 1.0, atol=1e-10)
    assert float(np.linalg.eigvalsh(C)[0]) >= -1e-10


def test_factor_indefinite_refused_without_repair():
    g = gram_matrix(make_kernel("power_decay:K=1,a=1"), 3)
    with pytest.raises(NumericalError):
        mc.factor_covariance(g, repair=False)


# ---------------------------------------------------------------------------
# Sampling


def test_sample_identity_covariance_within_mc_error():
    g = gram_matrix(make_kernel("identity"), 2)
    X = mc.sample_gaussian(g, _config(n=2, replicates=20_000, seed=3))
    C = mc.empirical_covariance(X)
    se = 1.0 / math.sqrt(20_000)
    assert abs(C[0, 0] - 1.0) < 3 * math.sqrt(2) * se
    assert abs(C[1, 1] - 1.0) < 3 * math.sqrt(2) * se
    assert abs(C[0, 1]) < 3 * se


def test_sample_all_ones_coordinates_coincide():
    g = gram_matrix(make_kernel("all_ones"), 5)
    X = mc.sample_gaussian(g, _config(n=5, replicates=50, seed=4))
    assert float(np.abs(X - X[:, :1]).max()) < 1e-12


def test_sample_complex_field_moments():
    g = gram_matrix(make_kernel("identity"), 1)
    X = mc.sample_gaussian(g, _config(n=1, replicates=40_000, seed=5, field="complex"))
    z = X[:, 0]
    assert abs(float(np.mean(np.abs(z) ** 2)) - 1.0) < 0.02  # E|Z|^2 = 1
    assert abs(complex(np.mean(z * z))) < 0.02  # circular symmetry: E Z^2 = 0


def test_sample_real_field_refuses_complex_covariance():
    m = np.array([[1.0, 0.5j], [-0.5j, 1.0]])
    g = gram_from_array(m)
    with pytest.raises(UnsupportedConfigurationError):
        mc.sample_gaussian(g, _config(n=2, replicates=10))


def test_sample_window_validation():
    g = gram_matrix(make_kernel("identity"), 2)
    cfg = _config(n=2, replicates=10)
    with pytest.raises(ValidationError):
        mc.sample_gaussian(g, cfg, start=8, count=5)
    with pytest.raises(ValidationError):
        mc.sample_gaussian(g, cfg, start=-1, count=2)


def test_sampling_is_chunk_invariant():
    g = gram_matrix(make_kernel("power_decay:K=0.1,a=2"), 6)
    cfg = _config(n=6, replicates=40, seed=9)
    whole = mc.sample_gaussian(g, cfg)
    parts = np.concatenate([
        mc.sample_gaussian(g, cfg, start=0, count=13),
        mc.sample_gaussian(g, cfg, start=13, count=27),
    ])
    np.testing.assert_array_equal(whole, parts)


def test_sampled_covariance_matches_repaired_gram():
    # when the truncation is repaired, samples follow the repaired matrix
    g = gram_matrix(make_kernel("power_decay:K=1,a=1"), 64)
    validate_psd(g)
    X = mc.sample_gaussian(g, _config(n=64, replicates=30_000, seed=77))
    info = g.factor_info
    target = (info.factor @ info.factor.conj().T).real
    C = mc.empirical_covariance(X).real
    se = 3.0 * math.sqrt(2) / math.sqrt(30_000)
    assert abs(C[0, 1] - target[0, 1]) < se


# ---------------------------------------------------------------------------
# Running-maximum statistics


def test_maximal_statistics_by_hand():
    samples = np.array([[1.0, 1.0], [1.0, -1.0]])
    st = mc.maximal_statistics(samples, [1.0, 1.0])
    # running sums (1, 2) and (1, 0): sups 2 and 1
    assert st.estimate_sup_sq == pytest.approx(2.5)
    assert st.estimate_sup_abs == pytest.approx(1.5)
    assert st.endpoint_sq == pytest.approx(2.0)
    assert st.replicates == 2 and st.n_columns == 2


def test_maximal_statistics_validation():
    with pytest.raises(InsufficientDataError):
        mc.maximal_statistics(np.empty((0, 2)), [1.0, 1.0])
    with pytest.raises(ValidationError):
        mc.maximal_statistics(np.ones((3, 2)), [1.0])


def test_iid_sup4_against_independent_reference():
    g = gram_matrix(make_kernel("identity"), 4)
    X = mc.sample_gaussian(g, _config(n=4, replicates=100_000, seed=2718))
    st = mc.maximal_statistics(X, np.ones(4))
    combined = math.hypot(st.stderr_sup_sq, IID_SUP4_SQ_STDERR)
    assert abs(st.estimate_sup_sq - IID_SUP4_SQ_MEAN) < 3 * combined


# ---------------------------------------------------------------------------
# Dyadic blocks


def test_block_maxima_isolated_second_block():
    rng = np.random.Generator(np.random.Philox(key=7))
    Z = rng.standard_normal((100_000, 2))
    est = mc.block_maxima(Z, [0.0, 1.0], r=1)
    assert est.per_block_mean[0] == 0.0
    assert abs(est.per_block_mean[1] - 1.0) < 3 * est.per_block_stderr[1]


def test_block_maxima_support_on_first_index_only():
    rng = np.random.Generator(np.random.Philox(key=8))
    Z = rng.standard_normal((1000, 4))
    est = mc.block_maxima(Z, [1.0, 0.0, 0.0, 0.0], r=2)
    assert est.per_block_mean[1] == 0.0
    assert est.per_block_mean[2] == 0.0
    assert est.per_block_mean[0] > 0.5


def test_block_maxima_against_independent_reference():
    rng = np.random.Generator(np.random.Philox(key=31337))
    Z = rng.standard_normal((200_000, 8))
    est = mc.block_maxima(Z, 1.0 / np.arange(1, 9), r=3)
    combined = math.hypot(est.sum_stderr, BLOCKS_R3_SUM_STDERR)
    assert abs(est.sum_mean - BLOCKS_R3_SUM_MEAN) < 3 * combined


def test_block_maxima_validation():
    Z = np.ones((10, 8))
    with pytest.raises(ValidationError):
        mc.block_maxima(Z, np.ones(8), r=4)  # 8 columns cannot reach 2^4
    with pytest.raises(ValidationError):
        mc.block_maxima(Z, np.ones(8), r=-1)
    with pytest.raises(ValidationError):
        mc.block_maxima(Z, np.ones(4), r=1)  # shape mismatch


def test_max_block_depth():
    assert mc.max_block_depth(1) == 0
    assert mc.max_block_depth(2) == 1
    assert mc.max_block_depth(7) == 2
    assert mc.max_block_depth(8) == 3
    assert mc.max_block_depth(256) == 8
    with pytest.raises(ValidationError):
        mc.max_block_depth(0)


# ---------------------------------------------------------------------------
# Bound reports


def _stats(emp_sq, err_sq, emp_abs=1.0, err_abs=0.01, reps=1000, n=4, field="real"):
    return mc.MaximalStatistics(
        estimate_sup_sq=emp_sq, stderr_sup_sq=err_sq,
        estimate_sup_abs=emp_abs, stderr_sup_abs=err_abs,
        endpoint_sq=emp_sq, endpoint_sq_stderr=err_sq,
        replicates=reps, n_columns=n, field=field,
    )


def test_bound_report_lemma_formula():
    st = _stats(2.0, 0.1, n=4)
    rep = mc.bound_report("lemma", st, L=1.0, G=1.0, n=4)
    assert rep.theoretical == pytest.approx((2.0 + 2.0) ** 2)
    assert rep.verdict == "pass"
    assert rep.margin_sigmas == pytest.approx((16.0 - 2.0) / 0.1)


def test_bound_report_theorem_and_fail_verdict():
    st = _stats(9.0, 0.1, n=4)
    rep = mc.bound_report("theorem", st, L=1.0, G=1.0, n=4)
    assert rep.theoretical == 8.0
    assert rep.verdict == "fail"


def test_bound_report_insufficient_replicates():
    st = _stats(1.0, 0.1, reps=50, n=4)
    rep = mc.bound_report("lemma", st, L=1.0, G=1.0, n=4)
    assert rep.verdict == "insufficient"


def test_bound_report_needs_blocks():
    st = _stats(1.0, 0.1, n=4)
    with pytest.raises(ValidationError):
        mc.bound_report("blocks", st, L=1.0, G=1.0, n=4)


def test_bound_report_column_mismatch():
    st = _stats(1.0, 0.1, n=8)
    with pytest.raises(ContractViolationError):
        mc.bound_report("lemma", st, L=1.0, G=1.0, n=4)


def test_bound_report_sudakov_real_only():
    st = _stats(1.0, 0.1, n=4, field="complex")
    with pytest.raises(UnsupportedConfigurationError):
        mc.bound_report("sudakov", st, L=1.0, G=1.0, n=4)


def test_bound_report_zero_sequence_passes_with_zero_margin():
    st = _stats(0.0, 0.0, emp_abs=0.0, err_abs=0.0, n=1)
    rep = mc.bound_report("sudakov", st, L=0.0, G=0.0, n=1)
    assert rep.verdict == "pass"
    assert rep.margin_sigmas is None


# ---------------------------------------------------------------------------
# Full pipeline


def test_run_simulation_identity_small():
    a = one_sided([1.0, 0.5, 0.25, 0.125])
    res = mc.run_simulation(a, make_kernel("identity"),
                            _config(n=4, replicates=3000, seed=11))
    names = [b.bound_name for b in res.bound_reports]
    assert names == ["lemma", "theorem_8L", "blocks_4L", "sudakov"]
    assert all(b.verdict == "pass" for b in res.bound_reports)
    assert res.blocks.r == mc.max_block_depth(4) == 2
    assert res.sup_values is None
    # endpoint second moment is sum a_n^2 for an orthonormal system
    want = float(np.sum(np.abs(a.values) ** 2))
    assert abs(res.stats.endpoint_sq - want) < 5 * res.stats.endpoint_sq_stderr


def test_run_simulation_is_deterministic_and_chunk_invariant():
    a = one_sided(1.0 / np.arange(1, 17))
    k = make_kernel("power_decay:K=0.1,a=2")
    r1 = mc.run_simulation(a, k, _config(n=16, replicates=600, seed=42, chunk=600))
    r2 = mc.run_simulation(a, k, _config(n=16, replicates=600, seed=42, chunk=97))
    assert r1.stats == r2.stats
    assert r1.blocks == r2.blocks
    r3 = mc.run_simulation(a, k, _config(n=16, replicates=600, seed=43))
    assert r3.stats.estimate_sup_sq != r1.stats.estimate_sup_sq


def test_run_simulation_aligns_short_and_long_sequences():
    a = one_sided([1.0])  # zero-padded to n
    res = mc.run_simulation(a, make_kernel("identity"),
                            _config(n=4, replicates=500, seed=2))
    assert res.sequence_desc["length"] == 4
    # blocks beyond the support see only zero coefficients
    assert res.blocks.per_block_mean[1] == 0.0
    assert res.blocks.per_block_mean[2] == 0.0


def test_run_simulation_keep_maxima():
    a = one_sided(np.ones(4))
    res = mc.run_simulation(a, make_kernel("identity"),
                            _config(n=4, replicates=250, seed=6),
                            keep_maxima=True)
    assert res.sup_values.shape == (250,)
    assert float(res.sup_values.min()) >= 0.0
    assert np.mean(res.sup_values**2) == pytest.approx(res.stats.estimate_sup_sq)


def test_run_simulation_two_sided_fourier_kernel():
    a = two_sided([0.25, 1.0, 0.25])
    res = mc.run_simulation(a, make_kernel("fourier:cantor"),
                            _config(n=3, replicates=400, seed=8))
    assert res.sequence_desc["sidedness"] == "two"
    assert all(b.verdict == "pass" for b in res.bound_reports)


def test_run_simulation_explicit_refuses_two_sided():
    a = two_sided([0.25, 1.0, 0.25])
    k = make_kernel({"variant": "explicit", "matrix": np.eye(3).tolist()})
    with pytest.raises(UnsupportedConfigurationError):
        mc.run_simulation(a, k, _config(n=3, replicates=200, seed=1))


def test_run_simulation_complex_field_skips_sudakov():
    a = one_sided([1.0, 0.5])
    with pytest.raises(UnsupportedConfigurationError):
        mc.run_simulation(a, make_kernel("identity"),
                          _config(n=2, replicates=200, seed=1, field="complex"))
    res = mc.run_simulation(a, make_kernel("identity"),
                            _config(n=2, replicates=200, seed=1, field="complex"),
                            bounds=("lemma", "theorem", "blocks"))
    assert [b.bound_name for b in res.bound_reports] == \
        ["lemma", "theorem_8L", "blocks_4L"]


def test_run_simulation_norepair_propagates_numerical_error():
    a = one_sided(np.ones(3))
    with pytest.raises(NumericalError):
        mc.run_simulation(a, make_kernel("power_decay:K=1,a=1"),
                          _config(n=3, replicates=200, seed=1, repair=False))


def test_sudakov_check_single_gaussian():
    rep = mc.sudakov_check([1.0], "identity", n=1, replicates=40_000, seed=13)
    # E|Z| = sqrt(2/pi), bound 2 sqrt(G) = 2
    assert rep.theoretical == 2.0
    assert abs(rep.empirical - math.sqrt(2.0 / math.pi)) < 3 * rep.stderr
    assert rep.verdict == "pass"


def test_sudakov_check_rank_one_process():
    n = 16
    rep = mc.sudakov_check(np.full(n, 1.0 / n), "all_ones", n=n,
                           replicates=20_000, seed=14)
    # S_j = (j/n) X for one X ~ N(0,1): sup |S_j| = |X|, G = 1
    assert rep.theoretical == 2.0
    assert abs(rep.empirical - math.sqrt(2.0 / math.pi)) < 3 * rep.stderr


def test_empirical_covariance_validation():
    with pytest.raises(ValidationError):
        mc.empirical_covariance(np.ones(3))
    with pytest.raises(ValidationError):
        mc.empirical_covariance(np.empty((0, 2)))
