import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from depseries import measures
from depseries.errors import (
    ContractViolationError,
    KernelIndexError,
    NumericalError,
    ValidationError,
)
from depseries.kernels import (
    abs_lag_table,
    apply_coefficient_scales,
    dump_explicit_csv,
    gram_from_array,
    gram_matrix,
    interleave_indices,
    kernel_eval,
    kernel_from_descriptor,
    load_explicit_csv,
    make_kernel,
    repair_psd,
    validate_psd,
)


def test_interleave_order():
    np.testing.assert_array_equal(interleave_indices(0), [0])
    np.testing.assert_array_equal(interleave_indices(2), [0, 1, -1, 2, -2])
    with pytest.raises(ValidationError):
        interleave_indices(-1)


# ---------------------------------------------------------------------------
# Descriptors


@pytest.mark.parametrize("desc,variant", [
    ("identity", "identity"),
    ("all_ones", "all_ones"),
    ("power_decay:K=1,a=1", "power_decay"),
    ("power_decay:K=0.5,a=2", "power_decay"),
    ("fourier:cantor", "fourier"),
    ("fourier:lebesgue", "fourier"),
    ({"variant": "identity"}, "identity"),
    ({"variant": "power_decay", "K": 1, "a": 1}, "power_decay"),
], ids=repr)
def test_descriptor_parsing(desc, variant):
    k = make_kernel(desc)
    assert k.variant == variant
    assert k.is_stationary
    # formula variants round-trip through their own descriptor
    assert make_kernel(k) is k


@pytest.mark.parametrize("bad", [
    "identity:x",
    "power_decay:z=1",
    "power_decay:K=0,a=1",
    "power_decay:K=1,a=-1",
    "fourier:",
    "explicit:",
    "wavelet",
    {"variant": "identity", "K": 1},
    {"variant": "nope"},
    {"variant": "power_decay"},
    42,
])
def test_descriptor_rejection(bad):
    with pytest.raises(ValidationError):
        make_kernel(bad)


def test_kernel_from_descriptor_json_string():
    k = kernel_from_descriptor('{"variant": "power_decay", "K": 1.0, "a": 1.0}')
    assert k.variant == "power_decay" and k.K == 1.0


# ---------------------------------------------------------------------------
# Pointwise evaluation


def test_kernel_eval_identity_and_all_ones():
    ident = make_kernel("identity")
    ones = make_kernel("all_ones")
    assert kernel_eval(ident, 3, 3) == 1.0
    assert kernel_eval(ident, 3, 4) == 0.0
    assert kernel_eval(ones, -7, 12) == 1.0


def test_kernel_eval_power_decay():
    k = make_kernel("power_decay:K=0.5,a=2")
    assert kernel_eval(k, 5, 5) == 1.0
    assert kernel_eval(k, 5, 2) == pytest.approx(0.5 / 9.0)  # lag 3, a=2
    assert kernel_eval(k, -3, 1) == pytest.approx(0.5 / 16.0)


def test_kernel_eval_fourier_matches_measure():
    k = make_kernel("fourier:cantor")
    for n, m in [(4, 1), (10, 3), (2, 2)]:
        assert kernel_eval(k, n, m) == pytest.approx(
            measures.cantor_fourier(n - m), rel=1e-15, abs=1e-15
        )


def test_kernel_eval_explicit_range():
    mat = [[1.0, 0.25], [0.25, 1.0]]
    k = make_kernel({"variant": "explicit", "matrix": mat, "index_base": 5})
    assert kernel_eval(k, 5, 6) == 0.25
    assert kernel_eval(k, 6, 6) == 1.0
    with pytest.raises(KernelIndexError):
        kernel_eval(k, 4, 5)
    with pytest.raises(KernelIndexError):
        kernel_eval(k, 5, 7)


# ---------------------------------------------------------------------------
# Explicit matrices


def test_explicit_rejects_non_hermitian():
    with pytest.raises(ValidationError, match="Hermitian"):
        make_kernel({"variant": "explicit", "matrix": [[1.0, 0.5], [0.2, 1.0]]})


def test_explicit_rejects_nonpositive_diagonal():
    with pytest.raises(ValidationError, match="diagonal"):
        make_kernel({"variant": "explicit", "matrix": [[0.0, 0.0], [0.0, 1.0]]})


def test_explicit_rescales_diagonal_to_unit():
    # raw gamma has variance 4 on the first coordinate
    mat = [[4.0, 1.0], [1.0, 1.0]]
    k = make_kernel({"variant": "explicit", "matrix": mat})
    assert k.matrix[0, 0] == 1.0 and k.matrix[1, 1] == 1.0
    assert k.matrix[0, 1] == pytest.approx(0.5)
    np.testing.assert_allclose(k.coeff_scale, [2.0, 1.0])
    scaled = apply_coefficient_scales(k, np.array([3.0, 3.0]), np.array([1, 2]))
    np.testing.assert_allclose(scaled, [6.0, 3.0])


def test_apply_coefficient_scales_identity_passthrough():
    k = make_kernel("identity")
    v = np.array([1.0, 2.0])
    assert apply_coefficient_scales(k, v, np.array([1, 2])) is v


def test_apply_coefficient_scales_range_check():
    mat = [[4.0, 1.0], [1.0, 1.0]]
    k = make_kernel({"variant": "explicit", "matrix": mat})
    with pytest.raises(KernelIndexError):
        apply_coefficient_scales(k, np.ones(2), np.array([2, 3]))


def test_explicit_complex_pairs_from_json():
    mat = [[[1.0, 0.0], [0.0, -0.5]], [[0.0, 0.5], [1.0, 0.0]]]
    k = make_kernel({"variant": "explicit", "matrix": mat})
    assert k.matrix[0, 1] == -0.5j
    assert k.matrix[1, 0] == 0.5j


def test_explicit_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    mat = b @ b.conj().T
    d = np.sqrt(mat.diagonal().real)
    mat = mat / np.outer(d, d)
    path = tmp_path / "kernel.csv"
    dump_explicit_csv(mat, path)
    loaded = load_explicit_csv(path)
    np.testing.assert_allclose(loaded, mat, rtol=0, atol=1e-15)
    k = make_kernel(f"explicit:{path}")
    assert k.variant == "explicit" and k.size == 3


# ---------------------------------------------------------------------------
# Lag tables


def test_abs_lag_table_values():
    np.testing.assert_array_equal(abs_lag_table(make_kernel("identity"), 3),
                                  [1.0, 0.0, 0.0, 0.0])
    np.testing.assert_array_equal(abs_lag_table(make_kernel("all_ones"), 2),
                                  [1.0, 1.0, 1.0])
    t = abs_lag_table(make_kernel("power_decay:K=2,a=1"), 4)
    np.testing.assert_allclose(t, [1.0, 2.0, 1.0, 2.0 / 3.0, 0.5])
    f = abs_lag_table(make_kernel("fourier:cantor"), 2)
    assert f[0] == 1.0
    assert f[1] == pytest.approx(abs(measures.cantor_fourier(1)), rel=1e-15)


def test_abs_lag_table_refuses_explicit():
    k = make_kernel({"variant": "explicit", "matrix": [[1.0]]})
    with pytest.raises(ContractViolationError):
        abs_lag_table(k, 2)
    with pytest.raises(ValidationError):
        abs_lag_table(make_kernel("identity"), -1)


# ---------------------------------------------------------------------------
# Gram truncations


def test_gram_matrix_basic_shapes():
    g = gram_matrix(make_kernel("identity"), 4)
    np.testing.assert_array_equal(g.entries, np.eye(4))
    g = gram_matrix(make_kernel("all_ones"), 3)
    np.testing.assert_array_equal(g.entries, np.ones((3, 3)))
    with pytest.raises(ValidationError):
        gram_matrix(make_kernel("identity"), 0)


def test_gram_matrix_is_exactly_hermitian():
    g = gram_matrix(make_kernel("fourier:cantor"), 16)
    np.testing.assert_array_equal(g.entries, g.entries.conj().T)


def test_gram_matrix_fourier_entries():
    g = gram_matrix(make_kernel("fourier:cantor"), 5)
    lags = np.arange(5)[:, None] - np.arange(5)[None, :]
    want = measures.cantor_fourier(np.abs(lags).ravel()).reshape(5, 5)
    np.testing.assert_allclose(g.entries.real, want, rtol=0, atol=1e-15)


def test_gram_matrix_folded_indices():
    # folded two-sided enumeration: gamma evaluated at original indices
    idx = interleave_indices(1)  # 0, 1, -1
    k = make_kernel("power_decay:K=1,a=1")
    g = gram_matrix(k, 3, indices=idx)
    assert g.entries[1, 2] == pytest.approx(0.5)  # |1 - (-1)| = 2
    assert g.entries[0, 1] == pytest.approx(1.0)  # |0 - 1| = 1
    with pytest.raises(ValidationError):
        gram_matrix(k, 3, indices=idx[:2])


def test_gram_matrix_explicit_range_check():
    k = make_kernel({"variant": "explicit", "matrix": np.eye(3).tolist()})
    assert gram_matrix(k, 3).size == 3
    with pytest.raises(ValidationError):
        gram_matrix(k, 4)


# ---------------------------------------------------------------------------
# PSD checks and repair


def test_validate_psd_accepts_identity():
    g = gram_matrix(make_kernel("identity"), 8)
    v = validate_psd(g)
    assert v.valid
    assert v.min_eigen == pytest.approx(1.0, rel=1e-12)
    assert g.min_eigen_estimate == v.min_eigen


def test_validate_psd_flags_indefinite():
    m = np.array([[1.0, 0.9, 0.0], [0.9, 1.0, 0.9], [0.0, 0.9, 1.0]])
    g = gram_from_array(m)
    v = validate_psd(g)
    assert not v.valid
    assert v.min_eigen == pytest.approx(1.0 - 0.9 * np.sqrt(2.0), rel=1e-12)


def test_validate_psd_tol_handling():
    g = gram_from_array(np.eye(2))
    with pytest.raises(ValidationError):
        validate_psd(g, tol=-1.0)
    assert validate_psd(g, tol=0.0).valid


def test_validate_psd_rejects_non_hermitian():
    g = gram_from_array(np.array([[1.0, 0.5], [0.2, 1.0]]))
    with pytest.raises(ContractViolationError):
        validate_psd(g)


def test_repair_psd_clips_and_renormalizes(caplog):
    m = np.array([[1.0, 0.9, 0.0], [0.9, 1.0, 0.9], [0.0, 0.9, 1.0]])
    g = gram_from_array(m)
    lam_min = float(np.linalg.eigvalsh(m)[0])
    with caplog.at_level(logging.WARNING, logger="depseries.kernels"):
        repaired, info = repair_psd(g)
    assert any("repair" in r.message for r in caplog.records)
    assert info.magnitude == pytest.approx(-lam_min, rel=1e-12)
    assert info.max_diag_shift > 0.0
    np.testing.assert_allclose(repaired.entries.diagonal().real, 1.0, atol=1e-12)
    assert validate_psd(repaired, tol=1e-10).valid


def test_repair_psd_noop_on_psd_input():
    g = gram_from_array(np.eye(3))
    repaired, info = repair_psd(g)
    assert info.magnitude == 0.0
    np.testing.assert_allclose(repaired.entries, np.eye(3), atol=1e-12)


@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**31))
def test_gram_psd_for_genuinely_psd_kernels(n, seed):
    # identity/all_ones trivially, power_decay by diagonal dominance when
    # 2 K zeta(a) < 1, fourier by positive-definiteness of mu_hat
    desc = ["identity", "all_ones", "power_decay:K=0.1,a=2",
            "fourier:cantor"][seed % 4]
    g = gram_matrix(make_kernel(desc), n)
    assert validate_psd(g).valid


def test_power_decay_k1_a1_truncation_needs_repair():
    # slow off-diagonal decay overwhelms the unit diagonal already at N=3
    g = gram_matrix(make_kernel("power_decay:K=1,a=1"), 3)
    assert not validate_psd(g).valid


def test_load_explicit_csv_rejects_garbage(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1.0,0.0,0.5\n")  # odd field count: not (re, im) pairs
    with pytest.raises(ValidationError):
        load_explicit_csv(p)
    p.write_text("")
    with pytest.raises(ValidationError):
        load_explicit_csv(p)
