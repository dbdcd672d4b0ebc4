import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oplebesgue import (
    HermitianMatrix,
    PsdMatrix,
    ToleranceConfig,
    ValidationError,
    eigh,
    hermitian_from_json,
    hs_inner,
    loewner_leq,
    matrix_to_json,
    op_norm,
    pinv_psd,
    psd_from_json,
    range_contained,
    range_projection,
    sqrt_psd,
    trace,
    trace_norm,
)
from conftest import make_rng, random_hermitian, random_psd, random_unitary

ONES2 = np.ones((2, 2))


class TestValidation:
    def test_rejects_non_square(self):
        with pytest.raises(ValidationError, match="square"):
            HermitianMatrix(np.ones((2, 3)))

    def test_rejects_non_hermitian_naming_entries(self):
        with pytest.raises(ValidationError, match=r"\(0,1\).*\(1,0\)"):
            HermitianMatrix([[0.0, 1.0], [0.0, 0.0]])

    def test_accepts_roundoff_asymmetry(self):
        m = HermitianMatrix([[1.0, 0.5 + 1e-14], [0.5, 1.0]])
        np.testing.assert_allclose(m.array, m.array.conj().T)

    def test_rejects_nan(self):
        with pytest.raises(ValidationError, match="finite"):
            HermitianMatrix([[np.nan, 0.0], [0.0, 1.0]])

    def test_psd_clips_roundoff_negatives(self):
        rng = make_rng(0)
        u = random_unitary(rng, 2)
        a = (u * [1.0, -5e-11]) @ u.conj().T
        psd = PsdMatrix(a)
        assert psd.eigenvalues[-1] == 0.0

    def test_psd_rejects_genuine_negatives(self):
        with pytest.raises(ValidationError, match="not positive semidefinite"):
            PsdMatrix(np.diag([1.0, -1e-3]))

    def test_arrays_are_immutable(self):
        psd = PsdMatrix(np.eye(2))
        with pytest.raises(ValueError):
            psd.array[0, 0] = 5.0

    @pytest.mark.parametrize("bad", [
        {"psd_tol": 0.0}, {"rank_cutoff": -1e-3}, {"conv_tol": float("inf")},
        {"max_iters": 0}, {"max_iters": 2.5},
    ])
    def test_tolerance_config_rejects(self, bad):
        with pytest.raises(ValidationError):
            ToleranceConfig(**bad)


class TestEigh:
    def test_identity(self):
        decomp = eigh(np.eye(3))
        np.testing.assert_allclose(decomp.eigenvalues, [1.0, 1.0, 1.0])

    def test_already_diagonal(self):
        decomp = eigh(np.diag([2.0, 0.0]))
        np.testing.assert_allclose(decomp.eigenvalues, [2.0, 0.0])
        np.testing.assert_allclose(np.abs(decomp.eigenvectors), np.eye(2), atol=1e-14)

    def test_rank_one_two_by_two(self):
        # characteristic polynomial of [[1,1],[1,1]] by hand: eigenvalues 2, 0
        decomp = eigh(ONES2)
        np.testing.assert_allclose(decomp.eigenvalues, [2.0, 0.0], atol=1e-14)
        top = decomp.eigenvectors[:, 0]
        assert abs(abs(np.vdot(top, np.array([1, 1]) / np.sqrt(2))) - 1.0) < 1e-12

    def test_reconstruction_invariant(self):
        rng = make_rng(5)
        for _ in range(25):
            a = random_hermitian(rng, int(rng.integers(2, 12)))
            decomp = eigh(a)
            err = np.linalg.norm(decomp.reconstruct() - a)
            assert err <= 1e-10 * max(1.0, np.linalg.norm(a))
            assert np.all(np.diff(decomp.eigenvalues) <= 1e-12)


class TestSqrt:
    def test_diagonal_roots(self):
        np.testing.assert_allclose(
            sqrt_psd(np.diag([4.0, 9.0])).array, np.diag([2.0, 3.0]), atol=1e-12
        )

    def test_identity(self):
        np.testing.assert_allclose(sqrt_psd(np.eye(3)).array, np.eye(3), atol=1e-14)

    def test_rank_one_projector_scaling(self):
        # S = ones(2) satisfies S^2 = 2 S, so sqrt(S) = S / sqrt(2)
        np.testing.assert_allclose(sqrt_psd(ONES2).array, ONES2 / np.sqrt(2), atol=1e-12)


class TestPinv:
    def test_diagonal(self):
        np.testing.assert_allclose(pinv_psd(np.diag([2.0, 0.0])).array, np.diag([0.5, 0.0]), atol=1e-14)

    def test_identity(self):
        np.testing.assert_allclose(pinv_psd(np.eye(2)).array, np.eye(2), atol=1e-14)

    def test_rank_one(self):
        # ones(2) = 2 P with P the rank-one projector, so pinv = P / 2 = ones / 4
        np.testing.assert_allclose(pinv_psd(ONES2).array, ONES2 / 4, atol=1e-13)

    def test_moore_penrose_identities(self):
        rng = make_rng(11)
        for _ in range(30):
            dim = int(rng.integers(2, 15))
            a = random_psd(rng, dim, rank=int(rng.integers(1, dim + 1)))
            ap = pinv_psd(a)
            scale = max(1.0, op_norm(a))
            assert op_norm(a.array @ ap.array @ a.array - a.array) <= 1e-9 * scale
            assert op_norm(ap.array @ a.array @ ap.array - ap.array) <= 1e-9 * max(1.0, op_norm(ap))

    def test_involution_on_range(self):
        rng = make_rng(12)
        for _ in range(20):
            dim = int(rng.integers(2, 12))
            a = random_psd(rng, dim, rank=int(rng.integers(1, dim + 1)))
            back = pinv_psd(pinv_psd(a))
            assert op_norm(back.array - a.array) <= 1e-8 * max(1.0, op_norm(a))


class TestRangeProjection:
    def test_diagonal(self):
        np.testing.assert_allclose(range_projection(np.diag([5.0, 0.0])).array, np.diag([1.0, 0.0]), atol=1e-14)

    def test_zero(self):
        np.testing.assert_allclose(range_projection(np.zeros((2, 2))).array, 0.0, atol=1e-15)

    def test_rank_one(self):
        np.testing.assert_allclose(range_projection(ONES2).array, ONES2 / 2, atol=1e-12)

    def test_projection_identities(self):
        rng = make_rng(13)
        for _ in range(20):
            dim = int(rng.integers(2, 12))
            a = random_psd(rng, dim, rank=int(rng.integers(1, dim + 1)))
            p = range_projection(a).array
            assert op_norm(p @ p - p) <= 1e-9
            assert op_norm(p @ a.array - a.array) <= 1e-9 * max(1.0, op_norm(a))


class TestLoewner:
    def test_examples(self):
        assert loewner_leq(np.diag([1.0, 0.0]), np.diag([1.0, 1.0]))
        assert not loewner_leq(np.diag([2.0, 0.0]), np.diag([1.0, 1.0]))

    def test_reflexive_on_random(self):
        rng = make_rng(14)
        for _ in range(20):
            s = random_psd(rng, int(rng.integers(2, 10)))
            assert loewner_leq(s, s)

    def test_zero_below_everything(self):
        rng = make_rng(15)
        for _ in range(20):
            s = random_psd(rng, int(rng.integers(1, 10)))
            assert loewner_leq(np.zeros((s.dim, s.dim)), s)


class TestTraceFunctionals:
    def test_trace_norm_of_psd_is_trace(self):
        assert trace_norm(PsdMatrix(np.diag([1.0, 2.0]))) == pytest.approx(3.0)

    def test_hs_inner_identity(self):
        assert hs_inner(np.eye(2), np.eye(2)) == pytest.approx(2.0)

    def test_hs_inner_nilpotent(self):
        # entrywise sum of |entries|^2 for the matched pair
        n = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert hs_inner(n, n) == pytest.approx(1.0)

    def test_hs_inner_conjugate_symmetry(self):
        rng = make_rng(16)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert hs_inner(a, b) == pytest.approx(np.conj(hs_inner(b, a)))

    def test_trace_inequality(self):
        rng = make_rng(17)
        for _ in range(50):
            dim = int(rng.integers(2, 12))
            a = random_hermitian(rng, dim)
            t = random_psd(rng, dim)
            assert abs(trace(np.asarray(a, dtype=complex) @ t.array)) <= op_norm(a) * trace_norm(t) + 1e-9

    def test_op_norm_is_largest_singular_value(self):
        rng = make_rng(18)
        m = rng.standard_normal((4, 4))
        assert op_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0])


class TestSqrtRoundTrip:
    def test_square_reproduces_input(self):
        rng = make_rng(19)
        for _ in range(200):
            dim = int(rng.integers(2, 31))
            a = random_psd(rng, dim, rank=int(rng.integers(1, dim + 1)))
            root = sqrt_psd(a)
            err = np.linalg.norm(root.array @ root.array - a.array)
            assert err <= 1e-9 * max(1.0, np.linalg.norm(a.array))


class TestRangeContained:
    def test_subspace_inclusion(self):
        assert range_contained(PsdMatrix(np.diag([1.0, 0.0])), PsdMatrix(np.eye(2)))
        assert not range_contained(PsdMatrix(np.eye(2)), PsdMatrix(np.diag([1.0, 0.0])))

    def test_noise_zero_is_contained_everywhere(self):
        noise = PsdMatrix(np.diag([1e-30, 0.0]))
        assert range_contained(noise, PsdMatrix(np.diag([0.0, 1.0])))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=1, max_size=8))
def test_diagonal_psd_roundtrips_through_spectral_cache(diag):
    psd = PsdMatrix(np.diag(diag))
    np.testing.assert_allclose(sorted(psd.eigenvalues), sorted(diag), atol=1e-12)
    assert trace(psd) == pytest.approx(sum(diag))


class TestJson:
    def test_round_trip_real(self):
        m = PsdMatrix([[2.0, 1.0], [1.0, 2.0]])
        again = psd_from_json(json.loads(json.dumps(matrix_to_json(m))))
        np.testing.assert_allclose(again.array, m.array)

    def test_round_trip_complex(self):
        m = HermitianMatrix([[1.0, 1j], [-1j, 1.0]])
        blob = matrix_to_json(m)
        assert "imag" in blob
        np.testing.assert_allclose(hermitian_from_json(blob).array, m.array)

    def test_imag_defaults_to_zero(self):
        m = hermitian_from_json({"dim": 2, "real": [[1.0, 0.0], [0.0, 1.0]]})
        np.testing.assert_allclose(m.array, np.eye(2))

    @pytest.mark.parametrize("blob", [
        {"dim": 2, "real": [[1.0, 0.0], [0.0]]},              # ragged
        {"dim": 2, "real": [[1.0, 0.0]]},                     # wrong row count
        {"dim": 2, "real": [[1.0, 0.0], [0.0, "x"]]},         # non-numeric
        {"dim": 0, "real": []},                               # bad dim
        {"real": [[1.0]]},                                    # missing dim
        {"dim": 1},                                           # missing real
        [1, 2, 3],                                            # not an object
    ])
    def test_rejects_malformed(self, blob):
        with pytest.raises(ValidationError):
            hermitian_from_json(blob)
