import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaussbound.states import adesso, fmsv, tmsv, werner_wolf
from gaussbound.symplectic import (
    Bipartition,
    as_covmat,
    beam_splitter,
    enumerate_bipartitions,
    is_physical,
    is_symplectic,
    partial_transpose,
    permute_modes,
    ppt_check,
    real_embed,
    single_mode_squeezer,
    symplectic_eigenvalues,
    symplectic_form,
    two_mode_squeezer,
)

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
angles = st.floats(-np.pi, np.pi, allow_nan=False)
squeezes = st.floats(-1.5, 1.5, allow_nan=False)


def random_symplectic(rng, n, depth=6):
    S = np.eye(2 * n)
    for _ in range(depth):
        i, j = rng.choice(np.arange(1, n + 1), 2, replace=False)
        S = beam_splitter(n, i, j, rng.uniform(-np.pi, np.pi)) @ S
        S = two_mode_squeezer(n, i, j, rng.uniform(-0.8, 0.8)) @ S
        S = single_mode_squeezer(n, i, rng.uniform(-0.8, 0.8)) @ S
    return S


def random_local_symplectic(rng, cut):
    n = cut.n
    S = np.eye(2 * n)
    for side in (cut.side_a, cut.side_b):
        for m in side:
            S = single_mode_squeezer(n, m, rng.uniform(-0.7, 0.7)) @ S
        for a, b in zip(side, side[1:]):
            S = beam_splitter(n, a, b, rng.uniform(-np.pi, np.pi)) @ S
            S = two_mode_squeezer(n, a, b, rng.uniform(-0.5, 0.5)) @ S
    return S


class TestSymplecticForm:
    def test_one_mode(self):
        np.testing.assert_array_equal(symplectic_form(1), OMEGA)

    def test_two_modes_is_direct_sum(self):
        Om = symplectic_form(2)
        np.testing.assert_array_equal(Om, np.block([[OMEGA, np.zeros((2, 2))], [np.zeros((2, 2)), OMEGA]]))
        np.testing.assert_array_equal(Om @ Om, -np.eye(4))

    def test_four_modes_orthogonal_traceless(self):
        Om = symplectic_form(4)
        np.testing.assert_allclose(Om @ Om.T, np.eye(8))
        assert np.trace(Om) == 0

    @pytest.mark.parametrize("n", [0, -1, 1.5])
    def test_invalid(self, n):
        with pytest.raises(ValueError):
            symplectic_form(n)


class TestRealEmbed:
    def test_identity(self):
        M = real_embed(np.eye(2), np.zeros((2, 2)))
        np.testing.assert_array_equal(M, np.eye(4))

    def test_vacuum_plus_i_omega(self):
        np.testing.assert_allclose(np.linalg.eigvalsh(real_embed(np.eye(2), OMEGA)), [0, 0, 2, 2], atol=1e-14)

    def test_werner_wolf_partial_transpose_spectrum(self):
        cut = Bipartition.parse("12:34")
        w = np.linalg.eigvalsh(real_embed(werner_wolf(), cut.signed_form()))
        r3 = np.sqrt(3)
        expected = np.repeat([0, 3 - r3, 3, 3 + r3], 4)
        np.testing.assert_allclose(w, expected, atol=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            real_embed(np.eye(2), np.zeros((3, 3)))


class TestPhysicality:
    def test_vacuum(self):
        ok, m = is_physical(np.eye(8))
        assert ok and abs(m) < 1e-12

    def test_werner_wolf(self):
        assert is_physical(werner_wolf())[0]

    def test_half_vacuum_is_not_physical(self):
        ok, m = is_physical(0.5 * np.eye(8))
        assert not ok
        assert m == pytest.approx(-0.5)

    def test_as_covmat_rejects_asymmetric(self):
        V = np.eye(4)
        V[0, 1] = 1e-3
        with pytest.raises(ValueError):
            as_covmat(V)

    def test_as_covmat_rejects_odd_shape(self):
        with pytest.raises(ValueError):
            as_covmat(np.eye(3))


class TestSymplecticEigenvalues:
    def test_vacuum(self):
        np.testing.assert_allclose(symplectic_eigenvalues(np.eye(8)), np.ones(4))

    def test_fmsv_is_pure(self):
        np.testing.assert_allclose(symplectic_eigenvalues(fmsv(0.6)), np.ones(4), atol=1e-9)

    def test_thermal(self):
        np.testing.assert_allclose(symplectic_eigenvalues(4.5 * np.eye(8)), np.full(4, 4.5))

    def test_not_positive_definite(self):
        with pytest.raises(ValueError):
            symplectic_eigenvalues(-np.eye(4))

    def test_invariant_under_symplectic_congruence(self, rng):
        V = np.diag([2.0, 2.0, 3.0, 3.0, 1.5, 1.5])
        S = random_symplectic(rng, 3)
        np.testing.assert_allclose(symplectic_eigenvalues(S @ V @ S.T), [1.5, 2.0, 3.0], rtol=1e-9)


class TestBipartitions:
    def test_counts(self):
        assert len(enumerate_bipartitions(2)) == 1
        assert len(enumerate_bipartitions(3)) == 3
        cuts = enumerate_bipartitions(4)
        assert len(cuts) == 7
        assert sum(len(c.side_a) == 2 for c in cuts) == 3

    def test_order_and_labels(self):
        labels = [c.label for c in enumerate_bipartitions(4)]
        assert labels == ["1:234", "2:134", "3:124", "4:123", "12:34", "13:24", "14:23"]

    @pytest.mark.parametrize("n", range(2, 9))
    def test_general_count(self, n):
        assert len(enumerate_bipartitions(n)) == 2 ** (n - 1) - 1

    def test_parse_normalizes_sides(self):
        assert Bipartition.parse("34:12") == Bipartition.parse("12:34")
        assert Bipartition.parse("134:2").label == "2:134"

    def test_parse_rejects_bad_cuts(self):
        for text in ("12:3", "12:23", "1234", "15:234"):
            with pytest.raises(ValueError):
                Bipartition.parse(text, 4)

    def test_single_mode_flag(self):
        assert Bipartition.parse("1:234").is_single_mode
        assert not Bipartition.parse("13:24").is_single_mode


class TestPartialTranspose:
    @given(arrays(np.float64, (8, 8), elements=st.floats(-3, 3, allow_nan=False)),
           st.sampled_from(enumerate_bipartitions(4)))
    def test_involution(self, M, cut):
        V = M + M.T
        np.testing.assert_array_equal(partial_transpose(partial_transpose(V, cut), cut), V)

    def test_vacuum_invariant(self):
        for cut in enumerate_bipartitions(4):
            np.testing.assert_array_equal(partial_transpose(np.eye(8), cut), np.eye(8))

    def test_tmsv_block_flips_to_identity(self):
        V = partial_transpose(tmsv(0.6), Bipartition.parse("1:2", 2))
        np.testing.assert_allclose(V[:2, 2:], np.sinh(1.2) * np.eye(2), atol=1e-15)
        np.testing.assert_allclose(V[:2, :2], np.cosh(1.2) * np.eye(2), atol=1e-15)

    def test_tmsv_negativity(self):
        # smallest PT symplectic eigenvalue of a TMSV is exp(-2r)
        ok, m = ppt_check(tmsv(0.6), Bipartition.parse("1:2", 2))
        assert not ok
        assert m == pytest.approx(np.exp(-1.2) - 1, abs=1e-12)

    def test_werner_wolf_is_ppt_on_12_34(self):
        ok, m = ppt_check(werner_wolf(), Bipartition.parse("12:34"))
        assert ok and abs(m) < 1e-9

    def test_fmsv_is_npt(self):
        assert not ppt_check(fmsv(0.6), Bipartition.parse("1:234"))[0]

    def test_vacuum_ppt_everywhere(self):
        for cut in enumerate_bipartitions(4):
            ok, m = ppt_check(np.eye(8), cut)
            assert ok and m == pytest.approx(0, abs=1e-12)

    def test_pt_spectrum_invariant_under_local_symplectic(self, rng):
        V = fmsv(0.6)
        for cut in enumerate_bipartitions(4):
            S = random_local_symplectic(rng, cut)
            a = symplectic_eigenvalues(partial_transpose(V, cut))
            b = symplectic_eigenvalues(partial_transpose(S @ V @ S.T, cut))
            np.testing.assert_allclose(a, b, rtol=1e-8)


class TestGates:
    def test_beam_splitter_zero_is_identity(self):
        np.testing.assert_array_equal(beam_splitter(4, 1, 3, 0.0), np.eye(8))

    def test_beam_splitter_balanced_entries(self):
        B = beam_splitter(2, 1, 2, np.pi / 4)
        assert B[0, 0] == pytest.approx(1 / np.sqrt(2))
        assert B[0, 2] == pytest.approx(1 / np.sqrt(2))

    @given(angles)
    def test_beam_splitter_orthogonal_symplectic(self, theta):
        B = beam_splitter(4, 2, 4, theta)
        np.testing.assert_allclose(B.T, beam_splitter(4, 2, 4, -theta), atol=1e-15)
        assert is_symplectic(B)
        np.testing.assert_allclose(B @ B.T, np.eye(8), atol=1e-14)

    @given(squeezes)
    def test_two_mode_squeezer_symplectic(self, r):
        assert is_symplectic(two_mode_squeezer(3, 1, 3, r))

    def test_two_mode_squeezer_makes_tmsv(self):
        S = two_mode_squeezer(2, 1, 2, 0.6)
        np.testing.assert_allclose(S @ S.T, tmsv(0.6), atol=1e-12)
        assert tmsv(0.6)[0, 0] == pytest.approx(np.cosh(1.2))

    def test_two_mode_squeezer_zero(self):
        np.testing.assert_array_equal(two_mode_squeezer(2, 1, 2, 0.0), np.eye(4))

    def test_single_mode_squeezer(self):
        S = single_mode_squeezer(1, 1, 0.7)
        assert np.linalg.det(S) == pytest.approx(1.0)
        np.testing.assert_allclose(S @ single_mode_squeezer(1, 1, -0.7), np.eye(2))
        np.testing.assert_array_equal(single_mode_squeezer(2, 2, 0.0), np.eye(4))

    def test_same_mode_rejected(self):
        with pytest.raises(ValueError):
            beam_splitter(4, 2, 2, 0.1)


class TestPermuteModes:
    def test_identity(self):
        V = fmsv(0.4)
        np.testing.assert_array_equal(permute_modes(V, [1, 2, 3, 4]), V)

    @given(st.permutations([1, 2, 3, 4]))
    def test_inverse(self, perm):
        V = adesso(0.3, 0.5)
        inv = [0] * 4
        for old, new in enumerate(perm, start=1):
            inv[new - 1] = old
        np.testing.assert_array_equal(permute_modes(permute_modes(V, perm), inv), V)

    def test_adesso_exchange_symmetry(self):
        V = adesso(0.6, 0.6)
        np.testing.assert_allclose(permute_modes(V, [4, 3, 2, 1]), V, atol=1e-12)

    def test_moves_a_mode(self):
        V = np.diag([1.0, 1.0, 2.0, 2.0, 3.0, 3.0])
        W = permute_modes(V, [2, 3, 1])
        np.testing.assert_array_equal(np.diag(W), [3, 3, 1, 1, 2, 2])

    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            permute_modes(np.eye(6), [1, 1, 2])
