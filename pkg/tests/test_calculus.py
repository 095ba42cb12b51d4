import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from posmaps.calculus import (
    BUILTIN_FUNCTIONS,
    apply_function,
    builtin,
    function_from_json,
    jump_decompose,
    loewner_matrix,
    loewner_matrix_test,
    range_projection,
    staircase_lower,
    staircase_values,
    table_function,
    with_jump,
)
from posmaps.errors import DegeneratePoints, DomainViolation, NegativeJump, NoLimit, NotInvertible, NotPsd
from posmaps.herm import (
    eig_herm,
    herm,
    is_projection,
    loewner_leq,
    loewner_margin,
    rand_contraction,
    rand_psd,
    rand_psd_between,
    rand_unitary,
    spectral_norm,
)
from strategies import psd, seeds

ONES = np.array([[1.0, 1.0], [1.0, 1.0]])
OM_NONNEG = [builtin("sqrt"), builtin("power", 0.5), builtin("power", 0.25), builtin("shifted_inverse", 2.0)]


def _psd_with_gap(dim, seed, lo=0.25, hi=1.0, rank=None):
    # spectrum in {0} u [lo, hi], so staircase errors stay in the smooth region of f
    rng = np.random.default_rng(seed)
    w = rng.uniform(lo, hi, dim)
    if rank is not None:
        w[rank:] = 0.0
    u = rand_unitary(dim, rng)
    return herm((u * w) @ u.conj().T)


class TestBuiltins:
    def test_names(self):
        for name in BUILTIN_FUNCTIONS:
            builtin(name, 0.5 if name == "power" else None)

    @pytest.mark.parametrize("name", ["square", "max_one"])
    def test_flagged_not_operator_monotone(self, name):
        assert builtin(name).operator_monotone is False

    def test_formulas(self):
        t = np.array([0.0, 1.0, 3.0])
        np.testing.assert_allclose(builtin("shifted_inverse", 2.0)(t), 2 - 1 / (t + 1))
        np.testing.assert_allclose(builtin("f_alpha", 2.0)(t), 2 / 3 - 1 / (t + 1))
        np.testing.assert_allclose(builtin("indicator_jump")(t), [0, 1, 1])
        np.testing.assert_allclose(builtin("max_one")(t), [1, 1, 3])

    @pytest.mark.parametrize("name,param", [("power", 0.0), ("power", 1.5), ("shifted_inverse", -1.0), ("f_alpha", -2.0), ("cube", None)])
    def test_parameter_ranges(self, name, param):
        with pytest.raises(ValueError):
            builtin(name, param)

    def test_f_alpha_negative_at_zero(self):
        assert builtin("f_alpha", 2.0).f0 == pytest.approx(-1 / 3)
        assert not builtin("f_alpha", 2.0).is_nonnegative

    def test_decreasing_rejected(self):
        with pytest.raises(ValueError):
            table_function([[0, 1], [1, 0]])

    def test_negative_jump_rejected(self):
        with pytest.raises(NegativeJump):
            with_jump(builtin("sqrt"), -1.0)

    def test_json_roundtrip(self):
        for obj in ({"builtin": "power", "param": 0.25}, {"builtin": "sqrt"}, {"table": [[0.0, 0.0], [2.0, 1.0]], "jump": 0.5}):
            assert function_from_json(obj).to_json() == obj

    def test_json_rejects_unknown(self):
        with pytest.raises(ValueError):
            function_from_json({"formula": "t**2"})


class TestApplyFunction:
    def test_identity(self, rng):
        a = rand_psd(4, rng)
        np.testing.assert_allclose(apply_function(builtin("identity"), a), a, atol=1e-12)

    def test_max_one_on_ones(self):
        out = apply_function(builtin("max_one"), ONES)
        np.testing.assert_allclose(out, [[1.5, 0.5], [0.5, 1.5]], atol=1e-12)

    def test_square_on_quarter(self):
        np.testing.assert_allclose(apply_function(builtin("square"), np.eye(3) / 4), np.eye(3) / 16, atol=1e-15)

    def test_rejects_non_psd(self):
        with pytest.raises(NotPsd):
            apply_function(builtin("sqrt"), np.diag([1.0, -0.5]))

    def test_domain_violation(self):
        f = table_function([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DomainViolation):
            apply_function(f, np.diag([0.5, 2.0]))

    def test_table_interpolates(self):
        f = table_function([[0.0, 0.0], [1.0, 2.0], [3.0, 3.0]])
        np.testing.assert_allclose(apply_function(f, np.diag([0.5, 2.0])), np.diag([1.0, 2.5]))

    def test_jump_skips_kernel(self):
        # eigenvalue 0 maps to F(0), the positive one to F + k
        f = with_jump(builtin("sqrt"), 2.0)
        np.testing.assert_allclose(apply_function(f, np.diag([4.0, 0.0])), np.diag([4.0, 0.0]), atol=1e-14)

    def test_noise_eigenvalue_counts_as_zero(self):
        out = apply_function(builtin("indicator_jump"), np.diag([1.0, 1e-13]))
        np.testing.assert_allclose(out, np.diag([1.0, 0.0]))

    @given(psd(max_dim=5), st.sampled_from(["sqrt", "square", "max_one", "f_alpha"]))
    def test_spectral_mapping(self, a, name):
        # oracle: LAPACK eigenvalues pushed through the scalar function
        f = builtin(name)
        out = apply_function(f, a)
        lam = np.clip(np.linalg.eigvalsh(a), 0, None)
        lam[lam <= 1e-9 * max(1.0, lam.max())] = 0.0
        expect = np.sort(f(lam))
        scale = max(1.0, float(np.max(np.abs(expect))))
        np.testing.assert_allclose(np.linalg.eigvalsh(out), expect, atol=1e-8 * scale)

    def test_tie_invariance(self, rng):
        # rotating inside a degenerate eigenspace must not change f(a)
        u = rand_unitary(4, rng)
        w = np.array([2.0, 2.0, 2.0, 0.5])
        a = herm((u * w) @ u.conj().T)
        r = np.eye(4, dtype=complex)
        r[:3, :3] = rand_unitary(3, rng)
        u2 = u @ r
        a2 = herm((u2 * w) @ u2.conj().T)
        f = builtin("sqrt")
        np.testing.assert_allclose(apply_function(f, a), apply_function(f, a2), atol=1e-12)
        np.testing.assert_allclose(apply_function(f, a), herm((u * np.sqrt(w)) @ u.conj().T), atol=1e-12)


class TestLemmaContraction:
    # c* f(a) c <= f(c* a c) for operator monotone f with f(0) >= 0
    @pytest.mark.parametrize("f", OM_NONNEG, ids=lambda f: f.name)
    @pytest.mark.parametrize("cls", ["positive", "general"])
    def test_holds(self, f, cls):
        for s in range(60):
            rng = np.random.default_rng(s)
            dim = 2 + s % 3
            a = rand_psd(dim, rng, 4.0)
            c = rand_contraction(dim, rng, cls)
            lhs = c.conj().T @ apply_function(f, a) @ c
            rhs = apply_function(f, herm(c.conj().T @ a @ c))
            assert loewner_margin(lhs, rhs) >= -1e-9

    def test_fails_for_square(self):
        c = np.eye(2) / 2
        lhs = c @ apply_function(builtin("square"), np.eye(2)) @ c
        rhs = apply_function(builtin("square"), c @ c)
        assert loewner_margin(lhs, rhs) == pytest.approx(-3 / 16, abs=1e-12)


class TestRangeProjection:
    def test_invertible(self, rng):
        np.testing.assert_allclose(range_projection(rand_psd(3, rng, min_eig=0.1)), np.eye(3), atol=1e-12)

    def test_diag(self):
        np.testing.assert_allclose(range_projection(np.diag([2.0, 0.0])), np.diag([1.0, 0.0]))

    def test_ones(self):
        # oracle: v v* / |v|^2 for v = (1, 1)
        v = np.array([1.0, 1.0])
        np.testing.assert_allclose(range_projection(ONES), np.outer(v, v) / (v @ v), atol=1e-14)

    @given(seeds, st.integers(2, 5))
    def test_projection_of_rank(self, seed, dim):
        rank = 1 + seed % dim
        a = _psd_with_gap(dim, seed, rank=rank)
        p = range_projection(a)
        assert is_projection(p)
        assert round(float(np.trace(p).real)) == rank
        # oracle: p fixes the range of a
        np.testing.assert_allclose(p @ a, a, atol=1e-10)

    @given(seeds)
    def test_dominates_contraction(self, seed):
        a = _psd_with_gap(3, seed, rank=2)
        assert loewner_leq(a, range_projection(a))

    def test_fixes_projections(self, rng):
        u = rand_unitary(4, rng)
        p = herm((u * np.array([1.0, 1.0, 0.0, 0.0])) @ u.conj().T)
        np.testing.assert_allclose(range_projection(p), p, atol=1e-12)

    @given(seeds)
    def test_monotone_on_exact_pairs(self, seed):
        b = _psd_with_gap(3, seed, rank=2)
        a = rand_psd_between(b, seed + 1)
        assert loewner_leq(range_projection(a), range_projection(b))


class TestStaircase:
    def test_scalar_cell_floor(self):
        # oracle: 1 lies in ((2-1)/2, 2/2] * beta, value (2-1)/2 * beta
        np.testing.assert_allclose(staircase_lower(np.eye(1), 1), [[0.5]])

    def test_values_formula(self):
        # oracle: direct case evaluation of the dyadic floor on [0, 4]
        lam = np.array([4.0, 3.0, 1.0, 0.5, 0.0])
        expect = []
        for x in lam:
            for k in range(1, 5):
                if (k - 1) / 4 * 4 < x <= k / 4 * 4:
                    expect.append((k - 1) / 4 * 4)
                    break
            else:
                expect.append(0.0)
        np.testing.assert_allclose(staircase_values(lam, 2), expect)

    def test_invertible_mode(self):
        vals = staircase_values(np.array([3.0, 2.0, 1.0]), 1, "invertible")
        np.testing.assert_allclose(vals, [2.0, 1.0, 1.0])

    def test_invertible_needs_invertible(self):
        with pytest.raises(NotInvertible):
            staircase_lower(ONES, 3, "invertible")

    def test_bad_order(self):
        with pytest.raises(ValueError):
            staircase_values(np.ones(2), 0)

    @given(seeds, st.integers(1, 12), st.sampled_from(["general", "invertible"]))
    def test_below_and_close(self, seed, n, mode):
        a = rand_psd(3, seed, 2.0, min_eig=0.05)
        g = staircase_lower(a, n, mode)
        w = eig_herm(a).eigenvalues
        floor = w[-1] if mode == "invertible" else 0.0
        assert loewner_leq(g, a)
        assert spectral_norm(a - g) <= (w[0] - floor) / 2**n + 1e-12

    @given(seeds)
    def test_monotone_in_n(self, seed):
        a = rand_psd(4, seed)
        chain = [staircase_lower(a, n) for n in range(1, 10)]
        for lo, hi in zip(chain, chain[1:]):
            assert loewner_leq(lo, hi)


class TestNormalitySurrogate:
    @pytest.mark.parametrize(
        "f",
        [builtin("sqrt"), builtin("f_alpha", 2.0), with_jump(builtin("sqrt"), 1.0)],
        ids=lambda f: f.name,
    )
    @pytest.mark.parametrize("seed", range(5))
    def test_chain_increases_to_limit(self, f, seed):
        dim = 2 + seed % 3
        a = _psd_with_gap(dim, seed, rank=dim - seed % 2)
        vals = [apply_function(f, staircase_lower(a, n)) for n in range(1, 21)]
        for lo, hi in zip(vals, vals[1:]):
            assert loewner_margin(lo, hi) >= -1e-9
        assert spectral_norm(vals[-1] - apply_function(f, a)) <= 1e-6


class TestLoewnerMatrix:
    def test_sqrt_psd(self):
        # oracle: exact derivative on the diagonal, eigvalsh of the 3x3 matrix
        t = np.array([1.0, 2.0, 3.0])
        s = np.sqrt(t)
        L = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                L[i, j] = 0.5 / s[i] if i == j else (s[i] - s[j]) / (t[i] - t[j])
        assert np.linalg.eigvalsh(L).min() > 0
        np.testing.assert_allclose(loewner_matrix(builtin("sqrt"), t), L, atol=1e-8)
        assert loewner_matrix_test(builtin("sqrt"), t)

    def test_square_fails(self):
        L = loewner_matrix(builtin("square"), [1.0, 4.0])
        np.testing.assert_allclose(L, [[2, 5], [5, 8]], atol=1e-6)
        assert np.linalg.det(L) == pytest.approx(-9.0, abs=1e-5)
        assert not loewner_matrix_test(builtin("square"), [1.0, 4.0])

    def test_identity(self):
        L = loewner_matrix(builtin("identity"), [0.5, 1.0, 7.0])
        np.testing.assert_allclose(L, np.ones((3, 3)), atol=1e-8)

    @pytest.mark.parametrize("name,param", [("power", 0.3), ("shifted_inverse", 1.0), ("f_alpha", 4.0)])
    def test_operator_monotone_builtins(self, name, param, rng):
        pts = np.sort(rng.uniform(0.1, 10, 5))
        assert loewner_matrix_test(builtin(name, param), pts)

    def test_central_difference_matches_derivative(self):
        # oracle: analytic derivative of t**0.3
        f = builtin("power", 0.3)
        t = np.array([0.2, 1.5, 6.0])
        np.testing.assert_allclose(np.diag(loewner_matrix(f, t)), 0.3 * t**-0.7, rtol=1e-7)

    @pytest.mark.parametrize("pts", [[1.0, 1.0], [0.0, 1.0], [-1.0, 2.0], []])
    def test_degenerate(self, pts):
        with pytest.raises(DegeneratePoints):
            loewner_matrix_test(builtin("sqrt"), pts)


class TestJumpDecompose:
    def test_indicator(self):
        spec = jump_decompose(lambda t: 1.0 if t > 0 else 0.0)
        assert spec.jump == 1.0
        np.testing.assert_allclose(spec.F(np.array([0.0, 0.5, 3.0])), 0.0)

    def test_sqrt_continuous(self):
        assert jump_decompose(np.sqrt).jump == 0.0

    def test_shifted_sqrt(self):
        spec = jump_decompose(lambda t: 2 + math.sqrt(t) if t > 0 else 1.0)
        # oracle: the limit on the grid 2**-j approaches 2
        assert spec.jump == pytest.approx(1.0, abs=1e-5)
        assert spec.f0 == 1.0
        t = np.array([0.0, 0.25, 4.0])
        np.testing.assert_allclose(spec(t), [1.0, 2.5, 4.0], atol=1e-5)

    def test_reconstructs_apply(self):
        spec = jump_decompose(lambda t: 2 + math.sqrt(t) if t > 0 else 1.0)
        out = apply_function(spec, np.diag([4.0, 0.0]))
        np.testing.assert_allclose(out, np.diag([4.0, 1.0]), atol=1e-5)

    def test_negative_jump(self):
        with pytest.raises(NegativeJump):
            jump_decompose(lambda t: 0.0 if t > 0 else 1.0)

    def test_no_limit(self):
        with pytest.raises(NoLimit):
            jump_decompose(lambda t: math.sin(1 / t) if t > 0 else 0.0)
