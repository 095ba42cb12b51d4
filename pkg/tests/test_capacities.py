import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from posmaps.capacities import (
    MIN,
    PRODUCT,
    Capacity,
    OperatorCapacity,
    capacity_from_json,
    capacity_from_mobius,
    chain_masks,
    choquet_matrix,
    choquet_matrix_operator,
    choquet_scalar,
    inclusion_exclusion_matrix,
    inclusion_exclusion_scalar,
    interaction,
    interaction_is_monotone,
    mobius,
    random_capacity,
    random_operator_capacity,
    sugeno_matrix,
    sugeno_scalar,
    to_mask,
)
from posmaps.errors import (
    DimMismatch,
    LengthMismatch,
    NegativeInput,
    NonMonotone,
    NonMonotoneInteraction,
    NotPsd,
    SpectrumOutOfRange,
)
from posmaps.herm import herm, loewner_margin, rand_psd, rand_psd_between, rand_unitary
from strategies import seeds

MU2 = Capacity.from_sets(2, {(1,): 0.5, (2,): 0.3, (1, 2): 1.0})


def _level_set_choquet(mu, x, steps=200_000):
    # oracle: midpoint quadrature of t -> mu({x > t}) on [0, max x]
    top = float(np.max(x))
    if top == 0:
        return 0.0
    t = (np.arange(steps) + 0.5) * top / steps
    above = (x[None, :] > t[:, None]) @ (1 << np.arange(x.size))
    return float(mu.values[above].sum() * top / steps)


def _brute_sugeno(mu, x):
    # oracle: sup_t min(t, mu({x >= t})) over the attained levels
    best = 0.0
    for t in x:
        mask = sum(1 << i for i in range(x.size) if x[i] >= t)
        best = max(best, min(t, mu.values[mask]))
    return best


def _brute_mobius(values, n):
    out = np.zeros(1 << n)
    for a in range(1 << n):
        b = a
        while True:
            out[a] += (-1) ** bin(a ^ b).count("1") * values[b]
            if b == 0:
                break
            b = (b - 1) & a
    return out


def _brute_inclexcl(mu, lam, op, K):
    # oracle: literal double loop over A and B containing A
    n = lam.size
    total = 0.0
    for a in range(1 << n):
        inner = 0.0
        for b in range(1 << n):
            if b & a != a or b == 0:
                continue
            idx = [i for i in range(n) if b >> i & 1]
            ib = min(lam[idx]) if op == "min" else K * np.prod(lam[idx] / K)
            inner += (-1) ** bin(b ^ a).count("1") * ib
        total += inner * mu.values[a]
    return total


def _with_spectrum(lam, seed):
    u = rand_unitary(len(lam), seed)
    return herm((u * np.asarray(lam)) @ u.conj().T)


class TestCapacity:
    def test_validation(self):
        with pytest.raises(ValueError):
            Capacity(2, [0.1, 0.2, 0.3, 1.0])
        with pytest.raises(NonMonotone):
            Capacity(2, [0.0, 0.6, 0.3, 0.5])
        with pytest.raises(LengthMismatch):
            Capacity(2, [0.0, 1.0])
        with pytest.raises(ValueError):
            Capacity(17, np.zeros(1 << 17))

    def test_bitmask_convention(self):
        assert to_mask((1, 3)) == 0b101
        assert MU2((2,)) == 0.3 and MU2(0b11) == 1.0
        np.testing.assert_array_equal(chain_masks(3), [1, 3, 7])

    @given(seeds, st.integers(1, 6))
    def test_random_is_monotone(self, seed, n):
        # oracle: all comparable pairs, not just single-bit steps
        v = random_capacity(n, seed, zero_prob=0.3).values
        for a in range(1 << n):
            for b in range(1 << n):
                if a & b == a:
                    assert v[a] <= v[b] + 1e-12

    def test_json_roundtrip(self):
        mu = random_capacity(3, 1)
        back = capacity_from_json(mu.to_json())
        np.testing.assert_array_equal(back.values, mu.values)

    def test_operator_json_roundtrip(self):
        mu = random_operator_capacity(2, 2, 3)
        back = capacity_from_json(mu.to_json())
        assert isinstance(back, OperatorCapacity)
        np.testing.assert_allclose(back.values, mu.values)

    def test_operator_validation(self):
        v = np.zeros((4, 2, 2))
        v[1] = np.diag([1.0, 0.0])
        v[2] = np.diag([0.0, 1.0])
        v[3] = np.diag([1.0, 0.5])
        with pytest.raises(NonMonotone):
            OperatorCapacity(2, 2, v)
        v[3] = np.diag([1.0, -1.0])
        with pytest.raises(NotPsd):
            OperatorCapacity(2, 2, v)


class TestMobius:
    def test_additive_on_singletons(self):
        m = mobius(Capacity.additive([0.2, 0.3, 0.5]))
        expect = np.zeros(8)
        expect[[1, 2, 4]] = [0.2, 0.3, 0.5]
        np.testing.assert_allclose(m, expect, atol=1e-15)

    def test_unanimity(self):
        m = mobius(Capacity.unanimity(4, (1, 3)))
        expect = np.zeros(16)
        expect[0b0101] = 1.0
        np.testing.assert_allclose(m, expect, atol=1e-15)

    @given(seeds, st.integers(1, 8))
    def test_matches_definition_and_roundtrips(self, seed, n):
        mu = random_capacity(n, seed)
        m = mobius(mu)
        np.testing.assert_allclose(m, _brute_mobius(mu.values, n), atol=1e-12)
        np.testing.assert_allclose(capacity_from_mobius(m).values, mu.values, atol=1e-12)

    def test_reconstruction_checks_monotone(self):
        with pytest.raises(NonMonotone):
            capacity_from_mobius([0.0, 1.0, 1.0, -3.0])


class TestChoquet:
    def test_hand_example(self):
        assert choquet_scalar(MU2, [1.0, 2.0]) == pytest.approx(1.3, abs=1e-15)
        assert _level_set_choquet(MU2, np.array([1.0, 2.0])) == pytest.approx(1.3, abs=1e-6)

    @given(seeds, st.integers(1, 5))
    def test_against_quadrature(self, seed, n):
        rng = np.random.default_rng(seed)
        mu = random_capacity(n, rng)
        x = rng.random(n) * 3
        assert choquet_scalar(mu, x) == pytest.approx(_level_set_choquet(mu, x), abs=1e-4)

    @given(seeds)
    def test_additive_weighted_sum(self, seed):
        rng = np.random.default_rng(seed)
        w, x = rng.random(4), rng.random(4)
        assert choquet_scalar(Capacity.additive(w), x) == pytest.approx(w @ x)

    def test_constant(self):
        mu = random_capacity(4, 2, normalized=False)
        assert choquet_scalar(mu, [0.7] * 4) == pytest.approx(0.7 * mu.values[-1])

    def test_tie_invariant(self):
        # oracle: every ordering of tied entries gives the same telescoping sum
        mu = random_capacity(3, 5)
        x = np.array([1.0, 2.0, 1.0])
        vals = []
        for perm in itertools.permutations(range(3)):
            if list(x[list(perm)]) != sorted(x, reverse=True):
                continue
            masks = np.bitwise_or.accumulate(1 << np.array(perm))
            xs = x[list(perm)]
            vals.append(float(np.sum((xs - np.append(xs[1:], 0)) * mu.values[masks])))
        assert len(vals) == 2
        assert vals[0] == pytest.approx(vals[1]) == pytest.approx(choquet_scalar(mu, x))

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            choquet_scalar(MU2, [1.0])
        with pytest.raises(NegativeInput):
            choquet_scalar(MU2, [1.0, -1.0])
        with pytest.raises(DimMismatch):
            choquet_matrix(MU2, np.eye(3))
        with pytest.raises(NotPsd):
            choquet_matrix(MU2, np.diag([1.0, -1.0]))

    def test_matrix_example(self):
        assert choquet_matrix(MU2, np.diag([2.0, 1.0])) == pytest.approx(1.5)
        # the chain {1} is used whatever the matrix' eigenbasis
        assert choquet_matrix(MU2, np.diag([1.0, 2.0])) == pytest.approx(1.5)

    def test_matrix_scalar_multiple_of_identity(self):
        mu = random_capacity(3, 9)
        assert choquet_matrix(mu, 2.5 * np.eye(3)) == pytest.approx(2.5 * mu.values[-1])

    @given(seeds, st.integers(1, 6))
    def test_matrix_equals_scalar_on_chain_capacity(self, seed, n):
        # oracle: the scalar path on sorted eigenvalues with numpy's eigvalsh
        rng = np.random.default_rng(seed)
        mu = random_capacity(n, rng)
        a = rand_psd(n, rng, 2.0)
        lam = np.clip(np.sort(np.linalg.eigvalsh(a))[::-1], 0, None)
        assert choquet_matrix(mu, a) == pytest.approx(choquet_scalar(mu, lam), abs=1e-10)

    @given(seeds, st.sampled_from([0.5, 2.0, 10.0]))
    def test_positive_homogeneity(self, seed, alpha):
        rng = np.random.default_rng(seed)
        mu = random_capacity(4, rng)
        a = rand_psd(4, rng)
        assert abs(choquet_matrix(mu, alpha * a) - alpha * choquet_matrix(mu, a)) <= 1e-9 * alpha

    @given(seeds)
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        mu = random_capacity(4, rng)
        a = rand_psd(4, rng)
        u = rand_unitary(4, rng)
        b = herm(u @ a @ u.conj().T)
        assert abs(choquet_matrix(mu, a) - choquet_matrix(mu, b)) <= 1e-9
        assert abs(sugeno_matrix(mu, a) - sugeno_matrix(mu, b)) <= 1e-9
        assert abs(inclusion_exclusion_matrix(mu, a, "product") - inclusion_exclusion_matrix(mu, b, "product")) <= 1e-9

    def test_chain_dependence(self):
        # raising mu off the chain {1} < {1,2} < {1,2,3} changes nothing
        mu = Capacity.from_sets(3, {(1,): 0.2, (2,): 0.1, (3,): 0.1, (1, 2): 0.5, (1, 3): 0.4, (2, 3): 0.3, (1, 2, 3): 1.0})
        v = mu.values.copy()
        v[0b010] = v[0b100] = 0.3
        v[0b110] = v[0b101] = 0.5
        mu2 = Capacity(3, v)
        a = rand_psd(3, 4)
        assert choquet_matrix(mu, a) == choquet_matrix(mu2, a)
        assert sugeno_matrix(mu, a) == sugeno_matrix(mu2, a)

    @pytest.mark.parametrize("seed", range(3))
    def test_monotone_in_matrix(self, seed):
        mu = random_capacity(3, seed)
        for s in range(100):
            b = rand_psd(3, 1000 * seed + s, 2.0)
            a = rand_psd_between(b, s + 7)
            assert choquet_matrix(mu, a) <= choquet_matrix(mu, b) + 1e-9
            assert sugeno_matrix(mu, a) <= sugeno_matrix(mu, b) + 1e-9
            assert inclusion_exclusion_matrix(mu, a, "product", 2.0) <= inclusion_exclusion_matrix(mu, b, "product", 2.0) + 1e-9


class TestOperatorChoquet:
    def test_scalar_embedding(self):
        mu = random_capacity(3, 0)
        op = OperatorCapacity.from_scalar(mu, np.eye(2))
        a = rand_psd(3, 1)
        np.testing.assert_allclose(choquet_matrix_operator(op, a), choquet_matrix(mu, a) * np.eye(2), atol=1e-12)

    def test_zero(self):
        op = random_operator_capacity(3, 2, 0)
        np.testing.assert_allclose(choquet_matrix_operator(op, np.zeros((3, 3))), 0.0)

    def test_monotone(self):
        op = random_operator_capacity(3, 2, 5)
        for s in range(100):
            b = rand_psd(3, s, 2.0)
            a = rand_psd_between(b, s + 11)
            assert loewner_margin(choquet_matrix_operator(op, a), choquet_matrix_operator(op, b)) >= -1e-9

    def test_homogeneous_and_invariant(self, rng):
        op = random_operator_capacity(3, 2, 6)
        a = rand_psd(3, rng)
        u = rand_unitary(3, rng)
        base = choquet_matrix_operator(op, a)
        np.testing.assert_allclose(choquet_matrix_operator(op, 3 * a), 3 * base, atol=1e-9)
        np.testing.assert_allclose(choquet_matrix_operator(op, herm(u @ a @ u.conj().T)), base, atol=1e-9)


class TestSugeno:
    def test_hand_example(self):
        assert sugeno_scalar(MU2, [1.0, 2.0]) == 1.0
        assert _brute_sugeno(MU2, np.array([1.0, 2.0])) == 1.0

    @given(seeds, st.integers(1, 6))
    def test_against_level_sets(self, seed, n):
        rng = np.random.default_rng(seed)
        mu = random_capacity(n, rng)
        x = rng.random(n) * 2
        assert sugeno_scalar(mu, x) == pytest.approx(_brute_sugeno(mu, x))

    def test_constant(self):
        mu = random_capacity(3, 3)
        assert sugeno_scalar(mu, [0.4] * 3) == pytest.approx(min(0.4, mu.values[-1]))

    @given(seeds)
    def test_matrix_on_diagonal(self, seed):
        rng = np.random.default_rng(seed)
        mu = random_capacity(3, rng)
        x = rng.random(3)
        xs = np.sort(x)[::-1]
        assert sugeno_matrix(mu, np.diag(x)) == pytest.approx(max(min(xs[i], mu.chain_values()[i]) for i in range(3)))

    def test_not_positively_homogeneous(self):
        # max-min aggregation saturates at mu's range, so doubling a changes nothing here
        a = np.diag([2.0, 1.0])
        assert sugeno_matrix(MU2, a) == 1.0
        assert sugeno_matrix(MU2, 2 * a) == 1.0
        assert sugeno_matrix(MU2, 2 * a) != 2 * sugeno_matrix(MU2, a)

    def test_homogeneous_when_values_stay_below_mu(self):
        # if every x_i is at most the smallest nonzero chain value, sugeno = max x
        x = np.array([0.2, 0.1])
        for alpha in (0.5, 1.0, 1.5):
            assert sugeno_scalar(MU2, alpha * x) == pytest.approx(alpha * sugeno_scalar(MU2, x))


class TestInclusionExclusion:
    @given(seeds, st.integers(1, 6))
    def test_min_recovers_choquet(self, seed, n):
        rng = np.random.default_rng(seed)
        mu = random_capacity(n, rng)
        a = rand_psd(n, rng, 3.0)
        assert inclusion_exclusion_matrix(mu, a, "min") == pytest.approx(choquet_matrix(mu, a), abs=1e-9)

    def test_product_hand_example(self):
        # lambda = (1, 1/2), K = 1: coefficients from the 4-subset double loop
        mu = Capacity.from_sets(2, {(1,): 0.4, (2,): 0.3, (1, 2): 1.0})
        lam = np.array([1.0, 0.5])
        # A={1}: I(1) - I(12) = 1 - 0.5; A={2}: 0.5 - 0.5; A={12}: 0.5
        hand = 0.5 * 0.4 + 0.0 * 0.3 + 0.5 * 1.0
        assert _brute_inclexcl(mu, lam, "product", 1.0) == pytest.approx(hand)
        a = _with_spectrum(lam, 3)
        assert inclusion_exclusion_matrix(mu, a, "product", 1.0) == pytest.approx(hand, abs=1e-12)

    @given(seeds, st.integers(1, 5), st.sampled_from(["min", "product"]))
    def test_against_double_loop(self, seed, n, op):
        rng = np.random.default_rng(seed)
        mu = random_capacity(n, rng)
        x = rng.random(n)
        K = 1.0
        assert inclusion_exclusion_scalar(mu, x, op, K) == pytest.approx(_brute_inclexcl(mu, x, op, K), abs=1e-12)

    def test_zero_matrix(self):
        mu = random_capacity(3, 1)
        for op in ("min", "product"):
            assert inclusion_exclusion_matrix(mu, np.zeros((3, 3)), op, 1.0) == 0.0

    def test_bound(self):
        with pytest.raises(SpectrumOutOfRange):
            inclusion_exclusion_matrix(MU2, np.diag([2.0, 1.0]), "product", 1.5)

    def test_operator_capacity(self):
        mu = random_capacity(3, 2)
        op = OperatorCapacity.from_scalar(mu, np.diag([1.0, 2.0]))
        a = rand_psd(3, 8)
        out = inclusion_exclusion_matrix(op, a, "min")
        np.testing.assert_allclose(out, choquet_matrix(mu, a) * np.diag([1.0, 2.0]), atol=1e-9)

    def test_interactions(self):
        assert interaction("min") is MIN and interaction("product") is PRODUCT
        with pytest.raises(ValueError):
            interaction("max")
        assert interaction_is_monotone(MIN, 4) and interaction_is_monotone(PRODUCT, 4)

    def test_custom_nonmonotone_warns(self):
        def bad(x, mask):
            return 1.0 - min(x[i] for i in range(x.size) if mask >> i & 1) if mask else 0.0

        with pytest.warns(NonMonotoneInteraction):
            inclusion_exclusion_scalar(MU2, [0.5, 0.2], bad, 1.0)

    def test_custom_monotone_silent(self):
        def mean_of(x, mask):
            idx = [i for i in range(x.size) if mask >> i & 1]
            return float(np.mean(x[idx])) if idx else 0.0

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            inclusion_exclusion_scalar(MU2, [0.5, 0.2], mean_of, 1.0)
