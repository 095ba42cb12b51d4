"""Capacities on finite sets and their Choquet, Sugeno and
inclusion-exclusion integrals, for vectors and for positive matrices.

Subsets of ``{1, ..., n}`` are bitmasks with bit ``i`` standing for
element ``i + 1``. Matrix integrals use the eigenvalues of ``a`` in
decreasing order against the fixed chain ``A_i = {1, ..., i}``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import (
    DimMismatch,
    LengthMismatch,
    NegativeInput,
    NonMonotone,
    NonMonotoneInteraction,
    NotPsd,
    SpectrumOutOfRange,
)
from .herm import DEFAULT_TOL, Tolerance, eig_herm, herm, matrix_from_json, matrix_to_json, psd_threshold

MAX_N = 16
MAX_N_OPERATOR = 12
MAX_N_INCLEXCL = 12


def _mono_slack(values):
    return 1e-12 * max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)


def _single_bit_pairs(n):
    masks = np.arange(1 << n)
    lo, hi = [], []
    for i in range(n):
        bit = 1 << i
        m = masks[(masks & bit) == 0]
        lo.append(m)
        hi.append(m | bit)
    return np.concatenate(lo), np.concatenate(hi)


@dataclass(frozen=True, eq=False)
class Capacity:
    """Monotone set function with ``mu(empty) = 0``, stored densely by bitmask."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"n must lie in [1, {MAX_N}], got {self.n}")
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (1 << self.n,):
            raise LengthMismatch(f"expected {1 << self.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("capacity values must be finite")
        if v[0] != 0:
            raise ValueError(f"mu(empty) must be 0, got {v[0]}")
        slack = _mono_slack(v)
        if np.any(v < -slack):
            raise NonMonotone("capacity values must be non-negative")
        lo, hi = _single_bit_pairs(self.n)
        bad = np.nonzero(v[hi] < v[lo] - slack)[0]
        if bad.size:
            j = bad[0]
            raise NonMonotone(f"mu({_fmt(lo[j])}) = {v[lo[j]]} > mu({_fmt(hi[j])}) = {v[hi[j]]}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, subset) -> float:
        return float(self.values[to_mask(subset)])

    def chain_values(self) -> np.ndarray:
        return self.values[chain_masks(self.n)]

    @classmethod
    def additive(cls, weights):
        w = np.asarray(weights, dtype=np.float64)
        n = w.size
        masks = np.arange(1 << n)
        bits = (masks[:, None] >> np.arange(n)) & 1
        return cls(n, bits @ w)

    @classmethod
    def unanimity(cls, n, subset):
        t = to_mask(subset)
        masks = np.arange(1 << n)
        return cls(n, ((masks & t) == t).astype(float))

    @classmethod
    def from_sets(cls, n, table: dict):
        """Build from ``{frozenset_or_tuple_of_elements: value}``; missing sets are 0."""
        v = np.zeros(1 << n)
        for key, val in table.items():
            v[to_mask(key)] = val
        return cls(n, v)

    def to_json(self) -> dict:
        return {"n": int(self.n), "values": [float(x) for x in self.values]}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["n"]), np.asarray(obj["values"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class OperatorCapacity:
    """Capacity with positive-matrix values, monotone in the Loewner order."""

    n: int
    out_dim: int
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N_OPERATOR:
            raise ValueError(f"n must lie in [1, {MAX_N_OPERATOR}], got {self.n}")
        d = self.out_dim
        v = np.array(self.values)
        v = v.astype(np.complex128) if np.iscomplexobj(v) else v.astype(np.float64)
        if v.shape != (1 << self.n, d, d):
            raise LengthMismatch(f"expected values of shape {(1 << self.n, d, d)}, got {v.shape}")
        v = (v + np.conj(np.swapaxes(v, 1, 2))) / 2
        if np.any(v[0] != 0):
            raise ValueError("mu(empty) must be the zero matrix")
        # batched validation through LAPACK; integrals themselves use eig_herm
        scale = max(1.0, float(np.max(np.abs(v))))
        slack = 1e-10 * scale
        if np.any(np.linalg.eigvalsh(v)[:, 0] < -slack):
            raise NotPsd("operator capacity values must be positive semidefinite")
        lo, hi = _single_bit_pairs(self.n)
        gaps = np.linalg.eigvalsh(v[hi] - v[lo])[:, 0]
        bad = np.nonzero(gaps < -slack)[0]
        if bad.size:
            j = bad[0]
            raise NonMonotone(f"mu({_fmt(lo[j])}) is not <= mu({_fmt(hi[j])}) (margin {gaps[j]:.3e})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_scalar(cls, mu: Capacity, weight):
        """``A -> mu(A) * weight`` for a fixed positive ``weight``."""
        w = herm(weight)
        return cls(mu.n, w.shape[0], mu.values[:, None, None] * w[None])

    def to_json(self) -> dict:
        return {
            "n": int(self.n),
            "out_dim": int(self.out_dim),
            "values": [matrix_to_json(m) for m in self.values],
        }

    @classmethod
    def from_json(cls, obj):
        mats = [matrix_from_json(m) for m in obj["values"]]
        return cls(int(obj["n"]), int(obj["out_dim"]), np.array(mats))


def capacity_from_json(obj):
    """Dispatch on the presence of ``out_dim``."""
    if "out_dim" in obj:
        return OperatorCapacity.from_json(obj)
    return Capacity.from_json(obj)


def to_mask(subset) -> int:
    """Bitmask of a collection of 1-based elements (ints pass through)."""
    if isinstance(subset, (int, np.integer)):
        return int(subset)
    m = 0
    for e in subset:
        if e < 1:
            raise ValueError("elements are 1-based")
        m |= 1 << (int(e) - 1)
    return m


def _fmt(mask):
    mask = int(mask)
    return "{" + ",".join(str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1) + "}"


def chain_masks(n) -> np.ndarray:
    """Masks of ``A_i = {1, ..., i}`` for ``i = 1..n``."""
    return (1 << np.arange(1, n + 1)) - 1


def random_capacity(n, seed=None, normalized=True, zero_prob=0.0) -> Capacity:
    """Random monotone capacity, built by increasing popcount.

    Each set gets the max over its one-smaller subsets plus an exponential
    increment (set to zero with probability ``zero_prob`` to create flats).
    """
    rng = np.random.default_rng(seed)
    size = 1 << n
    v = np.zeros(size)
    order = sorted(range(1, size), key=lambda m: (bin(m).count("1"), m))
    for m in order:
        base = max(v[m ^ (1 << i)] for i in range(n) if m >> i & 1)
        inc = rng.exponential() if rng.random() >= zero_prob else 0.0
        v[m] = base + inc
    if normalized and v[-1] > 0:
        v = v / v[-1]
    return Capacity(n, v)


def random_operator_capacity(n, out_dim, seed=None) -> OperatorCapacity:
    """Sum of scalar capacities times fixed random positive weights."""
    rng = np.random.default_rng(seed)
    from .herm import rand_psd

    total = np.zeros((1 << n, out_dim, out_dim), dtype=np.complex128)
    for _ in range(out_dim + 1):
        mu = random_capacity(n, rng)
        w = rand_psd(out_dim, rng)
        total += mu.values[:, None, None] * w[None]
    return OperatorCapacity(n, out_dim, total)


# ----------------------------------------------------------------------------
# Mobius transform


def mobius(mu: Capacity) -> np.ndarray:
    """``m(A) = sum_{B subset A} (-1)^{|A \\ B|} mu(B)``."""
    return kernels.lattice_transform(mu.values, mu.n, kernels.SUBSET_MOBIUS)


def capacity_from_mobius(m) -> Capacity:
    m = np.asarray(m, dtype=np.float64)
    n = int(m.size).bit_length() - 1
    if m.size != 1 << n:
        raise LengthMismatch(f"Mobius array length {m.size} is not a power of two")
    v = kernels.lattice_transform(m, n, kernels.SUBSET_ZETA)
    v[0] = 0.0 if abs(v[0]) <= _mono_slack(v) else v[0]
    return Capacity(n, v)


# ----------------------------------------------------------------------------
# scalar integrals


def _vector(x, n):
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != n:
        raise LengthMismatch(f"expected a vector of length {n}, got {x.size}")
    if np.any(x < 0):
        raise NegativeInput("integrand must be non-negative")
    return x


def _sorted_chain(x):
    order = np.argsort(-x, kind="stable")
    masks = np.bitwise_or.accumulate(1 << order)
    return x[order], masks


def _chain_choquet(xs, mu_chain):
    diffs = xs - np.append(xs[1:], 0.0)
    return np.tensordot(diffs, mu_chain, axes=1)


def choquet_scalar(mu: Capacity, x) -> float:
    """Discrete Choquet integral through the decreasing rearrangement of ``x``."""
    x = _vector(x, mu.n)
    xs, masks = _sorted_chain(x)
    return float(_chain_choquet(xs, mu.values[masks]))


def sugeno_scalar(mu: Capacity, x) -> float:
    """``max_i min(x_sigma(i), mu(A_i))``."""
    x = _vector(x, mu.n)
    xs, masks = _sorted_chain(x)
    return float(np.max(np.minimum(xs, mu.values[masks])))


# ----------------------------------------------------------------------------
# matrix integrals


def _spectrum(a, n, tol):
    a = herm(a)
    if a.shape[0] != n:
        raise DimMismatch(f"matrix of dim {a.shape[0]} against a capacity on {n} points")
    lam = eig_herm(a, tol).eigenvalues
    if lam[-1] < -psd_threshold(None, tol, lam):
        raise NotPsd(f"integrals need a positive matrix, lambda_min = {lam[-1]:.3e}")
    return np.clip(lam, 0.0, None)


def choquet_matrix(mu: Capacity, a, tol: Tolerance | None = None) -> float:
    """``sum_i (lambda_i - lambda_{i+1}) mu(A_i)`` with ``lambda_{n+1} = 0``."""
    lam = _spectrum(a, mu.n, tol or DEFAULT_TOL)
    return float(_chain_choquet(lam, mu.chain_values()))


def choquet_matrix_operator(mu: OperatorCapacity, a, tol: Tolerance | None = None) -> np.ndarray:
    lam = _spectrum(a, mu.n, tol or DEFAULT_TOL)
    return herm(_chain_choquet(lam, mu.values[chain_masks(mu.n)]))


def sugeno_matrix(mu: Capacity, a, tol: Tolerance | None = None) -> float:
    lam = _spectrum(a, mu.n, tol or DEFAULT_TOL)
    return float(np.max(np.minimum(lam, mu.chain_values())))


# ----------------------------------------------------------------------------
# inclusion-exclusion integral


@dataclass(frozen=True)
class InteractionOperator:
    """Subset-indexed aggregation ``I(x | B)``.

    ``min`` is ``min_{i in B} x_i``. ``product`` is ``K * prod_{i in B}
    (x_i / K)``, the bound ``K`` keeping every factor in ``[0, 1]``. A
    ``custom`` operator wraps ``evaluator(x, mask) -> float``.
    """

    id: str
    evaluator: Callable | None = None

    def table(self, x, K) -> np.ndarray:
        """``I(x | B)`` for every mask ``B``; the empty set maps to 0."""
        x = np.asarray(x, dtype=np.float64)
        n = x.size
        masks = np.arange(1 << n)
        has = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
        if self.id == "min":
            out = np.where(has, x[None, :], np.inf).min(axis=1)
        elif self.id == "product":
            y = x / K if K > 0 else np.zeros_like(x)
            out = K * np.where(has, y[None, :], 1.0).prod(axis=1)
        elif self.id == "custom":
            out = np.array([float(self.evaluator(x, int(m))) for m in masks])
        else:
            raise ValueError(f"unknown interaction {self.id!r}")
        out[0] = 0.0
        return out


MIN = InteractionOperator("min")
PRODUCT = InteractionOperator("product")


def interaction(spec) -> InteractionOperator:
    if isinstance(spec, InteractionOperator):
        return spec
    if callable(spec):
        return InteractionOperator("custom", spec)
    if spec == "min":
        return MIN
    if spec == "product":
        return PRODUCT
    raise ValueError(f"unknown interaction {spec!r}; use 'min', 'product' or a callable")


def interaction_is_monotone(op: InteractionOperator, n, K=1.0, trials=64, seed=0) -> bool:
    """Sampled check that ``x <= y`` pointwise implies ``I(x|B) <= I(y|B)``."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        y = rng.random(n) * K
        x = y * rng.random(n)
        tx, ty = op.table(x, K), op.table(y, K)
        if np.any(tx > ty + 1e-12 * max(1.0, float(np.max(np.abs(ty))))):
            return False
    return True


def _inclexcl_coefficients(x, op, K):
    table = op.table(x, K)
    return kernels.lattice_transform(table, x.size, kernels.SUPERSET_MOBIUS)


def _warn_if_nonmonotone(op, n, K):
    if op.id == "custom" and not interaction_is_monotone(op, n, K):
        warnings.warn(
            "custom interaction operator failed the sampled monotonicity check; "
            "the resulting map need not be monotone",
            NonMonotoneInteraction,
            stacklevel=3,
        )


def inclusion_exclusion_scalar(mu: Capacity, x, op="min", K=None) -> float:
    x = _vector(x, mu.n)
    op = interaction(op)
    K = float(np.max(x)) if K is None else float(K)
    if np.max(x) > K * (1 + 1e-12):
        raise SpectrumOutOfRange(f"values exceed the bound K = {K}")
    _warn_if_nonmonotone(op, mu.n, K)
    return float(_inclexcl_coefficients(x, op, K) @ mu.values)


def inclusion_exclusion_matrix(mu, a, op="min", K=None, tol: Tolerance | None = None):
    """``sum_A (sum_{B >= A} (-1)^{|B \\ A|} I(lambda(a) | B)) mu(A)``.

    Works for :class:`Capacity` (returns a float) and
    :class:`OperatorCapacity` (returns a matrix). The inner alternating
    sums are one superset Mobius transform of the table ``B -> I(lambda|B)``.
    ``K`` defaults to ``lambda_max(a)``.
    """
    tol = tol or DEFAULT_TOL
    if mu.n > MAX_N_INCLEXCL:
        raise ValueError(f"inclusion-exclusion supports n <= {MAX_N_INCLEXCL}")
    lam = _spectrum(a, mu.n, tol)
    op = interaction(op)
    K = float(lam[0]) if K is None else float(K)
    if lam[0] > K + tol.threshold(max(1.0, K)):
        raise SpectrumOutOfRange(f"lambda_max = {lam[0]:.6g} exceeds K = {K:.6g}")
    _warn_if_nonmonotone(op, mu.n, K)
    coef = _inclexcl_coefficients(np.minimum(lam, K) if K > 0 else lam, op, K)
    if isinstance(mu, OperatorCapacity):
        return herm(np.tensordot(coef, mu.values, axes=1))
    return float(coef @ mu.values)
