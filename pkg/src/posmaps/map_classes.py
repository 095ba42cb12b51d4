"""Registry of concrete non-linear maps and sampled checkers for their classes.

A checker first replays a structured battery (scalar multiples of the
identity, coordinate projections, commuting diagonals, rank-deficient
inputs and the known 2x2 witnesses, zero-padded to the working dimension)
and then draws seeded random trials. Only ``fail`` is a certificate;
``pass`` means no violation at the reported budget.

Every trial yields a Loewner margin ``lambda_min(rhs - lhs)``. A trial
violates the property when the margin is below ``-(rtol * scale + atol)``,
``scale`` being the larger norm of the two compared matrices (at least 1). The verdict
is ``fail`` if some violation exceeds ten times its threshold and
``inconclusive`` if violations stay inside that band.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .calculus import ScalarFunctionSpec, apply_function, builtin, staircase_lower, with_jump
from .errors import EvaluatorError
from .herm import (
    DEFAULT_TOL,
    Tolerance,
    adjoint,
    as_matrix,
    eig_herm,
    herm,
    matrix_from_json,
    matrix_to_json,
    rand_contraction,
    rand_psd,
    rand_psd_between,
    rand_unitary,
    spectral_norm,
)

PROPERTIES = (
    "monotone",
    "supercongruent",
    "concave",
    "normal",
    "positive_type",
    "boundedly_positive_type",
    "positive_definite",
)
CONTRACTION_CLASSES = ("positive", "general", "invertible")
FAIL_FACTOR = 10.0


@dataclass(frozen=True)
class MapSpec:
    """A named map ``A+ -> B+`` (``cone_map``) or ``A -> B`` (``algebra_map``)."""

    name: str
    kind: str
    in_dim: int
    out_dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    expected_profile: dict = field(default_factory=dict, compare=False)
    description: str = ""

    def __post_init__(self):
        if self.kind not in ("cone_map", "algebra_map"):
            raise ValueError(f"kind must be cone_map or algebra_map, got {self.kind!r}")

    def __call__(self, a):
        try:
            out = self.evaluator(a)
        except Exception as exc:
            raise EvaluatorError(self.name, {"a": matrix_to_json(a)}, exc) from exc
        out = np.asarray(out)
        if out.ndim == 0:
            out = out.reshape(1, 1)
        return herm(out) if self.kind == "cone_map" else out


@dataclass
class PropertyReport:
    property: str
    verdict: str
    trials: int
    worst_margin: float
    counterexample: dict | None
    seed: int

    def to_json(self) -> dict:
        out = asdict(self)
        out["worst_margin"] = _json_float(self.worst_margin)
        return out

    @classmethod
    def from_json(cls, obj):
        wm = obj["worst_margin"]
        return cls(
            property=obj["property"],
            verdict=obj["verdict"],
            trials=int(obj["trials"]),
            worst_margin=float(wm) if wm is not None else math.inf,
            counterexample=obj.get("counterexample"),
            seed=int(obj["seed"]),
        )


def _json_float(x):
    if x is None or not math.isfinite(x):
        return None
    return float(x)


# ----------------------------------------------------------------------------
# margins


def _lmin(h) -> float:
    return float(eig_herm(h).eigenvalues[-1])


def _norm(h) -> float:
    h = np.asarray(h)
    if h.size == 1:
        return float(abs(h.ravel()[0]))
    return spectral_norm(h)


def _order_margin(lhs, rhs):
    """``(lambda_min(rhs - lhs), max(1, ||lhs||, ||rhs||))``.

    The scale is floored at 1 to match the zero threshold of the calculus.
    """
    return _lmin(herm(rhs - lhs)), max(1.0, _norm(lhs), _norm(rhs))


def _positivity(m: MapSpec, outs):
    worst, scale = math.inf, 0.0
    for o in outs:
        worst = min(worst, _lmin(o))
        scale = max(scale, _norm(o))
    return worst, scale


def _combine(prop_margin, prop_scale, pos):
    pos_margin, pos_scale = pos
    if pos_margin < prop_margin and pos_margin < 0:
        return pos_margin, pos_scale, "positivity"
    return prop_margin, prop_scale, None


def _monotone_margin(m, inputs, tol):
    fx, fy = m(inputs["x"]), m(inputs["y"])
    mg, sc = _order_margin(fx, fy)
    return _combine(mg, sc, _positivity(m, (fx, fy)))


def _supercongruent_margin(m, inputs, tol):
    a, c = inputs["a"], inputs["c"]
    fa = m(a)
    lhs = herm(adjoint(c) @ fa @ c)
    fcac = m(herm(adjoint(c) @ a @ c))
    mg, sc = _order_margin(lhs, fcac)
    return _combine(mg, sc, _positivity(m, (fa, fcac)))


def _concave_margin(m, inputs, tol):
    x, y, t = inputs["x"], inputs["y"], float(inputs["t"])
    fx, fy = m(x), m(y)
    mix = m(herm(t * x + (1 - t) * y))
    rhs = herm(t * fx + (1 - t) * fy)
    mg, sc = _order_margin(rhs, mix)
    return _combine(mg, sc, _positivity(m, (fx, fy, mix)))


_MARGINS = {
    "monotone": _monotone_margin,
    "supercongruent": _supercongruent_margin,
    "concave": _concave_margin,
}


# ----------------------------------------------------------------------------
# campaign machinery


def _encode_inputs(inputs):
    out = {}
    for k, v in inputs.items():
        if isinstance(v, np.ndarray):
            out[k] = matrix_to_json(v)
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], np.ndarray):
            out[k] = [matrix_to_json(x) for x in v]
        else:
            out[k] = v
    return out


def _decode_inputs(enc):
    out = {}
    for k, v in enc.items():
        if isinstance(v, dict) and "re" in v:
            out[k] = matrix_from_json(v, hermitian=False)
        elif isinstance(v, list) and v and isinstance(v[0], dict) and "re" in v[0]:
            out[k] = [matrix_from_json(x, hermitian=False) for x in v]
        else:
            out[k] = v
    return out


class _Tally:
    def __init__(self, prop, tol):
        self.prop = prop
        self.tol = tol
        self.count = 0
        self.worst = math.inf
        self.severity = 0.0
        self.rank = (False, 0.0)
        self.cx = None

    def add(self, label, inputs, margin, scale, violated=None, params=None):
        self.count += 1
        self.worst = min(self.worst, margin)
        thr = self.tol.threshold(scale)
        sev = -margin / thr if thr > 0 else (math.inf if margin < 0 else 0.0)
        # a certified battery witness is kept over any random trial
        rank = (label.startswith("battery:") and sev > FAIL_FACTOR, sev)
        self.severity = max(self.severity, sev)
        if sev > 1.0 and rank > self.rank:
            self.rank = rank
            self.cx = {
                "kind": self.prop,
                "source": label,
                "inputs": _encode_inputs(inputs),
                "margin": float(margin),
                "threshold": float(thr),
            }
            if violated:
                self.cx["violated"] = violated
            if params:
                self.cx["params"] = params

    def report(self, seed) -> PropertyReport:
        if self.severity > FAIL_FACTOR:
            verdict = "fail"
        elif self.severity > 1.0:
            verdict = "inconclusive"
        else:
            verdict = "pass"
        return PropertyReport(self.prop, verdict, self.count, self.worst, self.cx, int(seed))


def trial_rngs(seed, trials):
    """Independent per-trial generators derived from the campaign seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


GRAY_BAND = (1e-13, 1e-6)
MAX_REDRAWS = 50


def rank_ambiguous(h) -> bool:
    """True if ``h`` has an eigenvalue near the numerical-rank cutoff.

    Rank-sensitive maps are discontinuous at the cutoff, so a random input
    there says nothing about the map.
    """
    lam = np.abs(eig_herm(h).eigenvalues)
    s = max(1.0, float(lam.max()))
    return bool(np.any((lam > GRAY_BAND[0] * s) & (lam < GRAY_BAND[1] * s)))


def _map_arguments(inputs):
    if "c" in inputs:
        a, c = inputs["a"], inputs["c"]
        return [a, herm(adjoint(c) @ a @ c)]
    if "t" in inputs:
        x, y, t = inputs["x"], inputs["y"], float(inputs["t"])
        return [x, y, herm(t * x + (1 - t) * y)]
    return [v for v in inputs.values() if isinstance(v, np.ndarray)]


def _draw(sampler, rng):
    for _ in range(MAX_REDRAWS):
        inputs = sampler(rng)
        if not any(rank_ambiguous(h) for h in _map_arguments(inputs)):
            return inputs
    return inputs


def _run(prop, m, battery, sampler, trials, seed, tol, margin_fn=None, label=None):
    margin_fn = margin_fn or _MARGINS[prop]
    tally = _Tally(label or prop, tol)
    for name, inputs in battery:
        mg, sc, why = margin_fn(m, inputs, tol)
        tally.add(f"battery:{name}", inputs, mg, sc, why)
    for i, rng in enumerate(trial_rngs(seed, trials)):
        inputs = _draw(sampler, rng)
        mg, sc, why = margin_fn(m, inputs, tol)
        tally.add(f"random:{i}", inputs, mg, sc, why)
    return tally.report(seed)


def _require(m, kind):
    if m.kind != kind:
        raise ValueError(f"{m.name} is a {m.kind}; this check needs a {kind}")


# ----------------------------------------------------------------------------
# structured batteries


def pad(block, dim):
    """Embed a small matrix in the top-left corner of a ``dim x dim`` zero matrix."""
    block = np.asarray(block)
    out = np.zeros((dim, dim), dtype=block.dtype)
    k = min(dim, block.shape[0])
    out[:k, :k] = block[:k, :k]
    return out


def coord_projection(dim, rank):
    return np.diag([1.0] * rank + [0.0] * (dim - rank))


EX42_A = np.array([[1.0, 1.0], [1.0, 1.0]])
EX42_B = np.diag([3.0, 1.5])
EX42_A2 = np.diag([2.0, 0.0])
EX42_C = np.array([[0.5, 0.5], [0.5, 0.5]])


def monotone_battery(dim):
    eye = np.eye(dim)
    out = []
    levels = (0.0, 0.25, 0.5, 1.0, 2.0, 3.0)
    for i, s in enumerate(levels):
        for t in levels[i + 1:]:
            out.append((f"scalar({s:g},{t:g})", {"x": s * eye, "y": t * eye}))
    for k in range(1, dim):
        p = coord_projection(dim, k)
        out.append((f"half_vs_double_projection(rank={k})", {"x": 0.5 * p, "y": 2.0 * p}))
        out.append((f"projection_vs_identity(rank={k})", {"x": p, "y": eye}))
        out.append((f"half_projection_vs_identity(rank={k})", {"x": 0.5 * p, "y": eye}))
        for l in range(k + 1, dim + 1):
            out.append((f"nested_projections({k},{l})", {"x": p, "y": coord_projection(dim, l)}))
    out.append(("zero_vs_rank1", {"x": np.zeros((dim, dim)), "y": coord_projection(dim, 1)}))
    d2 = np.linspace(2.0, 1.0, dim)
    out.append(("commuting_diagonals", {"x": np.diag(d2 * np.linspace(0.2, 1.0, dim)), "y": np.diag(d2)}))
    out.append(("commuting_rank_deficient", {"x": np.diag(np.r_[d2[:-1] * 0.5, 0.0]), "y": np.diag(d2)}))
    if dim >= 2:
        out.append(("ex42_order_pair", {"x": pad(EX42_A, dim), "y": pad(EX42_B, dim)}))
    return out


def supercongruent_battery(dim, cls="positive"):
    eye = np.eye(dim)
    out = [
        ("identity_half", {"a": eye, "c": 0.5 * eye}),
        ("identity_quarter", {"a": eye, "c": 0.25 * eye}),
        ("double_identity_half", {"a": 2.0 * eye, "c": 0.5 * eye}),
        ("triple_identity_half", {"a": 3.0 * eye, "c": 0.5 * eye}),
    ]
    if cls == "invertible":
        for k in range(1, dim):
            p = coord_projection(dim, k)
            c = 0.5 * eye + 0.5 * p
            out.append((f"invertible_step(rank={k})", {"a": eye, "c": c}))
            out.append((f"invertible_step_on_projection(rank={k})", {"a": 2.0 * p, "c": c}))
        return out
    for k in range(1, dim):
        p = coord_projection(dim, k)
        out.append((f"identity_by_projection(rank={k})", {"a": eye, "c": p}))
        out.append((f"projection_by_complement(rank={k})", {"a": p, "c": eye - p}))
        out.append((f"double_projection_half(rank={k})", {"a": 2.0 * p, "c": 0.5 * eye}))
    if dim >= 2:
        out.append(("ex42_compression", {"a": pad(EX42_A2, dim), "c": pad(EX42_C, dim)}))
    if cls == "general":
        for k in range(dim - 1):
            shift = np.zeros((dim, dim))
            shift[k, k + 1] = 1.0
            out.append((f"partial_isometry({k})", {"a": eye, "c": shift}))
            out.append((f"partial_isometry_on_projection({k})", {"a": coord_projection(dim, k + 1), "c": shift}))
    return out


def concave_battery(dim):
    eye = np.eye(dim)
    z = np.zeros((dim, dim))
    out = [
        ("zero_and_double_identity", {"x": z, "y": 2.0 * eye, "t": 0.5}),
        ("zero_and_identity", {"x": z, "y": eye, "t": 0.5}),
        ("identity_and_double", {"x": eye, "y": 2.0 * eye, "t": 0.5}),
        ("quarter_mix", {"x": z, "y": 2.0 * eye, "t": 0.25}),
        ("endpoint_t0", {"x": eye, "y": 2.0 * eye, "t": 0.0}),
        ("endpoint_t1", {"x": eye, "y": 2.0 * eye, "t": 1.0}),
    ]
    for k in range(1, dim):
        p = coord_projection(dim, k)
        out.append((f"complementary_projections(rank={k})", {"x": p, "y": eye - p, "t": 0.5}))
        out.append((f"zero_and_projection(rank={k})", {"x": z, "y": p, "t": 0.5}))
    return out


def normal_battery(dim):
    out = [("descending_diagonal", np.diag(np.linspace(1.0, 0.0, dim)))]
    out.append(("identity", np.eye(dim)))
    out.append(("double_identity", 2.0 * np.eye(dim)))
    for k in range(1, dim):
        out.append((f"projection(rank={k})", coord_projection(dim, k)))
    return out


# ----------------------------------------------------------------------------
# samplers


def _real(rng):
    return bool(rng.random() < 0.3)


def sample_psd(dim, rng, rank_deficient_prob=0.25):
    """Random positive matrix with log-uniform scale in [0.1, 10]."""
    scale = 10.0 ** rng.uniform(-1.0, 1.0)
    real = _real(rng)
    if rng.random() < rank_deficient_prob and dim > 1:
        u = rand_unitary(dim, rng, real)
        lam = rng.random(dim) * scale
        lam[rng.permutation(dim)[: rng.integers(1, dim)]] = 0.0
        return herm((u * lam) @ adjoint(u))
    return rand_psd(dim, rng, scale, real=real)


def _monotone_sampler(dim):
    def draw(rng):
        y = sample_psd(dim, rng)
        return {"x": rand_psd_between(y, rng), "y": y}

    return draw


def _supercongruent_sampler(dim, cls):
    def draw(rng):
        real = _real(rng)
        return {"a": sample_psd(dim, rng), "c": rand_contraction(dim, rng, cls, real=real)}

    return draw


def _concave_sampler(dim):
    grid = (0.0, 0.25, 0.5, 0.75, 1.0)

    def draw(rng):
        t = grid[rng.integers(len(grid))] if rng.random() < 0.3 else float(rng.random())
        return {"x": sample_psd(dim, rng), "y": sample_psd(dim, rng), "t": t}

    return draw


# ----------------------------------------------------------------------------
# cone-map checkers


def check_monotone(m: MapSpec, trials=200, seed=0, tol: Tolerance | None = None, battery=True) -> PropertyReport:
    """``x <= y => phi(x) <= phi(y)`` on the battery plus ``trials`` pairs
    ``x = y^(1/2) s y^(1/2)`` with ``s`` a random positive contraction."""
    _require(m, "cone_map")
    bat = monotone_battery(m.in_dim) if battery else []
    return _run("monotone", m, bat, _monotone_sampler(m.in_dim), trials, seed, tol or DEFAULT_TOL)


def check_supercongruent(
    m: MapSpec, trials=200, seed=0, contraction_class="positive", tol: Tolerance | None = None, battery=True
) -> PropertyReport:
    """``c* phi(a) c <= phi(c* a c)`` for contractions ``c`` of the given class.

    ``positive`` draws positive contractions, ``general`` arbitrary ones and
    ``invertible`` positive contractions with spectrum in ``[0.05, 1]``.
    """
    _require(m, "cone_map")
    if contraction_class not in CONTRACTION_CLASSES:
        raise ValueError(f"contraction_class must be one of {CONTRACTION_CLASSES}")
    bat = supercongruent_battery(m.in_dim, contraction_class) if battery else []
    return _run(
        "supercongruent",
        m,
        bat,
        _supercongruent_sampler(m.in_dim, contraction_class),
        trials,
        seed,
        tol or DEFAULT_TOL,
    )


def check_concave(m: MapSpec, trials=200, seed=0, tol: Tolerance | None = None, battery=True) -> PropertyReport:
    """``phi(t x + (1 - t) y) >= t phi(x) + (1 - t) phi(y)``."""
    _require(m, "cone_map")
    bat = concave_battery(m.in_dim) if battery else []
    return _run("concave", m, bat, _concave_sampler(m.in_dim), trials, seed, tol or DEFAULT_TOL)


def check_witness(prop: str, m: MapSpec, inputs: dict, tol: Tolerance | None = None, label="witness",
                  seed=0) -> PropertyReport:
    """Evaluate one property on one explicit input, e.g. a published counterexample.

    ``inputs`` uses the keys of the matching checker: ``x, y`` for
    ``monotone``, ``a, c`` for ``supercongruent`` and ``x, y, t`` for
    ``concave``.
    """
    _require(m, "cone_map")
    tol = tol or DEFAULT_TOL
    inputs = {k: (as_matrix(v) if k != "t" else float(v)) for k, v in inputs.items()}
    tally = _Tally(prop, tol)
    mg, sc, why = _MARGINS[prop](m, inputs, tol)
    tally.add(label, inputs, mg, sc, why)
    return tally.report(seed)


def _normal_chain(m, a, depth, tol):
    fa = m(a)
    chain = [m(staircase_lower(a, n, "general", tol)) for n in range(1, depth + 1)]
    steps = [_order_margin(chain[i], chain[i + 1]) for i in range(depth - 1)]
    steps.append(_order_margin(chain[-1], fa))
    err = _norm(chain[-1] - fa)
    return fa, steps, err


def _normal_margin(m, inputs, tol):
    fa, steps, _ = _normal_chain(m, inputs["a"], int(inputs["depth"]), tol)
    mg, sc = min(steps, key=lambda s: s[0] / tol.threshold(s[1]))
    return mg, sc, None


def check_normal_staircase(m: MapSpec, a, depth=20, tol: Tolerance | None = None, seed=0) -> PropertyReport:
    """Normality along ``a_n = staircase_lower(a, n)``, ``n = 1..depth``.

    ``pass`` needs ``phi(a_n)`` Loewner-increasing up to ``phi(a)`` and
    ``||phi(a_depth) - phi(a)||_2 <= 2**(-depth/2) ||phi(a)||_2 + tol``;
    an increasing chain that has not converged yet is ``inconclusive``.
    """
    _require(m, "cone_map")
    tol = tol or DEFAULT_TOL
    a = herm(a)
    fa, steps, err = _normal_chain(m, a, depth, tol)
    tally = _Tally("normal", tol)
    inputs = {"a": a, "depth": depth}
    for i, (mg, sc) in enumerate(steps):
        tally.add(f"step:{i + 1}", inputs, mg, sc, params={"step": i + 1})
    rep = tally.report(seed)
    rep.trials = 1
    fnorm = _norm(fa)
    conv_tol = 2.0 ** (-depth / 2) * fnorm + tol.threshold(fnorm)
    if rep.verdict == "pass" and err > conv_tol:
        rep.verdict = "inconclusive"
        rep.counterexample = {
            "kind": "normal",
            "source": "convergence",
            "inputs": _encode_inputs(inputs),
            "margin": float(rep.worst_margin),
            "error": float(err),
            "convergence_tol": float(conv_tol),
        }
    return rep


def _normal_sampler(dim):
    def draw(rng):
        return sample_psd(dim, rng)

    return draw


def check_normal(m: MapSpec, trials=50, seed=0, depth=20, tol: Tolerance | None = None, battery=True):
    """Aggregate :func:`check_normal_staircase` over the battery and random inputs."""
    _require(m, "cone_map")
    tol = tol or DEFAULT_TOL
    cases = [(f"battery:{n}", a) for n, a in normal_battery(m.in_dim)] if battery else []
    draw = _normal_sampler(m.in_dim)
    cases += [(f"random:{i}", _draw(lambda r: {"a": draw(r)}, r)["a"]) for i, r in enumerate(trial_rngs(seed, trials))]
    rank = {"pass": 0, "inconclusive": 1, "fail": 2}
    worst, verdict, cx = math.inf, "pass", None
    for label, a in cases:
        rep = check_normal_staircase(m, a, depth, tol, seed)
        worst = min(worst, rep.worst_margin)
        if rank[rep.verdict] > rank[verdict]:
            verdict = rep.verdict
            cx = dict(rep.counterexample or {}, source=f"{label}/{(rep.counterexample or {}).get('source', '')}")
    return PropertyReport("normal", verdict, len(cases), worst, cx, int(seed))


# ----------------------------------------------------------------------------
# algebra-map checkers (positive type, bounded type, positive definite)


def _gram_blocks(m, tup, twist=None):
    k = len(tup)
    tw = None if twist is None else adjoint(twist) @ twist
    blocks = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            prod = adjoint(tup[i]) @ tup[j] if tw is None else adjoint(tup[i]) @ tw @ tup[j]
            blocks[i][j] = np.asarray(m(prod), dtype=np.complex128).reshape(m.out_dim, m.out_dim)
    return np.array(blocks)


def _gram_form(blocks, alpha):
    s = np.einsum("i,j,ijab->ab", np.conj(alpha), alpha, blocks)
    return herm(s)


def _alphas(rng, k, trials):
    basis = [np.eye(k)[i].astype(np.complex128) for i in range(k)]
    rand = [(rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2 * k) for _ in range(trials)]
    return basis + rand


def random_tuple(dim, count, seed=None):
    rng = np.random.default_rng(seed)
    return [(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2 * dim)
            for _ in range(count)]


def gram_positive_type(m: MapSpec, tup, alpha_trials=100, seed=0, tol: Tolerance | None = None) -> PropertyReport:
    """``sum_ij conj(alpha_i) alpha_j phi(a_i* a_j) >= 0`` for sampled ``alpha``."""
    _require(m, "algebra_map")
    tol = tol or DEFAULT_TOL
    tup = [as_matrix(t) for t in tup]
    if not tup:
        raise ValueError("tuple must be non-empty")
    blocks = _gram_blocks(m, tup)
    bnorm = max(_norm(b) for row in blocks for b in row)
    rng = np.random.default_rng(seed)
    tally = _Tally("positive_type", tol)
    for i, alpha in enumerate(_alphas(rng, len(tup), alpha_trials)):
        s = _gram_form(blocks, alpha)
        scale = bnorm * float(np.sum(np.abs(alpha))) ** 2
        tally.add(f"alpha:{i}", {"tuple": tup}, _lmin(s), scale, params={"alpha_re": alpha.real.tolist(),
                                                                          "alpha_im": alpha.imag.tolist()})
    return tally.report(seed)


def block_positive_definite(m: MapSpec, tup, tol: Tolerance | None = None, seed=0) -> PropertyReport:
    """Is the block matrix ``[phi(a_i* a_j)]_ij`` positive?"""
    _require(m, "algebra_map")
    tol = tol or DEFAULT_TOL
    tup = [as_matrix(t) for t in tup]
    blocks = _gram_blocks(m, tup)
    k, d = len(tup), m.out_dim
    big = herm(blocks.transpose(0, 2, 1, 3).reshape(k * d, k * d))
    tally = _Tally("positive_definite", tol)
    tally.add("block", {"tuple": tup}, _lmin(big), _norm(big))
    return tally.report(seed)


def _unit_vectors(rng, d, trials):
    basis = [np.eye(d)[i].astype(np.complex128) for i in range(d)]
    out = []
    for _ in range(trials):
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        out.append(v / np.linalg.norm(v))
    return basis + out


def _ratios(m, a, tup, alphas, xis, tol):
    blocks = _gram_blocks(m, tup)
    twisted = _gram_blocks(m, tup, twist=a)
    best, unbounded, pos = 0.0, False, math.inf
    for alpha in alphas:
        s = _gram_form(blocks, alpha)
        sa = _gram_form(twisted, alpha)
        pos = min(pos, _lmin(s), _lmin(sa))
        sscale = max(_norm(s), _norm(sa), 1e-300)
        for xi in xis:
            num = float(np.real(np.conj(xi) @ sa @ xi))
            den = float(np.real(np.conj(xi) @ s @ xi))
            if not (math.isfinite(num) and math.isfinite(den)):
                unbounded = True
                continue
            if den > tol.threshold(sscale):
                best = max(best, num / den)
            elif num > tol.threshold(sscale) * FAIL_FACTOR:
                unbounded = True
    return best, unbounded, pos


def bounded_type_ratio(
    m: MapSpec,
    a,
    tup,
    alpha_trials=30,
    vector_trials=10,
    seed=0,
    tol: Tolerance | None = None,
    scales=(1.0, 1.5, 2.0, 3.0),
):
    """Estimate the constant ``K_a`` of the bounded-type inequality.

    The ratio ``<S_a(alpha) xi, xi> / <S(alpha) xi, xi>`` is maximised over
    the same sampled ``alpha`` and unit ``xi`` while the tuple is scaled by
    each entry of ``scales``. A plateau across scales is ``pass``; growth by
    more than a factor ``FAIL_FACTOR``, or a positive numerator over a
    vanishing denominator, is ``fail``.

    Returns ``(K_estimate, PropertyReport)``. The report's margin is
    ``-log(K_max / K_first)``, ``K_max`` taken over the larger scales.
    """
    _require(m, "algebra_map")
    tol = tol or DEFAULT_TOL
    a = as_matrix(a)
    tup = [as_matrix(t) for t in tup]
    rng = np.random.default_rng(seed)
    alphas = _alphas(rng, len(tup), alpha_trials)
    xis = _unit_vectors(rng, m.out_dim, vector_trials)
    ks, unbounded, pos = [], False, math.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for r in scales:
            k, unb, p = _ratios(m, a, [r * t for t in tup], alphas, xis, tol)
            ks.append(k)
            unbounded |= unb
            pos = min(pos, p)
    k_est = max(ks)
    top = max(ks[1:]) if len(ks) > 1 else ks[0]
    growth = top / ks[0] if ks[0] > 0 else (math.inf if top > 0 else 1.0)
    margin = -math.log(growth) if growth > 0 and math.isfinite(growth) else -math.inf
    spread = (max(ks) - min(ks)) / max(max(ks), 1e-300)
    if unbounded or growth > FAIL_FACTOR:
        verdict = "fail"
    elif spread <= 1e-6:
        verdict = "pass"
    else:
        verdict = "inconclusive"
    cx = None
    if verdict != "pass":
        cx = {
            "kind": "boundedly_positive_type",
            "source": "scale_escalation",
            "inputs": _encode_inputs({"a": a, "tuple": tup}),
            "params": {"scales": list(scales), "alpha_trials": alpha_trials, "vector_trials": vector_trials,
                       "ratios": [_json_float(k) for k in ks], "unbounded": bool(unbounded)},
            "margin": _json_float(margin),
        }
    rep = PropertyReport("boundedly_positive_type", verdict, len(scales) * len(alphas) * len(xis),
                         min(pos, margin) if math.isfinite(margin) else margin, cx, int(seed))
    return k_est, rep


# ----------------------------------------------------------------------------
# replay


def replay(report: PropertyReport | dict, m: MapSpec, tol: Tolerance | None = None, seed=None) -> float:
    """Recompute the margin stored in a report's counterexample."""
    tol = tol or DEFAULT_TOL
    cx = report.counterexample if isinstance(report, PropertyReport) else report
    if cx is None:
        raise ValueError("report has no counterexample")
    kind = cx["kind"]
    inputs = _decode_inputs(cx["inputs"])
    if kind in _MARGINS:
        for key in ("x", "y", "a"):
            if key in inputs:
                inputs[key] = herm(inputs[key])
        return _MARGINS[kind](m, inputs, tol)[0]
    if kind == "normal":
        return _normal_margin(m, {"a": herm(inputs["a"]), "depth": inputs["depth"]}, tol)[0]
    if kind == "positive_type":
        p = cx["params"]
        alpha = np.asarray(p["alpha_re"]) + 1j * np.asarray(p["alpha_im"])
        return _lmin(_gram_form(_gram_blocks(m, inputs["tuple"]), alpha))
    if kind == "positive_definite":
        return block_positive_definite(m, inputs["tuple"], tol).worst_margin
    if kind == "boundedly_positive_type":
        p = cx["params"]
        _, rep = bounded_type_ratio(m, inputs["a"], inputs["tuple"], p["alpha_trials"], p["vector_trials"],
                                    seed if seed is not None else 0, tol, tuple(p["scales"]))
        return rep.counterexample["margin"] if rep.counterexample else 0.0
    raise ValueError(f"unknown counterexample kind {kind!r}")


# ----------------------------------------------------------------------------
# concrete maps


def normalized_trace(a) -> float:
    a = np.asarray(a)
    return float(np.real(np.trace(a))) / a.shape[0]


def numeric_rank(a, tol: Tolerance | None = None) -> int:
    tol = tol or DEFAULT_TOL
    lam = eig_herm(a, tol).eigenvalues
    z = tol.rtol * max(1.0, abs(lam[0]), abs(lam[-1]))
    return int(np.sum(lam > z))


def calculus_map(f: ScalarFunctionSpec, dim, name=None, profile=None, description="") -> MapSpec:
    if profile is None:
        profile = (
            {"monotone": True, "supercongruent": True, "concave": True, "normal": True}
            if f.operator_monotone and f.is_nonnegative
            else {}
        )
    return MapSpec(name or f.name, "cone_map", dim, dim, lambda a: apply_function(f, a), profile, description)


def rank_indexed_family(m: int) -> ScalarFunctionSpec:
    """``f_m(t) = 1 + m/(m+1) - 1/(t+1)``: operator monotone, increasing in ``m``,
    and non-negative on ``[0, inf)``."""
    return builtin("shifted_inverse", 1.0 + m / (m + 1.0))


def rank_indexed_map(dim, family=rank_indexed_family, tol: Tolerance | None = None) -> MapSpec:
    """``phi(a) = f_rank(a)(a)``."""
    tol = tol or DEFAULT_TOL

    def ev(a):
        d = eig_herm(a, tol)
        r = numeric_rank(a, tol)
        return apply_function(family(r), a, tol, decomp=d)

    return MapSpec(
        "rank_indexed",
        "cone_map",
        dim,
        dim,
        ev,
        {"monotone": True, "supercongruent": False, "supercongruent[invertible]": True},
        "phi(a) = f_rank(a)(a) with f_m = shifted_inverse(1 + m/(m+1))",
    )


def rank_indexed_noncalculus_gap(dim, t0=1.0, rank=1, family=rank_indexed_family) -> float:
    """``||phi(t0 p) - g(t0 p)||_2`` for a rank-``rank`` projection ``p``, where
    ``g = f_dim`` is the only calculus agreeing with ``phi`` on scalars."""
    phi = rank_indexed_map(dim, family)
    p = coord_projection(dim, rank)
    return _norm(phi(t0 * p) - apply_function(family(dim), t0 * p))


def _trace_state(a):
    return normalized_trace(a) * np.eye(a.shape[0])


def _vector_state(a):
    return float(np.real(a[0, 0])) * np.eye(a.shape[0])


def _diag_expectation(a):
    return np.diag(np.real(np.diag(a)))


def _diag_expectation_squared(a):
    e = np.real(np.diag(a))
    return np.diag(e * e)


def _threshold(a):
    return np.eye(a.shape[0]) if spectral_norm(a) <= 1.0 else a


def _invertibility_indicator(a, tol=DEFAULT_TOL):
    lam = eig_herm(a, tol).eigenvalues
    invertible = lam[-1] > tol.rtol * max(1.0, abs(lam[0]))
    return (1.0 if invertible else 2.0) * np.eye(a.shape[0])


def _trace_rank_decreasing(a, alpha=lambda s: 2.0 - s):
    return alpha(numeric_rank(a) / a.shape[0]) * np.eye(a.shape[0])


def compression_map(v):
    v = np.asarray(v)
    return lambda a: adjoint(v) @ a @ v


def builtin_maps(dim: int = 2) -> list[MapSpec]:
    """Every concrete map used in the replication suite, sized for ``M_dim``.

    Statements about II_1 factors are realised in ``M_dim`` with the
    normalised trace; ``exp`` is defined on ``M_1`` only.
    """
    n = dim
    nonmono = {"monotone": False}
    maps = [
        MapSpec("trace_state", "cone_map", n, n, _trace_state,
                {"concave": True, "monotone": True, "supercongruent": False},
                "a -> tau(a) 1 with tau the normalised trace"),
        MapSpec("vector_state", "cone_map", n, n, _vector_state,
                {"concave": True, "monotone": True, "supercongruent": False},
                "a -> <a e1, e1> 1"),
        MapSpec("diag_expectation_squared", "cone_map", n, n, _diag_expectation_squared,
                {"monotone": True, "concave": False, "supercongruent": False},
                "a -> E(a)^2 with E the diagonal conditional expectation"),
        MapSpec("threshold", "cone_map", n, n, _threshold,
                dict(nonmono, supercongruent=True),
                "1 if ||a|| <= 1, else a"),
        MapSpec("invertibility_indicator", "cone_map", n, n, _invertibility_indicator,
                dict(nonmono, supercongruent=True),
                "1 if a invertible, else 2"),
        MapSpec("trace_rank_decreasing", "cone_map", n, n, _trace_rank_decreasing,
                dict(nonmono, supercongruent=True),
                "alpha(tau(r(a))) 1 with alpha(s) = 2 - s"),
        calculus_map(builtin("square"), n, "square",
                     {"monotone": False, "supercongruent": False, "concave": False}, "a -> a^2"),
        calculus_map(builtin("max_one"), n, "max_one",
                     {"monotone": False, "supercongruent": False, "concave": False}, "a -> 1 v a"),
        calculus_map(builtin("indicator_jump"), n, "range_projection",
                     {"monotone": True, "supercongruent": True, "normal": True, "concave": True},
                     "range projection chi_(0,inf)(a)"),
        rank_indexed_map(n),
        calculus_map(builtin("identity"), n, "identity", description="a -> a"),
        calculus_map(builtin("sqrt"), n, "sqrt", description="a -> a^(1/2)"),
        calculus_map(builtin("power", 0.25), n, "power_0.25", description="a -> a^(1/4)"),
        calculus_map(builtin("shifted_inverse", 2.0), n, "shifted_inverse_2", description="a -> 2 - (a + 1)^-1"),
        calculus_map(with_jump(builtin("sqrt"), 1.0), n, "sqrt_plus_range",
                     {"monotone": True, "supercongruent": True, "concave": True, "normal": True},
                     "a -> a^(1/2) + r(a)"),
        MapSpec("transpose", "algebra_map", n, n, lambda a: np.asarray(a).T,
                {"positive_type": True, "boundedly_positive_type": True, "positive_definite": False},
                "a -> a^T"),
        MapSpec("det", "algebra_map", n, 1, lambda a: np.array([[np.linalg.det(a)]]),
                {"positive_type": True, "boundedly_positive_type": True, "positive_definite": True},
                "a -> det(a)"),
        MapSpec("tensor_square", "algebra_map", n, n * n, lambda a: np.kron(a, a),
                {"positive_type": True, "boundedly_positive_type": True, "positive_definite": True},
                "a -> a (x) a"),
        MapSpec("diag_expectation", "algebra_map", n, n, lambda a: np.diag(np.diag(a)),
                {"positive_type": True, "boundedly_positive_type": True, "positive_definite": True},
                "positive linear map a -> E(a)"),
        MapSpec("exp", "algebra_map", 1, 1, lambda a: np.exp(np.asarray(a, dtype=np.complex128)),
                {"positive_type": True, "boundedly_positive_type": False, "positive_definite": True},
                "z -> e^z on M_1"),
    ]
    return maps


def get_map(name: str, dim: int = 2) -> MapSpec:
    for m in builtin_maps(dim):
        if m.name == name:
            return m
    raise KeyError(f"unknown map {name!r}")


def map_names(dim: int = 2) -> list[str]:
    return [m.name for m in builtin_maps(dim)]


# ----------------------------------------------------------------------------
# campaigns


def run_campaign(config: dict, tol: Tolerance | None = None):
    """Run one ``{"map", "property", "dim", "trials", "seed", ...}`` campaign.

    Returns ``(report, extras)``; ``extras`` carries ``K_estimate`` for the
    bounded-type property.
    """
    name = config["map"]
    prop = config["property"]
    dim = int(config.get("dim", 2))
    trials = int(config.get("trials", 200))
    seed = int(config.get("seed", 0))
    cls = config.get("contraction_class", "positive")
    m = get_map(name, dim)
    extras = {}
    if prop == "monotone":
        rep = check_monotone(m, trials, seed, tol)
    elif prop == "supercongruent":
        rep = check_supercongruent(m, trials, seed, cls, tol)
    elif prop == "concave":
        rep = check_concave(m, trials, seed, tol)
    elif prop == "normal":
        rep = check_normal(m, trials, seed, int(config.get("depth", 20)), tol)
    elif prop in ("positive_type", "positive_definite", "boundedly_positive_type"):
        tup = random_tuple(m.in_dim, int(config.get("tuple_size", 3)), seed)
        if prop == "positive_type":
            rep = gram_positive_type(m, tup, trials, seed, tol)
        elif prop == "positive_definite":
            rep = block_positive_definite(m, tup, tol, seed)
        else:
            a = random_tuple(m.in_dim, 1, seed + 1)[0]
            a = 2.0 * a / _norm(a)
            k, rep = bounded_type_ratio(m, a, tup, max(1, trials // 10), 10, seed, tol)
            extras["K_estimate"] = k
    else:
        raise ValueError(f"unknown property {prop!r}; choose from {PROPERTIES}")
    return rep, extras
