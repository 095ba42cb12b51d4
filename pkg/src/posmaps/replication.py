"""Numeric reproduction of the finite-dimensional claims about non-linear positive maps.

Each :class:`PaperCase` pairs a claim with a checker run and the verdict the
claim predicts. A published counterexample is reproduced when the checker
returns ``fail`` on it, so ``matched`` records agreement with the claim, not
the raw verdict. Statements about II_1 factors are transferred to ``M_n``
with the normalised trace only where the argument survives verbatim; the
``claim`` string says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import map_classes as mc
from .capacities import (
    choquet_matrix,
    choquet_matrix_operator,
    inclusion_exclusion_matrix,
    random_capacity,
    random_operator_capacity,
    sugeno_matrix,
)
from .calculus import jump_decompose
from .errors import Singular
from .herm import DEFAULT_TOL, adjoint, herm, rand_contraction, rand_psd, spectral_norm
from .map_classes import MapSpec, PropertyReport
from .means import geometric_mean_spec, mean_eval

OUT_OF_SCOPE = {
    "Ex-3-4": "needs rank(a) = infinity; no finite-dimensional shadow",
    "Thm-2.4:(1)=>(2)": "dilation construction through a universal C*-algebra",
    "Thm-4.2:(1)=>(2)": "existence argument that uses an infinite-dimensional factor",
}


@dataclass(frozen=True)
class PaperCase:
    id: str
    location: str
    claim: str
    runner: Callable[[int], PropertyReport]
    expected: str

    @property
    def base_id(self) -> str:
        return self.id.split(":")[0]


@dataclass
class LedgerEntry:
    case: PaperCase
    report: PropertyReport
    matched: bool

    def to_json(self) -> dict:
        return {
            "id": self.case.id,
            "location": self.case.location,
            "claim": self.case.claim,
            "expected": self.case.expected,
            "matched": self.matched,
            "report": self.report.to_json(),
        }


def _report(prop, ok: bool, margin, seed, trials=1, counterexample=None) -> PropertyReport:
    return PropertyReport(prop, "pass" if ok else "fail", trials, float(margin), counterexample, int(seed))


def _proj(dim, rank):
    return mc.coord_projection(dim, rank)


# ----------------------------------------------------------------------------
# section 2


E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
E12 = np.array([[0.0, 1.0], [0.0, 0.0]])


def _transpose_pt(seed):
    return mc.gram_positive_type(mc.get_map("transpose", 2), mc.random_tuple(2, 3, seed), 200, seed)


def _transpose_pd(seed):
    return mc.block_positive_definite(mc.get_map("transpose", 2), [E11, E12], seed=seed)


def _transpose_bpt(seed):
    m = mc.get_map("transpose", 2)
    return mc.bounded_type_ratio(m, mc.random_tuple(2, 1, seed + 1)[0], mc.random_tuple(2, 3, seed), seed=seed)[1]


def _exp_bpt(seed):
    m = mc.get_map("exp", 1)
    return mc.bounded_type_ratio(m, np.array([[3.0]]), [np.array([[0.5]])], seed=seed)[1]


def _bounded_with_bound(name, dim, bound, seed):
    m = mc.get_map(name, dim)
    a = mc.random_tuple(dim, 1, seed + 1)[0]
    a = 2.0 * a / spectral_norm(a)
    k, rep = mc.bounded_type_ratio(m, a, mc.random_tuple(dim, 3, seed), seed=seed)
    limit = bound(m, a)
    ok = rep.verdict == "pass" and k <= limit * (1 + 1e-9)
    cx = {"K_estimate": k, "bound": limit, "bounded_type": rep.to_json()} if not ok else None
    return _report("bounded_type_constant", ok, limit - k, seed, rep.trials, cx)


def _k_linear(m, a):
    return spectral_norm(a) ** 2


def _k_multiplicative(m, a):
    return mc._norm(m(a)) ** 2 + 1.0


# ----------------------------------------------------------------------------
# section 3


def _witness(prop, name, dim, inputs):
    return lambda seed: mc.check_witness(prop, mc.get_map(name, dim), inputs, seed=seed)


def _checker(prop, name, dim, trials=100, cls="positive"):
    def run(seed):
        m = mc.get_map(name, dim)
        if prop == "monotone":
            return mc.check_monotone(m, trials, seed)
        if prop == "supercongruent":
            return mc.check_supercongruent(m, trials, seed, cls)
        if prop == "concave":
            return mc.check_concave(m, trials, seed)
        if prop == "normal":
            return mc.check_normal(m, max(5, trials // 10), seed)
        raise ValueError(prop)

    return run


def _prop34(seed, dim=3, trials=60):
    """Every builtin cone map whose concavity check passes also passes monotone."""
    worst, exceptions, n = math.inf, [], 0
    for m in mc.builtin_maps(dim):
        if m.kind != "cone_map":
            continue
        if mc.check_concave(m, trials, seed).verdict != "pass":
            continue
        rep = mc.check_monotone(m, trials, seed)
        n += 1
        worst = min(worst, rep.worst_margin)
        if rep.verdict != "pass":
            exceptions.append(m.name)
    return _report("concave_implies_monotone", not exceptions, worst, seed, n,
                   {"exceptions": exceptions} if exceptions else None)


def _prop35(seed, dim=2, trials=60):
    """One builtin map per combination (1)-(4) of the class statement."""
    want = {
        "trace_state": {"concave": "pass", "supercongruent": "fail"},
        "diag_expectation_squared": {"monotone": "pass", "concave": "fail", "supercongruent": "fail"},
        "threshold": {"monotone": "fail", "supercongruent": "pass"},
        "square": {"monotone": "fail", "supercongruent": "fail"},
    }
    missing = []
    for name, props in want.items():
        for prop, verdict in props.items():
            if _checker(prop, name, dim, trials)(seed).verdict != verdict:
                missing.append(f"{name}:{prop}")
    return _report("class_realization", not missing, 0.0, seed, len(want),
                   {"missing": missing} if missing else None)


# ----------------------------------------------------------------------------
# section 4


def _thm42_jump(seed):
    """The jump of the range projection is recovered as k = 1 with F = 0."""
    f = jump_decompose(lambda t: np.where(np.asarray(t) > 0, 1.0, 0.0))
    grid = np.linspace(0.0, 5.0, 11)
    err = float(np.max(np.abs(f.F(grid))))
    return _report("jump_decomposition", abs(f.jump - 1.0) < 1e-12 and err < 1e-12, -abs(f.jump - 1.0), seed)


def _prop44_gap(seed, dim=4):
    gap = mc.rank_indexed_noncalculus_gap(dim, t0=1.0, rank=1)
    return _report("non_calculus", gap > 1e-3, gap, seed)


def _cor45(seed, dim=3, trials=100):
    """``c (a # b) c <= (c a c) # (c b c)`` for invertible positive contractions ``c``."""
    g = geometric_mean_spec()
    tally = mc._Tally("transformer_inequality", DEFAULT_TOL)
    for i, rng in enumerate(mc.trial_rngs(seed, trials)):
        a = rand_psd(dim, rng, min_eig=0.1)
        b = rand_psd(dim, rng, min_eig=0.1)
        c = rand_contraction(dim, rng, "invertible")
        lhs = herm(c @ mean_eval(g, a, b) @ c)
        rhs = mean_eval(g, herm(c @ a @ c), herm(c @ b @ c))
        mg, sc = mc._order_margin(lhs, rhs)
        tally.add(f"random:{i}", {"a": a, "b": b, "c": c}, mg, sc)
    return tally.report(seed)


def _remark46(seed):
    """A mean with a singular right argument is refused rather than guessed."""
    try:
        mean_eval(geometric_mean_spec(), np.eye(2), np.diag([1.0, 0.0]))
    except Singular:
        return _report("singular_mean_refused", True, 0.0, seed)
    return _report("singular_mean_refused", False, 0.0, seed)


# ----------------------------------------------------------------------------
# section 5


def _integral_map(kind, n, seed):
    if kind == "choquet":
        mu = random_capacity(n, seed)
        ev = lambda a: np.array([[choquet_matrix(mu, a)]])
        out = 1
    elif kind == "choquet_operator":
        mu = random_operator_capacity(n, 2, seed)
        ev = lambda a: choquet_matrix_operator(mu, a)
        out = 2
    elif kind == "sugeno":
        mu = random_capacity(n, seed)
        ev = lambda a: np.array([[sugeno_matrix(mu, a)]])
        out = 1
    elif kind == "inclusion_exclusion":
        mu = random_capacity(n, seed)
        ev = lambda a: np.array([[inclusion_exclusion_matrix(mu, a, "min")]])
        out = 1
    else:
        raise ValueError(kind)
    return MapSpec(f"{kind}_integral", "cone_map", n, out, ev)


def _integral_monotone(kind, n=3, trials=100):
    return lambda seed: mc.check_monotone(_integral_map(kind, n, seed), trials, seed)


def _unitary_invariance(kind, n=3, trials=50):
    def run(seed):
        from .herm import rand_unitary

        m = _integral_map(kind, n, seed)
        worst = 0.0
        for rng in mc.trial_rngs(seed, trials):
            a = rand_psd(n, rng)
            u = rand_unitary(n, rng)
            d = mc._norm(m(a) - m(herm(u @ a @ adjoint(u))))
            worst = max(worst, d / max(1.0, mc._norm(m(a))))
        return _report("unitary_invariance", worst <= 1e-9, -worst, seed, trials)

    return run


# ----------------------------------------------------------------------------


def paper_cases() -> list[PaperCase]:
    eye2 = np.eye(2)
    p2 = _proj(2, 1)
    cases = [
        PaperCase("Ex-2.2", "section 2, positive linear maps", "a positive linear map has K_a <= ||a||^2",
                  lambda s: _bounded_with_bound("diag_expectation", 2, _k_linear, s), "pass"),
        PaperCase("Ex-2.3:det", "section 2, *-multiplicative maps", "det on M_2 has K_a <= |det a|^2 + 1",
                  lambda s: _bounded_with_bound("det", 2, _k_multiplicative, s), "pass"),
        PaperCase("Ex-2.3:tensor", "section 2, *-multiplicative maps", "a -> a (x) a has K_a <= ||a (x) a||^2 + 1",
                  lambda s: _bounded_with_bound("tensor_square", 2, _k_multiplicative, s), "pass"),
        PaperCase("Remark-2.6:transpose_positive_type", "section 2, remark on classes",
                  "transpose on M_2 is of positive type", _transpose_pt, "pass"),
        PaperCase("Remark-2.6:transpose_not_positive_definite", "section 2, remark on classes",
                  "transpose on M_2 is not positive definite; witness tuple {E11, E12}", _transpose_pd, "fail"),
        PaperCase("Remark-2.6:transpose_bounded", "section 2, remark on classes",
                  "transpose on M_2 is of boundedly positive type", _transpose_bpt, "pass"),
        PaperCase("Remark-2.6:exp_unbounded", "section 2, remark on classes",
                  "z -> e^z admits no K with e^(9|z|^2) <= K e^(|z|^2); a = 3", _exp_bpt, "fail"),
        PaperCase("Ex-3.2:monotone", "section 3, operator monotone calculus", "sqrt calculus is monotone",
                  _checker("monotone", "sqrt", 3), "pass"),
        PaperCase("Ex-3.2:supercongruent", "section 3, operator monotone calculus",
                  "sqrt calculus is supercongruent", _checker("supercongruent", "sqrt", 3), "pass"),
        PaperCase("Ex-3.2:concave", "section 3, operator monotone calculus", "sqrt calculus is concave",
                  _checker("concave", "sqrt", 3), "pass"),
        PaperCase("Ex-3.2:normal", "section 3, operator monotone calculus", "sqrt calculus is normal",
                  _checker("normal", "sqrt", 3), "pass"),
        PaperCase("Prop-3.3:monotone", "section 3, range projection", "range projection is monotone",
                  _checker("monotone", "range_projection", 3), "pass"),
        PaperCase("Prop-3.3:supercongruent", "section 3, range projection",
                  "range projection is supercongruent (positive contractions)",
                  _checker("supercongruent", "range_projection", 3), "pass"),
        PaperCase("Prop-3.3:supercongruent_general", "section 3, range projection",
                  "range projection satisfies c* r(a) c <= r(c* a c) for every contraction",
                  _checker("supercongruent", "range_projection", 3, cls="general"), "pass"),
        PaperCase("Prop-3.3:normal", "section 3, range projection", "range projection is normal",
                  _checker("normal", "range_projection", 3), "pass"),
        PaperCase("Prop-3.4", "section 3, concave implies monotone",
                  "every builtin cone map passing concavity passes monotonicity", _prop34, "pass"),
        PaperCase("Prop-3.5", "section 3, class combinations",
                  "each of the four class combinations is realised by a builtin map", _prop35, "pass"),
        PaperCase("Ex-1-1:concave", "section 3, Example (1-1)", "a -> tau(a) 1 on M_2 is concave",
                  _checker("concave", "trace_state", 2), "pass"),
        PaperCase("Ex-1-1:not_supercongruent", "section 3, Example (1-1)",
                  "p tau(1) p = p is not below tau(p) 1 = 1/2 for tau(p) = 1/2 (II_1 realised as M_2)",
                  _witness("supercongruent", "trace_state", 2, {"a": eye2, "c": p2}), "fail"),
        PaperCase("Ex-1-2:concave", "section 3, Example (1-2)", "a -> <a xi, xi> 1 is concave",
                  _checker("concave", "vector_state", 2), "pass"),
        PaperCase("Ex-1-2:not_supercongruent", "section 3, Example (1-2)",
                  "(1-p) phi(p) (1-p) = 1-p is not below phi(0) = 0 for xi in pH",
                  _witness("supercongruent", "vector_state", 2, {"a": p2, "c": eye2 - p2}), "fail"),
        PaperCase("Ex-2-1:monotone", "section 3, Example (2-1)", "a -> E(a)^2 is monotone",
                  _checker("monotone", "diag_expectation_squared", 2), "pass"),
        PaperCase("Ex-2-1:not_concave", "section 3, Example (2-1)",
                  "(phi(0) + phi(2)) / 2 = 2 is not below phi(1) = 1",
                  _witness("concave", "diag_expectation_squared", 2, {"x": 0 * eye2, "y": 2 * eye2, "t": 0.5}),
                  "fail"),
        PaperCase("Ex-2-1:not_supercongruent", "section 3, Example (2-1)", "1/4 is not below phi(1/4) = 1/16",
                  _witness("supercongruent", "diag_expectation_squared", 2, {"a": eye2, "c": 0.5 * eye2}), "fail"),
        PaperCase("Ex-3-1:not_monotone", "section 3, Example (3-1)", "phi(p/2) = 1 is not below phi(2p) = 2p",
                  _witness("monotone", "threshold", 2, {"x": 0.5 * p2, "y": 2.0 * p2}), "fail"),
        PaperCase("Ex-3-1:supercongruent", "section 3, Example (3-1)",
                  "threshold map is supercongruent for every contraction",
                  _checker("supercongruent", "threshold", 2, cls="general"), "pass"),
        PaperCase("Ex-3-2:not_monotone", "section 3, Example (3-2)",
                  "phi(a) = 2 for a non-invertible contraction a <= 1 while phi(1) = 1 (II_1 realised as M_2)",
                  _witness("monotone", "invertibility_indicator", 2, {"x": 0.5 * p2, "y": eye2}), "fail"),
        PaperCase("Ex-3-2:supercongruent", "section 3, Example (3-2)",
                  "in M_n a left invertible element is invertible, so the map is supercongruent",
                  _checker("supercongruent", "invertibility_indicator", 2, cls="general"), "pass"),
        PaperCase("Ex-3-3:not_monotone", "section 3, Example (3-3)",
                  "p <= q with tau(p) = 1/4 < tau(q) = 3/4 gives phi(p) > phi(q) (tau normalised trace on M_4)",
                  _witness("monotone", "trace_rank_decreasing", 4, {"x": _proj(4, 1), "y": _proj(4, 3)}), "fail"),
        PaperCase("Ex-3-3:supercongruent", "section 3, Example (3-3)",
                  "tau(r(c* x c)) <= tau(r(x)) on M_4, so the map is supercongruent",
                  _checker("supercongruent", "trace_rank_decreasing", 4), "pass"),
        PaperCase("Ex-4-1:not_monotone", "section 3, Example (4-1)", "t^2 is not operator monotone",
                  _checker("monotone", "square", 2), "fail"),
        PaperCase("Ex-4-1:not_supercongruent", "section 3, Example (4-1)",
                  "(1/2) phi(1) (1/2) = 1/4 is not below phi(1/4) = 1/16",
                  _witness("supercongruent", "square", 2, {"a": eye2, "c": 0.5 * eye2}), "fail"),
        PaperCase("Ex-4-2:not_monotone", "section 3, Example (4-2)",
                  "a = [[1,1],[1,1]] <= b = diag(3, 3/2) but 1 v a is not below 1 v b",
                  _witness("monotone", "max_one", 2, {"x": mc.EX42_A, "y": mc.EX42_B}), "fail"),
        PaperCase("Ex-4-2:not_supercongruent", "section 3, Example (4-2)",
                  "a = diag(2,0), c = [[1/2,1/2],[1/2,1/2]]: c phi(a) c = (3/4) J is not below phi(cac) = 1",
                  _witness("supercongruent", "max_one", 2, {"a": mc.EX42_A2, "c": mc.EX42_C}), "fail"),
        PaperCase("Lemma-4.1", "section 4, Hansen-type inequality",
                  "c* f(a) c <= f(c* a c) for operator monotone f >= 0 and every contraction c",
                  _checker("supercongruent", "power_0.25", 3, cls="general"), "pass"),
        PaperCase("Thm-4.2:(2)=>(1):monotone", "section 4, Borel calculus characterisation",
                  "F + k chi_(0,inf) with F operator monotone and k >= 0 gives a monotone map",
                  _checker("monotone", "sqrt_plus_range", 3), "pass"),
        PaperCase("Thm-4.2:(2)=>(1):supercongruent", "section 4, Borel calculus characterisation",
                  "F + k chi_(0,inf) gives a supercongruent map",
                  _checker("supercongruent", "sqrt_plus_range", 3), "pass"),
        PaperCase("Thm-4.2:jump", "section 4, Borel calculus characterisation",
                  "k = lim_(t->0+) f(t) - f(0) recovers the jump of chi_(0,inf)", _thm42_jump, "pass"),
        PaperCase("Cor-4.3:concave", "section 4, corollary", "monotone and supercongruent implies concave",
                  _checker("concave", "sqrt_plus_range", 3), "pass"),
        PaperCase("Cor-4.3:normal", "section 4, corollary", "monotone and supercongruent implies normal",
                  _checker("normal", "sqrt_plus_range", 3), "pass"),
        PaperCase("Prop-4.4:(1)", "section 4, rank-indexed map",
                  "phi(a) = f_rank(a)(a) is monotone on M_4", _checker("monotone", "rank_indexed", 4), "pass"),
        PaperCase("Prop-4.4:(2)", "section 4, rank-indexed map",
                  "c* phi(a) c <= phi(c* a c) for invertible positive contractions c on M_4",
                  _checker("supercongruent", "rank_indexed", 4, cls="invertible"), "pass"),
        PaperCase("Prop-4.4:(3)", "section 4, rank-indexed map",
                  "phi(t0 p) differs from f_4(t0 p) for a rank-one projection p, so phi is not a calculus",
                  _prop44_gap, "pass"),
        PaperCase("Cor-4.5", "section 4, operator means",
                  "the geometric mean satisfies c (a # b) c <= (cac) # (cbc)", _cor45, "pass"),
        PaperCase("Remark-4.6", "section 4, non-invertible means",
                  "means of non-invertible arguments are ambiguous; evaluation refuses them", _remark46, "pass"),
        PaperCase("Prop-5.3:monotone", "section 5, Choquet integral", "a -> (C) int lambda(a) d mu is monotone",
                  _integral_monotone("choquet"), "pass"),
        PaperCase("Prop-5.3:unitary_invariance", "section 5, Choquet integral",
                  "the Choquet map depends on the spectrum only", _unitary_invariance("choquet"), "pass"),
        PaperCase("Prop-5.4", "section 5, operator-valued Choquet integral",
                  "the operator-valued Choquet map is monotone", _integral_monotone("choquet_operator"), "pass"),
        PaperCase("Prop-5.7", "section 5, inclusion-exclusion integral",
                  "the inclusion-exclusion map with I = min is monotone", _integral_monotone("inclusion_exclusion"),
                  "pass"),
        PaperCase("Prop-5.8", "section 5, Sugeno integral", "the Sugeno map is monotone",
                  _integral_monotone("sugeno"), "pass"),
    ]
    return cases


def base_ids() -> set[str]:
    return {c.base_id for c in paper_cases()}


def run_case(case: PaperCase, seed: int = 0) -> LedgerEntry:
    rep = case.runner(seed)
    return LedgerEntry(case, rep, rep.verdict == case.expected)


def run_all(seed: int = 0) -> list[LedgerEntry]:
    """Run every case; the ledger is sorted by case id."""
    entries = [run_case(c, seed) for c in paper_cases()]
    return sorted(entries, key=lambda e: e.case.id)


def ledger_to_json(entries, seed) -> dict:
    return {
        "seed": int(seed),
        "all_matched": all(e.matched for e in entries),
        "cases": [e.to_json() for e in entries],
        "out_of_scope": dict(sorted(OUT_OF_SCOPE.items())),
    }
