"""Functional calculus of positive matrices by functions with a jump at 0.

A :class:`ScalarFunctionSpec` stores ``f(t) = F(t) + k * [t > 0]`` with
``F`` continuous on ``[0, inf)``. The jump is applied only to eigenvalues
above a relative zero threshold, so ``f(a)`` for ``f = [t > 0]`` is the
range projection of ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegeneratePoints, DomainViolation, NegativeJump, NoLimit, NotInvertible, NotPsd
from .herm import DEFAULT_TOL, Tolerance, eig_herm, herm, is_psd, psd_threshold

INF = math.inf


def _vectorize(fn):
    def wrapped(t):
        t = np.asarray(t, dtype=np.float64)
        try:
            out = np.asarray(fn(t), dtype=np.float64)
            if out.shape == t.shape:
                return out
        except Exception:
            pass
        return np.array([float(fn(float(s))) for s in t.ravel()]).reshape(t.shape)

    return wrapped


@dataclass(frozen=True)
class ScalarFunctionSpec:
    """``f(t) = F(t) + jump * [t > 0]`` on ``domain``.

    ``F`` must accept numpy arrays. Construction samples ``F`` on the
    domain and rejects decreasing functions and negative jumps.
    """

    name: str
    F: Callable[[np.ndarray], np.ndarray]
    jump: float = 0.0
    domain: tuple = (0.0, INF)
    operator_monotone: bool | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lo, hi = self.domain
        if not (0.0 <= lo <= hi):
            raise ValueError(f"domain must satisfy 0 <= lo <= hi, got {self.domain}")
        if self.jump < 0:
            raise NegativeJump(f"jump must be >= 0, got {self.jump}")
        v = self.F(self.samples())
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{self.name}: F is not finite on its domain")
        if np.any(np.diff(v) < -1e-12 * max(1.0, float(np.max(np.abs(v))))):
            raise ValueError(f"{self.name}: F is not increasing on its domain")

    def samples(self, count=64):
        lo, hi = self.domain
        top = hi if math.isfinite(hi) else max(lo, 1.0) * 1e3
        pts = np.concatenate(([lo], lo + np.geomspace(1e-6, 1.0, count) * (top - lo)))
        return np.unique(pts)

    @property
    def f0(self) -> float:
        return float(self.F(np.array([self.domain[0]]))[0]) if self.domain[0] == 0 else float("nan")

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self.F(self.samples()) >= 0))

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.F(t) + self.jump * (t > 0)

    def to_json(self) -> dict:
        if "builtin" in self.params:
            out = {"builtin": self.params["builtin"]}
            if self.params.get("param") is not None:
                out["param"] = self.params["param"]
            return out
        if "table" in self.params:
            return {"table": self.params["table"], "jump": self.jump}
        raise ValueError(f"{self.name} has no JSON form")


def _spec(name, F, param=None, *, jump=0.0, om=True, builtin=None):
    return ScalarFunctionSpec(
        name=name,
        F=F,
        jump=jump,
        operator_monotone=om,
        params={"builtin": builtin or name, "param": param},
    )


BUILTIN_FUNCTIONS = (
    "identity",
    "sqrt",
    "power",
    "shifted_inverse",
    "f_alpha",
    "indicator_jump",
    "max_one",
    "square",
)


def builtin(name: str, param: float | None = None) -> ScalarFunctionSpec:
    """Library functions; ``square`` and ``max_one`` are not operator monotone."""
    if name == "identity":
        return _spec("identity", lambda t: np.asarray(t, dtype=float) * 1.0)
    if name == "sqrt":
        return _spec("sqrt", lambda t: np.sqrt(np.asarray(t, dtype=float)))
    if name == "power":
        p = 0.5 if param is None else float(param)
        if not 0 < p <= 1:
            raise ValueError(f"power exponent must lie in (0, 1], got {p}")
        return _spec(f"power({p:g})", lambda t: np.power(np.asarray(t, dtype=float), p), p, builtin="power")
    if name == "shifted_inverse":
        a = 1.0 if param is None else float(param)
        if a < 0:
            raise ValueError("shifted_inverse needs alpha >= 0")
        return _spec(f"shifted_inverse({a:g})", lambda t: a - 1.0 / (np.asarray(t, dtype=float) + 1.0), a,
                     builtin="shifted_inverse")
    if name == "f_alpha":
        a = 1.0 if param is None else float(param)
        if a < 0:
            raise ValueError("f_alpha needs alpha >= 0")
        c = a / (a + 1.0) if math.isfinite(a) else 1.0
        return _spec(f"f_alpha({a:g})", lambda t: c - 1.0 / (np.asarray(t, dtype=float) + 1.0), a, builtin="f_alpha")
    if name == "indicator_jump":
        return _spec("indicator_jump", lambda t: np.zeros_like(np.asarray(t, dtype=float)), jump=1.0)
    if name == "max_one":
        return _spec("max_one", lambda t: np.maximum(1.0, np.asarray(t, dtype=float)), om=False)
    if name == "square":
        return _spec("square", lambda t: np.asarray(t, dtype=float) ** 2, om=False)
    raise ValueError(f"unknown builtin function {name!r}; choose from {BUILTIN_FUNCTIONS}")


def with_jump(f: ScalarFunctionSpec, k: float, name=None) -> ScalarFunctionSpec:
    """``F + (f.jump + k) * [t > 0]``: adds a range-projection component."""
    return ScalarFunctionSpec(
        name=name or f"{f.name}+{k:g}*chi",
        F=f.F,
        jump=f.jump + k,
        domain=f.domain,
        operator_monotone=f.operator_monotone,
    )


def table_function(table, jump=0.0, name="table") -> ScalarFunctionSpec:
    pts = np.asarray(table, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("table must be a list of at least two [t, f(t)] pairs")
    ts, fs = pts[:, 0], pts[:, 1]
    if np.any(np.diff(ts) <= 0):
        raise ValueError("table abscissae must be strictly increasing")
    return ScalarFunctionSpec(
        name=name,
        F=lambda t: np.interp(np.asarray(t, dtype=float), ts, fs),
        jump=float(jump),
        domain=(float(ts[0]), float(ts[-1])),
        operator_monotone=None,
        params={"table": pts.tolist()},
    )


def function_from_json(obj: dict) -> ScalarFunctionSpec:
    if "builtin" in obj:
        return builtin(obj["builtin"], obj.get("param"))
    if "table" in obj:
        return table_function(obj["table"], obj.get("jump", 0.0))
    raise ValueError("function spec needs a 'builtin' or 'table' key")


def zero_threshold(a_norm: float, tol: Tolerance) -> float:
    return tol.rtol * max(1.0, a_norm)


def apply_function(f: ScalarFunctionSpec, a, tol: Tolerance | None = None, decomp=None) -> np.ndarray:
    """``V diag(f(lambda)) V*`` for a positive matrix ``a``.

    Eigenvalues at or below ``rtol * max(1, ||a||_2)`` are sent to ``F(0)``;
    the others to ``F(lambda) + k``.
    """
    tol = tol or DEFAULT_TOL
    d = decomp or eig_herm(a, tol)
    lam = d.eigenvalues
    thr = psd_threshold(None, tol, lam)
    if lam[-1] < -thr:
        raise NotPsd(f"apply_function needs a positive matrix, lambda_min = {lam[-1]:.3e}")
    lo, hi = f.domain
    if lam[-1] < lo - thr or lam[0] > hi + thr:
        raise DomainViolation(
            f"spectrum [{lam[-1]:.6g}, {lam[0]:.6g}] escapes the domain {f.domain} of {f.name}"
        )
    z = zero_threshold(max(abs(lam[0]), abs(lam[-1])), tol)
    live = lam > z
    x = np.where(live, np.clip(lam, lo, hi), max(lo, 0.0))
    vals = np.asarray(f.F(x), dtype=float)
    if f.jump:
        vals = vals + f.jump * live
    return d.reconstruct(vals)


def range_projection(a, tol: Tolerance | None = None) -> np.ndarray:
    return apply_function(builtin("indicator_jump"), a, tol)


def staircase_values(lam, n: int, mode: str = "general", tol: Tolerance | None = None):
    """Dyadic floor of each eigenvalue on ``[0, beta]`` or ``[alpha, beta]``."""
    tol = tol or DEFAULT_TOL
    if n < 1:
        raise ValueError("staircase order must be a positive integer")
    lam = np.clip(np.asarray(lam, dtype=np.float64), 0.0, None)
    beta = float(lam.max())
    steps = 2.0 ** n
    if mode == "general":
        if beta == 0.0:
            return np.zeros_like(lam)
        k = np.ceil((lam / beta) * steps)
        return np.maximum(k - 1.0, 0.0) / steps * beta
    if mode == "invertible":
        alpha = float(lam.min())
        if alpha <= tol.rtol * max(1.0, beta):
            raise NotInvertible(f"invertible staircase needs lambda_min > 0, got {alpha:.3e}")
        width = beta - alpha
        if width == 0.0:
            return np.full_like(lam, alpha)
        k = np.ceil(((lam - alpha) / width) * steps)
        return alpha + np.maximum(k - 1.0, 0.0) / steps * width
    raise ValueError(f"unknown staircase mode {mode!r}")


def staircase_lower(a, n: int, mode: str = "general", tol: Tolerance | None = None) -> np.ndarray:
    """Finite-spectrum approximant ``g_n(a) <= a`` from a dyadic step function.

    ``mode="general"`` uses cells of width ``beta / 2**n`` on ``[0, beta]``,
    ``mode="invertible"`` cells of width ``(beta - alpha) / 2**n`` on
    ``[alpha, beta]``, with ``alpha, beta`` the extreme eigenvalues. Each
    eigenvalue is moved to the left end of its cell, so
    ``||a - g_n(a)||_2 <= (beta - floor) / 2**n`` and, in general mode,
    ``g_m(a) <= g_n(a)`` for ``m <= n``.
    """
    tol = tol or DEFAULT_TOL
    d = eig_herm(a, tol)
    if d.eigenvalues[-1] < -psd_threshold(None, tol, d.eigenvalues):
        raise NotPsd("staircase needs a positive matrix")
    return d.reconstruct(staircase_values(d.eigenvalues, n, mode, tol))


def loewner_matrix(f: ScalarFunctionSpec, points, h: float = 1e-6) -> np.ndarray:
    t = np.asarray(points, dtype=np.float64).ravel()
    if t.size == 0 or np.any(t <= 0):
        raise DegeneratePoints("points must be non-empty and lie in (0, inf)")
    if np.unique(t).size != t.size:
        raise DegeneratePoints("points must be distinct")
    ft = f(t)
    diff_t = t[:, None] - t[None, :]
    np.fill_diagonal(diff_t, 1.0)
    L = (ft[:, None] - ft[None, :]) / diff_t
    hh = np.minimum(h, t / 2)
    L[np.diag_indices_from(L)] = (f(t + hh) - f(t - hh)) / (2 * hh)
    return herm(L)


def loewner_matrix_test(f: ScalarFunctionSpec, points, tol: Tolerance | None = None) -> bool:
    """Order-``len(points)`` matrix-monotonicity test: is the divided-difference matrix PSD?"""
    tol = tol or Tolerance(rtol=1e-7, atol=1e-10)
    return is_psd(loewner_matrix(f, points), tol)


def jump_decompose(f_raw, probe_grid=None, tol: float = 1e-9, name="decomposed") -> ScalarFunctionSpec:
    """Split a function on ``[0, inf)`` into continuous part plus jump at 0.

    The right limit at 0 is estimated on ``probe_grid`` (default ``2**-j``,
    ``j = 1..40``). Returns the spec with ``k = lim f - f(0)`` and
    ``F = f - k`` on ``(0, inf)``, ``F(0) = f(0)``.
    """
    fv = _vectorize(f_raw)
    grid = np.asarray(2.0 ** -np.arange(1, 41) if probe_grid is None else probe_grid, dtype=np.float64)
    grid = np.sort(grid[grid > 0])[::-1]
    if grid.size < 4:
        raise NoLimit("probe grid needs at least four positive points")
    vals = fv(grid)
    f0 = float(fv(np.array([0.0]))[0])
    tail = vals[-6:]
    lim = float(vals[-1])
    spread = float(np.max(tail) - np.min(tail))
    if spread > 1e-4 * max(1.0, abs(lim)) or not np.all(np.isfinite(tail)):
        raise NoLimit(f"probe values do not settle near 0 (tail spread {spread:.3e})")
    k = lim - f0
    noise = 4.0 * abs(float(vals[-1] - vals[-2])) + tol * max(1.0, abs(f0))
    if abs(k) <= noise:
        k = 0.0
    if k < 0:
        raise NegativeJump(f"f(0) = {f0:.6g} exceeds the right limit {lim:.6g}")

    def F(t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t > 0, fv(t) - k, f0)

    return ScalarFunctionSpec(name=name, F=F, jump=float(k))
