"""Operator means built from a representing function."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import ScalarFunctionSpec, apply_function, builtin
from .errors import DimMismatch, Singular
from .herm import DEFAULT_TOL, Tolerance, eig_herm, herm, sqrt_psd


@dataclass(frozen=True)
class MeanSpec:
    representing_function: ScalarFunctionSpec
    name: str = ""

    def __post_init__(self):
        f = self.representing_function
        if not f.is_nonnegative:
            raise ValueError(f"representing function {f.name} must be non-negative")
        if not np.isfinite(f(np.array([1.0]))[0]):
            raise ValueError("representing function must be finite at 1")
        if not self.name:
            object.__setattr__(self, "name", f"mean[{f.name}]")


def geometric_mean_spec() -> MeanSpec:
    return MeanSpec(builtin("sqrt"), "geometric")


def _roots(b, tol):
    """``b^(1/2)`` and ``b^(-1/2)``; raises Singular for non-invertible ``b``."""
    d = eig_herm(b, tol)
    w = d.eigenvalues
    scale = max(abs(w[0]), abs(w[-1]))
    if w[-1] <= tol.rtol * scale or scale == 0.0:
        raise Singular(f"mean needs an invertible right argument, lambda_min = {w[-1]:.3e}")
    r = np.sqrt(w)
    return d.reconstruct(r), d.reconstruct(1.0 / r)


def mean_eval(m: MeanSpec, a, b, tol: Tolerance | None = None, epsilon_shift: float | None = None):
    """``b^(1/2) f(b^(-1/2) a b^(-1/2)) b^(1/2)``.

    ``b`` must be invertible. ``epsilon_shift`` evaluates the mean of
    ``(a + eps I, b + eps I)`` instead, which is only meant for diagnostics
    on singular input.
    """
    tol = tol or DEFAULT_TOL
    a, b = herm(a), herm(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    if epsilon_shift:
        eye = np.eye(a.shape[0])
        a, b = herm(a + epsilon_shift * eye), herm(b + epsilon_shift * eye)
    bh, bih = _roots(b, tol)
    inner = herm(bih @ a @ bih)
    return herm(bh @ apply_function(m.representing_function, inner, tol) @ bh)


def geometric_mean(a, b, tol: Tolerance | None = None):
    """``a # b = a^(1/2) (a^(-1/2) b a^(-1/2))^(1/2) a^(1/2)`` for invertible ``a``.

    With ``c = geometric_mean(inv(a), x)`` one has ``c a c = x``, and
    ``0 <= c <= 1`` whenever ``x <= a``. The mean is symmetric, so a singular
    ``a`` is accepted when ``b`` is invertible (evaluated as ``b # a``);
    :class:`Singular` is raised only when neither argument is invertible.
    """
    tol = tol or DEFAULT_TOL
    a, b = herm(a), herm(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    try:
        ah, aih = _roots(a, tol)
    except Singular:
        ah, aih = _roots(b, tol)
        a, b = b, a
    return herm(ah @ sqrt_psd(herm(aih @ b @ aih), tol) @ ah)
