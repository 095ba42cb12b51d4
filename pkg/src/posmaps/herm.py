"""Hermitian matrix arithmetic, Loewner order and positive-cone samplers.

Matrices are plain numpy arrays. :func:`herm` is the one constructor that
enforces exact Hermitian symmetry; everything downstream assumes its
output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimMismatch, NonConvergence, NotPsd, Singular

MAX_SWEEPS = 100
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class Tolerance:
    rtol: float = 1e-9
    atol: float = 1e-12

    def __post_init__(self):
        for name in ("rtol", "atol"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v!r}")

    def threshold(self, scale: float) -> float:
        return self.rtol * scale + self.atol


DEFAULT_TOL = Tolerance()


def _tol(tol):
    return DEFAULT_TOL if tol is None else tol


def herm(a) -> np.ndarray:
    """Return the Hermitian part ``(a + a*) / 2`` of a square matrix.

    The result satisfies ``h[i, j] == conj(h[j, i])`` bit for bit. Real input
    stays real.
    """
    a = np.asarray(a)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if np.iscomplexobj(a):
        a = a.astype(np.complex128)
        out = (a + a.conj().T) / 2
        np.fill_diagonal(out, out.diagonal().real)
        return out
    a = a.astype(np.float64)
    return (a + a.T) / 2


def as_matrix(a) -> np.ndarray:
    """Square, finite, not necessarily Hermitian matrix (contractions, tuples)."""
    a = np.asarray(a)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a.astype(np.complex128) if np.iscomplexobj(a) else a.astype(np.float64)


def adjoint(a):
    return np.conj(a).T


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues in descending order and the matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self, values=None) -> np.ndarray:
        lam = self.eigenvalues if values is None else np.asarray(values)
        v = self.eigenvectors
        out = (v * lam) @ v.conj().T
        return herm(out)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def eig_herm(a, tol: Tolerance | None = None) -> SpectralDecomp:
    """Spectral decomposition by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian input; it is Hermitized first.
    tol : Tolerance, optional
        Sweeps stop once the off-diagonal Frobenius norm is at most
        ``max(tol.atol, 2 eps) * ||a||_F``.

    Returns
    -------
    SpectralDecomp
        Eigenvalues sorted descending, ties kept in original diagonal order.

    Raises
    ------
    NonConvergence
        If 100 sweeps do not reach the off-diagonal threshold.
    """
    tol = _tol(tol)
    h = herm(a)
    fro = float(np.linalg.norm(h))
    off_tol = max(tol.atol, 2 * _EPS) * fro
    if h.shape[0] == 1 or fro == 0.0:
        w = h.diagonal().real.astype(np.float64).copy()
        v = np.eye(h.shape[0], dtype=h.dtype)
        return SpectralDecomp(w, v, 0)
    w, v, sweeps, ok = kernels.jacobi_hermitian(h, off_tol, MAX_SWEEPS)
    if not ok:
        raise NonConvergence(f"Jacobi did not reach off-norm {off_tol:.3e} in {MAX_SWEEPS} sweeps")
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    if not np.iscomplexobj(h):
        v = v.real.copy()
    return SpectralDecomp(w, v, int(sweeps))


def eigvals_desc(a, tol=None) -> np.ndarray:
    return eig_herm(a, tol).eigenvalues


def spectral_norm(a) -> float:
    """Operator 2-norm; for Hermitian input this is the largest |eigenvalue|."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if np.allclose(a, np.conj(a).T, rtol=0, atol=0):
        w = eig_herm(a).eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))
    w = eig_herm(np.conj(a).T @ a).eigenvalues
    return float(np.sqrt(max(w[0], 0.0)))


def lambda_min(a) -> float:
    return float(eig_herm(a).eigenvalues[-1])


def lambda_max(a) -> float:
    return float(eig_herm(a).eigenvalues[0])


def psd_threshold(a, tol=None, w=None) -> float:
    tol = _tol(tol)
    if w is None:
        w = eig_herm(a, tol).eigenvalues
    scale = max(abs(w[0]), abs(w[-1]))
    return tol.threshold(scale)


def is_psd(a, tol: Tolerance | None = None) -> bool:
    """True iff ``lambda_min(a) >= -(rtol * ||a||_2 + atol)``."""
    tol = _tol(tol)
    w = eig_herm(a, tol).eigenvalues
    return bool(w[-1] >= -psd_threshold(a, tol, w))


def _check_same_dim(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def loewner_margin(a, b) -> float:
    """``lambda_min(b - a)``; negative values measure how far ``a <= b`` fails."""
    a, b = _check_same_dim(a, b)
    return lambda_min(b - a)


def loewner_leq(a, b, tol: Tolerance | None = None) -> bool:
    a, b = _check_same_dim(a, b)
    return is_psd(b - a, tol)


def sqrt_psd(a, tol: Tolerance | None = None) -> np.ndarray:
    tol = _tol(tol)
    d = eig_herm(a, tol)
    if d.eigenvalues[-1] < -psd_threshold(a, tol, d.eigenvalues):
        raise NotPsd(f"lambda_min = {d.eigenvalues[-1]:.3e}")
    return d.reconstruct(np.sqrt(np.clip(d.eigenvalues, 0.0, None)))


def inv_psd(a, tol: Tolerance | None = None) -> np.ndarray:
    tol = _tol(tol)
    d = eig_herm(a, tol)
    w = d.eigenvalues
    scale = max(abs(w[0]), abs(w[-1]))
    if w[-1] <= tol.rtol * scale or scale == 0.0:
        raise Singular(f"lambda_min = {w[-1]:.3e} below invertibility margin {tol.rtol * scale:.3e}")
    return d.reconstruct(1.0 / w)


def is_contraction(c, tol: Tolerance | None = None) -> bool:
    """True iff the largest singular value of ``c`` is at most ``1 + rtol``."""
    tol = _tol(tol)
    c = as_matrix(c)
    s2 = eig_herm(adjoint(c) @ c, tol).eigenvalues[0]
    return bool(np.sqrt(max(s2, 0.0)) <= 1.0 + tol.rtol)


def is_projection(p, tol: Tolerance | None = None) -> bool:
    tol = _tol(tol)
    p = np.asarray(p)
    err = np.linalg.norm(p @ p - p) + np.linalg.norm(p - adjoint(p))
    return bool(err <= tol.threshold(max(1.0, np.linalg.norm(p))) * 10)


# ----------------------------------------------------------------------------
# samplers; ``seed`` may be an int, a SeedSequence or a Generator


def rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _ginibre(rng, dim, real=False):
    if real:
        return rng.standard_normal((dim, dim))
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


def rand_unitary(dim: int, seed=None, real=False) -> np.ndarray:
    """Haar-distributed unitary (orthogonal if ``real``) via phase-fixed QR."""
    rng = rng_from(seed)
    q, r = np.linalg.qr(_ginibre(rng, dim, real))
    d = np.diag(r)
    return q * (d / np.abs(d))


def rand_hermitian(dim: int, seed=None, scale=1.0, real=False) -> np.ndarray:
    rng = rng_from(seed)
    return herm(scale * _ginibre(rng, dim, real))


def rand_psd(dim: int, seed=None, scale: float = 1.0, min_eig: float = 0.0, real=False) -> np.ndarray:
    """Random ``g* g`` rescaled so its spectral norm lies in ``(0, scale]``.

    ``min_eig > 0`` compresses the spectrum into ``[min_eig, scale]``, which
    gives invertible samples with controlled conditioning.
    """
    rng = rng_from(seed)
    g = _ginibre(rng, dim, real)
    x = herm(adjoint(g) @ g)
    top = eig_herm(x).eigenvalues[0]
    u = 1.0 - rng.random()  # in (0, 1]
    x = x / top * u
    if min_eig > 0.0:
        x = herm((scale - min_eig) * x + min_eig * np.eye(dim))
    else:
        x = herm(scale * x)
    return x


def rand_positive_contraction(dim: int, seed=None, real=False, edge_prob=0.15) -> np.ndarray:
    """``V diag(u) V*`` with ``u`` in [0, 1]; endpoints 0 and 1 get extra mass."""
    rng = rng_from(seed)
    v = rand_unitary(dim, rng, real)
    u = rng.random(dim)
    edge = rng.random(dim)
    u[edge < edge_prob / 2] = 0.0
    u[(edge >= edge_prob / 2) & (edge < edge_prob)] = 1.0
    return herm((v * u) @ adjoint(v))


def rand_psd_between(a, seed=None) -> np.ndarray:
    """Random ``x`` with ``0 <= x <= a``, built as ``a^(1/2) s a^(1/2)``."""
    a = herm(a)
    rng = rng_from(seed)
    d = eig_herm(a)
    w = d.eigenvalues
    # roots of rounding-level eigenvalues would tilt the range of x off that of a
    w = np.where(w > 1e-12 * max(1.0, abs(w[0])), w, 0.0)
    r = d.reconstruct(np.sqrt(w))
    s = rand_positive_contraction(a.shape[0], rng, real=not np.iscomplexobj(a))
    return herm(r @ s @ r)


def rand_contraction(dim: int, seed=None, cls: str = "positive", real=False) -> np.ndarray:
    """Random contraction of class ``positive``, ``general`` or ``invertible``.

    ``invertible`` draws positive contractions with spectrum in [0.05, 1].
    """
    rng = rng_from(seed)
    if cls == "positive":
        return rand_positive_contraction(dim, rng, real)
    if cls == "invertible":
        v = rand_unitary(dim, rng, real)
        u = 0.05 + 0.95 * rng.random(dim)
        return herm((v * u) @ adjoint(v))
    if cls == "general":
        u = rand_unitary(dim, rng, real)
        w = rand_unitary(dim, rng, real)
        s = rng.random(dim)
        s[rng.random(dim) < 0.1] = 1.0
        return (u * s) @ adjoint(w)
    raise ValueError(f"unknown contraction class {cls!r}")


# ----------------------------------------------------------------------------
# matrix JSON: {"dim": n, "re": [[...]], "im": [[...]]}


def matrix_to_json(a) -> dict:
    a = np.asarray(a)
    out = {"dim": int(a.shape[0]), "re": np.real(a).astype(float).tolist()}
    if np.iscomplexobj(a) and np.any(np.imag(a) != 0):
        out["im"] = np.imag(a).astype(float).tolist()
    return out


def matrix_from_json(obj, hermitian: bool = True) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (dim, dim):
        raise DimMismatch(f"'re' has shape {re.shape}, expected ({dim}, {dim})")
    a = re
    if obj.get("im") is not None:
        im = np.asarray(obj["im"], dtype=np.float64)
        if im.shape != (dim, dim):
            raise DimMismatch(f"'im' has shape {im.shape}, expected ({dim}, {dim})")
        if np.any(im != 0):
            a = re + 1j * im
    if not hermitian:
        return as_matrix(a)
    skew = np.linalg.norm(a - np.conj(a).T)
    if skew > 1e-9 * max(1.0, np.linalg.norm(a)):
        raise ValueError(f"matrix JSON is not Hermitian (||a - a*||_F = {skew:.3e})")
    return herm(a)
