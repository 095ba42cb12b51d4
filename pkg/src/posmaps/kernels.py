"""Hot inner loops: cyclic Jacobi sweeps and subset-lattice transforms.

Every kernel exists twice: an explicit-loop version compiled with numba
and a vectorised numpy version. :func:`jacobi_hermitian` and
:func:`lattice_transform` dispatch on the active backend; both paths
produce the same rotation sequence, so results agree to rounding.
"""

import math

import numpy as np

from ._accel import get_backend, njit

# lattice transform modes
SUBSET_MOBIUS = 0
SUBSET_ZETA = 1
SUPERSET_MOBIUS = 2
SUPERSET_ZETA = 3

_THETA_BIG = 1e150
# off-diagonal entries below this are underflow noise; complex division by
# a subnormal modulus overflows, so they are zeroed instead of rotated
_TINY = 1e-290


def _rotation_py(app, aqq, g):
    theta = (aqq - app) / (2.0 * g)
    if abs(theta) > _THETA_BIG:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    return t, c, t * c


_rotation = njit(cache=True)(_rotation_py)


@njit(cache=True)
def _jacobi_loops(a, tol_off, max_sweeps):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n, dtype=np.complex128)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                z = A[p, q]
                off += z.real * z.real + z.imag * z.imag
        off = math.sqrt(2.0 * off)
        if off <= tol_off:
            w = np.empty(n)
            for i in range(n):
                w[i] = A[i, i].real
            return w, V, sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                g = abs(apq)
                if g < _TINY:
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                e = apq / g
                ec = e.conjugate()
                app = A[p, p].real
                aqq = A[q, q].real
                t, c, s = _rotation(app, aqq, g)
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * ec * akq
                    A[k, q] = s * e * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * e * aqk
                    A[q, k] = s * ec * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = app - t * g
                A[q, q] = aqq + t * g
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * ec * vkq
                    V[k, q] = s * e * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i].real
    return w, V, max_sweeps, False


def _jacobi_numpy(a, tol_off, max_sweeps):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n, dtype=np.complex128)
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(2.0 * float(np.sum(np.abs(A[iu]) ** 2)))
        if off <= tol_off:
            return A.diagonal().real.copy(), V, sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                g = abs(apq)
                if g < _TINY:
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                e = apq / g
                ec = e.conjugate()
                app = A[p, p].real
                aqq = A[q, q].real
                t, c, s = _rotation_py(app, aqq, g)
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * ec * cq
                A[:, q] = s * e * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * e * rq
                A[q, :] = s * ec * rp + c * rq
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = app - t * g
                A[q, q] = aqq + t * g
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * ec * vq
                V[:, q] = s * e * vp + c * vq
    return A.diagonal().real.copy(), V, max_sweeps, False


def jacobi_hermitian(a, tol_off, max_sweeps=100, backend=None):
    """Run cyclic Jacobi sweeps on a complex Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps, converged)`` with the
    eigenvalues in diagonal (unsorted) order.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    backend = backend or get_backend()
    if backend == "numba":
        return _jacobi_loops(a, float(tol_off), int(max_sweeps))
    return _jacobi_numpy(a, float(tol_off), int(max_sweeps))


@njit(cache=True)
def _lattice_loops(v, n, mode):
    out = v.copy()
    size = out.shape[0]
    width = out.shape[1]
    for i in range(n):
        bit = 1 << i
        for mask in range(size):
            if mode == 0 or mode == 1:
                if mask & bit:
                    src = mask ^ bit
                    for k in range(width):
                        if mode == 0:
                            out[mask, k] -= out[src, k]
                        else:
                            out[mask, k] += out[src, k]
            else:
                if not mask & bit:
                    src = mask | bit
                    for k in range(width):
                        if mode == 2:
                            out[mask, k] -= out[src, k]
                        else:
                            out[mask, k] += out[src, k]
    return out


def _lattice_numpy(v, n, mode):
    width = v.shape[1]
    # C order: bit 0 is the fastest-varying axis, i.e. axis n - 1
    cube = v.copy().reshape((2,) * n + (width,))
    for i in range(n):
        axis = n - 1 - i
        lo = [slice(None)] * (n + 1)
        hi = [slice(None)] * (n + 1)
        lo[axis] = 0
        hi[axis] = 1
        lo, hi = tuple(lo), tuple(hi)
        if mode == SUBSET_MOBIUS:
            cube[hi] -= cube[lo]
        elif mode == SUBSET_ZETA:
            cube[hi] += cube[lo]
        elif mode == SUPERSET_MOBIUS:
            cube[lo] -= cube[hi]
        else:
            cube[lo] += cube[hi]
    return cube.reshape(v.shape)


def lattice_transform(values, n, mode, backend=None):
    """Apply a Mobius/zeta transform over the subset lattice of ``n`` bits.

    ``values`` has leading axis of length ``2**n`` indexed by bitmask;
    any trailing axes are carried along (operator-valued capacities).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] != 1 << n:
        raise ValueError(f"expected leading axis of length {1 << n}, got {values.shape[0]}")
    flat = np.ascontiguousarray(values.reshape(values.shape[0], -1))
    backend = backend or get_backend()
    if backend == "numba":
        out = _lattice_loops(flat, n, mode)
    else:
        out = _lattice_numpy(flat, n, mode)
    return out.reshape(values.shape)
