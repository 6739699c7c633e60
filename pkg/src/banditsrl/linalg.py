"""Dense symmetric linear algebra for recursive least squares.

Everything here is sized for design matrices with a few dozen rows and
columns at most: exactly-symmetric storage, rank-one updated inverses,
Jacobi spectra, and Euclidean-ball constrained least squares.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "LinAlgError",
    "SymMatrix",
    "RlsState",
    "min_eigenvalue",
    "mahalanobis_norm",
    "constrained_ls",
    "constrained_ls_gram",
]

# Off-diagonal Frobenius mass, relative to the matrix scale, at which a
# Jacobi sweep is considered converged.
_JACOBI_OFF_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100


class LinAlgError(ValueError):
    """Raised on invalid inputs or non-convergent iterations."""


def _check_finite(arr, name):
    if not np.all(np.isfinite(arr)):
        raise LinAlgError(f"{name} contains non-finite entries")


class SymMatrix:
    """Exactly symmetric dense matrix.

    The constructor rejects arrays where ``a[i, j] != a[j, i]`` for any
    pair; use :meth:`mirrored` to build one from an array whose upper
    triangle is authoritative.  Numpy operations accept instances
    directly through the ``__array__`` protocol.
    """

    __slots__ = ("a",)

    def __init__(self, entries, *, copy=True):
        a = np.array(entries, dtype=float, copy=copy)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise LinAlgError(f"expected a square matrix, got shape {a.shape}")
        _check_finite(a, "matrix")
        if not np.array_equal(a, a.T):
            raise LinAlgError("matrix is not exactly symmetric")
        self.a = a

    @classmethod
    def mirrored(cls, entries):
        """Build from ``entries`` keeping the upper triangle of the mean."""
        a = np.asarray(entries, dtype=float)
        # (a + a.T)/2 is bitwise symmetric: IEEE addition commutes.
        return cls(0.5 * (a + a.T), copy=False)

    @classmethod
    def identity(cls, dim, scale=1.0):
        return cls(scale * np.eye(dim), copy=False)

    @property
    def dim(self):
        return self.a.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.a.astype(dtype)
        return self.a.copy() if copy else self.a

    def __repr__(self):
        return f"SymMatrix(dim={self.dim})"


def _as_sym_array(mat):
    a = mat.a if isinstance(mat, SymMatrix) else np.asarray(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise LinAlgError(f"expected a square matrix, got shape {a.shape}")
    _check_finite(a, "matrix")
    return a


class RlsState:
    """Ridge-regularized recursive least squares for one feature map.

    Maintains ``V = lam*I + sum_s phi_s phi_s^T``, its inverse through
    rank-one (Sherman-Morrison) updates, ``b = sum_s y_s phi_s`` and
    ``theta = Vinv @ b``.  The inverse is recomputed from ``V`` every
    ``REINVERT_EVERY`` updates so rounding drift cannot accumulate over
    long runs.
    """

    REINVERT_EVERY = 1000

    __slots__ = ("dim", "lam", "t", "sum_y2", "_V", "_Vinv", "_b", "theta",
                 "_since_reinvert")

    def __init__(self, dim, lam=1.0):
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise LinAlgError(f"dim must be a positive integer, got {dim!r}")
        if not (lam > 0 and math.isfinite(lam)):
            raise LinAlgError(f"lam must be positive and finite, got {lam!r}")
        self.dim = int(dim)
        self.lam = float(lam)
        self.t = 0
        self.sum_y2 = 0.0
        self._V = self.lam * np.eye(self.dim)
        self._Vinv = np.eye(self.dim) / self.lam
        self._b = np.zeros(self.dim)
        self.theta = np.zeros(self.dim)
        self._since_reinvert = 0

    @classmethod
    def from_data(cls, phis, ys, lam=1.0):
        """Batch construction by direct Gram assembly and inversion.

        Shares no code with the rank-one update path, so the two can be
        checked against each other.
        """
        state = cls(np.asarray(phis).shape[1] if np.ndim(phis) == 2 else 1, lam)
        phis = np.asarray(phis, dtype=float).reshape(-1, state.dim)
        ys = np.asarray(ys, dtype=float).reshape(-1)
        if phis.shape[0] != ys.shape[0]:
            raise LinAlgError("phis and ys disagree on sample count")
        _check_finite(phis, "phis")
        _check_finite(ys, "ys")
        state._V = state.lam * np.eye(state.dim) + phis.T @ phis
        state._V = 0.5 * (state._V + state._V.T)
        state._Vinv = 0.5 * (np.linalg.inv(state._V) + np.linalg.inv(state._V).T)
        state._b = phis.T @ ys
        state.theta = state._Vinv @ state._b
        state.t = phis.shape[0]
        state.sum_y2 = float(ys @ ys)
        return state

    @property
    def V(self):
        return SymMatrix(self._V, copy=False)

    @property
    def Vinv(self):
        return SymMatrix(self._Vinv, copy=False)

    @property
    def b(self):
        return self._b

    def gram(self):
        """Unregularized Gram matrix ``V - lam*I`` as a fresh array."""
        g = self._V - self.lam * np.eye(self.dim)
        return 0.5 * (g + g.T)

    def update(self, phi, y):
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.dim,):
            raise LinAlgError(f"phi has shape {phi.shape}, expected ({self.dim},)")
        _check_finite(phi, "phi")
        y = float(y)
        if not math.isfinite(y):
            raise LinAlgError("y is not finite")
        u = self._Vinv @ phi
        s = 1.0 + float(phi @ u)
        self._Vinv -= np.outer(u, u) / s
        outer = np.outer(phi, phi)
        self._V += outer
        self._b += y * phi
        self.sum_y2 += y * y
        self.t += 1
        self._since_reinvert += 1
        if self._since_reinvert >= self.REINVERT_EVERY:
            self._reinvert()
        self.theta = self._Vinv @ self._b
        return self

    def _reinvert(self):
        inv = np.linalg.inv(self._V)
        self._Vinv = 0.5 * (inv + inv.T)
        self._since_reinvert = 0

    def inverse_drift(self):
        """Max-abs deviation of ``V @ Vinv`` from the identity."""
        return float(np.max(np.abs(self._V @ self._Vinv - np.eye(self.dim))))

    def copy(self):
        dup = RlsState(self.dim, self.lam)
        dup.t = self.t
        dup.sum_y2 = self.sum_y2
        dup._V = self._V.copy()
        dup._Vinv = self._Vinv.copy()
        dup._b = self._b.copy()
        dup.theta = self.theta.copy()
        dup._since_reinvert = self._since_reinvert
        return dup

    def __repr__(self):
        return f"RlsState(dim={self.dim}, lam={self.lam}, t={self.t})"


def min_eigenvalue(mat, tol=1e-10):
    """Smallest eigenvalue of a symmetric matrix by cyclic Jacobi sweeps.

    Rotations run until the off-diagonal Frobenius mass falls below
    1e-12 relative to the matrix scale, far inside any ``tol`` a caller
    can reasonably ask for.
    """
    if not (tol > 0):
        raise LinAlgError(f"tol must be positive, got {tol!r}")
    a = _as_sym_array(mat)
    if not np.array_equal(a, a.T):
        raise LinAlgError("matrix is not exactly symmetric")
    d = a.shape[0]
    if d == 1:
        return float(a[0, 0])
    a = a.copy()
    scale = math.sqrt(float(np.sum(a * a)))
    if scale == 0.0:
        return 0.0
    thresh = _JACOBI_OFF_TOL * scale
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= thresh:
            return float(np.min(np.diagonal(a)))
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= thresh / (d * d):
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(tau, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise LinAlgError("Jacobi iteration did not converge")


def mahalanobis_norm(v, m_inv):
    """``sqrt(v^T Minv v)`` where ``Minv`` is the inverse of a PD matrix."""
    v = np.asarray(v, dtype=float)
    _check_finite(v, "v")
    m = _as_sym_array(m_inv)
    if v.shape != (m.shape[0],):
        raise LinAlgError(f"v has shape {v.shape}, expected ({m.shape[0]},)")
    q = float(v @ (m @ v))
    if q < -1e-12:
        raise LinAlgError(f"quadratic form is negative ({q}); matrix not PD")
    return math.sqrt(max(q, 0.0))


def _stack_data(data):
    if isinstance(data, tuple) and len(data) == 2 and np.ndim(data[0]) == 2:
        phis = np.asarray(data[0], dtype=float)
        ys = np.asarray(data[1], dtype=float).reshape(-1)
    else:
        pairs = list(data)
        if not pairs:
            raise LinAlgError("data is empty")
        phis = np.asarray([np.asarray(p, dtype=float).reshape(-1) for p, _ in pairs])
        ys = np.asarray([float(y) for _, y in pairs])
    if phis.shape[0] != ys.shape[0] or phis.shape[0] < 1:
        raise LinAlgError("data shapes disagree")
    _check_finite(phis, "features")
    _check_finite(ys, "targets")
    return phis, ys


def constrained_ls(data, bound, lam0=1e-9, tol=1e-8, max_iter=200):
    """Least squares restricted to the Euclidean ball of radius ``bound``.

    Parameters
    ----------
    data : sequence of ``(phi, y)`` pairs, or a ``(Phi, y)`` array pair.
    bound : radius of the admissible ball for ``theta``.
    lam0 : small base ridge that keeps the normal equations solvable
        when the Gram matrix is rank deficient.
    tol : relative tolerance on the boundary condition ``|theta| = bound``.

    Returns
    -------
    (theta, mse) : the constrained minimizer and its mean squared
    residual over ``data`` (no penalty term included).
    """
    phis, ys = _stack_data(data)
    gram = phis.T @ phis
    gram = 0.5 * (gram + gram.T)
    b = phis.T @ ys
    return constrained_ls_gram(gram, b, float(ys @ ys), len(ys), bound,
                               lam0=lam0, tol=tol, max_iter=max_iter)


def constrained_ls_gram(gram, b, sum_y2, n, bound, lam0=1e-9, tol=1e-8,
                        max_iter=200):
    """Same as :func:`constrained_ls` from precomputed sufficient stats.

    ``gram = sum phi phi^T``, ``b = sum y phi``, ``sum_y2 = sum y^2``,
    ``n`` = sample count (the MSE divisor; pass 1 for already-weighted
    averages).
    """
    if not (bound > 0 and math.isfinite(bound)):
        raise LinAlgError(f"bound must be positive and finite, got {bound!r}")
    if not (lam0 > 0 and math.isfinite(lam0)):
        raise LinAlgError(f"lam0 must be positive and finite, got {lam0!r}")
    if not (tol > 0):
        raise LinAlgError(f"tol must be positive, got {tol!r}")
    g = _as_sym_array(gram)
    b = np.asarray(b, dtype=float)
    _check_finite(b, "b")
    d = g.shape[0]
    if b.shape != (d,):
        raise LinAlgError(f"b has shape {b.shape}, expected ({d},)")
    eye = np.eye(d)

    def solve_for(nu):
        return np.linalg.solve(g + (lam0 + nu) * eye, b)

    theta = solve_for(0.0)
    norm = float(np.linalg.norm(theta))
    if norm <= bound * (1.0 + tol):
        return theta, _residual_mse(g, b, sum_y2, n, theta)

    # |theta(nu)| decreases continuously in nu, so bracket then bisect.
    hi = 1.0
    for _ in range(max_iter):
        if float(np.linalg.norm(solve_for(hi))) <= bound:
            break
        hi *= 2.0
    else:
        raise LinAlgError("could not bracket the constraint multiplier")
    lo = 0.0
    nu = hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        norm = float(np.linalg.norm(solve_for(mid)))
        if norm > bound:
            lo = mid
        else:
            hi = mid
        nu = hi
        if abs(norm - bound) <= tol * bound:
            nu = mid
            break
        if hi - lo <= tol * max(1.0, hi):
            break
    else:
        raise LinAlgError("multiplier bisection did not converge")
    theta = solve_for(nu)
    return theta, _residual_mse(g, b, sum_y2, n, theta)


def _residual_mse(gram, b, sum_y2, n, theta):
    if n < 1:
        raise LinAlgError(f"n must be >= 1, got {n!r}")
    val = (float(theta @ (gram @ theta)) - 2.0 * float(b @ theta) + sum_y2) / n
    return max(val, 0.0)
