"""Independent reference implementations used to cross-check the library.

Nothing in this module may import from banditsrl internals beyond plain
data; every oracle recomputes its answer from first principles (or from
a numpy routine the library does not use for the same quantity).
"""

import math

import numpy as np


def charpoly_min_eig(a):
    """Minimum eigenvalue via explicit characteristic polynomial, d <= 3."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if d == 1:
        return float(a[0, 0])
    if d == 2:
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        roots = np.roots([1.0, -tr, det])
    elif d == 3:
        tr = float(np.trace(a))
        m2 = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
              + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
              + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        det = (a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
               - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
               + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))
        roots = np.roots([1.0, -tr, m2, -det])
    else:
        raise ValueError("charpoly oracle only covers d <= 3")
    assert np.max(np.abs(roots.imag)) < 1e-6 * max(1.0, np.max(np.abs(roots)))
    return float(np.min(roots.real))


def power_min_eig(a, iters=20000, seed=0):
    """Minimum eigenvalue via power iteration on a spectral shift of -A."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    # Gershgorin upper bound guarantees shift - A is PSD with dominant
    # eigenvalue shift - lambda_min.
    shift = float(np.max(np.sum(np.abs(a), axis=1))) + 1.0
    shifted = shift * np.eye(d) - a
    rng = np.random.default_rng(seed)
    best = -math.inf
    for _ in range(3):
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        rq = 0.0
        for _ in range(iters):
            w = shifted @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
            new_rq = float(v @ (shifted @ v))
            if abs(new_rq - rq) <= 1e-14 * shift:
                rq = new_rq
                break
            rq = new_rq
        best = max(best, rq)
    return shift - best


def grid_constrained_ls_1d(phis, ys, bound, coarse=20001, refine=60):
    """Ball-constrained least squares in d=1 by grid search plus bisected
    refinement on the derivative; independent of any normal-equation
    solve."""
    phis = np.asarray(phis, dtype=float).reshape(-1)
    ys = np.asarray(ys, dtype=float).reshape(-1)

    def mse(theta):
        return float(np.mean((phis * theta - ys) ** 2))

    grid = np.linspace(-bound, bound, coarse)
    vals = np.mean((np.outer(grid, phis) - ys) ** 2, axis=1)
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, coarse - 1)]
    for _ in range(refine):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if mse(m1) <= mse(m2):
            hi = m2
        else:
            lo = m1
    theta = 0.5 * (lo + hi)
    return theta, mse(theta)


def projected_gradient_ls(phis, ys, bound, iters=200000):
    """Ball-constrained least squares by projected gradient descent."""
    phis = np.asarray(phis, dtype=float)
    ys = np.asarray(ys, dtype=float).reshape(-1)
    n, d = phis.shape
    gram = phis.T @ phis / n
    bvec = phis.T @ ys / n
    # The gradient 2(G theta - b) has Lipschitz constant 2 lambda_max(G),
    # so 1 / (2 lambda_max) keeps every eigenmode strictly contractive.
    lip = float(np.linalg.norm(gram, 2))
    step = 1.0 / max(2.0 * lip, 1e-12)
    theta = np.zeros(d)
    for _ in range(iters):
        prev = theta
        theta = theta - step * 2.0 * (gram @ theta - bvec)
        norm = float(np.linalg.norm(theta))
        if norm > bound:
            theta *= bound / norm
        if float(np.linalg.norm(theta - prev)) < 1e-15:
            break
    return theta, float(np.mean((phis @ theta - ys) ** 2))


def direct_rls(phis, ys, lam):
    """Ridge solution by direct assembly and numpy inversion."""
    phis = np.asarray(phis, dtype=float)
    ys = np.asarray(ys, dtype=float).reshape(-1)
    v = lam * np.eye(phis.shape[1]) + phis.T @ phis
    vinv = np.linalg.inv(v)
    theta = vinv @ (phis.T @ ys)
    return v, vinv, theta


def glr_direct(rep_feats_x, theta, vinv):
    """Generalized likelihood ratio for one context by the closed formula.

    rep_feats_x: (A, d) feature block of the context; theta, vinv from a
    fitted design.  Returns (statistic, greedy action).
    """
    scores = rep_feats_x @ theta
    star = int(np.argmax(scores))
    best = math.inf
    for a in range(rep_feats_x.shape[0]):
        if a == star:
            continue
        diff = rep_feats_x[star] - rep_feats_x[a]
        num = float(diff @ theta)
        den = math.sqrt(max(float(diff @ (vinv @ diff)), 0.0))
        if num == 0.0:
            best = min(best, 0.0)
        elif den > 0.0:
            best = min(best, num / den)
    return best, star
