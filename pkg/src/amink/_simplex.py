"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Only meant for the small membership/radial programs that arise from
vertex-represented polytopes (a few hundred columns at most).
"""

import numpy as np

PIVOT_TOL = 1e-12


class LPInfeasible(ArithmeticError):
    pass


class LPUnbounded(ArithmeticError):
    pass


def _pivot(T, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]


def _iterate(T, basis, ncols, tol, max_iter):
    """Run simplex pivots on tableau ``T`` whose last row holds reduced costs.

    The objective row stores ``c_j - c_B B^-1 A_j``; we maximise, so a
    column enters while its reduced cost is positive.
    """
    m = T.shape[0] - 1
    for _ in range(max_iter):
        costs = T[m, :ncols]
        entering = np.flatnonzero(costs > tol)
        if entering.size == 0:
            return
        col = int(entering[0])  # Bland: lowest index
        column = T[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise LPUnbounded("objective unbounded above")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        # Bland: among tied rows leave the basic variable with lowest index
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, row, col)
        basis[row] = col
    raise RuntimeError("simplex iteration limit reached")


def simplex_max(c, A_eq, b_eq, tol=PIVOT_TOL, max_iter=10000):
    """Maximise ``c @ x`` subject to ``A_eq @ x == b_eq`` and ``x >= 0``.

    Returns ``(x, value)``. Raises ``LPInfeasible`` or ``LPUnbounded``.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float).ravel()
    m, nv = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase I: artificial basis, maximise -sum(artificials)
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :nv] = A.sum(axis=0)
    T[m, -1] = b.sum()
    basis = list(range(nv, nv + m))
    _iterate(T, basis, nv + m, tol, max_iter)

    infeas = T[:m, -1][np.array(basis) >= nv].sum() if m else 0.0
    if infeas > 1e-9 * max(1.0, np.abs(b).max(initial=0.0)):
        raise LPInfeasible("no feasible point")

    # drive zero-level artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= nv:
            cand = np.flatnonzero(np.abs(T[i, :nv]) > tol)
            if cand.size == 0:
                continue
            _pivot(T, i, int(cand[0]))
            basis[i] = int(cand[0])
        keep.append(i)

    # Phase II on the original columns
    T2 = np.zeros((len(keep) + 1, nv + 1))
    T2[:-1, :nv] = T[keep, :nv]
    T2[:-1, -1] = T[keep, -1]
    basis2 = [basis[i] for i in keep]
    cb = c[basis2]
    T2[-1, :nv] = c - cb @ T2[:-1, :nv]
    T2[-1, -1] = -(cb @ T2[:-1, -1])
    _iterate(T2, basis2, nv, tol, max_iter)

    x = np.zeros(nv)
    x[basis2] = T2[:-1, -1]
    return x, float(c @ x)
