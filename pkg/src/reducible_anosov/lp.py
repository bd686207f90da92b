"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``maximize c.x  subject to  A x <= b`` with ``x`` free.  Problem sizes in
this package are tiny, so determinism matters more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

COST_TOL = 1e-9
PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    status: str
    point: np.ndarray | None
    value: float | None


def _simplex(tab: np.ndarray, basis: list[int], obj: np.ndarray, n_cols: int, max_iter: int) -> str:
    """Maximize obj over the tableau in place.  ``tab`` is (rows, n_cols + 1)
    with the right-hand side in the last column."""
    for _ in range(max_iter):
        reduced = obj[:n_cols] - obj[basis] @ tab[:, :n_cols]
        entering = next((j for j in range(n_cols) if reduced[j] > COST_TOL), None)
        if entering is None:
            return OPTIMAL
        col = tab[:, entering]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        leave = min(ties, key=lambda i: basis[i])
        _pivot(tab, leave, entering)
        basis[leave] = entering
    raise LPError("simplex iteration cap reached")


def _pivot(tab: np.ndarray, r: int, c: int) -> None:
    tab[r] /= tab[r, c]
    col = tab[:, c].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])


def maximize(c, A, b, *, max_iter: int = 50_000) -> LPResult:
    """maximize c.x subject to A x <= b, x unrestricted in sign."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    n = c.size
    m = b.size
    if A.shape != (m, n):
        raise ValueError(f"constraint matrix shape {A.shape} does not match ({m}, {n})")
    if m == 0:
        if np.any(np.abs(c) > 0):
            return LPResult(UNBOUNDED, None, None)
        return LPResult(OPTIMAL, np.zeros(n), 0.0)

    neg = b < 0
    n_art = int(neg.sum())
    # columns: u (n), v (n), slack (m), artificial (n_art)
    n_cols = 2 * n + m + n_art
    tab = np.zeros((m, n_cols + 1))
    tab[:, :n] = A
    tab[:, n : 2 * n] = -A
    tab[:, 2 * n : 2 * n + m] = np.eye(m)
    tab[:, -1] = b
    tab[neg] *= -1
    basis = []
    art = 2 * n + m
    for i in range(m):
        if neg[i]:
            tab[i, art] = 1.0
            basis.append(art)
            art += 1
        else:
            basis.append(2 * n + i)

    if n_art:
        obj1 = np.zeros(n_cols)
        obj1[2 * n + m :] = -1.0
        _simplex(tab, basis, obj1, n_cols, max_iter)
        if tab[:, -1] @ obj1[basis] < -FEAS_TOL * max(1.0, np.abs(b).max()):
            return LPResult(INFEASIBLE, None, None)
        keep = []
        for i in range(m):
            if basis[i] >= 2 * n + m:
                j = next((j for j in range(2 * n + m) if abs(tab[i, j]) > PIVOT_TOL), None)
                if j is None:
                    continue
                _pivot(tab, i, j)
                basis[i] = j
            keep.append(i)
        tab = np.hstack([tab[keep, : 2 * n + m], tab[keep, -1:]])
        basis = [basis[i] for i in keep]
        n_cols = 2 * n + m

    obj = np.zeros(n_cols)
    obj[:n] = c
    obj[n : 2 * n] = -c
    status = _simplex(tab, basis, obj, n_cols, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, None)
    z = np.zeros(n_cols)
    z[basis] = tab[:, -1]
    x = z[:n] - z[n : 2 * n]
    return LPResult(OPTIMAL, x, float(c @ x))


def minimize(c, A, b, **kw) -> LPResult:
    res = maximize(-np.asarray(c, dtype=float), A, b, **kw)
    if res.status != OPTIMAL:
        return res
    return LPResult(OPTIMAL, res.point, -res.value)
