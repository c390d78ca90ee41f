"""Dense tableau simplex for the small exact LPs used by chain scoring.

Maximizes c.x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0, with all
right-hand sides nonnegative. Two phases with artificial variables for
the equalities; Bland's smallest-index rule throughout, so the solve is
deterministic and cannot cycle.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError, ValidationError

_PIVOT_TOL = 1e-9
_MAX_PIVOTS = 200_000


def _run_simplex(tableau: np.ndarray, basis: np.ndarray, n_cols: int) -> None:
    """Bland-rule pivoting on a tableau whose last row is the objective.

    The objective row holds reduced costs for maximization: entry j < 0
    means column j improves the objective. Mutates tableau and basis.
    """
    for _ in range(_MAX_PIVOTS):
        obj = tableau[-1, :n_cols]
        entering_candidates = np.flatnonzero(obj < -_PIVOT_TOL)
        if entering_candidates.size == 0:
            return
        col = int(entering_candidates[0])
        column = tableau[:-1, col]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:
            raise NumericError("LP is unbounded")
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[np.flatnonzero(ratios <= best + _PIVOT_TOL * (1 + abs(best)))]
        row = int(tied[np.argmin(basis[tied])])
        _pivot(tableau, row, col)
        basis[row] = col
    raise NumericError("simplex exceeded the pivot budget")


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def simplex_maximize(
    objective: np.ndarray,
    a_ub: np.ndarray,
    b_ub: np.ndarray,
    a_eq: np.ndarray,
    b_eq: np.ndarray,
    with_duals: bool = False,
) -> tuple[np.ndarray, float] | tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """Solve the LP exactly; returns (x, objective value) at a vertex.

    With ``with_duals`` additionally returns the dual values of the ub
    and eq rows (read off the slack/artificial reduced costs), which
    callers use to price candidate columns left out of a restricted LP.
    """
    c = np.asarray(objective, dtype=float)
    a_ub = np.asarray(a_ub, dtype=float).reshape(-1, c.size)
    a_eq = np.asarray(a_eq, dtype=float).reshape(-1, c.size)
    b_ub = np.asarray(b_ub, dtype=float).ravel()
    b_eq = np.asarray(b_eq, dtype=float).ravel()
    if np.any(b_ub < 0) or np.any(b_eq < 0):
        raise ValidationError("right-hand sides must be nonnegative")

    n = c.size
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq
    n_slack = m_ub
    n_art = m_eq
    width = n + n_slack + n_art + 1

    tableau = np.zeros((m + 1, width))
    tableau[:m_ub, :n] = a_ub
    tableau[:m_ub, n : n + n_slack] = np.eye(m_ub)
    tableau[:m_ub, -1] = b_ub
    tableau[m_ub:m, :n] = a_eq
    tableau[m_ub:m, n + n_slack : n + n_slack + n_art] = np.eye(m_eq)
    tableau[m_ub:m, -1] = b_eq
    basis = np.concatenate(
        [np.arange(n, n + n_slack), np.arange(n + n_slack, n + n_slack + n_art)]
    ).astype(int)

    structural = n + n_slack
    if n_art:
        # phase 1: maximize -(sum of artificials); price out the basic ones
        tableau[-1, structural : structural + n_art] = 1.0
        tableau[-1] -= tableau[m_ub:m].sum(axis=0)
        _run_simplex(tableau, basis, structural)
        if tableau[-1, -1] < -1e-7:
            raise NumericError("LP is infeasible")
        for row in np.flatnonzero(basis >= structural):
            pivots = np.flatnonzero(np.abs(tableau[row, :structural]) > _PIVOT_TOL)
            if pivots.size:
                _pivot(tableau, int(row), int(pivots[0]))
                basis[row] = int(pivots[0])

    # phase 2 objective: reduced costs of -c, priced out over the basis
    tableau[-1, :] = 0.0
    tableau[-1, :n] = -c
    for row, var in enumerate(basis):
        if var < n and abs(tableau[-1, var]) > 0:
            tableau[-1] -= tableau[-1, var] * tableau[row]
    _run_simplex(tableau, basis, structural)

    x = np.zeros(n)
    for row, var in enumerate(basis):
        if var < n:
            x[var] = tableau[row, -1]
    if not with_duals:
        return x, float(c @ x)
    dual_ub = tableau[-1, n : n + n_slack].copy()
    dual_eq = tableau[-1, n + n_slack : n + n_slack + n_art].copy()
    return x, float(c @ x), dual_ub, dual_eq
