"""Two-phase primal simplex for LPs with bounded variables.

Solves ``min c x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq``,
``lb <= x <= ub``. The basis inverse is kept dense and updated in product
form, with a periodic refactorisation. Nonbasic variables sit at one of
their bounds; the ratio test includes the entering variable's own bound
flip. Pricing is Dantzig's rule, switching to Bland's rule after a run of
degenerate pivots and back once the objective moves again.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = "optimal", "infeasible", "unbounded", "iteration_limit"

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 64
STALL_LIMIT = 30


class _Tableau:
    def __init__(self, A, b, c, lb, ub):
        self.A = sparse.csc_matrix(A)
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.lb = np.asarray(lb, dtype=float)
        self.ub = np.asarray(ub, dtype=float)
        self.m, self.n = self.A.shape
        self.iterations = 0

    def column(self, j) -> np.ndarray:
        col = np.zeros(self.m)
        s, e = self.A.indptr[j], self.A.indptr[j + 1]
        col[self.A.indices[s:e]] = self.A.data[s:e]
        return col

    def refactor(self):
        B = self.A[:, self.basis].toarray()
        self.Binv = np.linalg.inv(B)
        rhs = self.b - self.A @ np.where(self.in_basis, 0.0, self.x)
        self.x[self.basis] = self.Binv @ rhs

    def start(self, basis, x):
        self.basis = np.array(basis, dtype=int)
        self.in_basis = np.zeros(self.n, dtype=bool)
        self.in_basis[self.basis] = True
        self.x = np.array(x, dtype=float)
        self.refactor()

    def run(self, cost, max_iter) -> str:
        stall = 0
        bland = False
        since_refactor = 0
        last_obj = float(cost @ self.x)
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            y = cost[self.basis] @ self.Binv
            d = cost - self.A.T @ y
            free = ~self.in_basis & (self.ub - self.lb > 0)
            at_upper = self.x >= self.ub - FEAS_TOL
            score = np.where(at_upper, d, -d)  # positive = improving
            score[~free] = 0.0
            score[at_upper & ~np.isfinite(self.ub)] = 0.0
            eligible = np.flatnonzero(score > OPT_TOL)
            if eligible.size == 0:
                return OPTIMAL
            j = int(eligible[0]) if bland else int(eligible[np.argmax(score[eligible])])
            direction = -1.0 if at_upper[j] else 1.0
            alpha = self.Binv @ self.column(j)
            delta = direction * alpha  # basic x decreases by delta * theta
            xb = self.x[self.basis]
            lbb, ubb = self.lb[self.basis], self.ub[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = delta > PIVOT_TOL
            inc = delta < -PIVOT_TOL
            ratios[dec] = (xb[dec] - lbb[dec]) / delta[dec]
            ratios[inc] = (ubb[inc] - xb[inc]) / -delta[inc]
            ratios = np.maximum(ratios, 0.0)
            theta_flip = self.ub[j] - self.lb[j]
            theta_row = ratios.min() if self.m else np.inf
            if not np.isfinite(theta_row) and not np.isfinite(theta_flip):
                return UNBOUNDED
            self.iterations += 1
            if theta_flip <= theta_row:
                theta = theta_flip
                self.x[self.basis] = xb - theta * delta
                self.x[j] = self.ub[j] if direction > 0 else self.lb[j]
            else:
                theta = theta_row
                ties = np.flatnonzero(ratios <= theta_row + 1e-12)
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])
                leaving = self.basis[r]
                self.x[self.basis] = xb - theta * delta
                self.x[j] += direction * theta
                # leaving variable settles on the bound it reached
                self.x[leaving] = lbb[r] if delta[r] > 0 else ubb[r]
                self.basis[r] = j
                self.in_basis[j] = True
                self.in_basis[leaving] = False
                piv = alpha[r]
                row = self.Binv[r] / piv
                self.Binv -= np.outer(alpha, row)
                self.Binv[r] = row
                since_refactor += 1
                if since_refactor >= REFACTOR_EVERY:
                    self.refactor()
                    since_refactor = 0
            obj = float(cost @ self.x)
            if obj < last_obj - 1e-12:
                stall = 0
                bland = False
            else:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True
            last_obj = obj


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None, max_iter=50_000):
    """Return ``(status, x, objective, iterations)``.

    ``lb``/``ub`` must be finite; ``x`` is a basic solution when optimal.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = sparse.csr_matrix((0, n)) if A_ub is None else sparse.csr_matrix(A_ub)
    A_eq = sparse.csr_matrix((0, n)) if A_eq is None else sparse.csr_matrix(A_eq)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.ones(n) if ub is None else np.asarray(ub, dtype=float)
    if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
        raise ValueError("simplex() needs finite variable bounds")
    if np.any(lb > ub + FEAS_TOL):
        return INFEASIBLE, None, np.nan, 0
    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me

    # columns: structural | slacks (ub rows) | artificials (all rows)
    A = sparse.bmat(
        [[A_ub, sparse.eye(mu), None], [A_eq, None, None]], format="csc"
    ) if m else sparse.csc_matrix((0, n))
    if A.shape[1] < n + mu:
        A = sparse.hstack([A, sparse.csc_matrix((m, n + mu - A.shape[1]))], format="csc")
    b = np.concatenate([b_ub, b_eq])
    x0 = np.concatenate([lb, np.zeros(mu)])
    resid = b - A @ x0
    basis = []
    art_rows, art_sign = [], []
    for i in range(m):
        if i < mu and resid[i] >= 0:
            basis.append(n + i)
        else:
            art_rows.append(i)
            art_sign.append(1.0 if resid[i] >= 0 else -1.0)
    na = len(art_rows)
    art = sparse.csc_matrix((art_sign, (art_rows, np.arange(na))), shape=(m, na))
    A = sparse.hstack([A, art], format="csc")
    basis.extend(n + mu + np.arange(na))
    basis = np.array(basis, dtype=int)
    # basis order must follow rows: slack i / artificial for row i sits in row i
    row_of = np.empty(m, dtype=int)
    row_of[: len(basis) - na] = [b_ - n for b_ in basis[: len(basis) - na]]
    row_of[len(basis) - na:] = art_rows
    order = np.argsort(row_of)
    basis = basis[order]

    full_lb = np.concatenate([lb, np.zeros(mu), np.zeros(na)])
    full_ub = np.concatenate([ub, np.full(mu, np.inf), np.full(na, np.inf)])
    x = np.concatenate([x0, np.zeros(na)])
    tab = _Tableau(A, b, np.zeros(A.shape[1]), full_lb, full_ub)
    tab.start(basis, x)

    if na:
        phase1 = np.zeros(A.shape[1])
        phase1[n + mu:] = 1.0
        status = tab.run(phase1, max_iter)
        if status == ITERATION_LIMIT:
            return status, None, np.nan, tab.iterations
        infeas = float(tab.x[n + mu:].sum())
        if infeas > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return INFEASIBLE, None, np.nan, tab.iterations
        # artificials are pinned to zero for phase 2
        tab.ub[n + mu:] = 0.0
        tab.x[n + mu:] = np.clip(tab.x[n + mu:], 0.0, 0.0)
        tab.refactor()

    cost = np.concatenate([c, np.zeros(mu + na)])
    status = tab.run(cost, max_iter)
    xs = tab.x[:n].copy()
    if status != OPTIMAL:
        return status, None, np.nan, tab.iterations
    return OPTIMAL, np.clip(xs, lb, ub), float(c @ xs), tab.iterations
