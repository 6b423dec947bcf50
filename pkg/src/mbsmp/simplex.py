"""Bounded-variable revised simplex (primal and dual) on dense arrays.

Solves ``min c.x  s.t.  A x <= b,  lb <= x <= ub`` with finite lower bounds
and possibly infinite upper bounds. One slack per row is appended, so the
all-slack basis always exists. The model can grow by rows and have its
bounds changed between solves; the last basis is reused (warm start), which
is what a cutting-plane master needs.

Strategy per solve: if the current basis is dual feasible (always true for
a cutting-plane master with nonnegative costs) the dual simplex runs
straight to optimality. Otherwise phase 1 is a dual simplex on the zero
objective (which is trivially dual feasible) followed by a primal simplex on
the true objective. After a run of degenerate pivots both methods switch to
Bland's rule, which guarantees termination.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_AT_LOWER, _AT_UPPER, _BASIC = 0, 1, 2


class SimplexError(RuntimeError):
    pass


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int = 0
    duals: np.ndarray | None = None


class BoundedSimplex:
    feas_tol = 1e-9
    dual_tol = 1e-9
    pivot_tol = 1e-9
    refactor_every = 64
    bland_after = 50

    def __init__(self, c, A=None, b=None, lb=None, ub=None, max_iter=100000):
        self.c = np.array(c, dtype=float).reshape(-1)
        n = len(self.c)
        self.n = n
        self.A = np.zeros((0, n)) if A is None else np.array(A, dtype=float).reshape(-1, n)
        self.b = np.zeros(0) if b is None else np.array(b, dtype=float).reshape(-1)
        if len(self.b) != self.A.shape[0]:
            raise ValueError("A and b disagree on the number of rows")
        self.lb = np.zeros(n) if lb is None else np.array(lb, dtype=float)
        self.ub = np.full(n, np.inf) if ub is None else np.array(ub, dtype=float)
        if np.any(~np.isfinite(self.lb)):
            raise ValueError("lower bounds must be finite")
        self.max_iter = max_iter
        m = self.A.shape[0]
        self.basis = list(range(n, n + m))
        self.state = np.full(n + m, _AT_LOWER, dtype=np.int8)
        self.state[n:] = _BASIC
        self._binv = np.eye(m)
        self._fresh = True
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.A.shape[0]

    # -- model edits -------------------------------------------------------

    def add_rows(self, rows, rhs):
        rows = np.array(rows, dtype=float).reshape(-1, self.n)
        rhs = np.array(rhs, dtype=float).reshape(-1)
        if len(rows) == 0:
            return
        m0, k = self.m, len(rows)
        # structural part of state keeps its indices; slacks shift by nothing
        self.A = np.vstack([self.A, rows])
        self.b = np.concatenate([self.b, rhs])
        self.state = np.concatenate([self.state, np.full(k, _BASIC, dtype=np.int8)])
        new_slacks = list(range(self.n + m0, self.n + m0 + k))
        # [[B, 0], [R_B, I]]^-1 = [[Binv, 0], [-R_B Binv, I]]
        r_b = self._columns(self.basis, rows_only=rows)
        binv = np.zeros((m0 + k, m0 + k))
        binv[:m0, :m0] = self._binv
        binv[m0:, :m0] = -r_b @ self._binv
        binv[m0:, m0:] = np.eye(k)
        self._binv = binv
        self.basis = self.basis + new_slacks

    def remove_rows(self, rows):
        """Drop rows whose slacks are basic; the rest of the basis stays valid."""
        rows = sorted(set(int(i) for i in rows))
        if not rows:
            return
        n, m = self.n, self.m
        for i in rows:
            if self.state[n + i] != _BASIC:
                raise SimplexError(f"row {i} is binding; only rows with basic slacks can go")
        keep = np.ones(m, dtype=bool)
        keep[rows] = False
        new_index = np.cumsum(keep) - 1
        dropped = {n + i for i in rows}
        basis = []
        for j in self.basis:
            if j in dropped:
                continue
            basis.append(j if j < n else n + int(new_index[j - n]))
        self.A = self.A[keep]
        self.b = self.b[keep]
        self.state = np.concatenate([self.state[:n], self.state[n:][keep]])
        self.basis = basis
        self._refactor()

    def set_bounds(self, j, lo, hi):
        self.lb[j] = lo
        self.ub[j] = hi
        if self.state[j] == _AT_UPPER and not np.isfinite(hi):
            self.state[j] = _AT_LOWER

    def get_basis(self):
        return list(self.basis), self.state.copy()

    def set_basis(self, basis, state):
        """Restore a basis saved from this model, possibly with fewer rows."""
        m_old = len(basis)
        n = self.n
        state = np.asarray(state, dtype=np.int8)
        full = np.empty(n + self.m, dtype=np.int8)
        full[:n] = state[:n]
        full[n:n + m_old] = state[n:n + m_old]
        full[n + m_old:] = _BASIC
        self.basis = list(basis) + list(range(n + m_old, n + self.m))
        self.state = full
        for j in range(n):
            if full[j] == _AT_UPPER and not np.isfinite(self.ub[j]):
                full[j] = _AT_LOWER
        self._refactor()

    # -- linear algebra ----------------------------------------------------

    def _columns(self, idx, rows_only=None):
        A = self.A if rows_only is None else rows_only
        out = np.zeros((A.shape[0], len(idx)))
        m0 = self.A.shape[0] if rows_only is None else None
        for t, j in enumerate(idx):
            if j < self.n:
                out[:, t] = A[:, j]
            elif rows_only is None:
                out[j - self.n, t] = 1.0
            # slack of an old row has zero entries in the new rows
        return out

    def _refactor(self):
        if self.m == 0:
            self._binv = np.zeros((0, 0))
            return
        B = self._columns(self.basis)
        try:
            self._binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SimplexError("singular basis") from exc
        self._since_refactor = 0

    def _column(self, j):
        if j < self.n:
            return self.A[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = 1.0
        return e

    def _nonbasic_values(self):
        n = self.n
        xs = np.where(self.state[:n] == _AT_UPPER, self.ub, self.lb)
        xs = np.where(self.state[:n] == _BASIC, 0.0, xs)
        # nonbasic slacks sit at zero
        return xs

    def _primal(self):
        xs = self._nonbasic_values()
        x_b = self._binv @ (self.b - self.A @ xs)
        return xs, x_b

    def _bounds_of(self, j):
        if j < self.n:
            return self.lb[j], self.ub[j]
        return 0.0, np.inf

    def _cost(self, j, c):
        return c[j] if j < self.n else 0.0

    def _reduced_costs(self, c):
        c_b = np.array([self._cost(j, c) for j in self.basis])
        y = c_b @ self._binv
        d = np.empty(self.n + self.m)
        d[:self.n] = c - y @ self.A
        d[self.n:] = -y
        return d, y

    def _pivot(self, r, q, col):
        """Basis change: column ``q`` enters at row ``r``; col = Binv a_q."""
        piv = col[r]
        binv = self._binv
        row = binv[r] / piv
        binv -= np.outer(col, row)
        binv[r] = row
        self.basis[r] = q
        self.state[q] = _BASIC
        self._since_refactor = getattr(self, "_since_refactor", 0) + 1
        if self._since_refactor >= self.refactor_every:
            self._refactor()

    # -- algorithms --------------------------------------------------------

    def _dual_feasible(self, d):
        st = self.state
        for j in range(self.n + self.m):
            if st[j] == _BASIC:
                continue
            lo, hi = self._bounds_of(j)
            if lo == hi:
                continue
            if st[j] == _AT_LOWER and d[j] < -self.dual_tol:
                if np.isfinite(hi):
                    st[j] = _AT_UPPER
                else:
                    return False
            elif st[j] == _AT_UPPER and d[j] > self.dual_tol:
                st[j] = _AT_LOWER
        return True

    def _dual_simplex(self, c):
        """Returns OPTIMAL or INFEASIBLE; requires a dual feasible basis."""
        degenerate = 0
        while True:
            if self.iterations >= self.max_iter:
                raise SimplexError("iteration limit reached")
            _, x_b = self._primal()
            bland = degenerate >= self.bland_after
            r, worst, direction = -1, self.feas_tol, 0
            for i, j in enumerate(self.basis):
                lo, hi = self._bounds_of(j)
                if x_b[i] < lo - self.feas_tol:
                    viol, sgn = lo - x_b[i], +1
                elif x_b[i] > hi + self.feas_tol:
                    viol, sgn = x_b[i] - hi, -1
                else:
                    continue
                if bland:
                    if r < 0 or j < self.basis[r]:
                        r, direction = i, sgn
                elif viol > worst:
                    r, worst, direction = i, viol, sgn
            if r < 0:
                return OPTIMAL
            d, _ = self._reduced_costs(c)
            brow = self._binv[r]
            alpha = np.empty(self.n + self.m)
            alpha[:self.n] = brow @ self.A
            alpha[self.n:] = brow
            q, best = -1, np.inf
            for j in np.flatnonzero(self.state != _BASIC):
                lo, hi = self._bounds_of(j)
                if lo == hi:
                    continue
                a = alpha[j]
                if abs(a) <= self.pivot_tol:
                    continue
                at_lower = self.state[j] == _AT_LOWER
                # x_Br = beta - sum alpha_j x_j; need x_Br moved by `direction`
                if direction > 0:
                    ok = (at_lower and a < 0) or (not at_lower and a > 0)
                else:
                    ok = (at_lower and a > 0) or (not at_lower and a < 0)
                if not ok:
                    continue
                ratio = abs(d[j]) / abs(a)
                if ratio < best - 1e-12 or (ratio <= best + 1e-12 and (
                        (bland and j < q) or (not bland and abs(a) > abs(alpha[q])))):
                    q, best = j, ratio
            if q < 0:
                return INFEASIBLE
            degenerate = degenerate + 1 if best <= 1e-12 else 0
            leaving = self.basis[r]
            col = self._binv @ self._column(q)
            self._pivot(r, q, col)
            self.state[leaving] = _AT_LOWER if direction > 0 else _AT_UPPER
            self.iterations += 1

    def _primal_simplex(self, c):
        """Returns OPTIMAL or UNBOUNDED; requires a primal feasible basis."""
        degenerate = 0
        while True:
            if self.iterations >= self.max_iter:
                raise SimplexError("iteration limit reached")
            d, _ = self._reduced_costs(c)
            bland = degenerate >= self.bland_after
            q, best = -1, self.dual_tol
            for j in np.flatnonzero(self.state != _BASIC):
                lo, hi = self._bounds_of(j)
                if lo == hi:
                    continue
                if self.state[j] == _AT_LOWER and d[j] < -self.dual_tol:
                    score = -d[j]
                elif self.state[j] == _AT_UPPER and d[j] > self.dual_tol:
                    score = d[j]
                else:
                    continue
                if bland:
                    q = j
                    break
                if score > best:
                    q, best = j, score
            if q < 0:
                return OPTIMAL
            increase = self.state[q] == _AT_LOWER
            col = self._binv @ self._column(q)
            _, x_b = self._primal()
            step = col if increase else -col  # x_B moves by -step * t
            lo_q, hi_q = self._bounds_of(q)
            t_max, r, r_to_lower = hi_q - lo_q, -1, True
            for i, j in enumerate(self.basis):
                s = step[i]
                if abs(s) <= self.pivot_tol:
                    continue
                lo, hi = self._bounds_of(j)
                if s > 0:
                    t = (x_b[i] - lo) / s
                    to_lower = True
                elif np.isfinite(hi):
                    t = (x_b[i] - hi) / s
                    to_lower = False
                else:
                    continue
                t = max(t, 0.0)
                better = t < t_max - 1e-12
                tie = abs(t - t_max) <= 1e-12 and r >= 0 and (
                    (bland and j < self.basis[r]) or (not bland and abs(s) > abs(step[r])))
                if better or tie:
                    t_max, r, r_to_lower = t, i, to_lower
            if not np.isfinite(t_max):
                return UNBOUNDED
            degenerate = degenerate + 1 if t_max <= 1e-12 else 0
            self.iterations += 1
            if r < 0:
                # bound flip of the entering variable
                self.state[q] = _AT_UPPER if increase else _AT_LOWER
                continue
            leaving = self.basis[r]
            self._pivot(r, q, col)
            self.state[leaving] = _AT_LOWER if r_to_lower else _AT_UPPER

    def solve(self) -> LpResult:
        if np.any(self.lb > self.ub + self.feas_tol):
            return LpResult(INFEASIBLE, None, np.inf, self.iterations)
        if self._fresh:
            self._refactor()
            self._fresh = False
        start = self.iterations
        d, _ = self._reduced_costs(self.c)
        if self._dual_feasible(d):
            status = self._dual_simplex(self.c)
        else:
            status = self._dual_simplex(np.zeros(self.n))
            if status == OPTIMAL:
                status = self._primal_simplex(self.c)
        if status != OPTIMAL:
            return LpResult(status, None, np.inf if status == INFEASIBLE else -np.inf,
                            self.iterations - start)
        self._refactor()
        xs, x_b = self._primal()
        x = np.concatenate([xs, np.zeros(self.m)])
        for i, j in enumerate(self.basis):
            x[j] = x_b[i]
        x = x[:self.n]
        x = np.clip(x, self.lb, self.ub)
        _, y = self._reduced_costs(self.c)
        return LpResult(OPTIMAL, x, float(self.c @ x), self.iterations - start, duals=y)


def linprog(c, A_ub=None, b_ub=None, lb=None, ub=None, max_iter=100000) -> LpResult:
    """One-shot convenience wrapper: ``min c.x, A_ub x <= b_ub, lb <= x <= ub``."""
    return BoundedSimplex(c, A_ub, b_ub, lb, ub, max_iter=max_iter).solve()
