"""Sparse linear programs: a floating solver returning duals and an exact rational simplex.

Dual convention: ``y[i]`` is the derivative of the optimal objective (in the
model's own sense) with respect to ``rhs[i]``.  For a maximization with
equality rows and ``x >= 0`` this is the ``y`` of ``min b.y s.t. A^T y >= c``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

SENSES = ("=", "<=", ">=")
VAR_ROLES = ("fourier", "atom", "auxiliary")
ROW_ROLES = ("C0", "IET", "IE1", "IE2", "IEC", "FCN-cover", "GFCN-congruence", "other")


class LpModel:
    """Variables are non-negative; rows are sparse with a sense and right-hand side."""

    def __init__(self, maximize: bool = True, name: str = "model"):
        self.maximize = maximize
        self.name = name
        self.var_names: list[str] = []
        self.var_roles: list[str] = []
        self.objective: dict[int, object] = {}
        self.row_names: list[str] = []
        self.row_roles: list[str] = []
        self.senses: list[str] = []
        self.rhs: list[object] = []
        self._rows: list[tuple[np.ndarray, list | np.ndarray]] = []
        self._csr: sp.csr_matrix | None = None

    # building -----------------------------------------------------------
    def add_variable(self, name: str, role: str = "auxiliary", obj=0) -> int:
        if role not in VAR_ROLES:
            raise ValueError(f"unknown variable role {role!r}")
        self.var_names.append(name)
        self.var_roles.append(role)
        j = len(self.var_names) - 1
        if obj:
            self.objective[j] = obj
        return j

    def add_row(self, cols: Sequence[int], vals: Sequence, sense: str, rhs=0,
                role: str = "other", name: str | None = None) -> int:
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        if role not in ROW_ROLES:
            raise ValueError(f"unknown row role {role!r}")
        cols = np.asarray(cols, dtype=np.int64)
        if len(cols) != len(vals):
            raise ValueError("cols and vals differ in length")
        self._rows.append((cols, vals))
        self.senses.append(sense)
        self.rhs.append(rhs)
        self.row_roles.append(role)
        self.row_names.append(name or f"r{len(self.row_names)}")
        self._csr = None
        return len(self._rows) - 1

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    def row(self, i: int) -> tuple[np.ndarray, list | np.ndarray]:
        return self._rows[i]

    @property
    def nnz(self) -> int:
        return sum(len(c) for c, _ in self._rows)

    def is_exact(self) -> bool:
        def exact(v):
            return isinstance(v, (int, Fraction)) and not isinstance(v, bool)

        for cols, vals in self._rows:
            if isinstance(vals, np.ndarray) and vals.dtype.kind == "f":
                return False
            if not all(exact(v) for v in vals):
                return False
        return all(exact(v) for v in self.rhs) and all(exact(v) for v in self.objective.values())

    def validate(self) -> None:
        used = np.zeros(self.n_vars, dtype=bool)
        for j in self.objective:
            used[j] = True
        for i, (cols, _) in enumerate(self._rows):
            if cols.size and (cols.min() < 0 or cols.max() >= self.n_vars):
                raise ValueError(f"row {self.row_names[i]} references an unknown column")
            if np.unique(cols).size != cols.size:
                raise ValueError(f"row {self.row_names[i]} has duplicate entries")
            used[cols] = True
        if not used.all():
            j = int(np.nonzero(~used)[0][0])
            raise ValueError(f"variable {self.var_names[j]} appears nowhere")

    def matrix(self) -> sp.csr_matrix:
        if self._csr is None:
            indptr = np.zeros(self.n_rows + 1, dtype=np.int64)
            for i, (cols, _) in enumerate(self._rows):
                indptr[i + 1] = indptr[i] + len(cols)
            if self._rows:
                indices = np.concatenate([c for c, _ in self._rows])
                data = np.concatenate([np.asarray(v, dtype=float) for _, v in self._rows])
            else:
                indices = np.zeros(0, dtype=np.int64)
                data = np.zeros(0)
            self._csr = sp.csr_matrix((data, indices, indptr), shape=(self.n_rows, self.n_vars))
        return self._csr

    def cost_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for j, v in self.objective.items():
            c[j] = float(v)
        return c

    def rhs_vector(self) -> np.ndarray:
        return np.array([float(b) for b in self.rhs])

    def scaled(self, factor) -> LpModel:
        """Copy with the right-hand side and objective multiplied by ``factor``."""
        m = LpModel(self.maximize, self.name)
        m.var_names, m.var_roles = list(self.var_names), list(self.var_roles)
        m.objective = {j: v * factor for j, v in self.objective.items()}
        for i, (cols, vals) in enumerate(self._rows):
            m.add_row(cols, vals, self.senses[i], self.rhs[i] * factor, self.row_roles[i], self.row_names[i])
        return m

    def role_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.var_roles:
            out[f"var:{r}"] = out.get(f"var:{r}", 0) + 1
        for r in self.row_roles:
            out[f"row:{r}"] = out.get(f"row:{r}", 0) + 1
        return out


@dataclass
class LpSolution:
    status: str
    objective: float
    x: np.ndarray
    y: np.ndarray
    primal_residual: float = math.nan
    dual_residual: float = math.nan
    gap: float = math.nan
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


_STATUS = {0: "optimal", 1: "iteration-limit", 2: "infeasible", 3: "unbounded"}


def residuals(model: LpModel, x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Primal infeasibility, dual infeasibility and |c.x - b.y| for a candidate pair."""
    A = model.matrix()
    b = model.rhs_vector()
    c = model.cost_vector()
    ax = A @ x
    viol = np.zeros_like(b)
    for i, s in enumerate(model.senses):
        d = ax[i] - b[i]
        viol[i] = abs(d) if s == "=" else (max(d, 0.0) if s == "<=" else max(-d, 0.0))
    primal = float(viol.max()) if viol.size else 0.0
    sign = 1.0 if model.maximize else -1.0
    # maximize: A^T y >= c; minimize: A^T y <= c
    red = sign * (A.T @ y - c)
    dual = float(max(0.0, -red.min())) if red.size else 0.0
    for i, s in enumerate(model.senses):
        yi = sign * y[i]
        if (s == "<=" and yi < 0) or (s == ">=" and yi > 0):
            dual = max(dual, abs(yi))
    gap = float(abs(c @ x - b @ y))
    return primal, dual, gap


def solve(model: LpModel, *, time_limit: float | None = None, method: str = "highs") -> LpSolution:
    """Solve with HiGHS and return primal values and row duals."""
    A = model.matrix()
    c = model.cost_vector()
    b = model.rhs_vector()
    senses = np.array(model.senses)
    eq = np.nonzero(senses == "=")[0]
    le = np.nonzero(senses == "<=")[0]
    ge = np.nonzero(senses == ">=")[0]
    ub_rows = np.concatenate([le, ge])
    A_ub = sp.vstack([A[le], -A[ge]]).tocsr() if ub_rows.size else None
    b_ub = np.concatenate([b[le], -b[ge]]) if ub_rows.size else None
    A_eq = A[eq] if eq.size else None
    b_eq = b[eq] if eq.size else None
    options = {"presolve": True}
    if time_limit is not None:
        options["time_limit"] = time_limit
    res = linprog(-c if model.maximize else c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=(0, None), method=method, options=options)
    status = _STATUS.get(res.status, "numerical-failure")
    if res.status == 1 and "time" in (res.message or "").lower():
        status = "iteration-limit"
    n, m = model.n_vars, model.n_rows
    if res.x is None:
        return LpSolution(status, math.nan, np.full(n, np.nan), np.full(m, np.nan), message=res.message)
    x = np.asarray(res.x, dtype=float)
    y = np.zeros(m)
    flip = -1.0 if model.maximize else 1.0
    if eq.size:
        y[eq] = flip * res.eqlin.marginals
    if le.size:
        y[le] = flip * res.ineqlin.marginals[: le.size]
    if ge.size:
        y[ge] = -flip * res.ineqlin.marginals[le.size :]
    obj = float(c @ x)
    p, d, g = residuals(model, x, y)
    return LpSolution(status, obj, x, y, p, d, g, res.message)


# ---------------------------------------------------------------------------
# exact simplex


@dataclass
class ExactSolution:
    status: str
    objective: Fraction | None = None
    x: list[Fraction] = field(default_factory=list)
    y: list[Fraction] = field(default_factory=list)
    basis: list[int] = field(default_factory=list)
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: list[list[Fraction]], r: int, c: int) -> None:
    row = T[r]
    p = row[c]
    if p != 1:
        inv = 1 / p
        T[r] = row = [v * inv if v else v for v in row]
    nz = [j for j, v in enumerate(row) if v]
    for i, other in enumerate(T):
        if i == r:
            continue
        f = other[c]
        if f:
            for j in nz:
                other[j] -= f * row[j]


def _simplex_phase(T, basis, m: int, ncols_allowed: int, cost_row: int,
                   max_pivots: int) -> tuple[str, int]:
    """Bland's rule on tableau T whose row ``cost_row`` holds reduced costs (maximize)."""
    pivots = 0
    obj = T[cost_row]
    while True:
        enter = -1
        for j in range(ncols_allowed):
            if obj[j] > 0:
                enter = j
                break
        if enter < 0:
            return "optimal", pivots
        best, leave = None, -1
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return "unbounded", pivots
        _pivot(T, leave, enter)
        basis[leave] = enter
        pivots += 1
        if pivots >= max_pivots:
            return "iteration-limit", pivots


def solve_exact(model: LpModel, *, max_pivots: int = 100000) -> ExactSolution:
    """Two-phase dense tableau simplex over the rationals with Bland's rule."""
    if model.nnz > 50000:
        raise ValueError("solve_exact is limited to 5e4 nonzeros")
    n, m = model.n_vars, model.n_rows
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    flips: list[int] = []
    kinds: list[str] = []
    for i in range(m):
        cols, vals = model.row(i)
        dense = [Fraction(0)] * n
        for j, v in zip(cols.tolist(), vals):
            dense[j] = Fraction(v)
        b = Fraction(model.rhs[i])
        s = model.senses[i]
        f = 1
        if b < 0:
            dense = [-v for v in dense]
            b = -b
            f = -1
            s = {"=": "=", "<=": ">=", ">=": "<="}[s]
        rows.append(dense)
        rhs.append(b)
        flips.append(f)
        kinds.append(s)

    # columns: structural | slack/surplus | artificial ; every row gets one unit basic column
    slack_of = {}
    n_slack = 0
    for i, s in enumerate(kinds):
        if s != "=":
            slack_of[i] = n + n_slack
            n_slack += 1
    art_of = {}
    n_art = 0
    for i, s in enumerate(kinds):
        if s != "<=":
            art_of[i] = n + n_slack + n_art
            n_art += 1
    N = n + n_slack + n_art
    T: list[list[Fraction]] = []
    basis: list[int] = []
    init_col: list[int] = []
    for i in range(m):
        row = rows[i] + [Fraction(0)] * (n_slack + n_art) + [rhs[i]]
        if i in slack_of:
            row[slack_of[i]] = Fraction(1 if kinds[i] == "<=" else -1)
        if i in art_of:
            row[art_of[i]] = Fraction(1)
            basis.append(art_of[i])
        else:
            basis.append(slack_of[i])
        init_col.append(basis[-1])
        T.append(row)

    sign = 1 if model.maximize else -1
    cost = [Fraction(0)] * (N + 1)
    for j, v in model.objective.items():
        cost[j] = sign * Fraction(v)
    # reduced-cost rows: phase 2 objective (row m), phase 1 objective (row m+1)
    obj2 = list(cost)
    obj1 = [Fraction(0)] * (N + 1)
    for i in range(m):
        if basis[i] >= n + n_slack:
            for j in range(N + 1):
                obj1[j] += T[i][j]
    for j in range(n + n_slack, N):
        obj1[j] = Fraction(0)
    # reduced costs c_j - c_B B^-1 A_j; the rhs entry holds minus the objective value
    T.append(obj2)
    T.append(obj1)

    total = 0
    if n_art:
        status, p = _simplex_phase(T, basis, m, n + n_slack, m + 1, max_pivots)
        total += p
        if status == "iteration-limit":
            return ExactSolution(status, pivots=total)
        if T[m + 1][-1] != 0:
            return ExactSolution("infeasible", pivots=total)
        # drive remaining artificials out where possible
        for i in range(m):
            if basis[i] >= n + n_slack:
                for j in range(n + n_slack):
                    if T[i][j] != 0:
                        _pivot(T, i, j)
                        basis[i] = j
                        break
    T.pop()  # phase-1 row
    # recompute phase-2 reduced costs relative to current basis
    obj = list(cost)
    for i in range(m):
        cb = cost[basis[i]]
        if cb:
            for j in range(N + 1):
                obj[j] -= cb * T[i][j]
    T[m] = obj
    status, p = _simplex_phase(T, basis, m, n + n_slack, m, max_pivots)
    total += p
    if status != "optimal":
        return ExactSolution(status, pivots=total)

    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    value = sum((Fraction(v) * x[j] for j, v in model.objective.items()), Fraction(0))
    # y_i = c_B B^{-1} e_i, read from the column that started basic in row i
    y = []
    for i in range(m):
        col = init_col[i]
        acc = Fraction(0)
        for r in range(m):
            cb = cost[basis[r]]
            if cb:
                acc += cb * T[r][col]
        y.append(sign * acc * flips[i])
    return ExactSolution("optimal", value, x, y, [b for b in basis if b < n], total)


# ---------------------------------------------------------------------------
# export


def _mps_num(v) -> str:
    return repr(float(v))


def to_mps(model: LpModel) -> str:
    """Fixed-column MPS text; OBJSENSE is written for maximization."""
    out = io.StringIO()
    out.write(f"NAME          {model.name}\n")
    if model.maximize:
        out.write("OBJSENSE\n    MAX\n")
    out.write("ROWS\n N  OBJ\n")
    code = {"=": "E", "<=": "L", ">=": "G"}
    rnames = [f"R{i}" for i in range(model.n_rows)]
    for i, s in enumerate(model.senses):
        out.write(f" {code[s]}  {rnames[i]}\n")
    out.write("COLUMNS\n")
    A = model.matrix().tocsc()
    for j in range(model.n_vars):
        cname = f"C{j}"
        entries = []
        if j in model.objective:
            entries.append(("OBJ", model.objective[j]))
        lo, hi = A.indptr[j], A.indptr[j + 1]
        for k in range(lo, hi):
            entries.append((rnames[A.indices[k]], A.data[k]))
        for rname, v in entries:
            out.write(f"    {cname:<8}  {rname:<8}  {_mps_num(v):>12}\n")
    out.write("RHS\n")
    for i, b in enumerate(model.rhs):
        if float(b) != 0.0:
            out.write(f"    {'RHS':<8}  {rnames[i]:<8}  {_mps_num(b):>12}\n")
    out.write("ENDATA\n")
    return out.getvalue()


def solution_csv(model: LpModel, sol: LpSolution) -> str:
    """``name,role,value`` lines: primal values for columns then duals for rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "role", "value"])
    for name, role, v in zip(model.var_names, model.var_roles, sol.x):
        w.writerow([name, role, repr(float(v))])
    for name, role, v in zip(model.row_names, model.row_roles, sol.y):
        w.writerow([name, f"dual:{role}", repr(float(v))])
    return buf.getvalue()


def dense_exact_model(A: Iterable[Sequence], senses: Sequence[str], b: Sequence, c: Sequence,
                      maximize: bool = True) -> LpModel:
    """Small helper to assemble a model from dense rows (handy in tests and scripts)."""
    model = LpModel(maximize)
    c = list(c)
    for j, cj in enumerate(c):
        model.add_variable(f"x{j}", "auxiliary", cj)
    for i, (row, s, bi) in enumerate(zip(A, senses, b)):
        cols = [j for j, v in enumerate(row) if v != 0]
        model.add_row(cols, [row[j] for j in cols], s, bi)
    return model
