"""Sparse container for linear(ized) optimization problems.

A ConstraintSystem holds a variable catalog (bounds, objective
coefficients), linear rows given as coefficient triplets, and optional
nonlinear terms attached to rows: pipe-friction terms of the form
coef * m|m|/pi and bilinear compressor terms coef * a*b. Linear rows are
solved directly by the LP backends; systems with nonlinear terms go
through the successive-linearization solver.

Rows and variables can carry structured tags (tuples) for later lookup,
e.g. the stage-coupling rows tagged ("fix", gen, t) whose duals drive the
stochastic approximation updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ConstraintSystem", "FrictionTerm", "BilinearTerm"]

INF = math.inf


@dataclass(frozen=True)
class FrictionTerm:
    """Adds coef * m * sqrt(m^2 + eps) / p to the row's left-hand side."""
    row: int
    m_col: int
    p_col: int
    coef: float


@dataclass(frozen=True)
class BilinearTerm:
    """Adds coef * a * b to the row's left-hand side."""
    row: int
    a_col: int
    b_col: int
    coef: float


class ConstraintSystem:
    """min c.z + const  s.t.  rows (sense '=' / '<=' / '>='), lb <= z <= ub."""

    def __init__(self, name: str = "system"):
        self.name = name
        self._names: list[tuple] = []
        self._by_name: dict[tuple, int] = {}
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.c: list[float] = []
        self.col_scale: list[float] = []
        self.obj_const: float = 0.0
        self._ri: list[int] = []
        self._ci: list[int] = []
        self._cv: list[float] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self._row_tags: list[tuple | None] = []
        self._rows_by_tag: dict[tuple, int] = {}
        self.friction_terms: list[FrictionTerm] = []
        self.bilinear_terms: list[BilinearTerm] = []
        self.meta: dict = {}
        self._frozen = False

    # -- construction ------------------------------------------------------

    def add_var(self, name: tuple, lb: float = -INF, ub: float = INF,
                obj: float = 0.0, scale: float = 1.0) -> int:
        if self._frozen:
            raise RuntimeError("system is finalized")
        if name in self._by_name:
            raise ValueError(f"duplicate variable {name}")
        j = len(self._names)
        self._names.append(name)
        self._by_name[name] = j
        self.lb.append(lb)
        self.ub.append(ub)
        self.c.append(obj)
        self.col_scale.append(scale)
        return j

    def var(self, name: tuple) -> int:
        return self._by_name[name]

    def has_var(self, name: tuple) -> bool:
        return name in self._by_name

    def add_row(self, coeffs: list[tuple[int, float]], sense: str, rhs: float,
                tag: tuple | None = None) -> int:
        if self._frozen:
            raise RuntimeError("system is finalized")
        if sense not in ("=", "<=", ">="):
            raise ValueError(f"bad sense {sense!r}")
        i = len(self.senses)
        for col, v in coeffs:
            if v != 0.0:
                self._ri.append(i)
                self._ci.append(col)
                self._cv.append(v)
        self.senses.append(sense)
        self.rhs.append(rhs)
        self._row_tags.append(tag)
        if tag is not None:
            if tag in self._rows_by_tag:
                raise ValueError(f"duplicate row tag {tag}")
            self._rows_by_tag[tag] = i
        return i

    def add_friction(self, row: int, m_col: int, p_col: int, coef: float) -> None:
        self.friction_terms.append(FrictionTerm(row, m_col, p_col, coef))

    def add_bilinear(self, row: int, a_col: int, b_col: int, coef: float) -> None:
        self.bilinear_terms.append(BilinearTerm(row, a_col, b_col, coef))

    def finalize(self) -> "ConstraintSystem":
        """Convert to array storage; afterwards only values (rhs, bounds,
        objective) may change, not the structure."""
        if not self._frozen:
            self.lb = np.asarray(self.lb, dtype=float)
            self.ub = np.asarray(self.ub, dtype=float)
            self.c = np.asarray(self.c, dtype=float)
            self.col_scale = np.asarray(self.col_scale, dtype=float)
            self.rhs = np.asarray(self.rhs, dtype=float)
            self._ri = np.asarray(self._ri, dtype=np.int64)
            self._ci = np.asarray(self._ci, dtype=np.int64)
            self._cv = np.asarray(self._cv, dtype=float)
            self._frozen = True
        return self

    # -- accessors ---------------------------------------------------------

    @property
    def n_cols(self) -> int:
        return len(self._names)

    @property
    def n_rows(self) -> int:
        return len(self.senses)

    @property
    def is_linear(self) -> bool:
        return not self.friction_terms and not self.bilinear_terms

    def var_names(self) -> list[tuple]:
        return list(self._names)

    def row_tag(self, i: int) -> tuple | None:
        return self._row_tags[i]

    def row(self, tag: tuple) -> int:
        return self._rows_by_tag[tag]

    def rows_with_prefix(self, head: str) -> list[tuple[tuple, int]]:
        """(tag, row) pairs for all tagged rows whose tag starts with head,
        in row order."""
        out = [(t, i) for t, i in self._rows_by_tag.items() if t[0] == head]
        out.sort(key=lambda p: p[1])
        return out

    def cols_with_prefix(self, head: str) -> list[tuple[tuple, int]]:
        return [(n, j) for j, n in enumerate(self._names) if n[0] == head]

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self._frozen:
            raise RuntimeError("finalize the system first")
        return self._ri, self._ci, self._cv

    def nonlinear_rows(self) -> np.ndarray:
        rows = {t.row for t in self.friction_terms}
        rows |= {t.row for t in self.bilinear_terms}
        return np.asarray(sorted(rows), dtype=np.int64)

    def nonlinear_cols(self) -> np.ndarray:
        cols: set[int] = set()
        for t in self.friction_terms:
            cols.add(t.m_col)
            cols.add(t.p_col)
        for t in self.bilinear_terms:
            cols.add(t.a_col)
            cols.add(t.b_col)
        return np.asarray(sorted(cols), dtype=np.int64)

    # -- value mutation (allowed after finalize) ----------------------------

    def set_rhs(self, row: int, value: float) -> None:
        self.rhs[row] = value

    def set_bounds(self, col: int, lb: float, ub: float) -> None:
        self.lb[col] = lb
        self.ub[col] = ub

    def set_obj(self, col: int, value: float) -> None:
        self.c[col] = value

    # -- evaluation ---------------------------------------------------------

    def matrix(self):
        from scipy.sparse import coo_matrix
        ri, ci, cv = self.triplets()
        return coo_matrix((cv, (ri, ci)), shape=(self.n_rows, self.n_cols)).tocsr()

    def nonlinear_lhs(self, z: np.ndarray, eps: float = 0.0) -> np.ndarray:
        """Per-row contribution of the nonlinear terms at point z."""
        add = np.zeros(self.n_rows)
        for t in self.friction_terms:
            m = z[t.m_col]
            add[t.row] += t.coef * m * math.sqrt(m * m + eps) / z[t.p_col]
        for t in self.bilinear_terms:
            add[t.row] += t.coef * z[t.a_col] * z[t.b_col]
        return add

    def residuals(self, z: np.ndarray, eps: float = 0.0) -> np.ndarray:
        """Signed row residuals lhs(z) - rhs; '<=' rows clip at zero."""
        lhs = self.matrix() @ z + self.nonlinear_lhs(z, eps)
        r = lhs - np.asarray(self.rhs)
        for i, s in enumerate(self.senses):
            if s == "<=":
                r[i] = max(0.0, r[i])
            elif s == ">=":
                r[i] = max(0.0, -r[i])
        return r

    def objective_value(self, z: np.ndarray) -> float:
        return float(np.dot(self.c, z)) + self.obj_const

    # -- diagnostics ---------------------------------------------------------

    def write_lp(self, path) -> None:
        """Dump the linear part in CPLEX LP text format (nonlinear terms
        are emitted as comments)."""
        from scipy.sparse import coo_matrix
        ri, ci, cv = self.triplets()
        by_row: dict[int, list[tuple[int, float]]] = {}
        for r, c_, v in zip(ri, ci, cv):
            by_row.setdefault(int(r), []).append((int(c_), float(v)))

        def vname(j: int) -> str:
            return "_".join(str(p) for p in self._names[j]).replace(" ", "")

        with open(path, "w") as fh:
            fh.write(f"\\ {self.name}\nMinimize\n obj:")
            for j, v in enumerate(np.asarray(self.c)):
                if v != 0.0:
                    fh.write(f" {'+' if v >= 0 else '-'} {abs(v):.17g} {vname(j)}")
            fh.write("\nSubject To\n")
            for i in range(self.n_rows):
                tag = self._row_tags[i]
                label = "_".join(str(p) for p in tag) if tag else f"r{i}"
                fh.write(f" {label}:")
                for j, v in sorted(by_row.get(i, [])):
                    fh.write(f" {'+' if v >= 0 else '-'} {abs(v):.17g} {vname(j)}")
                op = {"=": "=", "<=": "<=", ">=": ">="}[self.senses[i]]
                fh.write(f" {op} {float(self.rhs[i]):.17g}\n")
            fh.write("Bounds\n")
            for j in range(self.n_cols):
                lo, hi = float(self.lb[j]), float(self.ub[j])
                lo_s = "-inf" if lo == -INF else f"{lo:.17g}"
                hi_s = "+inf" if hi == INF else f"{hi:.17g}"
                fh.write(f" {lo_s} <= {vname(j)} <= {hi_s}\n")
            for t in self.friction_terms:
                fh.write(f"\\ friction row {t.row}: + {t.coef:.17g} * "
                         f"{vname(t.m_col)}|{vname(t.m_col)}|/{vname(t.p_col)}\n")
            for t in self.bilinear_terms:
                fh.write(f"\\ bilinear row {t.row}: + {t.coef:.17g} * "
                         f"{vname(t.a_col)}*{vname(t.b_col)}\n")
            fh.write("End\n")
