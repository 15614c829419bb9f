"""Exact rational linear feasibility.

A phase-one simplex over ``Fraction`` with Bland's rule, so it cannot
cycle. Problems here have at most a few dozen
variables, so a dense tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional


class LPError(ValueError):
    pass


@dataclass
class Constraint:
    coeffs: dict[str, Fraction]
    sense: str  # one of "<=", ">=", "=="
    rhs: Fraction


@dataclass
class LPProblem:
    """Feasibility problem over named rational variables.

    Variables are nonnegative unless declared ``free``.
    """

    variables: dict[str, bool] = field(default_factory=dict)  # name -> free
    constraints: list[Constraint] = field(default_factory=list)

    def add_variable(self, name: str, free: bool = False) -> str:
        if name in self.variables:
            raise LPError(f"duplicate variable {name!r}")
        self.variables[name] = free
        return name

    def add_constraint(self, coeffs: Mapping[str, int | Fraction], sense: str, rhs: int | Fraction) -> None:
        if sense not in ("<=", ">=", "=="):
            raise LPError(f"unknown sense {sense!r}")
        for name in coeffs:
            if name not in self.variables:
                raise LPError(f"constraint references undeclared variable {name!r}")
        self.constraints.append(
            Constraint({k: Fraction(v) for k, v in coeffs.items() if v != 0}, sense, Fraction(rhs))
        )

    def solve(self) -> Optional[dict[str, Fraction]]:
        """Return a feasible point, or ``None`` if the system is infeasible."""
        names = list(self.variables)
        # column layout: x+ for every var, x- for free vars, then slacks
        cols: list[tuple[str, int]] = [(v, 1) for v in names] + [(v, -1) for v in names if self.variables[v]]
        index = {c: i for i, c in enumerate(cols)}
        nslack = sum(1 for c in self.constraints if c.sense != "==")
        nstruct = len(cols)
        rows: list[list[Fraction]] = []
        rhs: list[Fraction] = []
        s = 0
        for con in self.constraints:
            row = [Fraction(0)] * (nstruct + nslack)
            for v, a in con.coeffs.items():
                row[index[(v, 1)]] += a
                if self.variables[v]:
                    row[index[(v, -1)]] -= a
            if con.sense == "<=":
                row[nstruct + s] = Fraction(1)
                s += 1
            elif con.sense == ">=":
                row[nstruct + s] = Fraction(-1)
                s += 1
            b = con.rhs
            if b < 0:
                row = [-a for a in row]
                b = -b
            rows.append(row)
            rhs.append(b)
        x = _phase_one(rows, rhs)
        if x is None:
            return None
        out = {}
        for v in names:
            val = x[index[(v, 1)]]
            if self.variables[v]:
                val -= x[index[(v, -1)]]
            out[v] = val
        return out


def _phase_one(rows: list[list[Fraction]], rhs: list[Fraction]) -> Optional[list[Fraction]]:
    """Find ``x >= 0`` with ``rows @ x == rhs`` (``rhs >= 0``), or ``None``."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    if m == 0:
        return [Fraction(0)] * n
    # tableau with artificials n..n+m-1
    t = [rows[i] + [Fraction(int(i == j)) for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    width = n + m
    # objective: minimise sum of artificials -> reduced costs row
    obj = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(width + 1):
            obj[j] -= t[i][j]
    for j in range(n, n + m):
        obj[j] = Fraction(0)
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        leave = None
        for i in range(m):
            a = t[i][enter]
            if a > 0:
                ratio = t[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            # cannot happen for phase one: objective bounded below by 0
            raise LPError("unbounded phase-one problem")
        _pivot(t, obj, leave, enter)
        basis[leave] = enter
    if obj[width] != 0:
        return None
    x = [Fraction(0)] * width
    for i, b in enumerate(basis):
        x[b] = t[i][width]
    return x[:n]


def _pivot(t: list[list[Fraction]], obj: list[Fraction], r: int, c: int) -> None:
    p = t[r][c]
    t[r] = [a / p for a in t[r]]
    pr = t[r]
    for i, row in enumerate(t):
        if i != r:
            f = row[c]
            if f != 0:
                t[i] = [a - f * b for a, b in zip(row, pr)]
    f = obj[c]
    if f != 0:
        obj[:] = [a - f * b for a, b in zip(obj, pr)]


def find_nonnegative_combination(generators: list[tuple[int, ...]], target: tuple[int, ...]) -> Optional[list[Fraction]]:
    """``lam >= 0`` with ``sum(lam[j] * generators[j]) == target``, or ``None``."""
    lp = LPProblem()
    names = [lp.add_variable(f"l{j}") for j in range(len(generators))]
    for i, b in enumerate(target):
        lp.add_constraint({names[j]: g[i] for j, g in enumerate(generators)}, "==", b)
    sol = lp.solve()
    if sol is None:
        return None
    return [sol[v] for v in names]
