"""Constraint map for a fixed hierarchy time: the table of series coefficients.

Fixing the time t_k and solving the flow equation d/dt_k L = [L^(k), L] with
l_0 = sigma3 turns every series coefficient l_j = a_j sigma3 + b_j sigma+ +
c_j sigma- into a differential polynomial in the 2k free fields b_1..b_k,
c_1..c_k.  A PsiTable holds those rows up to a chosen depth:

  * rows 1..k:  b_j, c_j free generators, a_j from the Casimir closure
                (all coefficients of Tr L^2 - 2 pinned to zero, integration
                constants zero);
  * rows > k:   b_j, c_j from the off-diagonal components of the flow,
                a_j again from the closure.

The diagonal component of the flow is NOT used in the construction; it is the
independent consistency check diag_consistency.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .diffpoly import DiffPoly
from .loopalg import DepthExhausted, LaurentMatrix, Sl2Poly
from .report import CheckReport

_HALF = Fraction(1, 2)
_QUARTER = Fraction(1, 4)


@dataclass(frozen=True)
class PsiTable:
    """Rows j = 0..depth of the constrained series for the time t_k."""

    k: int
    depth: int
    rows: Tuple[Sl2Poly, ...]

    def row(self, j: int) -> Sl2Poly:
        if j < 0 or j > self.depth:
            raise DepthExhausted(f"row {j} beyond table depth {self.depth}")
        return self.rows[j]

    def a(self, j: int) -> DiffPoly:
        """a_j with the closure conventions a_0 = 1, a_j = 0 for j < 0."""
        if j < 0:
            return DiffPoly.zero()
        return self.row(j).a

    def free_fields(self):
        """The 2k free generators, b first, in index order."""
        from .diffpoly import FieldVar

        return [FieldVar(kind, i) for kind in ("b", "c") for i in range(1, self.k + 1)]

    def psi_series(self) -> LaurentMatrix:
        """The constrained series as a truncated Laurent object (floor -depth)."""
        return LaurentMatrix({-j: self.rows[j] for j in range(self.depth + 1)}, floor=-self.depth)


def casimir_closure_a(table_or_rows, m: int) -> DiffPoly:
    """a_m forced by the vanishing of the lambda^{-m} coefficient of Tr L^2 - 2.

    With a_0 = 1, b_0 = c_0 = 0 the coefficient reads
    4 a_m + sum_{i=1}^{m-1} (2 a_i a_{m-i} + b_i c_{m-i} + b_{m-i} c_i) = 0.
    """
    rows = table_or_rows.rows if isinstance(table_or_rows, PsiTable) else table_or_rows
    if m < 1:
        raise ValueError("casimir_closure_a needs m >= 1")
    acc = DiffPoly.zero()
    for i in range(1, m):
        li, lmi = rows[i], rows[m - i]
        acc = acc + li.a * lmi.a.scale(2) + li.bp * lmi.cm + lmi.bp * li.cm
    return acc.scale(-_QUARTER)


def extend_offdiagonal(table_or_rows, p: int, k: int = None) -> Tuple[DiffPoly, DiffPoly]:
    """(b_{p+k}, c_{p+k}) solved from the sigma+- components of the flow
    d/dt_k l_p = sum_{j=0}^{k} [l_j, l_{p+k-j}]:

      b_{p+k} =  (1/2) d(b_p) - sum_{j=1}^{k} (a_j b_{p+k-j} - a_{p+k-j} b_j)
      c_{p+k} = -(1/2) d(c_p) - sum_{j=1}^{k} (a_j c_{p+k-j} - a_{p+k-j} c_j)
    """
    if isinstance(table_or_rows, PsiTable):
        rows, k = table_or_rows.rows, table_or_rows.k
    else:
        rows = table_or_rows
        if k is None:
            raise ValueError("extend_offdiagonal needs k when given raw rows")
    if p < 1:
        raise ValueError("extend_offdiagonal needs p >= 1")
    b_new = rows[p].bp.derive().scale(_HALF)
    c_new = rows[p].cm.derive().scale(-_HALF)
    for j in range(1, k + 1):
        lj, lo = rows[j], rows[p + k - j]
        b_new = b_new - (lj.a * lo.bp - lo.a * lj.bp)
        c_new = c_new - (lj.a * lo.cm - lo.a * lj.cm)
    return b_new, c_new


def build_psi(k: int, depth: int) -> PsiTable:
    """Construct the table for t_k down to lambda^{-depth}."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if depth < k:
        raise ValueError(f"depth must be >= k (got depth={depth}, k={k})")
    rows: List[Sl2Poly] = [Sl2Poly.sigma3()]
    for j in range(1, depth + 1):
        if j <= k:
            bj, cj = DiffPoly.var("b", j), DiffPoly.var("c", j)
        else:
            bj, cj = extend_offdiagonal(rows, j - k, k)
        # The closure at order j only reads rows 0..j-1.
        rows.append(Sl2Poly(a=casimir_closure_a(rows, j), bp=bj, cm=cj))
    return PsiTable(k=k, depth=depth, rows=tuple(rows))


def lax_matrix(table: PsiTable, n: int) -> LaurentMatrix:
    """V_k^(n): the degree-n polynomial sum_{m=0}^{n} l_m lambda^{n-m}."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > table.depth:
        raise DepthExhausted(f"lax_matrix needs depth >= {n}, table has {table.depth}")
    return LaurentMatrix({n - m: table.rows[m] for m in range(n + 1)}, None)


def diag_consistency(table: PsiTable) -> CheckReport:
    """Check the sigma3 component of the flow on every available row:
    d(a_p) = sum_{j=0}^{k} (b_j c_{p+k-j} - c_j b_{p+k-j})."""
    report = CheckReport(f"diag_consistency(k={table.k})")
    k = table.k
    for p in range(1, table.depth - k + 1):
        rhs = DiffPoly.zero()
        for j in range(0, k + 1):
            lj, lo = table.rows[j], table.rows[p + k - j]
            rhs = rhs + lj.bp * lo.cm - lj.cm * lo.bp
        residual = table.rows[p].a.derive() - rhs
        report.add(f"p={p}", residual.is_zero(), residual.to_text())
    return report


def trace_square_check(table: PsiTable) -> CheckReport:
    """Tr(Psi_k(L)(lambda)^2) = 2 order by order up to the table depth."""
    report = CheckReport(f"trace_square(k={table.k})")
    for m in range(1, table.depth + 1):
        acc = DiffPoly.zero()
        for i in range(0, m + 1):
            acc = acc + table.rows[i].trace_with(table.rows[m - i])
        report.add(f"lambda^-{m}", acc.is_zero(), acc.to_text())
    return report
