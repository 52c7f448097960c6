"""Exact sparse linear algebra over the fraction field Q(c, h, lambda).

Elimination is deterministic: columns are processed in their natural integer
order, and the pivot for a column is the unused row with a structurally
nonzero entry there whose entry has the smallest polynomial size (ties broken
by row index).  All arithmetic is exact field arithmetic on normalized
rational functions, so no tolerance enters anywhere.

Every returned solution or membership combination is re-verified by exact
arithmetic before being handed back; a recheck failure raises
``LinalgInternalError`` rather than returning silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .scalars import RATFUNC_ZERO, RatFunc


class LinalgInternalError(AssertionError):
    """Exact recheck of an elimination result failed; indicates a bug."""


INCONSISTENT = "inconsistent"


def _scalar_size(x: RatFunc) -> int:
    return len(x.num.terms) + len(x.den.terms)


def _axpy(row: dict, factor: RatFunc, other: Mapping[int, RatFunc]) -> None:
    """row -= factor * other, in place, dropping zeros."""
    for c, v in other.items():
        s = row.get(c, RATFUNC_ZERO) - factor * v
        if s.is_zero():
            row.pop(c, None)
        else:
            row[c] = s


@dataclass
class SparseMatrix:
    """Sparse matrix with RatFunc entries; no stored zeros, indices checked."""

    rows: int
    cols: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r}, {c}) out of range")
            v = RatFunc.coerce(v)
            if not v.is_zero():
                clean[(r, c)] = v
        self.entries = clean

    @classmethod
    def from_rows(cls, rows: list, cols: int) -> "SparseMatrix":
        entries = {}
        for r, row in enumerate(rows):
            for c, v in row.items():
                entries[(r, c)] = v
        return cls(len(rows), cols, entries)

    def row(self, r: int) -> dict:
        return {c: v for (rr, c), v in self.entries.items() if rr == r}

    def apply(self, x: list) -> list:
        out = [RATFUNC_ZERO] * self.rows
        for (r, c), v in self.entries.items():
            out[r] = out[r] + v * x[c]
        return out

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        entries: dict = {}
        other_rows: dict[int, dict] = {}
        for (r, c), v in other.entries.items():
            other_rows.setdefault(r, {})[c] = v
        for (r, k), v in self.entries.items():
            for c, w in other_rows.get(k, {}).items():
                s = entries.get((r, c), RATFUNC_ZERO) + v * w
                if s.is_zero():
                    entries.pop((r, c), None)
                else:
                    entries[(r, c)] = s
        return SparseMatrix(self.rows, other.cols, entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def is_zero(self) -> bool:
        return not self.entries

    def dump_triplets(self) -> str:
        """Simple sparse-triplet text format for debugging."""
        lines = [f"{self.rows} {self.cols}"]
        for (r, c) in sorted(self.entries):
            lines.append(f"{r} {c} {self.entries[(r, c)]}")
        return "\n".join(lines)


@dataclass
class SolveResult:
    solution: list | str  # list[RatFunc] or INCONSISTENT
    pivot_trace: list

    @property
    def consistent(self) -> bool:
        return self.solution != INCONSISTENT


def solve(A: SparseMatrix, b: list) -> SolveResult:
    """Solve A x = b exactly; inconsistency is a value, not an error.

    Underdetermined systems get zero on the free coordinates, so the output
    is deterministic.  The returned solution is rechecked exactly; a recheck
    failure is fatal.
    """
    b = [RatFunc.coerce(x) for x in b]
    if len(b) != A.rows:
        raise ValueError("dimension mismatch")
    rows = [A.row(r) for r in range(A.rows)]
    rhs = list(b)
    used = [False] * A.rows
    pivot_of_col: dict[int, int] = {}
    trace = []
    for col in range(A.cols):
        candidates = [
            (_scalar_size(rows[r][col]), r)
            for r in range(A.rows)
            if not used[r] and col in rows[r]
        ]
        if not candidates:
            continue
        _, prow = min(candidates)
        used[prow] = True
        pivot_of_col[col] = prow
        trace.append((col, prow))
        pv = rows[prow][col]
        for r in range(A.rows):
            if r == prow or col not in rows[r]:
                continue
            factor = rows[r][col] / pv
            _axpy(rows[r], factor, rows[prow])
            rows[r].pop(col, None)
            rhs[r] = rhs[r] - factor * rhs[prow]
    for r in range(A.rows):
        if not used[r] and not rows[r] and not rhs[r].is_zero():
            return SolveResult(INCONSISTENT, trace)
    x = [RATFUNC_ZERO] * A.cols
    for col, prow in pivot_of_col.items():
        acc = rhs[prow]
        for c, v in rows[prow].items():
            if c != col:
                acc = acc - v * x[c]
        x[col] = acc / rows[prow][col]
    residual = A.apply(x)
    for r in range(A.rows):
        if residual[r] != b[r]:
            raise LinalgInternalError("solve recheck failed")
    return SolveResult(x, trace)


class Echelon:
    """Incremental row echelon with provenance over tagged input rows.

    Stored rows are fully reduced against existing pivots and normalized to
    lead coefficient one; each carries the exact combination of input rows it
    equals, so expressing a vector in the row space yields certificate
    coefficients directly.  Column order is the natural order of column keys,
    which callers fix deterministically.
    """

    def __init__(self):
        self.pivots: dict[int, tuple[dict, dict]] = {}
        self.inputs: dict = {}

    def _eliminate(self, row: dict, combo: dict) -> tuple[dict, dict]:
        while row:
            lead = min(row)
            hit = self.pivots.get(lead)
            if hit is None:
                break
            prow, pcombo = hit
            factor = row[lead]
            _axpy(row, factor, prow)
            row.pop(lead, None)
            _axpy(combo, factor, pcombo)
        return row, combo

    def add_row(self, row: Mapping[int, RatFunc], tag) -> bool:
        """Insert a tagged row; returns True if it increased the rank."""
        clean = {c: RatFunc.coerce(v) for c, v in row.items() if not RatFunc.coerce(v).is_zero()}
        self.inputs[tag] = clean
        red, combo = self._eliminate(dict(clean), {tag: RatFunc.coerce(1)})
        if not red:
            return False
        lead = min(red)
        pv = red[lead]
        if not pv.is_one():
            inv = RatFunc.coerce(1) / pv
            red = {c: v * inv for c, v in red.items()}
            combo = {i: v * inv for i, v in combo.items()}
        self.pivots[lead] = (red, combo)
        return True

    def rank(self) -> int:
        return len(self.pivots)

    def express(self, vector: Mapping[int, RatFunc]) -> tuple[dict, dict]:
        """Split vector = residual + sum_i combo[i] * input_row[i], exactly.

        The residual is empty iff the vector lies in the span of the rows
        added so far.  The identity is rechecked before returning.
        """
        vec = {c: RatFunc.coerce(v) for c, v in vector.items() if not RatFunc.coerce(v).is_zero()}
        residual, neg = self._eliminate(dict(vec), {})
        combo = {i: -v for i, v in neg.items()}
        check = dict(residual)
        for i, coeff in combo.items():
            _axpy(check, -coeff, self.inputs[i])
        if check != vec:
            raise LinalgInternalError("echelon express recheck failed")
        return residual, combo


def rank(A: SparseMatrix) -> int:
    ech = Echelon()
    for r in range(A.rows):
        ech.add_row(A.row(r), tag=r)
    return ech.rank()


@dataclass
class NotInSpan:
    residual_cols: tuple


def row_space_membership(A: SparseMatrix, v: list | Mapping[int, RatFunc]):
    """Express v as a combination of the rows of A, or report NotInSpan.

    On success returns a list of RatFunc coefficients (one per row); the
    combination was rechecked exactly inside the echelon.
    """
    if isinstance(v, list):
        vec = {i: x for i, x in enumerate(v)}
    else:
        vec = dict(v)
    ech = Echelon()
    for r in range(A.rows):
        ech.add_row(A.row(r), tag=r)
    residual, combo = ech.express(vec)
    if residual:
        return NotInSpan(tuple(sorted(residual)))
    return [combo.get(r, RATFUNC_ZERO) for r in range(A.rows)]
