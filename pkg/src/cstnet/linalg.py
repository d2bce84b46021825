"""Exact rational linear algebra: rank, determinants, minors and sign patterns.

Matrices hold Python ``int`` or :class:`fractions.Fraction` entries. Integer
matrices stay integer throughout so that elimination can be fraction-free.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Number = int | Fraction

PLUS, MINUS, ZERO = 1, -1, 0


def to_exact(value) -> Number:
    """Coerce ``value`` to an exact number (int when integral)."""
    if isinstance(value, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        value = Fraction(value)
    elif isinstance(value, str):
        value = Fraction(value.strip())
    elif not isinstance(value, Fraction):
        value = Fraction(value)
    return value.numerator if value.denominator == 1 else value


def sign(value) -> int:
    return (value > 0) - (value < 0)


class ExactMatrix:
    """Immutable dense matrix of exact rationals."""

    __slots__ = ("rows", "cols", "_data", "_is_int")

    def __init__(self, data: Iterable[Iterable], cols: int | None = None):
        data = tuple(tuple(to_exact(v) for v in row) for row in data)
        widths = {len(row) for row in data}
        if len(widths) > 1:
            raise ValueError("ragged matrix rows")
        if data:
            width = widths.pop()
            if cols is not None and cols != width:
                raise ValueError(f"expected {cols} columns, got {width}")
            cols = width
        elif cols is None:
            cols = 0
        self.rows = len(data)
        self.cols = cols
        self._data = data
        self._is_int = all(type(v) is int for row in data for v in row)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> ExactMatrix:
        return cls(((0,) * cols for _ in range(rows)), cols=cols)

    @classmethod
    def identity(cls, n: int) -> ExactMatrix:
        return cls(((int(i == j) for j in range(n)) for i in range(n)), cols=n)

    @classmethod
    def diag(cls, values: Sequence) -> ExactMatrix:
        n = len(values)
        return cls(((values[i] if i == j else 0 for j in range(n)) for i in range(n)), cols=n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> ExactMatrix:
        return cls(((col[i] for col in columns) for i in range(rows)), cols=len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_integer(self) -> bool:
        return self._is_int

    def __getitem__(self, key):
        i, j = key
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self._data)

    def tolist(self) -> list[list]:
        return [list(row) for row in self._data]

    def to_numpy(self, dtype=float) -> np.ndarray:
        return np.array(self.tolist(), dtype=dtype).reshape(self.rows, self.cols)

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactMatrix):
            return self.shape == other.shape and self._data == other._data
        if isinstance(other, (list, tuple)):
            return self == ExactMatrix(other, cols=self.cols if not other else None)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.shape, self._data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(v) for v in row) for row in self._data)
        return f"ExactMatrix({self.rows}x{self.cols}: [{body}])"

    @property
    def T(self) -> ExactMatrix:
        return ExactMatrix(zip(*self._data), cols=self.rows) if self.rows else ExactMatrix.zeros(self.cols, 0)

    def __matmul__(self, other: ExactMatrix) -> ExactMatrix:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = [other.column(j) for j in range(other.cols)]
        return ExactMatrix(
            ((sum(a * b for a, b in zip(row, col)) for col in cols) for row in self._data),
            cols=other.cols,
        )

    def __sub__(self, other: ExactMatrix) -> ExactMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return ExactMatrix(
            ((a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self._data, other._data)),
            cols=self.cols,
        )

    def __add__(self, other: ExactMatrix) -> ExactMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return ExactMatrix(
            ((a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self._data, other._data)),
            cols=self.cols,
        )

    def scale(self, c) -> ExactMatrix:
        c = to_exact(c)
        return ExactMatrix(((c * v for v in row) for row in self._data), cols=self.cols)

    def apply(self, vector: Sequence) -> tuple:
        if len(vector) != self.cols:
            raise ValueError(f"vector of length {len(vector)} for {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(row, vector)) for row in self._data)

    def select(self, rows: Sequence[int], cols: Sequence[int]) -> ExactMatrix:
        return ExactMatrix(((self._data[i][j] for j in cols) for i in rows), cols=len(cols))

    def select_columns(self, cols: Sequence[int]) -> ExactMatrix:
        return self.select(range(self.rows), cols)

    def hstack(self, other: ExactMatrix) -> ExactMatrix:
        if self.rows != other.rows:
            raise ValueError("row count mismatch")
        return ExactMatrix(
            (r1 + r2 for r1, r2 in zip(self._data, other._data)), cols=self.cols + other.cols
        )


def _as_matrix(M) -> ExactMatrix:
    return M if isinstance(M, ExactMatrix) else ExactMatrix(M)


def _det_rows(rows: list[list]) -> Number:
    """Determinant of a square list-of-lists, destroying the input."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    integer = all(type(v) is int for r in rows for v in r)
    if integer:
        # Bareiss: every intermediate quotient is exact
        negate = False
        prev = 1
        for k in range(n - 1):
            if rows[k][k] == 0:
                for p in range(k + 1, n):
                    if rows[p][k] != 0:
                        rows[k], rows[p] = rows[p], rows[k]
                        negate = not negate
                        break
                else:
                    return 0
            pivot = rows[k][k]
            rk = rows[k]
            for i in range(k + 1, n):
                ri = rows[i]
                rik = ri[k]
                for j in range(k + 1, n):
                    ri[j] = (pivot * ri[j] - rik * rk[j]) // prev
            prev = pivot
        det = rows[n - 1][n - 1]
        return -det if negate else det
    det = Fraction(1)
    for k in range(n):
        p = next((p for p in range(k, n) if rows[p][k] != 0), None)
        if p is None:
            return 0
        if p != k:
            rows[k], rows[p] = rows[p], rows[k]
            det = -det
        pivot = Fraction(rows[k][k])
        det *= pivot
        for i in range(k + 1, n):
            f = rows[i][k] / pivot
            if f:
                for j in range(k, n):
                    rows[i][j] -= f * rows[k][j]
    return to_exact(det)


def det(M) -> Number:
    """Exact determinant of a square matrix."""
    M = _as_matrix(M)
    if M.rows != M.cols:
        raise ValueError(f"determinant of non-square {M.shape} matrix")
    return _det_rows(M.tolist())


def minor(M, alpha: Sequence[int], beta: Sequence[int]) -> Number:
    """Determinant of the submatrix on rows ``alpha`` and columns ``beta``.

    Index sets are 0-based; the empty minor is 1.
    """
    M = _as_matrix(M)
    alpha, beta = sorted(alpha), sorted(beta)
    if len(alpha) != len(beta):
        raise ValueError(f"minor index sets differ in size ({len(alpha)} vs {len(beta)})")
    if len(set(alpha)) != len(alpha) or len(set(beta)) != len(beta):
        raise ValueError("repeated index in minor")
    if any(not 0 <= i < M.rows for i in alpha) or any(not 0 <= j < M.cols for j in beta):
        raise IndexError("minor index out of range")
    return _det_rows([[M[i, j] for j in beta] for i in alpha])


def rref(M) -> tuple[ExactMatrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns, over the rationals."""
    M = _as_matrix(M)
    rows = [[Fraction(v) for v in M.row(i)] for i in range(M.rows)]
    pivots = []
    r = 0
    for c in range(M.cols):
        p = next((p for p in range(r, len(rows)) if rows[p][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pivot = rows[r][c]
        rows[r] = [v / pivot for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return ExactMatrix(rows, cols=M.cols), tuple(pivots)


def rank(M) -> int:
    """Exact rank via fraction-free elimination."""
    M = _as_matrix(M)
    if M.rows == 0 or M.cols == 0:
        return 0
    if not M.is_integer:
        return len(rref(M)[1])
    rows = M.tolist()
    n, m = M.rows, M.cols
    r = 0
    prev = 1
    for c in range(m):
        p = next((p for p in range(r, n) if rows[p][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pivot = rows[r][c]
        rr = rows[r]
        for i in range(r + 1, n):
            ri = rows[i]
            ric = ri[c]
            for j in range(c + 1, m):
                ri[j] = (pivot * ri[j] - ric * rr[j]) // prev
            ri[c] = 0
        prev = pivot
        r += 1
        if r == n:
            break
    return r


def nullspace(M) -> list[tuple]:
    """Basis of the right kernel, one vector per free column."""
    M = _as_matrix(M)
    R, pivots = rref(M)
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * M.cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -R[i, f]
        basis.append(tuple(to_exact(x) for x in v))
    return basis


def in_column_span(M, vector: Sequence) -> bool:
    """Whether ``vector`` lies in the column span of ``M`` (exact rank test)."""
    M = _as_matrix(M)
    if len(vector) != M.rows:
        raise ValueError(f"vector of length {len(vector)} for {M.rows} rows")
    if all(v == 0 for v in vector):
        return True
    aug = M.hstack(ExactMatrix([[v] for v in vector], cols=1))
    return rank(aug) == rank(M)


# -- batched integer minors -------------------------------------------------

_PERM_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_INT64_SAFE = 2**62


def _perms(k: int) -> tuple[np.ndarray, np.ndarray]:
    if k not in _PERM_CACHE:
        perms = np.array(list(itertools.permutations(range(k))), dtype=np.intp).reshape(-1, k)
        signs = np.array([_perm_sign(p) for p in perms], dtype=np.int64)
        _PERM_CACHE[k] = perms, signs
    return _PERM_CACHE[k]


def _perm_sign(p: Sequence[int]) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def batched_minors(
    M: ExactMatrix, row_sets: Sequence[Sequence[int]], col_sets: Sequence[Sequence[int]]
) -> list[list[int]]:
    """All minors ``M[alpha|beta]`` for ``alpha`` in ``row_sets`` and ``beta`` in ``col_sets``.

    Integer matrices of small order are expanded with vectorised int64 Leibniz
    sums when every term provably fits in 63 bits; otherwise each minor is
    computed with Python integers. Returns a nested list indexed ``[a][b]``.
    """
    if not row_sets or not col_sets:
        return [[] for _ in row_sets]
    k = len(row_sets[0])
    if k == 0:
        return [[1] * len(col_sets) for _ in row_sets]
    maxabs = max((abs(v) for i in range(M.rows) for v in M.row(i)), default=0)
    fits = M.is_integer and k <= 5 and math.factorial(k) * max(maxabs, 1) ** k < _INT64_SAFE
    if not fits:
        return [[minor(M, a, b) for b in col_sets] for a in row_sets]
    A = np.array(M.tolist(), dtype=np.int64).reshape(M.rows, M.cols)
    perms, signs = _perms(k)
    R = np.asarray(row_sets, dtype=np.intp)  # (na, k)
    C = np.asarray(col_sets, dtype=np.intp)  # (nb, k)
    # entries[a, b, p, i] = A[R[a, i], C[b, perms[p, i]]]
    cols = C[:, perms]  # (nb, P, k)
    entries = A[R[:, None, None, :], cols[None, :, :, :]]
    terms = entries.prod(axis=-1)
    out = terms @ signs
    return out.tolist()


# -- sign patterns ----------------------------------------------------------


@dataclass(frozen=True)
class SignPattern:
    """Entrywise signs of a real matrix (the class of all matrices sharing them)."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, M) -> SignPattern:
        M = _as_matrix(M)
        return cls(M.rows, M.cols, tuple(tuple(sign(v) for v in M.row(i)) for i in range(M.rows)))

    def __str__(self) -> str:
        sym = {1: "+", -1: "-", 0: "0"}
        return "\n".join(" ".join(sym[v] for v in row) for row in self.entries)


def term_signs(P: SignPattern, alpha: Sequence[int], beta: Sequence[int]) -> list[int]:
    """Signs of the nonzero terms in the permutation expansion of ``P[alpha|beta]``."""
    alpha, beta = sorted(alpha), sorted(beta)
    k = len(alpha)
    support = [[(c, P.entries[i][j]) for c, j in enumerate(beta) if P.entries[i][j]] for i in alpha]
    out: list[int] = []
    used = [False] * k
    perm = [0] * k

    def walk(r: int, s: int) -> None:
        if r == k:
            out.append(s * _perm_sign(perm))
            return
        for c, e in support[r]:
            if not used[c]:
                used[c] = True
                perm[r] = c
                walk(r + 1, s * e)
                used[c] = False

    walk(0, 1)
    return out


def minor_sign_set(P: SignPattern, alpha: Sequence[int], beta: Sequence[int]) -> frozenset[int]:
    """Signs a minor can take as the matrix ranges over the sign class ``P``.

    All terms of the same sign give a sign-definite minor; mixed terms mean the
    minor takes every sign (each term is a multilinear monomial in distinct
    entries and dominates when its entries are scaled up).
    """
    if len(alpha) != len(beta):
        raise ValueError("minor index sets differ in size")
    signs = set(term_signs(P, alpha, beta))
    if not signs:
        return frozenset({ZERO})
    if len(signs) == 1:
        return frozenset(signs)
    return frozenset({PLUS, MINUS, ZERO})


def subsets(n: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), k))
