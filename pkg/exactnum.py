# exactnum.py
# всё в Fraction, ничего не округляется

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Optional, Sequence, Union

import sympy
from sympy import integer_nthroot

from errors import ContractViolation

Rational = Fraction
Scalar = Union[int, str, Fraction]


def parse_rational(value: Scalar) -> Fraction:
    """'3/4', '-2', '0.5', 3 или Fraction -> Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ContractViolation(f"Not a rational literal: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ContractViolation(f"Not a rational literal: {value!r}") from e
    raise ContractViolation(f"Not a rational literal: {value!r}")


def format_rational(q: Fraction) -> str:
    return str(Fraction(q))


def to_fraction(x) -> Fraction:
    """sympy Rational/Integer -> Fraction"""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if not getattr(x, "is_Rational", False):
        raise ContractViolation(f"Value {x} is not rational")
    return Fraction(int(x.p), int(x.q))


@dataclass(frozen=True)
class RationalVector:
    coords: tuple

    def __post_init__(self):
        coords = tuple(parse_rational(c) for c in self.coords)
        if not coords:
            raise ContractViolation("RationalVector must have positive dimension")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *values: Scalar) -> "RationalVector":
        return cls(tuple(values))

    @classmethod
    def zeros(cls, dim: int) -> "RationalVector":
        return cls((0,) * dim)

    @classmethod
    def unit(cls, dim: int, index: int, value: Scalar = 1) -> "RationalVector":
        coords = [Fraction(0)] * dim
        coords[index] = parse_rational(value)
        return cls(tuple(coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def _check_dim(self, other: "RationalVector"):
        if self.dim != other.dim:
            raise ContractViolation(
                f"Dimension mismatch: {self.dim} vs {other.dim}"
            )

    def __add__(self, other: "RationalVector") -> "RationalVector":
        self._check_dim(other)
        return RationalVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "RationalVector") -> "RationalVector":
        self._check_dim(other)
        return RationalVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "RationalVector":
        return RationalVector(tuple(-a for a in self.coords))

    def __mul__(self, scalar: Scalar) -> "RationalVector":
        s = parse_rational(scalar)
        return RationalVector(tuple(a * s for a in self.coords))

    __rmul__ = __mul__

    def __truediv__(self, scalar: Scalar) -> "RationalVector":
        s = parse_rational(scalar)
        if s == 0:
            raise ContractViolation("Division of a vector by zero")
        return RationalVector(tuple(a / s for a in self.coords))

    def dot(self, other: "RationalVector") -> Fraction:
        self._check_dim(other)
        return sum((a * b for a, b in zip(self.coords, other.coords)), Fraction(0))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def extend(self, *values: Scalar) -> "RationalVector":
        return RationalVector(self.coords + tuple(values))

    def head(self, k: int) -> "RationalVector":
        return RationalVector(self.coords[:k])

    def to_json(self) -> list:
        return [format_rational(c) for c in self.coords]

    def __str__(self):
        return "(" + ", ".join(format_rational(c) for c in self.coords) + ")"


def parse_vector(text: str) -> RationalVector:
    """'1,-1/2' -> RationalVector (базис модели, порядок как в модели)"""
    parts = [p for p in text.replace(" ", "").split(",")]
    if not parts or any(p == "" for p in parts):
        raise ContractViolation(f"Cannot parse class literal {text!r}")
    return RationalVector(tuple(parse_rational(p) for p in parts))


def canonical_ray(v: RationalVector) -> tuple:
    """Примитивный целый вектор на том же луче"""
    if v.is_zero():
        raise ContractViolation("Zero vector has no ray")
    den = reduce(lcm, (c.denominator for c in v.coords), 1)
    ints = [int(c * den) for c in v.coords]
    g = reduce(gcd, (abs(i) for i in ints), 0)
    return tuple(i // g for i in ints)


def ray_vector(v: RationalVector) -> RationalVector:
    return RationalVector(canonical_ray(v))


@dataclass(frozen=True)
class RationalMatrix:
    entries: tuple
    rows: int
    cols: int

    def __post_init__(self):
        entries = tuple(parse_rational(e) for e in self.entries)
        if self.rows <= 0 or self.cols <= 0:
            raise ContractViolation("RationalMatrix needs positive shape")
        if len(entries) != self.rows * self.cols:
            raise ContractViolation(
                f"Entry count {len(entries)} != {self.rows}x{self.cols}"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]]) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ContractViolation("Ragged or empty matrix rows")
        return cls(tuple(e for r in rows for e in r), len(rows), len(rows[0]))

    @classmethod
    def from_columns(cls, columns: Sequence[RationalVector]) -> "RationalMatrix":
        if not columns:
            raise ContractViolation("No columns")
        return cls.from_rows(
            [[c[i] for c in columns] for i in range(columns[0].dim)]
        )

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> RationalVector:
        return RationalVector(self.entries[i * self.cols : (i + 1) * self.cols])

    def column(self, j: int) -> RationalVector:
        return RationalVector(tuple(self[i, j] for i in range(self.rows)))

    def row_list(self) -> list:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix.from_rows(
            [[self[i, j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def apply(self, v: RationalVector) -> RationalVector:
        if v.dim != self.cols:
            raise ContractViolation(
                f"Matrix with {self.cols} columns applied to vector of dim {v.dim}"
            )
        return RationalVector(tuple(self.row(i).dot(v) for i in range(self.rows)))

    def __matmul__(self, other):
        if isinstance(other, RationalVector):
            return self.apply(other)
        if other.rows != self.cols:
            raise ContractViolation("Matrix product shape mismatch")
        return RationalMatrix.from_columns(
            [self.apply(other.column(j)) for j in range(other.cols)]
        )

    def block_diag(self, corner: Scalar) -> "RationalMatrix":
        """Добавить одну строку/столбец с элементом corner на диагонали"""
        rows = [list(self.row(i)) + [0] for i in range(self.rows)]
        rows.append([0] * self.cols + [parse_rational(corner)])
        return RationalMatrix.from_rows(rows)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix.from_rows([[self[i, j] for j in col_idx] for i in row_idx])

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self[i, j] == self[j, i] for i in range(self.rows) for j in range(i)
        )

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix(
            self.rows,
            self.cols,
            [sympy.Rational(e.numerator, e.denominator) for e in self.entries],
        )

    def rank(self) -> int:
        return int(self.to_sympy().rank())

    def nullspace(self) -> list:
        basis = self.to_sympy().nullspace()
        return [RationalVector(tuple(to_fraction(x) for x in b)) for b in basis]

    def is_negative_definite(self) -> bool:
        if not self.is_symmetric():
            return False
        return bool((-self.to_sympy()).is_positive_definite)

    def to_json(self) -> list:
        return [[format_rational(e) for e in self.row(i)] for i in range(self.rows)]


def solve_linear(A: RationalMatrix, b: RationalVector) -> Optional[RationalVector]:
    """Точное решение A·x = b.

    Свободные переменные (столбцы без ведущего элемента при обходе слева
    направо) полагаются равными нулю. None, если система несовместна.
    """
    if A.rows != b.dim:
        raise ContractViolation(f"solve_linear: A has {A.rows} rows, b has dim {b.dim}")
    aug = A.to_sympy().row_join(
        sympy.Matrix([sympy.Rational(c.numerator, c.denominator) for c in b.coords])
    )
    reduced, pivots = aug.rref()
    if A.cols in pivots:
        return None
    x = [Fraction(0)] * A.cols
    for row_idx, col in enumerate(pivots):
        x[col] = to_fraction(reduced[row_idx, A.cols])
    return RationalVector(tuple(x))


def pair(P: RationalMatrix, a: RationalVector, b: RationalVector) -> Fraction:
    """aᵀ·P·b"""
    if a.dim != P.rows or b.dim != P.cols:
        raise ContractViolation(
            f"pair: vectors of dims {a.dim}, {b.dim} against a {P.rows}x{P.cols} pairing"
        )
    return a.dot(P.apply(b))


def rank_of(vectors: Iterable[RationalVector]) -> int:
    vectors = list(vectors)
    if not vectors:
        return 0
    return RationalMatrix.from_rows([list(v) for v in vectors]).rank()


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = parse_rational(self.lo), parse_rational(self.hi)
        if lo > hi:
            raise ContractViolation(f"Empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, q: Fraction) -> "Interval":
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, q: Fraction) -> bool:
        return self.lo <= q <= self.hi

    def __add__(self, other) -> "Interval":
        return Interval(self.lo + lower(other), self.hi + upper(other))

    __radd__ = __add__

    def scale(self, c: Scalar) -> "Interval":
        c = parse_rational(c)
        if c < 0:
            raise ContractViolation("Interval scaling needs a nonnegative factor")
        return Interval(self.lo * c, self.hi * c)

    def to_json(self) -> list:
        return [format_rational(self.lo), format_rational(self.hi)]

    def __str__(self):
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


Value = Union[Fraction, Interval]


def lower(v: Value) -> Fraction:
    return v.lo if isinstance(v, Interval) else parse_rational(v)


def upper(v: Value) -> Fraction:
    return v.hi if isinstance(v, Interval) else parse_rational(v)


def as_interval(v: Value) -> Interval:
    return v if isinstance(v, Interval) else Interval.point(parse_rational(v))


def certainly_le(a: Value, b: Value) -> bool:
    return upper(a) <= lower(b)


def format_value(v: Value) -> str:
    if isinstance(v, Interval):
        return format_rational(v.lo) if v.is_exact else str(v)
    return format_rational(v)


def rational_root(q: Scalar, k: int, tol: Fraction) -> Value:
    """q^(1/k): точно, если q есть k-я степень рационального числа, иначе интервал ширины <= tol."""
    q = parse_rational(q)
    if q < 0:
        raise ContractViolation(f"Root of a negative rational {q}")
    if k < 1:
        raise ContractViolation(f"Root order must be positive, got {k}")
    rn, exact_n = integer_nthroot(q.numerator, k)
    rd, exact_d = integer_nthroot(q.denominator, k)
    if exact_n and exact_d:
        return Fraction(int(rn), int(rd))
    scale = 1
    while Fraction(1, scale) > tol:
        scale *= 2
    floor_scaled = (q.numerator * scale**k) // q.denominator
    r, _ = integer_nthroot(floor_scaled, k)
    return Interval(Fraction(int(r), scale), Fraction(int(r) + 1, scale))


def rational_power(v: Value, num: int, den: int, tol: Fraction) -> Value:
    """v^(num/den) для v >= 0, с внешним округлением интервалов."""
    if isinstance(v, Interval):
        lo = rational_root(v.lo**num, den, tol)
        hi = rational_root(v.hi**num, den, tol)
        return Interval(lower(lo), upper(hi))
    return rational_root(parse_rational(v) ** num, den, tol)
