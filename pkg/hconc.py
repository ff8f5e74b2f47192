# hconc.py
# ℋf(w) = inf pair(w, v) / f(v) по внутренности конуса

from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import optimize

from config import config
from cones import (
    PolyhedralCone,
    cone_from_facets,
    dual_cone,
    exit_parameter,
    intersect,
    membership,
    same_cone,
    sample_cone,
)
from errors import (
    ConeConstructionError,
    ContractViolation,
    DomainError,
    InvalidFunctionError,
    ModelIntegrityError,
    UnsupportedError,
)
from exactnum import (
    Interval,
    RationalMatrix,
    RationalVector,
    Scalar,
    Value,
    as_interval,
    format_value,
    lower,
    parse_rational,
    rank_of,
    rational_root,
    ray_vector,
    pair,
    solve_linear,
    to_fraction,
    upper,
)
from logger import app_logger
from models import CheckReport

POLAR_METHODS = ("auto", "exact", "bisection", "numeric")


def add_values(a: Value, b: Value) -> Value:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return as_interval(a) + as_interval(b)


def scale_value(v: Value, c: Scalar) -> Value:
    c = parse_rational(c)
    if isinstance(v, Interval):
        return v.scale(c)
    return v * c


def min_value(a: Value, b: Value) -> Value:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return min(a, b)
    return Interval(min(lower(a), lower(b)), min(upper(a), upper(b)))


def values_close(a: Value, b: Value, tol: Fraction) -> bool:
    """Совпадение с точностью tol (для точных значений tol не нужен)"""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return lower(a) <= upper(b) + tol and lower(b) <= upper(a) + tol


def _vector(v, dim: int) -> RationalVector:
    v = v if isinstance(v, RationalVector) else RationalVector(tuple(v))
    if v.dim != dim:
        raise ContractViolation(f"Vector of dim {v.dim} where dim {dim} is expected")
    return v


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """Многочлен как набор мономов: ((показатели...), коэффициент)"""

    nvars: int
    terms: tuple

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable) -> "HomogeneousPolynomial":
        merged = {}
        for exps, coeff in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ContractViolation(f"Bad monomial exponents {exps}")
            merged[exps] = merged.get(exps, Fraction(0)) + parse_rational(coeff)
        clean = tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        return cls(nvars, clean)

    @property
    def degrees(self) -> set:
        return {sum(e) for e, _ in self.terms}

    @property
    def degree(self) -> int:
        degs = self.degrees
        return max(degs) if degs else 0

    def is_homogeneous(self, d: Optional[int] = None) -> bool:
        degs = self.degrees
        if not degs:
            return True
        return len(degs) == 1 and (d is None or degs == {d})

    def evaluate(self, v: RationalVector) -> Fraction:
        total = Fraction(0)
        for exps, coeff in self.terms:
            term = coeff
            for x, e in zip(v.coords, exps):
                if e:
                    term *= x**e
            total += term
        return total

    def scaled(self, c: Scalar) -> "HomogeneousPolynomial":
        c = parse_rational(c)
        return HomogeneousPolynomial.from_terms(
            self.nvars, [(e, coeff * c) for e, coeff in self.terms]
        )

    def gram(self) -> RationalMatrix:
        """Симметричная матрица G с p(v) = vᵀ·G·v (только для степени 2)"""
        if not self.is_homogeneous(2) and self.terms:
            raise ContractViolation("Gram matrix needs a quadratic form")
        rows = [[Fraction(0)] * self.nvars for _ in range(self.nvars)]
        for exps, coeff in self.terms:
            idx = [i for i, e in enumerate(exps) for _ in range(e)]
            i, j = idx
            if i == j:
                rows[i][i] += coeff
            else:
                rows[i][j] += coeff / 2
                rows[j][i] += coeff / 2
        return RationalMatrix.from_rows(rows)

    def along_segment(self, a: RationalVector, b: RationalVector, lam: sympy.Symbol):
        """p((1-λ)·a + λ·b) как sympy.Poly от λ над QQ"""
        point = [
            sympy.Rational(x.numerator, x.denominator)
            + lam * sympy.Rational((y - x).numerator, (y - x).denominator)
            for x, y in zip(a.coords, b.coords)
        ]
        expr = sympy.Integer(0)
        for exps, coeff in self.terms:
            term = sympy.Rational(coeff.numerator, coeff.denominator)
            for x, e in zip(point, exps):
                if e:
                    term *= x**e
            expr += term
        return sympy.Poly(sympy.expand(expr), lam, domain="QQ")

    def to_json(self) -> list:
        return [
            {"exponents": list(e), "coeff": format_value(c)} for e, c in self.terms
        ]


class ConeFunction(ABC):
    kind = ""

    def __init__(self, domain: PolyhedralCone):
        self.domain = domain
        self._pl = None
        self._pl_ready = False

    def _check_domain(self, v) -> RationalVector:
        v = _vector(v, self.domain.ambient_dim)
        m = membership(self.domain, v)
        if not m.inside:
            raise DomainError(
                f"{v} is outside the domain of this {self.kind} function (witness {m.witness})"
            )
        return v

    @abstractmethod
    def _value(self, v: RationalVector) -> Value:
        pass

    def evaluate(self, v) -> Value:
        return self._value(self._check_domain(v))

    __call__ = evaluate

    def _piecewise(self) -> Optional["PiecewiseLinearFunction"]:
        return None

    def as_piecewise_linear(self) -> Optional["PiecewiseLinearFunction"]:
        """Кусочно-линейное представление, если функция таковой является"""
        if not self._pl_ready:
            self._pl = self._piecewise()
            self._pl_ready = True
        return self._pl

    def scaled(self, c: Scalar) -> "ConeFunction":
        return ScaledFunction(self, c)

    def float_value(self, v: RationalVector) -> float:
        return float(as_interval(self._value(v)).midpoint)


class LinearFunction(ConeFunction):
    kind = "linear"

    def __init__(self, domain: PolyhedralCone, form):
        super().__init__(domain)
        self.form = _vector(form, domain.ambient_dim)

    def _value(self, v):
        return pair(self.domain.pairing, self.form, v)

    def _piecewise(self):
        return PiecewiseLinearFunction.from_min_forms(self.domain, [self.form])


class PiecewiseLinearFunction(ConeFunction):
    """Значение на каждой камере задаётся линейной формой (вектор двойственного пространства)."""

    kind = "piecewise_linear"

    def __init__(
        self,
        domain: PolyhedralCone,
        chambers: Optional[Sequence[Tuple[PolyhedralCone, RationalVector]]] = None,
        min_forms: Optional[Sequence[RationalVector]] = None,
    ):
        super().__init__(domain)
        if chambers is None and not min_forms:
            raise ContractViolation("Piecewise-linear function needs chambers or forms")
        self._chambers = list(chambers) if chambers is not None else None
        self.min_forms = (
            [_vector(f, domain.ambient_dim) for f in min_forms] if min_forms else None
        )

    @classmethod
    def from_min_forms(cls, domain: PolyhedralCone, forms: Iterable) -> "PiecewiseLinearFunction":
        unique = []
        for f in forms:
            f = _vector(f, domain.ambient_dim)
            if f not in unique:
                unique.append(f)
        return cls(domain, min_forms=unique)

    @property
    def chambers(self) -> list:
        if self._chambers is None:
            self._chambers = self._chambers_from_forms()
        return self._chambers

    def _chambers_from_forms(self) -> list:
        D = self.domain
        if len(self.min_forms) == 1:
            return [(D, self.min_forms[0])]
        chambers = []
        for j, fj in enumerate(self.min_forms):
            facets = list(D.facets)
            facets += [fk - fj for k, fk in enumerate(self.min_forms) if k != j]
            try:
                C = cone_from_facets(D.ambient_dim, facets, D.pairing, D.equations)
            except ConeConstructionError:
                continue
            if C.dimension == D.dimension:
                chambers.append((C, fj))
        app_logger.debug(
            f"Min of {len(self.min_forms)} forms split into {len(chambers)} chambers"
        )
        return chambers

    @property
    def forms(self) -> list:
        if self.min_forms is not None:
            return list(self.min_forms)
        return [f for _, f in self._chambers]

    def chamber_rays(self) -> list:
        rays = list(self.domain.rays)
        for C, _ in self.chambers:
            for r in C.rays:
                if r not in rays:
                    rays.append(r)
        return rays

    def _value(self, v):
        P = self.domain.pairing
        if self.min_forms is not None:
            return min(pair(P, f, v) for f in self.min_forms)
        for C, form in self._chambers:
            if membership(C, v).inside:
                return pair(P, form, v)
        raise ModelIntegrityError(f"No chamber contains {v}")

    def _piecewise(self):
        return self


class PowerPolynomialFunction(ConeFunction):
    """f = p^(1/d), p однородный многочлен степени d на каждой камере"""

    kind = "power_polynomial"

    def __init__(
        self,
        domain: PolyhedralCone,
        chambers: Sequence[Tuple[PolyhedralCone, HomogeneousPolynomial]],
        root: int,
    ):
        super().__init__(domain)
        if root < 1:
            raise ContractViolation("Root degree must be positive")
        for C, p in chambers:
            if not p.is_homogeneous(root):
                raise ContractViolation(
                    f"Chamber polynomial of degrees {sorted(p.degrees)} under a root of order {root}"
                )
        self.chambers = list(chambers)
        self.root = root

    def chamber_of(self, v: RationalVector) -> Tuple[PolyhedralCone, HomogeneousPolynomial]:
        for C, p in self.chambers:
            if membership(C, v).inside:
                return C, p
        raise ModelIntegrityError(f"No chamber contains {v}")

    def power_value(self, v) -> Fraction:
        """f(v)^d точно"""
        v = self._check_domain(v)
        _, p = self.chamber_of(v)
        value = p.evaluate(v)
        if value < 0:
            raise ModelIntegrityError(f"Chamber polynomial is negative at {v}: {value}")
        return value

    def _value(self, v):
        return rational_root(self.power_value(v), self.root, config.tol)

    def restricted_to(self, C: PolyhedralCone) -> "PowerPolynomialFunction":
        chambers = []
        for chamber, p in self.chambers:
            piece = intersect(chamber, C)
            if piece is not None and piece.dimension == C.dimension:
                chambers.append((piece, p))
        if not chambers:
            raise ModelIntegrityError("Restricted domain meets no chamber")
        return PowerPolynomialFunction(C, chambers, self.root)

    def scaled(self, c: Scalar) -> "ConeFunction":
        c = parse_rational(c)
        if c <= 0:
            raise ContractViolation("Scaling factor must be positive")
        return PowerPolynomialFunction(
            self.domain,
            [(C, p.scaled(c**self.root)) for C, p in self.chambers],
            self.root,
        )


class ExitBasedFunction(ConeFunction):
    """v -> sup{t >= 0 : base_map(v) + t·direction ∈ target}"""

    kind = "exit_based"

    def __init__(
        self,
        domain: PolyhedralCone,
        target: PolyhedralCone,
        base_map: RationalMatrix,
        direction: RationalVector,
    ):
        super().__init__(domain)
        if base_map.cols != domain.ambient_dim or base_map.rows != target.ambient_dim:
            raise ContractViolation("Base map shape does not match domain and target")
        self.target = target
        self.base_map = base_map
        self.direction = _vector(direction, target.ambient_dim)

    def _value(self, v):
        t = exit_parameter(self.target, self.base_map.apply(v), self.direction)
        if not isinstance(t, Fraction):
            raise InvalidFunctionError(
                f"Exit along {self.direction} is unbounded from {self.base_map.apply(v)}"
            )
        return t

    def _piecewise(self):
        T = self.target
        D = self.domain
        if any(T.facet_value(e, self.direction) != 0 for e in T.equations):
            return PiecewiseLinearFunction.from_min_forms(
                D, [RationalVector.zeros(D.ambient_dim)]
            )
        pull = self.base_map.transpose()
        forms = []
        for phi in T.facets:
            slope = T.facet_value(phi, self.direction)
            if slope >= 0:
                continue
            normal = pull.apply(T.pairing.transpose().apply(phi))
            w = solve_linear(D.pairing.transpose(), normal)
            if w is None:
                raise ModelIntegrityError(f"Facet {phi} has no counterpart downstairs")
            forms.append(w / (-slope))
        if not forms:
            raise InvalidFunctionError("Exit function is unbounded")
        return PiecewiseLinearFunction.from_min_forms(D, forms)


class PolarOfFunction(ConeFunction):
    kind = "polar_of"

    def __init__(self, inner: ConeFunction, domain: Optional[PolyhedralCone] = None):
        super().__init__(domain if domain is not None else dual_cone(inner.domain))
        self.inner = inner

    def _value(self, w):
        pl = self.as_piecewise_linear()
        if pl is not None:
            return pl._value(w)
        return polar_eval(self.inner, w).value

    def _piecewise(self):
        inner = self.inner.as_piecewise_linear()
        if inner is None:
            return None
        forms = []
        for r in inner.chamber_rays():
            fr = inner._value(r)
            if fr > 0:
                forms.append(r / fr)
        if not forms:
            raise InvalidFunctionError("Inner function vanishes on every chamber ray")
        return PiecewiseLinearFunction.from_min_forms(self.domain, forms)


class QuotientFunction(ConeFunction):
    """f = p/q, deg p - deg q = 1"""

    kind = "quotient"

    def __init__(
        self,
        domain: PolyhedralCone,
        numerator: HomogeneousPolynomial,
        denominator: HomogeneousPolynomial,
    ):
        super().__init__(domain)
        if not (numerator.is_homogeneous() and denominator.is_homogeneous()):
            raise ContractViolation("Quotient parts must be homogeneous")
        if numerator.degree - denominator.degree != 1:
            raise ContractViolation("Quotient must be homogeneous of degree one")
        self.numerator = numerator
        self.denominator = denominator

    def _value(self, v):
        q = self.denominator.evaluate(v)
        if q == 0:
            raise DomainError(f"Denominator vanishes at {v}")
        return self.numerator.evaluate(v) / q


class PointwiseMinFunction(ConeFunction):
    kind = "pointwise_min"

    def __init__(self, first: ConeFunction, second: ConeFunction):
        if not same_cone(first.domain, second.domain):
            raise ContractViolation("Pointwise minimum needs a common domain")
        super().__init__(first.domain)
        self.first = first
        self.second = second

    def _value(self, v):
        return min_value(self.first._value(v), self.second._value(v))

    def _piecewise(self):
        a = self.first.as_piecewise_linear()
        b = self.second.as_piecewise_linear()
        if a is None or b is None:
            return None
        return PiecewiseLinearFunction.from_min_forms(self.domain, a.forms + b.forms)


class ScaledFunction(ConeFunction):
    kind = "scaled"

    def __init__(self, inner: ConeFunction, factor: Scalar):
        super().__init__(inner.domain)
        self.factor = parse_rational(factor)
        if self.factor <= 0:
            raise ContractViolation("Scaling factor must be positive")
        self.inner = inner

    def _value(self, v):
        return scale_value(self.inner._value(v), self.factor)

    def _piecewise(self):
        pl = self.inner.as_piecewise_linear()
        if pl is None:
            return None
        return PiecewiseLinearFunction.from_min_forms(
            self.domain, [f * self.factor for f in pl.forms]
        )


def evaluate(f: ConeFunction, v) -> Value:
    return f.evaluate(v)


def polar_function(f: ConeFunction) -> PolarOfFunction:
    return PolarOfFunction(f)


@dataclass(frozen=True)
class PolarValue:
    value: Value
    exact: bool
    certified: bool = True
    boundary: bool = False
    strategy: str = "exact"
    argmin_ray: Optional[RationalVector] = None
    # value = radicand^(1/root_degree), когда известно точно
    radicand: Optional[Fraction] = None
    root_degree: int = 1

    @property
    def lo(self) -> Fraction:
        return lower(self.value)

    @property
    def hi(self) -> Fraction:
        return upper(self.value)

    def to_json(self) -> dict:
        out = {
            "value": format_value(self.value),
            "exact": self.exact,
            "certified": self.certified,
            "boundary": self.boundary,
            "strategy": self.strategy,
        }
        if isinstance(self.value, Interval):
            out["interval"] = self.value.to_json()
        if self.argmin_ray is not None:
            out["argmin_ray"] = self.argmin_ray.to_json()
        return out


def polar_eval(
    f: ConeFunction, w, tol: Optional[Scalar] = None, method: str = "auto"
) -> PolarValue:
    if method not in POLAR_METHODS:
        raise ContractViolation(f"Unknown polar method {method!r}")
    tol = config.tol if tol is None else parse_rational(tol)
    D = f.domain
    w = _vector(w, D.ambient_dim)

    if any(pair(D.pairing, w, r) < 0 for r in D.rays):
        return PolarValue(Fraction(0), exact=True, boundary=True, strategy="boundary")

    inside = f.evaluate(D.interior_point())
    if upper(inside) <= 0:
        raise InvalidFunctionError(
            f"{f.kind} function is not positive at the interior point {D.interior_point()}"
        )

    if method in ("auto", "exact"):
        pl = f.as_piecewise_linear()
        if pl is not None:
            return _polar_piecewise_linear(pl, w)
        if isinstance(f, PowerPolynomialFunction) and f.root == 2:
            result = _polar_quadratic(f, w, tol)
            if result is not None:
                return result
        if method == "exact":
            raise UnsupportedError(f"No exact polar path for a {f.kind} function")

    if method in ("auto", "bisection"):
        if _is_rank_two_power(f):
            result = _polar_bisection(f, w, tol)
            if result is not None:
                return result
        if method == "bisection":
            raise UnsupportedError(f"Certified bisection needs a power function on a rank-2 cone")

    return _polar_numeric(f, w, tol)


def _polar_piecewise_linear(pl: PiecewiseLinearFunction, w: RationalVector) -> PolarValue:
    P = pl.domain.pairing
    best, argmin = None, None
    for r in pl.chamber_rays():
        fr = pl._value(r)
        if fr <= 0:
            continue
        ratio = pair(P, w, r) / fr
        if best is None or ratio < best:
            best, argmin = ratio, r
    if best is None:
        raise InvalidFunctionError("Function vanishes on every chamber ray")
    app_logger.debug(f"Polar via vertex enumeration: {best} at {argmin}")
    return PolarValue(best, exact=True, strategy="exact", argmin_ray=ray_vector(argmin))


def _polar_quadratic(
    f: PowerPolynomialFunction, w: RationalVector, tol: Fraction
) -> Optional[PolarValue]:
    """Квадрат значения равен минимуму w_S·G_S⁻¹·w_S по линейно независимым наборам лучей камер."""
    P = f.domain.pairing
    best, argmin = None, None
    for chamber, poly in f.chambers:
        G = poly.gram()
        rays = list(chamber.rays)
        wr = [pair(P, w, r) for r in rays]
        for z, wz in zip(rays, wr):
            if wz != 0:
                continue
            if z.dot(G.apply(z)) > 0 or any(z.dot(G.apply(r)) > 0 for r in rays):
                return PolarValue(
                    Fraction(0), exact=True, strategy="exact", argmin_ray=ray_vector(z),
                    radicand=Fraction(0), root_degree=2,
                )
        live = [i for i, x in enumerate(wr) if x > 0]
        for size in range(1, len(live) + 1):
            for idx in combinations(live, size):
                S = [rays[i] for i in idx]
                if rank_of(S) != size:
                    continue
                B = RationalMatrix.from_columns(S)
                GS = B.transpose() @ (G @ B)
                wS = RationalVector(tuple(wr[i] for i in idx))
                y = solve_linear(GS, wS)
                if y is None or any(c <= 0 for c in y):
                    continue
                q = wS.dot(y)
                if q > 0 and (best is None or q < best):
                    best, argmin = q, B.apply(y)
    if best is None:
        return None
    value = rational_root(best, 2, tol)
    app_logger.debug(f"Polar via quadratic critical points: square {best}")
    return PolarValue(
        value,
        exact=isinstance(value, Fraction),
        strategy="exact",
        argmin_ray=ray_vector(argmin),
        radicand=best,
        root_degree=2,
    )


def _q(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


def _root_brackets(h: sympy.Poly, a: Fraction, b: Fraction) -> List[Tuple[Fraction, Fraction]]:
    """Изолирующие отрезки различных корней h на [a, b].

    Отрезки попарно не пересекаются, невырожденный отрезок не содержит a, b
    внутри и не имеет корней на концах; вырожденный (s, s) задаёт рациональный корень.
    """
    g = h.sqf_part()
    if g.degree() < 1:
        return []
    brackets = [[to_fraction(s), to_fraction(t)] for (s, t), _ in g.intervals()]

    def is_root(x: Fraction) -> bool:
        return g.eval(_q(x)) == 0

    for _ in range(config.BISECTION_MAX_STEPS):
        bad = set()
        for i, (s, t) in enumerate(brackets):
            if s == t:
                continue
            # в изолирующем отрезке ровно один корень
            exact = [x for x in (s, t, a, b) if s <= x <= t and is_root(x)]
            if exact:
                brackets[i] = [exact[0], exact[0]]
            elif s < a < t or s < b < t:
                bad.add(i)
        order = sorted(range(len(brackets)), key=lambda i: brackets[i][0])
        for i, j in zip(order, order[1:]):
            if brackets[i][1] >= brackets[j][0]:
                bad.update(k for k in (i, j) if brackets[k][0] < brackets[k][1])
        if not bad:
            break
        for i in bad:
            s, t = brackets[i]
            S, T = g.refine_root(_q(s), _q(t), eps=_q((t - s) / 4))
            brackets[i] = [to_fraction(S), to_fraction(T)]
    else:
        raise ModelIntegrityError(f"Root isolation of {h.as_expr()} did not separate the roots")
    return sorted((s, t) for s, t in brackets if a <= s and t <= b)


def _sign_positive_somewhere(h: sympy.Poly, a: Fraction, b: Fraction) -> bool:
    """Есть ли λ ∈ [a, b] с h(λ) > 0 (точная проверка через изоляцию корней)"""
    if h.is_zero:
        return False
    points = {a, b}
    for s, t in _root_brackets(h, a, b):
        points.update((s, t))
    ordered = sorted(points)
    # знак h постоянен между соседними точками
    tested = ordered + [(x + y) / 2 for x, y in zip(ordered, ordered[1:])]
    return any(h.eval(_q(p)) > 0 for p in tested)


@dataclass
class _RankTwoPolar:
    """Точные сравнения ℋf(w) с рациональным c на конусе ранга 2.

    v(λ) = (1-λ)·r0 + λ·r1, ℓ(λ) = pair(w, v(λ)), на отрезке камеры f^d = p(λ).
    Если ℓ и p зануляются вместе на крайнем луче, общая степень ℓ сокращена:
    отношение ℓ/f тогда непрерывно на всём замкнутом отрезке.
    """

    segments: list
    linear: sympy.Poly
    degree: int

    def gap(self, c: Fraction, p: sympy.Poly, cut: int) -> sympy.Poly:
        """c^d·p/ℓ^cut - ℓ^(d-cut): знак как у c·f - ℓ там, где ℓ > 0"""
        return p * _q(c**self.degree) - self.linear ** (self.degree - cut)

    def below(self, c: Fraction) -> bool:
        """ℋf(w) < c"""
        return any(
            _sign_positive_somewhere(self.gap(c, p, cut), a, b) for a, b, p, cut in self.segments
        )

    def attains(self, c: Fraction) -> bool:
        """ℓ = c·f в некоторой точке отрезка (с учётом предела на крайнем луче)"""
        for a, b, p, cut in self.segments:
            h = self.gap(c, p, cut)
            if h.is_zero or _root_brackets(h, a, b):
                return True
        return False

    def compare(self, c: Fraction) -> int:
        """Знак ℋf(w) - c"""
        if self.below(c):
            return -1
        return 0 if self.attains(c) else 1


def _cancel_common_zero(p: sympy.Poly, linear: sympy.Poly, a: Fraction, b: Fraction, d: int):
    if linear.degree() != 1:
        return p, 0
    (root,) = linear.ground_roots().keys()
    if not a <= to_fraction(root) <= b:
        return p, 0
    cut = 0
    while cut < d and not p.is_zero and p.eval(root) == 0:
        p, rest = p.div(linear)
        if not rest.is_zero:
            raise ModelIntegrityError(f"Inexact division of {p.as_expr()} by {linear.as_expr()}")
        cut += 1
    return p, cut


def _rank_two_polar(f: PowerPolynomialFunction, w: RationalVector) -> _RankTwoPolar:
    D = f.domain
    P = D.pairing
    r0, r1 = D.rays
    basis = RationalMatrix.from_columns([r0, r1])
    lam = sympy.Symbol("lam")

    w0, w1 = pair(P, w, r0), pair(P, w, r1)
    linear = sympy.Poly(_q(w0) + lam * _q(w1 - w0), lam, domain="QQ")

    segments = []
    for chamber, poly in f.chambers:
        params = []
        for u in chamber.rays:
            ab = solve_linear(basis, u)
            params.append(ab[1] / (ab[0] + ab[1]))
        a, b = min(params), max(params)
        if a < b:
            p, cut = _cancel_common_zero(poly.along_segment(r0, r1, lam), linear, a, b, f.root)
            segments.append((a, b, p, cut))
    return _RankTwoPolar(segments, linear, f.root)


def _is_rank_two_power(f: ConeFunction) -> bool:
    D = f.domain
    return isinstance(f, PowerPolynomialFunction) and D.ambient_dim == 2 and len(D.rays) == 2


def _polar_bisection(
    f: PowerPolynomialFunction, w: RationalVector, tol: Fraction
) -> Optional[PolarValue]:
    P = f.domain.pairing
    data = _rank_two_polar(f, w)

    hi, argmin = None, None
    for chamber, _ in f.chambers:
        for u in chamber.rays:
            fu = f._value(u)
            if lower(fu) <= 0:
                continue
            ratio = pair(P, w, u) / lower(fu)
            if hi is None or ratio < hi:
                hi, argmin = ratio, u
    if hi is None:
        return None

    if not data.below(hi):
        return PolarValue(hi, exact=True, strategy="bisection", argmin_ray=ray_vector(argmin))
    if data.attains(Fraction(0)):
        return PolarValue(Fraction(0), exact=True, strategy="bisection")

    lo, steps = Fraction(0), 0
    while hi - lo > tol and steps < config.BISECTION_MAX_STEPS:
        mid = (lo + hi) / 2
        if data.below(mid):
            hi = mid
        else:
            lo = mid
        steps += 1
    app_logger.debug(f"Certified bisection: [{lo}, {hi}] after {steps} steps")
    return PolarValue(Interval(lo, hi), exact=False, strategy="bisection")


def polar_compare(f: ConeFunction, w, c: Scalar) -> Optional[int]:
    """Знак ℋf(w) - c без округлений; None, если точного пути нет.

    Кусочно-линейные функции и квадратичный путь сравниваются по точному
    значению (квадрату), степенные функции ранга 2 через точные тесты знака.
    """
    c = parse_rational(c)
    D = f.domain
    w = _vector(w, D.ambient_dim)

    def sign(x: Fraction) -> int:
        return (x > 0) - (x < 0)

    if any(pair(D.pairing, w, r) < 0 for r in D.rays):
        return sign(-c)
    pl = f.as_piecewise_linear()
    if pl is not None:
        return sign(_polar_piecewise_linear(pl, w).value - c)
    if c < 0:
        return 1
    if isinstance(f, PowerPolynomialFunction) and f.root == 2:
        pv = _polar_quadratic(f, w, config.tol)
        if pv is not None:
            return sign(pv.radicand - c * c)
    if _is_rank_two_power(f):
        return _rank_two_polar(f, w).compare(c)
    return None


def _combination(rays: Sequence[RationalVector], lam: np.ndarray) -> Optional[RationalVector]:
    coeffs = [Fraction(float(max(x, 0.0))).limit_denominator(10**9) for x in lam]
    if not any(coeffs):
        return None
    v = RationalVector.zeros(rays[0].dim)
    for c, r in zip(coeffs, rays):
        if c:
            v = v + r * c
    return v


def _polar_numeric(f: ConeFunction, w: RationalVector, tol: Fraction) -> PolarValue:
    D = f.domain
    P = D.pairing
    rays = list(D.rays)
    k = len(rays)

    def gap(lam: np.ndarray, c: float) -> float:
        v = _combination(rays, lam)
        if v is None:
            return 0.0
        return float(pair(P, w, v)) - c * f.float_value(v)

    def feasible(c: Fraction) -> bool:
        cf = float(c)
        corners = [gap(np.eye(k)[i], cf) for i in range(k)]
        if k == 1:
            best = corners[0]
        elif k == 2:
            res = optimize.minimize_scalar(
                lambda t: gap(np.array([1.0 - t, t]), cf),
                bounds=(0.0, 1.0),
                method="bounded",
                options={"xatol": 1e-12},
            )
            best = min([res.fun] + corners)
        else:
            res = optimize.minimize(
                lambda lam: gap(lam, cf),
                x0=np.full(k, 1.0 / k),
                method="SLSQP",
                bounds=[(0.0, 1.0)] * k,
                constraints=[{"type": "eq", "fun": lambda lam: np.sum(lam) - 1.0}],
            )
            best = min([float(res.fun)] + corners)
        return best < -1e-12

    hi = None
    for r in rays:
        fr = f._value(r)
        if lower(fr) > 0:
            ratio = pair(P, w, r) / lower(fr)
            hi = ratio if hi is None else min(hi, ratio)
    if hi is None:
        # все лучи на границе положительности: стартуем из внутренней точки
        u = D.interior_point()
        hi = pair(P, w, u) / lower(f._value(u))

    lo, steps = Fraction(0), 0
    while hi - lo > tol and steps < config.BISECTION_MAX_STEPS:
        mid = (lo + hi) / 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
        steps += 1
    app_logger.debug(f"Numeric polar bisection: [{float(lo)}, {float(hi)}] after {steps} steps")
    return PolarValue(Interval(lo, hi), exact=False, certified=False, strategy="numeric")


def check_hconc(
    f: ConeFunction,
    samples: int,
    seed: int,
    tol: Optional[Scalar] = None,
    name: str = "hconc",
) -> CheckReport:
    """Однородность, супераддитивность и положительность на случайных точках домена."""
    tol = config.tol if tol is None else parse_rational(tol)
    report = CheckReport(check=name, samples=samples, values={"kind": f.kind})
    rng = np.random.default_rng(seed)
    D = f.domain
    bound = config.SAMPLE_BOUND

    pairs = list(combinations(D.rays, 2))
    vs = sample_cone(D, rng, samples, bound=bound)
    ws = sample_cone(D, rng, samples, bound=bound)
    pairs += list(zip(vs, ws))

    for v in vs:
        t = Fraction(int(rng.integers(1, bound + 1)), int(rng.integers(1, bound + 1)))
        lhs, rhs = f.evaluate(v * t), scale_value(f.evaluate(v), t)
        if not values_close(lhs, rhs, tol):
            report.fail(property="homogeneity", v=v, t=t, f_tv=lhs, t_fv=rhs)

    for v, w in pairs:
        fvw = f.evaluate(v + w)
        fsum = add_values(f.evaluate(v), f.evaluate(w))
        slack = Fraction(0) if isinstance(fvw, Fraction) and isinstance(fsum, Fraction) else tol
        if upper(fvw) + slack < lower(fsum):
            report.fail(property="superadditivity", v=v, w=w, f_v_plus_w=fvw, f_v_plus_f_w=fsum)

    for u in sample_cone(D, rng, min(samples, 50), interior=True, bound=bound):
        if upper(f.evaluate(u)) <= 0:
            report.fail(property="positivity", v=u, f_v=f.evaluate(u))

    if report.witnesses:
        app_logger.warning(f"{name}: {len(report.witnesses)} violations, first {report.witnesses[0]}")
    return report


def check_duality_transform(
    f: ConeFunction,
    g: ConeFunction,
    samples: int,
    tol: Optional[Scalar] = None,
    seed: int = 0,
    order_pairs: int = 3,
    name: str = "duality_transform",
) -> CheckReport:
    """ℋf == g и ℋg == f на выборке лучей, плюс обращение порядка ℋ."""
    tol = config.tol if tol is None else parse_rational(tol)
    report = CheckReport(check=name, samples=samples)
    rng = np.random.default_rng(seed)
    bound = config.SAMPLE_BOUND

    for w in list(g.domain.rays) + sample_cone(g.domain, rng, samples, bound=bound):
        h, gw = polar_eval(f, w, tol), g.evaluate(w)
        if not values_close(h.value, gw, tol):
            report.fail(property="involution", side="polar(f) vs g", w=w, polar=h.value, g=gw)

    for v in list(f.domain.rays) + sample_cone(f.domain, rng, samples, bound=bound):
        h, fv = polar_eval(g, v, tol), f.evaluate(v)
        if not values_close(h.value, fv, tol):
            report.fail(property="involution", side="polar(g) vs f", v=v, polar=h.value, f=fv)

    points = sample_cone(g.domain, rng, min(samples, 10), bound=bound)
    for forms in sample_cone(g.domain, rng, order_pairs, interior=True, bound=bound):
        smaller = PointwiseMinFunction(f, LinearFunction(f.domain, forms))
        for u in points:
            h_small, h_big = polar_eval(smaller, u, tol), polar_eval(f, u, tol)
            if upper(h_small.value) + tol < lower(h_big.value):
                report.fail(
                    property="order_reversal", form=forms, w=u,
                    polar_min=h_small.value, polar_f=h_big.value,
                )

    if report.witnesses:
        app_logger.warning(f"{name}: {len(report.witnesses)} violations")
    return report
