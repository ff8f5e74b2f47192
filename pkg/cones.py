# cones.py
# фасеты лежат в двойственном пространстве: pair(P, f, r) >= 0, для cdd нормали Pᵀ·f

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

import cdd
import numpy as np

from logger import app_logger
from errors import ConeConstructionError, ContractViolation, PreconditionError
from exactnum import (
    RationalMatrix,
    RationalVector,
    canonical_ray,
    format_rational,
    pair,
    rank_of,
    solve_linear,
)

INFINITY = math.inf


class MembershipStatus(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class ConeMembership:
    status: MembershipStatus
    witness: Optional[RationalVector] = None

    @property
    def inside(self) -> bool:
        return self.status is not MembershipStatus.OUTSIDE


@dataclass(frozen=True)
class PolyhedralCone:
    ambient_dim: int
    rays: tuple
    facets: tuple
    pairing: RationalMatrix
    equations: tuple = ()

    @property
    def dimension(self) -> int:
        return rank_of(self.rays)

    @property
    def is_full_dimensional(self) -> bool:
        return not self.equations

    def ray_set(self) -> frozenset:
        return frozenset(canonical_ray(r) for r in self.rays)

    def facet_value(self, f: RationalVector, v: RationalVector) -> Fraction:
        return pair(self.pairing, f, v)

    def interior_point(self) -> RationalVector:
        """Сумма лучей: внутренняя точка (относительная для неполных конусов)"""
        total = self.rays[0]
        for r in self.rays[1:]:
            total = total + r
        return total

    def to_json(self) -> dict:
        out = {
            "ambient_dim": self.ambient_dim,
            "rays": [r.to_json() for r in self.rays],
            "facets": [f.to_json() for f in self.facets],
            "pairing": self.pairing.to_json(),
        }
        if self.equations:
            out["equations"] = [e.to_json() for e in self.equations]
        return out

    def __str__(self):
        return "cone{" + ", ".join(str(r) for r in self.rays) + "}"


def _as_vector(v, dim: int, what: str) -> RationalVector:
    v = v if isinstance(v, RationalVector) else RationalVector(tuple(v))
    if v.dim != dim:
        raise ContractViolation(f"{what} has dim {v.dim}, expected {dim}")
    return v


def _sorted_unique(vectors: Iterable[RationalVector]) -> tuple:
    keys = sorted({canonical_ray(v) for v in vectors}, reverse=True)
    return tuple(RationalVector(k) for k in keys)


def _check_pairing(ambient_dim: int, pairing: RationalMatrix):
    if pairing.rows != ambient_dim or pairing.cols != ambient_dim:
        raise ContractViolation(
            f"Pairing is {pairing.rows}x{pairing.cols}, ambient dim is {ambient_dim}"
        )
    if pairing.rank() != ambient_dim:
        raise ConeConstructionError("Pairing matrix is degenerate")


def _generators_to_normals(ambient_dim: int, rays: Sequence[RationalVector]):
    """V -> H через cdd. Возвращает (неравенства a·x >= 0, уравнения a·x = 0)."""
    rows = [[Fraction(1)] + [Fraction(0)] * ambient_dim]
    rows += [[Fraction(0)] + list(r.coords) for r in rays]
    mat = cdd.Matrix(rows, number_type="fraction")
    mat.rep_type = cdd.RepType.GENERATOR
    ineqs = cdd.Polyhedron(mat).get_inequalities()

    normals, equations = [], []
    for i in range(ineqs.row_size):
        row = [Fraction(x) for x in ineqs[i]]
        a = row[1:]
        if all(x == 0 for x in a):
            continue
        (equations if i in ineqs.lin_set else normals).append(RationalVector(tuple(a)))
    return normals, equations


def _normals_to_generators(ambient_dim: int, normals, equations):
    """H -> V через cdd. Возвращает крайние лучи; конус с прямой отвергается."""
    rows = [[Fraction(0)] + list(a.coords) for a in normals]
    if not rows:
        rows = [[Fraction(0)] * (ambient_dim + 1)]
    mat = cdd.Matrix(rows, number_type="fraction")
    if equations:
        mat.extend([[Fraction(0)] + list(e.coords) for e in equations], linear=True)
    mat.rep_type = cdd.RepType.INEQUALITY
    gens = cdd.Polyhedron(mat).get_generators()

    rays = []
    for i in range(gens.row_size):
        row = [Fraction(x) for x in gens[i]]
        if i in gens.lin_set:
            raise ConeConstructionError("Cone contains a line")
        if row[0] != 0:
            continue  # вершина-начало координат
        d = RationalVector(tuple(row[1:]))
        if not d.is_zero():
            rays.append(d)
    return rays


def _normal_to_facet(pairing: RationalMatrix, a: RationalVector) -> RationalVector:
    f = solve_linear(pairing.transpose(), a)
    if f is None:
        raise ConeConstructionError(f"Normal {a} has no preimage under the pairing")
    return f


def _assemble(ambient_dim, pairing, normals, equations, rays) -> PolyhedralCone:
    facets = _sorted_unique(_normal_to_facet(pairing, a) for a in normals)
    eqs = tuple(_normal_to_facet(pairing, e) for e in equations)
    cone = PolyhedralCone(
        ambient_dim=ambient_dim,
        rays=_sorted_unique(rays),
        facets=facets,
        pairing=pairing,
        equations=eqs,
    )
    app_logger.debug(
        f"Cone built: {len(cone.rays)} rays, {len(cone.facets)} facets, dim {ambient_dim}"
    )
    return cone


def cone_from_rays(
    ambient_dim: int, rays: Iterable, pairing: RationalMatrix
) -> PolyhedralCone:
    rays = [_as_vector(r, ambient_dim, "ray") for r in rays]
    if not rays:
        raise ConeConstructionError("A cone needs at least one ray")
    if any(r.is_zero() for r in rays):
        raise ConeConstructionError("Zero vector among rays")
    _check_pairing(ambient_dim, pairing)

    normals, equations = _generators_to_normals(ambient_dim, rays)
    extreme = _normals_to_generators(ambient_dim, normals, equations)
    if not extreme:
        raise ConeConstructionError("Rays span the zero cone")
    return _assemble(ambient_dim, pairing, normals, equations, extreme)


def cone_from_facets(
    ambient_dim: int,
    facets: Iterable,
    pairing: RationalMatrix,
    equations: Iterable = (),
) -> PolyhedralCone:
    """H -> V: фасеты в двойственном пространстве, pair(pairing, f, v) >= 0"""
    _check_pairing(ambient_dim, pairing)
    facets = [_as_vector(f, ambient_dim, "facet") for f in facets]
    equations = [_as_vector(e, ambient_dim, "equation") for e in equations]
    to_normal = pairing.transpose()
    normals = [to_normal.apply(f) for f in facets if not f.is_zero()]
    eq_normals = [to_normal.apply(e) for e in equations if not e.is_zero()]

    rays = _normals_to_generators(ambient_dim, normals, eq_normals)
    if not rays:
        raise ConeConstructionError("Inequalities describe the zero cone")
    # минимальное H-представление пересчитываем из лучей
    normals, eq_normals = _generators_to_normals(ambient_dim, rays)
    return _assemble(ambient_dim, pairing, normals, eq_normals, rays)


def dual_cone(C: PolyhedralCone) -> PolyhedralCone:
    """{w : pair(w, v) >= 0 для всех v из C}, в пространстве фасетов C"""
    if C.equations:
        raise ConeConstructionError(
            "Dual of a lower-dimensional cone contains a line"
        )
    return cone_from_rays(C.ambient_dim, C.facets, C.pairing.transpose())


def membership(C: PolyhedralCone, v) -> ConeMembership:
    v = _as_vector(v, C.ambient_dim, "vector")
    for e in C.equations:
        value = C.facet_value(e, v)
        if value != 0:
            return ConeMembership(MembershipStatus.OUTSIDE, e if value < 0 else -e)

    tight = None
    for f in C.facets:
        value = C.facet_value(f, v)
        if value < 0:
            return ConeMembership(MembershipStatus.OUTSIDE, f)
        if value == 0 and tight is None:
            tight = f
    if tight is not None:
        return ConeMembership(MembershipStatus.BOUNDARY, tight)
    if C.equations:
        return ConeMembership(MembershipStatus.BOUNDARY, C.equations[0])
    return ConeMembership(MembershipStatus.INTERIOR)


def contains(C: PolyhedralCone, v) -> bool:
    return membership(C, v).inside


def is_interior(C: PolyhedralCone, v) -> bool:
    return membership(C, v).status is MembershipStatus.INTERIOR


def exit_parameter(
    C: PolyhedralCone, base, dir
) -> Union[Fraction, float]:
    """sup{t >= 0 : base + t·dir ∈ C}; math.inf, если ни один фасет не ограничивает"""
    base = _as_vector(base, C.ambient_dim, "base")
    dir = _as_vector(dir, C.ambient_dim, "direction")
    m = membership(C, base)
    if not m.inside:
        raise PreconditionError(f"Base {base} is outside {C} (witness {m.witness})")

    if any(C.facet_value(e, dir) != 0 for e in C.equations):
        return Fraction(0)

    best: Union[Fraction, float] = INFINITY
    for f in C.facets:
        slope = C.facet_value(f, dir)
        if slope < 0:
            t = -C.facet_value(f, base) / slope
            if t < best:
                best = t
    return best


def same_cone(C1: PolyhedralCone, C2: PolyhedralCone) -> bool:
    return C1.ambient_dim == C2.ambient_dim and C1.ray_set() == C2.ray_set()


def contains_cone(outer: PolyhedralCone, inner: PolyhedralCone) -> bool:
    return all(contains(outer, r) for r in inner.rays)


def intersect(C1: PolyhedralCone, C2: PolyhedralCone) -> Optional[PolyhedralCone]:
    """Пересечение (та же пара спаривания); None, если пересечение = {0}."""
    if C1.ambient_dim != C2.ambient_dim:
        raise ContractViolation("Cones live in different spaces")
    # фасеты C2 переводим в координаты спаривания C1
    facets = list(C1.facets)
    equations = list(C1.equations)
    for f in C2.facets:
        facets.append(_normal_to_facet(C1.pairing, C2.pairing.transpose().apply(f)))
    for e in C2.equations:
        equations.append(_normal_to_facet(C1.pairing, C2.pairing.transpose().apply(e)))
    try:
        return cone_from_facets(C1.ambient_dim, facets, C1.pairing, equations)
    except ConeConstructionError as e:
        if "zero cone" in str(e):
            return None
        raise


def in_cone_by_rays(C: PolyhedralCone, v) -> bool:
    """Проверка по V-представлению: v есть неотрицательная комбинация лучей."""
    v = _as_vector(v, C.ambient_dim, "vector")
    if v.is_zero():
        return True
    rank = C.dimension
    for size in range(1, rank + 1):
        for subset in combinations(C.rays, size):
            if rank_of(subset) != size:
                continue
            coeffs = solve_linear(RationalMatrix.from_columns(list(subset)), v)
            if coeffs is not None and all(c >= 0 for c in coeffs):
                return True
    return False


def sample_cone(
    C: PolyhedralCone,
    rng: np.random.Generator,
    count: int,
    interior: bool = False,
    bound: int = 6,
) -> list:
    """Случайные неотрицательные целые комбинации лучей (детерминированы seed'ом)"""
    low = 1 if interior else 0
    samples = []
    while len(samples) < count:
        coeffs = rng.integers(low, bound + 1, size=len(C.rays))
        if not coeffs.any():
            continue
        v = RationalVector.zeros(C.ambient_dim)
        for k, r in zip(coeffs.tolist(), C.rays):
            if k:
                v = v + r * int(k)
        samples.append(v)
    return samples


def format_cone(C: PolyhedralCone) -> str:
    rays = ", ".join("(" + ", ".join(format_rational(c) for c in r) + ")" for r in C.rays)
    return f"cone{{{rays}}}"
