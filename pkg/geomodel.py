# geomodel.py
# дивизоры (π*D, E), кривые (π*γ, ℓ_E), E и ℓ_E последние, pair(E, ℓ_E) = -1

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError

from config import config
from cones import (
    PolyhedralCone,
    cone_from_rays,
    contains,
    contains_cone,
    dual_cone,
    sample_cone,
    same_cone,
)
from errors import (
    ConePolarError,
    ContractViolation,
    ModelIntegrityError,
    ModelLoadError,
    PreconditionError,
    UnsupportedError,
)
from exactnum import RationalMatrix, RationalVector, pair, parse_rational, solve_linear
from hconc import HomogeneousPolynomial, PowerPolynomialFunction
from logger import app_logger


def _rational(value: Any) -> Fraction:
    if isinstance(value, float):
        raise ValueError("rationals must be given as strings or integers")
    try:
        return parse_rational(value)
    except ConePolarError as e:
        raise ValueError(str(e)) from e


Rational = Annotated[Fraction, BeforeValidator(_rational)]
ClassList = List[Rational]


class _Schema(BaseModel):
    model_config = ConfigDict(
        arbitrary_types_allowed=True, populate_by_name=True, extra="forbid"
    )


class TermSpec(_Schema):
    exponents: List[int]
    coeff: Rational


class CurvePowerTermSpec(_Schema):
    exponents: List[int]
    class_: ClassList = Field(alias="class")


class ChamberSpec(_Schema):
    rays: List[ClassList]
    terms: List[TermSpec]


class VolumeSpec(_Schema):
    chambers: List[ChamberSpec] = Field(min_length=1)


class LabeledClassSpec(_Schema):
    label: str
    class_: ClassList = Field(alias="class")


class NegativeCurveSpec(LabeledClassSpec):
    self_int: Rational


class IncidenceSpec(_Schema):
    label: str = ""
    class_: ClassList = Field(alias="class")
    mult: Rational = Fraction(1)


class ConesSpec(_Schema):
    nef: List[ClassList] = Field(min_length=1)
    eff_div: List[ClassList] = Field(min_length=1)
    eff_curves: List[ClassList] = Field(min_length=1)
    mov_curves: List[ClassList] = Field(min_length=1)


class ProfileSpec(_Schema):
    name: str
    on: List[str] = []
    cones: ConesSpec
    pairing: Optional[List[ClassList]] = None
    curves_through_x: List[IncidenceSpec] = []
    divisors_through_x: List[IncidenceSpec] = []
    note: str = ""


class VanishingSpec(_Schema):
    alpha: ClassList
    enk_components: List[str]


class ExpectedSpec(_Schema):
    op: str
    profile: str = "generic"
    input: str
    route: Optional[str] = None
    expected: str
    oracle: str


class ModelSpec(_Schema):
    name: str
    dim_n: int = Field(ge=2)
    divisor_basis: List[str] = Field(min_length=1)
    curve_basis: List[str] = Field(min_length=1)
    pairing: List[ClassList]
    curve_power: Optional[List[CurvePowerTermSpec]] = None
    cones: ConesSpec
    negative_curves: List[NegativeCurveSpec] = []
    prime_divisors: List[LabeledClassSpec] = []
    volume: VolumeSpec
    vanishing: List[VanishingSpec] = []
    profiles: List[ProfileSpec] = Field(min_length=1)
    provenance: str = ""
    expected: List[ExpectedSpec] = []


@dataclass(frozen=True)
class LabeledClass:
    label: str
    cls: RationalVector


@dataclass(frozen=True)
class NegativeCurve:
    label: str
    cls: RationalVector
    self_int: Fraction


@dataclass(frozen=True)
class Incidence:
    label: str
    cls: RationalVector
    mult: Fraction


@dataclass(frozen=True)
class VanishingData:
    alpha: RationalVector
    enk_components: tuple


@dataclass
class BlowupModel:
    downstairs: "VarietyModel" = field(repr=False, compare=False)
    nef_Y: PolyhedralCone
    eff_div_Y: PolyhedralCone
    eff_curves_Y: PolyhedralCone
    mov_curves_Y: PolyhedralCone
    pairing_Y: RationalMatrix

    @property
    def rho_Y(self) -> int:
        return self.pairing_Y.rows


@dataclass
class PointProfile:
    name: str
    blowup: BlowupModel
    curves_through_x: List[Incidence] = field(default_factory=list)
    divisors_through_x: List[Incidence] = field(default_factory=list)
    on: tuple = ()
    note: str = ""
    # построенные функции s_x, n_x, N_x, S_x (см. invariants)
    cache: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)


@dataclass
class ZariskiDecomposition:
    positive: RationalVector
    negative_support: List[tuple] = field(default_factory=list)  # (label, class, coeff)

    @property
    def negative(self) -> RationalVector:
        total = RationalVector.zeros(self.positive.dim)
        for _, cls, coeff in self.negative_support:
            total = total + cls * coeff
        return total

    def to_json(self) -> dict:
        return {
            "positive": self.positive.to_json(),
            "negative": [
                {"label": label, "class": cls.to_json(), "coeff": str(coeff)}
                for label, cls, coeff in self.negative_support
            ],
        }


@dataclass
class VarietyModel:
    name: str
    dim_n: int
    divisor_basis: List[str]
    curve_basis: List[str]
    pairing: RationalMatrix
    nef: PolyhedralCone
    eff_div: PolyhedralCone
    eff_curves: PolyhedralCone
    mov_curves: PolyhedralCone
    negative_curves: List[NegativeCurve]
    prime_divisors: List[LabeledClass]
    volume_chambers: list
    curve_power: Optional[list]
    vanishing: List[VanishingData]
    profiles: List[PointProfile] = field(default_factory=list)
    provenance: str = ""
    expected: List[ExpectedSpec] = field(default_factory=list)
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)
    _volume_function: Optional[PowerPolynomialFunction] = field(default=None, repr=False)
    cache: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def rho(self) -> int:
        return len(self.divisor_basis)

    @property
    def is_surface(self) -> bool:
        return self.dim_n == 2

    @property
    def volume_function(self) -> PowerPolynomialFunction:
        """vol^(1/n) на Eff¹"""
        if self._volume_function is None:
            self._volume_function = PowerPolynomialFunction(
                self.eff_div, self.volume_chambers, self.dim_n
            )
        return self._volume_function

    def profile(self, name: str) -> PointProfile:
        for p in self.profiles:
            if p.name == name:
                return p
        raise PreconditionError(
            f"Model {self.name} has no profile {name!r} (known: {[p.name for p in self.profiles]})"
        )

    def labeled_classes(self) -> Dict[str, RationalVector]:
        out = {c.label: c.cls for c in self.negative_curves}
        out.update({d.label: d.cls for d in self.prime_divisors})
        return out

    def to_json(self) -> dict:
        return self.raw


def divisor_pairing(M: RationalMatrix) -> RationalMatrix:
    """Спаривание конусов дивизоров: фасеты задаются классами кривых"""
    return M.transpose()


def curve_pairing(M: RationalMatrix) -> RationalMatrix:
    return M


def blowup_pairing(M: RationalMatrix) -> RationalMatrix:
    return M.block_diag(-1)


def pullback_div(B: BlowupModel, L) -> RationalVector:
    L = L if isinstance(L, RationalVector) else RationalVector(tuple(L))
    if L.dim != B.rho_Y - 1:
        raise ContractViolation(f"Divisor class of dim {L.dim}, model rank is {B.rho_Y - 1}")
    return L.extend(0)


def pullback_curve(B: BlowupModel, alpha) -> RationalVector:
    alpha = alpha if isinstance(alpha, RationalVector) else RationalVector(tuple(alpha))
    if alpha.dim != B.rho_Y - 1:
        raise ContractViolation(f"Curve class of dim {alpha.dim}, model rank is {B.rho_Y - 1}")
    return alpha.extend(0)


def exceptional_divisor(B: BlowupModel) -> RationalVector:
    return RationalVector.unit(B.rho_Y, B.rho_Y - 1)


def exceptional_curve_class(B: BlowupModel) -> RationalVector:
    """e = (-E)^(n-1) = -ℓ_E.

    E^(n-1) = (-1)^(n-2)·ℓ_E, значит (-E)^(n-1) = (-1)^(n-1)·(-1)^(n-2)·ℓ_E = -ℓ_E
    в любой размерности n >= 2.
    """
    return RationalVector.unit(B.rho_Y, B.rho_Y - 1, -1)


def curve_power_of(M: VarietyModel, L) -> RationalVector:
    """L^(n-1) как класс кривой"""
    L = _class(M, L)
    if M.curve_power is None:
        if not M.is_surface:
            raise UnsupportedError(f"Model {M.name} has no curve_power data")
        return L
    total = RationalVector.zeros(M.rho)
    for exps, cls in M.curve_power:
        coeff = Fraction(1)
        for x, e in zip(L.coords, exps):
            if e:
                coeff *= x**e
        if coeff:
            total = total + cls * coeff
    return total


def top_intersection(M: VarietyModel, L) -> Fraction:
    L = _class(M, L)
    return pair(M.pairing, L, curve_power_of(M, L))


def _class(M: VarietyModel, v) -> RationalVector:
    v = v if isinstance(v, RationalVector) else RationalVector(tuple(v))
    if v.dim != M.rho:
        raise ContractViolation(f"Class {v} has dim {v.dim}, model {M.name} has rank {M.rho}")
    return v


def zariski_decompose(M: VarietyModel, L) -> ZariskiDecomposition:
    if not M.is_surface:
        raise UnsupportedError(f"Zariski decomposition is only available on surfaces, {M.name} has dim {M.dim_n}")
    L = _class(M, L)
    if not contains(M.eff_div, L):
        raise PreconditionError(f"{L} is not pseudo-effective on {M.name}")

    curves = M.negative_curves
    support: List[int] = []
    coeffs: List[Fraction] = []
    N = RationalVector.zeros(M.rho)
    for _ in range(len(curves) + 1):
        P = L - N
        new = [
            i
            for i, c in enumerate(curves)
            if i not in support and pair(M.pairing, P, c.cls) < 0
        ]
        if not new:
            break
        support = sorted(support + new)
        gram = RationalMatrix.from_rows(
            [[pair(M.pairing, curves[j].cls, curves[i].cls) for j in support] for i in support]
        )
        if not gram.is_negative_definite():
            raise ModelIntegrityError(
                f"Gram matrix of {[curves[i].label for i in support]} is not negative definite"
            )
        rhs = RationalVector(tuple(pair(M.pairing, L, curves[i].cls) for i in support))
        x = solve_linear(gram, rhs)
        coeffs = list(x)
        if any(c < 0 for c in coeffs):
            raise ModelIntegrityError(f"Negative Zariski coefficient for {L}: {coeffs}")
        N = RationalVector.zeros(M.rho)
        for i, c in zip(support, coeffs):
            N = N + curves[i].cls * c
    else:
        raise ModelIntegrityError(f"Zariski loop did not stabilise for {L}")

    P = L - N
    if any(pair(M.pairing, P, c.cls) < 0 for c in curves):
        raise ModelIntegrityError(f"Positive part {P} of {L} is not nef")
    negative = [
        (curves[i].label, curves[i].cls, c) for i, c in zip(support, coeffs) if c > 0
    ]
    return ZariskiDecomposition(positive=P, negative_support=negative)


def volume(M: VarietyModel, L) -> Fraction:
    L = _class(M, L)
    if not contains(M.eff_div, L):
        raise PreconditionError(f"{L} is not pseudo-effective on {M.name}")
    if M.is_surface:
        P = zariski_decompose(M, L).positive
        return pair(M.pairing, P, P)
    return M.volume_function.power_value(L)


def null_curves(M: VarietyModel, L) -> List[str]:
    """Отрицательные кривые C с L·C = 0"""
    L = _class(M, L)
    return [c.label for c in M.negative_curves if pair(M.pairing, L, c.cls) == 0]


def _location(loc: tuple) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += ("." if out else "") + str(part).rstrip("_")
    return out or "$"


def _vectors(rows, dim: int, where: str) -> List[RationalVector]:
    out = []
    for i, row in enumerate(rows):
        if len(row) != dim:
            raise ModelLoadError(f"expected {dim} coordinates, got {len(row)}", f"{where}[{i}]")
        out.append(RationalVector(tuple(row)))
    return out


def _cone(rows, dim: int, pairing: RationalMatrix, where: str) -> PolyhedralCone:
    try:
        return cone_from_rays(dim, _vectors(rows, dim, where), pairing)
    except ConePolarError as e:
        raise ModelLoadError(str(e), where) from e


def _check_dualities(nef, eff_div, eff_curves, mov_curves, where: str):
    if not same_cone(dual_cone(nef), eff_curves):
        raise ModelLoadError(
            f"Nef* != Eff_1: dual of nef is {dual_cone(nef)}, eff_curves is {eff_curves}",
            f"{where}.eff_curves",
        )
    if not same_cone(dual_cone(eff_div), mov_curves):
        raise ModelLoadError(
            f"Eff^1* != Mov_1: dual of eff_div is {dual_cone(eff_div)}, mov_curves is {mov_curves}",
            f"{where}.mov_curves",
        )
    if not contains_cone(eff_div, nef):
        raise ModelLoadError("nef cone is not inside eff_div", f"{where}.nef")
    if not contains_cone(eff_curves, mov_curves):
        raise ModelLoadError("mov_curves is not inside eff_curves", f"{where}.mov_curves")


def _read_source(source: Union[str, Path, dict]) -> dict:
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ModelLoadError(f"cannot read model file: {e}", str(path)) from e
    except json.JSONDecodeError as e:
        raise ModelLoadError(f"invalid JSON: {e}", str(path)) from e


def load_model(source: Union[str, Path, dict]) -> VarietyModel:
    raw = _read_source(source)
    try:
        spec = ModelSpec.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise ModelLoadError(first["msg"], _location(first["loc"])) from e

    rho = len(spec.divisor_basis)
    n = spec.dim_n
    if len(spec.curve_basis) != rho:
        raise ModelLoadError("curve basis and divisor basis differ in size", "curve_basis")
    if len(spec.pairing) != rho:
        raise ModelLoadError(f"pairing must have {rho} rows", "pairing")
    pairing = RationalMatrix.from_rows(_vectors(spec.pairing, rho, "pairing"))
    if pairing.rank() != rho:
        raise ModelLoadError("pairing matrix is degenerate", "pairing")

    P_div, P_cur = divisor_pairing(pairing), curve_pairing(pairing)
    nef = _cone(spec.cones.nef, rho, P_div, "cones.nef")
    eff_div = _cone(spec.cones.eff_div, rho, P_div, "cones.eff_div")
    eff_curves = _cone(spec.cones.eff_curves, rho, P_cur, "cones.eff_curves")
    mov_curves = _cone(spec.cones.mov_curves, rho, P_cur, "cones.mov_curves")
    _check_dualities(nef, eff_div, eff_curves, mov_curves, "cones")

    negative_curves = []
    for i, c in enumerate(spec.negative_curves):
        where = f"negative_curves[{i}]"
        (cls,) = _vectors([c.class_], rho, where)
        if not contains(eff_curves, cls):
            raise ModelLoadError(f"curve {c.label} is not in eff_curves", where)
        if n == 2 and pair(pairing, cls, cls) != c.self_int:
            raise ModelLoadError(
                f"self-intersection of {c.label} is {pair(pairing, cls, cls)}, file says {c.self_int}",
                f"{where}.self_int",
            )
        if c.self_int >= 0:
            raise ModelLoadError(f"curve {c.label} is not negative", f"{where}.self_int")
        negative_curves.append(NegativeCurve(c.label, cls, c.self_int))

    prime_divisors = []
    for i, d in enumerate(spec.prime_divisors):
        where = f"prime_divisors[{i}]"
        (cls,) = _vectors([d.class_], rho, where)
        if not contains(eff_div, cls):
            raise ModelLoadError(f"divisor {d.label} is not in eff_div", where)
        prime_divisors.append(LabeledClass(d.label, cls))

    chambers = []
    for i, ch in enumerate(spec.volume.chambers):
        where = f"volume.chambers[{i}]"
        cone = _cone(ch.rays, rho, P_div, f"{where}.rays")
        try:
            poly = HomogeneousPolynomial.from_terms(rho, [(t.exponents, t.coeff) for t in ch.terms])
        except ContractViolation as e:
            raise ModelLoadError(str(e), f"{where}.terms") from e
        if not poly.is_homogeneous(n):
            raise ModelLoadError(f"volume polynomial is not homogeneous of degree {n}", f"{where}.terms")
        if not contains_cone(eff_div, cone):
            raise ModelLoadError("chamber leaves eff_div", f"{where}.rays")
        chambers.append((cone, poly))

    curve_power = None
    if spec.curve_power is not None:
        curve_power = []
        for i, t in enumerate(spec.curve_power):
            where = f"curve_power[{i}]"
            if len(t.exponents) != rho or sum(t.exponents) != n - 1:
                raise ModelLoadError(f"monomial must have {rho} exponents of total degree {n - 1}", where)
            (cls,) = _vectors([t.class_], rho, f"{where}.class")
            curve_power.append((tuple(t.exponents), cls))
    elif n != 2:
        raise ModelLoadError("curve_power is required when dim_n > 2", "curve_power")

    labels = {c.label for c in negative_curves} | {d.label for d in prime_divisors}
    vanishing = []
    for i, v in enumerate(spec.vanishing):
        where = f"vanishing[{i}]"
        (alpha,) = _vectors([v.alpha], rho, f"{where}.alpha")
        if not contains(mov_curves, alpha):
            raise ModelLoadError("alpha is not movable", f"{where}.alpha")
        unknown = [x for x in v.enk_components if x not in labels]
        if unknown:
            raise ModelLoadError(f"unknown component labels {unknown}", f"{where}.enk_components")
        vanishing.append(VanishingData(alpha, tuple(v.enk_components)))

    model = VarietyModel(
        name=spec.name,
        dim_n=n,
        divisor_basis=list(spec.divisor_basis),
        curve_basis=list(spec.curve_basis),
        pairing=pairing,
        nef=nef,
        eff_div=eff_div,
        eff_curves=eff_curves,
        mov_curves=mov_curves,
        negative_curves=negative_curves,
        prime_divisors=prime_divisors,
        volume_chambers=chambers,
        curve_power=curve_power,
        vanishing=vanishing,
        provenance=spec.provenance,
        expected=list(spec.expected),
        raw=raw,
    )
    _validate_volume(model)

    if "generic" not in [p.name for p in spec.profiles]:
        raise ModelLoadError("a 'generic' profile is mandatory", "profiles")
    for i, p in enumerate(spec.profiles):
        model.profiles.append(_load_profile(model, p, f"profiles[{i}]", labels))

    app_logger.info(
        f"Loaded model {model.name}: n={n}, rho={rho}, profiles={[p.name for p in model.profiles]}"
    )
    return model


def _load_profile(M: VarietyModel, p: ProfileSpec, where: str, labels: set) -> PointProfile:
    rho_Y = M.rho + 1
    M_Y = blowup_pairing(M.pairing)
    if p.pairing is not None:
        given = RationalMatrix.from_rows(_vectors(p.pairing, rho_Y, f"{where}.pairing"))
        if given != M_Y:
            raise ModelLoadError("blow-up pairing must be blockdiag(pairing, -1)", f"{where}.pairing")

    P_div, P_cur = divisor_pairing(M_Y), curve_pairing(M_Y)
    cw = f"{where}.cones"
    B = BlowupModel(
        downstairs=M,
        nef_Y=_cone(p.cones.nef, rho_Y, P_div, f"{cw}.nef"),
        eff_div_Y=_cone(p.cones.eff_div, rho_Y, P_div, f"{cw}.eff_div"),
        eff_curves_Y=_cone(p.cones.eff_curves, rho_Y, P_cur, f"{cw}.eff_curves"),
        mov_curves_Y=_cone(p.cones.mov_curves, rho_Y, P_cur, f"{cw}.mov_curves"),
        pairing_Y=M_Y,
    )
    _check_dualities(B.nef_Y, B.eff_div_Y, B.eff_curves_Y, B.mov_curves_Y, cw)

    for r in M.nef.rays:
        if not contains(B.nef_Y, pullback_div(B, r)):
            raise ModelLoadError(f"pullback of nef ray {r} is not nef on Y", f"{cw}.nef")
    for r in M.eff_curves.rays:
        if not contains(B.eff_curves_Y, pullback_curve(B, r)):
            raise ModelLoadError(f"pullback of curve ray {r} is not in Eff_1(Y)", f"{cw}.eff_curves")

    unknown = [x for x in p.on if x not in labels]
    if unknown:
        raise ModelLoadError(f"unknown labels {unknown}", f"{where}.on")

    def incidences(items, cone, what):
        out = []
        for j, inc in enumerate(items):
            iw = f"{where}.{what}[{j}]"
            (cls,) = _vectors([inc.class_], M.rho, iw)
            if not contains(cone, cls):
                raise ModelLoadError(f"class {cls} is outside its cone", iw)
            if inc.mult < 1:
                raise ModelLoadError(f"multiplicity {inc.mult} < 1", f"{iw}.mult")
            out.append(Incidence(inc.label, cls, inc.mult))
        return out

    return PointProfile(
        name=p.name,
        blowup=B,
        curves_through_x=incidences(p.curves_through_x, M.eff_curves, "curves_through_x"),
        divisors_through_x=incidences(p.divisors_through_x, M.eff_div, "divisors_through_x"),
        on=tuple(p.on),
        note=p.note,
    )


def _validate_volume(M: VarietyModel):
    """Камеры покрывают Eff¹ и согласованы; vol = L^n на nef; на поверхностях vol = P²."""
    rng = np.random.default_rng(config.SEED)
    count = config.VALIDATION_SAMPLES
    bound = config.SAMPLE_BOUND

    for v in list(M.eff_div.rays) + sample_cone(M.eff_div, rng, 5 * count, bound=bound):
        values = {p.evaluate(v) for C, p in M.volume_chambers if contains(C, v)}
        if not values:
            raise ModelLoadError(f"no volume chamber contains {v}", "volume.chambers")
        if len(values) > 1:
            raise ModelLoadError(f"chambers disagree at {v}: {sorted(values)}", "volume.chambers")
        if min(values) < 0:
            raise ModelLoadError(f"volume is negative at {v}", "volume.chambers")

    f = M.volume_function
    for L in sample_cone(M.nef, rng, count, bound=bound):
        vol, top = f.power_value(L), top_intersection(M, L)
        if vol != top:
            raise ModelLoadError(f"vol({L}) = {vol} but L^{M.dim_n} = {top}", "volume")

    if M.is_surface:
        for L in sample_cone(M.eff_div, rng, count, bound=bound):
            try:
                P = zariski_decompose(M, L).positive
            except ModelIntegrityError as e:
                raise ModelLoadError(str(e), "negative_curves") from e
            vol, p2 = f.power_value(L), pair(M.pairing, P, P)
            if vol != p2:
                raise ModelLoadError(f"vol({L}) = {vol} but P^2 = {p2}", "volume")
