# invariants.py

from fractions import Fraction
from functools import partial
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from config import config
from cones import (
    MembershipStatus,
    contains,
    exit_parameter,
    is_interior,
    membership,
    sample_cone,
)
from errors import ConePolarError, PreconditionError, UnsupportedError
from exactnum import (
    RationalMatrix,
    RationalVector,
    Scalar,
    Value,
    lower,
    pair,
    parse_rational,
    rational_power,
    upper,
)
from geomodel import (
    PointProfile,
    VarietyModel,
    curve_power_of,
    exceptional_curve_class,
    exceptional_divisor,
    null_curves,
    pullback_curve,
    pullback_div,
    volume,
    zariski_decompose,
)
from hconc import (
    ConeFunction,
    ExitBasedFunction,
    PolarValue,
    check_duality_transform,
    check_hconc,
    polar_compare,
    polar_eval,
    values_close,
)
from logger import app_logger, check_logger
from models import CheckReport, CheckStatus, InvariantReport, RouteValue, VanishingLocusResult

INVARIANTS = ("s", "n", "N", "S", "volhat", "M")
ROUTES = {
    "s": ("exit", "polar", "curves"),
    "n": ("exit", "polar"),
    "N": ("exit", "polar"),
    "S": ("exit", "polar", "divisors"),
    "volhat": ("polar",),
    "M": ("polar",),
}
# первый проход сравнений интервалов идёт с грубой точностью
COARSE_TOL = Fraction(1, 1000)

ProfileRef = Union[str, PointProfile]


def _vec(v) -> RationalVector:
    return v if isinstance(v, RationalVector) else RationalVector(tuple(v))


def resolve_profile(model: VarietyModel, profile: ProfileRef) -> PointProfile:
    if isinstance(profile, PointProfile):
        return profile
    return model.profile(profile)


def _model_of(profile: PointProfile) -> VarietyModel:
    return profile.blowup.downstairs


def pullback_map(rho: int) -> RationalMatrix:
    """π*: классы X -> классы Y (последняя координата 0)"""
    rows = [[Fraction(int(i == j)) for j in range(rho)] for i in range(rho)]
    rows.append([Fraction(0)] * rho)
    return RationalMatrix.from_rows(rows)


# --- функции как ConeFunction -------------------------------------------------


def _cached(profile: PointProfile, key: str, build: Callable[[], ConeFunction]) -> ConeFunction:
    if key not in profile.cache:
        profile.cache[key] = build()
    return profile.cache[key]


def s_function(profile: PointProfile) -> ConeFunction:
    M, B = _model_of(profile), profile.blowup
    return _cached(
        profile,
        "s",
        lambda: ExitBasedFunction(M.nef, B.nef_Y, pullback_map(M.rho), -exceptional_divisor(B)),
    )


def n_function(profile: PointProfile) -> ConeFunction:
    M, B = _model_of(profile), profile.blowup
    return _cached(
        profile,
        "n",
        lambda: ExitBasedFunction(
            M.eff_div, B.eff_div_Y, pullback_map(M.rho), -exceptional_divisor(B)
        ),
    )


def N_function(profile: PointProfile) -> ConeFunction:
    M, B = _model_of(profile), profile.blowup
    return _cached(
        profile,
        "N",
        lambda: ExitBasedFunction(
            M.eff_curves, B.eff_curves_Y, pullback_map(M.rho), exceptional_curve_class(B)
        ),
    )


def S_function(profile: PointProfile) -> ConeFunction:
    M, B = _model_of(profile), profile.blowup
    return _cached(
        profile,
        "S",
        lambda: ExitBasedFunction(
            M.mov_curves, B.mov_curves_Y, pullback_map(M.rho), exceptional_curve_class(B)
        ),
    )


def nef_volume_function(model: VarietyModel) -> ConeFunction:
    """vol^(1/n), ограниченная на Nef¹"""
    if "vol_nef" not in model.cache:
        model.cache["vol_nef"] = model.volume_function.restricted_to(model.nef)
    return model.cache["vol_nef"]


# --- значения ----------------------------------------------------------------


def _require(cone, v: RationalVector, what: str):
    m = membership(cone, v)
    if not m.inside:
        raise PreconditionError(f"{v} is not {what} (witness {m.witness})")


def seshadri_s(profile: PointProfile, L) -> Fraction:
    M, B = _model_of(profile), profile.blowup
    L = _vec(L)
    _require(M.nef, L, "nef")
    return exit_parameter(B.nef_Y, pullback_div(B, L), -exceptional_divisor(B))


def seshadri_s_via_curves(profile: PointProfile, L) -> Fraction:
    """min по кривым через x: L·C / mult_x(C)"""
    M = _model_of(profile)
    L = _vec(L)
    _require(M.nef, L, "nef")
    if not profile.curves_through_x:
        raise UnsupportedError(f"Profile {profile.name} has no curves through x")
    return min(pair(M.pairing, L, c.cls) / c.mult for c in profile.curves_through_x)


def nakayama_n(profile: PointProfile, L) -> Fraction:
    M, B = _model_of(profile), profile.blowup
    L = _vec(L)
    _require(M.eff_div, L, "pseudo-effective")
    return exit_parameter(B.eff_div_Y, pullback_div(B, L), -exceptional_divisor(B))


def nakayama_N(profile: PointProfile, alpha, route: str = "exit", tol: Optional[Scalar] = None) -> Value:
    M, B = _model_of(profile), profile.blowup
    alpha = _vec(alpha)
    _require(M.eff_curves, alpha, "in Eff_1")
    if route == "exit":
        return exit_parameter(B.eff_curves_Y, pullback_curve(B, alpha), exceptional_curve_class(B))
    if route == "polar":
        return polar_eval(s_function(profile), alpha, tol).value
    raise UnsupportedError(f"nakayama_N has no route {route!r}")


def seshadri_S(profile: PointProfile, alpha, route: str = "exit", tol: Optional[Scalar] = None) -> Value:
    M, B = _model_of(profile), profile.blowup
    alpha = _vec(alpha)
    _require(M.mov_curves, alpha, "movable")
    if route == "exit":
        return exit_parameter(B.mov_curves_Y, pullback_curve(B, alpha), exceptional_curve_class(B))
    if route == "polar":
        return polar_eval(n_function(profile), alpha, tol).value
    if route == "divisors":
        if not profile.divisors_through_x:
            raise UnsupportedError(f"Profile {profile.name} has no divisors through x")
        return min(pair(M.pairing, D.cls, alpha) / D.mult for D in profile.divisors_through_x)
    raise UnsupportedError(f"seshadri_S has no route {route!r}")


def volhat_root(model: VarietyModel, alpha, tol: Optional[Scalar] = None) -> PolarValue:
    """vol_hat(α)^((n-1)/n): полярное преобразование vol^(1/n) на Nef¹"""
    alpha = _vec(alpha)
    _require(model.eff_curves, alpha, "in Eff_1")
    return polar_eval(nef_volume_function(model), alpha, tol)


def M_root(model: VarietyModel, alpha, tol: Optional[Scalar] = None) -> PolarValue:
    """𝔐(α)^((n-1)/n): полярное преобразование vol^(1/n) на Eff¹"""
    alpha = _vec(alpha)
    _require(model.mov_curves, alpha, "movable")
    return polar_eval(model.volume_function, alpha, tol)


def _raise_to_volume_scale(model: VarietyModel, pv: PolarValue, tol: Fraction) -> Value:
    n = model.dim_n
    if pv.radicand is not None:
        return rational_power(pv.radicand, n, pv.root_degree * (n - 1), tol)
    return rational_power(pv.value, n, n - 1, tol)


def vol_hat(model: VarietyModel, alpha, tol: Optional[Scalar] = None) -> Value:
    tol = config.tol if tol is None else parse_rational(tol)
    return _raise_to_volume_scale(model, volhat_root(model, alpha, tol), tol)


def M_func(model: VarietyModel, alpha, tol: Optional[Scalar] = None) -> Value:
    tol = config.tol if tol is None else parse_rational(tol)
    return _raise_to_volume_scale(model, M_root(model, alpha, tol), tol)


def global_constant(model: VarietyModel, invariant: str, cls) -> Fraction:
    """s(L), n(L), N(α), S(α): минимум по профилям модели"""
    compute = {"s": seshadri_s, "n": nakayama_n, "N": nakayama_N, "S": seshadri_S}
    if invariant not in compute:
        raise UnsupportedError(f"No global constant for invariant {invariant!r}")
    return min(compute[invariant](p, cls) for p in model.profiles)


def evaluate_routes(
    model: VarietyModel,
    profile: ProfileRef,
    invariant: str,
    cls,
    route: str = "all",
    tol: Optional[Scalar] = None,
) -> InvariantReport:
    """Значение инварианта всеми (или одним) маршрутами и их согласие."""
    if invariant not in ROUTES:
        raise UnsupportedError(f"Unknown invariant {invariant!r}")
    routes = ROUTES[invariant] if route == "all" else (route,)
    if any(r not in ROUTES[invariant] for r in routes):
        raise UnsupportedError(f"Invariant {invariant} has no route {route!r}")
    p = resolve_profile(model, profile)
    tol = config.tol if tol is None else parse_rational(tol)
    cls = _vec(cls)
    domains = {
        "s": (model.nef, "nef"),
        "n": (model.eff_div, "pseudo-effective"),
        "N": (model.eff_curves, "in Eff_1"),
        "S": (model.mov_curves, "movable"),
        "volhat": (model.eff_curves, "in Eff_1"),
        "M": (model.mov_curves, "movable"),
    }
    cone, what = domains[invariant]
    _require(cone, cls, what)

    def compute(r: str) -> Tuple[Value, bool]:
        if invariant == "s":
            if r == "exit":
                return seshadri_s(p, cls), True
            if r == "curves":
                return seshadri_s_via_curves(p, cls), True
            pv = polar_eval(N_function(p), cls, tol)
            return pv.value, pv.exact
        if invariant == "n":
            if r == "exit":
                return nakayama_n(p, cls), True
            pv = polar_eval(S_function(p), cls, tol)
            return pv.value, pv.exact
        if invariant == "N":
            if r == "exit":
                return nakayama_N(p, cls), True
            pv = polar_eval(s_function(p), cls, tol)
            return pv.value, pv.exact
        if invariant == "S":
            if r == "polar":
                pv = polar_eval(n_function(p), cls, tol)
                return pv.value, pv.exact
            return seshadri_S(p, cls, r), True
        value = vol_hat(model, cls, tol) if invariant == "volhat" else M_func(model, cls, tol)
        return value, isinstance(value, Fraction)

    report = InvariantReport(model=model.name, profile=p.name, invariant=invariant, cls=cls)
    for r in routes:
        try:
            value, exact = compute(r)
            report.routes.append(RouteValue(route=r, value=value, exact=exact))
        except UnsupportedError as e:
            report.routes.append(RouteValue(route=r, exact=False, error=str(e)))

    values = [rv.value for rv in report.routes if rv.value is not None]
    report.agree = all(values_close(values[0], v, tol) for v in values[1:])
    if not report.agree:
        app_logger.warning(f"Routes disagree for {invariant}({cls}) on {model.name}/{p.name}: {values}")
    return report


# --- проверки ----------------------------------------------------------------


def _start(check: str, model: VarietyModel, profile: Optional[PointProfile], samples: int) -> CheckReport:
    return CheckReport(
        check=check, model=model.name, profile=profile.name if profile else "", samples=samples
    )


def _finish(report: CheckReport) -> CheckReport:
    where = f"{report.model}/{report.profile}" if report.profile else report.model
    if report.status is CheckStatus.FAIL:
        check_logger.warning(
            f"{report.check} FAILED on {where}: {len(report.witnesses)} witnesses, first {report.witnesses[0]}"
        )
    elif report.status is CheckStatus.SKIP:
        check_logger.info(f"{report.check} skipped on {where}: {report.message}")
    elif report.status is CheckStatus.UNDECIDED:
        check_logger.warning(f"{report.check} undecided on {where}: {report.message}")
    else:
        check_logger.info(f"{report.check} passed on {where} ({report.samples} samples)")
    return report


def _params(samples: Optional[int], seed: Optional[int], tol: Optional[Scalar]):
    return (
        config.SAMPLES if samples is None else samples,
        config.SEED if seed is None else seed,
        config.tol if tol is None else parse_rational(tol),
    )


def _rays_and_samples(cone, rng, samples: int, interior: bool = False) -> List[RationalVector]:
    return list(cone.rays) + sample_cone(cone, rng, samples, interior=interior, bound=config.SAMPLE_BOUND)


def _compare_le(small: Value, big: Value) -> Optional[bool]:
    """True: small <= big наверняка; False: наверняка нет; None: интервалы перекрываются."""
    if upper(small) <= lower(big):
        return True
    if lower(small) > upper(big):
        return False
    return None


def _tolerances(tol: Fraction) -> List[Fraction]:
    """Грубая точность, рабочая tol и COMPARE_REFINEMENTS уточнений ниже неё"""
    steps = [COARSE_TOL] if COARSE_TOL > tol else []
    steps.append(tol)
    for _ in range(config.COMPARE_REFINEMENTS):
        steps.append(steps[-1] / 1000)
    return steps


def _certified_le(
    small: Callable[[Fraction], Value], big: Callable[[Fraction], Value], tol: Fraction
) -> Optional[bool]:
    for t in _tolerances(tol):
        verdict = _compare_le(small(t), big(t))
        if verdict is not None:
            return verdict
    return None


def _sign_to_le(sign: Optional[int], small_is_polar: bool) -> Optional[bool]:
    if sign is None:
        return None
    return sign <= 0 if small_is_polar else sign >= 0


def _polar_le(f: ConeFunction, alpha: RationalVector, bound: Value, tol: Fraction) -> Optional[bool]:
    """ℋf(α) <= bound: точно для рационального bound, иначе через интервалы."""
    if isinstance(bound, Fraction):
        verdict = _sign_to_le(polar_compare(f, alpha, bound), True)
        if verdict is not None:
            return verdict
    return _certified_le(lambda t: polar_eval(f, alpha, t).value, lambda t: bound, tol)


def _polar_ge(f: ConeFunction, alpha: RationalVector, bound: Value, tol: Fraction) -> Optional[bool]:
    """bound <= ℋf(α)"""
    if isinstance(bound, Fraction):
        verdict = _sign_to_le(polar_compare(f, alpha, bound), False)
        if verdict is not None:
            return verdict
    return _certified_le(lambda t: bound, lambda t: polar_eval(f, alpha, t).value, tol)


def _radical(pv: PolarValue) -> Optional[Tuple[Fraction, int]]:
    if pv.radicand is not None:
        return pv.radicand, pv.root_degree
    if isinstance(pv.value, Fraction):
        return pv.value, 1
    return None


def _roots_le(small: PolarValue, big: PolarValue) -> Optional[bool]:
    """r1^(1/k1) <= r2^(1/k2) ⟺ r1^k2 <= r2^k1, когда оба подкоренных известны"""
    a, b = _radical(small), _radical(big)
    if a is None or b is None:
        return None
    return a[0] ** b[1] <= b[0] ** a[1]


def _note_undecided(report: CheckReport, count: int):
    if count:
        report.undecided(count)


def check_theorem_A(
    model: VarietyModel,
    profile: ProfileRef,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    """N_x: выход из Eff_1(Y) == ℋs_x, и N_x(α) >= vol_hat(α)^((n-1)/n)."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("theorem_A", model, p, samples)
    rng = np.random.default_rng(seed)
    s_f = s_function(p)

    undecided = 0
    for alpha in _rays_and_samples(model.eff_curves, rng, samples):
        by_exit = nakayama_N(p, alpha, "exit")
        by_polar = polar_eval(s_f, alpha, tol)
        if not values_close(by_exit, by_polar.value, tol):
            report.fail(property="route_agreement", alpha=alpha, exit=by_exit, polar=by_polar.value)
        verdict = _polar_le(nef_volume_function(model), alpha, by_exit, tol)
        if verdict is False:
            report.fail(
                property="volume_bound", alpha=alpha, N=by_exit,
                volhat_root=volhat_root(model, alpha, tol).value,
            )
        elif verdict is None:
            undecided += 1
    _note_undecided(report, undecided)
    return _finish(report)


def check_theorem_B(
    model: VarietyModel,
    profile: ProfileRef,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    """S_x: выход из Mov_1(Y) == ℋn_x, S_x(α) <= 𝔐(α)^((n-1)/n), и S(α) > 0 ⟺ α внутри Mov_1."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("theorem_B", model, p, samples)
    rng = np.random.default_rng(seed)
    n_f = n_function(p)

    undecided = 0
    for alpha in _rays_and_samples(model.mov_curves, rng, samples):
        by_exit = seshadri_S(p, alpha, "exit")
        by_polar = polar_eval(n_f, alpha, tol)
        if not values_close(by_exit, by_polar.value, tol):
            report.fail(property="route_agreement", alpha=alpha, exit=by_exit, polar=by_polar.value)
        verdict = _polar_ge(model.volume_function, alpha, by_exit, tol)
        if verdict is False:
            report.fail(
                property="mobility_bound", alpha=alpha, S=by_exit,
                M_root=M_root(model, alpha, tol).value,
            )
        elif verdict is None:
            undecided += 1

    # критерий внутренности проверяется для глобальной S(α) = min по профилям
    for alpha in sample_cone(model.mov_curves, rng, min(samples, 50), interior=True, bound=config.SAMPLE_BOUND):
        if global_constant(model, "S", alpha) <= 0:
            report.fail(property="interior_positive", alpha=alpha, S=global_constant(model, "S", alpha))
    zero_rays = 0
    for ray in model.mov_curves.rays:
        if membership(model.mov_curves, ray).status is not MembershipStatus.BOUNDARY:
            continue
        value = global_constant(model, "S", ray)
        if value != 0:
            report.fail(property="boundary_zero", alpha=ray, S=value)
        else:
            zero_rays += 1
    report.values["boundary_zero_rays"] = zero_rays
    _note_undecided(report, undecided)
    return _finish(report)


def check_S_le_N(
    model: VarietyModel,
    profile: ProfileRef,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("S_le_N", model, p, samples)
    rng = np.random.default_rng(seed)
    for alpha in _rays_and_samples(model.mov_curves, rng, samples):
        S, N = seshadri_S(p, alpha), nakayama_N(p, alpha)
        if S > N:
            report.fail(alpha=alpha, S=S, N=N)
    return _finish(report)


def check_theorem_C(model: VarietyModel, alpha, tol: Optional[Scalar] = None) -> VanishingLocusResult:
    """Профили с S_x(α) = 0 против профилей на дивизориальных компонентах E_nK."""
    if not model.is_surface:
        raise UnsupportedError(f"Vanishing locus criterion is only modelled on surfaces, {model.name} has dim {model.dim_n}")
    tol = config.tol if tol is None else parse_rational(tol)
    alpha = _vec(alpha)
    _require(model.mov_curves, alpha, "movable")

    components = None
    for v in model.vanishing:
        if v.alpha == alpha:
            components = list(v.enk_components)
    if components is None:
        # на поверхности α можно считать дивизором; нулевые кривые заменяют E_nK
        components = null_curves(model, alpha)

    result = VanishingLocusResult(
        alpha=alpha,
        is_boundary_mov=membership(model.mov_curves, alpha).status is MembershipStatus.BOUNDARY,
        M_positive=M_root(model, alpha, tol).lo > 0,
        divisorial_Enk=components,
    )
    for p in model.profiles:
        if seshadri_S(p, alpha) == 0:
            result.zero_profiles.append(p.name)
        if set(p.on) & set(components):
            result.expected_profiles.append(p.name)
    app_logger.debug(f"Vanishing locus of {alpha} on {model.name}: {result.to_json()}")
    return result


def theorem_C_report(
    model: VarietyModel,
    profile: Optional[ProfileRef] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    report = _start("theorem_C", model, None, len(model.vanishing))
    if not model.is_surface:
        report.skip(f"{model.name} has dim {model.dim_n}; L_α is not computed off surfaces")
        return _finish(report)
    if not model.vanishing:
        report.skip(f"{model.name} lists no boundary classes with positive 𝔐")
        return _finish(report)
    for v in model.vanishing:
        result = check_theorem_C(model, v.alpha, tol)
        report.values[str(v.alpha)] = result.to_json()
        if not (result.is_boundary_mov and result.M_positive):
            report.fail(property="precondition", alpha=v.alpha, **result.to_json())
        elif not result.consistent:
            report.fail(property="vanishing_locus", **result.to_json())
    return _finish(report)


def check_fulger_bound(
    model: VarietyModel,
    profile: ProfileRef,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    """S_x(L^(n-1)) >= s_x(L)^(n-1), со свидетелем π*L^(n-1) + s^(n-1)·e ∈ Mov_1(Y)."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    B = p.blowup
    n = model.dim_n
    report = _start("fulger", model, p, samples)
    rng = np.random.default_rng(seed)
    for L in _rays_and_samples(model.nef, rng, samples):
        alpha = curve_power_of(model, L)
        bound = seshadri_s(p, L) ** (n - 1)
        witness = pullback_curve(B, alpha) + exceptional_curve_class(B) * bound
        if not contains(B.mov_curves_Y, witness):
            report.fail(property="membership_witness", L=L, alpha=alpha, witness=witness)
            continue
        S = seshadri_S(p, alpha)
        if S < bound:
            report.fail(property="bound", L=L, alpha=alpha, S=S, s_pow=bound)
    return _finish(report)


def check_n_upper_bound(
    model: VarietyModel,
    profile: ProfileRef,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    """n_x(L) <= c*·(L·A^(n-1)), c* = максимум по лучам камер n_x."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("n_upper", model, p, samples)
    rng = np.random.default_rng(seed)

    A = model.nef.interior_point()
    A_curve = curve_power_of(model, A)
    pl = n_function(p).as_piecewise_linear()
    # отношение n_x(L)/(L·A^(n-1)) квазивогнуто: максимум на лучах камер
    c_star = Fraction(0)
    for r in pl.chamber_rays():
        denom = pair(model.pairing, r, A_curve)
        if denom <= 0:
            report.fail(property="finiteness", ray=r, L_dot_A=denom)
            return _finish(report)
        c_star = max(c_star, nakayama_n(p, r) / denom)
    report.values.update({"c_star": c_star, "A": A})

    for L in sample_cone(model.eff_div, rng, samples, bound=config.SAMPLE_BOUND):
        n_L, cap = nakayama_n(p, L), c_star * pair(model.pairing, L, A_curve)
        if n_L > cap:
            report.fail(property="bound", L=L, n=n_L, bound=cap)
    return _finish(report)


def check_n_lower_bound(
    model: VarietyModel,
    profile: ProfileRef,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    """n_x(L)^n >= vol(L) на больших L (точно)."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("n_lower", model, p, samples)
    rng = np.random.default_rng(seed)
    for L in sample_cone(model.eff_div, rng, samples, interior=True, bound=config.SAMPLE_BOUND):
        n_L, vol = nakayama_n(p, L), volume(model, L)
        if n_L**model.dim_n < vol:
            report.fail(L=L, n=n_L, vol=vol)
    return _finish(report)


def check_zariski_additivity(
    model: VarietyModel,
    profile: ProfileRef,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> CheckReport:
    """n_x(L) = n_x(P) + n_x(N) для разложения Зарисского L = P + N."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("zariski_additivity", model, p, samples)
    if not model.is_surface:
        report.skip(f"Zariski decomposition is not available in dim {model.dim_n}")
        return _finish(report)
    rng = np.random.default_rng(seed)
    for L in _rays_and_samples(model.eff_div, rng, samples):
        z = zariski_decompose(model, L)
        lhs = nakayama_n(p, L)
        rhs = nakayama_n(p, z.positive) + nakayama_n(p, z.negative)
        if lhs != rhs:
            report.fail(L=L, P=z.positive, N=z.negative, n_L=lhs, n_P_plus_n_N=rhs)
    return _finish(report)


# --- расширенный набор ---------------------------------------------------------


def check_s_le_n(model, profile, samples=None, seed=None, tol=None) -> CheckReport:
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("s_le_n", model, p, samples)
    rng = np.random.default_rng(seed)
    for L in _rays_and_samples(model.nef, rng, samples):
        s, n = seshadri_s(p, L), nakayama_n(p, L)
        if s > n:
            report.fail(L=L, s=s, n=n)
    return _finish(report)


def check_seshadri_volume_bound(model, profile, samples=None, seed=None, tol=None) -> CheckReport:
    """s_x(L)^n <= vol(L) на nef-классах"""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("seshadri_volume_bound", model, p, samples)
    rng = np.random.default_rng(seed)
    for L in _rays_and_samples(model.nef, rng, samples):
        s, vol = seshadri_s(p, L), volume(model, L)
        if s**model.dim_n > vol:
            report.fail(L=L, s=s, vol=vol)
    return _finish(report)


def check_mov_le_volhat(model, profile=None, samples=None, seed=None, tol=None) -> CheckReport:
    samples, seed, tol = _params(samples, seed, tol)
    report = _start("mov_le_volhat", model, None, samples)
    rng = np.random.default_rng(seed)
    undecided = 0
    for alpha in _rays_and_samples(model.mov_curves, rng, samples):
        m, v = M_root(model, alpha, tol), volhat_root(model, alpha, tol)
        verdict = _roots_le(m, v)
        if verdict is None and isinstance(m.value, Fraction):
            verdict = _sign_to_le(polar_compare(nef_volume_function(model), alpha, m.value), False)
        if verdict is None and isinstance(v.value, Fraction):
            verdict = _sign_to_le(polar_compare(model.volume_function, alpha, v.value), True)
        if verdict is None:
            verdict = _certified_le(
                lambda t: M_root(model, alpha, t).value,
                lambda t: volhat_root(model, alpha, t).value,
                tol,
            )
        if verdict is False:
            report.fail(alpha=alpha, M=M_func(model, alpha, tol), volhat=vol_hat(model, alpha, tol))
        elif verdict is None:
            undecided += 1
    _note_undecided(report, undecided)
    return _finish(report)


def check_self_duality(model, profile, samples=None, seed=None, tol=None) -> CheckReport:
    """На поверхностях ℋs_x = n_x и ℋn_x = s_x."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    samples = min(samples, config.RAY_SAMPLES)
    report = _start("self_duality", model, p, samples)
    if not model.is_surface:
        report.skip("curve and divisor classes differ off surfaces")
        return _finish(report)
    rng = np.random.default_rng(seed)
    s_f, n_f = s_function(p), n_function(p)
    for w in _rays_and_samples(model.eff_div, rng, samples):
        h, n = polar_eval(s_f, w, tol).value, nakayama_n(p, w)
        if not values_close(h, n, tol):
            report.fail(side="polar(s) vs n", w=w, polar=h, n=n)
    for v in _rays_and_samples(model.nef, rng, samples):
        h, s = polar_eval(n_f, v, tol).value, seshadri_s(p, v)
        if not values_close(h, s, tol):
            report.fail(side="polar(n) vs s", v=v, polar=h, s=s)
    return _finish(report)


def check_curve_route(model, profile, samples=None, seed=None, tol=None) -> CheckReport:
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("curve_route", model, p, samples)
    if not (p.curves_through_x or p.divisors_through_x):
        report.skip(f"profile {p.name} lists no curves or divisors through x")
        return _finish(report)
    rng = np.random.default_rng(seed)
    if p.curves_through_x:
        for L in _rays_and_samples(model.nef, rng, samples):
            a, b = seshadri_s(p, L), seshadri_s_via_curves(p, L)
            if a != b:
                report.fail(invariant="s", L=L, exit=a, curves=b)
    if p.divisors_through_x:
        for alpha in _rays_and_samples(model.mov_curves, rng, samples):
            a, b = seshadri_S(p, alpha), seshadri_S(p, alpha, "divisors")
            if a != b:
                report.fail(invariant="S", alpha=alpha, exit=a, divisors=b)
    return _finish(report)


def check_monotonicity(model, profile, samples=None, seed=None, tol=None) -> CheckReport:
    """v' - v в конусе ⟹ f(v') >= f(v) для s_x, n_x, N_x, S_x."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("monotonicity", model, p, samples)
    rng = np.random.default_rng(seed)
    cases = (
        ("s", model.nef, seshadri_s),
        ("n", model.eff_div, nakayama_n),
        ("N", model.eff_curves, nakayama_N),
        ("S", model.mov_curves, seshadri_S),
    )
    bound = config.SAMPLE_BOUND
    for name, cone, f in cases:
        for v, d in zip(sample_cone(cone, rng, samples, bound=bound), sample_cone(cone, rng, samples, bound=bound)):
            small, big = f(p, v), f(p, v + d)
            if big < small:
                report.fail(invariant=name, v=v, step=d, f_v=small, f_v_plus_step=big)
    return _finish(report)


def check_generic_lower_bound(model, profile="generic", samples=None, seed=None, tol=None) -> CheckReport:
    """Общая точка, целые большие nef L: s_x(L) >= 1/n и S_x(L^(n-1)) >= 1/n^(n-1)."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, "generic")
    n = model.dim_n
    report = _start("generic_lower_bound", model, p, samples)
    rng = np.random.default_rng(seed)
    for L in _rays_and_samples(model.nef, rng, samples):
        if volume(model, L) <= 0:
            continue
        s = seshadri_s(p, L)
        if s < Fraction(1, n):
            report.fail(property="seshadri", L=L, s=s)
        S = seshadri_S(p, curve_power_of(model, L))
        if S < Fraction(1, n ** (n - 1)):
            report.fail(property="mobility", L=L, S=S)
        if model.is_surface and is_interior(model.nef, L) and S < 1:
            report.fail(property="ample_surface", L=L, S=S)
    return _finish(report)


def check_duality(model, profile, samples=None, seed=None, tol=None) -> CheckReport:
    """ℋℋf = f и обращение порядка для пар (s_x, N_x) и (n_x, S_x)."""
    samples, seed, tol = _params(samples, seed, tol)
    p = resolve_profile(model, profile)
    samples = min(samples, config.RAY_SAMPLES)
    report = _start("duality", model, p, 0)
    pairs = {"s/N": (s_function(p), N_function(p)), "n/S": (n_function(p), S_function(p))}
    for name, (f, g) in pairs.items():
        sub = check_duality_transform(f, g, samples, tol, seed, order_pairs=samples, name=name)
        for w in sub.witnesses:
            w.setdefault("pair", name)
        report.merge(sub)
        report.values[name] = sub.status.value
    return _finish(report)


def check_hconc_all(model, profile, samples=None, seed=None, tol=None) -> CheckReport:
    samples = config.HCONC_SAMPLES if samples is None else samples
    _, seed, tol = _params(None, seed, tol)
    p = resolve_profile(model, profile)
    report = _start("hconc_all", model, p, 0)
    functions = {
        "s": s_function(p),
        "n": n_function(p),
        "N": N_function(p),
        "S": S_function(p),
        "vol_root": model.volume_function,
    }
    for name, f in functions.items():
        sub = check_hconc(f, samples, seed, tol, name=name)
        sub.profile = ""
        sub.values = {}
        for w in sub.witnesses:
            w.setdefault("function", name)
        report.merge(sub)
        report.values[name] = sub.status.value
    return _finish(report)


# имя -> (проверка, по профилям?)
DEFAULT_CHECKS: Dict[str, Tuple[Callable[..., CheckReport], bool]] = {
    "theorem_A": (check_theorem_A, True),
    "theorem_B": (check_theorem_B, True),
    "S_le_N": (check_S_le_N, True),
    "theorem_C": (theorem_C_report, False),
    "fulger": (check_fulger_bound, True),
    "n_upper": (check_n_upper_bound, True),
    "n_lower": (check_n_lower_bound, True),
    "zariski_additivity": (check_zariski_additivity, True),
}
EXTENDED_CHECKS: Dict[str, Tuple[Callable[..., CheckReport], bool]] = {
    "s_le_n": (check_s_le_n, True),
    "seshadri_volume_bound": (check_seshadri_volume_bound, True),
    "mov_le_volhat": (check_mov_le_volhat, False),
    "self_duality": (check_self_duality, True),
    "curve_route": (check_curve_route, True),
    "monotonicity": (check_monotonicity, True),
    "generic_lower_bound": (check_generic_lower_bound, False),
    "hconc_all": (check_hconc_all, True),
    "duality": (check_duality, True),
}


def suite_jobs(
    model: VarietyModel,
    extended: bool = False,
    profile: Optional[str] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[Scalar] = None,
) -> List[Tuple[str, str, Callable[[], CheckReport]]]:
    """(проверка, профиль, вызов без аргументов) для каждой проверки набора"""
    checks = dict(DEFAULT_CHECKS)
    if extended:
        checks.update(EXTENDED_CHECKS)
    profiles = [resolve_profile(model, profile)] if profile else list(model.profiles)

    jobs = []
    for name, (check, per_profile) in checks.items():
        if per_profile:
            for p in profiles:
                jobs.append((name, p.name, partial(check, model, p, samples, seed, tol)))
        else:
            jobs.append((name, "", partial(check, model, None, samples, seed, tol)))
    return jobs


def run_check_safely(name: str, model: VarietyModel, profile: str, job: Callable[[], CheckReport]) -> CheckReport:
    """Ошибка библиотеки внутри проверки становится FAIL-отчётом."""
    try:
        return job()
    except ConePolarError as e:
        app_logger.error(f"{name} on {model.name}/{profile} raised {type(e).__name__}: {e}")
        report = CheckReport(check=name, model=model.name, profile=profile)
        report.fail(error=type(e).__name__, message=str(e))
        return report
