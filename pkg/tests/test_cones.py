import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cones import (
    MembershipStatus,
    cone_from_facets,
    cone_from_rays,
    contains,
    contains_cone,
    dual_cone,
    exit_parameter,
    in_cone_by_rays,
    intersect,
    is_interior,
    membership,
    same_cone,
    sample_cone,
)
from errors import ConeConstructionError, PreconditionError
from exactnum import RationalMatrix
from geomodel import exceptional_divisor, pullback_div
from tests.conftest import CATALOG_IDS, vec

I2 = RationalMatrix.identity(2)
BLOWUP = RationalMatrix.from_rows([[1, 0], [0, -1]])


def quadrant():
    return cone_from_rays(2, [vec(1, 0), vec(0, 1)], I2)


def test_redundant_rays_are_dropped():
    C = cone_from_rays(2, [vec(1, 0), vec(0, 1), vec(1, 1), vec(2, 0)], I2)
    assert C.ray_set() == {(1, 0), (0, 1)}
    assert {tuple(f) for f in C.facets} == {(1, 0), (0, 1)}


def test_nef_facets_in_pairing_coordinates():
    # Nef(Bl_p P2) = <H, H-E>; фасеты: классы кривых E и H-E
    nef = cone_from_rays(2, [vec(1, 0), vec(1, -1)], BLOWUP.transpose())
    assert {tuple(f) for f in nef.facets} == {(0, 1), (1, -1)}
    eff_curves = cone_from_rays(2, [vec(0, 1), vec(1, -1)], BLOWUP)
    assert same_cone(dual_cone(nef), eff_curves)


def test_membership_statuses():
    C = quadrant()
    assert membership(C, vec(1, 2)).status is MembershipStatus.INTERIOR
    assert membership(C, vec(0, 2)).status is MembershipStatus.BOUNDARY
    outside = membership(C, vec(-1, 2))
    assert outside.status is MembershipStatus.OUTSIDE
    assert outside.witness == vec(1, 0)


def test_exit_parameter_examples():
    nef_Y = cone_from_rays(2, [vec(1, 0), vec(1, -1)], BLOWUP)
    assert exit_parameter(nef_Y, vec(1, 0), vec(0, -1)) == 1
    assert exit_parameter(nef_Y, vec(3, 0), vec(0, -1)) == 3
    assert exit_parameter(quadrant(), vec(1, 1), vec(1, 0)) == math.inf
    with pytest.raises(PreconditionError):
        exit_parameter(quadrant(), vec(-1, 1), vec(1, 0))


def test_cone_with_line_is_rejected():
    with pytest.raises(ConeConstructionError, match="line"):
        cone_from_rays(2, [vec(1, 0), vec(-1, 0), vec(0, 1)], I2)


def test_zero_ray_is_rejected():
    with pytest.raises(ConeConstructionError):
        cone_from_rays(2, [vec(0, 0), vec(1, 0)], I2)


def test_cone_from_facets_round_trip():
    C = cone_from_facets(2, [vec(1, 0), vec(0, 1), vec(1, 1)], I2)
    assert same_cone(C, quadrant())


def test_intersect():
    wedge = cone_from_rays(2, [vec(1, 1), vec(1, -1)], I2)
    both = intersect(quadrant(), wedge)
    assert both.ray_set() == {(1, 0), (1, 1)}
    opposite = cone_from_rays(2, [vec(-1, 0), vec(0, -1)], I2)
    assert intersect(quadrant(), opposite) is None


def test_lower_dimensional_cone():
    C = cone_from_rays(3, [vec(1, 0, 0), vec(0, 1, 0)], RationalMatrix.identity(3))
    assert not C.is_full_dimensional
    assert C.dimension == 2
    assert not contains(C, vec(1, 1, 1))
    assert membership(C, vec(1, 1, 0)).status is MembershipStatus.BOUNDARY
    with pytest.raises(ConeConstructionError):
        dual_cone(C)


def test_contains_cone():
    wedge = cone_from_rays(2, [vec(1, 1), vec(1, 2)], I2)
    assert contains_cone(quadrant(), wedge)
    assert not contains_cone(wedge, quadrant())


def test_samples_are_interior(bl2):
    rng = np.random.default_rng(3)
    for v in sample_cone(bl2.eff_div, rng, 30, interior=True):
        assert is_interior(bl2.eff_div, v)


@given(st.lists(st.integers(min_value=-4, max_value=4), min_size=3, max_size=3))
def test_h_and_v_representations_agree(coords):
    # Eff(Bl_2 P2): E1, E2, L12
    cone = cone_from_rays(
        3,
        [vec(0, 1, 0), vec(0, 0, 1), vec(1, -1, -1)],
        RationalMatrix.from_rows([[1, 0, 0], [0, -1, 0], [0, 0, -1]]),
    )
    v = vec(*coords)
    assert contains(cone, v) == in_cone_by_rays(cone, v)


def test_facet_values_are_exact():
    C = cone_from_rays(2, [vec(1, 0), vec(Fraction(1, 3), 1)], I2)
    assert all(C.facet_value(f, r) >= 0 for f in C.facets for r in C.rays)


def all_cones(model) -> list:
    cones = [model.nef, model.eff_div, model.eff_curves, model.mov_curves]
    for p in model.profiles:
        B = p.blowup
        cones += [B.nef_Y, B.eff_div_Y, B.eff_curves_Y, B.mov_curves_Y]
    return cones


@pytest.mark.parametrize("model_id", CATALOG_IDS)
def test_double_dual_is_identity(catalog_models, model_id):
    for C in all_cones(catalog_models[model_id]):
        assert same_cone(dual_cone(dual_cone(C)), C)


@pytest.mark.parametrize("model_id", CATALOG_IDS)
def test_h_and_v_representations_agree_on_catalog(catalog_models, model_id):
    rng = np.random.default_rng(11)
    for C in all_cones(catalog_models[model_id]):
        for coords in rng.integers(-4, 5, size=(40, C.ambient_dim)):
            v = vec(*(int(x) for x in coords))
            assert contains(C, v) == in_cone_by_rays(C, v)
        for r in C.rays:
            assert contains(C, r) and in_cone_by_rays(C, r)


def nef_class(model, coeffs):
    rays = model.nef.rays
    return sum((r * k for r, k in zip(rays[1:], coeffs[1:])), rays[0] * coeffs[0])


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=5), min_size=3, max_size=3).filter(any),
    st.integers(min_value=1, max_value=7),
)
def test_exit_parameter_is_homogeneous(bl2, coeffs, t):
    B = bl2.profile("generic").blowup
    base = pullback_div(B, nef_class(bl2, coeffs))
    direction = -exceptional_divisor(B)
    assert exit_parameter(B.nef_Y, base * t, direction) == t * exit_parameter(B.nef_Y, base, direction)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=5), min_size=3, max_size=3).filter(any),
    st.lists(st.integers(min_value=0, max_value=5), min_size=3, max_size=3),
)
def test_exit_parameter_grows_along_the_cone(bl2, coeffs, step):
    for p in bl2.profiles:
        B = p.blowup
        direction = -exceptional_divisor(B)
        base = pullback_div(B, nef_class(bl2, coeffs))
        bigger = pullback_div(B, nef_class(bl2, [a + b for a, b in zip(coeffs, step)]))
        assert contains(B.nef_Y, bigger - base)
        assert exit_parameter(B.nef_Y, bigger, direction) >= exit_parameter(B.nef_Y, base, direction)
