import copy
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from config import config
from cones import contains, dual_cone, same_cone
from errors import ModelLoadError, PreconditionError, UnsupportedError
from exactnum import pair
from geomodel import (
    curve_power_of,
    exceptional_curve_class,
    exceptional_divisor,
    load_model,
    null_curves,
    pullback_curve,
    top_intersection,
    volume,
    zariski_decompose,
)
from tests.conftest import CATALOG_IDS, vec


def raw(model_id: str) -> dict:
    return json.loads((config.CATALOG_DIR / f"{model_id}.json").read_text(encoding="utf-8"))


@pytest.mark.parametrize("model_id", CATALOG_IDS)
def test_catalog_models_satisfy_dualities(catalog_models, model_id):
    M = catalog_models[model_id]
    assert same_cone(dual_cone(M.nef), M.eff_curves)
    assert same_cone(dual_cone(M.eff_div), M.mov_curves)
    for p in M.profiles:
        B = p.blowup
        assert same_cone(dual_cone(B.nef_Y), B.eff_curves_Y)
        assert same_cone(dual_cone(B.eff_div_Y), B.mov_curves_Y)
    assert "generic" in [p.name for p in M.profiles]


def test_blowup_conventions(blq):
    B = blq.profile("generic").blowup
    assert B.rho_Y == 3
    assert exceptional_divisor(B) == vec(0, 0, 1)
    assert exceptional_curve_class(B) == vec(0, 0, -1)
    assert pullback_curve(B, vec(1, 0)) == vec(1, 0, 0)
    # E·ℓ_E = -1
    assert pair(B.pairing_Y, exceptional_divisor(B), vec(0, 0, 1)) == -1


def test_broken_duality_names_location():
    data = raw("P1xP1")
    data["cones"]["eff_curves"] = [["1", "0"], ["1", "1"]]
    with pytest.raises(ModelLoadError) as err:
        load_model(data)
    assert err.value.location == "cones.eff_curves"


def test_float_literal_is_rejected():
    data = raw("P2")
    data["pairing"] = [[1.0]]
    with pytest.raises(ModelLoadError) as err:
        load_model(data)
    assert err.value.location == "pairing[0][0]"


def test_generic_profile_is_mandatory():
    data = raw("P2")
    data["profiles"][0]["name"] = "special"
    with pytest.raises(ModelLoadError) as err:
        load_model(data)
    assert err.value.location == "profiles"


def test_broken_profile_cone_names_location():
    data = copy.deepcopy(raw("BlqP2"))
    data["profiles"][1]["cones"]["eff_curves"] = data["profiles"][0]["cones"]["eff_curves"]
    with pytest.raises(ModelLoadError) as err:
        load_model(data)
    assert err.value.location == "profiles[1].cones.eff_curves"


def test_disagreeing_volume_chambers_are_rejected():
    data = raw("BlqP2")
    data["volume"]["chambers"][1]["terms"] = [{"exponents": [2, 0], "coeff": "2"}]
    with pytest.raises(ModelLoadError) as err:
        load_model(data)
    assert err.value.location.startswith("volume")


def test_unknown_profile(p2):
    with pytest.raises(PreconditionError):
        p2.profile("nowhere")


def test_zariski_decomposition_on_blowup(blq, bl2):
    z = zariski_decompose(blq, vec(1, 1))
    assert z.positive == vec(1, 0)
    assert [(label, c) for label, _, c in z.negative_support] == [("F", Fraction(1))]

    z = zariski_decompose(bl2, vec(1, 1, 1))
    assert z.positive == vec(1, 0, 0)
    assert sorted(label for label, _, _ in z.negative_support) == ["E1", "E2"]
    assert volume(bl2, vec(1, 1, 1)) == 1


def test_zariski_needs_a_surface(blp3):
    with pytest.raises(UnsupportedError):
        zariski_decompose(blp3, vec(1, 0))


def test_threefold_intersections(blp3):
    assert curve_power_of(blp3, vec(2, -1)) == vec(4, -1)
    assert top_intersection(blp3, vec(2, -1)) == 7
    assert volume(blp3, vec(2, -1)) == 7
    assert volume(blp3, vec(1, 1)) == 1


def test_null_curves(bl2):
    assert null_curves(bl2, vec(1, 0, 0)) == ["E1", "E2"]
    assert null_curves(bl2, vec(3, -1, -1)) == []
    assert null_curves(bl2, vec(2, -1, -1)) == ["L12"]


def test_outside_eff_is_rejected(blq):
    with pytest.raises(PreconditionError):
        volume(blq, vec(-1, 0))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=6), min_size=3, max_size=3).filter(any))
def test_zariski_positive_part_is_nef_and_orthogonal(bl2, coeffs):
    rays = bl2.eff_div.rays
    L = sum((r * k for r, k in zip(rays[1:], coeffs[1:])), rays[0] * coeffs[0])
    z = zariski_decompose(bl2, L)
    assert contains(bl2.nef, z.positive)
    for label, cls, _ in z.negative_support:
        assert pair(bl2.pairing, z.positive, cls) == 0
    assert volume(bl2, L) == pair(bl2.pairing, z.positive, z.positive)


def test_zariski_does_not_depend_on_curve_order(bl2):
    data = raw("Bl2P2")
    data["negative_curves"] = list(reversed(data["negative_curves"]))
    shuffled = load_model(data)
    for L in (vec(1, 1, 1), vec(2, 1, 0), vec(3, -1, 2), vec(1, 2, 2), vec(0, 1, 1)):
        a, b = zariski_decompose(bl2, L), zariski_decompose(shuffled, L)
        assert a.positive == b.positive
        assert sorted((label, c) for label, _, c in a.negative_support) == sorted(
            (label, c) for label, _, c in b.negative_support
        )


def eff_class(model, coeffs):
    rays = model.eff_div.rays
    return sum((r * k for r, k in zip(rays[1:], coeffs[1:])), rays[0] * coeffs[0])


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=6), min_size=3, max_size=3).filter(any),
    st.integers(min_value=1, max_value=5),
)
def test_volume_has_degree_n(bl2, blp3, coeffs, t):
    for model in (bl2, blp3):
        L = eff_class(model, coeffs)
        assert volume(model, L * t) == t**model.dim_n * volume(model, L)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=6), min_size=3, max_size=3).filter(any))
def test_volume_lives_on_positive_part(bl2, coeffs):
    L = eff_class(bl2, coeffs)
    assert volume(bl2, L) == volume(bl2, zariski_decompose(bl2, L).positive)
