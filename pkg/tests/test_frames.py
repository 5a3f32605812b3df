import json

import numpy as np
import pytest
from gmpy2 import mpq

from folia.frames import (
    BUILTIN_MODELS, FrameError, FrameSpec, builtin_model, frame_from_dict, frame_to_dict,
    load_frame, validate,
)

from fixtures import broken_doc, bundle_m2, heisenberg_jet, solv, zeros


def heisenberg(g=1):
    om, ga, be = zeros(2, 2, 2), zeros(2, 2, 1), zeros(2, 1, 1)
    ga[0][1][0], ga[1][0][0] = mpq(g), mpq(-g)
    return om, ga, be


@pytest.mark.parametrize("name", BUILTIN_MODELS)
def test_builtins_validate(name):
    rep = validate(builtin_model(name))
    assert rep.ok, rep.failures


@pytest.mark.parametrize("make", [solv, heisenberg_jet, bundle_m2])
def test_fixtures_validate(make):
    assert validate(make()).ok


def test_heisenberg_structure():
    spec = builtin_model("heisenberg3")
    assert (spec.n, spec.m) == (2, 1)
    assert spec.gamma[0][1][0] == 1
    assert all(x == 0 for a in spec.omega for b in a for x in b)
    assert all(x == 0 for a in spec.beta for b in a for x in b)


def test_hopf_s3_structure_and_k_contact():
    spec = builtin_model("hopf_s3")
    assert spec.gamma[0][1][0] == 2
    # [Z, X1] = 2 X2 and [Z, X2] = -2 X1
    assert spec.coef(2, 0, 1) == 2 and spec.coef(2, 1, 0) == -2
    rep = validate(spec)
    assert rep.flags["k_contact_c2"] == 4.0
    J = spec.J_matrices()[0]
    assert np.array_equal(J @ J, -4 * np.eye(2))


def test_abelian_frame_is_not_bracket_generating():
    rep = validate(FrameSpec(2, 1, *heisenberg(0)))
    assert rep.failures == ["bracket_generating"]


def test_injected_horizontal_bracket_breaks_bundle_like():
    om, ga, be = heisenberg()
    ka = zeros(1, 2, 2)
    ka[0][0][1] = mpq(1)  # [Z, X1] = X2 without the matching -X1 in [Z, X2]
    rep = validate(FrameSpec(2, 1, om, ga, be, kappa=ka))
    assert "bundle_like" in rep.failures


def test_non_skew_beta_breaks_totally_geodesic():
    om, ga, be = heisenberg()
    be[0][0][0] = mpq(1)
    assert "totally_geodesic" in validate(FrameSpec(2, 1, om, ga, be)).failures


def test_broken_gamma_names_the_check(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(broken_doc()))
    rep = validate(load_frame(str(path)))
    assert not rep.ok and "antisymmetry" in rep.failures
    assert "gamma" in rep.checks["antisymmetry"]["detail"]


def test_validate_is_idempotent():
    spec = builtin_model("hopf_s5")
    assert validate(spec).to_dict() == validate(spec).to_dict()


def test_hopf_s5_flags():
    spec = builtin_model("hopf_s5")
    assert (spec.n, spec.m) == (4, 1)
    assert spec.compact_claim and spec.uniform and not spec.homogeneous
    assert not spec.is_constant()
    assert validate(spec).flags["k_contact_c2"] == 4.0


def test_nilmanifold_metadata():
    spec = builtin_model("heisenberg3_nilmanifold")
    assert spec.compact_claim and spec.metadata["betti"][1] == 2


@pytest.mark.parametrize("make", [lambda: builtin_model("hopf_s3"), heisenberg_jet, bundle_m2])
def test_json_round_trip(make):
    spec = make()
    doc = json.loads(json.dumps(frame_to_dict(spec)))
    again = frame_from_dict(doc)
    assert frame_to_dict(again) == frame_to_dict(spec)
    assert validate(again).to_dict() == validate(spec).to_dict()


def test_input_errors_carry_location(tmp_path):
    doc = broken_doc()
    doc["gamma"][1] = [[0]]
    with pytest.raises(FrameError, match=r"gamma\[1\]"):
        frame_from_dict(doc)
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2,\n "m": }')
    with pytest.raises(FrameError, match="line 2"):
        load_frame(str(bad))
    with pytest.raises(FrameError):
        frame_from_dict({"n": 2, "m": 1, "omega": [], "gamma": []})
    with pytest.raises(FrameError):
        builtin_model("nope")
