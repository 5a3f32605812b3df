import math

import numpy as np
import pytest
from gmpy2 import mpq

from folia.exterior import Form
from folia.frames import builtin_model
from folia.laplacians import Calculus
from folia.spectral import (
    NO_CONCLUSION, VANISHES, SpectralError, closed_form_decay, cohomology_verdict, d_matrix,
    garding_constant, g_eps_symmetric, heat_apply, invariant_matrix, laplacian_symmetric,
    decay_constant, select_eps,
)

from fixtures import solv

CONSTANT = ["heisenberg3", "heisenberg5", "hopf_s3", "berger_s3"]


def test_heisenberg_functions():
    op = invariant_matrix(builtin_model("heisenberg3"), 1, 0)
    assert op.matrix.tolist() == [[0]]
    assert garding_constant(op) == 0.0


def test_hopf_one_form_snapshots():
    # eps = inf: nabla theta^i = 0 on horizontal directions, so Delta theta^i = -Ric_H theta^i = -4 theta^i
    spec = builtin_model("hopf_s3")
    assert invariant_matrix(spec, "inf", 1).matrix.tolist() == [[-4, 0, 0], [0, -4, 0], [0, 0, 0]]
    assert invariant_matrix(spec, 1, 1).matrix.tolist() == [[-4, 0, 0], [0, -4, 0], [0, 0, -8]]
    assert invariant_matrix(spec, 2, 1).matrix.tolist() == [[-4, 0, 0], [0, -4, 0], [0, 0, -4]]


@pytest.mark.parametrize("name", CONSTANT)
def test_matrix_columns_agree_with_bochner(name):
    spec = builtin_model(name)
    for eps in ("1/2", "inf"):
        calc = Calculus(spec, eps)
        for k in range(spec.N + 1):
            op = invariant_matrix(spec, eps, k, calc)
            for col, I in enumerate(op.basis):
                img = calc.bochner(Form.basis(I, mpq(1)))
                want = [img.coeffs.get(J, 0) for J in op.basis]
                assert list(op.matrix[:, col]) == want


def test_heat_semigroup():
    op = invariant_matrix(builtin_model("hopf_s3"), 2, 1)
    a = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(heat_apply(op, 0, a), a)
    lhs = heat_apply(op, 1.0, a)
    rhs = heat_apply(op, 0.3, heat_apply(op, 0.7, a))
    assert np.abs(lhs - rhs).max() <= 1e-10
    with pytest.raises(ValueError):
        heat_apply(op, -1, a)


def test_heat_on_non_normal_operator():
    # solv is not Yang-Mills: the invariant Laplacian is not symmetric
    spec = solv()
    op = invariant_matrix(spec, 1, 2)
    a = np.linspace(-1, 1, op.dim)
    lhs = heat_apply(op, 1.0, a)
    rhs = heat_apply(op, 0.3, heat_apply(op, 0.7, a))
    assert np.abs(lhs - rhs).max() <= 1e-10


@pytest.mark.parametrize("name", ["heisenberg3", "hopf_s3"])
def test_garding_bound(name):
    spec = builtin_model(name)
    op = invariant_matrix(spec, 1, 1)
    K = garding_constant(op)
    assert math.isfinite(K)
    rng = np.random.default_rng(0)
    for _ in range(5):
        a = rng.standard_normal(op.dim)
        for t in (0.5, 1, 3):
            assert op.norm(heat_apply(op, t, a)) <= math.exp(K * t) * op.norm(a) * (1 + 1e-12)


def test_symmetry_iff_yang_mills():
    for name in CONSTANT:
        assert laplacian_symmetric(builtin_model(name))
    assert not laplacian_symmetric(solv())
    assert not g_eps_symmetric(invariant_matrix(solv(), 2, 1))


def test_decay_constant_and_selection():
    spec = builtin_model("hopf_s3")
    assert decay_constant(spec, 1) == pytest.approx(0.0, abs=1e-12)
    assert decay_constant(spec, 2) == pytest.approx(1.0)
    eps, c = select_eps(spec)
    assert eps == 2 and c == pytest.approx(1.0)
    assert select_eps(builtin_model("heisenberg3")) == (None, None)


def test_hopf_one_forms():
    rep = closed_form_decay(builtin_model("hopf_s3"), "auto", 1)
    assert rep["eps"] == "2" and rep["c_eps"] == pytest.approx(1.0)
    # no closed invariant 1-forms on S^3; the whole invariant space decays at rate |K| >= c
    assert rep["closed_dim"] == 0 and rep["status"] == "VACUOUS"
    assert rep["all_invariant_decay_ok"] and rep["garding"] == pytest.approx(-4.0)


def test_hopf_two_forms_decay_exactly():
    rep = closed_form_decay(builtin_model("hopf_s3"), 2, 2)
    assert rep["closed_dim"] == 3 and rep["status"] == "DECAYS"
    assert rep["gap"] == pytest.approx(4.0)
    assert rep["exactness_residual"] <= 1e-10
    assert rep["commutation_residual"] == 0.0


def test_harmonic_functions_persist():
    rep = closed_form_decay(builtin_model("hopf_s3"), 2, 0)
    assert rep["status"] == "PERSISTS"


def test_heisenberg_gate_fails():
    rep = closed_form_decay(builtin_model("heisenberg3"), "auto", 1)
    assert rep["status"] == NO_CONCLUSION


def test_non_constant_model_is_rejected():
    with pytest.raises(SpectralError):
        invariant_matrix(builtin_model("hopf_s5"), 1, 1)
    with pytest.raises(SpectralError):
        d_matrix(builtin_model("hopf_s5"), 1)


def test_d_matrix_squares_to_zero():
    for name in CONSTANT + ["solv"]:
        spec = solv() if name == "solv" else builtin_model(name)
        for k in range(spec.N - 1):
            assert not (d_matrix(spec, k + 1).dot(d_matrix(spec, k)) != 0).any()


def _statuses(v):
    return {k: d["status"] for k, d in v.degrees.items()}


def test_verdict_hopf_s3():
    v = cohomology_verdict(builtin_model("hopf_s3"))
    assert v.vanishing() == [1, 2]
    betti = [1, 0, 0, 1]
    assert all(betti[k] == 0 for k in v.vanishing())


def test_verdict_hopf_s5():
    v = cohomology_verdict(builtin_model("hopf_s5"))
    s = _statuses(v)
    assert s[1] == VANISHES and s[4] == VANISHES
    # R_H has a kernel, so the middle degrees stay undecided
    assert s[2] == NO_CONCLUSION and s[3] == NO_CONCLUSION
    assert "R_H is not positive" in v.degrees[2]["reason"]


@pytest.mark.parametrize("name", ["heisenberg3_nilmanifold", "heisenberg5_nilmanifold"])
def test_verdict_nilmanifolds_never_contradict_betti(name):
    spec = builtin_model(name)
    v = cohomology_verdict(spec)
    assert v.vanishing() == []
    assert all(spec.metadata["betti"][k] == 0 for k in v.vanishing())


def test_verdict_without_compactness():
    spec = builtin_model("hopf_s3")
    spec.compact_claim = False
    v = cohomology_verdict(spec)
    assert all(d["status"] == NO_CONCLUSION and d["reason"] == "compactness not asserted"
               for d in v.degrees.values())


def test_verdict_to_dict_is_json_ready():
    import json
    json.dumps(cohomology_verdict(builtin_model("hopf_s3")).to_dict())
