import numpy as np
import pytest
from gmpy2 import mpq

from folia.curvature import adjoint_curvature, c_matrix, q_tensor, ric_map
from folia.exterior import Form, apply_C, basis_indices
from folia.frames import builtin_model
from folia.jets import Jet, random_jet, random_jet_batch
from folia.laplacians import (
    Calculus, bochner_identity_terms, bochner_laplacian, codifferential, commutation_check,
    exterior_derivative, exterior_derivative_brackets, form_values, hodge_laplacian,
    local_difference_operator, one_form_zero_order, random_form, random_form_batch,
)
from folia.scalars import Eps

from fixtures import bundle_m2, heisenberg_jet, solv

BUILTINS = ["heisenberg3", "heisenberg5", "hopf_s3", "hopf_s5"]
EPS = ["1/4", "1", "4", "inf"]


def all_specs():
    return [builtin_model(m) for m in BUILTINS] + [solv(), heisenberg_jet(), bundle_m2()]


def test_df_is_the_frame_gradient():
    spec = builtin_model("hopf_s3")
    f = random_jet(2, 1, spec.N)
    df = exterior_derivative(spec, Form(0, {(): f}))
    rw = spec.rewriter()
    for a in range(spec.N):
        assert df.coeffs[(a,)].comps == rw.derivative(a, f).comps


def test_heisenberg_d_nu():
    # d nu (X1, X2) = -nu([X1, X2]) = -1
    spec = builtin_model("heisenberg3")
    assert exterior_derivative(spec, Form.basis((2,), mpq(1))).coeffs == {(0, 1): -1}


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
def test_d_matches_bracket_formula(spec):
    for k in range(spec.N):
        a = random_form(spec, k, 2, seed=k)
        diff = exterior_derivative(spec, a) - exterior_derivative_brackets(spec, a)
        assert not form_values(diff)


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
def test_d_squared(spec):
    calc = Calculus(spec, "inf")
    for k in range(spec.N - 1):
        a = random_form_batch(spec, k, 3, range(20))
        assert not form_values(calc.d(calc.d(a)))


def test_d_squared_needs_the_bracket_terms():
    spec = builtin_model("hopf_s3")
    calc = Calculus(spec, "inf", constrained=False)
    a = random_form(spec, 0, 3, seed=0)
    assert form_values(calc.d(calc.d(a)))


def test_codifferential_examples():
    spec = builtin_model("heisenberg3")
    f = random_jet(2, 3, spec.N)
    assert codifferential(spec, 1, Form(0, {(): f})) == 0
    out = codifferential(spec, 1, Form(1, {(0,): f}))
    rw = spec.rewriter()
    assert out.coeffs[()].comps == (-rw.derivative(0, f)).comps


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
@pytest.mark.parametrize("eps", EPS)
def test_functions(spec, eps):
    calc = Calculus(spec, eps)
    f = Form(0, {(): random_jet(3, 4, spec.N)})
    lap = calc.laplace_function(f.coeffs[()])
    # delta d f = -Delta_H f, and both Laplacians reduce to Delta_H on functions
    assert not form_values(calc.delta(calc.d(f)) + Form(0, {(): lap}))
    assert not form_values(calc.hodge(f) - Form(0, {(): lap}))
    assert not form_values(calc.bochner(f) - calc.hodge(f))


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
@pytest.mark.parametrize("eps", EPS)
def test_weitzenbock(spec, eps):
    calc = Calculus(spec, eps)
    for k in range(spec.N + 1):
        a = random_form_batch(spec, k, 2, range(10))
        assert not form_values(calc.hodge(a) - calc.bochner(a)), k


def test_weitzenbock_wrappers_on_invariant_form():
    spec = builtin_model("heisenberg3")
    a = Form.basis((0,), mpq(1))
    for eps in EPS:
        assert hodge_laplacian(spec, eps, a) == bochner_laplacian(spec, eps, a)


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
@pytest.mark.parametrize("eps", EPS)
def test_function_commutation(spec, eps):
    f = random_jet_batch(3, range(10), spec.N)
    assert not commutation_check(spec, eps, f)
    assert not commutation_check(spec, eps, Jet.constant(mpq(3), 3))


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
@pytest.mark.parametrize("eps", ["1/4", "1", "4"])
def test_one_form_reconciliation(spec, eps):
    calc = Calculus(spec, eps)
    C, _ = c_matrix(spec, calc.ric, 1)
    assert (one_form_zero_order(spec, eps) == C).all()


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
@pytest.mark.parametrize("eps", ["1/4", "1", "4"])
def test_bochner_equality(spec, eps):
    a = random_form_batch(spec, 1, 2, range(10))
    t = bochner_identity_terms(spec, eps, a)
    assert np.all(t["lhs"] == t["rhs"])


def _closed_at_point(spec, alpha):
    """Adjust first-order jet components so that d alpha vanishes at the point."""
    calc = Calculus(spec, "inf")
    r = form_values(calc.d(alpha))
    for (a, b), v in r.items():
        jet = alpha.coeffs[(b,)]
        jet.comps[(a,)] = jet.comps.get((a,), 0) - v
    assert not form_values(calc.d(alpha))
    return alpha


@pytest.mark.parametrize("name", ["heisenberg3", "hopf_s3", "heisenberg5", "hopf_s5"])
@pytest.mark.parametrize("eps", ["1", "4"])
def test_bochner_inequality_on_closed_forms(name, eps):
    spec = builtin_model(name)
    alpha = _closed_at_point(spec, random_form_batch(spec, 1, 2, range(1000)))
    t = bochner_identity_terms(spec, eps, alpha)
    assert np.all(t["lhs"] == t["rhs"])
    assert np.all(t["grad"] >= t["minus_quarter_trJ2"])
    # lower bound by Q plus the J^2 term
    N = spec.N
    a0 = [np.asarray(alpha.coeffs[(k,)].value) for k in range(N)]
    Q = q_tensor(spec)
    qa = sum(a0[i] * Q[i, j] * a0[j] for i in range(N) for j in range(N))
    assert np.all(t["lhs"] >= qa + Eps(eps).inv * t["J2"])


def test_bochner_inequality_needs_closedness():
    # alpha = nu with first derivatives chosen so that nabla^eps_H alpha = 0 at the point:
    # the gradient term vanishes while -1/4 Tr J^2_alpha > 0, and alpha is not closed
    spec = builtin_model("hopf_s3")
    calc = Calculus(spec, "1")
    nu = Form(1, {(2,): Jet(2, {(): mpq(1)})})
    comps = {a: {(): mpq(1 if a == 2 else 0)} for a in range(3)}
    for i in range(spec.n):
        for (a,), v in form_values(calc.nabla(i, nu)).items():
            comps[a][(i,)] = -v
    alpha = Form(1, {(a,): Jet(2, c) for a, c in comps.items()})
    t = bochner_identity_terms(spec, "1", alpha, calc)
    assert t["lhs"] == t["rhs"]
    assert t["grad"] == 0 and t["minus_quarter_trJ2"] == 2
    assert form_values(calc.d(alpha))


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.name)
@pytest.mark.parametrize("eps", ["1/4", "1", "4"])
def test_local_formula(spec, eps):
    diff = ric_map(spec, adjoint_curvature(spec, eps))
    base = ric_map(spec, adjoint_curvature(spec, Eps("inf")))
    nu = (diff[0] + diff[1]) - (base[0] + base[1])
    op = local_difference_operator(spec, eps)
    for k in range(spec.N + 1):
        for I in basis_indices(spec.N, k):
            a = Form.basis(I, mpq(1))
            assert not form_values(apply_C(nu, a) - op(a))


def test_literal_local_formula_differs_on_hopf():
    spec = builtin_model("hopf_s3")
    diff = ric_map(spec, adjoint_curvature(spec, 1))
    base = ric_map(spec, adjoint_curvature(spec, Eps("inf")))
    nu = (diff[0] + diff[1]) - (base[0] + base[1])
    op = local_difference_operator(spec, 1, variant="literal")
    bad = [I for k in range(4) for I in basis_indices(3, k)
           if form_values(apply_C(nu, Form.basis(I, mpq(1))) - op(Form.basis(I, mpq(1))))]
    assert bad
