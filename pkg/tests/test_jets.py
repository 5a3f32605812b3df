import numpy as np
import pytest
from gmpy2 import mpq

from folia.frames import builtin_model
from folia.jets import (
    Jet, JetOrderError, cap, frame_derivative, min_order, normal_words, random_jet, random_jet_batch,
)

from fixtures import bundle_m2, heisenberg_jet


def test_constant_jet_has_zero_derivative():
    rw = builtin_model("hopf_s3").rewriter()
    d = frame_derivative(rw, 0, Jet.constant(mpq(5), 3))
    assert d.is_zero() and d.order == 2


def test_heisenberg_commutator_is_z():
    spec = builtin_model("heisenberg3")
    rw = spec.rewriter()
    f = random_jet(3, 11, spec.N)
    assert f.evaluate(rw, (0, 1)) - f.evaluate(rw, (1, 0)) == f.coeff((2,))


@pytest.mark.parametrize("name", ["heisenberg3", "heisenberg5", "hopf_s3", "hopf_s5"])
def test_commutator_relation_on_random_jets(name):
    spec = builtin_model(name)
    rw = spec.rewriter()
    N = spec.N
    f = random_jet(3, 5, N)
    df = [frame_derivative(rw, s, f) for s in range(N)]
    for i in range(N):
        for j in range(N):
            lhs = f.evaluate(rw, (i, j)) - f.evaluate(rw, (j, i))
            rhs = sum((c.value if isinstance(c, Jet) else c) * df[k].value
                      for k, c in spec.brackets[i][j].items())
            assert lhs == rhs


def test_random_jet_determinism():
    a, b, c = random_jet(3, 42, 3), random_jet(3, 42, 3), random_jet(3, 43, 3)
    assert a.comps == b.comps
    assert a.comps != c.comps


def test_random_jet_mean():
    batch = random_jet_batch(1, range(10_000), 3, floating=True)
    x = batch.comps[(0,)]
    sigma = x.std() / np.sqrt(x.size)
    assert abs(x.mean()) < 3 * sigma + 1e-12


def test_batch_matches_single_jets():
    batch = random_jet_batch(2, [3, 4], 3)
    single = random_jet(2, 4, 3)
    for w in normal_words(3, 2):
        assert batch.comps.get(w, np.zeros(2))[1] == single.coeff(w)


@pytest.mark.parametrize("name", ["heisenberg5", "hopf_s3", "hopf_s5"])
def test_rewrite_confluence(name):
    spec = builtin_model(name)
    rw = spec.rewriter()
    N = spec.N
    words = [(c, b, a) for a in range(N) for b in range(N) for c in range(N)][::7]
    for w in words:
        assert rw.reduce(w, "first") == rw.reduce(w, "last")


@pytest.mark.parametrize("make", [heisenberg_jet, bundle_m2])
def test_rewrite_confluence_with_jet_brackets(make):
    spec = make()
    rw = spec.rewriter()
    f = random_jet(3, 9, spec.N)
    for w in [(2, 1, 0), (1, 0, 1), (spec.N - 1, 0, 1)]:
        first = sum(c * f.coeff(nw) for nw, c in rw.reduce(w, "first").items())
        last = sum(c * f.coeff(nw) for nw, c in rw.reduce(w, "last").items())
        assert first == last


def test_order_errors():
    rw = builtin_model("heisenberg3").rewriter()
    f = random_jet(1, 0, 3)
    with pytest.raises(JetOrderError):
        f.evaluate(rw, (0, 1))
    with pytest.raises(JetOrderError):
        frame_derivative(rw, 0, frame_derivative(rw, 0, f))
    with pytest.raises(ValueError):
        Jet(2, {(1, 0): 1})


def test_cap_and_min_order():
    f = random_jet(3, 1, 3)
    assert min_order([f, mpq(2), f.truncate(1)]) == 1
    assert min_order([mpq(1)]) is None
    assert cap(f, 2).order == 2 and cap(mpq(3), 0) == 3
    with pytest.raises(JetOrderError):
        cap(f, -1)


def test_unconstrained_rewriter_drops_brackets():
    spec = builtin_model("heisenberg3")
    f = random_jet(3, 2, spec.N)
    loose = spec.rewriter(constrained=False)
    assert f.evaluate(loose, (1, 0)) == f.coeff((0, 1))
