"""The identity battery behind ``folia verify``.

Every check returns a plain dict with a name, a status (PASS, FAIL or SKIP),
counts and the largest residual (exact residuals are rendered as strings).
Random trials are split into fixed chunks with seeds derived from
(seed, check, chunk), so results do not depend on how chunks are scheduled.
"""

from concurrent.futures import ThreadPoolExecutor
import os

import numpy as np

from .connections import bott_connection, yang_mills
from .curvature import (
    CurvatureMismatch, adiabatic_q_residual, adjoint_curvature, bianchi_residual, c_matrix,
    metric_connection_commutation, ric_h_product_rule, ric_map, scaling_expansion,
    vertical_parallel_torsion,
)
from .exterior import Form, apply_C, basis_indices
from .frames import validate
from .jets import random_jet_batch
from .laplacians import (
    Calculus, bochner_identity_terms, commutation_check, form_values, local_difference_operator,
    one_form_zero_order, random_form_batch,
)
from .scalars import Eps

__all__ = ["run_battery", "weitzenbock_trials", "d_squared_trials", "thread_count", "CHUNK"]

CHUNK = 50


def thread_count():
    """Worker threads, capped by FOLIA_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("FOLIA_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    workers = min(thread_count(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _seeds(seed, tag, start, count):
    ss = np.random.SeedSequence([int(seed), int(tag), int(start)])
    return [int(x) for x in ss.generate_state(count)]


def _chunks(trials):
    return [(s, min(CHUNK, trials - s)) for s in range(0, trials, CHUNK)]


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _trial_stats(values, count):
    """(failing trial count, largest |residual|) from batched residual components."""
    bad = np.zeros(count, dtype=bool)
    worst = 0
    for v in values:
        arr = np.asarray(v, dtype=object).reshape(-1)
        if arr.size == 1 and count > 1:
            arr = np.repeat(arr, count)
        nz = np.array([x != 0 for x in arr], dtype=bool)
        bad |= nz
        for x in arr:
            if abs(x) > worst:
                worst = abs(x)
    return int(bad.sum()), worst


def _result(name, ok, eps=None, **extra):
    out = {"name": name, "status": "PASS" if ok else "FAIL"}
    if eps is not None:
        out["eps"] = str(eps)
    for k, v in extra.items():
        out[k] = _fmt(v) if k == "max_residual" else v
    return out


# --------------------------------------------------------------------------
# randomized identities

def weitzenbock_trials(spec, eps, degree, trials, seed, order=2, calc=None):
    """(failures, max residual) of Hodge minus Bochner on random order-``order`` forms."""
    calc = calc or Calculus(spec, eps)

    def work(chunk):
        start, count = chunk
        a = random_form_batch(spec, degree, order, _seeds(seed, 100 + degree, start, count))
        r = calc.hodge(a) - calc.bochner(a)
        return _trial_stats(form_values(r).values(), count)

    parts = _pmap(work, _chunks(trials))
    return sum(p[0] for p in parts), max((p[1] for p in parts), default=0)


def d_squared_trials(spec, degree, trials, seed, order=3, constrained=True):
    """(failures, max residual) of d(d a) on random order-``order`` forms."""
    calc = Calculus(spec, Eps("inf"), constrained=constrained)

    def work(chunk):
        start, count = chunk
        a = random_form_batch(spec, degree, order, _seeds(seed, 200 + degree, start, count))
        r = calc.d(calc.d(a))
        return _trial_stats(form_values(r).values(), count)

    parts = _pmap(work, _chunks(trials))
    return sum(p[0] for p in parts), max((p[1] for p in parts), default=0)


def _commutation_trials(spec, eps, trials, seed, calc):
    def work(chunk):
        start, count = chunk
        f = random_jet_batch(3, _seeds(seed, 300, start, count), spec.N)
        return _trial_stats(commutation_check(spec, eps, f, calc).values(), count)

    parts = _pmap(work, _chunks(trials))
    return sum(p[0] for p in parts), max((p[1] for p in parts), default=0)


def _bochner_trials(spec, eps, trials, seed, calc, order=2):
    def work(chunk):
        start, count = chunk
        a = random_form_batch(spec, 1, order, _seeds(seed, 400, start, count))
        t = bochner_identity_terms(spec, eps, a, calc)
        return _trial_stats([t["lhs"] - t["rhs"]], count)

    parts = _pmap(work, _chunks(trials))
    return sum(p[0] for p in parts), max((p[1] for p in parts), default=0)


# --------------------------------------------------------------------------
# exact pointwise identities

def _one_form_reconciliation(spec, eps, calc):
    M = one_form_zero_order(spec, eps)
    C, _ = c_matrix(spec, calc.ric, 1)
    diff = [abs(x) for x in (M - C).reshape(-1)]
    return max(diff, default=0)


def _local_formula(spec, eps):
    diff = ric_map(spec, adjoint_curvature(spec, eps))
    base = ric_map(spec, adjoint_curvature(spec, Eps("inf")))
    nu = (diff[0] + diff[1]) - (base[0] + base[1])
    op = local_difference_operator(spec, eps)
    bad = 0
    for k in range(spec.N + 1):
        for I in basis_indices(spec.N, k):
            a = Form.basis(I)
            if form_values(apply_C(nu, a) - op(a)):
                bad += 1
    return bad


def _count(d):
    return len(d) if d else 0


def run_battery(spec, eps_list, trials=200, seed=0, order=2, constrained=True):
    """Run every identity check; returns the list of check dicts in a fixed order."""
    checks = []
    rep = validate(spec)
    checks.append(_result("frame_validity", rep.ok, failures=rep.failures))

    N = spec.N
    # eps-independent identities
    fails, worst = 0, 0
    for k in range(max(N - 1, 0)):
        f, w = d_squared_trials(spec, k, trials, seed, order + 1, constrained)
        fails, worst = fails + f, max(worst, w)
    total = trials * max(N - 1, 0)
    checks.append(_result("d_squared", fails == 0, trials=total, failures=fails,
                          max_residual=worst, constrained=constrained))

    bott = bott_connection(spec)
    res = bianchi_residual(bott)
    checks.append(_result("bianchi", not res, failures=_count(res)))
    res = metric_connection_commutation(bott, "bott")
    checks.append(_result("commute_bott", not res, failures=_count(res)))
    res = metric_connection_commutation(bott, "general")
    checks.append(_result("commute_general", not res, failures=_count(res)))
    flag, _, resid = vertical_parallel_torsion(spec)
    checks.append(_result("vertical_torsion_equivalence", not resid, failures=_count(resid),
                          nabla_z_t_zero=flag))
    bad = ric_h_product_rule(spec)
    checks.append(_result("ric_h_product_rule", bad == 0, failures=bad))
    exp = scaling_expansion(spec, bott)
    checks.append(_result("scaling_grading", exp["ok"],
                          failures=sum(len(v) for v in exp["grading"].values())))
    if spec.is_constant():
        from .spectral import laplacian_symmetric

        sym, ym = laplacian_symmetric(spec), yang_mills(spec)
        checks.append(_result("symmetry_iff_yang_mills", sym == ym, symmetric=sym, yang_mills=ym))

    for e in eps_list:
        eps = e if isinstance(e, Eps) else Eps(e)
        try:
            calc = Calculus(spec, eps)
            _ = calc.ric
            checks.append(_result("curv1", True, eps))
        except CurvatureMismatch as exc:
            checks.append(_result("curv1", False, eps, detail=str(exc)))
            continue
        fails, worst = 0, 0
        for k in range(N + 1):
            f, w = weitzenbock_trials(spec, eps, k, trials, seed, order, calc)
            fails, worst = fails + f, max(worst, w)
        checks.append(_result("weitzenbock", fails == 0, eps, trials=trials * (N + 1),
                              failures=fails, max_residual=worst))
        f, w = _commutation_trials(spec, eps, trials, seed, calc)
        checks.append(_result("function_commutation", f == 0, eps, trials=trials,
                              failures=f, max_residual=w))
        if eps.finite:
            f, w = _bochner_trials(spec, eps, trials, seed, calc, order)
            checks.append(_result("bochner_equality", f == 0, eps, trials=trials,
                                  failures=f, max_residual=w))
            w = _one_form_reconciliation(spec, eps, calc)
            checks.append(_result("one_form_reconciliation", w == 0, eps, max_residual=w))
            bad = _local_formula(spec, eps)
            checks.append(_result("local_formula", bad == 0, eps, failures=bad))
            if spec.is_constant():
                w = adiabatic_q_residual(spec, eps, seed=seed)
                checks.append(_result("adiabatic_q", w == 0, eps, max_residual=w))
    return checks
