"""Exterior derivative, horizontal codifferential and the horizontal Laplacians.

Everything acts on forms whose coefficients are jets (or plain constants for
invariant forms).  :class:`Calculus` caches the connection data for one frame
and one value of eps; the module-level functions are thin wrappers.
"""

from itertools import combinations

import numpy as np

from .connections import (
    bott_connection, covariant_derivative, epsilon_connection,
    horizontal_divergence_torsion, j_map, torsion,
)
from .curvature import ric_map, adjoint_curvature
from .exterior import Form, apply_C, contract, wedge, wedge_covector
from .jets import Jet, fd, random_jet, random_jet_batch
from .scalars import Eps, is_zero, mpq

__all__ = [
    "Calculus",
    "exterior_derivative",
    "exterior_derivative_brackets",
    "codifferential",
    "hodge_laplacian",
    "bochner_laplacian",
    "connection_laplacian",
    "commutation_check",
    "bochner_identity_terms",
    "random_form",
    "random_form_batch",
    "form_values",
    "one_form_zero_order",
    "local_difference_operator",
]


def _nz(x):
    return not (x.is_zero() if isinstance(x, Jet) else is_zero(x))


def _val(x):
    return x.value if isinstance(x, Jet) else x


def _zero(degree):
    return Form._raw(max(degree, 0), {})


class Calculus:
    """Differential operators of one frame at one eps in (0, inf]."""

    def __init__(self, spec, eps, constrained=True, weight22=mpq(1, 2)):
        self.spec = spec
        self.eps = eps if isinstance(eps, Eps) else Eps(eps)
        self.rw = spec.rewriter(constrained)
        self.bott = bott_connection(spec)
        self.T = torsion(self.bott)
        self.conn = epsilon_connection(spec, self.eps, self.bott)
        self.weight22 = weight22
        self._ric = None
        self._CT = [(a, b, c, v) for a, b in combinations(range(spec.N), 2)
                    for c, v in self.T[a][b].items()]

    # first-order operators -------------------------------------------------
    def nabla(self, s, form):
        return covariant_derivative(self.conn, s, form, self.rw)

    def d(self, form):
        """d = C_T + sum_a theta^a ^ nabla_a with the Bott connection."""
        out = _zero(form.degree + 1)
        if form.degree > 0:
            for a, b, c, t in self._CT:
                piece = contract(c, form)
                if not piece.coeffs:
                    continue
                piece = wedge_covector(a, wedge_covector(b, piece))
                out = out + piece.scale(t)
        for a in range(self.spec.N):
            piece = covariant_derivative(self.bott, a, form, self.rw)
            if piece.coeffs:
                out = out + wedge_covector(a, piece)
        return out

    def delta(self, form):
        """delta_{H,eps} = -sum_i iota_{X_i} nabla^eps_{X_i}."""
        if form.degree == 0:
            return None
        out = _zero(form.degree - 1)
        for i in range(self.spec.n):
            out = out - contract(i, self.nabla(i, form))
        return out

    # Laplacians -------------------------------------------------------------
    def hodge(self, form):
        """-d delta - delta d."""
        out = -self.delta(self.d(form))
        dl = self.delta(form)
        if dl is not None:
            out = out - self.d(dl)
        return out

    def L(self, form):
        """sum_i nabla_i nabla_i - nabla_{nabla_i X_i}."""
        out = _zero(form.degree)
        first = {}
        for i in range(self.spec.n):
            first[i] = self.nabla(i, form)
            out = out + self.nabla(i, first[i])
        for i in range(self.spec.n):
            for c, g in self.conn.G[i][i].items():
                piece = first[c] if c in first else self.nabla(c, form)
                out = out - piece.scale(g)
        return out

    @property
    def ric(self):
        if self._ric is None:
            r11, r22 = ric_map(self.spec, adjoint_curvature(self.spec, self.eps), self.weight22)
            self._ric = r11 + r22
        return self._ric

    def C_ric(self, form):
        return apply_C(self.ric, form)

    def bochner(self, form):
        """L - C_Ric."""
        return self.L(form) - self.C_ric(form)

    def laplace_function(self, f):
        """Delta_H f = sum_i X_i X_i f - (nabla_{X_i} X_i) f."""
        out = 0
        for i in range(self.spec.n):
            out = out + fd(self.rw, i, fd(self.rw, i, f))
            for c, g in self.bott.G[i][i].items():
                out = out - g * fd(self.rw, c, f)
        return out


def exterior_derivative(spec, form, constrained=True):
    return Calculus(spec, "inf", constrained).d(form)


def exterior_derivative_brackets(spec, form, rw=None):
    """Independent d: d(f theta^I) = df ^ theta^I + f d theta^I with
    d theta^c = -sum_{a<b} c_ab^c theta^a ^ theta^b."""
    rw = rw or spec.rewriter()
    N = spec.N
    dtheta = {}
    for c in range(N):
        coeffs = {}
        for a, b in combinations(range(N), 2):
            v = spec.coef(a, b, c)
            if _nz(v):
                coeffs[(a, b)] = -v
        dtheta[c] = Form._raw(2, coeffs)

    def d_basis(index):
        if not index:
            return _zero(1)
        head, rest = index[0], index[1:]
        rest_form = Form._raw(len(rest), {rest: mpq(1)})
        out = wedge(dtheta[head], rest_form)
        return out - wedge_covector(head, d_basis(rest))

    out = _zero(form.degree + 1)
    for key, f in form.coeffs.items():
        for s in range(N):
            dfs = fd(rw, s, f)
            if _nz(dfs):
                out = out + wedge_covector(s, Form._raw(form.degree, {key: dfs}))
        db = d_basis(key)
        if db.coeffs:
            out = out + db.scale(f)
    return out


def codifferential(spec, eps, form):
    """delta_{H,eps} of a form; functions are sent to 0."""
    out = Calculus(spec, eps).delta(form)
    return 0 if out is None else out


def hodge_laplacian(spec, eps, form):
    return Calculus(spec, eps).hodge(form)


def connection_laplacian(spec, eps, form):
    return Calculus(spec, eps).L(form)


def bochner_laplacian(spec, eps, form):
    return Calculus(spec, eps).bochner(form)


def form_values(form):
    """Coefficients at the point, dropping zeros."""
    out = {}
    for k, v in form.coeffs.items():
        x = _val(v)
        if not is_zero(x):
            out[k] = x
    return out


def commutation_check(spec, eps, f, calc=None):
    """d Delta_H f - Delta_{H,eps} d f at the point (a dict of nonzero components)."""
    calc = calc or Calculus(spec, eps)
    fj = Form._raw(0, {(): f})
    lhs = calc.d(Form._raw(0, {(): calc.laplace_function(f)}))
    rhs = calc.hodge(calc.d(fj))
    return form_values(lhs - rhs)


def _form_seeds(seed, degree, count):
    ss = np.random.SeedSequence([int(seed), int(degree), 7])
    return [int(x) for x in ss.generate_state(count)]


def random_form(spec, degree, order, seed, floating=False):
    """Random form whose coefficient jets come from deterministic per-seed draws."""
    keys = list(combinations(range(spec.N), degree))
    seeds = _form_seeds(seed, degree, len(keys))
    return Form._raw(degree, {k: random_jet(order, s, spec.N, floating) for k, s in zip(keys, seeds)})


def random_form_batch(spec, degree, order, seeds, floating=False):
    """Batch of random_form draws stacked into array-valued jets."""
    keys = list(combinations(range(spec.N), degree))
    per = [_form_seeds(s, degree, len(keys)) for s in seeds]
    coeffs = {}
    for idx, k in enumerate(keys):
        coeffs[k] = random_jet_batch(order, [p[idx] for p in per], spec.N, floating)
    return Form._raw(degree, coeffs)


# --------------------------------------------------------------------------
# 1-form identities

def _J_matrices(spec):
    """J_l as matrices acting on horizontal coordinate vectors."""
    return [np.array([[_val(x) for x in row] for row in Jl], dtype=object).T for Jl in j_map(spec)]


def one_form_zero_order(spec, eps):
    """Matrix of Ric_H + (1/eps) delta_H T + (1/eps) J^2 acting on covector coordinates.

    Row index is the output component.  Ric_H is the (1,1) Ricci term of the
    Bott curvature; delta_H T and J^2 = sum_l J_l^2 act on covectors through
    the metric, eta -> flat(A sharp(eta)).
    """
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    n, m, N = spec.n, spec.m, spec.N
    r11, _ = ric_map(spec, adjoint_curvature(spec, "inf"))
    M = np.zeros((N, N), dtype=object)
    M[...] = mpq(0)
    for ((b,), (e,)), w in r11.terms.items():
        M[b, e] += w
    D = horizontal_divergence_torsion(spec)
    for x in range(N):
        for e, v in D[x].items():
            M[e, x] += eps.inv * _val(v)
    if m:
        J2 = sum(Jl.dot(Jl) for Jl in _J_matrices(spec))
        for i in range(n):
            for j in range(n):
                M[j, i] += eps.inv * J2[j, i]
    return M


def bochner_identity_terms(spec, eps, alpha, calc=None):
    """Both sides of the pointwise Bochner identity for a 1-form jet ``alpha``.

    lhs = 1/2 Delta_H |alpha|_eps^2 - <Delta_{H,eps} alpha, alpha>_eps
    rhs = |nabla^eps_H alpha|_eps^2 + <Ric_H alpha, alpha>_H
          + <delta_H T alpha, alpha>_V + (1/eps) <J^2 alpha, alpha>_H
    (delta_H T as in :func:`folia.connections.horizontal_divergence_torsion`).
    Returns a dict of point values; also reports -1/4 Tr_H J^2_alpha.
    """
    calc = calc or Calculus(spec, eps)
    eps = calc.eps
    if not eps.finite:
        raise ValueError("the eps-norm needs finite eps")
    n, m, N = spec.n, spec.m, spec.N
    w = [mpq(1)] * n + [eps.value] * m

    def norm2(form):
        total = 0
        for (a,), v in form.coeffs.items():
            total = total + w[a] * v * v
        return total

    sq = norm2(alpha)
    lap = calc.laplace_function(sq) if isinstance(sq, Jet) else 0
    delta_alpha = calc.hodge(alpha)
    pair = 0
    for (a,), v in delta_alpha.coeffs.items():
        u = alpha.coeffs.get((a,))
        if u is not None:
            pair = pair + w[a] * _val(v) * _val(u)
    lhs = _val(lap) / 2 - pair

    grad = 0
    for i in range(n):
        grad = grad + norm2(Form._raw(1, {k: _val(v) for k, v in calc.nabla(i, alpha).coeffs.items()}))
    a0 = [_val(alpha.coeffs.get((a,), 0)) for a in range(N)]
    r11, _ = ric_map(spec, adjoint_curvature(spec, "inf"))
    ric = 0
    for ((b,), (e,)), wt in r11.terms.items():
        ric = ric + wt * a0[e] * a0[b]
    D = horizontal_divergence_torsion(spec)
    dt = 0
    for x in range(n):
        for e, v in D[x].items():
            if e >= n:
                dt = dt + _val(v) * a0[x] * a0[e]
    Js = _J_matrices(spec)
    jj = 0
    trj = 0
    if m:
        # explicit sums so that batched (array-valued) coefficients work too
        J2 = sum(Jl.dot(Jl) for Jl in Js)
        for i in range(n):
            for j in range(n):
                if J2[i, j] != 0:
                    jj = jj + a0[i] * J2[i, j] * a0[j]
        for l in range(m):
            for k in range(m):
                t = np.trace(Js[l].dot(Js[k]))
                if t != 0:
                    trj = trj - a0[n + l] * a0[n + k] * t / 4
    rhs = grad + ric + dt + eps.inv * jj
    return {"lhs": lhs, "rhs": rhs, "grad": grad, "ric": ric, "delta_T": dt,
            "J2": jj, "minus_quarter_trJ2": trj}


# --------------------------------------------------------------------------
# the displayed local formula for the eps-dependent part of the Ricci term

def local_difference_operator(spec, eps, variant="corrected"):
    """Operator form of C_{Ric^eps} - C_{Ric_H} read off term by term.

    ``variant="literal"`` uses the six displayed terms as printed: the
    delta_H T sum runs over i = 1..m and the B2 term carries J_{T(X_j, X_i)}.
    ``variant="corrected"`` sums the delta_H T term over i = 1..n and uses
    J_{T(X_i, X_j)}; this is what the B-expansion produces.
    """
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    n, m, N = spec.n, spec.m, spec.N
    inv = eps.inv
    bott = bott_connection(spec)
    T = torsion(bott)
    from .connections import nabla_tensor12, j_tensor
    Jt = j_tensor(spec, T)
    nT = [nabla_tensor12(bott, a, T) for a in range(N)]
    D = horizontal_divergence_torsion(spec, bott)
    Js = _J_matrices(spec)
    literal = variant == "literal"
    terms = []  # (coefficient, form indices wedged on the left, contractions in order)

    def vec_val(cell):
        return {e: _val(v) for e, v in cell.items() if _nz(_val(v))}

    for i in range(min(m, n) if literal else n):
        for e, v in vec_val(D[i]).items():
            terms.append((inv * v, [e], [i]))
    # horizontal and vertical directions of the nabla T terms
    for k in range(N):
        for i in range(n):
            for j in range(n):
                for e, v in vec_val(nT[k][i][j]).items():
                    terms.append((inv * v, [k, e], [i, j]))
    if m:
        J2 = sum(Jl.dot(Jl) for Jl in Js)
        for i in range(n):
            for j in range(n):
                if J2[j, i] != 0:
                    terms.append((inv * J2[j, i], [j], [i]))
    for i in range(n):
        for j in range(n):
            src = T[j][i] if literal else T[i][j]
            for z, t in src.items():
                tv = _val(t)
                for k in range(n):
                    for e, v in Jt[z][k].items():
                        terms.append((inv * tv * _val(v) / 2, [i, j], [k, e]))
    for r in range(m):
        for s_ in range(m):
            prod = Js[r].dot(Js[s_])
            for k in range(n):
                for e in range(n):
                    if prod[e, k] != 0:
                        terms.append((inv * inv * prod[e, k], [n + r, n + s_], [k, e]))

    def op(form):
        out = None
        for c, forms, contr in terms:
            piece = form
            for b in contr:
                piece = contract(b, piece)
                if not piece.coeffs:
                    break
            if not piece.coeffs:
                continue
            for a in reversed(forms):
                piece = wedge_covector(a, piece)
            piece = piece.scale(c)
            out = piece if out is None else out + piece
        return out if out is not None else _zero(form.degree)

    return op
