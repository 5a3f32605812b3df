"""Connections attached to an adapted frame.

Coefficients are stored sparsely: ``G[a][b]`` is a dict ``{c: Gamma_ab^c}``
meaning ``nabla_{E_a} E_b = sum_c Gamma_ab^c E_c``.  The Bott connection is the
reference; the epsilon family and its adjoints are built from Bott data,
the torsion ``T`` and the map ``J``.
"""

from .exterior import Form, contract, wedge_covector
from .jets import Jet, cap, fd, min_order
from .scalars import Eps, is_zero

__all__ = [
    "Connection",
    "levi_civita",
    "bott_connection",
    "torsion",
    "j_map",
    "j_tensor",
    "epsilon_connection",
    "adjoint_connection",
    "covariant_derivative",
    "nabla_tensor12",
    "metric_defect",
    "horizontal_divergence_torsion",
    "yang_mills",
]


def _nz(x):
    return not (x.is_zero() if isinstance(x, Jet) else is_zero(x))


def _acc(d, key, v):
    if key in d:
        d[key] = d[key] + v
    else:
        d[key] = v


def _clean(table):
    return [[{c: v for c, v in cell.items() if _nz(v)} for cell in row] for row in table]


def _empty(N):
    return [[{} for _ in range(N)] for _ in range(N)]


class Connection:
    """Frame coefficients of a linear connection plus the frame it lives on."""

    __slots__ = ("spec", "G", "label", "_rw")

    def __init__(self, spec, G, label=""):
        self.spec = spec
        self.G = _clean(G)
        self.label = label
        self._rw = None

    @property
    def rw(self):
        if self._rw is None:
            self._rw = self.spec.rewriter()
        return self._rw

    def coef(self, a, b, c):
        return self.G[a][b].get(c, 0)

    def at_point(self):
        """Plain-number table of the values at the point."""
        N = self.spec.N
        return [[[_val(self.coef(a, b, c)) for c in range(N)] for b in range(N)] for a in range(N)]

    def __repr__(self):
        return f"Connection({self.label or 'unnamed'} on {self.spec.name})"


def _val(x):
    return x.value if isinstance(x, Jet) else x


def levi_civita(spec):
    """Koszul formula in the orthonormal frame.

    <nabla_a E_b, E_c> = (c_ab^c - c_bc^a + c_ca^b) / 2.
    """
    N = spec.N
    G = _empty(N)
    for a in range(N):
        for b in range(N):
            for c in range(N):
                v = spec.coef(a, b, c) - spec.coef(b, c, a) + spec.coef(c, a, b)
                if _nz(v):
                    G[a][b][c] = v / 2
    return Connection(spec, G, "levi-civita")


def bott_connection(spec):
    n, N = spec.n, spec.N
    lc = levi_civita(spec)
    G = _empty(N)
    for a in range(N):
        for b in range(N):
            for c in range(N):
                same_h = (b < n) == (c < n)
                if not same_h:
                    continue
                if a < n and b < n:
                    v = lc.coef(a, b, c)  # pi_H nabla^g_X Y
                elif a >= n and b >= n:
                    v = lc.coef(a, b, c)  # pi_V nabla^g_Z W
                elif a >= n and b < n:
                    v = spec.coef(a, b, c)  # pi_H [Z, X]
                else:
                    v = spec.coef(a, b, c)  # pi_V [X, Z]
                if _nz(v):
                    G[a][b][c] = v
    return Connection(spec, G, "bott")


def torsion(conn):
    """T[a][b] = {c: T_ab^c} with T(E_a,E_b) = nabla_a b - nabla_b a - [a, b]."""
    spec = conn.spec
    N = spec.N
    T = _empty(N)
    for a in range(N):
        for b in range(N):
            cell = {}
            for c, v in conn.G[a][b].items():
                _acc(cell, c, v)
            for c, v in conn.G[b][a].items():
                _acc(cell, c, -v)
            for c, v in spec.brackets[a][b].items():
                _acc(cell, c, -v)
            T[a][b] = {c: v for c, v in cell.items() if _nz(v)}
    return T


def j_map(spec, T=None):
    """J[l][i][j] = <J_{Z_l} X_i, X_j> = <Z_l, T(X_i, X_j)> (Bott torsion)."""
    if T is None:
        T = torsion(bott_connection(spec))
    n = spec.n
    return [[[T[i][j].get(n + l, 0) for j in range(n)] for i in range(n)] for l in range(spec.m)]


def j_tensor(spec, T=None):
    """Full-frame table Jt[a][b] = {c: <J_{E_a} E_b, E_c>}; zero unless a is vertical."""
    n, N = spec.n, spec.N
    J = j_map(spec, T)
    Jt = _empty(N)
    for l in range(spec.m):
        for i in range(n):
            for j in range(n):
                v = J[l][i][j]
                if _nz(v):
                    Jt[n + l][i][j] = v
    return Jt


def epsilon_connection(spec, eps, bott=None):
    """nabla^eps_X Y = nabla_X Y - T(X,Y) + (1/eps) J_Y X."""
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    bott = bott or bott_connection(spec)
    T = torsion(bott)
    Jt = j_tensor(spec, T)
    N = spec.N
    G = _empty(N)
    for a in range(N):
        for b in range(N):
            cell = dict(bott.G[a][b])
            for c, v in T[a][b].items():
                _acc(cell, c, -v)
            if eps.inv != 0:
                for c, v in Jt[b][a].items():
                    _acc(cell, c, eps.inv * v)
            G[a][b] = cell
    return Connection(spec, G, f"nabla^eps (eps={eps})")


def adjoint_connection(spec, eps, bott=None):
    """hat nabla^eps_X Y = nabla_X Y + (1/eps) J_X Y."""
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    bott = bott or bott_connection(spec)
    Jt = j_tensor(spec, torsion(bott))
    N = spec.N
    G = _empty(N)
    for a in range(N):
        for b in range(N):
            cell = dict(bott.G[a][b])
            if eps.inv != 0:
                for c, v in Jt[a][b].items():
                    _acc(cell, c, eps.inv * v)
            G[a][b] = cell
    return Connection(spec, G, f"adjoint (eps={eps})")


def covariant_derivative(conn, a, form, rw=None):
    """nabla_{E_a} of a form with scalar or jet coefficients.

    Uses nabla_a theta^b = -sum_c Gamma_ac^b theta^c, i.e.
    nabla_a = E_a(coefficients) - sum_{b,c} Gamma_ac^b theta^c ^ iota_b.
    """
    rw = rw or conn.rw
    # a skipped zero derivative must not leave the product terms claiming a higher order
    top = min_order(form.coeffs.values())
    top = None if top is None else top - 1
    out = {}
    for key, f in form.coeffs.items():
        d = fd(rw, a, f)
        if _nz(d):
            out[key] = d
    result = Form._raw(form.degree, out)
    if form.degree == 0:
        return result
    for c in range(conn.spec.N):
        row = conn.G[a][c]
        for b, g in row.items():
            piece = contract(b, form)
            if not piece.coeffs:
                continue
            piece = wedge_covector(c, piece)
            if piece.coeffs:
                result = result + piece.scale(-g)
    if top is not None:
        result = result.map(lambda v: cap(v, top))
    return result


def nabla_tensor12(conn, s, tensor):
    """(nabla_s A) for A[a][b] = {e: A_ab^e}, a (1,2) tensor A(E_a,E_b)."""
    N = conn.spec.N
    rw = conn.rw
    G = conn.G
    top = min_order([v for row in tensor for cell in row for v in cell.values()]
                    + [v for row in G for cell in row for v in cell.values()])
    top = None if top is None else top - 1
    out = _empty(N)
    for a in range(N):
        for b in range(N):
            cell = {}
            for e, v in tensor[a][b].items():
                d = fd(rw, s, v)
                if _nz(d):
                    _acc(cell, e, d)
                for e2, g in G[s][e].items():
                    _acc(cell, e2, g * v)
            for d_, g in G[s][a].items():
                for e, v in tensor[d_][b].items():
                    _acc(cell, e, -(g * v))
            for d_, g in G[s][b].items():
                for e, v in tensor[a][d_].items():
                    _acc(cell, e, -(g * v))
            out[a][b] = {e: cap(v, top) for e, v in cell.items() if _nz(v)}
    return out


def metric_defect(conn, weights):
    """Components w_c Gamma_ab^c + w_b Gamma_ac^b, i.e. nabla of sum_c w_c E_c (x) E_c.

    Vanishes iff the diagonal tensor with these weights is parallel; with
    weights (1..1, 1/eps..1/eps) this is metricity for g_eps, with
    (1..1, 0..0) it is parallelism of the horizontal cometric.
    """
    N = conn.spec.N
    out = {}
    for a in range(N):
        for b in range(N):
            for c in range(b, N):
                v = weights[c] * conn.coef(a, b, c) + weights[b] * conn.coef(a, c, b)
                if _nz(v):
                    out[(a, b, c)] = v
    return out


def horizontal_divergence_torsion(spec, bott=None):
    """delta_H T as a table D[x] = {e: coefficient}: delta_H T(E_x) = -sum_j (nabla_{X_j} T)(X_j, E_x)."""
    bott = bott or bott_connection(spec)
    T = torsion(bott)
    N = spec.N
    D = [dict() for _ in range(N)]
    for j in range(spec.n):
        nT = nabla_tensor12(bott, j, T)
        for x in range(N):
            for e, v in nT[j][x].items():
                _acc(D[x], e, -v)
    return [{e: v for e, v in row.items() if _nz(v)} for row in D]


def yang_mills(spec, bott=None):
    D = horizontal_divergence_torsion(spec, bott)
    return all(not _nz(_val(v)) for row in D for v in row.values())
