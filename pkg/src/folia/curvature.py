"""Curvature of frame connections and the tensors built from it.

Curvature-like tensors are stored as ``R[a][b][c] = {e: R_abc^e}`` meaning
``R(E_a, E_b) E_c = sum_e R_abc^e E_e``.  Entries may be jets; the helpers
``values`` and ``to_array`` take the value at the point.
"""

from itertools import combinations

import numpy as np

from .connections import (
    Connection, adjoint_connection, bott_connection, epsilon_connection,
    horizontal_divergence_torsion, j_map, j_tensor, metric_defect, nabla_tensor12,
    torsion,
)
from .exterior import Form, MixedTensor, apply_C, basis_indices, bigrade
from .jets import Jet, cap, fd, min_order
from .scalars import Eps, is_zero, mpq

__all__ = [
    "CurvatureMismatch",
    "curvature",
    "adjoint_curvature",
    "curv1",
    "b_terms",
    "bianchi_residual",
    "ric_map",
    "ric_terms",
    "q_tensor",
    "horizontal_curvature_operator",
    "vertical_parallel_torsion",
    "curv2_residual",
    "ricci_canonical_variation",
    "ricci_variation_table",
    "ricci_leaf",
    "metric_connection_commutation",
    "to_array",
    "c_matrix",
    "scaling_expansion",
    "fiber_positivity",
    "ric_h_product_rule",
    "difference_decay",
    "adiabatic_q_residual",
]


class CurvatureMismatch(RuntimeError):
    """Two independent evaluations of the same tensor disagreed."""


def _nz(x):
    return not (x.is_zero() if isinstance(x, Jet) else is_zero(x))


def _val(x):
    return x.value if isinstance(x, Jet) else x


def _acc(d, key, v):
    d[key] = d[key] + v if key in d else v


def _tensor3(N):
    return [[[{} for _ in range(N)] for _ in range(N)] for _ in range(N)]


def _clean3(R):
    return [[[{e: v for e, v in cell.items() if _nz(v)} for cell in row] for row in plane] for plane in R]


def to_array(R, N, floating=False):
    """Dense array ``A[a, b, c, e]`` of values at the point."""
    A = np.zeros((N, N, N, N), dtype=float if floating else object)
    if not floating:
        A[...] = mpq(0)
    for a in range(N):
        for b in range(N):
            for c in range(N):
                for e, v in R[a][b][c].items():
                    A[a, b, c, e] = float(_val(v)) if floating else _val(v)
    return A


def _same(R1, R2, N):
    for a in range(N):
        for b in range(N):
            for c in range(N):
                keys = set(R1[a][b][c]) | set(R2[a][b][c])
                for e in keys:
                    if _nz(R1[a][b][c].get(e, 0) - R2[a][b][c].get(e, 0)):
                        return False, (a, b, c, e)
    return True, None


def curvature(conn):
    """R(E_a,E_b)E_c = nabla_a nabla_b E_c - nabla_b nabla_a E_c - nabla_[a,b] E_c."""
    spec, G, rw = conn.spec, conn.G, conn.rw
    N = spec.N
    top = min_order([v for row in G for cell in row for v in cell.values()])
    top = None if top is None else top - 1
    R = _tensor3(N)
    for a, b in combinations(range(N), 2):
        for c in range(N):
            cell = {}
            for e, v in G[b][c].items():
                d = fd(rw, a, v)
                if _nz(d):
                    _acc(cell, e, d)
                for e2, g in G[a][e].items():
                    _acc(cell, e2, v * g)
            for e, v in G[a][c].items():
                d = fd(rw, b, v)
                if _nz(d):
                    _acc(cell, e, -d)
                for e2, g in G[b][e].items():
                    _acc(cell, e2, -(v * g))
            for d_, cf in spec.brackets[a][b].items():
                for e, g in G[d_][c].items():
                    _acc(cell, e, -(cf * g))
            cell = {e: cap(v, top) for e, v in cell.items() if _nz(v)}
            R[a][b][c] = cell
            R[b][a][c] = {e: -v for e, v in cell.items()}
    return R


def curv1(conn, R=None, T=None):
    """Curvature of the adjoint ``nabla - T`` via R(Z,Y)X - R(Z,X)Y + (nabla_Z T)(X,Y)."""
    N = conn.spec.N
    R = R if R is not None else curvature(conn)
    T = T if T is not None else torsion(conn)
    nT = [nabla_tensor12(conn, z, T) for z in range(N)]
    out = _tensor3(N)
    for x in range(N):
        for y in range(N):
            for z in range(N):
                cell = {}
                for e, v in R[z][y][x].items():
                    _acc(cell, e, v)
                for e, v in R[z][x][y].items():
                    _acc(cell, e, -v)
                for e, v in nT[z][x][y].items():
                    _acc(cell, e, v)
                out[x][y][z] = cell
    return _clean3(out)


def b_terms(spec, bott=None):
    """The tensors B1, B2, B3 with hat R^eps = R + (B1 + B2)/eps + B3/eps^2."""
    bott = bott or bott_connection(spec)
    N = spec.N
    T = torsion(bott)
    Jt = j_tensor(spec, T)
    nJ = [nabla_tensor12(bott, x, Jt) for x in range(N)]
    B1, B2, B3 = _tensor3(N), _tensor3(N), _tensor3(N)
    for x in range(N):
        for y in range(N):
            for z in range(N):
                c1 = {}
                for e, v in nJ[x][y][z].items():
                    _acc(c1, e, v)
                for e, v in nJ[y][x][z].items():
                    _acc(c1, e, -v)
                B1[x][y][z] = c1
                c2 = {}
                for d, t in T[x][y].items():
                    for e, v in Jt[d][z].items():
                        _acc(c2, e, t * v)
                B2[x][y][z] = c2
                c3 = {}
                for d, v in Jt[y][z].items():
                    for e, w in Jt[x][d].items():
                        _acc(c3, e, v * w)
                for d, v in Jt[x][z].items():
                    for e, w in Jt[y][d].items():
                        _acc(c3, e, -(v * w))
                B3[x][y][z] = c3
    return _clean3(B1), _clean3(B2), _clean3(B3)


def adjoint_curvature(spec, eps, check=True):
    """Curvature of the adjoint connection hat nabla^eps.

    With ``check`` the result is recomputed from the ``(nabla^eps, T^eps)``
    pair and from the B-expansion around the Bott connection; any
    disagreement raises :class:`CurvatureMismatch`.
    """
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    bott = bott_connection(spec)
    direct = curvature(adjoint_connection(spec, eps, bott))
    if not check:
        return direct
    N = spec.N
    ok, where = _same(direct, curv1(epsilon_connection(spec, eps, bott)), N)
    if not ok:
        raise CurvatureMismatch(f"adjoint curvature disagrees with the (nabla, T) formula at {where}")
    R = curvature(bott)
    B1, B2, B3 = b_terms(spec, bott)
    inv = eps.inv
    expansion = _tensor3(N)
    for x in range(N):
        for y in range(N):
            for z in range(N):
                cell = dict(R[x][y][z])
                if inv != 0:
                    for src, w in ((B1, inv), (B2, inv), (B3, inv * inv)):
                        for e, v in src[x][y][z].items():
                            _acc(cell, e, w * v)
                expansion[x][y][z] = cell
    ok, where = _same(direct, _clean3(expansion), N)
    if not ok:
        raise CurvatureMismatch(f"adjoint curvature disagrees with the B-expansion at {where}")
    return direct


def bianchi_residual(conn, R=None, T=None):
    """Cyclic R(X,Y)Z - T(T(X,Y),Z) - (nabla_X T)(Y,Z), summed cyclically."""
    N = conn.spec.N
    R = R if R is not None else curvature(conn)
    T = T if T is not None else torsion(conn)
    nT = [nabla_tensor12(conn, x, T) for x in range(N)]
    out = {}
    for x, y, z in combinations(range(N), 3):
        cell = {}
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            for e, v in R[a][b][c].items():
                _acc(cell, e, v)
            for d, t in T[a][b].items():
                for e, v in T[d][c].items():
                    _acc(cell, e, -(t * v))
            for e, v in nT[a][b][c].items():
                _acc(cell, e, -v)
        for e, v in cell.items():
            if _nz(v):
                out[(x, y, z, e)] = v
    return out


def curv2_residual(conn, R=None, T=None):
    """Polarised hat R(X,Y)X - R(X,Y)X - (nabla_X T)(X,Y) for hat nabla = nabla - T.

    Keys (a, b, c, e) with a <= c carry the symmetrisation in the repeated slot.
    """
    N = conn.spec.N
    R = R if R is not None else curvature(conn)
    T = T if T is not None else torsion(conn)
    G = [[dict(conn.G[a][b]) for b in range(N)] for a in range(N)]
    for a in range(N):
        for b in range(N):
            for e, v in T[a][b].items():
                _acc(G[a][b], e, -v)
    Rhat = curvature(Connection(conn.spec, G, "adjoint"))
    nT = [nabla_tensor12(conn, x, T) for x in range(N)]
    out = {}
    for a in range(N):
        for c in range(a, N):
            for b in range(N):
                cell = {}
                for src, w in ((Rhat[a][b][c], 1), (Rhat[c][b][a], 1), (R[a][b][c], -1),
                               (R[c][b][a], -1), (nT[a][c][b], -1), (nT[c][a][b], -1)):
                    for e, v in src.items():
                        _acc(cell, e, w * v)
                for e, v in cell.items():
                    if _nz(v):
                        out[(a, b, c, e)] = v
    return out


def ric_map(spec, R, weight22=mpq(1, 2)):
    """(Psi_(1,1), Psi_(2,2)) pair associated with a curvature-like tensor.

    The (1,1) part sends E_b to -sum_i R(X_i, E_b) X_i; the (2,2) part is
    weight22 * sum_{a,b} theta^a ^ theta^b (x) sum_i X_i ^ R(E_a, E_b) X_i.
    Values are taken at the point.
    """
    n, N = spec.n, spec.N
    p11, p22 = [], []
    for b in range(N):
        for i in range(n):
            for e, v in R[i][b][i].items():
                p11.append((((b,), (e,)), -_val(v)))
    for a in range(N):
        for b in range(N):
            if a == b:
                continue
            for i in range(n):
                for e, v in R[a][b][i].items():
                    if e != i:
                        p22.append((((a, b), (i, e)), weight22 * _val(v)))
    return MixedTensor.from_pairs(p11), MixedTensor.from_pairs(p22)


def ric_terms(spec, eps, weight22=mpq(1, 2)):
    """Weitzenbock Ricci terms of the horizontal Laplacian for ``eps``.

    ``eps = inf`` gives the horizontal Ricci term built from the Bott curvature.
    """
    return ric_map(spec, adjoint_curvature(spec, eps), weight22)


def _covector_matrix(spec, p11):
    """Matrix M with (C_S alpha)_b = sum_a M[b, a] alpha_a for a (1,1) term."""
    N = spec.N
    M = np.zeros((N, N), dtype=object)
    M[...] = mpq(0)
    for ((b,), (e,)), w in p11.terms.items():
        M[b, e] += w
    return M


def q_tensor(spec):
    """Q on covectors as an exact matrix: (Q alpha)_a = sum_b Q[a, b] alpha_b.

    The torsion-divergence block enters as +<delta_H T(X_i), Z_l> with
    delta_H T(X) = -sum_j (nabla_{X_j} T)(X_j, X); this is the sign fixed by
    the Levi-Civita Ricci oracle and the Weitzenbock engine.
    """
    n, m = spec.n, spec.m
    ric11, _ = ric_map(spec, curvature(bott_connection(spec)))
    Q = _covector_matrix(spec, ric11)
    Q[n:, :] = mpq(0)
    Q[:, n:] = mpq(0)
    D = horizontal_divergence_torsion(spec)
    for i in range(n):
        for l in range(m):
            Q[n + l, i] += _val(D[i].get(n + l, 0))
    J = [np.array([[_val(x) for x in row] for row in Jl], dtype=object) for Jl in j_map(spec)]
    for l in range(m):
        for k in range(m):
            Q[n + l, n + k] -= mpq(1, 4) * np.trace(J[l].dot(J[k]))
    return Q


def sym_min_eig(M):
    A = np.array(M, dtype=float)
    return float(np.linalg.eigvalsh((A + A.T) / 2).min()) if A.size else 0.0


def horizontal_curvature_operator(spec, R=None):
    """Matrix of R_H over theta^i ^ theta^j (i < j): entries <R(X_i,X_j)X_s, X_r>."""
    n = spec.n
    R = R if R is not None else curvature(bott_connection(spec))
    pairs = list(combinations(range(n), 2))
    M = np.zeros((len(pairs), len(pairs)), dtype=object)
    for p, (i, j) in enumerate(pairs):
        for q, (r, s) in enumerate(pairs):
            M[p, q] = mpq(_val(R[i][j][s].get(r, 0)))
    return M, pairs


def vertical_parallel_torsion(spec):
    """(flag, nonzero components of nabla_Z T, equivalence residual).

    The equivalence compares <(nabla_Z T)(X,Y), W> with <R(X,Y)Z, W> for
    horizontal X, Y and vertical Z, W.
    """
    n, N = spec.n, spec.N
    bott = bott_connection(spec)
    T = torsion(bott)
    R = curvature(bott)
    comps, residual = {}, {}
    for z in range(n, N):
        nT = nabla_tensor12(bott, z, T)
        for x in range(N):
            for y in range(N):
                for e, v in nT[x][y].items():
                    if _nz(_val(v)):
                        comps[(z, x, y, e)] = _val(v)
        for x in range(n):
            for y in range(n):
                for w in range(n, N):
                    r = _val(nT[x][y].get(w, 0)) - _val(R[x][y][z].get(w, 0))
                    if r != 0:
                        residual[(z, x, y, w)] = r
    return not comps, comps, residual


def _koszul_constant(N, c, G):
    """Levi-Civita coefficients for constant structure c and diagonal metric G."""
    Gam = np.zeros((N, N, N), dtype=object)
    Gam[...] = mpq(0)
    for a in range(N):
        for b in range(N):
            for e in range(N):
                v = c[a][b].get(e, 0) * G[e] - c[b][e].get(a, 0) * G[a] + c[e][a].get(b, 0) * G[b]
                Gam[a, b, e] = mpq(v) / (2 * G[e])
    return Gam


def _ricci_constant(N, c, Gam):
    Ric = np.zeros((N, N), dtype=object)
    Ric[...] = mpq(0)
    for y in range(N):
        for z in range(N):
            total = mpq(0)
            for a in range(N):
                # R(E_a, E_y) E_z, component a
                v = mpq(0)
                for d in range(N):
                    v += Gam[y, z, d] * Gam[a, d, a] - Gam[a, z, d] * Gam[y, d, a]
                    v -= c[a][y].get(d, 0) * Gam[d, z, a]
                total += v
            Ric[y, z] = total
    return Ric


def _constant_brackets(spec):
    if not spec.is_constant():
        raise ValueError("the Levi-Civita oracle needs constant structure functions")
    return [[{e: _val(v) for e, v in cell.items()} for cell in row] for row in spec.brackets]


def ricci_canonical_variation(spec, eps):
    """Ricci tensor of g_eps in the g-orthonormal frame (exact, constant structure only)."""
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    if not eps.finite:
        raise ValueError("g_eps is degenerate at eps = inf")
    c = _constant_brackets(spec)
    N, n = spec.N, spec.n
    G = [mpq(1)] * n + [1 / mpq(eps.value)] * spec.m
    return _ricci_constant(N, c, _koszul_constant(N, c, G))


def ricci_leaf(spec):
    """Ricci tensor of the leaves (vertical frame, induced metric)."""
    c = _constant_brackets(spec)
    n, m = spec.n, spec.m
    cv = [[{e - n: v for e, v in c[n + l][n + k].items() if e >= n} for k in range(m)] for l in range(m)]
    return _ricci_constant(m, cv, _koszul_constant(m, cv, [mpq(1)] * m))


def ricci_variation_table(spec, eps):
    """Block formula for Ric_{g_eps} built from Bott data, J and delta_H T."""
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    n, m, N = spec.n, spec.m, spec.N
    inv = eps.inv
    out = np.zeros((N, N), dtype=object)
    out[...] = mpq(0)
    ric11, _ = ric_map(spec, curvature(bott_connection(spec)))
    RH = _covector_matrix(spec, ric11)
    J = [np.array([[_val(x) for x in row] for row in Jl], dtype=object).T for Jl in j_map(spec)]
    # J[l] as a matrix acting on coordinate vectors: (J_l v)_j = sum_i <J_l X_i, X_j> v_i
    J2 = sum((Jl.dot(Jl) for Jl in J), np.zeros((n, n), dtype=object)) if m else np.zeros((n, n), dtype=object)
    D = horizontal_divergence_torsion(spec)
    RV = ricci_leaf(spec) if m else np.zeros((0, 0), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = RH[j, i] + inv / 2 * J2[i, j]
    for i in range(n):
        for l in range(m):
            v = inv / 2 * _val(D[i].get(n + l, 0))
            out[i, n + l] = v
            out[n + l, i] = v
    for l in range(m):
        for k in range(m):
            out[n + l, n + k] = RV[l, k] - inv * inv / 4 * np.trace(J[l].dot(J[k]))
    return out


def metric_connection_commutation(conn, variant="general"):
    """Residuals of the curvature pair-swap identity for a metric connection.

    ``variant`` is "general" (full A-map identity), "skew" (torsion assumed
    totally skew) or "bott" (T(T(X,Y),Z) = 0 assumed).
    Returns {(x, y, z, w): residual} over all frame 4-tuples.
    """
    spec = conn.spec
    N = spec.N
    if metric_defect(conn, [1] * N):
        raise ValueError("connection is not metric")
    T = torsion(conn)
    R = curvature(conn)
    # J over all of TM: <J_Z X, Y> = <Z, T(X, Y)>
    Jt = [[{} for _ in range(N)] for _ in range(N)]
    for x in range(N):
        for y in range(N):
            for z, v in T[x][y].items():
                _acc(Jt[z][x], y, v)
    if variant == "skew":
        A = [[dict(T[x][y]) for y in range(N)] for x in range(N)]
    else:
        A = [[{} for _ in range(N)] for _ in range(N)]
        for x in range(N):
            for y in range(N):
                cell = {}
                for e, v in T[x][y].items():
                    _acc(cell, e, v)
                for e, v in Jt[x][y].items():
                    _acc(cell, e, -v)
                for e, v in Jt[y][x].items():
                    _acc(cell, e, -v)
                A[x][y] = {e: v for e, v in cell.items() if _nz(v)}
    nA = [nabla_tensor12(conn, x, A) for x in range(N)]

    def ip(u, v):
        return sum((u[k] * v[k] for k in u if k in v), 0)

    def A_of(vec, z):
        out = {}
        for d, t in vec.items():
            for e, v in A[d][z].items():
                _acc(out, e, t * v)
        return out

    half, quarter = mpq(1, 2), mpq(1, 4)
    res = {}
    for x in range(N):
        for y in range(N):
            for z in range(N):
                for w in range(N):
                    lhs = R[x][y][z].get(w, 0) - R[z][w][x].get(y, 0)
                    rhs = half * (nA[x][y][z].get(w, 0) - nA[y][x][z].get(w, 0)
                                  - nA[z][w][x].get(y, 0) + nA[w][z][x].get(y, 0))
                    if variant == "general":
                        rhs = rhs + half * (A_of(T[x][y], z).get(w, 0) - A_of(T[z][w], x).get(y, 0))
                        rhs = rhs + quarter * (ip(A[y][z], A[x][w]) - ip(A[z][y], A[w][x])
                                               - ip(A[x][z], A[y][w]) + ip(A[z][x], A[w][y]))
                    r = _val(lhs - rhs) if isinstance(lhs - rhs, Jet) else lhs - rhs
                    if r != 0:
                        res[(x, y, z, w)] = r
    return res


# --------------------------------------------------------------------------
# zero-order operators on the fibre of forms


def c_matrix(spec, nu, degree):
    """Exact matrix of C_nu on k-forms in the basis theta^I, I increasing.

    ``nu`` is a MixedTensor or a pair of them (summed).  Column I holds the
    components of C_nu theta^I.
    """
    if isinstance(nu, tuple):
        nu = nu[0] + nu[1]
    basis = basis_indices(spec.N, degree)
    pos = {I: p for p, I in enumerate(basis)}
    M = np.empty((len(basis), len(basis)), dtype=object)
    M[...] = mpq(0)
    for col, I in enumerate(basis):
        img = apply_C(nu, Form.basis(I))
        if img.degree != degree and img.coeffs:
            raise ValueError("operator does not preserve the degree")
        for J, v in img.coeffs.items():
            M[pos[J], col] += _val(v)
    return M, basis


def _grades_hit(M, basis, n):
    """{source bigrade: set of target bigrades} for the nonzero entries of M."""
    out = {}
    for col, I in enumerate(basis):
        for row, J in enumerate(basis):
            if not is_zero(M[row, col]):
                out.setdefault(bigrade(I, n), set()).add(bigrade(J, n))
    return out


def scaling_expansion(spec, bott=None):
    """B1, B2, B3 and their (1,1) traces as zero-order operator data.

    Returns a dict with, for each j in 1..3, the Ric-map pair
    ``(check B_j, B_j)`` and a grading report: C_{B1} lowers the horizontal
    degree by one or two, C_{B2} preserves the bigrade and C_{B3} lowers it
    by two.  ``check B_3`` is asserted to vanish.
    """
    n, N = spec.n, spec.N
    B = b_terms(spec, bott)
    out = {"pairs": {}, "grading": {}, "ok": True}
    allowed = {1: {(-1, 1), (-2, 2)}, 2: {(0, 0)}, 3: {(-2, 2)}}
    for j, Bj in enumerate(B, start=1):
        pair = ric_map(spec, Bj)
        out["pairs"][j] = pair
        bad = []
        for k in range(N + 1):
            M, basis = c_matrix(spec, pair, k)
            for src, targets in _grades_hit(M, basis, n).items():
                for tgt in targets:
                    if (tgt[0] - src[0], tgt[1] - src[1]) not in allowed[j]:
                        bad.append((k, src, tgt))
        out["grading"][j] = bad
        out["ok"] = out["ok"] and not bad
    if not out["pairs"][3][0].is_zero():
        out["ok"] = False
        out["check_b3_nonzero"] = True
    return out


def _sym(M):
    A = np.array(M, dtype=float)
    return (A + A.T) / 2


def fiber_positivity(spec, degrees=None):
    """Minimum of <C_{Ric_H} a, a> / |a|^2 on each fibre with 0 < i < n.

    The quotient does not depend on eps inside a fixed bigrade, because both
    sides carry the same factor eps^j; the reference metric is used.
    Returns ``{(i, j): c1}``.
    """
    n, N = spec.n, spec.N
    pair = ric_map(spec, curvature(bott_connection(spec)))
    out = {}
    for k in degrees if degrees is not None else range(N + 1):
        M, basis = c_matrix(spec, pair, k)
        A = _sym(M)
        groups = {}
        for p, I in enumerate(basis):
            groups.setdefault(bigrade(I, n), []).append(p)
        for (i, j), idx in sorted(groups.items()):
            if 0 < i < n:
                out[(i, j)] = float(np.linalg.eigvalsh(A[np.ix_(idx, idx)]).min())
    return out


def ric_h_product_rule(spec):
    """Residual count of C_{Ric_H}(a ^ b) = (C_{Ric_H} a) ^ b on basis forms.

    a runs over horizontal basis forms and b over vertical ones.
    """
    from .exterior import wedge

    n, N = spec.n, spec.N
    pair = ric_map(spec, curvature(bott_connection(spec)))
    nu = pair[0] + pair[1]
    bad = 0
    for i in range(n + 1):
        for j in range(spec.m + 1):
            for I in combinations(range(n), i):
                a = Form.basis(I)
                Ca = apply_C(nu, a)
                for Jv in combinations(range(n, N), j):
                    b = Form.basis(Jv)
                    lhs = apply_C(nu, wedge(a, b))
                    rhs = wedge(Ca, b)
                    diff = lhs - rhs
                    if any(_nz(_val(v)) for v in diff.coeffs.values()):
                        bad += 1
    return bad


def _eps_weights(basis, n, value):
    return np.array([float(value) ** bigrade(I, n)[1] for I in basis])


def _eps_radius(M, basis, n, value):
    """sup |<M a, a>_eps| / |a|_eps^2 for the eps-weighted inner product."""
    w = np.sqrt(_eps_weights(basis, n, value))
    A = np.array(M, dtype=float)
    B = (w[:, None] * A) / w[None, :]
    S = (B + B.T) / 2
    return float(np.abs(np.linalg.eigvalsh(S)).max()) if S.size else 0.0


def _op_norm(M):
    A = np.array(M, dtype=float)
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


def difference_decay(spec, eps_values=(10, 100, 1000), degrees=None):
    """Size of C_{Ric^eps} - C_{Ric_H} on each degree against the 1/sqrt(eps) law.

    For every degree k the measured quantity is
    ``r(eps) = sup |<(C_{Ric^eps} - C_{Ric_H}) a, a>_eps| / |a|_eps^2``.
    The operator norms M_j of C_{B_j + check B_j} in the reference metric give
    the bound ``b(eps) = M1 / sqrt(eps) + (M2 + M3) / eps``, valid when
    nabla_Z T = 0 (then the eps B1 piece of the lowest block drops out).
    """
    n, N = spec.n, spec.N
    exp = scaling_expansion(spec)
    ric_h = ric_map(spec, adjoint_curvature(spec, Eps("inf")))
    flag = vertical_parallel_torsion(spec)[0]
    rows = []
    for k in degrees if degrees is not None else range(N + 1):
        Mj = {}
        for j in (1, 2, 3):
            Mj[j] = _op_norm(c_matrix(spec, exp["pairs"][j], k)[0])
        H, basis = c_matrix(spec, ric_h, k)
        for e in eps_values:
            eps = Eps(e)
            full, _ = c_matrix(spec, ric_map(spec, adjoint_curvature(spec, eps)), k)
            r = _eps_radius(full - H, basis, n, eps.value)
            ev = float(eps.value)
            bound = Mj[1] / ev ** 0.5 + (Mj[2] + Mj[3]) / ev
            rows.append({"degree": k, "eps": str(eps), "measured": r, "bound": bound,
                         "scaled": r * ev ** 0.5, "M1": Mj[1], "M2": Mj[2], "M3": Mj[3]})
    return {"rows": rows, "vertical_parallel_torsion": flag}


def adiabatic_q_residual(spec, eps, samples=8, seed=0):
    """Largest |Ric_{g_eps}(v + eps w, v + eps w) - rhs| over random rational v, w.

    rhs = (1/2eps)<J^2 v, v> + <Q(v + w), v + w> + eps^2 Ric_V(w, w), with
    Ric_{g_eps} from the Levi-Civita oracle and Q from :func:`q_tensor`.
    """
    eps = eps if isinstance(eps, Eps) else Eps(eps)
    n, m = spec.n, spec.m
    ric = ricci_canonical_variation(spec, eps)
    Q = q_tensor(spec)
    RV = ricci_leaf(spec) if m else np.zeros((0, 0), dtype=object)
    J = [np.array([[_val(x) for x in row] for row in Jl], dtype=object).T for Jl in j_map(spec)]
    J2 = sum((Jl.dot(Jl) for Jl in J), np.zeros((n, n), dtype=object))
    rng = np.random.default_rng(seed)
    worst = mpq(0)
    for _ in range(samples):
        v = np.array([mpq(int(x)) for x in rng.integers(-5, 6, n)], dtype=object)
        w = np.array([mpq(int(x)) for x in rng.integers(-5, 6, m)], dtype=object)
        x = np.concatenate([v, eps.value * w])
        lhs = x.dot(ric.dot(x))
        a = np.concatenate([v, w])
        rhs = eps.inv / 2 * v.dot(J2.dot(v)) + a.dot(Q.dot(a))
        if m:
            rhs += eps.value ** 2 * w.dot(RV.dot(w))
        worst = max(worst, abs(lhs - rhs))
    return worst
