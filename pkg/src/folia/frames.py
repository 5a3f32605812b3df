"""Adapted orthonormal frames of a foliation and their validity checks.

A frame is ``X_1..X_n`` (horizontal) followed by ``Z_1..Z_m`` (vertical),
orthonormal for the reference metric.  Its geometry is the bracket table::

    [X_i, X_j] = omega_ij^k X_k + gamma_ij^l Z_l
    [X_i, Z_l] = beta_il^j Z_j - kappa_li^k X_k
    [Z_l, Z_k] = rho_lk^p Z_p + zeta_lk^i X_i

``kappa`` (the horizontal part of ``[Z_l, X_i]``), ``rho`` and ``zeta`` are
optional and default to zero.  A skew ``kappa`` is compatible with a totally
geodesic bundle-like foliation (it appears for left-invariant frames on
SU(2)); ``zeta`` must vanish for the vertical distribution to be integrable.
Entries are exact rationals or :class:`~folia.jets.Jet` values.
"""

from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
import json

import numpy as np

from .jets import Jet, JetOrderError, Rewriter
from .scalars import exact, is_zero, mpq

__all__ = [
    "FrameSpec",
    "ValidityReport",
    "validate",
    "builtin_model",
    "BUILTIN_MODELS",
    "load_frame",
    "frame_from_dict",
    "frame_to_dict",
    "jacobi_residuals",
    "FrameError",
]


class FrameError(ValueError):
    """Malformed frame input."""


def _zeros(*shape):
    if len(shape) == 1:
        return [mpq(0) for _ in range(shape[0])]
    return [_zeros(*shape[1:]) for _ in range(shape[0])]


def _is_zero(x):
    return x.is_zero() if isinstance(x, Jet) else is_zero(x)


def _value(x):
    return x.value if isinstance(x, Jet) else x


def _const(x):
    return not isinstance(x, Jet) or all(len(w) == 0 for w in x.comps)


@dataclass
class FrameSpec:
    n: int
    m: int
    omega: list
    gamma: list
    beta: list
    kappa: list = None
    rho: list = None
    zeta: list = None
    homogeneous: bool = True
    compact_claim: bool = False
    uniform: bool = False
    name: str = "custom"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n, m = self.n, self.m
        if n < 1 or m < 0:
            raise FrameError("need n >= 1 and m >= 0")
        if self.kappa is None:
            self.kappa = _zeros(m, n, n)
        if self.rho is None:
            self.rho = _zeros(m, m, m)
        if self.zeta is None:
            self.zeta = _zeros(m, m, n)
        for label, arr, shape in (
            ("omega", self.omega, (n, n, n)),
            ("gamma", self.gamma, (n, n, m)),
            ("beta", self.beta, (n, m, m)),
            ("kappa", self.kappa, (m, n, n)),
            ("rho", self.rho, (m, m, m)),
            ("zeta", self.zeta, (m, m, n)),
        ):
            _check_shape(label, arr, shape)
        self._brackets = None

    @property
    def N(self):
        return self.n + self.m

    def symbol(self, a):
        return f"X{a + 1}" if a < self.n else f"Z{a - self.n + 1}"

    def symbols(self):
        return [self.symbol(a) for a in range(self.N)]

    def parse_symbol(self, text):
        text = text.strip()
        kind, idx = text[0].upper(), int(text[1:]) - 1
        if kind == "X" and 0 <= idx < self.n:
            return idx
        if kind == "Z" and 0 <= idx < self.m:
            return self.n + idx
        raise FrameError(f"unknown frame symbol {text!r}")

    @property
    def brackets(self):
        """``c[a][b] = {c: coef}`` with ``[E_a, E_b] = sum coef E_c``."""
        if self._brackets is None:
            self._brackets = self._build_brackets()
        return self._brackets

    def _build_brackets(self):
        n, m, N = self.n, self.m, self.N
        c = [[{} for _ in range(N)] for _ in range(N)]

        def put(a, b, e, v):
            if not _is_zero(v):
                c[a][b][e] = c[a][b].get(e, 0) + v

        for i in range(n):
            for j in range(n):
                for k in range(n):
                    put(i, j, k, self.omega[i][j][k])
                for l in range(m):
                    put(i, j, n + l, self.gamma[i][j][l])
            for l in range(m):
                for j in range(m):
                    put(i, n + l, n + j, self.beta[i][l][j])
                    put(n + l, i, n + j, -self.beta[i][l][j])
                for k in range(n):
                    put(n + l, i, k, self.kappa[l][i][k])
                    put(i, n + l, k, -self.kappa[l][i][k])
        for l in range(m):
            for k in range(m):
                for p in range(m):
                    put(n + l, n + k, n + p, self.rho[l][k][p])
                for i in range(n):
                    put(n + l, n + k, i, self.zeta[l][k][i])
        return c

    def coef(self, a, b, e):
        return self.brackets[a][b].get(e, 0)

    def rewriter(self, constrained=True):
        return Rewriter(self.N, self.brackets, constrained=constrained)

    def is_constant(self):
        return all(_const(v) for row in self.brackets for cell in row for v in cell.values())

    def structure_order(self):
        """Smallest jet order among structure functions (None if all constant)."""
        orders = [
            v.order for row in self.brackets for cell in row for v in cell.values()
            if isinstance(v, Jet) and not _const(v)
        ]
        return min(orders) if orders else None

    def at_point(self):
        """Copy with every structure function replaced by its value at the point."""
        def strip(arr):
            if isinstance(arr, list):
                return [strip(x) for x in arr]
            return _value(arr)
        return FrameSpec(
            self.n, self.m, strip(self.omega), strip(self.gamma), strip(self.beta),
            strip(self.kappa), strip(self.rho), strip(self.zeta),
            homogeneous=self.homogeneous, compact_claim=self.compact_claim,
            uniform=self.uniform, name=self.name, metadata=dict(self.metadata),
        )

    def J_matrices(self):
        """Values at the point of J_{Z_l} on H, as float arrays (n x n).

        ``<J_Z X_i, X_j> = <Z, T(X_i, X_j)>`` with the Bott torsion
        ``T(X_i, X_j) = -gamma_ij``.
        """
        out = []
        for l in range(self.m):
            mat = np.zeros((self.n, self.n))
            for i in range(self.n):
                for j in range(self.n):
                    mat[j, i] = -float(_value(self.gamma[i][j][l]))
            out.append(mat)
        return out


def _check_shape(label, arr, shape):
    def walk(x, dims, path):
        if not dims:
            if isinstance(x, (list, tuple)):
                raise FrameError(f"{label}{path}: expected a scalar")
            return
        if not isinstance(x, (list, tuple)) or len(x) != dims[0]:
            raise FrameError(f"{label}{path}: expected length {dims[0]}")
        for i, y in enumerate(x):
            walk(y, dims[1:], path + f"[{i}]")
    walk(arr, shape, "")


# --------------------------------------------------------------------------
# validity

@dataclass
class ValidityReport:
    checks: dict
    flags: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(c["pass"] for c in self.checks.values())

    @property
    def failures(self):
        return [k for k, c in self.checks.items() if not c["pass"]]

    def to_dict(self):
        return {"ok": self.ok, "checks": self.checks, "flags": self.flags}


def _diff_zero(x, y):
    d = x - y
    return _is_zero(d)


def _sum_zero(x, y):
    return _is_zero(x + y)


def jacobi_residuals(spec):
    """Cyclic Jacobi residuals ``[[E_a,E_b],E_c] + cyclic`` as {(a,b,c,e): value}.

    For jet-valued structure the derivative terms are included, so the
    residual is a jet truncated one order below the structure functions.
    """
    c = spec.brackets
    N = spec.N
    rw = spec.rewriter()
    out = {}

    def deriv(s, x):
        if isinstance(x, Jet):
            if x.order < 1:
                raise JetOrderError("structure jets too short for a Jacobi check")
            return rw.derivative(s, x)
        return 0

    for a, b, e3 in combinations(range(N), 3):
        acc = {}
        for x, y, z in ((a, b, e3), (b, e3, a), (e3, a, b)):
            # [[E_x,E_y],E_z] = sum_d c_xy^d [E_d,E_z] - (E_z c_xy^d) E_d
            for d, cf in c[x][y].items():
                for e, cf2 in c[d][z].items():
                    acc[e] = acc.get(e, 0) + cf * cf2
                acc[d] = acc.get(d, 0) - deriv(z, cf)
        for e, v in acc.items():
            if not _is_zero(v):
                out[(a, b, e3, e)] = v
    return out


def validate(spec):
    """Check the conditions making ``spec`` an adapted frame of a totally
    geodesic Riemannian foliation with bracket-generating horizontal part."""
    n, m = spec.n, spec.m
    checks = {}

    bad = []
    for name, arr, d1, d3 in (("omega", spec.omega, n, n), ("gamma", spec.gamma, n, m),
                              ("rho", spec.rho, m, m), ("zeta", spec.zeta, m, n)):
        for i in range(d1):
            for j in range(d1):
                for k in range(d3):
                    if not _sum_zero(arr[i][j][k], arr[j][i][k]):
                        bad.append(f"{name}[{i}][{j}][{k}]")
    checks["antisymmetry"] = {"pass": not bad, "detail": ", ".join(bad[:6]) or "ok"}

    # (L_Z g)(X, X') = -<[Z,X],X'> - <[Z,X'],X> must vanish: kappa skew
    bad = [
        f"Z{l+1}: X{i+1},X{j+1}"
        for l in range(m) for i in range(n) for j in range(i, n)
        if not _sum_zero(spec.kappa[l][i][j], spec.kappa[l][j][i])
    ]
    checks["bundle_like"] = {"pass": not bad, "detail": "; ".join(bad[:6]) or "ok"}

    # (L_X g)(Z, Z') = -<[X,Z],Z'> - <[X,Z'],Z> must vanish: beta skew
    bad = [
        f"X{i+1}: Z{l+1},Z{k+1}"
        for i in range(n) for l in range(m) for k in range(l, m)
        if not _sum_zero(spec.beta[i][l][k], spec.beta[i][k][l])
    ]
    checks["totally_geodesic"] = {"pass": not bad, "detail": "; ".join(bad[:6]) or "ok"}

    bad = [
        f"[Z{l+1},Z{k+1}]"
        for l in range(m) for k in range(m) for i in range(n)
        if not _is_zero(spec.zeta[l][k][i])
    ]
    checks["vertical_integrability"] = {"pass": not bad, "detail": "; ".join(sorted(set(bad))) or "ok"}

    rows = [[float(_value(spec.gamma[i][j][l])) for l in range(m)]
            for i, j in combinations(range(n), 2)]
    rank = int(np.linalg.matrix_rank(np.array(rows))) if rows and m else 0
    checks["bracket_generating"] = {"pass": rank == m, "detail": f"rank {rank} of {m}"}

    try:
        res = jacobi_residuals(spec)
        detail = "ok" if not res else f"{len(res)} nonzero residuals"
        checks["jacobi"] = {"pass": not res, "detail": detail}
    except JetOrderError as exc:
        checks["jacobi"] = {"pass": False, "detail": str(exc)}

    if spec.homogeneous:
        ok = spec.is_constant()
        checks["homogeneous_constant"] = {
            "pass": ok, "detail": "ok" if ok else "homogeneous model with non-constant structure"}

    flags = {"constant_structure": spec.is_constant()}
    if m == 1:
        J = spec.J_matrices()[0]
        sq = J @ J
        c2 = -sq[0, 0]
        flags["k_contact_c2"] = float(c2) if np.allclose(sq, -c2 * np.eye(n)) and c2 > 0 else None
    return ValidityReport(checks, flags)


# --------------------------------------------------------------------------
# builtin models

def _heisenberg(k):
    n = 2 * k
    om, ga, be = _zeros(n, n, n), _zeros(n, n, 1), _zeros(n, 1, 1)
    for p in range(k):
        ga[2 * p][2 * p + 1][0] = mpq(1)
        ga[2 * p + 1][2 * p][0] = mpq(-1)
    return om, ga, be


def _hopf_s3():
    om, ga, be = _zeros(2, 2, 2), _zeros(2, 2, 1), _zeros(2, 1, 1)
    ga[0][1][0], ga[1][0][0] = mpq(2), mpq(-2)
    ka = _zeros(1, 2, 2)
    ka[0][0][1], ka[0][1][0] = mpq(2), mpq(-2)  # [Z,X1] = 2X2, [Z,X2] = -2X1
    return om, ga, be, ka


def builtin_model(name):
    """Return one of the bundled model frames."""
    if name in ("heisenberg3", "heisenberg5"):
        om, ga, be = _heisenberg(1 if name == "heisenberg3" else 2)
        return FrameSpec(len(om), 1, om, ga, be, homogeneous=True, compact_claim=False,
                         name=name, metadata={"note": "Heisenberg group; compact quotients are nilmanifolds"})
    if name in ("heisenberg3_nilmanifold", "heisenberg5_nilmanifold"):
        spec = builtin_model(name.split("_")[0])
        spec.name = name
        spec.compact_claim = True
        spec.metadata = {"note": "compact quotient by the integer Heisenberg lattice",
                         "betti": [1, 2, 2, 1] if name.startswith("heisenberg3") else [1, 4, 9, 9, 4, 1]}
        return spec
    if name in ("hopf_s3", "berger_s3"):
        om, ga, be, ka = _hopf_s3()
        return FrameSpec(2, 1, om, ga, be, kappa=ka, homogeneous=True, compact_claim=True,
                         name=name, metadata={"note": "SU(2) frame, fibres of the Hopf map S3 -> S2(1/2)",
                                              "J2": "-4 Id_H"})
    if name == "hopf_s5":
        text = resources.files("folia").joinpath("data/hopf_s5.json").read_text()
        spec = frame_from_dict(json.loads(text))
        spec.name = name
        return spec
    raise FrameError(f"unknown model {name!r}; choose from {', '.join(BUILTIN_MODELS)}")


BUILTIN_MODELS = ("heisenberg3", "heisenberg5", "hopf_s3", "berger_s3", "hopf_s5",
                  "heisenberg3_nilmanifold", "heisenberg5_nilmanifold")


# --------------------------------------------------------------------------
# JSON

def _parse_scalar(x):
    if isinstance(x, bool) or x is None:
        raise FrameError(f"not a number: {x!r}")
    if isinstance(x, (int, float, str)):
        try:
            return exact(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise FrameError(f"bad number {x!r}") from exc
    raise FrameError(f"not a number: {x!r}")


def _parse_entry(x, spec_like):
    if isinstance(x, dict):
        if "comps" not in x or "order" not in x:
            raise FrameError("jet entries need 'order' and 'comps'")
        comps = {}
        for word, v in x["comps"].items():
            w = tuple(spec_like.parse_symbol(s) for s in word.split()) if word.strip() else ()
            comps[w] = _parse_scalar(v)
        try:
            return Jet(int(x["order"]), comps)
        except ValueError as exc:
            raise FrameError(str(exc)) from exc
    return _parse_scalar(x)


def _parse_array(arr, spec_like):
    if isinstance(arr, list):
        return [_parse_array(x, spec_like) for x in arr]
    return _parse_entry(arr, spec_like)


class _Symbols:
    def __init__(self, n, m):
        self.n, self.m = n, m

    parse_symbol = FrameSpec.parse_symbol


def frame_from_dict(doc):
    if not isinstance(doc, dict):
        raise FrameError("frame document must be a JSON object")
    try:
        n, m = int(doc["n"]), int(doc["m"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FrameError("frame document needs integer fields n and m") from exc
    sym = _Symbols(n, m)
    arrays = {}
    for key in ("omega", "gamma", "beta", "kappa", "rho", "zeta"):
        if key in doc:
            arrays[key] = _parse_array(doc[key], sym)
        elif key in ("omega", "gamma", "beta"):
            raise FrameError(f"frame document is missing {key!r}")
    return FrameSpec(
        n, m, arrays["omega"], arrays["gamma"], arrays["beta"],
        arrays.get("kappa"), arrays.get("rho"), arrays.get("zeta"),
        homogeneous=bool(doc.get("homogeneous", True)),
        compact_claim=bool(doc.get("compact", False)),
        uniform=bool(doc.get("uniform", False)),
        name=str(doc.get("name", "custom")),
        metadata=dict(doc.get("metadata", {})),
    )


def load_frame(path_or_name):
    """Load a builtin model by name or a frame JSON file by path."""
    if path_or_name in BUILTIN_MODELS:
        return builtin_model(path_or_name)
    try:
        with open(path_or_name) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise FrameError(f"cannot read {path_or_name}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FrameError(f"{path_or_name} is not valid JSON: {exc}") from exc
    return frame_from_dict(doc)


def _dump_scalar(x):
    x = mpq(x)
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _dump_entry(x, spec):
    if isinstance(x, Jet):
        return {
            "order": x.order,
            "comps": {" ".join(spec.symbol(a) for a in w): _dump_scalar(v) for w, v in x.comps.items()},
        }
    return _dump_scalar(x)


def _dump_array(arr, spec):
    if isinstance(arr, list):
        return [_dump_array(x, spec) for x in arr]
    return _dump_entry(arr, spec)


def frame_to_dict(spec):
    doc = {"name": spec.name, "n": spec.n, "m": spec.m,
           "homogeneous": spec.homogeneous, "compact": spec.compact_claim,
           "uniform": spec.uniform}
    for key in ("omega", "gamma", "beta", "kappa", "rho", "zeta"):
        doc[key] = _dump_array(getattr(spec, key), spec)
    if spec.metadata:
        doc["metadata"] = spec.metadata
    return doc
