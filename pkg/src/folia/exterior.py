"""Exterior algebra over an orthonormal adapted frame.

Frame indices run over ``0..N-1`` with the ``n`` horizontal vectors first and
the ``m`` vertical vectors after them.  A multi-index is a strictly increasing
tuple of frame indices; ``theta^I`` denotes the corresponding wedge of
coframe elements.  Coefficients are duck-typed (mpq, float, jets, arrays).
"""

from itertools import combinations

import numpy as np

from .scalars import is_zero

__all__ = [
    "Form",
    "MultiVector",
    "MixedTensor",
    "wedge",
    "contract",
    "apply_C",
    "inner_g",
    "inner_eps",
    "bigrade",
    "bigrade_split",
    "star_involution",
    "basis_indices",
    "wedge_sign",
]


def _nonzero(x):
    if hasattr(x, "is_zero"):
        return not x.is_zero()
    return not is_zero(x)


def bigrade(index, n):
    """(horizontal count, vertical count) of a multi-index."""
    h = sum(1 for a in index if a < n)
    return h, len(index) - h


def basis_indices(nsym, k):
    return list(combinations(range(nsym), k))


def wedge_sign(left, right):
    """Sign and merged index of theta^left ^ theta^right, or (0, None)."""
    if set(left) & set(right):
        return 0, None
    inversions = sum(1 for a in left for b in right if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(left + right))


class Form:
    """A k-form as a sparse map from multi-index to coefficient."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree, coeffs=None):
        self.degree = degree
        self.coeffs = {}
        for key, v in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree:
                raise ValueError(f"index {key} does not have degree {degree}")
            if list(key) != sorted(set(key)):
                raise ValueError(f"index {key} must be strictly increasing")
            if _nonzero(v):
                self.coeffs[key] = v

    @classmethod
    def basis(cls, index, coeff=1):
        return cls(len(index), {tuple(index): coeff})

    @classmethod
    def _raw(cls, degree, coeffs):
        obj = cls.__new__(cls)
        obj.degree = degree
        obj.coeffs = {k: v for k, v in coeffs.items() if _nonzero(v)}
        return obj

    def __add__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if not other.coeffs:
            return self
        if not self.coeffs:
            return other
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return type(self)._raw(self.degree, out)

    def __neg__(self):
        return type(self)._raw(self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Multiply every coefficient by ``c`` (scalar or jet) on the left."""
        if not isinstance(c, np.ndarray) and not hasattr(c, "comps") and c == 0:
            return type(self)._raw(self.degree, {})
        return type(self)._raw(self.degree, {k: c * v for k, v in self.coeffs.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def map(self, fn):
        return type(self)._raw(self.degree, {k: fn(v) for k, v in self.coeffs.items()})

    def is_zero(self):
        return not any(_nonzero(v) for v in self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self - other).is_zero() if (self.coeffs or other.coeffs) else True

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}({self.degree}, {self.coeffs!r})"


class MultiVector(Form):
    """Multivector in the frame; same storage as Form, E_I instead of theta^I."""


def wedge(a, b):
    out = {}
    for i, x in a.coeffs.items():
        for j, y in b.coeffs.items():
            s, key = wedge_sign(i, j)
            if s == 0:
                continue
            term = x * y if s > 0 else -(x * y)
            out[key] = out[key] + term if key in out else term
    return Form._raw(a.degree + b.degree, out)


def wedge_covector(c, a):
    """theta^c ^ a for a single coframe index c."""
    out = {}
    for i, x in a.coeffs.items():
        if c in i:
            continue
        pos = sum(1 for t in i if t < c)
        key = i[:pos] + (c,) + i[pos:]
        term = -x if pos % 2 else x
        out[key] = out[key] + term if key in out else term
    return Form._raw(a.degree + 1, out)


def contract(b, a):
    """Interior product of frame vector E_b into the form a."""
    if a.degree == 0:
        return Form._raw(0, {})
    out = {}
    for i, x in a.coeffs.items():
        if b not in i:
            continue
        pos = i.index(b)
        key = i[:pos] + i[pos + 1:]
        term = -x if pos % 2 else x
        out[key] = out[key] + term if key in out else term
    return Form._raw(a.degree - 1, out)


class MixedTensor:
    """Element of Psi = forms tensor multivectors, stored term by term.

    ``terms`` maps ``(I, J)`` (form multi-index, multivector multi-index) to a
    weight; the term stands for ``w * theta^I (x) E_J``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for (i, j), w in (terms or {}).items():
            self._add(tuple(i), tuple(j), w)

    def _add(self, i, j, w):
        # normalise both parts to increasing order, tracking signs
        si, i = _sort_sign(i)
        sj, j = _sort_sign(j)
        if si == 0 or sj == 0 or is_zero(w):
            return
        w = w if si * sj > 0 else -w
        key = (i, j)
        if key in self.terms:
            w = self.terms[key] + w
            if is_zero(w):
                del self.terms[key]
                return
        self.terms[key] = w

    @classmethod
    def from_pairs(cls, pairs):
        """Build from an iterable of ((I, J), weight), accumulating duplicates."""
        obj = cls()
        for (i, j), w in pairs:
            obj._add(tuple(i), tuple(j), w)
        return obj

    def __add__(self, other):
        out = MixedTensor()
        out.terms = dict(self.terms)
        for (i, j), w in other.terms.items():
            out._add(i, j, w)
        return out

    def __neg__(self):
        out = MixedTensor()
        out.terms = {k: -w for k, w in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        out = MixedTensor()
        if is_zero(c):
            return out
        out.terms = {k: c * w for k, w in self.terms.items()}
        return out

    __rmul__ = scale

    def grades(self):
        return sorted({(len(i), len(j)) for i, j in self.terms})

    def homogeneous(self, i, j):
        out = MixedTensor()
        out.terms = {k: w for k, w in self.terms.items() if (len(k[0]), len(k[1])) == (i, j)}
        return out

    def contract(self, b):
        """iota_{E_b} applied to the form part."""
        out = MixedTensor()
        for (i, j), w in self.terms.items():
            if b not in i:
                continue
            pos = i.index(b)
            out._add(i[:pos] + i[pos + 1:], j, -w if pos % 2 else w)
        return out

    def map(self, fn):
        out = MixedTensor()
        for k, w in self.terms.items():
            out._add(k[0], k[1], fn(w))
        return out

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f"MixedTensor({self.terms!r})"


def _sort_sign(idx):
    if len(set(idx)) != len(idx):
        return 0, idx
    idx = list(idx)
    sign = 1
    for a in range(len(idx)):
        for b in range(len(idx) - 1 - a):
            if idx[b] > idx[b + 1]:
                idx[b], idx[b + 1] = idx[b + 1], idx[b]
                sign = -sign
    return sign, tuple(idx)


def apply_C(nu, a):
    """The creation/annihilation operator C_nu acting on the form a.

    For nu = theta^I (x) E_{J_1} ^ ... ^ E_{J_j} this is
    theta^I ^ (iota_{J_j} ... iota_{J_1} a); a plain scalar acts by scaling.
    """
    if not isinstance(nu, MixedTensor):
        return a.scale(nu)
    total = None
    for (i, j), w in nu.terms.items():
        if len(j) > a.degree:
            continue
        piece = a
        for b in j:
            piece = contract(b, piece)
            if not piece.coeffs:
                break
        if not piece.coeffs:
            continue
        for c in reversed(i):
            piece = wedge_covector(c, piece)
        piece = piece.scale(w)
        total = piece if total is None else total + piece
    if total is None:
        deg = a.degree
        if nu.terms:
            (i, j) = next(iter(nu.terms))
            deg = a.degree + len(i) - len(j)
        return Form._raw(max(deg, 0), {})
    return total


def inner_g(a, b):
    """Reference-metric inner product of two forms of equal degree."""
    if a.degree != b.degree and a.coeffs and b.coeffs:
        raise ValueError("inner product of forms of different degree")
    total = 0
    for k, x in a.coeffs.items():
        y = b.coeffs.get(k)
        if y is not None:
            total = total + x * y
    return total


def inner_eps(a, b, eps, n):
    """g_eps inner product: each (i, j) component weighted by eps**j.

    ``eps`` is an :class:`~folia.scalars.Eps` or a positive number.
    """
    value = getattr(eps, "value", eps)
    if value == float("inf"):
        raise ValueError("the g_eps inner product needs a finite eps")
    if value <= 0:
        raise ValueError("eps must be positive")
    if a.degree != b.degree and a.coeffs and b.coeffs:
        raise ValueError("inner product of forms of different degree")
    total = 0
    for k, x in a.coeffs.items():
        y = b.coeffs.get(k)
        if y is not None:
            total = total + value ** bigrade(k, n)[1] * x * y
    return total


def bigrade_split(a, n):
    """Split a form into its (i, j) components keyed by bi-grade."""
    out = {}
    for k, x in a.coeffs.items():
        out.setdefault(bigrade(k, n), {})[k] = x
    if not out:
        return {(0, 0) if a.degree == 0 else (a.degree, 0): Form._raw(a.degree, {})}
    return {g: Form._raw(a.degree, c) for g, c in sorted(out.items())}


def star_involution(nu):
    """(theta^I (x) E_J)* = theta^J (x) E_I in an orthonormal frame."""
    out = MixedTensor()
    for (i, j), w in nu.terms.items():
        out._add(j, i, w)
    return out
