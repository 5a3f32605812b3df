"""Frame jets of scalar functions at an abstract anchor point.

A jet stores the values ``(E_{w1} E_{w2} ... E_{wk} f)(p)`` for the normally
ordered words ``w`` (non-decreasing tuples of frame indices, horizontal
indices first) up to a truncation order.  Every other word is evaluated by
rewriting it to normal order with the bracket relations of the frame,
``E_a E_b = E_b E_a + sum_c c_ab^c E_c``.  Bracket coefficients may themselves
be jets; the rewrite then distributes the outer derivatives with Leibniz.

Scalars are duck-typed: mpq for exact work, float for numerics, and numpy
object/float arrays when a batch of independent trials is evaluated at once.
"""

from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

from .scalars import exact, is_zero

__all__ = [
    "Jet",
    "JetOrderError",
    "Rewriter",
    "normal_words",
    "frame_derivative",
    "random_jet",
    "random_jet_batch",
    "fd",
    "at_point",
    "min_order",
    "cap",
]


class JetOrderError(ValueError):
    """Raised when a computation needs derivatives beyond a jet's order."""


@lru_cache(maxsize=None)
def normal_words(nsym, order):
    """All non-decreasing words over ``range(nsym)`` of length <= order."""
    out = []
    for k in range(order + 1):
        out.extend(combinations_with_replacement(range(nsym), k))
    return tuple(out)


@lru_cache(maxsize=None)
def _splits(word):
    """Order-preserving splits of ``word`` into two complementary subsequences."""
    k = len(word)
    out = []
    for mask in range(1 << k):
        left = tuple(word[i] for i in range(k) if mask >> i & 1)
        right = tuple(word[i] for i in range(k) if not mask >> i & 1)
        out.append((left, right))
    return tuple(out)


def _is_normal(word):
    return all(word[i] <= word[i + 1] for i in range(len(word) - 1))


class Jet:
    """Truncated frame jet of a scalar function."""

    __slots__ = ("order", "comps")

    def __init__(self, order, comps=None):
        if order < 0:
            raise JetOrderError("jet order must be non-negative")
        self.order = order
        self.comps = {}
        for w, v in (comps or {}).items():
            w = tuple(w)
            if not _is_normal(w):
                raise ValueError(f"word {w} is not normally ordered")
            if len(w) > order:
                raise JetOrderError(f"word {w} exceeds jet order {order}")
            if not is_zero(v):
                self.comps[w] = v

    @classmethod
    def constant(cls, value, order):
        return cls(order, {(): value})

    @property
    def value(self):
        """Value of the function at the anchor point."""
        return self.comps.get((), 0)

    def coeff(self, word):
        if len(word) > self.order:
            raise JetOrderError(f"word {word} exceeds jet order {self.order}")
        return self.comps.get(word, 0)

    def evaluate(self, rw, word):
        """Value of the (possibly non-normal) derivative word at the point."""
        word = tuple(word)
        if len(word) > self.order:
            raise JetOrderError(f"word {word} exceeds jet order {self.order}")
        if _is_normal(word):
            return self.comps.get(word, 0)
        total = 0
        for nw, c in rw.reduce(word).items():
            v = self.comps.get(nw)
            if v is not None:
                total = total + c * v
        return total

    def truncate(self, order):
        if order >= self.order:
            return self
        return Jet(order, {w: v for w, v in self.comps.items() if len(w) <= order})

    def map(self, fn):
        return Jet(self.order, {w: fn(v) for w, v in self.comps.items()})

    def is_zero(self):
        return all(is_zero(v) for v in self.comps.values())

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            out = {w: v for w, v in self.comps.items() if len(w) <= order}
            for w, v in other.comps.items():
                if len(w) <= order:
                    out[w] = out[w] + v if w in out else v
            return Jet(order, out)
        if is_zero(other):
            return self
        out = dict(self.comps)
        out[()] = out.get((), 0) + other
        return Jet(self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.order, {w: -v for w, v in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            out = {}
            a, b = self.comps, other.comps
            for w in _words_up_to(self, other, order):
                acc = 0
                for left, right in _splits(w):
                    x = a.get(left)
                    if x is None:
                        continue
                    y = b.get(right)
                    if y is None:
                        continue
                    acc = acc + x * y
                if not is_zero(acc):
                    out[w] = acc
            return Jet(order, out)
        if is_zero(other):
            return Jet(self.order, {})
        return Jet(self.order, {w: v * other for w, v in self.comps.items()})

    def __rmul__(self, other):
        if isinstance(other, Jet):
            return other.__mul__(self)
        if is_zero(other):
            return Jet(self.order, {})
        return Jet(self.order, {w: other * v for w, v in self.comps.items()})

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return NotImplemented
        return Jet(self.order, {w: v / other for w, v in self.comps.items()})

    def __repr__(self):
        return f"Jet(order={self.order}, comps={self.comps!r})"


def _words_up_to(f, g, order):
    # product support lies in the sorted merges of support words
    words = set()
    for u in f.comps:
        for v in g.comps:
            if len(u) + len(v) <= order:
                words.add(tuple(sorted(u + v)))
    return words


def fd(rw, s, x):
    """Frame derivative of a jet, or zero for a plain scalar (constant)."""
    if isinstance(x, Jet):
        return rw.derivative(s, x)
    return 0


def min_order(values):
    """Smallest order among the jets in ``values`` (None when all are plain scalars)."""
    orders = [v.order for v in values if isinstance(v, Jet)]
    return min(orders) if orders else None


def cap(x, order):
    """Truncate a jet to ``order``; plain scalars and ``order=None`` pass through."""
    if order is None or not isinstance(x, Jet):
        return x
    if order < 0:
        raise JetOrderError("derivative exceeds the available jet order")
    return x.truncate(order)


def at_point(x):
    return x.value if isinstance(x, Jet) else x


class Rewriter:
    """Normal-ordering engine for words of frame derivatives.

    ``brackets[a][b]`` is a dict ``{c: coefficient}`` encoding
    ``[E_a, E_b] = sum_c coefficient * E_c``; coefficients are scalars or jets.
    With ``constrained=False`` bracket terms are dropped and words are merely
    sorted, which is the negative control for d^2 = 0.
    """

    def __init__(self, nsym, brackets, constrained=True):
        self.nsym = nsym
        self.brackets = brackets
        self.constrained = constrained
        self.constant = all(
            not isinstance(v, Jet) for row in brackets for cell in row for v in cell.values()
        )
        self._cache = {}

    def reduce(self, word, strategy="first"):
        """Express a word as a linear combination of normal words.

        ``strategy`` picks the first or the last descent to swap; both must
        agree whenever the bracket data satisfies the Jacobi identity.
        """
        word = tuple(word)
        key = (word, strategy)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        descents = [i for i in range(len(word) - 1) if word[i] > word[i + 1]]
        if not descents:
            res = {word: 1}
            self._cache[key] = res
            return res
        i = descents[0] if strategy == "first" else descents[-1]
        a, b = word[i], word[i + 1]
        u, v = word[:i], word[i + 2:]
        out = dict(self.reduce(u + (b, a) + v, strategy))
        if self.constrained:
            for c, coef in self.brackets[a][b].items():
                if isinstance(coef, Jet):
                    for u1, u2 in _splits(u):
                        if len(u1) > coef.order:
                            raise JetOrderError(
                                f"bracket coefficient jet of order {coef.order} "
                                f"cannot be differentiated {len(u1)} times"
                            )
                        cv = coef.evaluate(self, u1)
                        if is_zero(cv):
                            continue
                        for nw, x in self.reduce(u2 + (c,) + v, strategy).items():
                            out[nw] = out.get(nw, 0) + cv * x
                else:
                    if is_zero(coef):
                        continue
                    for nw, x in self.reduce(u + (c,) + v, strategy).items():
                        out[nw] = out.get(nw, 0) + coef * x
        out = {w: x for w, x in out.items() if not is_zero(x)}
        self._cache[key] = out
        return out

    def derivative(self, s, f):
        """Jet of ``E_s f``; the order drops by one."""
        if f.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet")
        order = f.order - 1
        out = {}
        if not f.comps:
            return Jet(order, {})
        for w in normal_words(self.nsym, order):
            val = f.evaluate(self, w + (s,))
            if not is_zero(val):
                out[w] = val
        return Jet(order, out)


def frame_derivative(rw, s, f):
    return rw.derivative(s, f)


def _draw(rng, size=None):
    # nonzero on purpose: a zero coefficient can hide a single-term residual
    mag = rng.integers(1, 10, size=size)
    return np.where(rng.integers(0, 2, size=size) == 1, mag, -mag)


def random_jet(order, seed, nsym, floating=False):
    """Deterministic random jet with nonzero integer components in [-9, 9]."""
    rng = np.random.default_rng(seed)
    words = normal_words(nsym, order)
    vals = _draw(rng, len(words))
    conv = float if floating else exact
    return Jet(order, {w: conv(int(v)) for w, v in zip(words, vals)})


def random_jet_batch(order, seeds, nsym, floating=False):
    """Stack ``random_jet(order, s, nsym)`` for each seed into array components."""
    words = normal_words(nsym, order)
    table = np.array([_draw(np.random.default_rng(s), len(words)) for s in seeds]).T
    comps = {}
    for w, row in zip(words, table):
        if floating:
            comps[w] = row.astype(float)
        else:
            comps[w] = np.array([exact(int(v)) for v in row], dtype=object)
    return Jet(order, comps)
