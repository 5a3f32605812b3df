"""Frames used only by the tests.

solv: a homogeneous group frame that is not Yang-Mills.  Brackets
[X1,X2] = X2 + Z, [X1,X3] = -X3, [X2,X3] = Z with Z central.

heisenberg_jet: the Heisenberg frame with the structure function of
[X1,X2] = g Z perturbed to a jet g = 1 + x1 + 2 x2 + ...  (not Yang-Mills).

bundle_m2: horizontal lift of an E(2) connection on R^3 x R^2,
X1 = d_x1, X2 = d_x2 + x1 (-y2 d_y1 + y1 d_y2), X3 = d_x3 + x1 d_y1,
Z_l = d_yl, anchored at x = 0, y = (1, 0).  Its structure functions depend
on the fibre coordinates, so nabla_Z T does not vanish.  The jets below are
hand-computed frame derivatives of the polynomials y1, y2, x1, x1^2.
"""

from gmpy2 import mpq

from folia.frames import FrameSpec
from folia.jets import Jet


def zeros(*shape):
    if len(shape) == 1:
        return [mpq(0)] * shape[0]
    return [zeros(*shape[1:]) for _ in range(shape[0])]


def _skew(arr, i, j, k, v):
    arr[i][j][k] = v
    arr[j][i][k] = -v


def solv():
    om, ga, be = zeros(3, 3, 3), zeros(3, 3, 1), zeros(3, 1, 1)
    _skew(om, 0, 1, 1, mpq(1))
    _skew(om, 0, 2, 2, mpq(-1))
    _skew(ga, 1, 2, 0, mpq(1))
    _skew(ga, 0, 1, 0, mpq(1))
    return FrameSpec(3, 1, om, ga, be, name="solv")


def heisenberg_jet():
    om, ga, be = zeros(2, 2, 2), zeros(2, 2, 1), zeros(2, 1, 1)
    g = Jet(3, {(): mpq(1), (0,): mpq(1), (1,): mpq(2), (0, 0): mpq(1), (0, 1): mpq(-1),
                (1, 1, 1): mpq(3)})
    _skew(ga, 0, 1, 0, g)
    return FrameSpec(2, 1, om, ga, be, homogeneous=False, name="heisenberg_jet")


def bundle_m2(order=3):
    x1 = Jet(order, {(0,): mpq(1)})
    x1sq = Jet(order, {(0, 0): mpq(2)})
    y1 = Jet(order, {(): mpq(1), (3,): mpq(1), (0, 2): mpq(1)})
    y2 = Jet(order, {(4,): mpq(1), (0, 1): mpq(1)})
    om, ga, be = zeros(3, 3, 3), zeros(3, 3, 2), zeros(3, 2, 2)
    _skew(ga, 0, 1, 0, -y2)
    _skew(ga, 0, 1, 1, y1)
    _skew(ga, 0, 2, 0, mpq(1))
    _skew(ga, 1, 2, 1, -x1sq)
    be[1][0][1] = -x1
    be[1][1][0] = x1
    return FrameSpec(3, 2, om, ga, be, homogeneous=False, name="bundle_m2")


def broken_doc():
    """Heisenberg document whose gamma is not antisymmetric."""
    return {"name": "broken", "n": 2, "m": 1,
            "omega": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]],
            "gamma": [[[0], [1]], [[1], [0]]],
            "beta": [[[0]], [[0]]]}
