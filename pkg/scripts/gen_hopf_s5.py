"""Generate the bundled hopf_s5 frame (S^5 -> CP^2) as structure-function jets.

Offline helper: needs sympy, which the package itself does not import.

Frame on the unit sphere in C^3 = R^6 near p = (1, 0, 0):
  Z  = i x (Reeb field of the Hopf fibration),
  X1..X4 = Gram-Schmidt of the projections of d/dx2, d/dy2, d/dx3, d/dy3
           onto the orthogonal complement of x and i x.
All fields are handled as Taylor polynomials in h = x - p, truncated to a
fixed degree, so every number that reaches the JSON file is rational.

    python3 scripts/gen_hopf_s5.py [--order K] [--out PATH]
"""

import argparse
import json
from itertools import combinations_with_replacement
from pathlib import Path

from sympy import QQ, Rational, binomial
from sympy.polys.rings import ring

R, *H = ring(",".join(f"h{i}" for i in range(6)), QQ)


def trunc(p, deg):
    return R({mon: c for mon, c in p.items() if sum(mon) <= deg})


def series(u, coeffs, deg):
    """sum_k coeffs[k] u^k truncated; u must vanish at h = 0."""
    out, power = R(0), R(1)
    for c in coeffs[: deg + 1]:
        out = trunc(out + c * power, deg)
        power = trunc(power * u, deg)
    return out


def dot(v, w, deg):
    return trunc(sum((a * b for a, b in zip(v, w)), R(0)), deg)


def scale(c, v, deg):
    return [trunc(c * a, deg) for a in v]


def sub(v, w):
    return [a - b for a, b in zip(v, w)]


def apply(field, f, deg):
    """field(f) for a vector field given by its ambient components."""
    return trunc(sum((a * f.diff(H[mu]) for mu, a in enumerate(field)), R(0)), deg)


def build_frame(deg):
    x = [1 + H[0]] + list(H[1:])
    ix = [-x[1], x[0], -x[3], x[2], -x[5], x[4]]
    u = dot(x, x, deg) - 1
    inv_r2 = series(u, [(-1) ** k for k in range(deg + 1)], deg)
    half = [binomial(Rational(-1, 2), k) for k in range(deg + 1)]

    def project(v):
        v = sub(v, scale(trunc(dot(v, x, deg) * inv_r2, deg), x, deg))
        return sub(v, scale(trunc(dot(v, ix, deg) * inv_r2, deg), ix, deg))

    frame = []
    for axis in (2, 3, 4, 5):
        v = project([R(1) if k == axis else R(0) for k in range(6)])
        for e in frame:
            v = sub(v, scale(dot(v, e, deg), e, deg))
        norm_inv = series(dot(v, v, deg) - 1, half, deg)
        frame.append(scale(norm_inv, v, deg))
    frame.append(ix)
    return frame


def structure_jets(order):
    deg = order + 1
    E = build_frame(deg)
    N = len(E)
    words = [w for k in range(order + 1) for w in combinations_with_replacement(range(N), k)]
    table = {}
    for a in range(N):
        for b in range(N):
            if a == b:
                continue
            br = [apply(E[a], E[b][mu], deg - 1) - apply(E[b], E[a][mu], deg - 1) for mu in range(6)]
            for e in range(N):
                c = dot(br, E[e], deg - 1)
                comps = {}
                for w in words:
                    f = c
                    for s in reversed(w):
                        f = apply(E[s], f, order - 1)  # validity drops per derivative
                    val = f.coeff(1) if f else 0
                    if val:
                        comps[w] = Rational(val)
                if comps:
                    table[(a, b, e)] = comps
    return table


def dump_scalar(q):
    q = Rational(q)
    return int(q) if q.q == 1 else f"{q.p}/{q.q}"


def entry(table, key, order, sym):
    comps = table.get(key)
    if not comps:
        return 0
    if set(comps) == {()}:
        return dump_scalar(comps[()])
    return {"order": order,
            "comps": {" ".join(sym[s] for s in w): dump_scalar(v) for w, v in sorted(comps.items())}}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=3)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/folia/data/hopf_s5.json"))
    args = ap.parse_args()
    n, m, K = 4, 1, args.order
    sym = [f"X{i + 1}" for i in range(n)] + ["Z1"]
    t = structure_jets(K)
    Z = n
    doc = {
        "name": "hopf_s5", "n": n, "m": m,
        "homogeneous": False, "compact": True, "uniform": True,
        "omega": [[[entry(t, (i, j, k), K, sym) for k in range(n)] for j in range(n)] for i in range(n)],
        "gamma": [[[entry(t, (i, j, Z), K, sym)] for j in range(n)] for i in range(n)],
        "beta": [[[entry(t, (i, Z, Z), K, sym)]] for i in range(n)],
        "kappa": [[[entry(t, (Z, i, k), K, sym) for k in range(n)] for i in range(n)]],
        "metadata": {
            "note": "unit S5 in C3 near (1,0,0); Z = i x, horizontal Gram-Schmidt frame; "
                    "structure functions as frame jets, same invariants at every point",
            "J2": "-4 Id_H",
            "generator": "scripts/gen_hopf_s5.py",
        },
    }
    bad = [k for k in t if k[0] >= n and k[1] >= n] + [k for k in t if (k[0] < n) != (k[1] < n) and k[2] >= n]
    if bad:
        raise SystemExit(f"unexpected bracket components {bad[:5]}")
    Path(args.out).write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
