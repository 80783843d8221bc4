"""Double description for pointed cones {x : x >= 0, H x >= 0} in integer arithmetic."""
from __future__ import annotations

from math import gcd

from gmpy2 import mpq


def _integer_row(row):
    den = 1
    for v in row:
        d = mpq(v).denominator
        den = den * d // gcd(den, d)
    return tuple(int(mpq(v) * den) for v in row)


def _primitive(v):
    g = 0
    for x in v:
        g = gcd(g, x)
    if g > 1:
        return tuple(x // g for x in v)
    return tuple(v)


def orthant_rays(d: int, constraints) -> list[tuple[int, ...]]:
    """Extreme rays of {x in R^d : x >= 0, h.x >= 0 for h in constraints}.

    Rays are primitive integer vectors. Adjacency uses the combinatorial test.
    """
    rays = [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]
    zsets = [frozenset(j for j in range(d) if j != i) for i in range(d)]
    for c, h in enumerate(constraints, start=d):
        h = _integer_row(h)
        vals = [sum(a * x for a, x in zip(h, r)) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        zer = [i for i, v in enumerate(vals) if v == 0]
        if not neg:
            zsets = [zsets[i] | {c} if vals[i] == 0 else zsets[i] for i in range(len(rays))]
            continue
        new_rays, new_z = [], []
        for i in pos + zer:
            new_rays.append(rays[i])
            new_z.append(zsets[i] | {c} if vals[i] == 0 else zsets[i])
        for p in pos:
            for q in neg:
                common = zsets[p] & zsets[q]
                if len(common) < d - 2:
                    continue
                ok = True
                for r in range(len(rays)):
                    if r != p and r != q and common <= zsets[r]:
                        ok = False
                        break
                if not ok:
                    continue
                vp, vq = vals[p], -vals[q]
                ray = _primitive(tuple(vq * a + vp * b for a, b in zip(rays[p], rays[q])))
                new_rays.append(ray)
                new_z.append(common | {c})
        rays, zsets = new_rays, new_z
    # dedupe (degenerate inputs can produce repeats)
    out = []
    seen = set()
    for r in rays:
        if r not in seen and any(r):
            seen.add(r)
            out.append(r)
    return out
