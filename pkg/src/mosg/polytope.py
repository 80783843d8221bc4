"""Downward-closed polytopes in [0,1]^n with exact rational arithmetic.

A polytope is stored by its irredundant generators; its half-space description
is derived on demand and cached. The 1-D and 2-D cases have closed-form paths,
higher dimensions go through double description and an exact simplex.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from gmpy2 import mpq

from . import dd
from .lp import dominated_by_hull
from .rational import ONE, ZERO, fmt_q, to_q


class PolytopeError(ValueError):
    pass


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull2(points) -> tuple:
    # Pareto front sorted by x ascending, then concave upper chain.
    pts = sorted(set(points), key=lambda p: (-p[0], -p[1]))
    front = []
    best_y = None
    for p in pts:
        if best_y is None or p[1] > best_y:
            front.append(p)
            best_y = p[1]
    front.reverse()
    chain: list = []
    for p in front:
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) >= 0:
            chain.pop()
        chain.append(p)
    return tuple(chain)


def _pareto(points) -> list:
    pts = sorted(set(points), reverse=True)
    keep = []
    for p in pts:
        if not any(all(qi >= pi for qi, pi in zip(q, p)) for q in keep):
            keep.append(p)
    return keep


def _canonical(dim: int, points) -> tuple:
    if dim == 1:
        return ((max(p[0] for p in points),),)
    if dim == 2:
        return _hull2(points)
    gens = _pareto(points)
    i = 0
    while i < len(gens):
        others = gens[:i] + gens[i + 1:]
        if others and dominated_by_hull(gens[i], others):
            gens.pop(i)
        else:
            i += 1
    return tuple(sorted(gens))


class DwcPolytope:
    """dwc(conv(generators)) inside the unit box. Immutable."""

    __slots__ = ("dim", "generators", "_cons", "_hash")

    def __init__(self, dim: int, generators: tuple):
        # trusted constructor; use from_points for validation
        self.dim = dim
        self.generators = generators
        self._cons = None
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def from_points(cls, points: Iterable[Sequence], dim: int | None = None) -> "DwcPolytope":
        pts = [tuple(to_q(c) for c in p) for p in points]
        if not pts:
            raise PolytopeError("empty point set")
        if dim is None:
            dim = len(pts[0])
        if dim < 1:
            raise PolytopeError("dimension must be positive")
        for p in pts:
            if len(p) != dim:
                raise PolytopeError(f"dimension mismatch: {p} vs {dim}")
            for c in p:
                if c < 0 or c > 1:
                    raise PolytopeError(f"coordinate out of [0,1]: {p}")
        return cls(dim, _canonical(dim, pts))

    @classmethod
    def _of(cls, dim: int, points) -> "DwcPolytope":
        return cls(dim, _canonical(dim, points))

    # value semantics ----------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, DwcPolytope) and self.dim == other.dim and self.generators == other.generators

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.generators))
        return self._hash

    def __getstate__(self):
        return (self.dim, self.generators)

    def __setstate__(self, st):
        self.dim, self.generators = st
        self._cons = None
        self._hash = None

    def sort_key(self):
        return (len(self.generators), self.generators)

    def __repr__(self):
        body = ",".join("(" + ",".join(_short(c) for c in g) + ")" for g in self.generators)
        return f"dwc{{{body}}}"

    def to_json(self):
        return [[fmt_q(c) for c in g] for g in self.generators]

    @classmethod
    def from_json(cls, data) -> "DwcPolytope":
        return cls.from_points(data)

    def bit_size(self) -> int:
        return max(int(c.numerator).bit_length() + int(c.denominator).bit_length()
                   for g in self.generators for c in g)

    # constraints --------------------------------------------------------
    @property
    def constraints(self) -> tuple:
        """Tuple of (normal, offset) with normal >= 0, describing the set with x >= 0."""
        c = self._cons
        if c is None:
            c = _constraints(self)
            self._cons = c  # write-once; concurrent writers compute the same value
        return c


def _short(c):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _constraints(p: DwcPolytope) -> tuple:
    g = p.generators
    if p.dim == 1:
        return (((ONE,), g[0][0]),)
    if p.dim == 2:
        out = [((ZERO, ONE), g[0][1]), ((ONE, ZERO), g[-1][0])]
        for u, v in zip(g, g[1:]):
            a = (u[1] - v[1], v[0] - u[0])
            out.append((a, a[0] * u[0] + a[1] * u[1]))
        return tuple(out)
    n = p.dim
    # cone of valid (a, b): a >= 0, b >= 0, b - a.g >= 0
    rows = [tuple(-c for c in gen) + (ONE,) for gen in g]
    rays = dd.orthant_rays(n + 1, rows)
    out = []
    for r in rays:
        a = r[:n]
        if not any(a):
            continue
        out.append((tuple(mpq(x) for x in a), mpq(r[n])))
    return tuple(sorted(out))


# constructors ----------------------------------------------------------------

def origin(n: int) -> DwcPolytope:
    return DwcPolytope(n, ((ZERO,) * n,))


def full_box(n: int) -> DwcPolytope:
    return DwcPolytope(n, ((ONE,) * n,))


def point(x: Sequence) -> DwcPolytope:
    return DwcPolytope.from_points([x])


def from_points(points, dim: int | None = None) -> DwcPolytope:
    return DwcPolytope.from_points(points, dim)


def _check_dim(a: DwcPolytope, b: DwcPolytope):
    if a.dim != b.dim:
        raise PolytopeError(f"dimension mismatch: {a.dim} vs {b.dim}")


# operations ------------------------------------------------------------------

def convex_union(a: DwcPolytope, b: DwcPolytope) -> DwcPolytope:
    _check_dim(a, b)
    if a is b or a == b:
        return a
    return DwcPolytope._of(a.dim, a.generators + b.generators)


def convex_union_all(ps: Sequence[DwcPolytope]) -> DwcPolytope:
    if len(ps) == 1:
        return ps[0]
    dim = ps[0].dim
    for p in ps:
        if p.dim != dim:
            raise PolytopeError("dimension mismatch")
    return DwcPolytope._of(dim, [g for p in ps for g in p.generators])


def _satisfies(x, cons) -> bool:
    for a, b in cons:
        s = ZERO
        for ai, xi in zip(a, x):
            if ai:
                s += ai * xi
        if s > b:
            return False
    return True


def vertices_from_constraints(dim: int, cons) -> list:
    """Vertices of {x >= 0 : a.x <= b for (a, b) in cons} (assumed bounded)."""
    if dim == 1:
        return [(min(b / a[0] for a, b in cons if a[0]),)]
    if dim == 2:
        lines = list(cons) + [((ONE, ZERO), ZERO), ((ZERO, ONE), ZERO)]
        pts = set()
        for i in range(len(lines)):
            (a1, b1) = lines[i]
            for j in range(i + 1, len(lines)):
                (a2, b2) = lines[j]
                det = a1[0] * a2[1] - a1[1] * a2[0]
                if det == 0:
                    continue
                x = (b1 * a2[1] - b2 * a1[1]) / det
                y = (a1[0] * b2 - a2[0] * b1) / det
                if x < 0 or y < 0:
                    continue
                if _satisfies((x, y), cons):
                    pts.add((x, y))
        return list(pts)
    rows = [tuple(-c for c in a) + (b,) for a, b in cons]
    rays = dd.orthant_rays(dim + 1, rows)
    out = []
    for r in rays:
        t = r[dim]
        if t > 0:
            out.append(tuple(mpq(c, t) for c in r[:dim]))
    return out


def intersect(a: DwcPolytope, b: DwcPolytope) -> DwcPolytope:
    _check_dim(a, b)
    if a is b or a == b:
        return a
    if is_subset(a, b):
        return a
    if is_subset(b, a):
        return b
    if a.dim == 1:
        return DwcPolytope(1, ((min(a.generators[0][0], b.generators[0][0]),),))
    verts = vertices_from_constraints(a.dim, a.constraints + b.constraints)
    return DwcPolytope._of(a.dim, verts)


def intersect_all(ps: Sequence[DwcPolytope]) -> DwcPolytope:
    it = iter(ps)
    acc = next(it)
    for p in it:
        acc = intersect(acc, p)
    return acc


def weighted_combination(terms: Sequence[tuple]) -> DwcPolytope:
    if not terms:
        raise PolytopeError("no terms")
    dim = terms[0][1].dim
    total = ZERO
    for w, p in terms:
        w = to_q(w)
        if w <= 0:
            raise PolytopeError("weights must be positive")
        if p.dim != dim:
            raise PolytopeError("dimension mismatch")
        total += w
    if total != 1:
        raise PolytopeError(f"weights sum to {total}, not 1")
    if len(terms) == 1:
        return terms[0][1]
    acc = None
    for w, p in terms:
        w = to_q(w)
        scaled = [tuple(w * c for c in g) for g in p.generators]
        if acc is None:
            acc = scaled
        else:
            sums = [tuple(x + y for x, y in zip(g, h)) for g in acc for h in scaled]
            acc = list(_canonical(dim, sums))
    return DwcPolytope(dim, _canonical(dim, acc))


def is_subset(a: DwcPolytope, b: DwcPolytope) -> bool:
    _check_dim(a, b)
    if a is b:
        return True
    cons = b.constraints
    for g in a.generators:
        if not _satisfies(g, cons):
            return False
    return True


def contains_point(a: DwcPolytope, x: Sequence, strict=False) -> bool:
    """Membership; in strict mode, whether some z in a has z > x on the strict coordinates.

    `strict` is a bool or a per-coordinate sequence of bools.
    """
    x = tuple(to_q(c) for c in x)
    if len(x) != a.dim:
        raise PolytopeError("dimension mismatch")
    if isinstance(strict, bool):
        mask = (strict,) * a.dim
    else:
        mask = tuple(bool(s) for s in strict)
    # a negative coordinate is met by z_i = 0 whatever the strictness
    mask = tuple(m and c >= 0 for c, m in zip(x, mask))
    x = tuple(c if c >= 0 else ZERO for c in x)
    if any(m and c >= 1 for c, m in zip(x, mask)):
        return False
    for (nrm, b) in a.constraints:
        s = sum((ai * xi for ai, xi in zip(nrm, x) if ai), ZERO)
        if s > b:
            return False
        if s == b and any(m and ai for m, ai in zip(mask, nrm)):
            return False
    return True


def min_filter(fam: Iterable[DwcPolytope]) -> tuple:
    """The inclusion-minimal members, deduplicated and sorted."""
    ms = sorted(set(fam), key=DwcPolytope.sort_key)
    keep: list = []
    for i, p in enumerate(ms):
        dominated = False
        for j, q in enumerate(ms):
            if i != j and is_subset(q, p):
                # q ⊆ p and q != p (deduplicated), so p is not minimal
                dominated = True
                break
        if not dominated:
            keep.append(p)
    return tuple(keep)


def canon_family(fam: Iterable[DwcPolytope]) -> tuple:
    return tuple(sorted(set(fam), key=DwcPolytope.sort_key))


@dataclass(frozen=True)
class PolytopeSet:
    dim: int
    members: tuple

    @classmethod
    def of(cls, members: Iterable[DwcPolytope], dim: int | None = None) -> "PolytopeSet":
        ms = canon_family(members)
        if dim is None:
            if not ms:
                raise PolytopeError("empty family needs explicit dim")
            dim = ms[0].dim
        if any(m.dim != dim for m in ms):
            raise PolytopeError("dimension mismatch")
        return cls(dim, ms)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, p):
        return p in self.members

    def minimal(self) -> "PolytopeSet":
        return PolytopeSet(self.dim, min_filter(self.members))

    def intersection(self) -> DwcPolytope:
        return intersect_all(self.members)


# 2-D frontier helpers for region canonicalisation ------------------------------

def _frontier_at(p: DwcPolytope, x):
    """max{y : (x, y) in p} for 0 <= x <= xmax(p), else None."""
    g = p.generators
    if x > g[-1][0]:
        return None
    if x <= g[0][0]:
        return g[0][1]
    for u, v in zip(g, g[1:]):
        if u[0] <= x <= v[0]:
            t = (x - u[0]) / (v[0] - u[0])
            return u[1] + t * (v[1] - u[1])
    return g[-1][1]


def covered_2d(p: DwcPolytope, others: Sequence[DwcPolytope]) -> bool:
    """Whether p is contained in the union of `others` (2-D only)."""
    if not others:
        return False
    xmax = p.generators[-1][0]
    xs = {ZERO, xmax}
    for q in (p, *others):
        for g in q.generators:
            if g[0] <= xmax:
                xs.add(g[0])
    xs = sorted(xs)
    if len(xs) == 1:
        xs = xs * 2
    for lo, hi in zip(xs, xs[1:]):
        active = [q for q in others if q.generators[-1][0] >= hi]
        if not active:
            return False
        for x in (lo, hi):
            fp = _frontier_at(p, x)
            if fp > max(_frontier_at(q, x) for q in active):
                return False
    return True


@dataclass(frozen=True)
class Region:
    """A finite union of downward-closed polytopes."""

    dim: int
    parts: tuple

    @classmethod
    def of(cls, parts: Iterable[DwcPolytope]) -> "Region":
        ps = canon_family(parts)
        if not ps:
            raise PolytopeError("a region needs at least one part")
        dim = ps[0].dim
        if any(p.dim != dim for p in ps):
            raise PolytopeError("dimension mismatch")
        # drop parts contained in another part (or, in 2-D, in the union of the others)
        ps = [p for p in ps if not any(q != p and is_subset(p, q) for q in ps)]
        if dim == 2:
            changed = True
            while changed and len(ps) > 1:
                changed = False
                for i, p in enumerate(ps):
                    if covered_2d(p, ps[:i] + ps[i + 1:]):
                        ps.pop(i)
                        changed = True
                        break
        return cls(dim, tuple(ps))

    def contains(self, x, strict=False) -> bool:
        return any(contains_point(p, x, strict) for p in self.parts)

    def union(self, other: "Region") -> "Region":
        return Region.of(self.parts + other.parts)

    def subset_of(self, other: "Region") -> bool:
        if self.dim != other.dim:
            raise PolytopeError("dimension mismatch")
        for p in self.parts:
            if any(is_subset(p, q) for q in other.parts):
                continue
            if self.dim == 2 and covered_2d(p, other.parts):
                continue
            if self.dim != 2:
                raise NotImplementedError("union cover test is 2-D only")
            return False
        return True

    def same_set(self, other: "Region") -> bool:
        return self.subset_of(other) and other.subset_of(self)

    def to_json(self):
        return [p.to_json() for p in self.parts]

    def __repr__(self):
        return " ∪ ".join(map(repr, self.parts))


def region_membership(r: Region, x) -> bool:
    if len(x) != r.dim:
        raise PolytopeError("dimension mismatch")
    return r.contains(x)


def halfspace_in_box(a: Sequence, c) -> DwcPolytope | None:
    """{x in [0,1]^n : a.x <= c} for a >= 0, or None when empty."""
    n = len(a)
    c = to_q(c)
    if c < 0:
        return None
    cons = [(tuple(ONE if j == i else ZERO for j in range(n)), ONE) for i in range(n)]
    if any(a):
        cons.append((tuple(to_q(v) for v in a), c))
    return DwcPolytope._of(n, vertices_from_constraints(n, cons))


def grid_points(n: int, den: int):
    """All points of the lattice (1/den) Z^n in the unit box."""
    vals = [mpq(i, den) for i in range(den + 1)]
    return product(vals, repeat=n)
