"""Exact rational convex geometry for moment polytopes.

Polytopes live in the coordinate space of covectors on a_s; halfspaces
are (normal, offset) pairs meaning dot(normal, x) <= offset.  All
enumeration is by exhaustive subset solving: dimensions stay small here
and exactness beats asymptotics.
"""

from dataclasses import dataclass
from itertools import combinations
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .linalg import (
    Mat,
    Q,
    Vec,
    det,
    dot,
    is_zero_vec,
    kernel_basis,
    mat_vec,
    primitive_int_vec,
    rref,
    solve,
    solve_square,
    transpose,
    vsub,
    zero_vec,
)

Halfspace = Tuple[Vec, Q]


class UnboundedRegionError(ValueError):
    def __init__(self, ray: Vec):
        super().__init__(f"region is unbounded along {ray}")
        self.ray = ray


class EmptyRegionError(ValueError):
    pass


@dataclass(frozen=True)
class RationalPolytope:
    dim: int
    halfspaces: Tuple[Halfspace, ...]
    vertices: Tuple[Vec, ...]
    facet_tags: Tuple[Optional[str], ...]

    def contains(self, x: Vec) -> bool:
        return all(dot(n, x) <= b for n, b in self.halfspaces)

    def interior_contains(self, x: Vec) -> bool:
        return all(dot(n, x) < b for n, b in self.halfspaces)

    def facet_vertices(self, index: int) -> Tuple[Vec, ...]:
        n, b = self.halfspaces[index]
        return tuple(v for v in self.vertices if dot(n, v) == b)

    def facet_index_for_normal(self, outer: Vec) -> int:
        """Index of the facet whose outer normal is a positive multiple of
        the given vector (comparison on primitive representatives)."""
        key = primitive_int_vec(outer)
        hits = [
            i
            for i, (n, _) in enumerate(self.halfspaces)
            if primitive_int_vec(n) == key
        ]
        if len(hits) != 1:
            raise ValueError(f"no unique facet with outer normal {outer}")
        return hits[0]


def vertices_from_halfspaces(halfspaces: Sequence[Halfspace], dim: int) -> Tuple[Vec, ...]:
    """Exact vertex enumeration by solving all dim-subsets of tight
    constraints.  Raises on unbounded (with a witness ray) or empty input."""
    if dim > 6:
        raise ValueError("vertex enumeration is limited to dimension 6")
    halfspaces = [(tuple(map(Q, n)), Q(b)) for n, b in halfspaces]
    normals = [n for n, _ in halfspaces]
    verts = set()
    for combo in combinations(range(len(halfspaces)), dim):
        a = tuple(normals[i] for i in combo)
        rhs = tuple(halfspaces[i][1] for i in combo)
        try:
            x = solve_square(a, rhs)
        except ValueError:
            continue
        if all(dot(n, x) <= b for n, b in halfspaces):
            verts.add(x)
    ray = _recession_ray(normals, dim)
    if ray is not None:
        raise UnboundedRegionError(ray)
    if not verts:
        raise EmptyRegionError("halfspaces describe an empty region")
    return tuple(sorted(verts))


def _recession_ray(normals: List[Vec], dim: int) -> Optional[Vec]:
    """A nonzero direction with dot(n, d) <= 0 for every normal, or None."""
    if not normals:
        return tuple([Q(1)] + [Q(0)] * (dim - 1))
    lineal = kernel_basis(tuple(normals))
    if lineal:
        return primitive_int_vec(lineal[0])
    for size in range(dim):
        for combo in combinations(range(len(normals)), size):
            kern = kernel_basis(tuple(normals[i] for i in combo)) if combo else [
                tuple(Q(1) if j == k else Q(0) for j in range(dim)) for k in range(dim)
            ]
            for d in kern:
                for cand in (d, tuple(-x for x in d)):
                    if not is_zero_vec(cand) and all(dot(n, cand) <= 0 for n in normals):
                        return primitive_int_vec(cand)
    return None


def halfspaces_from_vertices(points: Sequence[Vec]) -> Tuple[Halfspace, ...]:
    """Facet halfspaces of the convex hull of a full-dimensional point set."""
    pts = sorted({tuple(map(Q, p)) for p in points})
    if not pts:
        raise EmptyRegionError("no points")
    dim = len(pts[0])
    if _affine_rank(pts) != dim:
        raise ValueError("point set is not full-dimensional in its space")
    found: Dict[Halfspace, int] = {}
    for combo in combinations(pts, dim):
        diffs = [vsub(p, combo[0]) for p in combo[1:]]
        kern = kernel_basis(tuple(diffs)) if diffs else [
            tuple(Q(1) if j == k else Q(0) for j in range(dim)) for k in range(dim)
        ]
        if len(kern) != 1:
            continue
        normal = primitive_int_vec(kern[0])
        offset = dot(normal, combo[0])
        vals = [dot(normal, p) for p in pts]
        if all(v <= offset for v in vals):
            found[(normal, offset)] = 1
        elif all(v >= offset for v in vals):
            neg = tuple(-x for x in normal)
            found[(neg, -offset)] = 1
    result = []
    for normal, offset in sorted(found):
        tight = [p for p in pts if dot(normal, p) == offset]
        if _affine_rank(tight) == dim - 1:
            result.append((normal, offset))
    return tuple(result)


def _affine_rank(points: Sequence[Vec]) -> int:
    # affine dimension: empty set is -1, a point is 0
    if not points:
        return -1
    if len(points) == 1:
        return 0
    diffs = tuple(vsub(p, points[0]) for p in points[1:])
    return len(rref(diffs)[1])


def polytope_from_halfspaces(
    halfspaces: Sequence[Halfspace],
    dim: int,
    facet_tags: Optional[Sequence[Optional[str]]] = None,
) -> RationalPolytope:
    """Build a polytope, dropping redundant halfspaces (kept iff tight on a
    facet-sized face) while preserving tag alignment."""
    verts = vertices_from_halfspaces(halfspaces, dim)
    tags = list(facet_tags) if facet_tags is not None else [None] * len(halfspaces)
    if len(tags) != len(halfspaces):
        raise ValueError("facet_tags length mismatch")
    kept: List[Halfspace] = []
    kept_tags: List[Optional[str]] = []
    seen = set()
    for (n, b), tag in zip(halfspaces, tags):
        n = tuple(map(Q, n))
        b = Q(b)
        key = (primitive_int_vec(n), b / _norm_scale(n))
        tight = [v for v in verts if dot(n, v) == b]
        if _affine_rank(tight) == dim - 1 and key not in seen:
            seen.add(key)
            kept.append((n, b))
            kept_tags.append(tag)
    return RationalPolytope(
        dim=dim, halfspaces=tuple(kept), vertices=verts, facet_tags=tuple(kept_tags)
    )


def _norm_scale(n: Vec) -> Q:
    prim = primitive_int_vec(n)
    for a, b in zip(n, prim):
        if b != 0:
            return a / b
    raise ValueError("zero normal")


def polytope_from_vertices(points: Sequence[Vec]) -> RationalPolytope:
    pts = sorted({tuple(map(Q, p)) for p in points})
    dim = len(pts[0])
    if len(pts) == 1:
        return RationalPolytope(dim=dim, halfspaces=(), vertices=(pts[0],), facet_tags=())
    halfspaces = halfspaces_from_vertices(pts)
    verts = vertices_from_halfspaces(halfspaces, dim)
    return RationalPolytope(
        dim=dim,
        halfspaces=halfspaces,
        vertices=verts,
        facet_tags=(None,) * len(halfspaces),
    )


def support_function(poly: RationalPolytope, direction: Vec) -> Q:
    if not poly.vertices:
        raise EmptyRegionError("empty polytope has no support function")
    return max(dot(direction, v) for v in poly.vertices)


def weyl_orbit_hull(point_or_points, group: Sequence[Mat]) -> RationalPolytope:
    """Convex hull of the orbit of one point (or a point set) under a finite
    matrix group acting on the polytope coordinate space."""
    if point_or_points and isinstance(point_or_points[0], tuple):
        seeds = list(point_or_points)
    else:
        seeds = [tuple(point_or_points)]
    orbit = set()
    for g in group:
        for p in seeds:
            orbit.add(tuple(mat_vec(g, p)))
    pts = sorted(orbit)
    if _affine_rank(pts) == 0:
        return RationalPolytope(
            dim=len(pts[0]), halfspaces=(), vertices=(pts[0],), facet_tags=()
        )
    return polytope_from_vertices(pts)


def cone_over_facet(poly: RationalPolytope, apex: Vec, facet_index: int) -> RationalPolytope:
    """Convex hull of the apex and one facet (the subdivision piece over
    that facet)."""
    if not poly.contains(apex):
        raise ValueError("apex is not in the polytope")
    n, b = poly.halfspaces[facet_index]
    if dot(n, apex) == b:
        raise ValueError("apex lies on the facet hyperplane; cone is degenerate")
    fverts = poly.facet_vertices(facet_index)
    return polytope_from_vertices((tuple(apex),) + fverts)


def triangulate(poly: RationalPolytope) -> Tuple[Tuple[Vec, ...], ...]:
    """Pulling triangulation from the lexicographically smallest vertex,
    recursively over facets.  Returns simplices as (dim+1)-tuples of
    vertices; interiors are disjoint and volumes sum to the polytope's."""
    return _triangulate_points(list(poly.vertices))


def _triangulate_points(pts: List[Vec]) -> Tuple[Tuple[Vec, ...], ...]:
    pts = sorted(set(pts))
    d = _affine_rank(pts)
    if len(pts) == d + 1:
        return (tuple(pts),)
    v0 = pts[0]
    dim = len(v0)
    if d == dim:
        halfspaces = halfspaces_from_vertices(pts)
        simplices: List[Tuple[Vec, ...]] = []
        for n, b in halfspaces:
            if dot(n, v0) == b:
                continue
            facet = [p for p in pts if dot(n, p) == b]
            for sub in _triangulate_facet(facet):
                simplices.append(tuple(sorted((v0,) + sub)))
        return tuple(sorted(simplices))
    # lower-dimensional set inside its space: recurse in facet coordinates
    return _triangulate_facet(pts)


def _triangulate_facet(facet_pts: List[Vec]) -> Tuple[Tuple[Vec, ...], ...]:
    facet_pts = sorted(set(facet_pts))
    if len(facet_pts) == 1:
        return ((facet_pts[0],),)
    origin = facet_pts[0]
    diffs = [vsub(p, origin) for p in facet_pts[1:]]
    red, pivots = rref(diffs)
    basis = tuple(tuple(row) for row in red[: len(pivots)])
    coords = []
    for p in facet_pts:
        c = solve(transpose(basis), vsub(p, origin))
        if c is None:
            raise ValueError("facet point outside its affine hull")
        coords.append(tuple(c))
    back = {c: p for c, p in zip(coords, facet_pts)}
    simplices = _triangulate_points(list(coords))
    return tuple(
        tuple(sorted(back[c] for c in simplex)) for simplex in simplices
    )


def simplex_volume(simplex: Sequence[Vec]) -> Q:
    pts = list(simplex)
    d = len(pts) - 1
    if d == 0:
        return Q(0)
    diffs = tuple(vsub(p, pts[0]) for p in pts[1:])
    if len(diffs[0]) != d:
        raise ValueError("simplex is not full-dimensional in its space")
    value = det(diffs)
    return abs(value) / factorial(d)


def volume(poly: RationalPolytope) -> Q:
    if _affine_rank(list(poly.vertices)) < poly.dim:
        return Q(0)
    return sum((simplex_volume(s) for s in triangulate(poly)), Q(0))


def shoelace_area(vertices_ccw: Sequence[Vec]) -> Q:
    """Independent 2D area formula for cross-checks; vertices in cyclic order."""
    pts = [tuple(map(Q, p)) for p in vertices_ccw]
    total = Q(0)
    for i, (x0, y0) in enumerate(pts):
        x1, y1 = pts[(i + 1) % len(pts)]
        total += x0 * y1 - x1 * y0
    return abs(total) / 2


@dataclass(frozen=True)
class DualChamberReport:
    verdict: bool
    coefficients: Tuple[Q, ...]
    residual: Vec


def rel_interior_dual_chamber(vector: Vec, datum) -> DualChamberReport:
    """Is the covector a strictly positive combination of the simple
    restricted roots?  Any component along central directions (empty
    restricted system there) must vanish exactly."""
    simples = datum.simple_restricted_roots
    vector = tuple(map(Q, vector))
    if not simples:
        return DualChamberReport(
            verdict=is_zero_vec(vector), coefficients=(), residual=vector
        )
    a = transpose(simples)  # columns = simple restricted roots
    c = solve(a, vector)
    if c is None:
        gram = tuple(
            tuple(dot(si, sj) for sj in simples) for si in simples
        )
        rhs = tuple(dot(si, vector) for si in simples)
        c_proj = solve_square(gram, rhs)
        approx = mat_vec(a, c_proj)
        residual = vsub(vector, approx)
        return DualChamberReport(verdict=False, coefficients=c_proj, residual=residual)
    residual = zero_vec(len(vector))
    return DualChamberReport(
        verdict=all(x > 0 for x in c), coefficients=c, residual=residual
    )
