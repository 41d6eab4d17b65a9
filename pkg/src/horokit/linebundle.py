"""Polarized toroidal horosymmetric varieties.

Bundles divisorial data (rays with their special-function values, color
constants, isotropy character, boundary coefficients) and produces the
moment polytope, its Weyl-saturated toric companion, ampleness and
anticanonical certificates, the base point of the subdivision, and the
two structural assumptions needed by the coercivity machinery.
"""

from dataclasses import dataclass
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from .linalg import (
    Mat,
    Q,
    Vec,
    coords_in_basis,
    dot,
    is_integer_vec,
    is_zero_vec,
    primitive_int_vec,
    transpose,
    vadd,
    vscale,
    vsub,
    zero_vec,
)
from .polytope import (
    EmptyRegionError,
    RationalPolytope,
    cone_over_facet,
    polytope_from_halfspaces,
    support_function,
    volume,
    weyl_orbit_hull,
)
from .restricted import Color, HorosymmetricDatum, color_images, restricted_weyl_group
from .rootdata import coroot


@dataclass(frozen=True)
class PolarizedVariety:
    datum: HorosymmetricDatum
    rays: Tuple[Vec, ...]  # a_s coordinates, primitive in the dual lattice
    v_values: Tuple[Q, ...]
    chi: Vec  # ambient covector
    color_constants: Tuple[Tuple[str, Q], ...]
    boundary: Tuple[Q, ...]  # c_Y per ray, < 1
    lambda0_override: Optional[Vec]
    fiber_trivial: bool

    def color_constant(self, label: str) -> Q:
        for k, v in self.color_constants:
            if k == label:
                return v
        return Q(0)


def expanded_colors(datum: HorosymmetricDatum) -> Tuple[Tuple[str, Vec], ...]:
    """Individual colors as (label, point) pairs: a two-color fiber wall
    splits into '+' and '-' entries over the same point."""
    out: List[Tuple[str, Vec]] = []
    for c in color_images(datum):
        if c.fiber_degree == 2:
            out.append((c.label + ":+", c.point))
            out.append((c.label + ":-", c.point))
        else:
            out.append((c.label, c.point))
    return tuple(out)


def variety_dimension(datum: HorosymmetricDatum) -> int:
    return datum.rank + len(datum.phi_Qu) + len(datum.phi_s_plus)


def make_variety(
    datum: HorosymmetricDatum,
    rays: Sequence[Sequence[Q]],
    v_values: Sequence[Q],
    chi: Optional[Sequence[Q]] = None,
    color_constants: Optional[Dict[str, Q]] = None,
    boundary: Optional[Sequence[Q]] = None,
    lambda0: Optional[Sequence[Q]] = None,
    fiber_trivial: bool = True,
) -> PolarizedVariety:
    rays_t = tuple(tuple(map(Q, r)) for r in rays)
    v_t = tuple(map(Q, v_values))
    if len(rays_t) != len(v_t):
        raise ValueError("one v value is needed per ray")
    if len(set(rays_t)) != len(rays_t):
        raise ValueError("duplicate rays")
    chi_t = tuple(map(Q, chi)) if chi is not None else zero_vec(datum.system.ambient_dim)
    if len(chi_t) != datum.system.ambient_dim:
        raise ValueError("chi must be an ambient covector")
    boundary_t = (
        tuple(map(Q, boundary)) if boundary is not None else (Q(0),) * len(rays_t)
    )
    if len(boundary_t) != len(rays_t):
        raise ValueError("one boundary coefficient is needed per ray")
    if any(c >= 1 for c in boundary_t):
        raise ValueError("boundary coefficients must be < 1")
    known = {label for label, _ in expanded_colors(datum)}
    cc = tuple(sorted((color_constants or {}).items()))
    for label, _ in cc:
        if label not in known:
            raise ValueError(f"unknown color label: {label!r} (known: {sorted(known)})")
    lam = tuple(map(Q, lambda0)) if lambda0 is not None else None

    # rays live in the valuation cone (negative restricted chamber)
    for mu in rays_t:
        if len(mu) != datum.rank:
            raise ValueError("ray dimension mismatch")
        for cls in datum.classes:
            if dot(cls.root, mu) > 0:
                raise ValueError(f"ray {mu} is outside the valuation cone")
        if datum.lattice_N is None:
            raise ValueError("datum has no spherical lattice; cannot validate rays")
        coords = coords_in_basis(mu, datum.lattice_N)
        if not is_integer_vec(coords):
            raise ValueError(f"ray {mu} is not a lattice point of the dual lattice")
        g = 0
        for c in coords:
            g = gcd(g, int(c))
        if g != 1:
            raise ValueError(f"ray {mu} is not primitive in the dual lattice")

    for b in datum.a_s_basis:
        if dot(chi_t, b) != 0:
            raise ValueError("chi must vanish on a_s")
    if fiber_trivial:
        for a in datum.phi_s_plus:
            if dot(chi_t, coroot(datum.system, a)) != 0:
                raise ValueError("fiber-trivial mode: chi must vanish on split coroots")
        for a in datum.levi_simples:
            if dot(chi_t, coroot(datum.system, a)) != 0:
                raise ValueError("fiber-trivial mode: chi must vanish on Levi coroots")

    return PolarizedVariety(
        datum=datum,
        rays=rays_t,
        v_values=v_t,
        chi=chi_t,
        color_constants=cc,
        boundary=boundary_t,
        lambda0_override=lam,
        fiber_trivial=fiber_trivial,
    )


def moment_polytope(pv: PolarizedVariety) -> RationalPolytope:
    """Halfspace description: m(mu_Y) + v_Y >= 0 per ray and
    m(rho(D)) + n_D >= 0 per color; vertices enumerated exactly.
    In these coordinates the isotropy translation is invisible because
    chi vanishes on a_s; ambient evaluations add it back."""
    halfspaces = []
    tags = []
    for i, (mu, v) in enumerate(zip(pv.rays, pv.v_values)):
        halfspaces.append((vscale(Q(-1), mu), v))
        tags.append(f"ray:{i}")
    for label, point in expanded_colors(pv.datum):
        halfspaces.append((vscale(Q(-1), point), pv.color_constant(label)))
        tags.append(f"color:{label}")
    poly = polytope_from_halfspaces(halfspaces, pv.datum.rank, tags)
    for v in poly.vertices:
        for sc in pv.datum.simple_restricted_coroots:
            if dot(sc, v) < 0:
                raise ValueError(
                    "moment polytope leaves the positive restricted chamber"
                )
    return poly


def toric_polytope(pv: PolarizedVariety) -> RationalPolytope:
    """Convex hull of the Weyl orbit of the moment polytope (acting on
    covector coordinates, hence by transposed matrices)."""
    poly = moment_polytope(pv)
    group = [transpose(w) for w in restricted_weyl_group(pv.datum)]
    return weyl_orbit_hull(poly.vertices, group)


def anticanonical_coefficients(pv: PolarizedVariety) -> Tuple[Q, ...]:
    """n_Y = 1 - sum over parabolic-unipotent and split positive roots of
    alpha(mu_Y), per ray."""
    return tuple(
        Q(1) - dot(pv.datum.two_rho_H, mu) for mu in pv.rays
    )


def lambda0(pv: PolarizedVariety, poly: Optional[RationalPolytope] = None) -> Vec:
    """Base point of the conical subdivision: the unique Weyl-invariant
    direction slice of the moment polytope (single point when the
    restricted system spans, centroid of the slice's vertices otherwise).
    An override is validated against the slice."""
    if poly is None:
        poly = moment_polytope(pv)
    r = pv.datum.rank
    coroots = tuple(c.coroot_vec for c in pv.datum.classes)
    if coroots:
        from .linalg import kernel_basis

        z_basis = kernel_basis(coroots)
    else:
        z_basis = [tuple(Q(1) if j == i else Q(0) for j in range(r)) for i in range(r)]
    if pv.lambda0_override is not None:
        lam = pv.lambda0_override
        _validate_lambda0(lam, z_basis, poly)
        return lam
    if not z_basis:
        lam = zero_vec(r)
        if not poly.contains(lam):
            raise ValueError(
                "no invariant base point: 0 is outside the moment polytope "
                "(the polarization admits no invariant section)"
            )
        return lam
    # parametrize the slice and take the vertex centroid
    slice_hs = []
    for n, b in poly.halfspaces:
        slice_hs.append((tuple(dot(n, z) for z in z_basis), b))
    from .polytope import vertices_from_halfspaces

    try:
        tverts = vertices_from_halfspaces(slice_hs, len(z_basis))
    except EmptyRegionError:
        raise ValueError("no invariant base point: the invariant slice is empty")
    centroid_t = tuple(
        sum((tv[i] for tv in tverts), Q(0)) / len(tverts) for i in range(len(z_basis))
    )
    lam = zero_vec(r)
    for c, z in zip(centroid_t, z_basis):
        lam = vadd(lam, vscale(c, z))
    return lam


def _validate_lambda0(lam: Vec, z_basis, poly: RationalPolytope) -> None:
    if not poly.contains(lam):
        raise ValueError("lambda0 override is outside the moment polytope")
    if z_basis:
        from .linalg import solve, transpose as tr

        if solve(tr(tuple(z_basis)), lam) is None:
            raise ValueError("lambda0 override is not Weyl-invariant")
    elif not is_zero_vec(lam):
        raise ValueError("lambda0 override must be 0 when the slice is a point")


def delta_tilde_pieces(
    pv: PolarizedVariety,
    poly: Optional[RationalPolytope] = None,
    lam: Optional[Vec] = None,
) -> Tuple[Tuple[int, RationalPolytope], ...]:
    """Subdivision pieces over the ray facets: (ray index, piece).  A ray
    whose halfspace is not a facet contributes nothing."""
    if poly is None:
        poly = moment_polytope(pv)
    if lam is None:
        lam = lambda0(pv, poly)
    pieces = []
    for i in range(len(pv.rays)):
        tag = f"ray:{i}"
        if tag not in poly.facet_tags:
            continue
        idx = poly.facet_tags.index(tag)
        n, b = poly.halfspaces[idx]
        if dot(n, lam) == b:
            raise ValueError(f"base point lies on the facet of ray {i}")
        pieces.append((i, cone_over_facet(poly, lam, idx)))
    return tuple(pieces)


@dataclass(frozen=True)
class AmplenessReport:
    ample: bool
    reasons: Tuple[str, ...]
    cone_vertices: Tuple[Tuple[Vec, ...], ...]


def _angle_sorted(rays: List[Vec]) -> List[Vec]:
    from functools import cmp_to_key

    def half(u):
        return 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1

    def cmp(u, v):
        hu, hv = half(u), half(v)
        if hu != hv:
            return -1 if hu < hv else 1
        cross = u[0] * v[1] - u[1] * v[0]
        if cross > 0:
            return -1
        if cross < 0:
            return 1
        return 0

    return sorted(rays, key=cmp_to_key(cmp))


def _in_cone(d: Vec, gens: Tuple[Vec, ...]) -> bool:
    if len(gens) == 1:
        g = gens[0]
        lam = None
        for a, b in zip(d, g):
            if b != 0:
                lam = a / b
                break
        if lam is None or lam < 0:
            return is_zero_vec(d)
        return tuple(lam * b for b in g) == tuple(d)
    if len(gens) == 2:
        g1, g2 = gens
        denom = g1[0] * g2[1] - g1[1] * g2[0]
        if denom == 0:
            return _in_cone(d, (g1,)) or _in_cone(d, (g2,))
        c1 = (d[0] * g2[1] - d[1] * g2[0]) / denom
        c2 = (g1[0] * d[1] - g1[1] * d[0]) / denom
        return c1 >= 0 and c2 >= 0
    raise NotImplementedError("cone membership beyond rank 2")


def is_ample(pv: PolarizedVariety) -> AmplenessReport:
    """Exact ampleness certificate: the Weyl-saturated fan of the rays must
    cover the split space, the support data must pick a distinct vertex of
    the toric polytope on each maximal cone, and every color constraint
    must be strictly slack at the fundamental-cone vertices."""
    r = pv.datum.rank
    if r > 2:
        raise NotImplementedError("ampleness certificate implemented for rank <= 2")
    reasons: List[str] = []
    try:
        poly = moment_polytope(pv)
    except (EmptyRegionError, ValueError) as e:
        return AmplenessReport(False, (f"moment polytope: {e}",), ())
    from .polytope import _affine_rank

    if _affine_rank(list(poly.vertices)) < r:
        return AmplenessReport(False, ("moment polytope is degenerate",), ())
    try:
        tpoly = toric_polytope(pv)
    except ValueError as e:
        return AmplenessReport(False, (f"toric polytope: {e}",), ())
    if _affine_rank(list(tpoly.vertices)) < r:
        return AmplenessReport(False, ("toric polytope is degenerate",), ())

    # support values on the given rays must reproduce v
    for mu, v in zip(pv.rays, pv.v_values):
        if support_function(poly, vscale(Q(-1), mu)) != v:
            reasons.append(f"support function does not attain v on ray {mu}")

    # fundamental maximal cones from angle-sorted rays
    if r == 1:
        fundamental = [(mu,) for mu in pv.rays]
    else:
        rays_sorted = _angle_sorted([tuple(mu) for mu in pv.rays])
        toric_case = not pv.datum.classes
        fundamental = []
        if toric_case:
            if len(rays_sorted) < 3:
                return AmplenessReport(False, ("fan has too few rays",), ())
            for i in range(len(rays_sorted)):
                fundamental.append((rays_sorted[i], rays_sorted[(i + 1) % len(rays_sorted)]))
        else:
            for i in range(len(rays_sorted) - 1):
                fundamental.append((rays_sorted[i], rays_sorted[i + 1]))
            if len(rays_sorted) == 1:
                fundamental = [(rays_sorted[0],)]

    group = restricted_weyl_group(pv.datum)
    all_cones = set()
    fundamental_set = set()
    for gens in fundamental:
        fundamental_set.add(tuple(sorted(gens)))
        for w in group:
            img = tuple(sorted(tuple(dot(w[i], g) for i in range(r)) for g in gens))
            all_cones.add(img)

    # covering check on sampled directions inside the valuation-cone orbit
    samples = set()
    for gens in all_cones:
        for g in gens:
            samples.add(g)
        if len(gens) == 2:
            samples.add(vadd(gens[0], gens[1]))
    if r == 1:
        samples.update({(Q(1),), (Q(-1),)})
    else:
        samples.update(
            {
                (Q(1), Q(0)),
                (Q(0), Q(1)),
                (Q(-1), Q(0)),
                (Q(0), Q(-1)),
                (Q(1), Q(1)),
                (Q(1), Q(-1)),
                (Q(-1), Q(1)),
                (Q(-1), Q(-1)),
                (Q(2), Q(1)),
                (Q(1), Q(2)),
                (Q(-2), Q(-1)),
            }
        )
    for d in samples:
        if is_zero_vec(d):
            continue
        if not any(_in_cone(d, gens) for gens in all_cones):
            reasons.append(f"fan does not cover direction {d}")

    # distinct supporting vertex per maximal cone
    cone_vertices = []
    seen_vertices = {}
    for gens in sorted(all_cones):
        y = gens[0] if len(gens) == 1 else vadd(gens[0], gens[1])
        target = vscale(Q(-1), y)
        best = max(dot(target, v) for v in tpoly.vertices)
        argmax = [v for v in tpoly.vertices if dot(target, v) == best]
        if len(argmax) != 1:
            reasons.append(f"support is not simple on cone {gens}")
            continue
        m_c = argmax[0]
        for g in gens:
            sup_g = max(dot(vscale(Q(-1), g), v) for v in tpoly.vertices)
            if dot(vscale(Q(-1), g), m_c) != sup_g:
                reasons.append(f"support is not linear on cone {gens}")
        if m_c in seen_vertices and seen_vertices[m_c] != gens:
            reasons.append(f"cones {seen_vertices[m_c]} and {gens} share vertex {m_c}")
        seen_vertices[m_c] = gens
        cone_vertices.append((gens, m_c))
        if tuple(sorted(gens)) in fundamental_set:
            for label, point in expanded_colors(pv.datum):
                margin = dot(point, m_c) + pv.color_constant(label)
                if margin <= 0:
                    reasons.append(
                        f"color {label} is not strictly slack at vertex {m_c}"
                    )
    return AmplenessReport(
        ample=not reasons,
        reasons=tuple(reasons),
        cone_vertices=tuple((gens, (m,)) for gens, m in cone_vertices),
    )


@dataclass(frozen=True)
class AssumptionsReport:
    toroidal_facets_ok: bool
    ambient_walls_ok: bool
    cover_ok: bool
    multiplicity_ok: bool
    wall_counts: Tuple[Tuple[Vec, int], ...]
    details: Tuple[str, ...]

    @property
    def assumption_T(self) -> bool:
        return self.toroidal_facets_ok and self.cover_ok

    @property
    def assumption_R(self) -> bool:
        return self.multiplicity_ok


def check_assumptions(pv: PolarizedVariety) -> AssumptionsReport:
    """Structural checks behind the coercivity statement.

    First: every facet of the moment polytope meeting a restricted Weyl
    wall either lies in it or has its normal inside it, and the polytope
    stays strictly off the ambient walls outside the Levi; the subdivision
    pieces must tile the polytope exactly.  Second: at least two split
    positive roots restrict onto every wall the restricted system has.
    """
    datum = pv.datum
    poly = moment_polytope(pv)
    details: List[str] = []

    # unique restricted walls, keyed by the primitive ray of the class root
    walls = {}
    for cls in datum.classes:
        walls.setdefault(primitive_int_vec(cls.root), []).append(cls)

    toroidal_ok = True
    for i, (n, b) in enumerate(poly.halfspaces):
        fverts = poly.facet_vertices(i)
        for wall_root, classes in walls.items():
            co = classes[0].coroot_vec
            vals = [dot(co, v) for v in fverts]
            # touching a wall in a proper face (a chamber corner, say) is
            # harmless; only a transverse crossing breaks the reflection glue
            crosses = min(vals) < 0 < max(vals)
            inside = all(v == 0 for v in vals)
            normal_in_wall = dot(wall_root, n) == 0
            if crosses and not (inside or normal_in_wall):
                toroidal_ok = False
                details.append(
                    f"facet {poly.facet_tags[i]} crosses wall {wall_root} "
                    "without lying in it"
                )

    ambient_ok = True
    for a in datum.phi_Qu:
        av = coroot(datum.system, a)
        p_av = datum.as_coords(datum.p_part(av))
        base = dot(pv.chi, av)
        vals = [base + dot(v, p_av) for v in poly.vertices]
        if min(vals) < 0:
            ambient_ok = False
            details.append(f"polytope crosses the ambient wall of {a}")
        elif min(vals) == 0:
            details.append(f"polytope touches the ambient wall of {a}")

    cover_ok = True
    try:
        pieces = delta_tilde_pieces(pv, poly)
        total = sum((volume(p) for _, p in pieces), Q(0))
        if total != volume(poly):
            cover_ok = False
            details.append(f"pieces cover {total} of {volume(poly)}")
    except ValueError as e:
        cover_ok = False
        details.append(f"subdivision failed: {e}")

    wall_counts = []
    multiplicity_ok = True
    for wall_root in sorted(walls):
        count = sum(c.multiplicity for c in walls[wall_root])
        wall_counts.append((wall_root, count))
        if count < 2:
            multiplicity_ok = False
            details.append(f"wall {wall_root} carries only {count} split root(s)")

    return AssumptionsReport(
        toroidal_facets_ok=toroidal_ok,
        ambient_walls_ok=ambient_ok,
        cover_ok=cover_ok,
        multiplicity_ok=multiplicity_ok,
        wall_counts=tuple(wall_counts),
        details=tuple(details),
    )
