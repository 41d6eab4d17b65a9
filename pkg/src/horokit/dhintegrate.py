"""Exact integration against the Duistermaat-Heckman density.

The density is a product of affine-linear forms on the moment polytope,
one per root outside the fixed part of the Levi.  Everything here is
rational arithmetic: polytopes are triangulated, each simplex converts
the integrand to barycentric coordinates where a product of linear forms
expands by dynamic programming and integrates by the factorial formula.
"""

from dataclasses import dataclass
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .linalg import Q, Vec, det, dot, vscale
from .linebundle import PolarizedVariety, moment_polytope, variety_dimension
from .polytope import RationalPolytope, _affine_rank, simplex_volume, triangulate
from .rootdata import coroot

Monomial = Tuple[Tuple[int, ...], Q]


@dataclass(frozen=True)
class PolyForm:
    """Polynomial in the affine coordinates of the integration plane,
    kept in canonical sorted form with no zero coefficients."""

    dim: int
    terms: Tuple[Monomial, ...]

    def __call__(self, point: Vec) -> Q:
        total = Q(0)
        for expo, c in self.terms:
            v = c
            for x, e in zip(point, expo):
                v *= x**e
            total += v
        return total


def poly_form(dim: int, terms: Sequence[Tuple[Sequence[int], Q]]) -> PolyForm:
    acc: Dict[Tuple[int, ...], Q] = {}
    for expo, c in terms:
        e = tuple(int(x) for x in expo)
        if len(e) != dim:
            raise ValueError("exponent dimension mismatch")
        acc[e] = acc.get(e, Q(0)) + Q(c)
    return PolyForm(
        dim=dim, terms=tuple(sorted((e, c) for e, c in acc.items() if c != 0))
    )


def poly_const(dim: int, c: Q) -> PolyForm:
    return poly_form(dim, [((0,) * dim, Q(c))])


def poly_coordinate(dim: int, j: int) -> PolyForm:
    e = [0] * dim
    e[j] = 1
    return poly_form(dim, [(tuple(e), Q(1))])


def poly_add(p: PolyForm, q: PolyForm) -> PolyForm:
    return poly_form(p.dim, list(p.terms) + list(q.terms))


def poly_scale(c: Q, p: PolyForm) -> PolyForm:
    return poly_form(p.dim, [(e, Q(c) * a) for e, a in p.terms])


def poly_mul(p: PolyForm, q: PolyForm) -> PolyForm:
    terms = []
    for e1, c1 in p.terms:
        for e2, c2 in q.terms:
            terms.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
    return poly_form(p.dim, terms)


AffineForm = Tuple[Q, Vec]  # (constant, linear part): value = c + <l, m>


@dataclass(frozen=True)
class DHMeasure:
    dim: int
    forms: Tuple[AffineForm, ...]
    chi: Vec
    lattice_normalization: Q


def build_dh_measure(pv: PolarizedVariety) -> DHMeasure:
    """One linear form per root outside the sigma-fixed Levi part:
    q(coroot)/rho(coroot) as an affine function of the polytope
    coordinate, with the isotropy character supplying the offset."""
    datum = pv.datum
    forms: List[AffineForm] = []
    for a in tuple(datum.phi_Qu) + tuple(datum.phi_s_plus):
        av = coroot(datum.system, a)
        denom = dot(datum.rho, av)
        if denom == 0:
            raise ValueError(f"root {a} pairs to zero against rho")
        lin = datum.as_coords(datum.p_part(av))
        forms.append((dot(pv.chi, av) / denom, vscale(Q(1) / denom, lin)))
    if datum.lattice_M is None:
        raise ValueError("datum has no spherical lattice; integration undefined")
    d = det(datum.lattice_M)
    if d == 0:
        raise ValueError("degenerate spherical lattice")
    return DHMeasure(
        dim=datum.rank,
        forms=tuple(forms),
        chi=pv.chi,
        lattice_normalization=Q(1) / abs(d),
    )


def integrate_monomial_simplex(
    simplex: Sequence[Vec], exponents: Sequence[int]
) -> Q:
    """Exact integral of a bare coordinate monomial over a simplex, via
    barycentric expansion and the factorial formula."""
    verts = tuple(tuple(map(Q, v)) for v in simplex)
    r = len(verts) - 1
    vol = simplex_volume(verts)
    if vol == 0:
        raise ValueError("degenerate simplex")
    table: Dict[Tuple[int, ...], Q] = {(0,) * (r + 1): Q(1)}
    for j, a in enumerate(exponents):
        coeffs = tuple(v[j] for v in verts)
        for _ in range(int(a)):
            table = _multiply_linear(table, coeffs)
    return _factorial_sum(table, vol, r)


def _multiply_linear(
    table: Dict[Tuple[int, ...], Q], coeffs: Tuple[Q, ...]
) -> Dict[Tuple[int, ...], Q]:
    out: Dict[Tuple[int, ...], Q] = {}
    for e, c in table.items():
        for i, f in enumerate(coeffs):
            if f == 0:
                continue
            e2 = list(e)
            e2[i] += 1
            key = tuple(e2)
            out[key] = out.get(key, Q(0)) + c * f
    return out


def _factorial_sum(table: Dict[Tuple[int, ...], Q], vol: Q, r: int) -> Q:
    total = Q(0)
    for e, c in table.items():
        num = 1
        for a in e:
            num *= factorial(a)
        total += c * Q(num, factorial(r + sum(e)))
    return total * vol * factorial(r)


def _poly_to_barycentric(
    poly: PolyForm, verts: Tuple[Vec, ...]
) -> Dict[Tuple[int, ...], Q]:
    r = len(verts) - 1
    table: Dict[Tuple[int, ...], Q] = {}
    for expo, c in poly.terms:
        t: Dict[Tuple[int, ...], Q] = {(0,) * (r + 1): c}
        for j, a in enumerate(expo):
            coeffs = tuple(v[j] for v in verts)
            for _ in range(a):
                t = _multiply_linear(t, coeffs)
        for e, v in t.items():
            table[e] = table.get(e, Q(0)) + v
    return table


def _check_region(region: RationalPolytope, measure: DHMeasure) -> None:
    for c, lin in measure.forms:
        for v in region.vertices:
            if c + dot(lin, v) < 0:
                raise ValueError(
                    f"density form is negative at vertex {v}; "
                    "region leaves the positive chamber"
                )


def integrate_dh(
    region: RationalPolytope, poly: PolyForm, measure: DHMeasure
) -> Q:
    """Exact integral of poly times the density product over the region,
    including the lattice normalization of the Lebesgue measure."""
    if poly.dim != measure.dim or region.dim != measure.dim:
        raise ValueError("dimension mismatch")
    if not poly.terms:
        return Q(0)
    _check_region(region, measure)
    if _affine_rank(list(region.vertices)) < region.dim:
        return Q(0)
    total = Q(0)
    for simplex in triangulate(region):
        vol = simplex_volume(simplex)
        if vol == 0:
            continue
        table = _poly_to_barycentric(poly, simplex)
        for c, lin in measure.forms:
            coeffs = tuple(c + dot(lin, v) for v in simplex)
            table = _multiply_linear(table, coeffs)
        total += _factorial_sum(table, vol, region.dim)
    return total * measure.lattice_normalization


def dh_gradient_pairing(
    region: RationalPolytope,
    poly: PolyForm,
    direction: Vec,
    measure: DHMeasure,
    datum=None,
) -> Q:
    """Exact integral of poly times the derivative of the density along an
    ambient covector direction: a sum over roots of the excluded-factor
    products, never a division by a vanishing form."""
    if datum is None:
        raise ValueError("datum is required to pair the direction with coroots")
    roots = tuple(datum.phi_Qu) + tuple(datum.phi_s_plus)
    if len(roots) != len(measure.forms):
        raise ValueError("measure does not match datum")
    if not poly.terms:
        return Q(0)
    _check_region(region, measure)
    if _affine_rank(list(region.vertices)) < region.dim:
        return Q(0)
    scales = []
    for a in roots:
        av = coroot(datum.system, a)
        scales.append(dot(direction, av) / dot(datum.rho, av))
    total = Q(0)
    for simplex in triangulate(region):
        vol = simplex_volume(simplex)
        if vol == 0:
            continue
        base = _poly_to_barycentric(poly, simplex)
        all_coeffs = [
            tuple(c + dot(lin, v) for v in simplex) for c, lin in measure.forms
        ]
        for k, s in enumerate(scales):
            if s == 0:
                continue
            table = dict(base)
            for j, coeffs in enumerate(all_coeffs):
                if j == k:
                    continue
                table = _multiply_linear(table, coeffs)
            total += s * _factorial_sum(table, vol, region.dim)
    return total * measure.lattice_normalization


def density_polynomial(measure: DHMeasure) -> PolyForm:
    """The density product expanded to an explicit polynomial."""
    p = poly_const(measure.dim, Q(1))
    for c, lin in measure.forms:
        factor = poly_form(
            measure.dim,
            [((0,) * measure.dim, c)]
            + [
                (tuple(1 if j == i else 0 for j in range(measure.dim)), a)
                for i, a in enumerate(lin)
                if a != 0
            ],
        )
        p = poly_mul(p, factor)
    return p


def gradient_polynomial(measure: DHMeasure, direction: Vec, datum) -> PolyForm:
    """The density derivative along an ambient covector, expanded."""
    roots = tuple(datum.phi_Qu) + tuple(datum.phi_s_plus)
    total = poly_const(measure.dim, Q(0))
    for k, a in enumerate(roots):
        av = coroot(datum.system, a)
        s = dot(direction, av) / dot(datum.rho, av)
        if s == 0:
            continue
        p = poly_const(measure.dim, s)
        for j, (c, lin) in enumerate(measure.forms):
            if j == k:
                continue
            factor = poly_form(
                measure.dim,
                [((0,) * measure.dim, c)]
                + [
                    (tuple(1 if jj == i else 0 for jj in range(measure.dim)), b)
                    for i, b in enumerate(lin)
                    if b != 0
                ],
            )
            p = poly_mul(p, factor)
        total = poly_add(total, p)
    return total


def integrate_lebesgue(
    region: RationalPolytope, poly: PolyForm, measure: DHMeasure
) -> Q:
    """Exact integral of a plain polynomial with only the lattice
    normalization applied (no density factors)."""
    if _affine_rank(list(region.vertices)) < region.dim:
        return Q(0)
    total = Q(0)
    for simplex in triangulate(region):
        vol = simplex_volume(simplex)
        if vol == 0:
            continue
        table = _poly_to_barycentric(poly, simplex)
        total += _factorial_sum(table, vol, region.dim)
    return total * measure.lattice_normalization


def barycenter_numerator(
    subregions: Sequence[RationalPolytope],
    piece_polys: Sequence[PolyForm],
    measure: DHMeasure,
) -> Vec:
    """Componentwise first moments of the given polynomial pieces over
    their regions (the density is expected to be absorbed in the pieces)."""
    if len(subregions) != len(piece_polys):
        raise ValueError("one polynomial piece per subregion")
    out = [Q(0)] * measure.dim
    for region, piece in zip(subregions, piece_polys):
        for j in range(measure.dim):
            mono = poly_coordinate(measure.dim, j)
            out[j] += integrate_lebesgue(region, poly_mul(mono, piece), measure)
    return tuple(out)


def degree(pv: PolarizedVariety) -> Q:
    """Top self-intersection number of the polarization: n! times the
    density integral over the moment polytope."""
    measure = build_dh_measure(pv)
    poly = moment_polytope(pv)
    n = variety_dimension(pv.datum)
    return factorial(n) * integrate_dh(poly, poly_const(pv.datum.rank, Q(1)), measure)
