"""Decision procedures on a polarized horosymmetric variety: the average
scalar curvature, the piecewise special-function data, positivity of the
combinatorial F-function, barycenter and coercivity test vector, the
log-Kaehler-Einstein verdict, the log-Futaki obstruction, and exact
one-parameter family scans.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .dhintegrate import (
    DHMeasure,
    PolyForm,
    build_dh_measure,
    density_polynomial,
    dh_gradient_pairing,
    gradient_polynomial,
    integrate_dh,
    poly_add,
    poly_const,
    poly_coordinate,
    poly_form,
    poly_mul,
    poly_scale,
)
from .linalg import Q, Vec, dot, kernel_basis, vscale, vsub, zero_vec
from .linebundle import (
    AssumptionsReport,
    PolarizedVariety,
    anticanonical_coefficients,
    check_assumptions,
    delta_tilde_pieces,
    lambda0,
    moment_polytope,
    variety_dimension,
)
from .polytope import (
    DualChamberReport,
    RationalPolytope,
    rel_interior_dual_chamber,
    simplex_volume,
    support_function,
    triangulate,
)
from .rootdata import coroot


def lambda_Y(pv: PolarizedVariety, ray_index: int) -> Q:
    """Piecewise slope constant for one boundary divisor, as the quotient
    (n_Y - c_Y)/v(mu_Y); cross-checked against the support-function route."""
    v = pv.v_values[ray_index]
    if v == 0:
        raise ValueError("v(mu_Y) = 0: the slope constant is undefined")
    n_y = anticanonical_coefficients(pv)[ray_index]
    value = (n_y - pv.boundary[ray_index]) / v
    poly = moment_polytope(pv)
    sup = support_function(poly, vscale(Q(-1), pv.rays[ray_index]))
    if sup != v:
        raise ValueError(
            f"support function gives {sup} on ray {ray_index}, data says {v}; "
            "the special value is not attained"
        )
    return value


@dataclass(frozen=True)
class FPiece:
    ray_index: int
    constant: Q  # (n+1) * Lambda_Y - mean scalar curvature
    residues: Tuple[Q, ...]  # per density form, coefficient of 1/form


@dataclass(frozen=True)
class _Context:
    pv: PolarizedVariety
    measure: DHMeasure
    poly: RationalPolytope
    base_point: Vec
    pieces: Tuple[Tuple[int, RationalPolytope], ...]
    lambdas: Tuple[Q, ...]
    n: int
    B: Q
    s_bar: Q


def _build_context(pv: PolarizedVariety) -> _Context:
    measure = build_dh_measure(pv)
    poly = moment_polytope(pv)
    lam = lambda0(pv, poly)
    pieces = delta_tilde_pieces(pv, poly, lam)
    lambdas = tuple(lambda_Y(pv, i) for i in range(len(pv.rays)))
    n = variety_dimension(pv.datum)
    one = poly_const(pv.datum.rank, Q(1))
    B = integrate_dh(poly, one, measure)
    if B <= 0:
        raise ValueError("degenerate polytope: density integral is not positive")
    num = Q(0)
    for i, piece in pieces:
        direction = vsub(pv.datum.chi_ac, vscale(lambdas[i], pv.chi))
        num += n * lambdas[i] * integrate_dh(piece, one, measure)
        num += dh_gradient_pairing(piece, one, direction, measure, datum=pv.datum)
    return _Context(
        pv=pv,
        measure=measure,
        poly=poly,
        base_point=lam,
        pieces=pieces,
        lambdas=lambdas,
        n=n,
        B=B,
        s_bar=num / B,
    )


def s_bar_theta(pv: PolarizedVariety) -> Q:
    """Average scalar curvature of the polarization, exactly."""
    return _build_context(pv).s_bar


def _piece_data(ctx: _Context, ray_index: int) -> FPiece:
    pv = ctx.pv
    datum = pv.datum
    direction = vsub(datum.chi_ac, vscale(ctx.lambdas[ray_index], pv.chi))
    residues = []
    for a in tuple(datum.phi_Qu) + tuple(datum.phi_s_plus):
        av = coroot(datum.system, a)
        residues.append(dot(direction, av) / dot(datum.rho, av))
    return FPiece(
        ray_index=ray_index,
        constant=(ctx.n + 1) * ctx.lambdas[ray_index] - ctx.s_bar,
        residues=tuple(residues),
    )


def f_piece_poly(pv: PolarizedVariety, ray_index: int) -> PolyForm:
    """The product of the piecewise F-function with the density, expanded:
    each residue term cancels its own density factor, so the result is an
    honest polynomial."""
    ctx = _build_context(pv)
    piece = _piece_data(ctx, ray_index)
    direction = vsub(pv.datum.chi_ac, vscale(ctx.lambdas[ray_index], pv.chi))
    out = poly_scale(piece.constant, density_polynomial(ctx.measure))
    return poly_add(out, gradient_polynomial(ctx.measure, direction, pv.datum))


@dataclass(frozen=True)
class FPositivity:
    status: str  # "positive" | "negative" | "inconclusive"
    witness: Optional[Vec]
    notes: Tuple[str, ...]

    @property
    def verdict(self) -> bool:
        return self.status == "positive"


def _f_value(piece: FPiece, ctx: _Context, point: Vec) -> Optional[Q]:
    """F at a point, or None when some density form vanishes there."""
    total = piece.constant
    for s, (c, lin) in zip(piece.residues, ctx.measure.forms):
        if s == 0:
            continue
        ell = c + dot(lin, point)
        if ell == 0:
            return None
        total += s / ell
    return total


def _certify_cell(
    piece: FPiece, ctx: _Context, simplex: Tuple[Vec, ...], depth: int
) -> Tuple[str, Optional[Vec]]:
    vals = []
    for v in simplex:
        f = _f_value(piece, ctx, v)
        if f is not None:
            vals.append((f, v))
    for f, v in vals:
        if f <= 0:
            return "negative", v
    # interval bound: F is monotone in each form value, and each form is
    # affine, so its range on the cell is the vertex hull
    bound = piece.constant
    unbounded = False
    for s, (c, lin) in zip(piece.residues, ctx.measure.forms):
        if s == 0:
            continue
        ells = [c + dot(lin, v) for v in simplex]
        if s > 0:
            hi = max(ells)
            if hi > 0:
                bound += s / hi
        else:
            lo = min(ells)
            if lo <= 0:
                unbounded = True
            else:
                bound += s / lo
    if not unbounded and bound > 0:
        return "positive", None
    if depth == 0:
        return "inconclusive", None
    centroid = tuple(
        sum((v[j] for v in simplex), Q(0)) / len(simplex)
        for j in range(len(simplex[0]))
    )
    fc = _f_value(piece, ctx, centroid)
    if fc is not None and fc <= 0:
        return "negative", centroid
    worst = "positive"
    for k in range(len(simplex)):
        sub = tuple(centroid if i == k else v for i, v in enumerate(simplex))
        if simplex_volume(sub) == 0:
            continue
        status, witness = _certify_cell(piece, ctx, sub, depth - 1)
        if status == "negative":
            return status, witness
        if status == "inconclusive":
            worst = "inconclusive"
    return worst, None


def check_F_positive(pv: PolarizedVariety, depth: int = 6) -> FPositivity:
    """Positivity of the piecewise F-function away from the chamber walls.
    Constant pieces are decided exactly; pieces with residue terms get an
    interval certificate refined by recursive subdivision, with an honest
    inconclusive state at exhausted depth."""
    ctx = _build_context(pv)
    notes: List[str] = []
    overall = "positive"
    for i, region in ctx.pieces:
        piece = _piece_data(ctx, i)
        if all(s == 0 for s in piece.residues):
            if piece.constant <= 0:
                interior = tuple(
                    sum((v[j] for v in region.vertices), Q(0)) / len(region.vertices)
                    for j in range(region.dim)
                )
                notes.append(f"piece {i}: constant {piece.constant} <= 0")
                return FPositivity("negative", interior, tuple(notes))
            notes.append(f"piece {i}: constant {piece.constant} > 0, exact")
            continue
        piece_status = "positive"
        for simplex in triangulate(region):
            status, witness = _certify_cell(piece, ctx, simplex, depth)
            if status == "negative":
                notes.append(f"piece {i}: F <= 0 at {witness}")
                return FPositivity("negative", witness, tuple(notes))
            if status == "inconclusive":
                piece_status = "inconclusive"
        notes.append(f"piece {i}: {piece_status} (certified grid)")
        if piece_status == "inconclusive":
            overall = "inconclusive"
    return FPositivity(overall, None, tuple(notes))


@dataclass(frozen=True)
class CoercivityReport:
    lambda_Y: Tuple[Q, ...]
    s_bar_theta: Q
    F_pieces: Tuple[FPiece, ...]
    A: Q
    B: Q
    bar_vector: Vec  # barVec / A, in polytope coordinates
    test_vector: Vec
    simple_root_coeffs: Tuple[Q, ...]
    verdict_F_positive: bool
    verdict_barycenter: bool
    verdict: bool
    f_status: str
    base_point: Vec
    boundary: Tuple[Q, ...]
    assumption_T: bool
    assumption_R: bool
    witnesses: Tuple[str, ...]


def coercivity_report(pv: PolarizedVariety, depth: int = 6) -> CoercivityReport:
    """Full coercivity decision: exact A, barycenter, test vector
    w = min_Y(Lambda_Y) * (bar - chi)|_{a_s} - (sum of relevant roots),
    and the conjunction verdict."""
    ctx = _build_context(pv)
    datum = pv.datum
    r = datum.rank
    one = poly_const(r, Q(1))
    fpos = check_F_positive(pv, depth)
    assumptions = check_assumptions(pv)

    pieces_data = tuple(_piece_data(ctx, i) for i, _ in ctx.pieces)
    A = Q(0)
    bar_num = [Q(0)] * r
    for (i, region), piece in zip(ctx.pieces, pieces_data):
        direction = vsub(datum.chi_ac, vscale(ctx.lambdas[i], pv.chi))
        A += piece.constant * integrate_dh(region, one, ctx.measure)
        A += dh_gradient_pairing(region, one, direction, ctx.measure, datum=datum)
        for j in range(r):
            mono = poly_coordinate(r, j)
            bar_num[j] += piece.constant * integrate_dh(region, mono, ctx.measure)
            bar_num[j] += dh_gradient_pairing(
                region, mono, direction, ctx.measure, datum=datum
            )
    witnesses: List[str] = list(fpos.notes)
    if fpos.verdict and A <= 0:
        raise RuntimeError("internal: A <= 0 despite positive F certificate")
    if A == 0:
        raise ValueError("total F-weighted mass vanishes; test vector undefined")
    bar = tuple(x / A for x in bar_num)
    mu_min = min(ctx.lambdas)
    w = vsub(vscale(mu_min, bar), datum.two_rho_H)
    chamber = rel_interior_dual_chamber(w, datum)
    verdict = (
        fpos.verdict
        and chamber.verdict
        and assumptions.assumption_T
        and assumptions.assumption_R
    )
    witnesses.extend(assumptions.details)
    return CoercivityReport(
        lambda_Y=ctx.lambdas,
        s_bar_theta=ctx.s_bar,
        F_pieces=pieces_data,
        A=A,
        B=ctx.B,
        bar_vector=bar,
        test_vector=w,
        simple_root_coeffs=chamber.coefficients,
        verdict_F_positive=fpos.verdict,
        verdict_barycenter=chamber.verdict,
        verdict=verdict,
        f_status=fpos.status,
        base_point=ctx.base_point,
        boundary=pv.boundary,
        assumption_T=assumptions.assumption_T,
        assumption_R=assumptions.assumption_R,
        witnesses=tuple(witnesses),
    )


def coercivity_test_vector(pv: PolarizedVariety) -> Tuple[Vec, bool]:
    report = coercivity_report(pv)
    return report.test_vector, report.verdict_barycenter


@dataclass(frozen=True)
class KEReport:
    bar_vector: Vec
    test_vector: Vec
    chamber: DualChamberReport
    verdict: bool
    assumption_T: bool
    assumption_R: bool


def check_ke(pv: PolarizedVariety) -> KEReport:
    """Log-Kaehler-Einstein criterion for the log-anticanonical
    polarization: the plain density barycenter, shifted by the sum of the
    relevant roots, must land in the relative interior of the dual cone of
    the positive restricted chamber."""
    n_y = anticanonical_coefficients(pv)
    for i, v in enumerate(pv.v_values):
        if v != n_y[i] - pv.boundary[i]:
            raise ValueError(
                f"ray {i}: v = {v} but the log-anticanonical value is "
                f"{n_y[i] - pv.boundary[i]}; not an anticanonical polarization"
            )
    if pv.chi != pv.datum.chi_ac:
        raise ValueError("chi differs from the anticanonical character")
    measure = build_dh_measure(pv)
    poly = moment_polytope(pv)
    r = pv.datum.rank
    one = poly_const(r, Q(1))
    B = integrate_dh(poly, one, measure)
    if B <= 0:
        raise ValueError("degenerate polytope")
    bar = tuple(
        integrate_dh(poly, poly_coordinate(r, j), measure) / B for j in range(r)
    )
    w = vsub(bar, pv.datum.two_rho_H)
    chamber = rel_interior_dual_chamber(w, pv.datum)
    assumptions = check_assumptions(pv)
    return KEReport(
        bar_vector=bar,
        test_vector=w,
        chamber=chamber,
        verdict=chamber.verdict,
        assumption_T=assumptions.assumption_T,
        assumption_R=assumptions.assumption_R,
    )


def central_directions(datum) -> Tuple[Vec, ...]:
    """Basis of the subspace of a_s killed by every restricted root."""
    roots = tuple(c.root for c in datum.classes)
    if not roots:
        return tuple(
            tuple(Q(1) if j == i else Q(0) for j in range(datum.rank))
            for i in range(datum.rank)
        )
    return tuple(kernel_basis(roots))


def log_futaki(pv: PolarizedVariety, b: Vec) -> Q:
    """Exact log-Futaki obstruction along a central direction b of a_s
    (coordinates in the split basis).  Vanishing for every central b is
    the invariance condition for the weighted scalar curvature."""
    datum = pv.datum
    r = datum.rank
    b = tuple(map(Q, b))
    if len(b) != r:
        raise ValueError("direction dimension mismatch")
    for cls in datum.classes:
        if dot(cls.root, b) != 0:
            raise ValueError(f"direction {b} is outside the central subspace")
    ctx = _build_context(pv)
    # m(b) as a polynomial in the polytope coordinates
    pairing = poly_form(r, [(tuple(1 if j == i else 0 for j in range(r)), c)
                            for i, c in enumerate(b) if c != 0])
    if not pairing.terms and any(c != 0 for c in b):
        raise ValueError("degenerate pairing polynomial")
    total = Q(0)
    chi_diff = vsub(datum.chi_ac, pv.chi)
    for (i, region) in ctx.pieces:
        const = (ctx.n + 1) * ctx.lambdas[i] - ctx.s_bar
        term = poly_scale(Q(-2) * const, pairing)
        total += integrate_dh(region, term, ctx.measure)
        total += dh_gradient_pairing(
            region, poly_scale(Q(-2), pairing), chi_diff, ctx.measure, datum=datum
        )
    b_amb = datum.as_embed(b)
    qu_sum = sum((dot(a, b_amb) for a in datum.phi_Qu), Q(0))
    if qu_sum != 0:
        total += integrate_dh(
            ctx.poly, poly_const(r, 2 * qu_sum), ctx.measure
        )
    return total


@dataclass(frozen=True)
class ScanRow:
    param: Q
    report: Optional[CoercivityReport]
    error: Optional[str]

    @property
    def verdict(self) -> Optional[bool]:
        return self.report.verdict if self.report is not None else None


@dataclass(frozen=True)
class ScanResult:
    rows: Tuple[ScanRow, ...]
    brackets: Tuple[Tuple[Q, Q], ...]  # consecutive params where verdict flips


def scan_family(
    family: Callable[[Q], PolarizedVariety],
    start: Q,
    stop: Q,
    step: Q,
    depth: int = 6,
) -> ScanResult:
    """Evaluate the coercivity report along an open parameter interval;
    per-row errors are recorded and the scan continues."""
    start, stop, step = Q(start), Q(stop), Q(step)
    if step <= 0:
        raise ValueError("step must be positive")
    rows: List[ScanRow] = []
    p = start + step
    while p < stop:
        try:
            rows.append(ScanRow(param=p, report=coercivity_report(family(p), depth),
                                error=None))
        except (ValueError, NotImplementedError) as e:
            rows.append(ScanRow(param=p, report=None, error=str(e)))
        p += step
    brackets: List[Tuple[Q, Q]] = []
    prev: Optional[ScanRow] = None
    for row in rows:
        if row.verdict is None:
            prev = None
            continue
        if prev is not None and prev.verdict != row.verdict:
            brackets.append((prev.param, row.param))
        prev = row
    return ScanResult(rows=tuple(rows), brackets=tuple(brackets))
