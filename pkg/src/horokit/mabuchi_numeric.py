"""Floating-point companion to the exact engine.

Everything in here evaluates analytic quantities attached to a polarized
variety at actual numbers: Legendre transforms of invariant potentials,
the Monge-Ampere density, the scalar curvature, the energy functionals.
Exact data (polytopes, densities, averages) always comes from the
rational modules; floats only enter through the potential and the
quadrature.

Coordinates follow the exact engine: points of the moment polytope carry
coordinates in the basis dual to the split Cartan basis, potentials are
functions of the split Cartan coordinates themselves, so gradients of
potentials and polytope points live in the same coordinate system and
the pairing between them is the honest dot product.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .criteria import central_directions, lambda_Y, s_bar_theta
from .dhintegrate import build_dh_measure, integrate_dh, poly_const
from .linalg import dot
from .linebundle import (
    PolarizedVariety,
    check_assumptions,
    delta_tilde_pieces,
    lambda0,
    moment_polytope,
    toric_polytope,
    variety_dimension,
)
from .polytope import RationalPolytope, polytope_from_vertices, triangulate
from .restricted import HorosymmetricDatum, restricted_weyl_group
from .rootdata import coroot

Array = np.ndarray


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class ToricPotential:
    """A smooth strictly convex invariant function on the split Cartan.

    value/gradient/hessian are callables on coordinate vectors.  image is
    the exact closure of the gradient image when the potential is
    attached to a polarization (minus twice the full invariant polytope);
    None means unconstrained, as for the flat quadratic model.
    """

    name: str
    dim: int
    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    hessian: Callable[[Array], Array]
    image: Optional[RationalPolytope] = None

    def __call__(self, a: Sequence[float]) -> float:
        return float(self.value(np.asarray(a, dtype=float)))


def _default_samples(dim: int) -> Array:
    rng = np.random.default_rng(1729)
    box = rng.uniform(-1.5, 1.5, size=(24, dim))
    return np.vstack([np.zeros((1, dim)), box])


def make_potential(
    name: str,
    dim: int,
    value: Callable[[Array], float],
    gradient: Callable[[Array], Array],
    hessian: Callable[[Array], Array],
    image: Optional[RationalPolytope] = None,
    datum: Optional[HorosymmetricDatum] = None,
    samples: Optional[Sequence[Sequence[float]]] = None,
) -> ToricPotential:
    """Bundle the callables after sanity checks at sample points.

    Checks strict convexity (Cholesky of the Hessian) everywhere and,
    when a datum is supplied, invariance of the value under the
    restricted Weyl group within 1e-10.
    """
    pts = (
        np.asarray(samples, dtype=float)
        if samples is not None
        else _default_samples(dim)
    )
    for a in pts:
        h = np.asarray(hessian(a), dtype=float)
        if h.shape != (dim, dim):
            raise ValueError(f"hessian shape {h.shape} at {a}, wanted {(dim, dim)}")
        try:
            np.linalg.cholesky(0.5 * (h + h.T))
        except np.linalg.LinAlgError:
            raise ValueError(f"potential {name!r} is not strictly convex at {a}")
    if datum is not None:
        group = restricted_weyl_group(datum)
        mats = [np.array([[float(x) for x in row] for row in w]) for w in group]
        for a in pts:
            va = float(value(a))
            for w in mats:
                vb = float(value(w @ a))
                if abs(va - vb) > 1e-10 * (1.0 + abs(va)):
                    raise ValueError(
                        f"potential {name!r} is not Weyl invariant at {a}: "
                        f"{va} vs {vb}"
                    )
    return ToricPotential(
        name=name, dim=dim, value=value, gradient=gradient, hessian=hessian,
        image=image,
    )


def quadratic_potential(
    matrix: Sequence[Sequence[float]],
    linear: Optional[Sequence[float]] = None,
    constant: float = 0.0,
) -> ToricPotential:
    """Flat model a |-> a.M.a/2 + l.a + c with M positive definite."""
    m = np.asarray(matrix, dtype=float)
    dim = m.shape[0]
    lin = np.zeros(dim) if linear is None else np.asarray(linear, dtype=float)

    def value(a: Array) -> float:
        return float(0.5 * a @ m @ a + lin @ a + constant)

    def gradient(a: Array) -> Array:
        return m @ a + lin

    def hessian(a: Array) -> Array:
        return m.copy()

    return make_potential("quadratic", dim, value, gradient, hessian)


def support_smoothing_potential(
    pv: PolarizedVariety, temperature: float = 0.25
) -> ToricPotential:
    """Log-sum-exp smoothing of the support function of the gradient image.

    u(a) = T ln sum_v exp(v.a / T) over the vertices of minus twice the
    full invariant polytope.  Smooth, strictly convex when the vertices
    affinely span, invariant because the vertex set is, and with gradient
    image exactly the interior of the target polytope.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    image = _scaled_polytope(toric_polytope(pv), Q(-2))
    verts = np.array([[float(x) for x in v] for v in image.vertices])
    if verts.shape[0] <= pv.datum.rank:
        raise ValueError("too few vertices for a strictly convex smoothing")
    t = float(temperature)

    def logits(a: Array) -> Tuple[Array, Array]:
        z = verts @ a / t
        zmax = z.max()
        w = np.exp(z - zmax)
        return w / w.sum(), z

    def value(a: Array) -> float:
        z = verts @ a / t
        zmax = float(z.max())
        return t * (zmax + math.log(float(np.exp(z - zmax).sum())))

    def gradient(a: Array) -> Array:
        w, _ = logits(a)
        return verts.T @ w

    def hessian(a: Array) -> Array:
        w, _ = logits(a)
        mean = verts.T @ w
        centered = verts - mean
        return (centered.T * w) @ centered / t

    return make_potential(
        "support-smoothing", pv.datum.rank, value, gradient, hessian,
        image=image, datum=pv.datum,
    )


def fubini_study_potential(k: int = 1) -> ToricPotential:
    """Product round metric on the quadric model of the rank one fixture.

    u(y) = 2k ln(2 cosh 2y) in the split coordinate; the gradient runs
    over (-4k, 4k), minus twice the invariant interval [-2k, 2k].
    """
    if k < 1:
        raise ValueError("the polarization multiple must be a positive integer")
    image = polytope_from_vertices([(Q(-4 * k),), (Q(4 * k),)])
    kk = float(k)

    def value(a: Array) -> float:
        y = 2.0 * float(a[0])
        # log(2cosh y) = logaddexp(y, -y), safe for large |y|
        return 2.0 * kk * float(np.logaddexp(y, -y))

    def gradient(a: Array) -> Array:
        return np.array([4.0 * kk * math.tanh(2.0 * float(a[0]))])

    def hessian(a: Array) -> Array:
        y = min(abs(2.0 * float(a[0])), 350.0)
        return np.array([[8.0 * kk / math.cosh(y) ** 2]])

    return ToricPotential(
        name=f"fubini-study-{k}", dim=1, value=value, gradient=gradient,
        hessian=hessian, image=image,
    )


def fubini_study_pair_potential(k: int = 1, shift: float = 0.5) -> ToricPotential:
    """Average of two translates of the rank one round metric.

    The curvature form is linear in the potential, so the average of the
    two pulled-back smooth forms is again a smooth positive form, but its
    scalar curvature is no longer constant.  Same gradient image as the
    untranslated potential.
    """
    if k < 1:
        raise ValueError("the polarization multiple must be a positive integer")
    s = float(shift)
    image = polytope_from_vertices([(Q(-4 * k),), (Q(4 * k),)])
    kk = float(k)

    def value(a: Array) -> float:
        y = float(a[0])
        return kk * (
            float(np.logaddexp(2.0 * (y - s), -2.0 * (y - s)))
            + float(np.logaddexp(2.0 * (y + s), -2.0 * (y + s)))
        )

    def gradient(a: Array) -> Array:
        y = float(a[0])
        return np.array(
            [2.0 * kk * (math.tanh(2.0 * (y - s)) + math.tanh(2.0 * (y + s)))]
        )

    def hessian(a: Array) -> Array:
        y = float(a[0])
        ym = min(abs(2.0 * (y - s)), 350.0)
        yp = min(abs(2.0 * (y + s)), 350.0)
        return np.array(
            [[4.0 * kk * (1.0 / math.cosh(ym) ** 2 + 1.0 / math.cosh(yp) ** 2)]]
        )

    return ToricPotential(
        name=f"fubini-study-pair-{k}-{s:g}", dim=1, value=value,
        gradient=gradient, hessian=hessian, image=image,
    )


def preset_potentials(pv: PolarizedVariety) -> Tuple[ToricPotential, ...]:
    """Named potentials whose Kaehler forms extend smoothly across the
    whole variety, so wall behavior matches a genuine metric.

    Every pointwise or integral identity involving the scalar curvature
    presupposes such an extension; potentials with the wrong boundary
    expansion (a flat quadratic, a smoothing at an unmatched temperature)
    are still useful test objects but sit outside that hypothesis, and the
    curvature average genuinely differs from the exact cohomological one
    for them.  Closed forms are known here for polytopes of the round
    rank-one family, symmetric intervals with even half-length; elsewhere
    the family is empty.
    """
    poly = toric_polytope(pv)
    if pv.datum.rank != 1:
        return ()
    ends = sorted(v[0] for v in poly.vertices)
    if len(ends) != 2 or ends[0] != -ends[1]:
        return ()
    half = ends[1]
    if half <= 0 or half % 2 != 0:
        return ()
    k = int(half / 2)
    return (
        fubini_study_potential(k),
        fubini_study_pair_potential(k, shift=0.5),
        fubini_study_pair_potential(k, shift=1.0),
    )


def check_gradient(
    potential: ToricPotential,
    count: int = 100,
    seed: int = 20260817,
    box: float = 1.5,
    step: float = 1e-6,
) -> float:
    """Largest relative mismatch between the gradient callable and central
    finite differences of the value, over random interior points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        a = rng.uniform(-box, box, size=potential.dim)
        g = np.asarray(potential.gradient(a), dtype=float)
        for i in range(potential.dim):
            e = np.zeros(potential.dim)
            e[i] = step
            fd = (potential.value(a + e) - potential.value(a - e)) / (2 * step)
            denom = max(abs(g[i]), 1.0)
            worst = max(worst, abs(fd - g[i]) / denom)
    return worst


# ---------------------------------------------------------------------------
# Legendre transform


@dataclass(frozen=True)
class LegendreResult:
    value: float
    maximizer: Array
    residual: float
    iterations: int


def _interior_exact(poly: RationalPolytope, p: Array) -> bool:
    pt = tuple(Q(float(x)) for x in p)
    return poly.interior_contains(pt)


def legendre(
    potential: ToricPotential,
    p: Sequence[float],
    start: Optional[Sequence[float]] = None,
    residual_tol: float = 1e-10,
) -> LegendreResult:
    """Convex conjugate value sup_y (p.y - u(y)) and its maximizer.

    Damped Newton on the gradient equation; the residual is driven well
    below the advertised tolerance whenever the iteration converges.
    The target covector must lie in the interior of the gradient image;
    membership is decided exactly against the image polytope.
    """
    pvec = np.asarray(p, dtype=float)
    if pvec.shape != (potential.dim,):
        raise ValueError("covector dimension mismatch")
    if potential.image is not None and not _interior_exact(potential.image, pvec):
        raise ValueError(
            f"covector {tuple(float(x) for x in pvec)} is not interior to the "
            "gradient image"
        )
    scale = 1.0 + float(np.linalg.norm(pvec))

    def solve(y0: Array) -> Tuple[Array, float, int]:
        y = y0.copy()
        iterations = 0
        for iterations in range(1, 121):
            g = np.asarray(potential.gradient(y), dtype=float) - pvec
            res = float(np.linalg.norm(g))
            # drive to the float noise floor; second difference users need it
            if res <= 1e-15 * scale:
                break
            h = np.asarray(potential.hessian(y), dtype=float)
            try:
                step_vec = np.linalg.solve(h, g)
            except np.linalg.LinAlgError:
                raise RuntimeError("singular Hessian during conjugate solve")
            # a saturated start can make the raw step astronomical
            slen = float(np.linalg.norm(step_vec))
            cap = 16.0 * (1.0 + float(np.linalg.norm(y)))
            if slen > cap:
                step_vec *= cap / slen
            t = 1.0
            while t > 1e-8:
                cand = y - t * step_vec
                rc = float(
                    np.linalg.norm(np.asarray(potential.gradient(cand)) - pvec)
                )
                if rc < res:
                    y = cand
                    break
                t *= 0.5
            else:
                break
        g = np.asarray(potential.gradient(y), dtype=float) - pvec
        return y, float(np.linalg.norm(g)), iterations

    y0 = (
        np.zeros(potential.dim)
        if start is None
        else np.asarray(start, dtype=float).copy()
    )
    y, res, iterations = solve(y0)
    if res > residual_tol * scale and start is not None:
        # the warm start sat in a flat of the gradient; retry cold
        y, res, iterations = solve(np.zeros(potential.dim))
    if res > residual_tol * scale:
        raise RuntimeError(
            f"conjugate solve did not converge: residual {res:.3e} after "
            f"{iterations} iterations at p={tuple(float(x) for x in pvec)}"
        )
    val = float(pvec @ y - potential.value(y))
    return LegendreResult(value=val, maximizer=y, residual=res, iterations=iterations)


# ---------------------------------------------------------------------------
# per-variety float data


@dataclass(frozen=True)
class _RootData:
    """Float snapshot of the root bookkeeping of a polarization.

    lvals(m) = chi_pair + pvec.m is the pairing of the polytope point
    with each coroot outside the fixed Levi part; the density is
    norm0 * prod(lvals).
    """

    pvecs: Array  # (nroots, r) split parts of the coroots
    chi_pairs: Array  # chi paired with each full coroot
    chiac_pairs: Array  # anticanonical character paired with each coroot
    rho_pairs: Array
    sym_rvecs: Array  # (nsym, r) symmetric roots as covectors on the split part
    uni_rvecs: Array  # (nuni, r) same for the unipotent-side roots
    uni_chiac: Array  # anticanonical pairings, unipotent block only
    norm0: float
    two_rho: Array
    rank: int

    def lvals(self, m: Array) -> Array:
        return self.chi_pairs + self.pvecs @ m

    def density(self, m: Array) -> float:
        return self.norm0 * float(np.prod(self.lvals(m)))

    def ih(self, a: Array) -> float:
        tot = 0.0
        if len(self.sym_rvecs):
            args = -2.0 * (self.sym_rvecs @ a)
            if np.any(args <= 0.0):
                raise ValueError("point on a reflection wall of the fiber")
            tot += float(np.sum(np.log(np.sinh(args))))
        if len(self.uni_rvecs):
            tot -= 2.0 * float(np.sum(self.uni_rvecs @ a))
        return tot

    def ih_gradient(self, a: Array) -> Array:
        g = np.zeros(self.rank)
        if len(self.sym_rvecs):
            args = -2.0 * (self.sym_rvecs @ a)
            g += (-2.0 / np.tanh(args)) @ self.sym_rvecs
        if len(self.uni_rvecs):
            g -= 2.0 * np.sum(self.uni_rvecs, axis=0)
        return g

    def ih_hessian(self, a: Array) -> Array:
        h = np.zeros((self.rank, self.rank))
        if len(self.sym_rvecs):
            args = -2.0 * (self.sym_rvecs @ a)
            coef = 4.0 * (1.0 - 1.0 / np.tanh(args) ** 2)
            h += (self.sym_rvecs.T * coef) @ self.sym_rvecs
        return h

    def jh(self, a: Array) -> float:
        if not len(self.sym_rvecs):
            return 1.0
        return float(np.prod(np.abs(np.sinh(2.0 * (self.sym_rvecs @ a)))))


def _fv(v) -> List[float]:
    return [float(x) for x in v]


def _root_data(pv: PolarizedVariety) -> _RootData:
    datum = pv.datum
    measure = build_dh_measure(pv)  # validates the lattice
    pvecs, chis, chiacs, rhos = [], [], [], []
    sym_rvecs, uni_rvecs, uni_chiac = [], [], []
    for a in tuple(datum.phi_Qu) + tuple(datum.phi_s_plus):
        av = coroot(datum.system, a)
        pvecs.append(_fv(datum.as_coords(datum.p_part(av))))
        chis.append(float(dot(pv.chi, av)))
        chiacs.append(float(dot(datum.chi_ac, av)))
        rhos.append(float(dot(datum.rho, av)))
    for a in datum.phi_Qu:
        uni_rvecs.append(_fv(datum.restrict(a)))
        uni_chiac.append(float(dot(datum.chi_ac, coroot(datum.system, a))))
    for b in datum.phi_s_plus:
        sym_rvecs.append(_fv(datum.restrict(b)))
    r = datum.rank
    norm0 = float(measure.lattice_normalization)
    for rho_pair in rhos:
        norm0 /= rho_pair
    return _RootData(
        pvecs=np.array(pvecs).reshape(len(pvecs), r),
        chi_pairs=np.array(chis),
        chiac_pairs=np.array(chiacs),
        rho_pairs=np.array(rhos),
        sym_rvecs=np.array(sym_rvecs).reshape(len(sym_rvecs), r),
        uni_rvecs=np.array(uni_rvecs).reshape(len(uni_rvecs), r),
        uni_chiac=np.array(uni_chiac),
        norm0=norm0,
        two_rho=np.array(_fv(datum.two_rho_H)),
        rank=r,
    )


# ---------------------------------------------------------------------------
# Monge-Ampere density


def ma_density(
    potential: ToricPotential,
    datum: HorosymmetricDatum,
    chi,
    a: Sequence[float],
) -> float:
    """Volume-form density against the invariant reference at exp(a).

    n!/2^(2r+#unipotent) det(d2u) / J(a) * prod (2chi - du)(coroot) over
    the unipotent block * prod |du(coroot)| over the symmetric block,
    where J is the product of |sinh| of twice the symmetric roots.
    """
    avec = np.asarray(a, dtype=float)
    grad = np.asarray(potential.gradient(avec), dtype=float)
    hess = np.asarray(potential.hessian(avec), dtype=float)
    n = variety_dimension(datum)
    r = datum.rank
    out = math.factorial(n) / 2.0 ** (2 * r + len(datum.phi_Qu))
    out *= float(np.linalg.det(hess))
    jh = 1.0
    for b in datum.phi_s_plus:
        arg = 2.0 * float(np.dot(np.array(_fv(datum.restrict(b))), avec))
        if arg == 0.0:
            raise ValueError("point lies on a reflection wall of the fiber")
        jh *= abs(math.sinh(arg))
    out /= jh
    for al in datum.phi_Qu:
        av = coroot(datum.system, al)
        pair = 2.0 * float(dot(chi, av)) - float(
            np.dot(np.array(_fv(datum.as_coords(datum.p_part(av)))), grad)
        )
        out *= pair
    for b in datum.phi_s_plus:
        av = coroot(datum.system, b)
        out *= abs(float(np.dot(np.array(_fv(datum.as_coords(datum.p_part(av)))), grad)))
    return out


# ---------------------------------------------------------------------------
# scalar curvature


def _hessian_jets(
    potential: ToricPotential, a0: Array, step: float
) -> Tuple[Array, Array, Array]:
    """Hessian of the potential at a0 together with its first and second
    coordinate derivatives, by central differences of the exact hessian
    callable at steps h and h/2, Richardson-combined.

    Differencing the closed-form hessian keeps the noise at rounding
    level; nothing here needs the conjugate solve, so the stencil is
    free to leave any region of interest.
    """
    r = len(a0)
    eye = np.eye(r)

    cache: Dict[Tuple[int, ...], Array] = {}

    def hq(off: Array) -> Array:
        # offsets in units of step/2 so both Richardson passes share evals
        key = tuple(int(round(2.0 * x)) for x in off)
        got = cache.get(key)
        if got is None:
            got = np.asarray(potential.hessian(a0 + step * off), dtype=float)
            cache[key] = got
        return got

    h0 = hq(np.zeros(r))

    def jets(scale: float) -> Tuple[Array, Array]:
        d3 = np.zeros((r, r, r))
        d4 = np.zeros((r, r, r, r))
        hh = scale * step
        for l in range(r):
            hp = hq(scale * eye[l])
            hm = hq(-scale * eye[l])
            d3[l] = (hp - hm) / (2.0 * hh)
            d4[l, l] = (hp - 2.0 * h0 + hm) / hh**2
        for l in range(r):
            for k in range(l + 1, r):
                spp = hq(scale * (eye[l] + eye[k]))
                spm = hq(scale * (eye[l] - eye[k]))
                smp = hq(scale * (eye[k] - eye[l]))
                smm = hq(-scale * (eye[l] + eye[k]))
                mixed = (spp - spm - smp + smm) / (4.0 * hh**2)
                d4[l, k] = mixed
                d4[k, l] = mixed
        return d3, d4

    d3_h, d4_h = jets(1.0)
    d3_h2, d4_h2 = jets(0.5)
    d3 = (4.0 * d3_h2 - d3_h) / 3.0
    d4 = (4.0 * d4_h2 - d4_h) / 3.0
    # third and fourth derivatives of a scalar are fully symmetric; averaging
    # over the index order cancels part of the difference error
    d3 = (d3 + d3.transpose(1, 0, 2) + d3.transpose(2, 1, 0)) / 3.0
    d4 = (d4 + d4.transpose(2, 3, 0, 1)) / 2.0
    return h0, d3, d4


def scalar_curvature(
    potential: ToricPotential,
    pv: PolarizedVariety,
    q: Sequence[float],
    step: float = 1e-3,
    margin: float = 1e-9,
) -> float:
    """Scalar curvature of the metric of the potential at a polytope point.

    One conjugate solve locates the point a with du(a) = -2q; all the
    fourth order data is then read off closed-form hessian differences
    on the potential side and pushed through the inverse hessian, so the
    evaluation stays well conditioned arbitrarily close to the walls.
    """
    rd = _root_data(pv)
    m = np.asarray(q, dtype=float)
    lv = rd.lvals(m)
    if np.any(lv <= margin):
        raise ValueError("point too close to the boundary for curvature")
    p = -2.0 * m

    a0 = legendre(potential, p, residual_tol=1e-10).maximizer
    g0, d3, d4 = _hessian_jets(potential, a0, step)
    ginv = np.linalg.inv(g0)

    # derivatives in the polytope variable via d/dp_k = sum_l ginv_kl d/da_l
    divg = np.einsum("jl,lij->i", ginv, d3)
    abreu = np.einsum(
        "ik,ja,kab,bl,lij->", ginv, ginv, d3, ginv, d3
    ) - np.einsum("jl,ik,klij->", ginv, ginv, d4)
    abreu = -abreu

    ltil = 2.0 * lv  # (2chi - p) paired with each coroot
    rvec = -(rd.pvecs.T @ (1.0 / ltil))
    r2 = np.outer(rvec, rvec) - (rd.pvecs.T / ltil**2) @ rd.pvecs

    dih = rd.ih_gradient(a0)
    hih = rd.ih_hessian(a0)

    total = -abreu
    total += float((-2.0 * divg + dih) @ rvec)
    total += float(np.sum(ginv * hih))
    total -= float(np.sum(g0 * r2))
    if len(rd.uni_rvecs):
        nuni = len(rd.uni_rvecs)
        total += float(np.sum(2.0 * rd.uni_chiac / ltil[:nuni]))
    return total


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre tensor rule over triangulated cells.

    order: points per axis; epsilon: first inset factor of the geometric
    boundary mesh (each following ring halves the inset, so integrands
    with logarithmic wall behavior vary by a bounded amount per ring);
    rtol: acceptance threshold between consecutive refinement levels;
    max_levels: subdivision-doubling cap on the core; ring_depth: cap on
    the geometric ring sequence; threads: concurrent cell evaluation (the
    reduction order is fixed, results do not depend on the thread count).
    """

    order: int = 8
    epsilon: Q = Q(1, 8)
    rtol: float = 1e-4
    max_levels: int = 4
    ring_depth: int = 44
    threads: int = 1

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("quadrature order must be at least 2")
        if Q(self.epsilon) <= 0 or Q(self.epsilon) >= 1:
            raise ValueError("inset factor must lie in (0, 1)")


_GL_CACHE: Dict[int, Tuple[Array, Array]] = {}


def _gl(order: int) -> Tuple[Array, Array]:
    got = _GL_CACHE.get(order)
    if got is None:
        x, w = leggauss(order)
        # shift to [0, 1]
        got = ((x + 1.0) / 2.0, w / 2.0)
        _GL_CACHE[order] = got
    return got


def _cell_nodes(cell: Array, order: int) -> Tuple[Array, Array]:
    """Nodes and weights on one simplex, in coordinate measure."""
    x, w = _gl(order)
    dim = cell.shape[1]
    if dim == 1:
        a, b = cell[0, 0], cell[1, 0]
        pts = (a + (b - a) * x)[:, None]
        return pts, w * abs(b - a)
    if dim == 2:
        v0, e1, e2 = cell[0], cell[1] - cell[0], cell[2] - cell[0]
        jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
        xi, eta = np.meshgrid(x, x, indexing="ij")
        xi, eta = xi.ravel(), eta.ravel()
        pts = v0[None, :] + np.outer(xi, e1) + np.outer(eta * (1.0 - xi), e2)
        wts = np.outer(w, w).ravel() * (1.0 - xi) * jac
        return pts, wts
    raise NotImplementedError("quadrature cells only up to rank two")


def _split_cell(cell: Array) -> List[Array]:
    if cell.shape[1] == 1:
        mid = (cell[0] + cell[1]) / 2.0
        return [np.array([cell[0], mid]), np.array([mid, cell[1]])]
    a, b, c = cell
    ab, bc, ca = (a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0
    return [
        np.array([a, ab, ca]),
        np.array([ab, b, bc]),
        np.array([ca, bc, c]),
        np.array([ab, bc, ca]),
    ]


def _cells_at_level(base: List[Array], level: int) -> List[Array]:
    cells = base
    for _ in range(level):
        cells = [piece for c in cells for piece in _split_cell(c)]
    return cells


def _float_cells(poly: RationalPolytope) -> List[Array]:
    return [
        np.array([[float(x) for x in v] for v in s]) for s in triangulate(poly)
    ]


def _sum_cells(
    cells: List[Array],
    fvec: Callable[[Array], Array],
    order: int,
    ncomp: int,
    threads: int,
) -> Array:
    def one(cell: Array) -> Array:
        pts, wts = _cell_nodes(cell, order)
        acc = [[] for _ in range(ncomp)]
        for pt, wt in zip(pts, wts):
            vals = fvec(pt)
            for c in range(ncomp):
                acc[c].append(wt * float(vals[c]))
        return np.array([math.fsum(col) for col in acc])

    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, cells))
    else:
        results = [one(c) for c in cells]
    # fixed-order pairwise reduction over cells
    return np.array(
        [math.fsum(res[c] for res in results) for c in range(ncomp)]
    )


def _inset_vertices(poly: RationalPolytope, eps: Q) -> List[Tuple[Q, ...]]:
    verts = poly.vertices
    k = len(verts)
    centroid = tuple(
        sum((v[i] for v in verts), Q(0)) / k for i in range(poly.dim)
    )
    keep = Q(1) - Q(eps)
    return [
        tuple(c + keep * (x - c) for x, c in zip(v, centroid)) for v in verts
    ]


def _ring_cells(poly: RationalPolytope, eps_out: Q, eps_in: Q) -> List[Array]:
    """Cells covering inset(eps_out) minus inset(eps_in); eps_out < eps_in."""
    outer = {v: w for v, w in zip(poly.vertices, _inset_vertices(poly, eps_out))}
    inner = {v: w for v, w in zip(poly.vertices, _inset_vertices(poly, eps_in))}
    cells: List[Array] = []
    if poly.dim == 1:
        for v in poly.vertices:
            a = np.array([[float(x) for x in outer[v]]])
            b = np.array([[float(x) for x in inner[v]]])
            cells.append(np.vstack([a, b]))
        return cells
    for i in range(len(poly.halfspaces)):
        fverts = poly.facet_vertices(i)
        if len(fverts) != 2:
            continue
        v1, v2 = fverts
        o1, o2 = outer[v1], outer[v2]
        i1, i2 = inner[v1], inner[v2]
        t1 = np.array([_fvf(o1), _fvf(o2), _fvf(i2)])
        t2 = np.array([_fvf(o1), _fvf(i2), _fvf(i1)])
        cells.extend([t1, t2])
    return cells


def _fvf(v) -> List[float]:
    return [float(x) for x in v]


def _converged_quad(
    base_cells: List[Array],
    fvec: Callable[[Array], Array],
    ncomp: int,
    spec: QuadratureSpec,
    what: str,
) -> Array:
    prev: Optional[Array] = None
    for level in range(spec.max_levels + 1):
        cells = _cells_at_level(base_cells, level)
        cur = _sum_cells(cells, fvec, spec.order, ncomp, spec.threads)
        if prev is not None:
            scale = np.maximum(np.abs(cur), 1e-3 * max(np.abs(cur).max(), 1e-9))
            if np.all(np.abs(cur - prev) <= spec.rtol * scale):
                return cur
        prev = cur
    raise RuntimeError(
        f"quadrature for {what} did not converge across consecutive "
        f"refinement levels (last change above rtol={spec.rtol})"
    )


def _integrate_graded(
    poly: RationalPolytope,
    fvec: Callable[[Array], Array],
    ncomp: int,
    spec: QuadratureSpec,
    what: str,
) -> Array:
    """Integral over the polytope of a vector integrand that may blow up
    logarithmically at the boundary: converged rule on an inset core plus
    a geometric sequence of boundary rings."""
    eps0 = Q(spec.epsilon)
    core = polytope_from_vertices(_inset_vertices(poly, eps0))
    total = _converged_quad(_float_cells(core), fvec, ncomp, spec, what)
    eps = eps0
    quiet = 0
    for _ in range(spec.ring_depth):
        nxt = eps / 2
        ring = _ring_cells(poly, eps, nxt)
        contrib = _sum_cells(ring, fvec, spec.order, ncomp, spec.threads)
        total = total + contrib
        eps = nxt
        scale = max(float(np.abs(total).max()), 1e-9)
        if float(np.abs(contrib).max()) <= 0.25 * spec.rtol * scale:
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
        if eps < Q(1, 10**10):
            return total
    raise RuntimeError(
        f"boundary rings for {what} did not settle within the depth cap"
    )


def integrate_against_dh(
    pv: PolarizedVariety,
    integrand: Callable[[Array], float],
    spec: Optional[QuadratureSpec] = None,
    region: Optional[RationalPolytope] = None,
) -> float:
    """Quadrature of integrand(q) times the exact density over the moment
    polytope (or a sub-polytope), boundary-graded."""
    spec = spec or QuadratureSpec()
    rd = _root_data(pv)
    poly = region if region is not None else moment_polytope(pv)

    def fvec(m: Array) -> Array:
        return np.array([integrand(m) * rd.density(m)])

    return float(_integrate_graded(poly, fvec, 1, spec, "a density integral")[0])


# ---------------------------------------------------------------------------
# functionals


@dataclass(frozen=True)
class MabuchiReport:
    linear: float
    nonlinear: float
    total: float
    notes: Tuple[str, ...] = ()


def _mabuchi_raw(
    potential: ToricPotential,
    pv: PolarizedVariety,
    spec: QuadratureSpec,
) -> Tuple[float, float, float, Tuple[str, ...]]:
    notes: List[str] = []
    assumptions = check_assumptions(pv)
    if not assumptions.assumption_T:
        raise ValueError(
            "the energy expansion needs the exact conical subdivision of the "
            "moment polytope; the subdivision check failed"
        )
    if not assumptions.assumption_R:
        notes.append(
            "reflection-multiplicity check failed; boundary terms were "
            "integrated on the stated formulas regardless"
        )
    rd = _root_data(pv)
    datum = pv.datum
    n = variety_dimension(datum)
    sbar = float(s_bar_theta(pv))
    poly = moment_polytope(pv)
    lam = lambda0(pv, poly)
    pieces = delta_tilde_pieces(pv, poly, lam)

    warm = {"y": None}

    def conj(m: Array) -> Tuple[float, Array]:
        p = -2.0 * m
        res = legendre(potential, p, start=warm["y"], residual_tol=1e-8)
        warm["y"] = res.maximizer
        return res.value, res.maximizer

    def core(m: Array) -> Tuple[float, Array, float, Array]:
        ustar, a = conj(m)
        dens = rd.density(m)
        lv = rd.lvals(m)
        return ustar, a, dens, lv

    # cone pieces: (n - sum chi/q) u* + <p, a>, weighted by the ray constant
    lin_cone = 0.0
    for ray_index, piece in pieces:
        lam_y = float(lambda_Y(pv, ray_index))

        def fpiece(m: Array) -> Array:
            ustar, a, dens, lv = core(m)
            schi = float(np.sum(rd.chi_pairs / lv)) if len(lv) else 0.0
            val = n * ustar - ustar * schi + float(-2.0 * m @ a)
            return np.array([val * dens])

        part = _integrate_graded(
            piece, fpiece, 1, spec, f"the cone piece of ray {ray_index}"
        )
        lin_cone += lam_y * float(part[0])

    def fbulk(m: Array) -> Array:
        ustar, a, dens, lv = core(m)
        schiac = float(np.sum(rd.chiac_pairs / lv)) if len(lv) else 0.0
        avg_term = ustar * (schiac - sbar) * dens
        ih_term = -rd.ih(a) * dens if len(rd.sym_rvecs) else 0.0
        sign, logdet = np.linalg.slogdet(
            np.asarray(potential.hessian(a), dtype=float)
        )
        if sign <= 0:
            raise RuntimeError("Hessian lost positivity inside the polytope")
        ent_term = logdet * dens  # minus log det of the conjugate Hessian
        rho_term = 2.0 * float(rd.two_rho @ a) * dens
        return np.array([avg_term, ih_term, ent_term, rho_term])

    bulk = _integrate_graded(poly, fbulk, 4, spec, "the bulk energy terms")
    avg_int, ih_int, ent_int, rho_int = (float(x) for x in bulk)

    linear = lin_cone + avg_int + rho_int
    nonlinear = ih_int + ent_int - rho_int
    total = lin_cone + avg_int + ih_int + ent_int
    return linear, nonlinear, total, tuple(notes)


def mabuchi(
    potential: ToricPotential,
    pv: PolarizedVariety,
    spec: Optional[QuadratureSpec] = None,
    reference: Optional[ToricPotential] = None,
) -> MabuchiReport:
    """Energy of the potential, split into its affine-in-the-conjugate part
    and the entropy-like remainder.

    The underlying functional is only defined up to an additive constant;
    pass a reference potential to report differences pinned by reference
    value zero, otherwise the raw integrals are returned.
    """
    spec = spec or QuadratureSpec()
    lin, nl, tot, notes = _mabuchi_raw(potential, pv, spec)
    if reference is not None:
        rl, rn, rt, _ = _mabuchi_raw(reference, pv, spec)
        lin, nl, tot = lin - rl, nl - rn, tot - rt
    return MabuchiReport(linear=lin, nonlinear=nl, total=tot, notes=notes)


def j_functional(
    potential: ToricPotential,
    pv: PolarizedVariety,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """Normal form of the growth functional: value at the origin plus the
    density-weighted mean of the conjugate along the polytope."""
    spec = spec or QuadratureSpec()
    rd = _root_data(pv)
    poly = moment_polytope(pv)
    warm = {"y": None}

    def fvec(m: Array) -> Array:
        p = -2.0 * m
        res = legendre(potential, p, start=warm["y"], residual_tol=1e-8)
        warm["y"] = res.maximizer
        return np.array([res.value * rd.density(m)])

    integral = float(
        _integrate_graded(poly, fvec, 1, spec, "the growth functional")[0]
    )
    measure = build_dh_measure(pv)
    mass = float(integrate_dh(poly, poly_const(rd.rank, Q(1)), measure))
    return potential(np.zeros(potential.dim)) + integral / mass


def normalize_potential(
    potential: ToricPotential, pv: PolarizedVariety
) -> ToricPotential:
    """Shift by the central translation and constant that put the minimum
    of the conjugate at the distinguished base point, with value zero.

    The translation must be central; a non-central minimizing direction
    is reported as an error rather than projected away.
    """
    poly = moment_polytope(pv)
    lam = lambda0(pv, poly)
    p0 = np.array([-2.0 * float(x) for x in lam])
    res = legendre(potential, p0)
    b = res.maximizer
    central = central_directions(pv.datum)
    if central:
        basis = np.array([[float(x) for x in v] for v in central]).T
        coef, *_ = np.linalg.lstsq(basis, b, rcond=None)
        resid = b - basis @ coef
    else:
        resid = b
    if float(np.linalg.norm(resid)) > 1e-8 * (1.0 + float(np.linalg.norm(b))):
        raise ValueError(
            "the conjugate minimizer calls for a non-central translation"
        )
    shift = b.copy()
    const = res.value - float(p0 @ shift)

    inner_value = potential.value
    inner_gradient = potential.gradient
    inner_hessian = potential.hessian

    def value(a: Array) -> float:
        return float(inner_value(a + shift)) + const

    def gradient(a: Array) -> Array:
        return inner_gradient(a + shift)

    def hessian(a: Array) -> Array:
        return inner_hessian(a + shift)

    return ToricPotential(
        name=potential.name + "+normalized",
        dim=potential.dim,
        value=value,
        gradient=gradient,
        hessian=hessian,
        image=potential.image,
    )


def write_scalar_samples(
    potential: ToricPotential,
    pv: PolarizedVariety,
    points: Sequence[Sequence[float]],
    path: str,
) -> None:
    """CSV rows of sample point, scalar curvature and exact density; for
    plotting outside, nothing here depends on a plotting package."""
    rd = _root_data(pv)
    r = pv.datum.rank
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"q_{i+1}" for i in range(r)] + ["scalar_curvature", "dh_density"])
        for q in points:
            m = np.asarray(q, dtype=float)
            s = scalar_curvature(potential, pv, m)
            writer.writerow(
                [f"{x:.12g}" for x in m]
                + [f"{s:.12g}", f"{rd.density(m):.12g}"]
            )


def _scaled_polytope(poly: RationalPolytope, factor: Q) -> RationalPolytope:
    return polytope_from_vertices(
        [tuple(Q(factor) * x for x in v) for v in poly.vertices]
    )
