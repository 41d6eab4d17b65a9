"""Restricted root data for horosymmetric homogeneous spaces.

Everything is derived from an ambient root system, a parabolic and an
involution of its Levi: the split space a_s, restricted roots with
multiplicities and coroots, the little Weyl group, the spherical
lattice, the color images and the two canonical covectors (sum of
parabolic-unipotent plus split positive roots, and the anticanonical
character).
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .linalg import (
    Mat,
    Q,
    Vec,
    coords_in_basis,
    dot,
    dual_lattice_basis,
    identity_mat,
    is_zero_vec,
    kernel_basis,
    lattice_basis,
    mat_vec,
    primitive_int_vec,
    vadd,
    vscale,
    vsub,
    zero_vec,
)
from .rootdata import (
    AmbientRootSystem,
    Involution,
    ParabolicChoice,
    coroot,
)


@dataclass(frozen=True)
class RestrictedClass:
    """One restricted root: covector on a_s (coordinates in the basis dual
    to a_s_basis), its multiplicity, its coroot and the ambient sources.
    root_ambient is the split-average covector (alpha - sigma(alpha))/2,
    shared by every member; lengths and angles must be read off it, not
    off the coordinate tuple."""

    root: Vec
    multiplicity: int
    coroot_vec: Vec
    members: Tuple[Vec, ...]
    root_ambient: Vec


@dataclass(frozen=True)
class Color:
    origin: str  # "fiber" or "flag"
    label: str
    point: Vec  # vector in a_s coordinates
    fiber_degree: Optional[int]  # number of colors over this point; None = unknown


@dataclass(frozen=True)
class HorosymmetricDatum:
    system: AmbientRootSystem
    parabolic: ParabolicChoice
    sigma: Involution
    normalizer_mode: str
    a_s_basis: Mat
    rank: int
    rho: Vec
    levi_positive: Tuple[Vec, ...]
    levi_simples: Tuple[Vec, ...]
    phi_l_sigma: Tuple[Vec, ...]
    phi_s_plus: Tuple[Vec, ...]
    phi_Qu: Tuple[Vec, ...]
    classes: Tuple[RestrictedClass, ...]
    simple_restricted_roots: Tuple[Vec, ...]
    simple_restricted_coroots: Tuple[Vec, ...]
    # None when the datum mixes a symmetric fiber with central split
    # directions; integration-level operations refuse such data
    lattice_M: Optional[Mat]
    lattice_N: Optional[Mat]
    two_rho_H: Vec
    chi_ac: Vec

    @property
    def restricted_roots(self) -> Tuple[Tuple[Vec, int], ...]:
        return tuple((c.root, c.multiplicity) for c in self.classes)

    @property
    def restricted_coroots(self) -> Tuple[Vec, ...]:
        return tuple(c.coroot_vec for c in self.classes)

    def apply_sigma(self, x: Vec) -> Vec:
        return self.sigma.apply(x)

    def h_part(self, x: Vec) -> Vec:
        return vscale(Q(1, 2), vadd(x, self.sigma.apply(x)))

    def p_part(self, x: Vec) -> Vec:
        return vscale(Q(1, 2), vsub(x, self.sigma.apply(x)))

    def as_embed(self, coords: Vec) -> Vec:
        """a_s coordinates -> ambient vector."""
        out = zero_vec(self.system.ambient_dim)
        for c, b in zip(coords, self.a_s_basis):
            out = vadd(out, vscale(c, b))
        return out

    def as_coords(self, x: Vec) -> Vec:
        """Ambient vector in a_s -> coordinates in a_s_basis."""
        return coords_in_basis(x, self.a_s_basis)

    def restrict(self, xi: Vec) -> Vec:
        """Ambient covector -> coordinates of its restriction to a_s.

        On a_s the split-average projection acts as the identity, so the
        restriction of xi and of (xi - xi∘sigma)/2 coincide.
        """
        return tuple(dot(xi, b) for b in self.a_s_basis)


def _a_s_basis(system: AmbientRootSystem, sigma: Involution) -> Mat:
    n = system.ambient_dim
    rows = [
        tuple(sigma.matrix[i][j] + (Q(1) if i == j else Q(0)) for j in range(n))
        for i in range(n)
    ]
    if system.trace_gauge:
        rows.append((Q(1),) * n)
    raw = kernel_basis(tuple(rows))
    basis = [primitive_int_vec(v) for v in raw]
    basis.sort(key=lambda v: (next(i for i, x in enumerate(v) if x != 0), v))
    return tuple(basis)


def _levi_weyl_elements(system: AmbientRootSystem, parabolic: ParabolicChoice, bound: int) -> List[Mat]:
    """Breadth-first enumeration of W(Phi_L) as ambient matrices."""
    n = system.ambient_dim
    gens = []
    for i in parabolic.levi_simple_indices:
        a = system.simple_roots[i]
        av = coroot(system, a)
        gens.append(
            tuple(
                tuple(
                    (Q(1) if r == c else Q(0)) - a[r] * av[c]
                    for c in range(n)
                )
                for r in range(n)
            )
        )
    ident = identity_mat(n)
    seen = {ident}
    queue = [ident]
    out = [ident]
    while queue:
        nxt = []
        for w in queue:
            for g in gens:
                wg = tuple(tuple(dot(g[r], col) for col in zip(*w)) for r in range(n))
                if wg not in seen:
                    seen.add(wg)
                    nxt.append(wg)
                    out.append(wg)
                    if len(out) > bound:
                        raise ValueError("Levi Weyl group exceeds enumeration bound")
        queue = nxt
    return out


def _borel_adjust(
    system: AmbientRootSystem, parabolic: ParabolicChoice, sigma: Involution
) -> Tuple[Tuple[Vec, ...], Tuple[Vec, ...]]:
    """First Weyl conjugate (breadth-first) of the standard Levi positive
    system in which every root is fixed by sigma or sent to a negative one."""
    std_pos = parabolic.phi_l_positive
    std_simples = tuple(system.simple_roots[i] for i in parabolic.levi_simple_indices)
    if not std_pos:
        return (), ()
    for w in _levi_weyl_elements(system, parabolic, bound=50000):
        cand = tuple(mat_vec(w, a) for a in std_pos)
        cand_set = set(cand)
        ok = True
        for a in cand:
            sa = sigma.apply(a)
            if sa != a and tuple(vscale(Q(-1), sa)) not in cand_set:
                ok = False
                break
        if ok:
            return tuple(sorted(cand)), tuple(mat_vec(w, s) for s in std_simples)
    raise ValueError("no positive system of the Levi is compatible with sigma")


def restricted_coroot(alpha: Vec, datum: "HorosymmetricDatum") -> Vec:
    """Coroot of the restricted root of alpha, in a_s coordinates.

    Three cases by the pairing <sigma(alpha), alpha^vee>: -2 (real root,
    half the coroot), 0 (split average of the coroot), 1 (coroot of
    alpha - sigma(alpha)).
    """
    sa = datum.apply_sigma(alpha)
    if sa == alpha:
        raise ValueError("root is fixed by sigma, no restricted coroot")
    av = coroot(datum.system, alpha)
    pairing = dot(sa, av)
    if pairing == -2:
        vec_ambient = vscale(Q(1, 2), av)
    elif pairing == 0:
        vec_ambient = vscale(Q(1, 2), vsub(av, datum.apply_sigma(av)))
    elif pairing == 1:
        vec_ambient = coroot(datum.system, vsub(alpha, sa))
    else:
        raise ValueError(f"pairing value outside {{-2, 0, 1}}: {pairing}")
    return datum.as_coords(vec_ambient)


def derive(
    system: AmbientRootSystem,
    parabolic: ParabolicChoice,
    sigma: Involution,
    normalizer_mode: str = "fixed-subgroup",
) -> HorosymmetricDatum:
    if normalizer_mode not in ("fixed-subgroup", "normalizer"):
        raise ValueError(f"unknown normalizer_mode: {normalizer_mode!r}")
    phi_l_set = set(parabolic.phi_l)
    for a in parabolic.phi_l_positive:
        if tuple(sigma.apply(a)) not in phi_l_set:
            raise ValueError("sigma does not stabilize the Levi root subsystem")

    a_s = _a_s_basis(system, sigma)
    rank = len(a_s)
    if rank == 0:
        raise ValueError("split space a_s is zero; datum is degenerate")

    levi_positive, levi_simples = _borel_adjust(system, parabolic, sigma)
    fixed = tuple(a for a in levi_positive if tuple(sigma.apply(a)) == a)
    phi_s_plus = tuple(a for a in levi_positive if tuple(sigma.apply(a)) != a)
    neg_levi = {tuple(vscale(Q(-1), a)) for a in levi_positive}
    for a in phi_s_plus:
        if tuple(sigma.apply(a)) not in neg_levi:
            raise ValueError("Borel adjustment failed to separate sigma-moved roots")

    rho = tuple(
        x / 2
        for x in _sum_vectors(
            list(parabolic.phi_qu) + list(levi_positive), system.ambient_dim
        )
    )

    # restricted classes: group phi_s_plus by the restriction covector
    restrict = lambda xi: tuple(dot(xi, b) for b in a_s)
    grouped: Dict[Vec, List[Vec]] = {}
    for a in phi_s_plus:
        key = restrict(a)
        if is_zero_vec(key):
            raise ValueError("sigma-moved Levi root restricts to zero on a_s")
        grouped.setdefault(key, []).append(a)

    # a partially built datum is enough for restricted_coroot
    proto = _Proto(system, sigma, a_s)
    classes = []
    for key in sorted(grouped):
        members = tuple(sorted(grouped[key]))
        coroots = {restricted_coroot(a, proto) for a in members}
        if len(coroots) != 1:
            raise ValueError("members of one restricted class disagree on the coroot")
        ambients = {
            tuple(vscale(Q(1, 2), vsub(a, sigma.apply(a)))) for a in members
        }
        if len(ambients) != 1:
            raise ValueError("members of one restricted class disagree ambiently")
        classes.append(
            RestrictedClass(
                root=key,
                multiplicity=len(members),
                coroot_vec=next(iter(coroots)),
                members=members,
                root_ambient=next(iter(ambients)),
            )
        )
    classes = tuple(classes)

    simple_roots_r, simple_coroots_r = _simple_restricted(classes, levi_simples, restrict, a_s)

    lattice_M = _spherical_lattice(system, parabolic, a_s, classes, normalizer_mode)
    lattice_N = dual_lattice_basis(lattice_M) if lattice_M is not None else None

    two_rho_H = _sum_vectors(
        [restrict(a) for a in list(parabolic.phi_qu) + list(phi_s_plus)], rank
    )
    chi_ac = _sum_vectors(
        [
            vscale(Q(1, 2), vadd(a, sigma.apply(a)))
            for a in parabolic.phi_qu
        ],
        system.ambient_dim,
    )

    datum = HorosymmetricDatum(
        system=system,
        parabolic=parabolic,
        sigma=sigma,
        normalizer_mode=normalizer_mode,
        a_s_basis=a_s,
        rank=rank,
        rho=rho,
        levi_positive=levi_positive,
        levi_simples=levi_simples,
        phi_l_sigma=fixed,
        phi_s_plus=phi_s_plus,
        phi_Qu=parabolic.phi_qu,
        classes=classes,
        simple_restricted_roots=simple_roots_r,
        simple_restricted_coroots=simple_coroots_r,
        lattice_M=lattice_M,
        lattice_N=lattice_N,
        two_rho_H=two_rho_H,
        chi_ac=chi_ac,
    )
    _check_chi_ac(datum)
    return datum


class _Proto:
    """Just enough of a datum for restricted_coroot during derivation."""

    def __init__(self, system, sigma, a_s):
        self.system = system
        self.sigma = sigma
        self.a_s_basis = a_s

    def apply_sigma(self, x):
        return self.sigma.apply(x)

    def as_coords(self, x):
        return coords_in_basis(x, self.a_s_basis)


def _sum_vectors(vectors, dim) -> Vec:
    out = list(zero_vec(dim))
    for v in vectors:
        for i, x in enumerate(v):
            out[i] += x
    return tuple(out)


def _indecomposables(values: Tuple[Vec, ...]) -> List[Vec]:
    vals = set(values)
    out = []
    for v in values:
        dec = any(
            tuple(a - b for a, b in zip(v, w)) in vals
            for w in vals
            if w != v
        )
        if not dec:
            out.append(v)
    return out


def _simple_restricted(classes, levi_simples, restrict, a_s):
    """Simple restricted roots (indecomposable restrictions, ordered by the
    adjusted Levi simples that induce them) and the ray-aligned simple
    coroots of the dual system."""
    roots = tuple(c.root for c in classes)
    if not roots:
        return (), ()
    simple_roots = _indecomposables(roots)
    induced = []
    for s in levi_simples:
        key = restrict(s)
        if not is_zero_vec(key) and key not in induced:
            induced.append(key)
    if sorted(induced) != sorted(simple_roots):
        raise ValueError("induced simple restrictions disagree with indecomposables")
    coroot_vals = tuple(c.coroot_vec for c in classes)
    simple_coroots_pool = _indecomposables(coroot_vals)
    aligned = []
    for s in induced:
        # ray test in covector coordinates: pair the candidate through the
        # ambient form so both sides live in the same space
        match = []
        for v in simple_coroots_pool:
            v_amb = _embed(v, a_s)
            v_cov = tuple(dot(v_amb, b) for b in a_s)
            if _parallel(s, v_cov):
                match.append(v)
        if len(match) != 1:
            raise ValueError("no unique simple coroot on the ray of a simple root")
        aligned.append(match[0])
    return tuple(induced), tuple(aligned)


def _embed(coords: Vec, basis: Mat) -> Vec:
    out = zero_vec(len(basis[0]))
    for c, b in zip(coords, basis):
        out = vadd(out, vscale(c, b))
    return out


def _parallel(xi: Vec, eta: Vec) -> bool:
    # same ray: positive proportionality of coordinate tuples
    nz = [(a, b) for a, b in zip(xi, eta) if a != 0 or b != 0]
    if not nz:
        return False
    a0, b0 = nz[0]
    if a0 == 0 or b0 == 0 or (a0 > 0) != (b0 > 0):
        return False
    return all(a * b0 == b * a0 for a, b in nz)


def _spherical_lattice(system, parabolic, a_s, classes, normalizer_mode) -> Mat:
    rank = len(a_s)
    if classes:
        root_rows = tuple(c.root for c in classes)
        central = kernel_basis(root_rows)
        if central:
            # symmetric fiber plus extra central directions: the glued
            # lattice is not determined by this data alone
            return None
        if normalizer_mode == "normalizer":
            return lattice_basis([vscale(Q(2), c.root) for c in classes])
        coroot_lattice = lattice_basis([c.coroot_vec for c in classes])
        return dual_lattice_basis(coroot_lattice)
    # horospherical: characters of the torus trivial on the Levi-derived part
    pair_rows = []
    for i in parabolic.levi_simple_indices:
        pair_rows.append(
            tuple(int(x) for x in coroot(system, system.simple_roots[i]))
        )
    kernel_rows = _integer_kernel(pair_rows, system.ambient_dim)
    images = [tuple(dot(tuple(Q(x) for x in k), b) for b in a_s) for k in kernel_rows]
    lat = lattice_basis(images)
    if len(lat) != rank:
        raise ValueError("central character lattice does not span a_s*")
    return lat


def _integer_kernel(rows: List[Tuple[int, ...]], n: int) -> List[Tuple[int, ...]]:
    """Basis of {m in Z^n : m . row = 0 for all rows} (saturated)."""
    if not rows:
        return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    k = len(rows)
    # work rows: [B | I] with B = transpose(rows); unimodular row ops only
    work = [
        [rows[j][i] for j in range(k)] + [1 if j == i else 0 for j in range(n)]
        for i in range(n)
    ]
    pivot_row = 0
    for col in range(k):
        while True:
            nz = [i for i in range(pivot_row, n) if work[i][col] != 0]
            if not nz:
                break
            nz.sort(key=lambda i: (abs(work[i][col]), i))
            i0 = nz[0]
            work[pivot_row], work[i0] = work[i0], work[pivot_row]
            done = True
            for i in range(pivot_row + 1, n):
                if work[i][col] != 0:
                    t = work[i][col] // work[pivot_row][col]
                    work[i] = [x - t * y for x, y in zip(work[i], work[pivot_row])]
                    if work[i][col] != 0:
                        done = False
            if done:
                pivot_row += 1
                break
    return [tuple(r[k:]) for r in work[pivot_row:]] or []


def _check_chi_ac(datum: HorosymmetricDatum) -> None:
    for b in datum.a_s_basis:
        if dot(datum.chi_ac, b) != 0:
            raise AssertionError("anticanonical character does not vanish on a_s")


def restricted_weyl_group(datum: HorosymmetricDatum, bound: int = 10000) -> Tuple[Mat, ...]:
    """Closure of the simple restricted reflections on a_s coordinates."""
    r = datum.rank
    ident = identity_mat(r)
    gens = []
    for xi, v in zip(datum.simple_restricted_roots, datum.simple_restricted_coroots):
        pairing = dot(xi, v)
        gens.append(
            tuple(
                tuple(
                    (Q(1) if i == j else Q(0)) - 2 * xi[j] * v[i] / pairing
                    for j in range(r)
                )
                for i in range(r)
            )
        )
    seen = {ident}
    queue = [ident]
    while queue:
        nxt = []
        for w in queue:
            for g in gens:
                wg = tuple(tuple(dot(g[i], col) for col in zip(*w)) for i in range(r))
                if wg not in seen:
                    if len(seen) >= bound:
                        raise ValueError("restricted Weyl closure exceeds bound")
                    seen.add(wg)
                    nxt.append(wg)
        queue = nxt
    return tuple(sorted(seen))


def classify_restricted_type(datum: HorosymmetricDatum) -> str:
    """Cartan label of the restricted root set, detected from rays and
    length ratios (scale-invariant, so the doubling convention does not
    matter)."""
    if not datum.classes:
        return "empty"
    r = len(datum.simple_restricted_roots)
    rays: Dict[Vec, List[Vec]] = {}
    for c in datum.classes:
        rays.setdefault(primitive_int_vec(c.root), []).append(c.root)
    norm_of = {c.root: _norm2(c.root_ambient) for c in datum.classes}
    roots = [c.root for c in datum.classes]
    nonreduced = any(len(vs) > 1 for vs in rays.values())
    if nonreduced:
        if all(len(vs) <= 2 for vs in rays.values()) and _count_doubled(rays) == r:
            return f"BC{r}"
        return "unclassified:" + repr(sorted(roots))
    norms = sorted({norm_of[v] for v in roots})
    if len(norms) == 1:
        expected = r * (r + 1) // 2
        if len(roots) == expected:
            return f"A{r}"
        return "unclassified:" + repr(sorted(roots))
    if len(norms) == 2 and norms[1] == 2 * norms[0]:
        n_long = sum(1 for v in roots if norm_of[v] == norms[1])
        if n_long == r:
            return f"C{r}"
        if n_long == r * (r - 1):
            return f"B{r}"
    return "unclassified:" + repr(sorted(roots))


def _norm2(v: Vec) -> Q:
    return sum((x * x for x in v), Q(0))


def _count_doubled(rays: Dict[Vec, List[Vec]]) -> int:
    return sum(1 for vs in rays.values() if len(vs) == 2)


def _fiber_is_hermitian(datum: HorosymmetricDatum) -> Optional[bool]:
    kind = datum.sigma.kind
    if kind == "AIII":
        return True
    if kind in ("AII", "GroupType", "Horospherical"):
        return False
    if kind == "AI":
        # split fiber is Hermitian only for an SL(2) Levi factor
        return len(datum.parabolic.levi_simple_indices) == 1
    return None


def color_images(datum: HorosymmetricDatum) -> Tuple[Color, ...]:
    """Images of the colors in a_s, tagged by origin.

    Symmetric-fiber colors sit at the simple restricted coroots; a real
    restricted wall of a Hermitian fiber carries two colors over the same
    point, otherwise the color map is injective on fiber colors.  Flag
    colors are split restrictions of the simple coroots outside the Levi.
    """
    colors: List[Color] = []
    hermitian = _fiber_is_hermitian(datum)
    real_coroots = set()
    for c in datum.classes:
        if any(tuple(datum.apply_sigma(a)) == tuple(vscale(Q(-1), a)) for a in c.members):
            real_coroots.add(c.coroot_vec)
    for i, v in enumerate(datum.simple_restricted_coroots):
        if hermitian is None:
            degree: Optional[int] = None
        elif hermitian and v in real_coroots:
            degree = 2
        else:
            degree = 1
        colors.append(Color(origin="fiber", label=f"fiber:{i}", point=v, fiber_degree=degree))
    simple_set = set(datum.system.simple_roots)
    for i, a in enumerate(datum.system.simple_roots):
        if a in datum.phi_Qu and a in simple_set:
            point = datum.as_coords(datum.p_part(coroot(datum.system, a)))
            colors.append(
                Color(origin="flag", label=f"flag:{i}", point=point, fiber_degree=1)
            )
    return tuple(colors)


def cartan_matrix_restricted(datum: HorosymmetricDatum) -> Mat:
    """Pairings <2*simple_i, coroot of class(simple_j)> (doubled-system
    convention, diagonal 2)."""
    by_root = {c.root: c for c in datum.classes}
    simples = datum.simple_restricted_roots
    rows = []
    for si in simples:
        row = []
        for sj in simples:
            cj = by_root[sj]
            row.append(dot(vscale(Q(2), si), cj.coroot_vec))
        rows.append(tuple(row))
    return tuple(rows)
