"""Ambient root systems, Cartan involutions and parabolic choices.

Type A is realized in n = rank + 1 coordinates with the standard dot
product playing the role of the invariant form; lattice-level code
quotients implicitly by the all-ones direction.  A plain torus (no
roots) is available for the toric degenerations.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from .linalg import (
    Mat,
    Q,
    Vec,
    dot,
    identity_mat,
    is_zero_vec,
    mat_mul,
    mat_vec,
    vscale,
    vsub,
    zero_vec,
)


@dataclass(frozen=True)
class AmbientRootSystem:
    series: str
    rank: int
    ambient_dim: int
    positive_roots: Tuple[Vec, ...]
    simple_roots: Tuple[Vec, ...]
    rho: Vec
    # True when characters live in Z^n modulo the all-ones direction
    trace_gauge: bool

    @property
    def all_roots(self) -> Tuple[Vec, ...]:
        return self.positive_roots + tuple(vscale(Q(-1), a) for a in self.positive_roots)


def build_root_system(series: str, rank: int) -> AmbientRootSystem:
    """Positive roots e_j - e_k (j < k) for series A; rho is their half sum."""
    if series != "A":
        raise ValueError(f"unsupported series: {series!r}")
    if rank < 1:
        raise ValueError("rank must be positive")
    n = rank + 1
    positive = []
    for j in range(n):
        for k in range(j + 1, n):
            root = [Q(0)] * n
            root[j] = Q(1)
            root[k] = Q(-1)
            positive.append(tuple(root))
    positive.sort()
    simple = []
    for j in range(n - 1):
        root = [Q(0)] * n
        root[j] = Q(1)
        root[j + 1] = Q(-1)
        simple.append(tuple(root))
    rho = tuple(sum(col, Q(0)) / 2 for col in zip(*positive))
    return AmbientRootSystem(
        series="A",
        rank=rank,
        ambient_dim=n,
        positive_roots=tuple(positive),
        simple_roots=tuple(simple),
        rho=rho,
        trace_gauge=True,
    )


def torus(n: int) -> AmbientRootSystem:
    """Rank-n torus: no roots, characters are all of Z^n."""
    if n < 1:
        raise ValueError("torus dimension must be positive")
    return AmbientRootSystem(
        series="torus",
        rank=n,
        ambient_dim=n,
        positive_roots=(),
        simple_roots=(),
        rho=zero_vec(n),
        trace_gauge=False,
    )


def coroot(system: AmbientRootSystem, alpha: Vec) -> Vec:
    norm = dot(alpha, alpha)
    if norm == 0:
        raise ValueError("zero vector is not a root")
    return vscale(Q(2) / norm, alpha)


def reflection(system: AmbientRootSystem, alpha: Vec, x: Vec) -> Vec:
    """s_alpha(x) = x - <x, alpha^vee> alpha."""
    return vsub(x, vscale(dot(x, coroot(system, alpha)), alpha))


@dataclass(frozen=True)
class Involution:
    kind: str
    matrix: Mat

    def apply(self, x: Vec) -> Vec:
        return mat_vec(self.matrix, x)


def _validate_involution(system: AmbientRootSystem, matrix: Mat, kind: str) -> None:
    n = system.ambient_dim
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise ValueError(f"involution matrix must be {n}x{n}")
    if mat_mul(matrix, matrix) != identity_mat(n):
        raise ValueError("matrix squared is not the identity")
    # form preservation: columns stay orthonormal under the dot product
    cols = tuple(zip(*matrix))
    for i in range(n):
        for j in range(i, n):
            expect = Q(1) if i == j else Q(0)
            if dot(cols[i], cols[j]) != expect:
                raise ValueError("matrix does not preserve the invariant form")
    if system.positive_roots:
        root_set = set(system.all_roots)
        for a in system.positive_roots:
            img = mat_vec(matrix, a)
            if tuple(img) not in root_set:
                raise ValueError(f"{kind}: image of a root is not a root")


def build_involution(system: AmbientRootSystem, kind: str, **params) -> Involution:
    """Rational involution matrix on the ambient coordinates.

    Kinds: AI (negation), AII (paired block inversion), AIII (index
    reversal permutation upsilon), GroupType (swap of two equal blocks),
    Horospherical (identity on the span of chosen Levi coroots, negation
    on its orthogonal complement), ExplicitMatrix.
    """
    n = system.ambient_dim
    if kind == "AI":
        matrix = tuple(tuple(Q(-1) if i == j else Q(0) for j in range(n)) for i in range(n))
    elif kind == "AII":
        if n % 2 != 0:
            raise ValueError("AII needs an even number of coordinates")
        matrix = tuple(
            tuple(Q(-1) if j == (i + 1 if i % 2 == 0 else i - 1) else Q(0) for j in range(n))
            for i in range(n)
        )
    elif kind == "AIII":
        r = int(params["r"])
        m = int(params.get("m", n))
        if m != n:
            raise ValueError("AIII block size must match the ambient dimension")
        if not (1 <= r and 2 * r <= m):
            raise ValueError("AIII needs 1 <= r <= m/2")
        upsilon = list(range(n))
        for i in range(r):
            upsilon[i] = n - 1 - i
            upsilon[n - 1 - i] = i
        matrix = tuple(
            tuple(Q(1) if j == upsilon[i] else Q(0) for j in range(n)) for i in range(n)
        )
    elif kind == "GroupType":
        if n % 2 != 0:
            raise ValueError("GroupType needs an even number of coordinates")
        half = n // 2
        matrix = tuple(
            tuple(Q(1) if j == (i + half) % n else Q(0) for j in range(n)) for i in range(n)
        )
    elif kind == "Horospherical":
        levi = tuple(params.get("levi", ()))
        coroots = [coroot(system, system.simple_roots[i]) for i in levi]
        matrix = _signed_projector(n, coroots)
    elif kind == "ExplicitMatrix":
        matrix = tuple(tuple(Q(x) for x in row) for row in params["matrix"])
    else:
        raise ValueError(f"unknown involution kind: {kind!r}")
    _validate_involution(system, matrix, kind)
    return Involution(kind=kind, matrix=matrix)


def _signed_projector(n: int, span: Tuple[Vec, ...]) -> Mat:
    """Matrix acting as +1 on the span and -1 on its dot-complement."""
    basis = []
    for v in span:
        # Gram-Schmidt over Q; exact because the form is the dot product
        w = list(v)
        for b in basis:
            c = dot(w, b) / dot(b, b)
            w = [x - c * y for x, y in zip(w, b)]
        if not is_zero_vec(w):
            basis.append(tuple(w))
    rows = []
    for i in range(n):
        e = tuple(Q(1) if j == i else Q(0) for j in range(n))
        proj = list(zero_vec(n))
        for b in basis:
            c = dot(e, b) / dot(b, b)
            proj = [x + c * y for x, y in zip(proj, b)]
        # 2 * projection - identity
        rows.append(tuple(2 * p - ee for p, ee in zip(proj, e)))
    return tuple(rows)


@dataclass(frozen=True)
class ParabolicChoice:
    levi_simple_indices: Tuple[int, ...]
    phi_l: Tuple[Vec, ...]
    phi_l_positive: Tuple[Vec, ...]
    phi_qu: Tuple[Vec, ...]


def build_parabolic(system: AmbientRootSystem, levi_simple_indices) -> ParabolicChoice:
    """Standard parabolic from a set of simple root indices.

    phi_l collects the roots supported on the chosen simples, phi_qu the
    remaining positive roots.
    """
    idx = tuple(sorted(set(int(i) for i in levi_simple_indices)))
    for i in idx:
        if not (0 <= i < len(system.simple_roots)):
            raise ValueError(f"simple root index out of range: {i}")
    simples = [system.simple_roots[i] for i in idx]
    phi_l_pos = []
    phi_qu = []
    for a in system.positive_roots:
        if _in_span_of_simples(a, simples):
            phi_l_pos.append(a)
        else:
            phi_qu.append(a)
    phi_l = tuple(phi_l_pos) + tuple(vscale(Q(-1), a) for a in phi_l_pos)
    return ParabolicChoice(
        levi_simple_indices=idx,
        phi_l=phi_l,
        phi_l_positive=tuple(phi_l_pos),
        phi_qu=tuple(phi_qu),
    )


def _in_span_of_simples(alpha: Vec, simples) -> bool:
    # type A positive roots are consecutive sums of simples, so support
    # inspection is enough; solve exactly anyway to stay series-agnostic
    from .linalg import coords_in_basis

    if not simples:
        return False
    try:
        coords_in_basis(alpha, tuple(simples))
    except ValueError:
        return False
    return True
