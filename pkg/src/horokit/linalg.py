"""Exact linear algebra over rational tuples.

Vectors are tuples of Fraction, matrices are tuples of row vectors.
Everything here is deterministic: pivoting is positional, never by
magnitude, so repeated runs produce identical bases.
"""

from fractions import Fraction
from math import gcd, lcm
from typing import List, Optional, Sequence, Tuple

Q = Fraction
Vec = Tuple[Q, ...]
Mat = Tuple[Vec, ...]


def vec(*entries) -> Vec:
    return tuple(Q(e) for e in entries)


def zero_vec(n: int) -> Vec:
    return (Q(0),) * n


def dot(u: Sequence[Q], v: Sequence[Q]) -> Q:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Q(0))


def vadd(u: Sequence[Q], v: Sequence[Q]) -> Vec:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Sequence[Q], v: Sequence[Q]) -> Vec:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def vscale(c: Q, v: Sequence[Q]) -> Vec:
    return tuple(Q(c) * a for a in v)


def vneg(v: Sequence[Q]) -> Vec:
    return tuple(-a for a in v)


def is_zero_vec(v: Sequence[Q]) -> bool:
    return all(a == 0 for a in v)


def identity_mat(n: int) -> Mat:
    return tuple(tuple(Q(1) if i == j else Q(0) for j in range(n)) for i in range(n))


def transpose(m: Mat) -> Mat:
    return tuple(zip(*m)) if m else ()


def mat_vec(m: Mat, v: Sequence[Q]) -> Vec:
    return tuple(dot(row, v) for row in m)


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def rref(rows: Sequence[Sequence[Q]]) -> Tuple[List[List[Q]], List[int]]:
    """Reduced row echelon form with positional pivoting.

    Scans columns left to right; the pivot row is the first row (top to
    bottom) with a nonzero entry in the current column.  Returns the
    reduced rows and the list of pivot column indices.
    """
    work = [list(map(Q, r)) for r in rows]
    if not work:
        return [], []
    ncols = len(work[0])
    pivots: List[int] = []
    rank = 0
    for col in range(ncols):
        sel = None
        for i in range(rank, len(work)):
            if work[i][col] != 0:
                sel = i
                break
        if sel is None:
            continue
        work[rank], work[sel] = work[sel], work[rank]
        pv = work[rank][col]
        work[rank] = [x / pv for x in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][col] != 0:
                c = work[i][col]
                work[i] = [x - c * y for x, y in zip(work[i], work[rank])]
        pivots.append(col)
        rank += 1
        if rank == len(work):
            break
    return work, pivots


def solve(a: Mat, b: Sequence[Q]) -> Optional[Vec]:
    """One solution of a x = b with free variables set to zero, or None."""
    if len(a) != len(b):
        raise ValueError("row count mismatch")
    n = len(a[0]) if a else 0
    aug = [list(row) + [Q(bb)] for row, bb in zip(a, b)]
    red, pivots = rref(aug)
    if n in pivots:
        return None
    x = [Q(0)] * n
    for i, col in enumerate(pivots):
        x[col] = red[i][n]
    return tuple(x)


def solve_square(a: Mat, b: Sequence[Q]) -> Vec:
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    x = solve(a, b)
    if x is None or len(rref(a)[1]) != n:
        raise ValueError("matrix is singular")
    return x


def inverse(a: Mat) -> Mat:
    n = len(a)
    aug = [list(row) + list(ident_row) for row, ident_row in zip(a, identity_mat(n))]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(red[i][n:]) for i in range(n))


def det(a: Mat) -> Q:
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    work = [list(map(Q, row)) for row in a]
    result = Q(1)
    for col in range(n):
        sel = None
        for i in range(col, n):
            if work[i][col] != 0:
                sel = i
                break
        if sel is None:
            return Q(0)
        if sel != col:
            work[col], work[sel] = work[sel], work[col]
            result = -result
        result *= work[col][col]
        inv = 1 / work[col][col]
        for i in range(col + 1, n):
            if work[i][col] != 0:
                c = work[i][col] * inv
                work[i] = [x - c * y for x, y in zip(work[i], work[col])]
    return result


def kernel_basis(a: Mat) -> List[Vec]:
    """Basis of the right kernel, one vector per free column, in column order."""
    if not a:
        return []
    n = len(a[0])
    red, pivots = rref(a)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for j in free:
        v = [Q(0)] * n
        v[j] = Q(1)
        for i, col in enumerate(pivots):
            v[col] = -red[i][j]
        basis.append(tuple(v))
    return basis


def primitive_int_vec(v: Sequence[Q]) -> Vec:
    """Scale a nonzero rational vector to integer entries with gcd 1 and
    positive first nonzero entry."""
    if is_zero_vec(v):
        raise ValueError("zero vector has no primitive representative")
    den = lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(Q(x) for x in ints)


def is_integer_vec(v: Sequence[Q]) -> bool:
    return all(x.denominator == 1 for x in v)


def hnf(gens: Sequence[Sequence[int]]) -> Tuple[Tuple[int, ...], ...]:
    """Row Hermite normal form of an integer generating set.

    Returns the nonzero rows: pivots positive, entries above each pivot
    reduced into [0, pivot).  The rows form a basis of the generated
    lattice.
    """
    work = [list(map(int, g)) for g in gens if any(g)]
    if not work:
        return ()
    m = len(work[0])
    result: List[List[int]] = []
    col = 0
    while work and col < m:
        nz = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            reduced = [p]
            for r in nz[1:]:
                t = r[col] // p[col]
                row = [x - t * y for x, y in zip(r, p)]
                if any(row):
                    reduced.append(row)
            nz = [r for r in reduced if r[col] != 0]
            rest.extend(r for r in reduced[1:] if r[col] == 0 and any(r))
        pivot_row = nz[0]
        if pivot_row[col] < 0:
            pivot_row = [-x for x in pivot_row]
        result.append(pivot_row)
        work = rest
        col += 1
    # reduce entries above pivots
    for i in reversed(range(len(result))):
        pc = next(j for j in range(m) if result[i][j] != 0)
        for k in range(i):
            t = result[k][pc] // result[i][pc]
            if t:
                result[k] = [x - t * y for x, y in zip(result[k], result[i])]
    return tuple(tuple(r) for r in result)


def lattice_basis(gens: Sequence[Sequence[Q]]) -> Mat:
    """Basis of the lattice generated by rational vectors (HNF after
    clearing denominators, rescaled back)."""
    gens = [tuple(map(Q, g)) for g in gens]
    gens = [g for g in gens if not is_zero_vec(g)]
    if not gens:
        return ()
    den = lcm(*(x.denominator for g in gens for x in g))
    rows = hnf([[int(x * den) for x in g] for g in gens])
    return tuple(tuple(Q(x, den) for x in row) for row in rows)


def dual_lattice_basis(basis: Mat) -> Mat:
    """Dual basis rows d_i with dot(d_i, b_j) = delta_ij.

    Only defined for a full-rank square basis.
    """
    n = len(basis)
    if any(len(row) != n for row in basis):
        raise ValueError("dual lattice needs a full-rank square basis")
    return inverse(transpose(basis))


def coords_in_basis(v: Sequence[Q], basis: Mat) -> Vec:
    """Coefficients c with v = sum_i c_i basis_i (raises if inconsistent)."""
    cols = transpose(basis)
    c = solve(cols, v)
    if c is None:
        raise ValueError("vector is not in the span of the basis")
    assert is_zero_vec(vsub(mat_vec(cols, c), tuple(map(Q, v))))
    return c


def in_lattice(v: Sequence[Q], basis: Mat) -> bool:
    try:
        c = coords_in_basis(v, basis)
    except ValueError:
        return False
    return is_integer_vec(c)
