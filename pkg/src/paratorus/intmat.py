"""Exact integer and rational matrix arithmetic.

Everything here is overflow-free by construction: integer matrices use Python
ints, rational reductions use fractions.Fraction. Matrices are sequences of
row sequences; functions return tuples of tuples so results are hashable and
safe to freeze into reports.

The lattice-facing tools are Hermite/Smith reduction, integer kernels,
saturation, characteristic polynomials, cyclotomic peeling, and a symmetric
signature count. A small exact LLL lives at the bottom for integer-relation
sniffing; it is not used on anything large.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from itertools import permutations


def freeze(mat):
    """Copy a matrix into a tuple of tuples."""
    return tuple(tuple(row) for row in mat)


def identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(m, n):
    return tuple((0,) * n for _ in range(m))


def transpose(mat):
    return tuple(zip(*mat)) if mat else ()


def mat_mul(a, b):
    bt = list(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a, c):
    return tuple(tuple(c * x for x in row) for row in a)


def mat_eq(a, b):
    return freeze(a) == freeze(b)


def is_zero_matrix(a):
    return all(x == 0 for row in a for x in row)


def mat_pow(a, k):
    """a**k by repeated squaring, k >= 0."""
    n = len(a)
    result = identity(n)
    base = freeze(a)
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


def max_abs_entry(a):
    """Sup norm over entries; the declared matrix norm for growth fits."""
    return max((abs(x) for row in a for x in row), default=0)


def bareiss_det(mat):
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [list(row) for row in mat]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # Bareiss: division by the previous pivot is exact.
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def charpoly(mat):
    """Monic characteristic polynomial of an integer matrix.

    Returns coefficients (c_0, ..., c_n) with c_n = 1, ordered low degree
    first, so p(t) = sum c_k t^k. Faddeev-LeVerrier; the division by k at
    each step is exact over the integers.
    """
    n = len(mat)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    m = identity(n)
    c = 1
    for k in range(1, n + 1):
        m = mat_mul(mat, m)
        tr = sum(m[i][i] for i in range(n))
        q, r = divmod(tr, k)
        if r:
            raise ArithmeticError("Faddeev-LeVerrier trace not divisible")
        c = -q
        coeffs[n - k] = c
        m = mat_add(m, mat_scale(identity(n), c))
    return tuple(coeffs)


def poly_eval(coeffs, x):
    """Evaluate sum coeffs[k] x^k (Horner); exact for int/Fraction x."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return tuple(out)


def poly_divmod(p, q):
    """Exact division of integer polynomials; q monic up to sign."""
    p = list(p)
    dq = len(q) - 1
    while len(q) > 1 and q[-1] == 0:
        q = q[:-1]
        dq -= 1
    lead = q[-1]
    out = [0] * max(len(p) - dq, 0)
    for i in range(len(p) - 1, dq - 1, -1):
        c, r = divmod(p[i], lead)
        if r:
            return None, tuple(p)
        out[i - dq] = c
        for j in range(dq + 1):
            p[i - dq + j] -= c * q[j]
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(out), tuple(p)


def euler_phi(n):
    result = n
    p = 2
    m = n
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


@lru_cache(maxsize=None)
def cyclotomic(n):
    """Coefficients of the n-th cyclotomic polynomial, low degree first."""
    # Phi_n = (t^n - 1) / prod_{d | n, d < n} Phi_d, exact at every step.
    p = tuple([-1] + [0] * (n - 1) + [1])
    for d in range(1, n):
        if n % d == 0:
            q, r = poly_divmod(p, cyclotomic(d))
            assert r == (0,), "cyclotomic division must be exact"
            p = q
    return p


def cyclotomic_part(poly):
    """Peel every cyclotomic factor off an integer polynomial.

    Returns (orders, rest): `orders` maps n to the multiplicity of Phi_n in
    `poly`, and `rest` is the cyclotomic-free quotient. Any n contributing a
    factor satisfies phi(n) <= deg, so n <= 2 deg^2 + 3 covers the search.
    """
    deg = len(poly) - 1
    orders = {}
    rest = tuple(poly)
    bound = 2 * deg * deg + 3
    for n in range(1, bound + 1):
        if euler_phi(n) > deg:
            continue
        phi_n = cyclotomic(n)
        while len(rest) > len(phi_n) - 1:
            q, r = poly_divmod(rest, phi_n)
            if q is None or r != (0,):
                break
            orders[n] = orders.get(n, 0) + 1
            rest = q
    return orders, rest


def _row_reduce_step(mat, rows, r, c):
    """Zero out column c below row r with unimodular row ops; pivot at r."""
    piv = None
    for i in range(r, rows):
        if mat[i][c] != 0:
            piv = i
            break
    if piv is None:
        return False
    mat[r], mat[piv] = mat[piv], mat[r]
    for i in range(r + 1, rows):
        while mat[i][c] != 0:
            a, b = mat[r][c], mat[i][c]
            if abs(a) > abs(b):
                mat[r], mat[i] = mat[i], mat[r]
                a, b = b, a
            q = b // a
            mat[i] = [x - q * y for x, y in zip(mat[i], mat[r])]
    return True


def hermite_normal_form(mat, keep_zero_rows=False):
    """Row-style Hermite normal form of an integer matrix.

    Pivots are positive, entries above a pivot are reduced into [0, pivot).
    Row operations are unimodular, so the row lattice is preserved.
    """
    work = [list(row) for row in mat]
    m = len(work)
    n = len(work[0]) if m else 0
    r = 0
    for c in range(n):
        if r == m:
            break
        if not _row_reduce_step(work, m, r, c):
            continue
        if work[r][c] < 0:
            work[r] = [-x for x in work[r]]
        for j in range(r):
            q = work[j][c] // work[r][c]
            if q:
                work[j] = [x - q * y for x, y in zip(work[j], work[r])]
        r += 1
    if keep_zero_rows:
        return freeze(work)
    return freeze(work[:r])


def integer_kernel(mat):
    """Basis rows of {x in Z^n : mat @ x = 0}.

    The kernel of an integer matrix is a saturated sublattice and the rows
    returned here generate it: run HNF on [mat^T | I] and read off the
    transform rows that annihilate mat^T.
    """
    m = len(mat)
    if m == 0:
        return ()
    n = len(mat[0])
    aug = [list(col) + [1 if i == j else 0 for j in range(n)]
           for i, col in enumerate(zip(*mat))]
    if not aug:
        return ()
    h = hermite_normal_form(aug, keep_zero_rows=True)
    out = [row[m:] for row in h if all(x == 0 for x in row[:m])]
    return hermite_normal_form(out)


def saturate(rows):
    """Saturation of the row lattice: rational row span intersected with Z^n.

    Double kernel: vectors orthogonal to everything orthogonal to the rows.
    """
    rows = [r for r in rows if any(x != 0 for x in r)]
    if not rows:
        return ()
    comp = integer_kernel(rows)
    if not comp:
        return identity(len(rows[0]))
    return integer_kernel(comp)


def smith_invariants(mat):
    """Nonzero invariant factors d_1 | d_2 | ... of an integer matrix."""
    a = [list(row) for row in mat]
    m = len(a)
    n = len(a[0]) if m else 0
    out = []
    t = 0
    while t < min(m, n):
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        i, j = piv
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            # Clear column t, then row t; restart if new residue appears.
            for i in range(t + 1, m):
                while a[i][t] != 0:
                    if abs(a[t][t]) > abs(a[i][t]):
                        a[t], a[i] = a[i], a[t]
                    q = a[i][t] // a[t][t]
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
            for j in range(t + 1, n):
                while a[t][j] != 0:
                    if abs(a[t][t]) > abs(a[t][j]):
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                    q = a[t][j] // a[t][t]
                    for row in a:
                        row[j] -= q * row[t]
            if all(a[i][t] == 0 for i in range(t + 1, m)):
                break
        # Divisibility fix-up: fold in any entry the pivot does not divide.
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % a[t][t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            a[t] = [x + y for x, y in zip(a[t], a[bad])]
            continue
        out.append(abs(a[t][t]))
        t += 1
    return tuple(out)


def rational_rank(mat):
    """Rank over Q via fraction Gauss elimination."""
    work = [[Fraction(x) for x in row] for row in mat]
    m = len(work)
    n = len(work[0]) if m else 0
    rank = 0
    for c in range(n):
        piv = None
        for i in range(rank, m):
            if work[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        for i in range(m):
            if i != rank and work[i][c] != 0:
                f = work[i][c] / work[rank][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[rank])]
        rank += 1
    return rank


def solve_rational(mat, rhs):
    """Solve mat @ x = rhs over Q; None if inconsistent, minimal echelon
    solution if underdetermined."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    work = [[Fraction(x) for x in row] + [Fraction(r)]
            for row, r in zip(mat, rhs)]
    pivots = []
    rank = 0
    for c in range(n):
        piv = None
        for i in range(rank, m):
            if work[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        work[rank] = [x / work[rank][c] for x in work[rank]]
        for i in range(m):
            if i != rank and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[rank])]
        pivots.append(c)
        rank += 1
    for i in range(rank, m):
        if work[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = work[i][n]
    return tuple(x)


def signature(gram):
    """Signature (n_plus, n_minus, n_zero) of a symmetric rational matrix.

    Iterated Schur-complement sign counting: each nonzero diagonal pivot
    contributes its sign; a fully isotropic step pairs two indices into a
    hyperbolic plane contributing (+1, -1).
    """
    n = len(gram)
    work = [[Fraction(x) for x in row] for row in gram]
    active = list(range(n))
    n_plus = n_minus = n_zero = 0
    while active:
        piv = next((i for i in active if work[i][i] != 0), None)
        if piv is None:
            pair = None
            for i in active:
                for j in active:
                    if i != j and work[i][j] != 0:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                n_zero += len(active)
                break
            i, j = pair
            # e_i <- e_i + e_j turns the off-diagonal entry into a pivot.
            for k in range(n):
                work[i][k] += work[j][k]
            for k in range(n):
                work[k][i] += work[k][j]
            continue
        d = work[piv][piv]
        if d > 0:
            n_plus += 1
        else:
            n_minus += 1
        active.remove(piv)
        for i in active:
            if work[i][piv] != 0:
                f = work[i][piv] / d
                for j in active:
                    work[i][j] -= f * work[piv][j]
        for i in active:
            work[i][piv] = Fraction(0)
            work[piv][i] = Fraction(0)
    return (n_plus, n_minus, n_zero)


def vector_gcd(v):
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    return g


def primitive_vector(v):
    """Divide out the content and normalize the first nonzero entry > 0."""
    g = vector_gcd(v)
    if g == 0:
        return tuple(v)
    w = [x // g for x in v]
    for x in w:
        if x != 0:
            if x < 0:
                w = [-y for y in w]
            break
    return tuple(w)


def lcm_list(values):
    out = 1
    for v in values:
        out = lcm(out, v)
    return out


def permanent(mat):
    """Permanent of a small square matrix; used for induced power forms."""
    n = len(mat)
    total = 0
    for perm in permutations(range(n)):
        term = 1
        for i, j in enumerate(perm):
            term *= mat[i][j]
            if term == 0:
                break
        total += term
    return total


def lll_reduce(basis, delta=Fraction(3, 4)):
    """Exact LLL over Z with Fraction Gram-Schmidt. Small inputs only."""
    b = [list(row) for row in basis]
    n = len(b)

    def dot(u, v):
        return sum(Fraction(x) * y for x, y in zip(u, v))

    def gram_schmidt():
        star = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = dot(b[i], star[j]) / dot(star[j], star[j])
                v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
            star.append(v)
        return star, mu

    star, mu = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                star, mu = gram_schmidt()
        lhs = dot(star[k], star[k])
        rhs = (delta - mu[k][k - 1] ** 2) * dot(star[k - 1], star[k - 1])
        if lhs >= rhs:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            star, mu = gram_schmidt()
            k = max(k - 1, 1)
    return freeze(b)
