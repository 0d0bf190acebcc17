"""Integer lattices with symmetric forms and their isometries.

A `GramLattice` is Z^n with an integral symmetric nondegenerate bilinear
form; a `LatticeIsometry` is an integer matrix preserving it. The central
tool is the exact trichotomy

    elliptic    some power is the identity,
    parabolic   spectral radius 1, some power unipotent but not the identity,
    loxodromic  spectral radius > 1,

decided entirely in integer arithmetic: the characteristic polynomial has
spectral radius 1 exactly when it is a product of cyclotomic polynomials
(its constant term is +-1, so a root inside the unit circle forces one
outside). Parabolic isometries carry a unique primitive isotropic fixed
class and their sup norms grow quadratically; loxodromic ones have a real
top eigenvalue that we enclose by exact bisection.

Growth of ||h^n|| is measured under the max-abs-entry norm on exact integer
powers, so measurement noise is purely the fitting model, never arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product

from . import intmat
from .errors import (
    DependentBasis,
    InsufficientEntries,
    NotAnIsometry,
    NotParabolic,
    NotUnimodular,
    OrthogonalToH,
    SignatureUnsupported,
)

POLYNOMIAL_SCHEDULE = (16, 32, 64, 128, 256, 512, 1024, 2048, 4096)
EXPONENTIAL_SCHEDULE = (12, 25, 50, 100, 200)
MATRIX_NORM = "max-abs-entry"


@dataclass(frozen=True)
class GramLattice:
    """Z^rank with an integral symmetric nondegenerate bilinear form."""

    gram: tuple

    def __post_init__(self):
        g = intmat.freeze(self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("gram matrix must be symmetric")
        if n and intmat.bareiss_det(g) == 0:
            raise ValueError("gram matrix must be nondegenerate")

    @property
    def rank(self):
        return len(self.gram)

    @property
    def signature(self):
        """(n_plus, n_minus); the radical is empty by construction."""
        n_plus, n_minus, n_zero = intmat.signature(self.gram)
        assert n_zero == 0
        return (n_plus, n_minus)

    def bilinear(self, x, y):
        """Exact pairing <x, y>; works for int, Fraction, or mixed entries."""
        gy = intmat.mat_vec(self.gram, y)
        return sum(a * b for a, b in zip(x, gy))

    def quadratic(self, x):
        return self.bilinear(x, x)


@dataclass(frozen=True)
class LatticeIsometry:
    """Integer matrix h with h^T G h = G and det h = +-1, acting on columns."""

    lattice: GramLattice
    matrix: tuple

    def __post_init__(self):
        m = intmat.freeze(self.matrix)
        object.__setattr__(self, "matrix", m)
        verify_isometry(self.lattice, m)

    @property
    def rank(self):
        return self.lattice.rank

    def power(self, n):
        """h^n as a LatticeIsometry; n may be negative."""
        if n < 0:
            return self.inverse().power(-n)
        return LatticeIsometry(self.lattice, intmat.mat_pow(self.matrix, n))

    def inverse(self):
        # G^-1 h^T G inverts any isometry; stay exact by solving columns.
        n = self.rank
        cols = []
        for j in range(n):
            e = [1 if i == j else 0 for i in range(n)]
            x = intmat.solve_rational(self.matrix, e)
            assert x is not None
            cols.append([int(v) for v in x])
        inv = tuple(zip(*[tuple(c) for c in cols]))
        return LatticeIsometry(self.lattice, inv)

    def __matmul__(self, other):
        if self.lattice != other.lattice:
            raise ValueError("isometries live on different lattices")
        return LatticeIsometry(
            self.lattice, intmat.mat_mul(self.matrix, other.matrix)
        )


def verify_isometry(lattice, matrix):
    """Raise unless matrix is a unimodular isometry of the lattice."""
    m = intmat.freeze(matrix)
    n = lattice.rank
    if len(m) != n or any(len(row) != n for row in m):
        raise NotAnIsometry("matrix shape does not match the lattice rank")
    mt = intmat.transpose(m)
    if intmat.mat_mul(mt, intmat.mat_mul(lattice.gram, m)) != lattice.gram:
        raise NotAnIsometry("matrix does not preserve the bilinear form")
    # Preserving a nondegenerate form already forces det = +-1; this guard
    # only fires if that assumption is ever relaxed.
    det = intmat.bareiss_det(m)
    if det not in (1, -1):
        raise NotUnimodular(f"determinant is {det}, expected +-1")
    return True


@dataclass(frozen=True)
class Elliptic:
    kind = "elliptic"
    order: int


@dataclass(frozen=True)
class Parabolic:
    kind = "parabolic"
    unipotent_power: int
    invariant_class: tuple


@dataclass(frozen=True)
class Loxodromic:
    kind = "loxodromic"
    radius_lo: Fraction
    radius_hi: Fraction

    @property
    def spectral_radius(self):
        return float((self.radius_lo + self.radius_hi) / 2)


def restrict_isometry(iso, basis_rows):
    """Restrict an isometry to an invariant primitive sublattice.

    `basis_rows` are independent integer vectors spanning a sublattice that
    h maps into itself. Returns the restricted LatticeIsometry in the basis
    coordinates. Raises DependentBasis or ValueError on bad input.
    """
    rows = [tuple(r) for r in basis_rows]
    if not rows:
        raise ValueError("empty sublattice basis")
    if intmat.rational_rank(rows) != len(rows):
        raise DependentBasis("sublattice basis is dependent")
    cols = list(zip(*rows))
    rest_cols = []
    for b in rows:
        image = intmat.mat_vec(iso.matrix, b)
        coords = intmat.solve_rational(cols, image)
        if coords is None or any(x.denominator != 1 for x in coords):
            raise ValueError("sublattice is not invariant under the isometry")
        rest_cols.append([int(x) for x in coords])
    restricted = tuple(zip(*[tuple(c) for c in rest_cols]))
    g = iso.lattice.gram
    gram_b = intmat.mat_mul(rows, intmat.mat_mul(g, intmat.transpose(rows)))
    return LatticeIsometry(GramLattice(gram_b), restricted)


def _unipotent_exponent(orders):
    """Smallest k with h^k unipotent: eigenvalues are roots of unity of the
    listed orders, and all must be killed at once."""
    return intmat.lcm_list(orders) if orders else 1


def _elliptic_order(iso, k):
    """Exact order of a finite-order isometry dividing k."""
    divisors = sorted(d for d in range(1, k + 1) if k % d == 0)
    ident = intmat.identity(iso.rank)
    for d in divisors:
        if intmat.mat_pow(iso.matrix, d) == ident:
            return d
    return None


def spectral_radius_enclosure(poly, width=Fraction(1, 10**12)):
    """Enclose the unique real root > 1 of a cyclotomic-free integer
    polynomial by exact bisection.

    The polynomial is monic with constant term +-1 and, for forms with one
    positive direction, has exactly one root outside the unit circle; it is
    negative at 1 and positive beyond the Cauchy bound.
    """
    at_one = intmat.poly_eval(poly, 1)
    assert at_one != 0, "cyclotomic part must already be removed"
    hi = Fraction(2 + max(abs(c) for c in poly))
    while intmat.poly_eval(poly, hi) <= 0:
        hi *= 2
    if at_one > 0:
        # Defensive: scan for the sign change closest to the far end.
        lo = Fraction(1)
        step = (hi - lo) / 1024
        probe = hi - step
        while probe > lo and intmat.poly_eval(poly, probe) > 0:
            probe -= step
        if probe <= lo:
            raise SignatureUnsupported(
                "no real eigenvalue above 1; form is not hyperbolic"
            )
        lo = probe
    else:
        lo = Fraction(1)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if intmat.poly_eval(poly, mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo, hi


def classify_isometry(iso, invariant_sublattice=None):
    """Exact trichotomy of a lattice isometry.

    Parameters
    ----------
    iso : LatticeIsometry
    invariant_sublattice : sequence of rows, optional
        Basis of an invariant primitive sublattice; the classification is
        applied to the restriction.

    Returns
    -------
    Elliptic, Parabolic, or Loxodromic. Finite order is detected on any
    lattice; the other two classes require exactly one positive direction
    (SignatureUnsupported otherwise) since uniqueness of the isotropic
    fixed class and reality of the top eigenvalue both live there.
    """
    if invariant_sublattice is not None:
        iso = restrict_isometry(iso, invariant_sublattice)
    poly = intmat.charpoly(iso.matrix)
    orders, rest = intmat.cyclotomic_part(poly)
    if len(rest) == 1:
        # All eigenvalues are roots of unity: quasi-unipotent.
        k = _unipotent_exponent(orders)
        order = _elliptic_order(iso, k)
        if order is not None:
            return Elliptic(order=order)
        if iso.lattice.signature[0] != 1:
            raise SignatureUnsupported(
                "parabolic classification needs signature (1, m), got "
                f"{iso.lattice.signature}"
            )
        nil = intmat.mat_sub(intmat.mat_pow(iso.matrix, k),
                             intmat.identity(iso.rank))
        assert intmat.is_zero_matrix(intmat.mat_pow(nil, iso.rank))
        return Parabolic(
            unipotent_power=k,
            invariant_class=parabolic_invariant_class(iso, _power=k),
        )
    if iso.lattice.signature[0] != 1:
        raise SignatureUnsupported(
            "loxodromic classification needs signature (1, m), got "
            f"{iso.lattice.signature}"
        )
    lo, hi = spectral_radius_enclosure(rest)
    return Loxodromic(radius_lo=lo, radius_hi=hi)


def parabolic_invariant_class(iso, _power=None):
    """Primitive isotropic class fixed by a parabolic isometry.

    Computed on the unipotent power: the fixed sublattice carries a negative
    semidefinite form whose radical is one isotropic line; its primitive
    generator (first nonzero coordinate positive) is the class.
    """
    if _power is None:
        cls = classify_isometry(iso)
        if not isinstance(cls, Parabolic):
            raise NotParabolic(f"isometry is {cls.kind}")
        return cls.invariant_class
    u = intmat.mat_pow(iso.matrix, _power)
    fixed = intmat.integer_kernel(
        intmat.mat_sub(u, intmat.identity(iso.rank))
    )
    gram_f = intmat.mat_mul(
        fixed, intmat.mat_mul(iso.lattice.gram, intmat.transpose(fixed))
    )
    radical = intmat.integer_kernel(gram_f)
    if len(radical) != 1:
        raise SignatureUnsupported(
            "isotropic fixed class is not unique on this form"
        )
    line = intmat.mat_vec(intmat.transpose(fixed), radical[0])
    cls = intmat.primitive_vector(line)
    assert iso.lattice.quadratic(cls) == 0
    assert intmat.mat_vec(u, cls) == cls
    return cls


@dataclass(frozen=True)
class JordanSplit:
    """Orthogonal splitting of a parabolic isometry.

    unipotent_part_basis spans E1 = ker (h - 1)^r, the generalized
    eigenspace of 1 (h acts unipotently there); compact_part_basis spans
    E_Q = ker Q(h) for the complementary characteristic factor Q, the
    directions on which h has finite order. The parts are q-orthogonal
    because an isometry only pairs eigenvalues multiplying to 1. The
    maximal Jordan block on E1 has size jordan_block_size.
    """

    unipotent_part_basis: tuple
    compact_part_basis: tuple
    jordan_block_size: int


def jordan_split(iso):
    """Split Z^n (x) Q into generalized 1-eigenspace and complement for a
    parabolic isometry, with the q-orthogonality self-check."""
    cls = classify_isometry(iso)
    if not isinstance(cls, Parabolic):
        raise NotParabolic(f"isometry is {cls.kind}")
    n = iso.rank
    poly = intmat.charpoly(iso.matrix)
    # Multiplicity r of (t - 1): peel linear factors while division stays
    # exact with zero remainder.
    r = 0
    rest = poly
    while True:
        q, rem = intmat.poly_divmod(rest, (-1, 1))
        if q is None or rem != (0,):
            break
        rest = q
        r += 1
    nil = intmat.mat_sub(iso.matrix, intmat.identity(n))
    e1 = intmat.integer_kernel(intmat.mat_pow(nil, r)) if r else ()
    # rest(h) kills exactly the complementary invariant subspace.
    acc = intmat.zeros(n, n)
    hpow = intmat.identity(n)
    for c in rest:
        acc = intmat.mat_add(acc, intmat.mat_scale(hpow, c))
        hpow = intmat.mat_mul(hpow, iso.matrix)
    eq = intmat.integer_kernel(acc) if len(rest) > 1 else ()
    if e1 and eq:
        cross = intmat.mat_mul(
            e1, intmat.mat_mul(iso.lattice.gram, intmat.transpose(eq))
        )
        assert intmat.is_zero_matrix(cross), "split parts must be orthogonal"
    block = 0
    if e1:
        power = intmat.identity(n)
        block = n
        for j in range(n + 1):
            if all(
                all(x == 0 for x in intmat.mat_vec(power, b)) for b in e1
            ):
                block = j
                break
            power = intmat.mat_mul(power, nil)
    return JordanSplit(
        unipotent_part_basis=e1,
        compact_part_basis=eq,
        jordan_block_size=block,
    )


def _monomials(rank, p):
    return list(combinations_with_replacement(range(rank), p))


def sym_power(iso, p):
    """Induced isometry on the p-th symmetric power.

    The monomial basis is combinations_with_replacement order on indices;
    the induced form pairs monomials by the permanent of their pairing
    matrix, and the induced matrix is exact, so the constructor re-verifies
    the isometry property as a self-check.
    """
    if p < 0:
        raise ValueError("symmetric power must be nonnegative")
    rank = iso.rank
    monos = _monomials(rank, p)
    index = {m: i for i, m in enumerate(monos)}
    dim = len(monos)
    cols = []
    for mono in monos:
        # Expand prod_b (h e_{mono_b}) in the symmetric algebra.
        poly = {(): 1}
        for j in mono:
            nxt = {}
            for key, coeff in poly.items():
                for i in range(rank):
                    mij = iso.matrix[i][j]
                    if mij:
                        new_key = tuple(sorted(key + (i,)))
                        nxt[new_key] = nxt.get(new_key, 0) + coeff * mij
            poly = nxt
        col = [0] * dim
        for key, coeff in poly.items():
            col[index[key]] = coeff
        cols.append(col)
    matrix = tuple(zip(*[tuple(c) for c in cols]))
    g = iso.lattice.gram
    gram_p = tuple(
        tuple(
            intmat.permanent(
                [[g[a][b] for b in mb] for a in ma]
            ) if p else 1
            for mb in monos
        )
        for ma in monos
    )
    return LatticeIsometry(GramLattice(gram_p), matrix)


@dataclass(frozen=True)
class GrowthFit:
    """Measured norm growth of h^n along a schedule.

    Polynomial mode: log ||h^n|| = exponent * log n + log constant, least
    squares over the schedule; residual is the rms log misfit. Exponential
    mode: rate is the limit estimate exp((log ||h^b|| - log ||h^a||)/(b-a))
    from the two largest schedule points, constant the matching prefactor,
    and residual the change in the estimate from the previous pair.
    """

    mode: str
    exponent: float
    rate: float
    constant: float
    residual: float
    schedule: tuple
    norms: tuple
    norm: str = MATRIX_NORM


def _log_norms(iso, schedule):
    logs = []
    norms = []
    for n in schedule:
        norm = intmat.max_abs_entry(intmat.mat_pow(iso.matrix, n))
        if norm == 0:
            raise ValueError("zero matrix power cannot happen for isometries")
        norms.append(norm)
        logs.append(_log_big(norm))
    return norms, logs


def _log_big(value):
    # math.log handles arbitrary-precision ints directly.
    return math.log(value)


def growth_exponent(iso, mode, schedule=None):
    """Fit the norm growth of h^n.

    Parameters
    ----------
    iso : LatticeIsometry
    mode : "polynomial" or "exponential"
    schedule : increasing n values; defaults are geometric 16..4096 for
        polynomial and 12..200 for exponential.
    """
    if mode not in ("polynomial", "exponential"):
        raise ValueError(f"unknown growth mode {mode!r}")
    if schedule is None:
        schedule = (
            POLYNOMIAL_SCHEDULE if mode == "polynomial"
            else EXPONENTIAL_SCHEDULE
        )
    schedule = tuple(int(n) for n in schedule)
    if len(schedule) < 4 or any(n <= 0 for n in schedule):
        raise ValueError("schedule needs at least four positive entries")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    norms, logs = _log_norms(iso, schedule)
    if mode == "polynomial":
        xs = [math.log(n) for n in schedule]
        sx = sum(xs)
        sy = sum(logs)
        k = len(xs)
        sxx = sum(x * x for x in xs)
        sxy = sum(x * y for x, y in zip(xs, logs))
        denom = k * sxx - sx * sx
        slope = (k * sxy - sx * sy) / denom
        intercept = (sy - slope * sx) / k
        resid = math.sqrt(
            sum((y - slope * x - intercept) ** 2 for x, y in zip(xs, logs)) / k
        )
        return GrowthFit(
            mode=mode,
            exponent=slope,
            rate=float("nan"),
            constant=math.exp(intercept),
            residual=resid,
            schedule=schedule,
            norms=tuple(norms),
        )
    def pair_rate(i, j):
        return (logs[j] - logs[i]) / (schedule[j] - schedule[i])
    log_rate = pair_rate(-2, -1)
    prev = pair_rate(-3, -2) if len(schedule) >= 3 else log_rate
    constant = math.exp(logs[-1] - log_rate * schedule[-1])
    return GrowthFit(
        mode=mode,
        exponent=float("nan"),
        rate=math.exp(log_rate),
        constant=constant,
        residual=abs(math.exp(log_rate) - math.exp(prev)),
        schedule=schedule,
        norms=tuple(norms),
    )


@dataclass(frozen=True)
class GrowthSpectrum:
    """Growth measurements across symmetric powers 0..p_max.

    values[p] is the fitted exponent (polynomial mode) or log rate
    (exponential mode) of the induced isometry on Sym^p; residuals are the
    per-fit residuals. Both scales make the expected spectrum affine in p.
    """

    mode: str
    values: tuple
    residuals: tuple
    schedule: tuple
    norm: str = MATRIX_NORM

    @property
    def p_max(self):
        return len(self.values) - 1


def growth_spectrum(iso, p_max, mode, schedule=None):
    """Measure growth of Sym^p(h) for p = 0..p_max."""
    values = []
    residuals = []
    for p in range(p_max + 1):
        fit = growth_exponent(sym_power(iso, p), mode, schedule)
        if mode == "polynomial":
            values.append(fit.exponent)
            residuals.append(fit.residual)
        else:
            values.append(math.log(fit.rate) if fit.rate > 0 else 0.0)
            residuals.append(fit.residual)
    return GrowthSpectrum(
        mode=mode,
        values=tuple(values),
        residuals=tuple(residuals),
        schedule=tuple(schedule) if schedule else
        (POLYNOMIAL_SCHEDULE if mode == "polynomial" else EXPONENTIAL_SCHEDULE),
    )


@dataclass(frozen=True)
class ConcavityReport:
    ok: bool
    violations: tuple
    tolerance: float


def concavity_check(spectrum, tolerance=0.1):
    """Check concavity 2 s_p >= s_{p-1} + s_{p+1} - tolerance at interior p.

    Growth values across symmetric powers are concave in p (log-concavity
    of the degree sequence); linear spectra sit on the equality case, so
    the tolerance absorbs fit noise only. Accepts a GrowthSpectrum or a
    plain sequence of s_p values starting at p = 0 (where s_0 = 0 by
    definition of the trivial power).
    """
    values = (
        spectrum.values if isinstance(spectrum, GrowthSpectrum) else
        tuple(float(v) for v in spectrum)
    )
    if len(values) < 3:
        raise InsufficientEntries(
            "concavity needs powers up to p_max >= 2"
        )
    violations = []
    for p in range(1, len(values) - 1):
        defect = values[p - 1] + values[p + 1] - 2 * values[p]
        if defect > tolerance:
            violations.append((p, defect))
    return ConcavityReport(
        ok=not violations, violations=tuple(violations),
        tolerance=tolerance,
    )


@dataclass(frozen=True)
class NSClass:
    """Restriction type of the form on a primitive sublattice."""

    kind: str
    kernel_class: tuple = None


def ns_trichotomy(lattice, basis_rows):
    """Classify the form restricted to the span of `basis_rows`.

    hyperbolic            signature (1, rho - 1)
    parabolic_degenerate  negative semidefinite with a line kernel; the
                          primitive ambient generator is reported
    negative_definite     signature (0, rho)
    """
    rows = [tuple(r) for r in basis_rows]
    if rows and intmat.rational_rank(rows) != len(rows):
        raise DependentBasis("basis rows are dependent over Q")
    if not rows:
        return NSClass(kind="negative_definite")
    g = lattice.gram
    gram_b = intmat.mat_mul(rows, intmat.mat_mul(g, intmat.transpose(rows)))
    n_plus, n_minus, n_zero = intmat.signature(gram_b)
    if n_plus == 1 and n_zero == 0:
        return NSClass(kind="hyperbolic")
    if n_plus == 0 and n_zero == 0:
        return NSClass(kind="negative_definite")
    if n_plus == 0 and n_zero == 1:
        radical = intmat.integer_kernel(gram_b)
        assert len(radical) == 1
        ambient = intmat.mat_vec(intmat.transpose(rows), radical[0])
        return NSClass(
            kind="parabolic_degenerate",
            kernel_class=intmat.primitive_vector(ambient),
        )
    raise SignatureUnsupported(
        f"restricted signature ({n_plus}, {n_minus}, {n_zero}) is outside "
        "the trichotomy"
    )


def transcendental_complement(lattice, ns_basis):
    """Primitive basis of the orthogonal complement of a sublattice.

    The complement {x : <b, x> = 0 for all b} is the integer kernel of the
    pairing matrix, hence automatically saturated.
    """
    rows = [tuple(r) for r in ns_basis]
    if not rows:
        return intmat.identity(lattice.rank)
    if intmat.rational_rank(rows) != len(rows):
        raise DependentBasis("basis rows are dependent over Q")
    pairing = intmat.mat_mul(rows, lattice.gram)
    return intmat.integer_kernel(pairing)


@dataclass(frozen=True)
class PeriodPoint:
    """A weight-two period: sigma in the complexified lattice with
    q(sigma, sigma) = 0 < q(sigma, conj sigma), plus a primitive isotropic
    integer class h orthogonal to sigma. The form must have three positive
    directions."""

    lattice: GramLattice
    sigma_re: tuple
    sigma_im: tuple
    h: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "sigma_re", tuple(Fraction(x) for x in self.sigma_re)
        )
        object.__setattr__(
            self, "sigma_im", tuple(Fraction(x) for x in self.sigma_im)
        )
        object.__setattr__(self, "h", tuple(int(x) for x in self.h))
        if self.lattice.signature[0] != 3:
            raise SignatureUnsupported(
                "period points need three positive directions, got "
                f"{self.lattice.signature}"
            )
        q = self.lattice.bilinear
        re, im = self.sigma_re, self.sigma_im
        if q(re, re) != q(im, im) or q(re, im) != 0:
            raise ValueError("sigma is not isotropic: q(sigma, sigma) != 0")
        if q(re, re) + q(im, im) <= 0:
            raise ValueError("q(sigma, conj sigma) must be positive")
        if self.lattice.quadratic(self.h) != 0:
            raise ValueError("h must be isotropic")
        if q(self.h, re) != 0 or q(self.h, im) != 0:
            raise ValueError("h must be orthogonal to sigma")
        if intmat.vector_gcd(self.h) != 1:
            raise ValueError("h must be primitive and nonzero")


@dataclass(frozen=True)
class ProjectivityResult:
    """Twist parameter and projectivity verdict for a class a."""

    t_re: Fraction
    t_im: Fraction
    is_projective: bool
    q_a_a: Fraction

    @property
    def t(self):
        return complex(self.t_re, self.t_im)


def projectivity_parameter(period, a):
    """Parameter t = -q(a, sigma)/q(a, h) making a of type (1,1), exactly.

    The twisted period sigma + t h still pairs to zero with a; positivity
    q(a, a) > 0 decides projectivity. Raises OrthogonalToH when q(a, h) = 0,
    reporting whether a pairs to zero with sigma as well (then it is of
    type (1,1) for every t) or never is.
    """
    a = tuple(int(x) for x in a)
    q = period.lattice.bilinear
    qa_re = Fraction(q(a, period.sigma_re))
    qa_im = Fraction(q(a, period.sigma_im))
    qah = Fraction(q(a, period.h))
    if qah == 0:
        always = qa_re == 0 and qa_im == 0
        raise OrthogonalToH(
            "q(a, h) = 0: parameter undefined; class is "
            + ("of type (1,1) for every t" if always else "never of type (1,1)"),
            always_type_one_one=always,
        )
    t_re = -qa_re / qah
    t_im = -qa_im / qah
    # Exact consistency: q(a, sigma + t h) = 0 componentwise.
    assert qa_re + t_re * qah == 0 and qa_im + t_im * qah == 0
    qaa = Fraction(period.lattice.quadratic(a))
    return ProjectivityResult(
        t_re=t_re, t_im=t_im, is_projective=qaa > 0, q_a_a=qaa
    )


def parameter_search(period, r, height_bound):
    """Enumerate integer classes a with |t(a)| < 1/r and q(a, a) > 0.

    Classes are canonicalized up to sign (first nonzero entry positive)
    since a and -a give the same parameter. Hits are sorted by |t|^2
    (exact), then lexicographically. r > 0 and height_bound >= 1 required.
    """
    r = Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if height_bound < 1:
        raise ValueError("height bound must be at least 1")
    rank = period.lattice.rank
    cap = Fraction(1) / (r * r)
    hits = []
    for a in product(range(-height_bound, height_bound + 1), repeat=rank):
        first = next((x for x in a if x != 0), None)
        if first is None or first < 0:
            continue
        try:
            res = projectivity_parameter(period, a)
        except OrthogonalToH:
            continue
        if not res.is_projective:
            continue
        t_abs2 = res.t_re * res.t_re + res.t_im * res.t_im
        if t_abs2 < cap:
            hits.append((t_abs2, a, res))
    hits.sort(key=lambda item: (item[0], item[1]))
    return tuple((a, res) for _, a, res in hits)
