"""Orbit closures of torus translations, exactly and by sampling.

A translation vector t in R^{2g} generates a cyclic group of rigid motions
of the torus T^{2g} = R^{2g}/Z^{2g}. The closure of the orbit of 0 is a
closed subgroup: a subtorus of some dimension r together with c parallel
copies. Both numbers are read off the relation lattice {m in Z^{2g} :
<m, t> in Z}.

Three levels of access, in decreasing rigor:

  * exact: vectors given as rationals plus rational combinations of named
    irrational constants; the relation lattice comes out of integer normal
    forms with no floating point at all.
  * sampled: a box-counting and clustering oracle on the actual orbit
    points, used to cross-check the exact route.
  * scanned: translation fields over a base box, where each base point
    only carries a float vector; resonances are then meaningful only up to
    an enumeration height and a tolerance, and Newton refinement against
    symbolic equations upgrades selected hits to certified representatives.

The scan loops delegate their inner products to the kernels module, so
they run compiled when numba is available and chunked-numpy otherwise
with bitwise-identical output.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import inf, lcm, log

import numpy as np
from scipy.spatial import cKDTree

from .errors import DependenceSuspected, InconclusiveAtScale, RankDeficientField
from .fibration import (
    Box,
    PeriodFamily,
    default_fd_step,
    generic_rank,
    halton_points,
    translation_batch,
)
from .intmat import (
    hermite_normal_form,
    identity,
    integer_kernel,
    lll_reduce,
    mat_mul,
    saturate,
)
from . import kernels

_TRANSLATION_CHUNK = 2048
_RESONANCE_CHUNK = 4096
_RELATION_SCALE = 10 ** 25
_RELATION_COEFF_BOUND = 10 ** 6


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(
        f"exact coefficients must be int, str, or Fraction, got {value!r}"
    )


@dataclass(frozen=True)
class NamedConstant:
    """A real constant declared by name with a certified decimal value.

    The decimal string is taken literally as the working value (an exact
    rational); it must carry at least 30 digits after the point, so that
    no integer-relation question at the heights used here can be affected
    by the truncation of the true constant.
    """

    name: str
    decimal: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("constant needs a name")
        mantissa = self.decimal.lstrip("+-")
        if "." not in mantissa or len(mantissa.split(".")[1]) < 30:
            raise ValueError(
                f"constant {self.name!r} needs at least 30 decimal digits"
            )
        Fraction(self.decimal)

    @property
    def value(self):
        return Fraction(self.decimal)

    @property
    def value_float(self):
        return float(Fraction(self.decimal))


# 38-digit expansions leave a wide margin over the 30-digit floor.
SQRT2 = NamedConstant("sqrt2", "1.41421356237309504880168872420969807857")
SQRT3 = NamedConstant("sqrt3", "1.73205080756887729352744634150587236694")


def _independence_check(constants):
    """Heuristic integer-relation search among 1 and the declared constants.

    Declared independence is trusted input; this only warns. The candidate
    relation comes from exact LLL on the scaled-value lattice and is
    accepted when its coefficients stay small and the exact combination of
    the decimal values nearly vanishes.
    """
    values = [Fraction(1)] + [c.value for c in constants]
    n = len(values)
    basis = []
    for i, v in enumerate(values):
        row = [0] * n
        row[i] = 1
        row.append(round(v * _RELATION_SCALE))
        basis.append(tuple(row))
    reduced = lll_reduce(basis)
    for row in reduced:
        coeffs = row[:n]
        if all(c == 0 for c in coeffs):
            continue
        if max(abs(c) for c in coeffs) > _RELATION_COEFF_BOUND:
            continue
        combo = sum(c * v for c, v in zip(coeffs, values))
        if abs(combo) < Fraction(1, 10 ** 20):
            names = ["1"] + [c.name for c in constants]
            rel = " + ".join(
                f"{c}*{m}" for c, m in zip(coeffs, names) if c
            )
            warnings.warn(
                DependenceSuspected(
                    f"declared constants admit the near-relation {rel} ~ 0"
                ),
                stacklevel=3,
            )
            return


@dataclass(frozen=True)
class AlgebraicVector:
    """Exact translation vector: rationals plus rational multiples of
    declared constants.

    coeffs has k+1 rows of length dim; entry j of the vector is
    coeffs[0][j] + sum_i coeffs[i][j] * constants[i-1]. The constants are
    declared Q-linearly independent together with 1; that declaration is
    trusted (a heuristic warning fires on likely violations).
    """

    coeffs: tuple
    constants: tuple = ()
    check_independence: bool = True

    def __post_init__(self):
        coeffs = tuple(
            tuple(_as_fraction(v) for v in row) for row in self.coeffs
        )
        constants = tuple(self.constants)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "constants", constants)
        if not coeffs or not coeffs[0]:
            raise ValueError("coefficient matrix must be nonempty")
        dim = len(coeffs[0])
        if any(len(row) != dim for row in coeffs):
            raise ValueError("coefficient rows must share a length")
        if len(coeffs) != len(constants) + 1:
            raise ValueError("need one coefficient row per constant plus one")
        if any(not isinstance(c, NamedConstant) for c in constants):
            raise TypeError("constants must be NamedConstant instances")
        if len({c.name for c in constants}) != len(constants):
            raise ValueError("constant names must be distinct")
        if constants and self.check_independence:
            _independence_check(constants)

    @property
    def dim(self):
        return len(self.coeffs[0])

    @property
    def rational(self):
        return self.coeffs[0]

    @property
    def irrational(self):
        return self.coeffs[1:]

    @property
    def float_values(self):
        exact = []
        for j in range(self.dim):
            v = self.coeffs[0][j]
            for i, c in enumerate(self.constants):
                v += self.coeffs[i + 1][j] * c.value
            exact.append(v)
        return tuple(float(v) for v in exact)

    def pairing(self, m):
        """<m, t> split into (rational part, irrational coefficients)."""
        m = [int(x) for x in m]
        if len(m) != self.dim:
            raise ValueError("pairing vector has the wrong length")
        rat = sum(c * x for c, x in zip(self.coeffs[0], m))
        irr = tuple(
            sum(c * x for c, x in zip(row, m)) for row in self.coeffs[1:]
        )
        return rat, irr

    def rational_pairing(self, m):
        rat, irr = self.pairing(m)
        if any(v != 0 for v in irr):
            raise ValueError("pairing is irrational for this vector")
        return rat

    def translate_by_integers(self, z):
        """t + z for z in Z^dim; the orbit closure cannot see z."""
        z = tuple(int(x) for x in z)
        if len(z) != self.dim:
            raise ValueError("integer shift has the wrong length")
        top = tuple(c + s for c, s in zip(self.coeffs[0], z))
        return AlgebraicVector(
            (top,) + self.coeffs[1:], self.constants, check_independence=False
        )

    def change_basis(self, a_inverse):
        """A^-1 t for an integer matrix, applied exactly row by row."""
        rows = [tuple(r) for r in a_inverse]
        if len(rows) != self.dim or any(len(r) != self.dim for r in rows):
            raise ValueError("basis change must be dim x dim")
        new = tuple(
            tuple(
                sum(Fraction(rows[i][j]) * row[j] for j in range(self.dim))
                for i in range(self.dim)
            )
            for row in self.coeffs
        )
        return AlgebraicVector(new, self.constants, check_independence=False)


def algebraic_vector(rational, irrational=(), constants=()):
    """Convenience constructor from a rational row plus irrational rows."""
    coeffs = (tuple(rational),) + tuple(tuple(row) for row in irrational)
    return AlgebraicVector(coeffs, tuple(constants))


@dataclass(frozen=True)
class RelationLattice:
    """The lattice {m in Z^dim : <m, t> in Z} and its primitive closure."""

    generators: tuple
    saturation: tuple
    rank: int

    def contains(self, m):
        """Exact membership of an integer vector in the generator lattice.

        The generators are in row Hermite form, so greedy reduction at the
        pivots decides membership.
        """
        v = [int(x) for x in m]
        for row in self.generators:
            piv = next(j for j, x in enumerate(row) if x != 0)
            if v[piv] % row[piv] == 0:
                q = v[piv] // row[piv]
                if q:
                    v = [a - q * b for a, b in zip(v, row)]
        return all(x == 0 for x in v)


def relation_lattice(t):
    """Exact relation lattice of an AlgebraicVector.

    The irrational coefficient rows define an integer-matrix condition
    whose kernel K collects the m with purely rational pairing; inside K
    the rational row imposes one congruence, realized as the kernel of a
    single row [p_1 .. p_r d] with the bookkeeping coordinate dropped
    (that projection is injective because d != 0).
    """
    dim = t.dim
    rows = []
    for coeff_row in t.irrational:
        den = 1
        for c in coeff_row:
            den = lcm(den, c.denominator)
        row = tuple(int(c * den) for c in coeff_row)
        if any(row):
            rows.append(row)
    sat = integer_kernel(rows) if rows else identity(dim)
    r = len(sat)
    if r == 0:
        return RelationLattice(generators=(), saturation=(), rank=0)
    values = [
        sum(c * k for c, k in zip(t.rational, krow)) for krow in sat
    ]
    d = 1
    for v in values:
        d = lcm(d, v.denominator)
    ps = tuple(int(v * d) for v in values)
    ker = integer_kernel([ps + (d,)])
    coeff_rows = [row[:-1] for row in ker]
    gens = hermite_normal_form(mat_mul(coeff_rows, sat))
    for g_row in gens:
        rat, irr = t.pairing(g_row)
        assert rat.denominator == 1 and all(v == 0 for v in irr)
    return RelationLattice(generators=gens, saturation=sat, rank=r)


@dataclass(frozen=True)
class OrbitClosureDescriptor:
    """Closure of the translation orbit: dimension, component count, and
    an integer basis of the identity component's tangent directions."""

    dimension: int
    components: int
    subtorus_basis: tuple
    relations: RelationLattice


def orbit_closure(t):
    """Exact orbit closure of an AlgebraicVector.

    dimension = dim - rank of the relation lattice; subtorus_basis spans
    the annihilator of the saturation; the component count is the lcm of
    the denominators of <m_i, t> over a saturation basis, which is the
    order of t in the quotient by the connected component and therefore
    independent of the basis choice.
    """
    rel = relation_lattice(t)
    dim = t.dim
    if rel.rank == 0:
        basis = identity(dim)
    else:
        basis = integer_kernel(rel.saturation)
    c = 1
    for m in rel.saturation:
        c = lcm(c, t.rational_pairing(m).denominator)
    return OrbitClosureDescriptor(
        dimension=dim - rel.rank,
        components=c,
        subtorus_basis=basis,
        relations=rel,
    )


def _float_vector(t):
    if isinstance(t, AlgebraicVector):
        return np.asarray(t.float_values, dtype=float)
    vals = np.asarray(t, dtype=float).reshape(-1)
    if vals.size == 0:
        raise ValueError("empty translation vector")
    return vals


@dataclass(frozen=True)
class OracleEstimate:
    """Box-counting and clustering estimate of (dimension, components)."""

    dimension: int
    components: int
    inconclusive: bool
    scales: tuple
    occupied: tuple
    n_points: int
    cluster_tol: float


def orbit_sample_oracle(t, n_points=100000, cluster_tol=0.02, backend=None):
    """Estimate the orbit closure from the first n_points orbit samples.

    Box-counting: occupied-cell counts at two or three dyadic scales
    around 1/cluster_tol give slope estimates of the dimension; scales so
    fine that a full-dimensional orbit could not saturate them are
    dropped. Components: connected clusters of occupied cells at the base
    scale under torus Chebyshev adjacency. Disagreeing dimension slopes
    set the inconclusive flag and fire InconclusiveAtScale, but the finest
    available estimate is still returned.
    """
    values = _float_vector(t)
    n_points = int(n_points)
    if n_points < 1000:
        raise ValueError("need at least 1000 sample points")
    if not 0 < cluster_tol < 0.5:
        raise ValueError("cluster_tol must lie in (0, 0.5)")
    d = values.size
    m0 = max(2, round(1.0 / cluster_tol))
    scales = sorted({2 * m0, m0, max(2, m0 // 2)}, reverse=True)
    scales = [m for m in scales if m ** d <= n_points // 2]
    while len(scales) < 2:
        prev = scales[-1] if scales else 2 * m0
        nxt = max(2, prev // 2)
        if scales and nxt == scales[-1]:
            break
        scales.append(nxt)

    pts = np.outer(np.arange(n_points, dtype=np.float64), values) % 1.0
    occupied = [
        int(kernels.occupied_cells(pts, m, backend=backend).size)
        for m in scales
    ]

    estimates = []
    for (ma, na), (mb, nb) in zip(
        zip(scales, occupied), zip(scales[1:], occupied[1:])
    ):
        est = log(na / nb) / log(ma / mb)
        estimates.append(min(d, max(0, round(est))))
    dimension = estimates[0]
    inconclusive = len(set(estimates)) > 1
    if inconclusive:
        warnings.warn(
            InconclusiveAtScale(
                f"box-count slopes disagree across scales {scales}: "
                f"{estimates}"
            ),
            stacklevel=2,
        )

    comp_scale = min(scales, key=lambda m: abs(m - m0))
    cells = kernels.occupied_cells(pts, comp_scale, backend=backend)
    components = kernels.count_components(cells, comp_scale, d)
    return OracleEstimate(
        dimension=dimension,
        components=components,
        inconclusive=inconclusive,
        scales=tuple(scales),
        occupied=tuple(occupied),
        n_points=n_points,
        cluster_tol=float(cluster_tol),
    )


def candidate_vectors(dim, max_height):
    """All nonzero integer vectors of sup-norm height <= max_height, one
    per sign pair (first nonzero entry positive), in lexicographic order."""
    max_height = int(max_height)
    if max_height < 1:
        raise ValueError("max_height must be at least 1")
    span = range(-max_height, max_height + 1)
    out = []
    for m in itertools.product(span, repeat=dim):
        lead = next((x for x in m if x != 0), 0)
        if lead > 0:
            out.append(m)
    return np.asarray(out, dtype=np.int64)


@dataclass(frozen=True)
class ResonanceResult:
    """Near-integer pairings of a float vector up to a height bound."""

    lattice: RelationLattice
    hits: tuple
    max_height: int
    tol: float

    @property
    def rank(self):
        return self.lattice.rank


def resonance_detect(t, max_height, tol, backend=None):
    """Find integer vectors pairing with t to within tol of an integer.

    Exhaustive enumeration up to the height bound (one representative per
    sign pair); the result is the lattice the hits generate. For float
    input this is resonance within (max_height, tol), not membership in an
    exact relation lattice.
    """
    values = _float_vector(t)
    if not tol > 0:
        raise ValueError("tol must be positive")
    cands = candidate_vectors(values.size, max_height)
    _, pairs = kernels.resonance_hits(
        values[None, :], cands.astype(np.float64), tol, backend=backend
    )
    hits = tuple(tuple(int(x) for x in cands[b]) for b in pairs[:, 1])
    if hits:
        gens = hermite_normal_form(hits)
        lattice = RelationLattice(
            generators=gens, saturation=saturate(hits), rank=len(gens)
        )
    else:
        lattice = RelationLattice(generators=(), saturation=(), rank=0)
    return ResonanceResult(
        lattice=lattice, hits=hits, max_height=int(max_height), tol=float(tol)
    )


def _map_chunks(fn, arr, threads, chunk):
    """Apply fn to fixed-size row chunks and return the list of results.

    Chunk boundaries depend only on the chunk size, and results are merged
    in chunk order, so the output is identical for every worker count.
    """
    blocks = [arr[i:i + chunk] for i in range(0, arr.shape[0], chunk)]
    if threads <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=int(threads)) as ex:
        return list(ex.map(fn, blocks))


def _translations_threaded(field, points, threads):
    outs = _map_chunks(
        lambda b: translation_batch(field, b), points, threads,
        _TRANSLATION_CHUNK,
    )
    return np.concatenate(outs, axis=0)


def _resonance_threaded(tvals, cands_float, tol, threads, backend):
    blocks = [
        (i, tvals[i:i + _RESONANCE_CHUNK])
        for i in range(0, tvals.shape[0], _RESONANCE_CHUNK)
    ]

    def work(item):
        offset, rows = item
        counts, pairs = kernels.resonance_hits(
            rows, cands_float, tol, backend=backend
        )
        shifted = pairs.copy()
        shifted[:, 0] += offset
        return counts, shifted

    if threads <= 1 or len(blocks) <= 1:
        outs = [work(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            outs = list(ex.map(work, blocks))
    counts = np.concatenate([c for c, _ in outs])
    pairs = (
        np.concatenate([p for _, p in outs], axis=0)
        if outs
        else np.empty((0, 2), dtype=np.int64)
    )
    return counts, pairs


def _batch_jacobian(field, points, h):
    """Central-difference Jacobians on a batch of base points, (n, d, d).

    Differences are unwrapped to the nearest torus representative, same
    convention as the single-point Jacobian.
    """
    pts = np.asarray(points, dtype=float)
    n, dim = pts.shape
    stencil = np.repeat(pts, 2 * dim, axis=0)
    for k in range(dim):
        stencil[2 * k::2 * dim, k] += h
        stencil[2 * k + 1::2 * dim, k] -= h
    vals = translation_batch(field, stencil).reshape(n, 2 * dim, -1)
    jac = np.empty((n, vals.shape[2], dim))
    for k in range(dim):
        diff = vals[:, 2 * k, :] - vals[:, 2 * k + 1, :]
        diff -= np.round(diff)
        jac[:, :, k] = diff / (2.0 * h)
    return jac


def _nearest_fraction(value, denominator_bound, fixed_denominator=None):
    if fixed_denominator is not None:
        q = int(fixed_denominator)
        return Fraction(round(value * q), q)
    return Fraction(float(value)).limit_denominator(int(denominator_bound))


@dataclass(frozen=True)
class RefinedStratum:
    """Certified base points realizing one requested resonance stratum.

    relations lists the integer vectors m_i whose pairings with the field
    were driven onto exact rationals; points holds only the seeds whose
    final residual certified, with the matching target values, component
    counts, residuals, and the smallest singular value of the relation
    Jacobian at the solution.
    """

    requested_dimension: int
    requested_components: int | None
    relations: tuple
    points: np.ndarray
    targets: tuple
    components: tuple
    residuals: np.ndarray
    jacobian_sigma_min: np.ndarray
    attempted: int

    @property
    def count(self):
        return int(self.points.shape[0])


def _refine_stratum(field, seeds, relations, request_c, denominator_bound,
                    newton_steps, certify_tol, h, inner_box):
    """Newton-refine every seed onto <m_i, t(b)> = rational targets."""
    m_rows = np.asarray(relations, dtype=float)
    nrel = m_rows.shape[0]
    b = np.array(seeds, dtype=float)
    t0 = translation_batch(field, b)
    raw = t0 @ m_rows.T
    targets = [
        tuple(
            _nearest_fraction(v, denominator_bound, request_c)
            for v in row
        )
        for row in raw
    ]
    target_f = np.array(
        [[float(v) for v in row] for row in targets], dtype=float
    )
    lo = np.asarray(inner_box.lo)
    hi = np.asarray(inner_box.hi)
    for _ in range(newton_steps):
        np.clip(b, lo, hi, out=b)
        res = translation_batch(field, b) @ m_rows.T - target_f
        res -= np.round(res)
        jac = _batch_jacobian(field, b, h)
        jm = np.einsum("rk,nkd->nrd", m_rows, jac)
        step = np.matmul(np.linalg.pinv(jm), res[:, :, None])[:, :, 0]
        b -= step
    np.clip(b, lo, hi, out=b)
    res = translation_batch(field, b) @ m_rows.T - target_f
    res -= np.round(res)
    residuals = np.abs(res).max(axis=1)
    jm = np.einsum("rk,nkd->nrd", m_rows, _batch_jacobian(field, b, h))
    sigma_min = np.linalg.svd(jm, compute_uv=False)[:, -1]
    certified = (residuals < certify_tol) & (sigma_min > 1e-8)

    comps = []
    kept_targets = []
    for keep, row in zip(certified, targets):
        if keep:
            c = 1
            for v in row:
                c = lcm(c, v.denominator)
            comps.append(c)
            kept_targets.append(row)
    dim = b.shape[1]
    return RefinedStratum(
        requested_dimension=dim - nrel,
        requested_components=request_c,
        relations=tuple(tuple(int(x) for x in row) for row in relations),
        points=b[certified],
        targets=tuple(kept_targets),
        components=tuple(comps),
        residuals=residuals[certified],
        jacobian_sigma_min=sigma_min[certified],
        attempted=int(b.shape[0]),
    )


@dataclass(frozen=True)
class DensityReport:
    """Grid classification of a translation field by resonance strata."""

    base_points: np.ndarray
    translations: np.ndarray
    dimensions: np.ndarray
    components: np.ndarray
    generic: np.ndarray
    generators: dict
    refined: tuple
    coverage: dict
    grid_counts: tuple
    max_height: int
    tol: float
    field_rank: int
    notes: tuple


def _default_refine_counts(dim):
    per_axis = max(4, round(9216 ** (1.0 / dim)))
    return (per_axis,) * dim


def _default_probe_counts(dim):
    per_axis = max(4, round(1024 ** (1.0 / dim)))
    return (per_axis,) * dim


def density_scan(field, grid_counts, max_height, tol, *, targets=None,
                 refine=True, refine_counts=None, denominator_bound=None,
                 newton_steps=10, certify_tol=1e-12, probe_counts=None,
                 threads=1, backend=None):
    """Classify a base grid by the resonances of the translation field.

    Every grid point is tested against all integer vectors up to the
    height bound; hits assemble into a per-point lattice whose rank gives
    the orbit dimension r (generic points carry no hits and get r = 2g,
    c = 1). For each requested stratum (r, c) with r < 2g, seeds on a
    coarse fixed grid are Newton-refined onto exact rational pairing
    targets; certification is a residual below certify_tol at a
    nondegenerate relation Jacobian.

    Coverage maps each dimension s to the covering radius, against a
    fixed probe grid, of the set vouching for s: the Newton-certified
    representatives when a stratum with that dimension was refined, the
    raw grid points otherwise (the generic stratum always uses the grid).
    Certified sets do not depend on the scan resolution, so refining the
    grid never increases any radius. Scans parallelize over fixed-size
    point chunks merged by index; results are identical for every thread
    count.
    """
    box = field.family.base_domain
    dim = box.dim
    counts = (
        (int(grid_counts),) * dim
        if np.isscalar(grid_counts)
        else tuple(int(c) for c in grid_counts)
    )
    if len(counts) != dim or any(c < 2 for c in counts):
        raise ValueError("grid counts must give at least 2 cells per axis")

    notes = []
    rank_report = generic_rank(field, samples=12, seed=101)
    if rank_report.rank < dim:
        warnings.warn(
            RankDeficientField(
                f"field has generic rank {rank_report.rank} < {dim}; "
                "strata needing more relations than the rank are skipped"
            ),
            stacklevel=2,
        )
        notes.append(f"generic rank {rank_report.rank} below {dim}")

    grid = box.grid(counts)
    tvals = _translations_threaded(field, grid, threads)
    cands = candidate_vectors(dim, max_height)
    cands_float = cands.astype(np.float64)
    hit_counts, pairs = _resonance_threaded(
        tvals, cands_float, tol, threads, backend
    )

    n = grid.shape[0]
    dims_arr = np.full(n, dim, dtype=np.int64)
    comps_arr = np.ones(n, dtype=np.int64)
    generic = hit_counts == 0
    generators = {}
    for pt in np.nonzero(hit_counts)[0]:
        lo = np.searchsorted(pairs[:, 0], pt, side="left")
        hi = np.searchsorted(pairs[:, 0], pt, side="right")
        rows = [tuple(int(x) for x in cands[b]) for b in pairs[lo:hi, 1]]
        gens = hermite_normal_form(rows)
        sat = saturate(rows)
        c = 1
        for m in sat:
            v = float(np.dot(m, tvals[pt]))
            c = lcm(c, Fraction(v).limit_denominator(10 ** 6).denominator)
        dims_arr[pt] = dim - len(gens)
        comps_arr[pt] = c
        generators[int(pt)] = gens

    refined = []
    if refine:
        if targets is None:
            targets = [(0, None), (dim - 1, None)] if dim > 1 else [(0, None)]
        rcounts = (
            _default_refine_counts(dim)
            if refine_counts is None
            else tuple(int(c) for c in refine_counts)
        )
        den_bound = (
            max(rcounts) if denominator_bound is None else int(denominator_bound)
        )
        h = default_fd_step(box)
        inner = box.shrink(2.5 * h)
        seeds = inner.grid(rcounts)
        for r_req, c_req in targets:
            r_req = int(r_req)
            if not 0 <= r_req < dim:
                raise ValueError("requested dimension must lie in [0, 2g)")
            nrel = dim - r_req
            if nrel > rank_report.rank:
                notes.append(
                    f"stratum r={r_req} skipped: needs {nrel} relations, "
                    f"field rank is {rank_report.rank}"
                )
                continue
            relations = [
                tuple(1 if j == i else 0 for j in range(dim))
                for i in range(nrel)
            ]
            refined.append(
                _refine_stratum(
                    field, seeds, relations, c_req, den_bound,
                    newton_steps, certify_tol, h, inner,
                )
            )

    pcounts = (
        _default_probe_counts(dim)
        if probe_counts is None
        else tuple(int(c) for c in probe_counts)
    )
    probes = box.grid(pcounts)
    coverage = {}
    for s in range(dim + 1):
        members = [
            stratum.points
            for stratum in refined
            if stratum.requested_dimension == s and stratum.count
        ]
        if s == dim or not members:
            members.append(grid[dims_arr == s])
        pts = np.concatenate(members, axis=0)
        if pts.shape[0] == 0:
            coverage[s] = inf
            continue
        dist, _ = cKDTree(pts).query(probes)
        coverage[s] = float(dist.max())

    return DensityReport(
        base_points=grid,
        translations=tvals,
        dimensions=dims_arr,
        components=comps_arr,
        generic=generic,
        generators=generators,
        refined=tuple(refined),
        coverage=coverage,
        grid_counts=counts,
        max_height=int(max_height),
        tol=float(tol),
        field_rank=rank_report.rank,
        notes=tuple(notes),
    )


def unit_torus_family(g):
    """Base box [0,1]^{2g} with the constant diagonal period i*I.

    The box doubles as a fundamental domain of a torus for the group-orbit
    toy model; free translation fields over it should use periodic
    component expressions so that wrapped evaluation is smooth.
    """
    tau = tuple(
        tuple("i" if a == b else "0" for b in range(g)) for a in range(g)
    )
    box = Box((0.0,) * (2 * g), (1.0,) * (2 * g))
    return PeriodFamily(g=g, base_domain=box, tau=tau)


def _torus_jacobian(field, points, h):
    """Batch Jacobian with the stencil wrapped into [0,1) per coordinate.

    Valid for fields whose components are periodic (or degree-one plus
    periodic) in every coordinate; the value differences are unwrapped
    mod 1, which absorbs the seam jumps.
    """
    pts = np.asarray(points, dtype=float)
    n, dim = pts.shape
    stencil = np.repeat(pts, 2 * dim, axis=0)
    for k in range(dim):
        stencil[2 * k::2 * dim, k] += h
        stencil[2 * k + 1::2 * dim, k] -= h
    stencil %= 1.0
    vals = translation_batch(field, stencil).reshape(n, 2 * dim, -1)
    jac = np.empty((n, vals.shape[2], dim))
    for k in range(dim):
        diff = vals[:, 2 * k, :] - vals[:, 2 * k + 1, :]
        diff -= np.round(diff)
        jac[:, :, k] = diff / (2.0 * h)
    return jac


def _integer_level_points(field, multiplier, seeds_per_axis=32,
                          newton_steps=12, certify_tol=1e-10):
    """Points x on the unit torus where multiplier * t(x) is integral.

    These are the fixed points of the multiplier-th iterate of the
    fiberwise translation. Seeds on a regular grid are Newton-iterated on
    the wrapped residual of multiplier * t; certified solutions are
    deduplicated on a fine torus grid.
    """
    dim = field.family.base_domain.dim
    axes = [np.arange(seeds_per_axis) / seeds_per_axis] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    b = np.stack([m.ravel() for m in mesh], axis=-1)
    h = 1e-6
    k = float(multiplier)
    for _ in range(newton_steps):
        res = k * translation_batch(field, b % 1.0)
        res -= np.round(res)
        jac = k * _torus_jacobian(field, b % 1.0, h)
        step = np.matmul(np.linalg.pinv(jac), res[:, :, None])[:, :, 0]
        b -= step
    b %= 1.0
    res = k * translation_batch(field, b)
    res -= np.round(res)
    good = np.abs(res).max(axis=1) < certify_tol
    pts = b[good]
    if pts.shape[0] == 0:
        return pts
    keys = np.round(pts * 1e6).astype(np.int64) % np.int64(1e6)
    _, first = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(first)]


def _torus_cover_radius(points, probes):
    if points.shape[0] == 0:
        return inf
    tree = cKDTree(points % 1.0, boxsize=1.0)
    dist, _ = tree.query(probes, p=np.inf)
    return float(dist.max())


@dataclass(frozen=True)
class GroupOrbitReport:
    """Word-ball orbit statistics for the two-translation toy model."""

    fill_fractions: tuple
    filled: tuple
    fill_measure: float
    orbit_sizes: tuple
    eps: float
    fixed_first: np.ndarray
    fixed_second: np.ndarray
    fixed_cover_first: float
    fixed_cover_second: float
    fixed_cover: float
    k: int
    l: int
    n_iter: int


def group_orbit_scan(field_first, field_second, k, l, n_iter, seed, *,
                     eps=0.05, n_starts=6, fill_threshold=0.999,
                     n_probes=4096):
    """Scan the group generated by two transversal fiberwise translations.

    The state space is the product of two tori. Generator f^k translates
    the second factor by k * t_first(first factor); generator g^l
    translates the first factor by l * t_second(second factor). For each
    seeded start point the word ball is grown breadth-first (both
    generators and their inverses) up to n_iter distinct states, and the
    orbit is declared eps-filling when at least fill_threshold of a fixed
    probe set lies within torus sup-distance eps of it. The common fixed
    set is the product of the per-factor integer-level sets of k*t_first
    and l*t_second; its covering radius is the max over the two factors.
    """
    d1 = field_first.family.base_domain.dim
    d2 = field_second.family.base_domain.dim
    if int(k) < 1 or int(l) < 1:
        raise ValueError("k and l must be positive")
    if int(n_iter) < 1:
        raise ValueError("n_iter must be positive")
    k, l, n_iter = int(k), int(l), int(n_iter)

    state_box = Box((0.0,) * (d1 + d2), (1.0,) * (d1 + d2))
    probes = halton_points(state_box, int(n_probes), seed=seed) % 1.0
    starts = halton_points(state_box, int(n_starts), seed=seed + 1) % 1.0

    def successors(states):
        x = states[:, :d1]
        y = states[:, d1:]
        tf = k * translation_batch(field_first, x)
        tg = l * translation_batch(field_second, y)
        out = np.empty((4 * states.shape[0], d1 + d2))
        out[0::4, :d1] = x
        out[0::4, d1:] = (y + tf) % 1.0
        out[1::4, :d1] = x
        out[1::4, d1:] = (y - tf) % 1.0
        out[2::4, :d1] = (x + tg) % 1.0
        out[2::4, d1:] = y
        out[3::4, :d1] = (x - tg) % 1.0
        out[3::4, d1:] = y
        return out

    key_scale = np.int64(10 ** 9)

    def keys_of(states):
        return np.round(states * 1e9).astype(np.int64) % key_scale

    fills = []
    fractions = []
    sizes = []
    for start in starts:
        seen = {keys_of(start[None, :])[0].tobytes()}
        orbit = [start[None, :].copy()]
        frontier = start[None, :].copy()
        total = 1
        while frontier.shape[0] and total < n_iter:
            cand = successors(frontier)
            kk = keys_of(cand)
            _, first = np.unique(kk, axis=0, return_index=True)
            fresh_rows = []
            for idx in np.sort(first):
                kb = kk[idx].tobytes()
                if kb not in seen:
                    seen.add(kb)
                    fresh_rows.append(idx)
            if not fresh_rows:
                break
            frontier = cand[fresh_rows]
            room = n_iter - total
            if frontier.shape[0] > room:
                frontier = frontier[:room]
            orbit.append(frontier.copy())
            total += frontier.shape[0]
        pts = np.concatenate(orbit, axis=0)
        sizes.append(int(pts.shape[0]))
        tree = cKDTree(pts, boxsize=1.0)
        dist, _ = tree.query(probes, p=np.inf)
        frac = float(np.mean(dist <= eps))
        fractions.append(frac)
        fills.append(frac >= fill_threshold)

    fixed_first = _integer_level_points(field_first, k)
    fixed_second = _integer_level_points(field_second, l)
    probes_first = halton_points(
        Box((0.0,) * d1, (1.0,) * d1), 2048, seed=seed + 2
    ) % 1.0
    probes_second = halton_points(
        Box((0.0,) * d2, (1.0,) * d2), 2048, seed=seed + 3
    ) % 1.0
    cover_first = _torus_cover_radius(fixed_first, probes_first)
    cover_second = _torus_cover_radius(fixed_second, probes_second)

    return GroupOrbitReport(
        fill_fractions=tuple(fractions),
        filled=tuple(fills),
        fill_measure=float(np.mean(fills)) if fills else 0.0,
        orbit_sizes=tuple(sizes),
        eps=float(eps),
        fixed_first=fixed_first,
        fixed_second=fixed_second,
        fixed_cover_first=cover_first,
        fixed_cover_second=cover_second,
        fixed_cover=max(cover_first, cover_second),
        k=k,
        l=l,
        n_iter=n_iter,
    )
