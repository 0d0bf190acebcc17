"""Families of complex tori over a box, Betti charts, and translation fields.

The family is C^g / (Z^g + T(u) Z^g) over an axis-aligned box in R^{2g}
identified with an open set of C^g via (Re block, Im block) coordinates.
T(u) is symmetric with positive definite imaginary part, so the real basis
given by the columns of

    P(u) = [[ I  Re T(u) ]
            [ 0  Im T(u) ]]

is invertible; Betti coordinates x = (a, b) of a fiber point z solve
z = a + T(u) b and live on the fixed torus R^{2g}/Z^{2g}. A holomorphic
section w induces the translation field t(u) = Betti(w(u)); free analytic
fields bypass the chart and are used as counterexamples. Jacobians are
central finite differences of a local lift, with mod-1 jumps unwrapped by
nearest-integer correction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import (
    NotHolomorphicInduced,
    SingularPeriod,
    StencilOutOfDomain,
)
from .expr import Const, Expr, Mul, Pow, Var, parse_expression

COND_THRESHOLD = 1e12
RANK_TOL = 1e-7
FD_STEP_FACTOR = 1e-5


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in R^{2g}, coordinates (Re block, Im block)."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box needs matching nonempty lo/hi")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box must have positive extent on every axis")

    @property
    def dim(self):
        return len(self.lo)

    @property
    def max_extent(self):
        return max(b - a for a, b in zip(self.lo, self.hi))

    def contains(self, point, margin=0.0):
        return all(
            a + margin <= x <= b - margin
            for x, a, b in zip(point, self.lo, self.hi)
        )

    def shrink(self, margin):
        return Box(
            tuple(a + margin for a in self.lo),
            tuple(b - margin for b in self.hi),
        )

    def grid(self, counts):
        """Regular grid of cell centers, counts per axis; (prod, dim)."""
        axes = [
            lo + (hi - lo) * (np.arange(c) + 0.5) / c
            for lo, hi, c in zip(self.lo, self.hi, counts)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def halton_points(box, n, seed):
    """Scrambled Halton samples inside the box, reproducible from the seed."""
    sampler = qmc.Halton(d=box.dim, scramble=True, seed=seed)
    unit = sampler.random(n)
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    return lo + unit * (hi - lo)


def real_to_complex(points):
    """(n, 2g) real coordinates to (n, g) complex coordinates."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    g = pts.shape[1] // 2
    return pts[:, :g] + 1j * pts[:, g:]


def complex_to_real(points):
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    return np.concatenate([pts.real, pts.imag], axis=1)


def _parse_matrix(entries):
    return tuple(
        tuple(
            e if isinstance(e, Expr) else parse_expression(e) for e in row
        )
        for row in entries
    )


def _parse_vector(entries):
    return tuple(
        e if isinstance(e, Expr) else parse_expression(e) for e in entries
    )


def _check_variables(exprs, prefix, max_index, what):
    for e in exprs:
        for name in e.variables():
            if not name.startswith(prefix) or int(name[1:]) > max_index:
                raise ValueError(
                    f"{what} may only use {prefix}1..{prefix}{max_index}, "
                    f"found {name!r}"
                )


@dataclass(frozen=True)
class PeriodFamily:
    """g, base box in R^{2g}, and the symbolic period matrix T(u)."""

    g: int
    base_domain: Box
    tau: tuple

    def __post_init__(self):
        tau = _parse_matrix(self.tau)
        object.__setattr__(self, "tau", tau)
        if self.g < 1:
            raise ValueError("g must be at least 1")
        if self.base_domain.dim != 2 * self.g:
            raise ValueError("base box dimension must be 2g")
        if len(tau) != self.g or any(len(r) != self.g for r in tau):
            raise ValueError("tau must be a g x g matrix of expressions")
        _check_variables(
            [e for row in tau for e in row], "u", self.g, "period matrix"
        )

    def tau_at(self, points):
        """Evaluate T on (n, g) complex points; validates symmetry and
        positive definite imaginary part."""
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        n = pts.shape[0]
        env = {f"u{k + 1}": pts[:, k] for k in range(self.g)}
        t = np.empty((n, self.g, self.g), dtype=complex)
        for i in range(self.g):
            for j in range(self.g):
                t[:, i, j] = self.tau[i][j].evaluate(env)
        scale = 1.0 + np.abs(t).max(initial=0.0)
        if np.abs(t - t.transpose(0, 2, 1)).max(initial=0.0) > 1e-9 * scale:
            raise ValueError("period matrix is not symmetric")
        eigs = np.linalg.eigvalsh(t.imag)
        if eigs[:, 0].min() <= 0:
            k = int(np.argmin(eigs[:, 0]))
            raise ValueError(
                f"imaginary part not positive definite at u={pts[k]}"
            )
        return t

    def period_basis(self, points):
        """Real 2g x 2g basis matrices P(u) on (n, g) complex points."""
        t = self.tau_at(points)
        n, g = t.shape[0], self.g
        p = np.zeros((n, 2 * g, 2 * g))
        p[:, :g, :g] = np.eye(g)
        p[:, :g, g:] = t.real
        p[:, g:, g:] = t.imag
        return p


@dataclass(frozen=True)
class HolomorphicSection:
    """Symbolic holomorphic map U -> C^g over a period family."""

    family: PeriodFamily
    w: tuple

    def __post_init__(self):
        w = _parse_vector(self.w)
        object.__setattr__(self, "w", w)
        if len(w) != self.family.g:
            raise ValueError("section needs g component expressions")
        _check_variables(w, "u", self.family.g, "holomorphic section")

    def values(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        env = {f"u{k + 1}": pts[:, k] for k in range(self.family.g)}
        out = np.empty((pts.shape[0], self.family.g), dtype=complex)
        for k in range(self.family.g):
            out[:, k] = self.w[k].evaluate(env)
        return out


@dataclass(frozen=True)
class TranslationField:
    """Fiberwise translation (u, x) -> (u, x + t(u)) on the Betti torus.

    kind "holomorphic" uses the Betti projection of a holomorphic section;
    kind "free" evaluates 2g real-analytic component expressions in the
    real coordinates x1..x2g directly. An optional integer basis_change
    A in GL(2g, Z) rewrites t as A t mod 1 (a change of H1 basis).
    """

    family: PeriodFamily
    kind: str
    section: HolomorphicSection = None
    components: tuple = None
    basis_change: tuple = None

    def __post_init__(self):
        if self.kind not in ("holomorphic", "free"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "holomorphic":
            if self.section is None or self.components is not None:
                raise ValueError("holomorphic fields take a section only")
            if self.section.family is not self.family:
                raise ValueError("section belongs to a different family")
        else:
            if self.components is None or self.section is not None:
                raise ValueError("free fields take component expressions only")
            comps = _parse_vector(self.components)
            object.__setattr__(self, "components", comps)
            if len(comps) != 2 * self.family.g:
                raise ValueError("free fields need 2g component expressions")
            _check_variables(
                comps, "x", 2 * self.family.g, "free translation field"
            )
        if self.basis_change is not None:
            a = tuple(tuple(int(v) for v in row) for row in self.basis_change)
            object.__setattr__(self, "basis_change", a)
            mat = np.asarray(a)
            n = 2 * self.family.g
            if mat.shape != (n, n):
                raise ValueError("basis change must be 2g x 2g")
            det = round(float(np.linalg.det(mat)))
            if det not in (1, -1):
                raise ValueError("basis change must have determinant +-1")


@dataclass(frozen=True)
class BettiChart:
    """Betti coordinate chart with a condition-number guard."""

    family: PeriodFamily
    cond_threshold: float = COND_THRESHOLD


def _betti_solve(family, tau, z_values, cond_threshold):
    """Solve z = a + T b for the unreduced (a, b); (n, 2g) output."""
    cond = np.linalg.cond(tau.imag)
    if np.max(cond) > cond_threshold:
        raise SingularPeriod(
            f"Im T condition number {np.max(cond):.3e} exceeds "
            f"{cond_threshold:.1e}"
        )
    b = np.linalg.solve(tau.imag, z_values.imag[..., None])[..., 0]
    a = z_values.real - np.einsum("nij,nj->ni", tau.real, b)
    return np.concatenate([a, b], axis=1)


def betti_coordinates(chart, u, z):
    """Betti coordinates of fiber point z over base point u, in [0, 1)^{2g}.

    u may be given as g complex numbers (or one scalar when g = 1) or as
    2g real block coordinates; z is a point of C^g.
    """
    pts = _as_complex_points(chart.family, u)
    zs = np.atleast_2d(np.asarray(z, dtype=complex))
    tau = chart.family.tau_at(pts)
    x = _betti_solve(chart.family, tau, zs, chart.cond_threshold)
    return tuple(np.mod(x[0], 1.0))


def _as_complex_points(family, u):
    arr = np.asarray(u)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 1:
        if arr.shape[0] == 2 * family.g and not np.iscomplexobj(arr):
            return real_to_complex(arr.reshape(1, -1))
        if arr.shape[0] == family.g:
            return np.atleast_2d(arr.astype(complex))
        raise ValueError(
            f"base point needs {family.g} complex or {2 * family.g} real "
            "coordinates"
        )
    raise ValueError("expected a single base point")


def translation_batch(field, points_real, cond_threshold=COND_THRESHOLD):
    """Reduced translation vectors on (n, 2g) real base points; (n, 2g)."""
    pts = np.atleast_2d(np.asarray(points_real, dtype=float))
    if field.kind == "holomorphic":
        upts = real_to_complex(pts)
        tau = field.family.tau_at(upts)
        w = field.section.values(upts)
        x = _betti_solve(field.family, tau, w, cond_threshold)
    else:
        env = {f"x{k + 1}": pts[:, k] for k in range(pts.shape[1])}
        cols = []
        for e in field.components:
            value = np.asarray(e.evaluate(env))
            value = np.broadcast_to(value, (pts.shape[0],)).astype(complex)
            cols.append(value)
        x = np.stack(cols, axis=1)
        if np.abs(x.imag).max(initial=0.0) > 1e-12:
            raise ValueError("free field components must evaluate real")
        x = x.real
    if field.basis_change is not None:
        x = x @ np.asarray(field.basis_change, dtype=float).T
    return np.mod(x, 1.0)


def translation_vector(field, u):
    """Reduced translation vector at one base point, as a 2g-tuple."""
    pts = complex_to_real(_as_complex_points(field.family, u))
    return tuple(translation_batch(field, pts)[0])


def default_fd_step(box):
    return FD_STEP_FACTOR * box.max_extent


def betti_jacobian(field, u, fd_step=None):
    """Central-difference Jacobian of the lifted translation vector.

    u is a base point in real block coordinates (or complex, converted);
    each column is (t(u + h e_k) - t(u - h e_k)) / 2h with the difference
    unwrapped to the nearest representative.
    """
    box = field.family.base_domain
    h = default_fd_step(box) if fd_step is None else float(fd_step)
    if h <= 0:
        raise ValueError("fd_step must be positive")
    center = complex_to_real(_as_complex_points(field.family, u))[0]
    dim = box.dim
    stencil = np.repeat(center[None, :], 2 * dim, axis=0)
    for k in range(dim):
        stencil[2 * k, k] += h
        stencil[2 * k + 1, k] -= h
    for row in stencil:
        if not box.contains(row):
            raise StencilOutOfDomain(
                f"stencil leaves the base box at step {h}"
            )
    values = translation_batch(field, stencil)
    jac = np.empty((dim, dim))
    for k in range(dim):
        diff = values[2 * k] - values[2 * k + 1]
        diff -= np.round(diff)
        jac[:, k] = diff / (2 * h)
    return jac


@dataclass(frozen=True)
class RankReport:
    rank: int
    is_even: bool
    samples: int
    rank_tol: float


def generic_rank(field, samples, seed, rank_tol=RANK_TOL, fd_step=None):
    """Maximal numerical Jacobian rank over quasi-random base samples.

    Holomorphic-induced fields must measure even (the differential commutes
    with the complex structures); an odd reading is reported with a warning
    rather than an exception since it can only be measurement noise.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    box = field.family.base_domain
    h = default_fd_step(box) if fd_step is None else float(fd_step)
    inner = box.shrink(2 * h)
    pts = halton_points(inner, samples, seed)
    best = 0
    for row in pts:
        jac = betti_jacobian(field, row, h)
        svals = np.linalg.svd(jac, compute_uv=False)
        if svals[0] > 0:
            best = max(best, int(np.sum(svals > rank_tol * svals[0])))
    even = best % 2 == 0
    if field.kind == "holomorphic" and not even:
        warnings.warn(
            "holomorphic-induced field measured an odd generic rank; "
            "expect finite-difference noise at a rank-degenerate sample",
            stacklevel=2,
        )
    return RankReport(
        rank=best, is_even=even, samples=samples, rank_tol=rank_tol
    )


def standard_complex_structure(g):
    """Multiplication by i on (Re block, Im block) coordinates."""
    j = np.zeros((2 * g, 2 * g))
    j[:g, g:] = -np.eye(g)
    j[g:, :g] = np.eye(g)
    return j


def complex_structure(family, u):
    """Matrix of multiplication by i in the Betti basis at u."""
    pts = _as_complex_points(family, u)
    p = family.period_basis(pts)[0]
    j_std = standard_complex_structure(family.g)
    return np.linalg.solve(p, j_std @ p)


def intertwining_defect(field, u, fd_step=None):
    """Relative failure of (Dt) j_U = j(u) (Dt) at u; O(fd_step^2) for
    holomorphic-induced fields."""
    if field.kind != "holomorphic":
        raise NotHolomorphicInduced(
            "intertwining is only defined for holomorphic-induced fields"
        )
    jac = betti_jacobian(field, u, fd_step)
    j_base = standard_complex_structure(field.family.g)
    j_fiber = complex_structure(field.family, u)
    if field.basis_change is not None:
        a = np.asarray(field.basis_change, dtype=float)
        j_fiber = a @ j_fiber @ np.linalg.inv(a)
    defect = jac @ j_base - j_fiber @ jac
    return float(
        np.linalg.norm(defect) / (1.0 + np.linalg.norm(jac))
    )


def _random_poly(rng, g, degree, scale):
    """Random polynomial in u1..ug with coefficients in [-scale, scale]."""
    terms = []
    exponents = []
    # All exponent tuples with total degree <= degree.
    def extend(prefix, remaining, slots):
        if slots == 0:
            exponents.append(tuple(prefix))
            return
        for d in range(remaining + 1):
            extend(prefix + [d], remaining - d, slots - 1)
    extend([], degree, g)
    for exps in exponents:
        coeff = rng.uniform(-scale, scale)
        factors = [Const(complex(coeff))]
        for k, d in enumerate(exps):
            if d:
                factors.append(Pow(Var(f"u{k + 1}"), d))
        terms.append(Mul(tuple(factors)) if len(factors) > 1 else factors[0])
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


def random_polynomial_family(seed, g, degree=3, perturbation=0.05):
    """Seeded random holomorphic-induced field for rank experiments.

    T(u) = i I_g + perturbation * S(u) with S symmetric polynomial, w a
    random polynomial section, over the box [-0.3, 0.3]^{2g}; the
    perturbation is small enough that Im T stays positive definite."""
    rng = np.random.default_rng(seed)
    box = Box((-0.3,) * (2 * g), (0.3,) * (2 * g))
    tau = [[None] * g for _ in range(g)]
    for i in range(g):
        for j in range(i, g):
            entry = _random_poly(rng, g, degree, 1.0)
            scaled = Mul((Const(complex(perturbation)), entry))
            if i == j:
                scaled = Const(1j) + scaled
            tau[i][j] = scaled
            tau[j][i] = scaled
    family = PeriodFamily(g=g, base_domain=box, tau=tuple(map(tuple, tau)))
    w = tuple(_random_poly(rng, g, degree, 1.0) for _ in range(g))
    section = HolomorphicSection(family=family, w=w)
    return TranslationField(family=family, kind="holomorphic", section=section)
