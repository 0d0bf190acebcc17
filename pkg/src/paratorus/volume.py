"""Euclidean volumes of iterated graph images and the multiplication map.

Translating a section branch n times moves its graph to u -> m(u) + n t(u)
over the base box, and the euclidean volume of that graph is the integral
of the Gram determinant square root of its tangent frame. Volumes come
from tensor Gauss-Legendre quadrature; the derivative data entering the
frame does not depend on n, so a whole iterate series costs one Jacobian
sweep per quadrature order. Polynomial fits of the series then expose the
growth degree and its leading coefficient.

Quadrature nodes split into fixed chunks evaluated in parallel; the final
reduction is exact float summation (math.fsum) in node order, so results
do not depend on the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    BaseMismatch,
    IllConditionedFit,
    InsufficientEntries,
    QuadratureDidNotConverge,
    StencilOutOfDomain,
)
from .fibration import (
    TranslationField,
    betti_jacobian,
    default_fd_step,
    halton_points,
    translation_batch,
)

DEFAULT_ORDER = 32
DEFAULT_RTOL = 1e-4
DEFAULT_MAX_ORDER = 256
# hard ceiling on tensor nodes per order, all dimensions combined
NODE_BUDGET = 2 ** 24
_JACOBIAN_CHUNK = 16384
_COND_LIMIT = 1e10
_MAX_COMPOSITE = 10 ** 7


# -------------------------------------------------------------- multisection


@dataclass(frozen=True)
class Multisection:
    """A finite union of section branches over one period family.

    Each branch is a symbolic map from the base box to reduced fiber
    coordinates, stored as a free translation field so that evaluation and
    differentiation share the field machinery.
    """

    family: object
    branches: tuple

    @property
    def degree(self):
        return len(self.branches)


def multisection(family, branches):
    """Build a multisection from per-branch component expressions.

    branches is an iterable whose entries are sequences of 2g component
    expressions (strings or parsed trees) in the base variables. Every
    branch is probed at the box center so unevaluable expressions fail
    here rather than inside a quadrature sweep.
    """
    built = []
    for components in branches:
        field = TranslationField(
            family=family, kind="free", components=tuple(components)
        )
        built.append(field)
    if not built:
        raise ValueError("a multisection needs at least one branch")
    box = family.base_domain
    center = np.array([[0.5 * (a + b) for a, b in zip(box.lo, box.hi)]])
    for field in built:
        translation_batch(field, center)
    return Multisection(family=family, branches=tuple(built))


def zero_section(family):
    """The single-branch multisection sitting at the fiber origin."""
    dim = family.base_domain.dim
    return multisection(family, [("0",) * dim])


def _as_branch_field(family, branch):
    if branch is None:
        return None
    if isinstance(branch, TranslationField):
        return branch
    return TranslationField(
        family=family, kind="free", components=tuple(branch)
    )


# ---------------------------------------------------------------- integrand


def _map_chunks(fn, arr, threads, chunk):
    pieces = [arr[i:i + chunk] for i in range(0, arr.shape[0], chunk)]
    if threads <= 1 or len(pieces) <= 1:
        done = [fn(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            done = list(ex.map(fn, pieces))
    return np.concatenate(done, axis=0)


def _jacobian_chunk(field, pts, h):
    n, dim = pts.shape
    stencil = np.repeat(pts, 2 * dim, axis=0)
    for k in range(dim):
        stencil[2 * k::2 * dim, k] += h
        stencil[2 * k + 1::2 * dim, k] -= h
    values = translation_batch(field, stencil)
    jac = np.empty((n, dim, dim))
    for k in range(dim):
        diff = values[2 * k::2 * dim] - values[2 * k + 1::2 * dim]
        # values are reduced mod 1; recover the nearest representative
        diff -= np.round(diff)
        jac[:, :, k] = diff / (2.0 * h)
    return jac


def _jacobian_batch(field, points, h, threads=1):
    return _map_chunks(
        lambda p: _jacobian_chunk(field, p, h), points, threads,
        _JACOBIAN_CHUNK,
    )


def _require_margin(box, points, h):
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    if (points < lo + h).any() or (points > hi - h).any():
        raise StencilOutOfDomain(
            f"quadrature stencil of step {h} leaves the base box"
        )


def wedge_volume_integrand(field, branch, n, u, fd_step=None):
    """Volume element of the n-times translated branch graph at u.

    The graph of u -> m(u) + n t(u) has tangent frame rows (e_k, a_k)
    with a = Dm + n Dt, and the induced volume element is
    sqrt(det(I + a^T a)), the norm of the frame's exterior product. The
    n-independent Jacobians come from central differences, so u must sit
    at least one step inside the base box.
    """
    dt = betti_jacobian(field, u, fd_step)
    branch_field = _as_branch_field(field.family, branch)
    if branch_field is None:
        a = float(n) * dt
    else:
        a = betti_jacobian(branch_field, u, fd_step) + float(n) * dt
    gram = np.eye(a.shape[0]) + a.T @ a
    return float(math.sqrt(max(np.linalg.det(gram), 0.0)))


# --------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class Quadrature:
    """Tensor Gauss-Legendre refinement policy.

    Orders double from the starting order until two consecutive totals
    agree to rtol in relative terms; the error bound reported is the last
    inter-order difference.
    """

    order: int = DEFAULT_ORDER
    rtol: float = DEFAULT_RTOL
    max_order: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("quadrature order must be at least 2")
        if self.max_order < 2 * self.order:
            raise ValueError("max_order must allow at least one doubling")
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")


@dataclass(frozen=True)
class VolumeEstimate:
    volume: float
    error: float
    order: int


def _gauss_nodes(box, order):
    x, w = np.polynomial.legendre.leggauss(order)
    axis_nodes = []
    axis_weights = []
    for lo, hi in zip(box.lo, box.hi):
        half = 0.5 * (hi - lo)
        axis_nodes.append(lo + half * (x + 1.0))
        axis_weights.append(w * half)
    mesh = np.meshgrid(*axis_nodes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = np.meshgrid(*axis_weights, indexing="ij")
    weights = np.ones(nodes.shape[0])
    for m in wmesh:
        weights = weights * m.ravel()
    return nodes, weights


def _frame_data(field, multi, box, order, h, threads):
    nodes, weights = _gauss_nodes(box, order)
    _require_margin(box, nodes, h)
    dt = _jacobian_batch(field, nodes, h, threads)
    dms = tuple(
        _jacobian_batch(branch, nodes, h, threads)
        for branch in multi.branches
    )
    return weights, dt, dms


def _integral_at(weights, dt, dms, n):
    dim = dt.shape[1]
    eye = np.eye(dim)
    total = np.zeros(dt.shape[0])
    for dm in dms:
        a = dm + float(n) * dt
        gram = eye + np.einsum("nij,nik->njk", a, a)
        total += np.sqrt(np.maximum(np.linalg.det(gram), 0.0))
    return math.fsum((weights * total).tolist())


def pushforward_volume(field, multi, n, quadrature=None, threads=1):
    """Euclidean volume of the n-th translate of a multisection graph.

    Sums the branch integrals of wedge_volume_integrand over the base box
    by tensor Gauss-Legendre quadrature, doubling the order until two
    consecutive totals agree to the requested relative tolerance.
    """
    quad = quadrature if quadrature is not None else Quadrature()
    box = field.family.base_domain
    h = default_fd_step(box)
    prev = None
    order = quad.order
    while order <= quad.max_order and order ** box.dim <= NODE_BUDGET:
        weights, dt, dms = _frame_data(field, multi, box, order, h, threads)
        value = _integral_at(weights, dt, dms, n)
        if prev is not None:
            err = abs(value - prev)
            if err <= quad.rtol * max(abs(value), 1e-300):
                return VolumeEstimate(volume=value, error=err, order=order)
        prev = value
        order *= 2
    raise QuadratureDidNotConverge(
        f"no agreement to rtol {quad.rtol} within order {quad.max_order}"
    )


# ------------------------------------------------------------ iterate series


@dataclass(frozen=True)
class VolumeSeries:
    """Volumes of the n-th translates for a list of iterate counts."""

    iterates: tuple
    volumes: tuple
    quadrature_error: tuple

    def csv_rows(self):
        """Rows (n, volume, error) for serialization."""
        return [
            (n, v, e)
            for n, v, e in zip(
                self.iterates, self.volumes, self.quadrature_error
            )
        ]


def volume_series(field, multi, iterates, quadrature=None, threads=1):
    """Compute pushforward volumes for every iterate in one sweep.

    The frame Jacobians do not depend on n, so they are computed once per
    quadrature order and shared across the whole series; each iterate
    still converges independently under the doubling policy.
    """
    iterates = tuple(int(n) for n in iterates)
    if not iterates:
        raise ValueError("need at least one iterate")
    if any(n < 0 for n in iterates):
        raise ValueError("iterates must be non-negative")
    quad = quadrature if quadrature is not None else Quadrature()
    box = field.family.base_domain
    h = default_fd_step(box)
    cache = {}

    def frame(order):
        if order not in cache:
            cache[order] = _frame_data(field, multi, box, order, h, threads)
        return cache[order]

    volumes = []
    errors = []
    for n in iterates:
        prev = None
        order = quad.order
        while order <= quad.max_order and order ** box.dim <= NODE_BUDGET:
            weights, dt, dms = frame(order)
            value = _integral_at(weights, dt, dms, n)
            if prev is not None:
                err = abs(value - prev)
                if err <= quad.rtol * max(abs(value), 1e-300):
                    volumes.append(value)
                    errors.append(err)
                    break
            prev = value
            order *= 2
        else:
            raise QuadratureDidNotConverge(
                f"iterate {n}: no agreement to rtol {quad.rtol} "
                f"within order {quad.max_order}"
            )
    return VolumeSeries(
        iterates=iterates,
        volumes=tuple(volumes),
        quadrature_error=tuple(errors),
    )


# ------------------------------------------------------------------ fitting


@dataclass(frozen=True)
class VolumeFit:
    """Polynomial growth read off a volume series.

    degree is the largest monomial whose contribution at the top iterate
    stands clear of the fit residual; leading_coefficient is its raw
    coefficient and residual the rms misfit.
    """

    degree: int
    leading_coefficient: float
    residual: float
    coefficients: tuple

    def record(self):
        return {
            "degree": self.degree,
            "leading_coefficient": self.leading_coefficient,
            "residual": self.residual,
        }


def fit_growth(series, max_degree):
    """Least-squares polynomial fit of volume against iterate count.

    The fit runs in the scaled variable n / n_max, so the k-th scaled
    coefficient is the contribution of the k-th monomial at the largest
    iterate; a monomial counts as present when that contribution exceeds
    ten times the residual (with a relative floor of 1e-9 of the largest
    volume, which settles series the polynomial reproduces exactly).
    """
    max_degree = int(max_degree)
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    if len(series.iterates) < max_degree + 2:
        raise InsufficientEntries(
            f"need at least {max_degree + 2} entries, "
            f"got {len(series.iterates)}"
        )
    ns = np.asarray(series.iterates, dtype=float)
    vs = np.asarray(series.volumes, dtype=float)
    n_max = float(ns.max())
    if n_max <= 0:
        raise ValueError("series needs a positive iterate to fit growth")
    vand = np.vander(ns / n_max, max_degree + 1, increasing=True)
    cond = np.linalg.cond(vand)
    if cond > _COND_LIMIT:
        raise IllConditionedFit(
            f"scaled design matrix condition {cond:.3e} exceeds "
            f"{_COND_LIMIT:.0e}"
        )
    scaled, *_ = np.linalg.lstsq(vand, vs, rcond=None)
    fitted = vand @ scaled
    residual = float(np.sqrt(np.mean((vs - fitted) ** 2)))
    threshold = 10.0 * max(residual, 1e-9 * float(np.abs(vs).max()))
    degree = 0
    for k in range(max_degree, -1, -1):
        if abs(scaled[k]) > threshold:
            degree = k
            break
    coefficients = tuple(
        float(scaled[k]) / n_max ** k for k in range(max_degree + 1)
    )
    return VolumeFit(
        degree=degree,
        leading_coefficient=coefficients[degree],
        residual=residual,
        coefficients=coefficients,
    )


# ------------------------------------------------- multiplication and fibers


@dataclass(frozen=True)
class MultiplicationMap:
    """Fiberwise multiplication by an integer in reduced coordinates."""

    D: int

    def __post_init__(self):
        if int(self.D) < 2:
            raise ValueError("multiplication degree must be at least 2")


def apply_multiplication(mult, x):
    """D x mod 1, elementwise over any array of reduced coordinates."""
    return (mult.D * np.asarray(x, dtype=float)) % 1.0


def conjugacy_check(field, D, k, sample_points, seed=23):
    """Max torus distance between the two routes to D^k t(u).

    One route applies the fiber translation D^k times to the origin
    section; the other applies multiplication by D to t(u) k times. Both
    equal D^k t(u) mod 1 exactly, so the returned defect is pure floating
    rounding and stays within 1e-9 times D^k.
    """
    mult = MultiplicationMap(D=int(D))
    k = int(k)
    if k < 0:
        raise ValueError("k must be non-negative")
    reps = mult.D ** k
    if reps > _MAX_COMPOSITE:
        raise ValueError(f"D^k = {reps} iterations is beyond desk scale")
    if np.isscalar(sample_points):
        pts = halton_points(
            field.family.base_domain, int(sample_points), seed
        )
    else:
        pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    t = translation_batch(field, pts)
    translated = np.zeros_like(t)
    for _ in range(reps):
        translated = (translated + t) % 1.0
    multiplied = t.copy()
    for _ in range(k):
        multiplied = apply_multiplication(mult, multiplied)
    gap = np.abs(translated - multiplied)
    gap = np.minimum(gap, 1.0 - gap)
    return float(gap.max(initial=0.0))


@dataclass(frozen=True)
class FiberPoint:
    """A fiber element tagged by its base point, value reduced mod 1."""

    base: tuple
    value: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "base", tuple(float(v) for v in self.base)
        )
        object.__setattr__(
            self, "value", tuple(float(v) % 1.0 for v in self.value)
        )


def fiber_add(x, y, z):
    """x + (y - z) mod 1 in the common fiber of the three points.

    The grouping keeps fiber_add(x, y, y) equal to x bit for bit; the
    round trip fiber_add(fiber_add(x, y, z), z, y) returns to x up to one
    rounding per coordinate.
    """
    if not (x.base == y.base == z.base):
        raise BaseMismatch("points lie over different base points")
    if not (len(x.value) == len(y.value) == len(z.value)):
        raise ValueError("fiber values have mismatched lengths")
    value = tuple(
        (a + (b - c)) % 1.0
        for a, b, c in zip(x.value, y.value, z.value)
    )
    return FiberPoint(base=x.base, value=value)
