"""Hot numeric kernels with two interchangeable backends.

The inner loops of the orbit tooling are resonance scans (every base point
against every integer candidate vector) and box-occupancy counts (every
orbit sample binned into a cubical grid). Both ship here twice: a compiled
path under numba's @njit and a chunked pure-numpy path. Selection order:

  * set PARATORUS_NO_NUMBA=1 to force the numpy path,
  * otherwise use numba when it imports, numpy when it does not.

The two paths must agree bitwise, not just approximately, because scan
results feed threshold comparisons and the experiment runner promises
byte-identical reruns. Both therefore accumulate dot products left to
right in float64 with no fused multiply-add (numpy elementwise ops do not
fuse; @njit without fastmath does not license fusion), and both bin cells
with the same multiply-floor-clip sequence. Tests compare the paths on
random data for exact equality.

Kernels are single-threaded by design. Callers that want parallelism split
the point array into fixed-size chunks and merge by chunk index, which
keeps results independent of the worker count.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "PARATORUS_NO_NUMBA"

_CHUNK = 4096


def _numba_disabled():
    return os.environ.get(ENV_FLAG, "").strip() not in ("", "0")


def _load_numba():
    if _numba_disabled():
        return None
    try:
        import numba
    except ImportError:
        return None
    return numba


_numba = _load_numba()


def backend_name():
    """Active backend, "numba" or "numpy"."""
    return "numba" if _numba is not None else "numpy"


def _as_float_2d(arr, name):
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array")
    return out


def _resonance_pairs_numpy(points, candidates, tol):
    n, d = points.shape
    counts = np.zeros(n, dtype=np.int64)
    blocks = []
    for lo in range(0, n, _CHUNK):
        p = points[lo:lo + _CHUNK]
        acc = p[:, 0, None] * candidates[None, :, 0]
        for j in range(1, d):
            acc += p[:, j, None] * candidates[None, :, j]
        hit = np.abs(acc - np.rint(acc)) < tol
        counts[lo:lo + p.shape[0]] = hit.sum(axis=1)
        rows, cols = np.nonzero(hit)
        pairs = np.empty((rows.size, 2), dtype=np.int64)
        pairs[:, 0] = rows + lo
        pairs[:, 1] = cols
        blocks.append(pairs)
    if not blocks:
        return counts, np.empty((0, 2), dtype=np.int64)
    return counts, np.concatenate(blocks, axis=0)


def _cell_indices_numpy(points, m):
    cells = np.floor(points * m).astype(np.int64)
    np.clip(cells, 0, m - 1, out=cells)
    idx = cells[:, 0].copy()
    for j in range(1, points.shape[1]):
        idx *= m
        idx += cells[:, j]
    return idx


if _numba is not None:

    @_numba.njit(cache=True, nogil=True)
    def _resonance_pairs_jit(points, candidates, tol):  # pragma: no cover
        n = points.shape[0]
        k = candidates.shape[0]
        d = points.shape[1]
        counts = np.zeros(n, dtype=np.int64)
        total = 0
        for a in range(n):
            c = 0
            for b in range(k):
                acc = 0.0
                for j in range(d):
                    acc += points[a, j] * candidates[b, j]
                if abs(acc - np.rint(acc)) < tol:
                    c += 1
            counts[a] = c
            total += c
        pairs = np.empty((total, 2), dtype=np.int64)
        pos = 0
        for a in range(n):
            for b in range(k):
                acc = 0.0
                for j in range(d):
                    acc += points[a, j] * candidates[b, j]
                if abs(acc - np.rint(acc)) < tol:
                    pairs[pos, 0] = a
                    pairs[pos, 1] = b
                    pos += 1
        return counts, pairs

    @_numba.njit(cache=True, nogil=True)
    def _cell_indices_jit(points, m):  # pragma: no cover
        n = points.shape[0]
        d = points.shape[1]
        idx = np.empty(n, dtype=np.int64)
        for a in range(n):
            acc = np.int64(0)
            for j in range(d):
                c = np.int64(np.floor(points[a, j] * m))
                if c < 0:
                    c = np.int64(0)
                if c > m - 1:
                    c = np.int64(m - 1)
                acc = acc * m + c
            idx[a] = acc
        return idx

else:
    _resonance_pairs_jit = None
    _cell_indices_jit = None


def _pick(backend, jit_fn, numpy_fn):
    if backend is None:
        backend = backend_name()
    if backend == "numba":
        if jit_fn is None:
            raise RuntimeError("numba backend requested but not available")
        return jit_fn
    if backend == "numpy":
        return numpy_fn
    raise ValueError(f"unknown backend {backend!r}")


def resonance_hits(points, candidates, tol, backend=None):
    """Near-integer pairings between base points and candidate vectors.

    points: (n, d) float64, candidates: (k, d) float64. A pair (a, b) is a
    hit when |<points[a], candidates[b]> - nearest integer| < tol. Returns
    (counts, pairs): counts[a] is the number of hits for point a, pairs is
    an (m, 2) int64 array of (point index, candidate index) in ascending
    lexicographic order.
    """
    pts = _as_float_2d(points, "points")
    cands = _as_float_2d(candidates, "candidates")
    if pts.shape[1] != cands.shape[1]:
        raise ValueError("points and candidates must share a dimension")
    if not tol > 0:
        raise ValueError("tol must be positive")
    fn = _pick(backend, _resonance_pairs_jit, _resonance_pairs_numpy)
    return fn(pts, cands, float(tol))


def cell_indices(points, m, backend=None):
    """Linear cell index of each point on the m^d torus grid.

    points: (n, d) in [0, 1); axis j contributes floor(x_j * m) clipped to
    [0, m - 1], combined in row-major order. (n,) int64.
    """
    pts = _as_float_2d(points, "points")
    if pts.shape[1] < 1:
        raise ValueError("points need at least one coordinate")
    m = int(m)
    if m < 1:
        raise ValueError("m must be at least 1")
    if m ** pts.shape[1] > 2 ** 62:
        raise ValueError("grid too fine for 64-bit cell indices")
    fn = _pick(backend, _cell_indices_jit, _cell_indices_numpy)
    return fn(pts, m)


def occupied_cells(points, m, backend=None):
    """Sorted unique cell indices hit by the points."""
    return np.unique(cell_indices(points, m, backend=backend))


def count_components(cells, m, dim):
    """Connected components of occupied cells under torus adjacency.

    cells: iterable of unique linear indices on the m^dim grid. Two cells
    are adjacent when every coordinate differs by at most 1 mod m
    (Chebyshev neighbours with wraparound). Union-find; the cell count is
    small, so this stays in plain Python.
    """
    m = int(m)
    dim = int(dim)
    ids = [int(c) for c in cells]
    if not ids:
        return 0
    index = {c: i for i, c in enumerate(ids)}
    parent = list(range(len(ids)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    offsets = [()]
    for _ in range(dim):
        offsets = [o + (s,) for o in offsets for s in (-1, 0, 1)]
    offsets = [o for o in offsets if any(o)]

    for c in ids:
        coords = []
        rest = c
        for _ in range(dim):
            coords.append(rest % m)
            rest //= m
        coords.reverse()
        for off in offsets:
            nb = 0
            for x, s in zip(coords, off):
                nb = nb * m + (x + s) % m
            j = index.get(nb)
            if j is not None:
                union(index[c], j)

    return sum(1 for i in range(len(ids)) if find(i) == i)
