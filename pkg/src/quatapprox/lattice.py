"""Vectorised lattice enumeration and scan primitives.

Everything in this package that searches over denominators q reduces to a
handful of numpy kernels collected here:

* a cached, norm-sorted array of *scan representatives* — one Lipschitz
  element per right-associate class (with harmless duplicates) — so that
  unit-invariant minimisations touch ~1/24th of the order;
* nearest-lattice-point distances in the w = xi*q coordinate frame, where
  |xi - p*q^-1| * |q| = |w - p| turns every quality measure into a plain
  Euclidean distance;
* chunked enumeration of the full order up to a norm bound, for the few
  operations that genuinely need every element rather than class reps.

Scan representatives: every right-associate class {q*u} of a nonzero
Hurwitz integer contains a Lipschitz element with a >= 1 and
a >= max(|b|, |c|, |d|).  (A half-odd element y has y*u Lipschitz for one of
the 16 half-odd units u — work mod 4 using y*conj(y) = norm; then among the
8 right-unit images +-(a,b,c,d), +-(-b,a,d,-c), +-(-c,-d,a,b), +-(-d,c,-b,a)
of a Lipschitz element one has the largest-magnitude coordinate first and
positive.)  Distinct representatives can share a class, so these arrays are
only used for minimisation and union scans, never for counting; counting
uses :func:`class_representatives`.
"""

from __future__ import annotations

import math
import threading

import numpy as np

from .errors import ValidationError
from .hurwitz import UNITS, HurwitzInt, enumerate_by_norm

# ---------------------------------------------------------------------------
# multiplication matrices
# ---------------------------------------------------------------------------

def left_mul_matrix(xi):
    """4x4 matrix M with coords(xi * q) = M @ coords(q)."""
    a, b, c, d = xi
    return np.array(
        [
            [a, -b, -c, -d],
            [b, a, -d, c],
            [c, d, a, -b],
            [d, -c, b, a],
        ],
        dtype=np.float64,
    )


def right_mul_int_matrix(y_doubled):
    """Integer matrix R with doubled(x*y) = R @ doubled(x) / 2.

    Used for exact lattice bases; entries are plain Python ints.
    """
    a, b, c, d = y_doubled
    return [
        [a, -b, -c, -d],
        [b, a, d, -c],
        [c, -d, a, b],
        [d, c, -b, a],
    ]


# ---------------------------------------------------------------------------
# nearest Hurwitz point in w-space
# ---------------------------------------------------------------------------

def nearest_dist_sq(W):
    """Squared distance from each row of W to the nearest Hurwitz integer.

    The order is Z^4 together with Z^4 + (1/2,1/2,1/2,1/2); the nearest
    point is the better of the two coset roundings.
    """
    R = np.rint(W)
    d1 = np.einsum("...i,...i->...", W - R, W - R)
    R = np.rint(W - 0.5) + 0.5
    d2 = np.einsum("...i,...i->...", W - R, W - R)
    return np.minimum(d1, d2)


def nearest_hurwitz_float(w, tie_eps=1e-12):
    """Nearest Hurwitz integer to a floating 4-vector, deterministic on ties.

    Mirrors :func:`quatapprox.hurwitz.nearest_hurwitz_doubled`: candidates
    from both cosets, per-axis alternatives whenever a coordinate sits
    within ``tie_eps`` of a rounding boundary, lex-smallest doubled tuple
    among the minimisers.
    """
    import itertools

    best = None
    for coset in (0.0, 0.5):
        axis_cands = []
        for x in w:
            t = math.floor(x - coset + 0.5)
            cands = [t]
            frac = (x - coset) - t
            if abs(frac - 0.5) <= tie_eps:
                cands.append(t + 1)
            elif abs(frac + 0.5) <= tie_eps:
                cands.append(t - 1)
            axis_cands.append(
                [int(round(2 * (c + coset))) for c in cands]
            )
        for combo in itertools.product(*axis_cands):
            d2 = sum((x - v / 2.0) ** 2 for x, v in zip(w, combo))
            key = (d2, combo)
            if best is None or key < best:
                best = key
    return HurwitzInt.from_doubled(*best[1])


# ---------------------------------------------------------------------------
# scan representatives (one Lipschitz element per class, duplicates allowed)
# ---------------------------------------------------------------------------

class _RepCache:
    def __init__(self):
        self.lock = threading.Lock()
        self.max_norm = 0
        self.coords = np.empty((0, 4), dtype=np.int16)
        self.norms = np.empty(0, dtype=np.int32)

    def ensure(self, max_norm):
        with self.lock:
            if max_norm <= self.max_norm:
                return
            blocks = []
            norm_blocks = []
            a_max = math.isqrt(max_norm)
            for a in range(1, a_max + 1):
                span = np.arange(-a, a + 1, dtype=np.int16)
                b, c, d = np.meshgrid(span, span, span, indexing="ij")
                b = b.ravel()
                c = c.ravel()
                d = d.ravel()
                n = (
                    np.int32(a) * np.int32(a)
                    + b.astype(np.int32) ** 2
                    + c.astype(np.int32) ** 2
                    + d.astype(np.int32) ** 2
                )
                keep = n <= max_norm
                if not keep.any():
                    continue
                k = int(keep.sum())
                block = np.empty((k, 4), dtype=np.int16)
                block[:, 0] = a
                block[:, 1] = b[keep]
                block[:, 2] = c[keep]
                block[:, 3] = d[keep]
                blocks.append(block)
                norm_blocks.append(n[keep])
            coords = np.concatenate(blocks, axis=0)
            norms = np.concatenate(norm_blocks)
            order = np.lexsort(
                (coords[:, 3], coords[:, 2], coords[:, 1], coords[:, 0], norms)
            )
            self.coords = coords[order]
            self.norms = norms[order]
            self.max_norm = max_norm


_REPS = _RepCache()


def scan_reps(max_norm):
    """(coords int16 (N,4), norms int32 (N,)) with every class of norm <= max_norm.

    Sorted by (norm, lex coords); rebuilt (and cached) on demand.  Rows are
    integer quaternion coordinates with a >= 1 and |b|, |c|, |d| <= a.
    """
    if max_norm < 1:
        raise ValidationError("max_norm must be >= 1")
    _REPS.ensure(int(max_norm))
    hi = int(np.searchsorted(_REPS.norms, max_norm, side="right"))
    return _REPS.coords[:hi], _REPS.norms[:hi]


def scan_min(xi_coords, max_norm, weight=None, chunk=1 << 20, workers=1):
    """Minimise |w - p| (optionally times a per-row weight) over class reps.

    ``weight``: None, or a callable norms_chunk -> positive array; the
    scanned objective is then |xi*q - p| * weight(norm_sq(q)).  Returns
    (best value, rep coords (4,), rep norm).  Deterministic regardless of
    ``workers``: the chunk grid is fixed and ties keep the earliest row in
    (norm, lex) order.
    """
    coords, norms = scan_reps(max_norm)
    M = left_mul_matrix(xi_coords)

    def one_chunk(lo):
        hi = min(lo + chunk, len(coords))
        W = coords[lo:hi].astype(np.float64) @ M.T
        val = np.sqrt(nearest_dist_sq(W))
        if weight is not None:
            val = val * weight(norms[lo:hi])
        i = int(np.argmin(val))
        return float(val[i]), lo + i

    starts = range(0, len(coords), chunk)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_chunk, starts))
    else:
        results = [one_chunk(lo) for lo in starts]
    best, best_i = min(results)
    return best, _REPS.coords[best_i].astype(int), int(_REPS.norms[best_i])


# ---------------------------------------------------------------------------
# full-order enumeration (chunked)
# ---------------------------------------------------------------------------

def iter_hurwitz_doubled(max_norm, chunk_rows=1 << 21):
    """Yield (doubled int32 (k,4), norms int32 (k,)) covering 0 < norm <= max_norm.

    Both cosets of the order, chunked by leading coordinate so that memory
    stays bounded; iteration order is deterministic.
    """
    if max_norm < 1:
        raise ValidationError("max_norm must be >= 1")
    pending = []
    pending_n = []
    count = 0

    def flush():
        nonlocal pending, pending_n, count
        if pending:
            yield np.concatenate(pending), np.concatenate(pending_n)
            pending, pending_n, count = [], [], 0

    R = math.isqrt(4 * max_norm)
    for parity in (0, 1):
        start = -R if R % 2 == parity else -R + 1
        axis_full = np.arange(start, R + 1, 2, dtype=np.int32)
        for A in axis_full:
            rem = 4 * max_norm - int(A) * int(A)
            if rem < 0:
                continue
            r = math.isqrt(rem)
            s = -r if r % 2 == parity else -r + 1
            span = np.arange(s, r + 1, 2, dtype=np.int32)
            if len(span) == 0:
                continue
            B, C, D = np.meshgrid(span, span, span, indexing="ij")
            B, C, D = B.ravel(), C.ravel(), D.ravel()
            n4 = int(A) * int(A) + B * B + C * C + D * D
            keep = (n4 <= 4 * max_norm) & (n4 > 0)
            k = int(keep.sum())
            if k == 0:
                continue
            block = np.empty((k, 4), dtype=np.int32)
            block[:, 0] = A
            block[:, 1] = B[keep]
            block[:, 2] = C[keep]
            block[:, 3] = D[keep]
            pending.append(block)
            pending_n.append(n4[keep] // 4)
            count += k
            if count >= chunk_rows:
                yield from flush()
    yield from flush()


# ---------------------------------------------------------------------------
# canonical class representatives (exact, for counting)
# ---------------------------------------------------------------------------

_RIGHT_UNIT_MULS = None


def _right_unit_muls():
    global _RIGHT_UNIT_MULS
    if _RIGHT_UNIT_MULS is None:
        _RIGHT_UNIT_MULS = tuple(u.doubled for u in UNITS)
    return _RIGHT_UNIT_MULS


def canonical_class_rep(q):
    """Lex-max doubled tuple over the right-associate orbit {q*u}."""
    best = None
    for u in UNITS:
        t = (q * u).doubled
        if best is None or t > best:
            best = t
    return HurwitzInt.from_doubled(*best)


def class_representatives(m):
    """One canonical representative per right-associate class of norm m.

    Sorted descending on the doubled tuple; the number of classes equals
    sigma_odd(m) (Hurwitz count 24*sigma_odd(m) over orbits of size 24).
    """
    reps = {canonical_class_rep(x).doubled for x in enumerate_by_norm(m)}
    return [HurwitzInt.from_doubled(*t) for t in sorted(reps, reverse=True)]


def _pack_doubled(Y):
    """Monotone uint64 key for doubled rows: lex order on tuples == numeric."""
    K = (Y + (1 << 15)).astype(np.uint64)
    return (K[:, 0] << 48) | (K[:, 1] << 32) | (K[:, 2] << 16) | K[:, 3]


def class_representatives_range(lo_norm, hi_norm):
    """Canonical class representatives for every norm in [lo_norm, hi_norm].

    Same canonical form as :func:`class_representatives` (lex-max doubled
    tuple over the right-associate orbit), but computed in bulk: the whole
    order is enumerated once and orbits are collapsed with vectorised unit
    multiplications, so sweeping a few hundred norms does not pay the
    per-element python cost.  Returns HurwitzInt objects sorted by
    (norm ascending, doubled tuple descending).
    """
    if not 1 <= lo_norm <= hi_norm:
        raise ValidationError("need 1 <= lo_norm <= hi_norm")
    if 2 * math.isqrt(4 * hi_norm) >= (1 << 15):
        raise ValidationError("norm bound too large for packed canonical keys")
    from .hurwitz import UNITS as _units

    stacked = np.hstack(
        [np.array(right_mul_int_matrix(u.doubled), dtype=np.int64).T for u in _units]
    )  # (4, 96): doubled(x*u) = (doubled(x) @ R_u.T) / 2, all units side by side
    keys = []
    for block, n in iter_hurwitz_doubled(hi_norm, chunk_rows=1 << 17):
        keep = n >= lo_norm
        if not keep.any():
            continue
        Y = (block[keep].astype(np.int64) @ stacked) // 2
        # (k, 4, 24): per element, the doubled coords of all 24 associates
        orbit = _pack_doubled(Y.reshape(-1, 24, 4).swapaxes(1, 2))
        keys.append(orbit.max(axis=1))
    if not keys:
        return []
    uniq = np.unique(np.concatenate(keys))
    coords = np.empty((len(uniq), 4), dtype=np.int64)
    for i, shift in enumerate((48, 32, 16, 0)):
        coords[:, i] = ((uniq >> np.uint64(shift)) & np.uint64(0xFFFF)).astype(
            np.int64
        ) - (1 << 15)
    norms = (coords * coords).sum(axis=1) // 4
    order = np.lexsort((~uniq, norms))
    return [
        HurwitzInt.from_doubled(*coords[i]) for i in order
    ]


# ---------------------------------------------------------------------------
# batch coverage scans (many sample points x many denominators)
# ---------------------------------------------------------------------------

_STRUCT_MATS = None


def structure_mats():
    """C_0..C_3 with (x*y)_i = x @ C_i @ y for row vectors of coordinates.

    Lets a (samples x reps) product table be built from four matrix
    products instead of a python loop over reps.
    """
    global _STRUCT_MATS
    if _STRUCT_MATS is None:
        mats = np.zeros((4, 4, 4))
        basis = [HurwitzInt(1, 0, 0, 0), HurwitzInt(0, 1, 0, 0),
                 HurwitzInt(0, 0, 1, 0), HurwitzInt(0, 0, 0, 1)]
        for a in range(4):
            for b in range(4):
                prod = (basis[a] * basis[b]).coords()
                for i in range(4):
                    mats[i, a, b] = float(prod[i])
        _STRUCT_MATS = mats
    return _STRUCT_MATS


def cover_mask(
    samples,
    coords,
    norms,
    thresholds,
    descending=False,
    record_first=False,
    pair_budget=1_000_000,
):
    """Which samples lie within a per-denominator w-space threshold of the order.

    For each sample xi and denominator row q (quaternion coordinates) the
    test is  min_p |xi*q - p| <= threshold[q].  Returns a boolean (S,) mask;
    with ``record_first=True`` additionally returns an int64 array of the
    first *norm* at which each sample was covered (-1 when never), which is
    only meaningful with ascending scan order.

    Covered samples drop out of later chunks, so unions that saturate are
    cheap regardless of how many denominators remain.
    """
    S = len(samples)
    covered = np.zeros(S, dtype=bool)
    first = np.full(S, -1, dtype=np.int64) if record_first else None
    if S == 0 or len(coords) == 0:
        return (covered, first) if record_first else covered
    mats = structure_mats()
    order = np.arange(len(coords))
    if descending:
        order = order[::-1]
    active = np.arange(S)
    X = np.asarray(samples, dtype=np.float64)
    pos = 0
    while pos < len(order) and len(active) > 0:
        k = max(256, int(pair_budget // max(len(active), 1)))
        idx = order[pos:pos + k]
        pos += len(idx)
        Q = coords[idx].astype(np.float64).T  # (4, k)
        thr = thresholds[idx]
        Xa = X[active]
        d2 = e2 = None
        for i in range(4):
            Wi = (Xa @ mats[i]) @ Q  # (S_active, k)
            fi = Wi - np.rint(Wi)
            np.square(fi, out=fi)
            d2 = fi if d2 is None else np.add(d2, fi, out=d2)
            Wi -= 0.5
            gi = Wi - np.rint(Wi)
            np.square(gi, out=gi)
            e2 = gi if e2 is None else np.add(e2, gi, out=e2)
        np.minimum(d2, e2, out=d2)
        hit = d2 <= (thr * thr)[None, :]
        any_hit = hit.any(axis=1)
        if any_hit.any():
            rows = np.flatnonzero(any_hit)
            if record_first:
                cols = hit[rows].argmax(axis=1)
                first[active[rows]] = norms[idx][cols]
            covered[active[rows]] = True
            active = active[~any_hit]
    return (covered, first) if record_first else covered


# ---------------------------------------------------------------------------
# sampling / rng plumbing
# ---------------------------------------------------------------------------

def spawn_rngs(seed, shards):
    """Independent Philox streams for order-independent sharded Monte Carlo."""
    ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in ss.spawn(shards)]


def sample_delta(rng, n):
    """n uniform samples from Delta = [0,1)^3 x [0,1/2) as an (n,4) array."""
    pts = rng.random((n, 4))
    pts[:, 3] *= 0.5
    return pts


def binom_stderr(hits, n):
    """Standard error of a Monte Carlo proportion, add-one smoothed so that
    zero observed hits still reports an honest uncertainty of order 1/n."""
    p = (hits + 1) / (n + 2)
    return math.sqrt(p * (1 - p) / n)
