"""Resonant sets R_q = {p*q^-1 in closed Delta} and their ball unions.

Enumeration is exact and never touches floating point for membership: the
value of p*q^-1 has doubled numerators Y = doubled(p * conj(q)), so
p*q^-1 lies in the closed fundamental domain iff the integer vector Y
lands in the box [0, 2n]^3 x [0, n] (n = norm_sq(q)).  Writing doubled(p)
= B t for t in Z^4 (B the basis of the doubled order), Y = G t for an
integer matrix G with det G = 8 n^2, so enumeration is: map the box
corners through the exact inverse of G, walk the resulting t-grid, and
keep the rows that land in the box.  The point count is n^2 + O(n^{3/2});
counting alone uses a triangular (Hermite) basis of the same lattice, so
it visits layers rather than points and stays cheap at the norm limit.

Monte Carlo measures (near-resonant volume, local ubiquity) follow the
sharded-stream contract: a master seed spawns a fixed number of child
streams, and the reduction is an order-independent sum, so results depend
only on (seed, shard count), both of which are reported.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import InternalInvariantError, ValidationError
from .hurwitz import HurwitzInt, HurwitzRational
from .lattice import (
    binom_stderr,
    class_representatives,
    cover_mask,
    right_mul_int_matrix,
    sample_delta,
    scan_reps,
    spawn_rngs,
)

__all__ = [
    "RESONANT_NORM_LIMIT",
    "ResonantLattice",
    "SeparationAudit",
    "UbiquityReport",
    "VolumeEstimate",
    "count_resonant",
    "enumerate_resonant",
    "exclusion_mass",
    "near_resonant_volume",
    "separation_audit",
    "ubiquity_check",
]

RESONANT_NORM_LIMIT = 10_000

MC_SHARDS = 8

_B_COLS = ((2, 0, 0, 1), (0, 2, 0, 1), (0, 0, 2, 1), (0, 0, 0, 1))
# columns of the doubled-order basis: doubled(p) = B @ t


def _det3(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _adjugate4(g):
    adj = [[0] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(4):
            minor = [
                [g[r][c] for c in range(4) if c != j]
                for r in range(4)
                if r != i
            ]
            adj[j][i] = (-1) ** (i + j) * _det3(minor)
    return adj


def _resonant_matrix(q):
    """Integer G with Y = G t, plus det(G) = 8 n^2."""
    n = q.norm_sq()
    R = right_mul_int_matrix(q.conjugate().doubled)
    G = [
        [sum(R[i][k] * _B_COLS[k][j] for k in range(4)) // 2 for j in range(4)]
        for i in range(4)
    ]
    det = 8 * n * n
    return G, det


class ResonantLattice:
    """The resonant set of one denominator, enumerated exactly.

    ``points`` materialises HurwitzRational objects lazily; counting runs
    and float geometry use the integer numerator array directly.
    """

    def __init__(self, q, Y, T):
        self.q = q
        self.norm_sq = q.norm_sq()
        self._Y = Y
        self._T = T
        self.count = len(Y)
        self._points = None

    @property
    def points(self):
        if self._points is None:
            out = []
            for t in self._T:
                t0, t1, t2, t3 = (int(v) for v in t)
                p = HurwitzInt.from_doubled(
                    2 * t0 + t3, 2 * t1 + t3, 2 * t2 + t3, t3
                )
                out.append(HurwitzRational(p, self.q))
            self._points = out
        return self._points

    def values_float(self):
        """Point coordinates as an (count, 4) float array."""
        return self._Y.astype(np.float64) / (2.0 * self.norm_sq)

    def numerators(self):
        """Doubled numerator vectors Y with value = Y / (2 norm_sq)."""
        return self._Y

    def boundary_faces(self):
        """Per-point count of domain faces the point lies on exactly."""
        n = self.norm_sq
        Y = self._Y
        b = (Y[:, :3] == 0).sum(axis=1) + (Y[:, :3] == 2 * n).sum(axis=1)
        b += (Y[:, 3] == 0).astype(np.int64) + (Y[:, 3] == n).astype(np.int64)
        return b

    def ratio(self):
        """count / |q|^4, which tends to 1."""
        return self.count / float(self.norm_sq) ** 2


def enumerate_resonant(q, chunk=1 << 20):
    """All p with p*q^-1 in the closed fundamental domain, exactly."""
    if not isinstance(q, HurwitzInt) or q.is_zero():
        raise ValidationError("q must be a nonzero Hurwitz integer")
    n = q.norm_sq()
    if n > RESONANT_NORM_LIMIT:
        raise ValidationError(
            f"norm_sq(q) = {n} exceeds the enumeration bound {RESONANT_NORM_LIMIT}"
        )
    G, det = _resonant_matrix(q)
    adj = _adjugate4(G)
    # exact t-coordinates of the 16 box corners; the t-region is their hull
    los = [0, 0, 0, 0]
    his = [2 * n, 2 * n, 2 * n, n]
    t_lo = [None] * 4
    t_hi = [None] * 4
    for mask in range(16):
        corner = [his[i] if mask >> i & 1 else los[i] for i in range(4)]
        for i in range(4):
            num = sum(adj[i][j] * corner[j] for j in range(4))
            val = Fraction(num, det)
            if t_lo[i] is None or val < t_lo[i]:
                t_lo[i] = val
            if t_hi[i] is None or val > t_hi[i]:
                t_hi[i] = val
    lo = [math.ceil(v) for v in t_lo]
    hi = [math.floor(v) for v in t_hi]
    spans = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    GT = np.array(G, dtype=np.int64).T
    Y_parts = []
    T_parts = []
    # chunk along the first axis to bound the grid size
    n1 = max(1, chunk // max(1, len(spans[1]) * len(spans[2]) * len(spans[3])))
    for s0 in range(0, len(spans[0]), n1):
        g = np.stack(
            np.meshgrid(spans[0][s0:s0 + n1], *spans[1:], indexing="ij"),
            axis=-1,
        ).reshape(-1, 4)
        Y = g @ GT
        keep = (
            (Y[:, :3] >= 0).all(axis=1)
            & (Y[:, :3] <= 2 * n).all(axis=1)
            & (Y[:, 3] >= 0)
            & (Y[:, 3] <= n)
        )
        if keep.any():
            Y_parts.append(Y[keep])
            T_parts.append(g[keep])
    if Y_parts:
        Y = np.concatenate(Y_parts)
        T = np.concatenate(T_parts)
        order = np.lexsort((Y[:, 3], Y[:, 2], Y[:, 1], Y[:, 0]))
        Y, T = Y[order], T[order]
    else:
        Y = np.empty((0, 4), dtype=np.int64)
        T = np.empty((0, 4), dtype=np.int64)
    return ResonantLattice(q, Y, T)


def _hnf_columns(M):
    """Column-style Hermite form of an integer 4x4 basis matrix.

    Returns lower-triangular H (list of rows of python ints) spanning the
    same lattice: H Z^4 = M Z^4, positive diagonal, 0 <= H[i][j] < H[i][i]
    for j < i.  Exact integer column operations only.
    """
    A = [[int(x) for x in row] for row in M]
    for i in range(4):
        while any(A[i][j] for j in range(i + 1, 4)):
            cands = [j for j in range(i, 4) if A[i][j] != 0]
            jmin = min(cands, key=lambda j: abs(A[i][j]))
            if jmin != i:
                for r in range(4):
                    A[r][i], A[r][jmin] = A[r][jmin], A[r][i]
            piv = A[i][i]
            for j in range(i + 1, 4):
                if A[i][j]:
                    f = A[i][j] // piv
                    for r in range(4):
                        A[r][j] -= f * A[r][i]
        if A[i][i] == 0:
            raise InternalInvariantError("resonant basis is singular")
        if A[i][i] < 0:
            for r in range(4):
                A[r][i] = -A[r][i]
        for j in range(i):
            f = A[i][j] // A[i][i]
            if f:
                for r in range(4):
                    A[r][j] -= f * A[r][i]
    return A


def _counting_order(G, lims):
    """Row order minimising the layer count of the triangular enumeration.

    For a row permutation pi, the Hermite diagonal is determined by gcds of
    k x k minors of the first k rows; the number of (k0, k1, k2) layers the
    counter visits is the product of the first three (limit/diagonal + 1)
    factors, so all 24 orders can be costed exactly without refactoring.
    """
    rows = [[int(x) for x in row] for row in G]
    g1 = {}
    g2 = {}
    g3 = {}
    for i in range(4):
        g1[frozenset((i,))] = math.gcd(*(abs(x) for x in rows[i])) or 1
    for pair in itertools.combinations(range(4), 2):
        a, b = (rows[p] for p in pair)
        ms = [
            abs(a[c1] * b[c2] - a[c2] * b[c1])
            for c1, c2 in itertools.combinations(range(4), 2)
        ]
        g2[frozenset(pair)] = math.gcd(*ms) or 1
    for tri in itertools.combinations(range(4), 3):
        a, b, c = (rows[p] for p in tri)
        ms = [
            abs(
                a[x] * (b[y] * c[z] - b[z] * c[y])
                - a[y] * (b[x] * c[z] - b[z] * c[x])
                + a[z] * (b[x] * c[y] - b[y] * c[x])
            )
            for x, y, z in itertools.combinations(range(4), 3)
        ]
        g3[frozenset(tri)] = math.gcd(*ms) or 1
    best, best_cost = None, None
    for pi in itertools.permutations(range(4)):
        d0 = g1[frozenset(pi[:1])]
        d1 = max(g2[frozenset(pi[:2])] // d0, 1)
        d2 = max(g3[frozenset(pi[:3])] // g2[frozenset(pi[:2])], 1)
        cost = (
            (lims[pi[0]] // d0 + 1)
            * (lims[pi[1]] // d1 + 1)
            * (lims[pi[2]] // d2 + 1)
        )
        if best_cost is None or cost < best_cost:
            best, best_cost = pi, cost
    return best


def _ragged_aranges(lo, cnt, total):
    """Concatenation of arange(lo[i], lo[i] + cnt[i]) without a python loop."""
    ends = np.cumsum(cnt)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(ends - cnt, cnt)
    return np.repeat(lo, cnt) + offsets


def count_resonant(q):
    """len(R_q) without materialising points.

    Works on a triangular basis of the numerator lattice: with Y = H k and
    H lower triangular, the box constraints peel off one coordinate per
    level, so the innermost coordinate is counted as an arithmetic
    progression in O(1) per (k0, k1, k2) layer instead of being enumerated.
    Exact integers throughout; agrees with enumerate_resonant verbatim.
    """
    if not isinstance(q, HurwitzInt) or q.is_zero():
        raise ValidationError("q must be a nonzero Hurwitz integer")
    n = q.norm_sq()
    if n > RESONANT_NORM_LIMIT:
        raise ValidationError(
            f"norm_sq(q) = {n} exceeds the enumeration bound {RESONANT_NORM_LIMIT}"
        )
    G, _det = _resonant_matrix(q)
    lims_box = [2 * n, 2 * n, 2 * n, n]
    pi = _counting_order(G, lims_box)
    Ga = np.array(G, dtype=np.int64)[list(pi)]
    H = _hnf_columns(Ga)
    lims = [lims_box[p] for p in pi]
    d1, d2, d3 = H[1][1], H[2][2], H[3][3]
    k0 = np.arange(0, lims[0] // H[0][0] + 1, dtype=np.int64)
    p1 = H[1][0] * k0
    lo1 = -(p1 // d1)
    cnt1 = np.maximum((lims[1] - p1) // d1 - lo1 + 1, 0)
    t1 = int(cnt1.sum())
    k0 = np.repeat(k0, cnt1)
    k1 = _ragged_aranges(lo1, cnt1, t1)
    p2 = H[2][0] * k0 + H[2][1] * k1
    lo2 = -(p2 // d2)
    cnt2 = np.maximum((lims[2] - p2) // d2 - lo2 + 1, 0)
    t2 = int(cnt2.sum())
    k0 = np.repeat(k0, cnt2)
    k1 = np.repeat(k1, cnt2)
    k2 = _ragged_aranges(lo2, cnt2, t2)
    p3 = H[3][0] * k0 + H[3][1] * k1 + H[3][2] * k2
    return int(np.maximum((lims[3] - p3) // d3 + p3 // d3 + 1, 0).sum())


# ---------------------------------------------------------------------------
# near-resonant volume
# ---------------------------------------------------------------------------

_DELTA_DIAMETER = math.sqrt(3.25)
_DELTA_VOLUME = 0.5


@dataclass
class VolumeEstimate:
    q: HurwitzInt
    epsilon: float
    measure: float
    stderr: float
    samples: int
    seed: int
    shards: int
    analytic_clipped: Optional[float] = None

    def as_record(self):
        return {
            "q": str(self.q),
            "epsilon": self.epsilon,
            "measure": self.measure,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "shards": self.shards,
            "analytic_clipped": self.analytic_clipped,
        }


def near_resonant_volume(q, epsilon, samples=100_000, seed=0):
    """Lebesgue measure of the union of epsilon-balls about R_q inside Delta.

    Monte Carlo with a fixed shard count; when epsilon is small enough that
    balls neither overlap nor straddle a face other than exactly at their
    centre (epsilon <= 1/(2 norm_sq)), the exact clipped ball sum
    (pi^2/2) eps^4 * sum 2^-faces is attached for comparison.
    """
    if epsilon < 0:
        raise ValidationError("epsilon must be non-negative")
    if samples <= 0:
        raise ValidationError("samples must be positive")
    lat = enumerate_resonant(q)
    if epsilon == 0:
        return VolumeEstimate(q, 0.0, 0.0, 0.0, samples, seed, MC_SHARDS, 0.0)
    if epsilon >= _DELTA_DIAMETER:
        return VolumeEstimate(
            q, float(epsilon), _DELTA_VOLUME, 0.0, samples, seed, MC_SHARDS, None
        )
    from scipy.spatial import cKDTree

    tree = cKDTree(lat.values_float())
    per = [samples // MC_SHARDS] * MC_SHARDS
    per[-1] += samples - sum(per)
    hits = 0
    for rng, k in zip(spawn_rngs(seed, MC_SHARDS), per):
        pts = sample_delta(rng, k)
        d, _ = tree.query(pts, k=1)
        hits += int((d <= epsilon).sum())
    frac = hits / samples
    measure = _DELTA_VOLUME * frac
    stderr = _DELTA_VOLUME * binom_stderr(hits, samples)
    analytic = None
    if epsilon <= 1.0 / (2 * lat.norm_sq):
        weights = 0.5 ** lat.boundary_faces().astype(np.float64)
        analytic = float(
            (math.pi ** 2 / 2) * float(epsilon) ** 4 * weights.sum()
        )
    return VolumeEstimate(
        q, float(epsilon), measure, stderr, samples, seed, MC_SHARDS, analytic
    )


# ---------------------------------------------------------------------------
# local ubiquity
# ---------------------------------------------------------------------------

@dataclass
class UbiquityReport:
    center: tuple
    radius: float
    N: int
    rho: float
    covered_fraction: float
    stderr: float
    samples: int
    seed: int
    shards: int
    EN_estimate: float
    vpi: float

    def as_record(self):
        return {
            "center": list(self.center),
            "radius": self.radius,
            "N": self.N,
            "rho": self.rho,
            "fraction": self.covered_fraction,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "shards": self.shards,
            "EN_estimate": self.EN_estimate,
            "vpi": self.vpi,
        }


def _validate_ball(center, radius):
    c = tuple(float(x) for x in center)
    if len(c) != 4 or not all(math.isfinite(x) for x in c):
        raise ValidationError("ball center must be four finite reals")
    if not radius > 0:
        raise ValidationError("ball radius must be positive")
    ok = all(c[i] - radius >= 0 and c[i] + radius <= 1 for i in range(3))
    ok = ok and c[3] - radius >= 0 and c[3] + radius <= 0.5
    if not ok:
        raise ValidationError("ball is not contained in the fundamental domain")
    return c


def _ball_samples(rng, center, radius, k):
    v = rng.normal(size=(k, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.random(k) ** 0.25
    return np.asarray(center) + v * r[:, None]


def exclusion_mass(center, radius, N, samples=100_000, seed=0, vpi_value=None):
    """The |E(N)| diagnostic alone: fraction of the ball within 2/(|q| N) of
    a rational with |q| < vpi (default sqrt(N)).

    This is the mass the covering argument has to excise; it only involves
    denominators of norm < vpi^2, so it is cheap at any N.  Uses the same
    sample stream as ubiquity_check, whose EN_estimate it reproduces.
    """
    c = _validate_ball(center, radius)
    if not isinstance(N, int) or N < 2:
        raise ValidationError("N must be an integer >= 2")
    if samples <= 0:
        raise ValidationError("samples must be positive")
    vpi = math.sqrt(N) if vpi_value is None else float(vpi_value)
    small_hi = math.ceil(vpi * vpi) - 1
    if small_hi < 1:
        return 0.0
    coords, norms = scan_reps(small_hi)
    thr = np.full(len(norms), 2.0 / N)
    hits = 0
    per = [samples // MC_SHARDS] * MC_SHARDS
    per[-1] += samples - sum(per)
    for rng, k in zip(spawn_rngs(seed, MC_SHARDS), per):
        pts = _ball_samples(rng, c, radius, k)
        hits += int(cover_mask(pts, coords, norms, thr).sum())
    return hits / samples


def ubiquity_check(
    center,
    radius,
    N,
    rho_value,
    samples=100_000,
    seed=0,
    vpi_value=None,
    workers=1,
):
    """Monte Carlo check that rho-balls about small-denominator rationals
    cover most of a given ball.

    Estimates |B0 ∩ union over 1 <= |q| <= N of B(R_q, rho)| / |B0|, and the
    companion small-denominator diagnostic: the fraction of B0 within
    2/(|q| N) of a rational with |q| < vpi (default sqrt(N)), the mass the
    covering argument has to excise.
    """
    c = _validate_ball(center, radius)
    if not isinstance(N, int) or N < 2:
        raise ValidationError("N must be an integer >= 2")
    if not rho_value > 0:
        raise ValidationError("rho_value must be positive")
    if samples <= 0:
        raise ValidationError("samples must be positive")
    vpi = math.sqrt(N) if vpi_value is None else float(vpi_value)
    coords, norms = scan_reps(N * N)
    thr_cover = rho_value * np.sqrt(norms.astype(np.float64))
    small_hi = math.ceil(vpi * vpi) - 1
    k_small = int(np.searchsorted(norms, small_hi, side="right"))
    thr_small = np.full(k_small, 2.0 / N)

    def one_shard(args):
        rng, k = args
        pts = _ball_samples(rng, c, radius, k)
        got = cover_mask(pts, coords, norms, thr_cover, descending=True)
        small = 0
        if k_small > 0:
            small = int(
                cover_mask(pts, coords[:k_small], norms[:k_small], thr_small).sum()
            )
        return int(got.sum()), small

    per = [samples // MC_SHARDS] * MC_SHARDS
    per[-1] += samples - sum(per)
    jobs = list(zip(spawn_rngs(seed, MC_SHARDS), per))
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_shard, jobs))
    else:
        results = [one_shard(j) for j in jobs]
    covered_hits = sum(r[0] for r in results)
    en_hits = sum(r[1] for r in results)
    frac = covered_hits / samples
    stderr = binom_stderr(covered_hits, samples)
    return UbiquityReport(
        center=c,
        radius=radius,
        N=N,
        rho=float(rho_value),
        covered_fraction=frac,
        stderr=stderr,
        samples=samples,
        seed=seed,
        shards=MC_SHARDS,
        EN_estimate=en_hits / samples,
        vpi=vpi,
    )


# ---------------------------------------------------------------------------
# separation audit (exhaustive distinct-pair check)
# ---------------------------------------------------------------------------

@dataclass
class SeparationAudit:
    max_norm: int
    distinct_values: int
    pairs_checked: int
    violations: list

    def ok(self):
        return not self.violations


def _all_values_reduced(max_norm):
    """Every distinct rational value in closed Delta with denominator norm
    <= max_norm, as reduced integer rows (k0..k3, k4) meaning value k/ k4,
    together with the minimal denominator norm realising each value."""
    rows = []
    for m in range(1, max_norm + 1):
        for rep in class_representatives(m):
            lat = enumerate_resonant(rep)
            if lat.count == 0:
                continue
            Y = lat.numerators()
            k5 = np.empty((len(Y), 6), dtype=np.int64)
            k5[:, :4] = Y
            k5[:, 4] = 2 * m
            g = np.gcd.reduce(k5[:, :5], axis=1)
            k5[:, :5] //= g[:, None]
            k5[:, 5] = m
            rows.append(k5)
    allrows = np.concatenate(rows)
    order = np.lexsort(
        (allrows[:, 5], allrows[:, 4], allrows[:, 3], allrows[:, 2], allrows[:, 1], allrows[:, 0])
    )
    allrows = allrows[order]
    key = allrows[:, :5]
    new = np.ones(len(allrows), dtype=bool)
    new[1:] = (key[1:] != key[:-1]).any(axis=1)
    return allrows[new]


def separation_audit(max_norm=64, workers=1):
    """Exhaustively verify gap >= 1/(|q| |s|) over all distinct value pairs.

    Values are bucketed by half-power-of-two bands of their minimal
    denominator norm (2^t <= n^2 < 2^(t+1)); each band pair gets one
    KD-tree query at the band-worst radius, which over-covers the true
    1/sqrt(n1 n2) by at most sqrt(2).  Every candidate pair is then decided
    in exact integer arithmetic, so the audit has no floating-point blind
    spots and over-covering only costs redundant exact checks.  Band pairs
    are independent, so they shard across worker threads.
    """
    from scipy.spatial import cKDTree

    vals = _all_values_reduced(max_norm)
    coords = vals[:, :4].astype(np.float64) / vals[:, 4:5].astype(np.float64)
    min_norm = vals[:, 5]

    def exact_check(gi, gj, out):
        count = 0
        for lo in range(0, len(gi), 1 << 22):
            a = vals[gi[lo:lo + (1 << 22)]]
            b = vals[gj[lo:lo + (1 << 22)]]
            count += len(a)
            diff = a[:, :4] * b[:, 4:5] - b[:, :4] * a[:, 4:5]
            lhs = (diff * diff).sum(axis=1) * (a[:, 5] * b[:, 5])
            rhs = (a[:, 4] * b[:, 4]) ** 2
            for t in np.flatnonzero(lhs < rhs):
                out.append((tuple(a[t]), tuple(b[t])))
        return count

    shift = np.floor(2.0 * np.log2(min_norm.astype(np.float64))).astype(np.int64)
    band_ix = []
    band_t = []
    for t in range(int(shift.max()) + 1):
        ix = np.flatnonzero(shift == t)
        if len(ix):
            band_ix.append(ix)
            band_t.append(t)
    trees = [cKDTree(coords[ix]) for ix in band_ix]
    small = 4096

    def run_pair(ij):
        i, j = ij
        out = []
        r = 2.0 ** (-(band_t[i] + band_t[j]) / 4.0) + 1e-9
        ix1, ix2 = band_ix[i], band_ix[j]
        if i == j:
            pp = trees[i].query_pairs(r, output_type="ndarray")
            if not len(pp):
                return 0, out
            return exact_check(ix1[pp[:, 0]], ix1[pp[:, 1]], out), out
        if len(ix1) <= small:
            ll = trees[j].query_ball_point(coords[ix1], r)
            gi = np.repeat(np.arange(len(ix1)), [len(x) for x in ll])
            gj = np.fromiter(
                (v for x in ll for v in x), dtype=np.int64, count=len(gi)
            )
            if not len(gi):
                return 0, out
            return exact_check(ix1[gi], ix2[gj], out), out
        both = np.concatenate([ix1, ix2])
        tree = cKDTree(coords[both])
        pp = tree.query_pairs(r, output_type="ndarray")
        s = len(ix1)
        pp = pp[(pp[:, 0] < s) != (pp[:, 1] < s)]
        if not len(pp):
            return 0, out
        return exact_check(both[pp[:, 0]], both[pp[:, 1]], out), out

    jobs = [
        (i, j)
        for i in range(len(band_ix))
        for j in range(i, len(band_ix))
    ]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_pair, jobs))
    else:
        results = [run_pair(ij) for ij in jobs]
    violations = []
    for _, out in results:
        violations.extend(out)
    return SeparationAudit(
        max_norm=max_norm,
        distinct_values=len(vals),
        pairs_checked=sum(r[0] for r in results),
        violations=violations,
    )
