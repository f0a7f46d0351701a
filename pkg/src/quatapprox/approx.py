"""Constructive approximation of quaternions by Hurwitz rationals.

The search problems all live in the w = xi*q frame: since
|xi - p*q^-1| * |q| = |xi*q - p|, any statement about approximation quality
becomes a nearest-lattice-point statement, and the three public searches
are thin policies over :mod:`quatapprox.lattice` scans:

* :func:`dirichlet_search` minimises |xi*q - p| (the quality err * |q|),
* :func:`good_approximants` collects every pair below err < 2/norm_sq(q),
* :func:`markov_constants` minimises err * norm_sq(q).

The quality err * |q| and the badness err * norm_sq(q) are both invariant
under right-unit moves q -> q*u (p follows as p*u), so minimising searches
scan one representative per right-associate class; the enumerating search
walks the full order because its output is the literal pair list.

:func:`construct_badly_approximable` runs the nested shrinking-ball
construction: around the current centre, a grid of candidate sub-balls is
laid out, any candidate too close to a rational with denominator norm in
the current band is discarded (the separation bound allows at most one
such rational near the ball, which is asserted), and a seeded survivor is
chosen.  The returned certificate min err * norm_sq(q) over the scanned
denominator range is the finite-depth badness witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import InternalInvariantError, ValidationError
from .hurwitz import (
    HurwitzInt,
    HurwitzRational,
    RationalQuaternion,
    RealQuaternion,
)
from .lattice import (
    left_mul_matrix,
    nearest_dist_sq,
    nearest_hurwitz_float,
    iter_hurwitz_doubled,
    scan_min,
    scan_reps,
)

__all__ = [
    "Approximant",
    "BadConstructionConfig",
    "BadConstructionResult",
    "LevelReport",
    "construct_badly_approximable",
    "dirichlet_search",
    "good_approximants",
    "markov_constants",
    "run_bad_construction",
]


# ---------------------------------------------------------------------------
# inputs and outputs
# ---------------------------------------------------------------------------

def _coerce_xi(xi):
    """Return (float 4-tuple, exact Fraction 4-tuple or None)."""
    if isinstance(xi, RealQuaternion):
        return xi.coords, None
    if isinstance(xi, RationalQuaternion):
        return tuple(float(c) for c in xi.coords), xi.coords
    try:
        coords = tuple(xi)
    except TypeError:
        raise ValidationError(f"cannot interpret {xi!r} as a quaternion")
    if len(coords) != 4:
        raise ValidationError("a quaternion needs exactly four coordinates")
    if any(isinstance(c, Fraction) for c in coords):
        exact = tuple(Fraction(c) for c in coords)
        return tuple(float(c) for c in exact), exact
    floats = tuple(float(c) for c in coords)
    if not all(math.isfinite(c) for c in floats):
        raise ValidationError("coordinates must be finite")
    return floats, None


@dataclass(frozen=True)
class Approximant:
    """One approximation xi ~ p * q^-1.

    ``err`` is the Euclidean distance |xi - p*q^-1|; when the target is
    exact (rational coordinates), ``err_exact`` carries the *squared*
    distance as a Fraction so downstream inequality checks can be exact.
    """

    p: HurwitzInt
    q: HurwitzInt
    err: float
    err_exact: Optional[Fraction] = None

    def quality(self):
        """err * |q|, the Dirichlet figure of merit."""
        return self.err * math.sqrt(self.q.norm_sq())

    def badness(self):
        """err * norm_sq(q), the Markov-constant figure of merit."""
        return self.err * self.q.norm_sq()

    def as_record(self):
        return {
            "p": str(self.p),
            "q": str(self.q),
            "err": self.err,
            "norm_sq_q": self.q.norm_sq(),
        }


def _exact_err_sq(exact_coords, p, q):
    v = HurwitzRational(p, q).value()
    return sum((a - b) ** 2 for a, b in zip(exact_coords, v.coords))


def _finish(xi_f, exact, p, q):
    v = HurwitzRational(p, q).value()
    err = math.sqrt(
        sum((a - float(b)) ** 2 for a, b in zip(xi_f, v.coords))
    )
    err_exact = None
    if exact is not None:
        err_exact = _exact_err_sq(exact, p, q)
        err = math.sqrt(float(err_exact))
    return Approximant(p=p, q=q, err=err, err_exact=err_exact)


# ---------------------------------------------------------------------------
# searches
# ---------------------------------------------------------------------------

def dirichlet_search(xi, N, workers=1):
    """Best-quality approximant with 1 <= |q| <= N.

    Minimises err * |q| over all denominators with norm_sq(q) <= N^2 with p
    the nearest Hurwitz integer to xi*q, and certifies the pigeonhole bound
    err < 2 / (|q| * N); the bound is a theorem for N >= 2, so missing it
    is an internal error, not a caller error.
    """
    if not isinstance(N, int) or N < 2:
        raise ValidationError("N must be an integer >= 2")
    xi_f, exact = _coerce_xi(xi)
    best, rep, norm = scan_min(xi_f, N * N, workers=workers)
    q = HurwitzInt(*(int(v) for v in rep))
    w = tuple(left_mul_matrix(xi_f) @ np.array(q.to_floats()))
    p = nearest_hurwitz_float(w)
    out = _finish(xi_f, exact, p, q)
    if out.quality() * N >= 2.0 + 1e-9:
        raise InternalInvariantError(
            f"pigeonhole bound missed: quality {out.quality()} at N={N}"
        )
    return out


def good_approximants(xi, Q_max, workers=1, chunk_rows=1 << 21):
    """Every (p, q) with norm_sq(q) <= Q_max^2 and err < 2 / norm_sq(q).

    The enumeration walks the whole order (so non-reduced pairs such as
    (p0*m, q0*m) appear alongside their reduced forms), takes p nearest to
    xi*q, and evaluates every candidate within 1e-9 of the nearest distance
    so borderline roundings cannot drop a qualifying pair.  Sorted by
    norm_sq(q), then err, then coordinates.
    """
    if not isinstance(Q_max, int) or Q_max < 1:
        raise ValidationError("Q_max must be an integer >= 1")
    xi_f, exact = _coerce_xi(xi)
    M = left_mul_matrix(xi_f)

    chunks = list(iter_hurwitz_doubled(Q_max * Q_max, chunk_rows=chunk_rows))

    def sift(args):
        doubled, norms = args
        W = (doubled.astype(np.float64) / 2.0) @ M.T
        d = np.sqrt(nearest_dist_sq(W))
        # err < 2/norm_sq(q)  <=>  |w - p| * |q| < 2, with slack; borderline
        # rows are re-decided exactly (or in careful floats) downstream
        keep = d * np.sqrt(norms) < 2.0 + 1e-9
        return doubled[keep], norms[keep], W[keep]

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            sifted = list(pool.map(sift, chunks))
    else:
        sifted = [sift(c) for c in chunks]

    out = []
    for doubled, norms, W in sifted:
        for row, n, w in zip(doubled, norms, W):
            q = HurwitzInt.from_doubled(*(int(v) for v in row))
            for p in _near_tie_candidates(tuple(w)):
                a = _finish(xi_f, exact, p, q)
                if _qualifies(a):
                    out.append(a)
    out.sort(
        key=lambda a: (
            a.q.norm_sq(),
            a.err,
            a.q.doubled,
            a.p.doubled,
        )
    )
    return out


def _near_tie_candidates(w, tie_eps=1e-9):
    """Nearest Hurwitz integer(s) to w: all candidates within tie_eps of
    the minimum distance, deterministic order."""
    import itertools

    cands = []
    for coset in (0.0, 0.5):
        axis = []
        for x in w:
            t = math.floor(x - coset + 0.5)
            alts = [t]
            frac = (x - coset) - t
            if abs(frac - 0.5) <= tie_eps:
                alts.append(t + 1)
            elif abs(frac + 0.5) <= tie_eps:
                alts.append(t - 1)
            axis.append([int(round(2 * (a + coset))) for a in alts])
        for combo in itertools.product(*axis):
            d2 = sum((x - v / 2.0) ** 2 for x, v in zip(w, combo))
            cands.append((d2, combo))
    dmin = min(c[0] for c in cands)
    keep = sorted(
        {combo for d2, combo in cands if d2 <= dmin + tie_eps * (1 + 2 * math.sqrt(dmin))}
    )
    return [HurwitzInt.from_doubled(*c) for c in keep]


def _qualifies(a):
    n = a.q.norm_sq()
    if a.err_exact is not None:
        return a.err_exact * n * n < 4
    return a.err * n < 2.0


def markov_constants(xi, Q_max, workers=1):
    """(c_Q, C_Q): the minimal badness err * norm_sq(q) over 1 <= |q| <= Q_max
    with p nearest, and its reciprocal (infinite when c_Q = 0)."""
    if not isinstance(Q_max, int) or Q_max < 1:
        raise ValidationError("Q_max must be an integer >= 1")
    xi_f, exact = _coerce_xi(xi)
    best, rep, norm = scan_min(
        xi_f, Q_max * Q_max, weight=lambda n: np.sqrt(n.astype(np.float64)), workers=workers
    )
    c = best
    if exact is not None and c < 1e-6:
        # the scan is floating point; a rational target can sit exactly on
        # a lattice value, in which case c is exactly zero
        q = HurwitzInt(*(int(v) for v in rep))
        w = tuple(left_mul_matrix(xi_f) @ np.array(q.to_floats()))
        p = nearest_hurwitz_float(w)
        if _exact_err_sq(exact, p, q) == 0:
            c = 0.0
    C = math.inf if c == 0.0 else 1.0 / c
    return c, C


# ---------------------------------------------------------------------------
# badly approximable construction
# ---------------------------------------------------------------------------

class BadConstructionConfig:
    """Parameters of the nested shrinking-ball construction.

    kappa >= 3 controls the shrink rate r_n = kappa^(-2n); theta = kappa^-2/2
    is the extra shrink before tiling; side(n) = 2^(5/4) * kappa^(-2(n+2)) is
    the tiling pitch at level n; K1 = pi^2/2^11 and K2 = pi^2/2^12 bound the
    survivor count from below via nu = kappa^8.
    """

    def __init__(self, kappa=3, depth=4, seed=0):
        if not isinstance(kappa, int) or kappa < 3:
            raise ValidationError("kappa must be an integer >= 3")
        if not isinstance(depth, int) or depth < 0:
            raise ValidationError("depth must be a non-negative integer")
        self.kappa = kappa
        self.depth = depth
        self.seed = seed
        self.theta = 0.5 * kappa ** -2
        self.K1 = math.pi ** 2 / 2 ** 11
        self.K2 = math.pi ** 2 / 2 ** 12
        self.nu = kappa ** 8
        if not (self.K1 > self.K2 > 0):
            raise InternalInvariantError("constant ordering broken")

    def radius(self, n):
        return float(self.kappa) ** (-2 * n)

    def side(self, n):
        return 2 ** 1.25 * float(self.kappa) ** (-2 * (n + 2))

    def as_record(self):
        return {
            "kappa": self.kappa,
            "depth": self.depth,
            "seed": self.seed,
            "theta": self.theta,
            "K1": self.K1,
            "K2": self.K2,
            "nu": self.nu,
        }


@dataclass
class LevelReport:
    level: int
    candidates: int
    discarded: int
    survivors: int
    center: tuple
    nearby_rational: Optional[tuple] = None


@dataclass
class BadConstructionResult:
    config: BadConstructionConfig
    point: RealQuaternion
    certificate: float
    levels: list = field(default_factory=list)


_START_CENTER = (0.5, 0.5, 0.5, 0.25)


def _candidate_offsets(kappa):
    """Integer grid offsets m with |m| * side <= theta*r_n - 2*theta*r_{n+1}.

    The ratio of the two lengths is level-independent, so one offset list
    serves every level; sorted for determinism.
    """
    t_max = kappa ** 2 / 2 ** 2.25 - 2 ** -1.25
    r = int(t_max)
    span = np.arange(-r, r + 1)
    g = np.stack(np.meshgrid(span, span, span, span, indexing="ij"), axis=-1).reshape(-1, 4)
    keep = (g * g).sum(axis=1) <= t_max * t_max
    g = g[keep]
    order = np.lexsort((g[:, 3], g[:, 2], g[:, 1], g[:, 0]))
    return g[order].astype(np.float64)


def _band_rationals_near(center, kappa, level, radius):
    """Distinct rational values p*q^-1 within ``radius`` of ``center`` with
    kappa^(level-1) <= |q| < kappa^level.  Returns float 4-vectors."""
    lo = max(1, math.ceil(kappa ** (2 * level - 2)))
    hi = kappa ** (2 * level) - 1
    if lo > hi:
        return []
    coords, norms = scan_reps(hi)
    start = int(np.searchsorted(norms, lo, side="left"))
    coords = coords[start:]
    norms = norms[start:]
    if len(coords) == 0:
        return []
    M = left_mul_matrix(center)
    W = coords.astype(np.float64) @ M.T
    d = np.sqrt(nearest_dist_sq(W))
    hits = np.flatnonzero(d <= radius * np.sqrt(norms) + 1e-12)
    vals = {}
    for i in hits:
        q = HurwitzInt(*(int(v) for v in coords[i]))
        p = nearest_hurwitz_float(tuple(W[i]))
        v = HurwitzRational(p, q).value()
        key = tuple(round(float(c), 9) for c in v.coords)
        vals.setdefault(key, tuple(float(c) for c in v.coords))
    return list(vals.values())


def run_bad_construction(cfg):
    """Run the construction and keep the per-level audit trail."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    offsets = _candidate_offsets(cfg.kappa)
    center = np.array(_START_CENTER)
    levels = []
    min_survivors = math.ceil(cfg.K1 * cfg.nu) - 1
    for n in range(cfg.depth):
        r_n = cfg.radius(n)
        r_next = cfg.radius(n + 1)
        cand = center + cfg.side(n) * offsets
        guard = _band_rationals_near(
            tuple(center), cfg.kappa, n, cfg.theta * r_n + 2 * cfg.theta * r_next
        )
        if len(guard) > 1:
            raise InternalInvariantError(
                f"level {n}: {len(guard)} rationals inside the shrunken ball, "
                "separation allows at most one"
            )
        alive = np.ones(len(cand), dtype=bool)
        if guard:
            close = np.linalg.norm(cand - np.array(guard[0]), axis=1)
            alive &= close > 2 * cfg.theta * r_next
        survivors = int(alive.sum())
        if survivors < max(1, min_survivors):
            raise InternalInvariantError(
                f"level {n}: {survivors} survivors < required {min_survivors}"
            )
        order = rng.permutation(len(cand))
        pick = next(int(i) for i in order if alive[i])
        new_center = cand[pick]
        if np.linalg.norm(new_center - center) + r_next > r_n + 1e-12:
            raise InternalInvariantError(f"level {n}: chosen ball escapes its parent")
        levels.append(
            LevelReport(
                level=n,
                candidates=len(cand),
                discarded=len(cand) - survivors,
                survivors=survivors,
                center=tuple(float(x) for x in new_center),
                nearby_rational=guard[0] if guard else None,
            )
        )
        center = new_center
    point = RealQuaternion(*(float(x) for x in center))
    if cfg.depth == 0:
        certificate = math.inf
    else:
        max_norm = cfg.kappa ** (2 * cfg.depth) - 1
        certificate, _, _ = scan_min(
            point.coords, max_norm, weight=lambda m: np.sqrt(m.astype(np.float64))
        )
    return BadConstructionResult(
        config=cfg, point=point, certificate=certificate, levels=levels
    )


def construct_badly_approximable(cfg):
    """The construction's public face: (final point, badness certificate)."""
    res = run_bad_construction(cfg)
    return res.point, res.certificate
