"""Metrical machinery: critical sums, the eta/rho/vpi schedule, coverage
measurements, and the cover-sum critical-exponent scan.

Numeric policy.  Series are summed in a fixed ascending order with
compensated accumulation (math.fsum over recorded segments), keeping the
relative error of partial sums far below 1e-12.  Divergence verdicts are
analytic for power and power-log families (integral test); anything else
is labelled "undetermined" at the computed scale, never extrapolated.

The eta schedule stores eta(m) = 1/i exactly as Fractions, so every
schedule inequality (spacing, dyadic doubling, the rho band) is decided in
exact rational arithmetic by comparing fourth powers; only block *sums* of
F involve floating point.  Greedy breakpoint scanning keeps its running
state, so a schedule built to M_max extends lazily when queried beyond it.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .errors import InternalInvariantError, ValidationError
from .hurwitz import HurwitzRational
from .lattice import binom_stderr, cover_mask, sample_delta, scan_reps, spawn_rngs

__all__ = [
    "ApproxFunction",
    "ComparisonReport",
    "CoverageReport",
    "DimensionFunction",
    "EmbeddingReport",
    "EtaSchedule",
    "ExponentScan",
    "PropertyCheck",
    "RhoReport",
    "SimultaneousResult",
    "SumSeries",
    "ball_rescale",
    "build_eta",
    "compare_sums",
    "cover_sum_exponent",
    "coverage_sweep",
    "critical_sum",
    "embedding_check",
    "euler_maclaurin_tail",
    "measure_estimate",
    "rho_properties",
    "simultaneous_dirichlet",
]

MC_SHARDS = 8


# ---------------------------------------------------------------------------
# function families
# ---------------------------------------------------------------------------

class ApproxFunction:
    """A positive approximation function evaluated as a step function,
    psi(x) = psi(floor(x)) for x >= 1."""

    def __init__(self, kind, v=None, w=None, scale=1.0, values=None, monotone=None):
        self.kind = kind
        self.v = v
        self.w = w
        self.scale = scale
        self.values = values
        self.monotone = monotone
        if kind == "power":
            if scale <= 0 or v < 0:
                raise ValidationError("power psi needs scale > 0 and v >= 0")
            self.monotone = True
        elif kind == "power_log":
            if scale <= 0 or v < 0 or w < 0:
                raise ValidationError("power_log psi needs scale > 0, v, w >= 0")
            if self._eval_int(1) < self._eval_int(2):
                raise ValidationError("power_log psi increases from 1 to 2")
            self.monotone = True
        elif kind == "table":
            if not values or any(t <= 0 for t in values):
                raise ValidationError("table psi needs positive values")
            if monotone is None:
                raise ValidationError("table psi must declare monotonicity")
            self.values = [float(t) for t in values]
        else:
            raise ValidationError(f"unknown psi kind {kind!r}")

    @classmethod
    def power(cls, v, scale=1.0):
        return cls("power", v=float(v), scale=float(scale))

    @classmethod
    def power_log(cls, v, w, scale=1.0):
        return cls("power_log", v=float(v), w=float(w), scale=float(scale))

    @classmethod
    def table(cls, values, monotone):
        return cls("table", values=values, monotone=monotone)

    @classmethod
    def constant(cls, c):
        return cls("power", v=0.0, scale=float(c))

    def _eval_int(self, m):
        if self.kind == "power":
            return self.scale * m ** -self.v
        if self.kind == "power_log":
            if m == 1:  # the log factor is dropped where it would vanish
                return self.scale
            return self.scale * m ** -self.v * math.log(m) ** -self.w
        if m > len(self.values):
            raise ValidationError(f"table psi has no value at m = {m}")
        return self.values[m - 1]

    def __call__(self, x):
        if x < 1:
            raise ValidationError("psi is defined on x >= 1")
        return self._eval_int(int(math.floor(x)))

    def array(self, xs):
        """Vectorised step evaluation for float or int arrays."""
        ms = np.floor(np.asarray(xs, dtype=np.float64)).astype(np.int64)
        if ms.min() < 1:
            raise ValidationError("psi is defined on x >= 1")
        if self.kind == "power":
            return self.scale * ms.astype(np.float64) ** -self.v
        if self.kind == "power_log":
            out = np.full(ms.shape, self.scale)
            big = ms >= 2
            mf = ms[big].astype(np.float64)
            out[big] = self.scale * mf ** -self.v * np.log(mf) ** -self.w
            return out
        if ms.max() > len(self.values):
            raise ValidationError(f"table psi has no value at m = {ms.max()}")
        return np.asarray(self.values, dtype=np.float64)[ms - 1]

    def describe(self):
        if self.kind == "power":
            if self.v == 0:
                return f"const({self.scale:g})"
            if self.scale == 1.0:
                return f"power(v={self.v:g})"
            return f"power(v={self.v:g},scale={self.scale:g})"
        if self.kind == "power_log":
            return f"power_log(v={self.v:g},w={self.w:g})"
        return f"table(n={len(self.values)})"


class DimensionFunction:
    """Increasing f with f(0+) = 0; the monotonicity of f(x)/x^4 is
    classified because it decides which comparison direction applies."""

    def __init__(self, kind, s=None, func=None, ratio_monotone=None):
        self.kind = kind
        self.s = s
        self.func = func
        if kind == "power":
            if not s > 0:
                raise ValidationError("power dimension function needs s > 0")
            if s < 4:
                self.ratio_monotone = "decreasing"
            elif s == 4:
                self.ratio_monotone = "constant"
            else:
                self.ratio_monotone = "increasing"
        elif kind == "general":
            xs = np.geomspace(1e-6, 1.0, 64)
            ys = np.array([func(x) for x in xs])
            if ys.min() <= 0 or np.any(np.diff(ys) < 0):
                raise ValidationError(
                    "general dimension function must be positive and increasing"
                )
            if func(1e-9) > 1e-3:
                raise ValidationError("dimension function must vanish at 0")
            ratios = ys / xs ** 4
            if np.all(np.diff(ratios) <= 0):
                self.ratio_monotone = "decreasing"
            elif np.all(np.diff(ratios) >= 0):
                self.ratio_monotone = "increasing"
            else:
                self.ratio_monotone = "mixed"
        else:
            raise ValidationError(f"unknown dimension function kind {kind!r}")

    @classmethod
    def power(cls, s):
        return cls("power", s=float(s))

    @classmethod
    def general(cls, func):
        return cls("general", func=func)

    def __call__(self, x):
        if x < 0:
            raise ValidationError("dimension functions live on [0, oo)")
        if self.kind == "power":
            return x ** self.s
        return self.func(x)

    def array(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        if self.kind == "power":
            return xs ** self.s
        return np.array([self.func(x) for x in xs])

    def describe(self):
        if self.kind == "power":
            return f"x^{self.s:g}"
        return "general"


def ball_rescale(center, r, f):
    """B^f = B(center, f(r)^{1/4}); with f(x) = x^4 the ball is unchanged."""
    if not r > 0:
        raise ValidationError("ball radius must be positive")
    if not isinstance(f, DimensionFunction):
        raise ValidationError("f must be a DimensionFunction")
    if f.kind == "power":
        radius = r ** (f.s / 4.0)
    else:
        radius = f(r) ** 0.25
    return tuple(float(c) for c in center), radius


# ---------------------------------------------------------------------------
# sum engine
# ---------------------------------------------------------------------------

@dataclass
class SumSeries:
    kind: str
    params: str
    M_max: int
    checkpoints: List[Tuple[int, float]]
    total: float
    verdict: str
    verdict_basis: str

    def as_records(self):
        return [
            {"M": M, "partial_sum": S, "kind": self.kind, "params": self.params}
            for M, S in self.checkpoints
        ]


def euler_maclaurin_tail(M, a):
    """sum_{m > M} m^-a for a > 1, with error far below the leading terms."""
    if not a > 1:
        raise ValidationError("tail requires exponent > 1")
    N = float(M + 1)
    return (
        N ** (1 - a) / (a - 1)
        + N ** -a / 2
        + a * N ** (-a - 1) / 12
        - a * (a + 1) * (a + 2) * N ** (-a - 3) / 720
    )


def _series_checkpoints(terms, M_values):
    """Partial sums at the requested M values via exact-per-segment fsum."""
    out = []
    segments = []
    prev = 0
    for M in M_values:
        segments.append(math.fsum(terms[prev:M]))
        out.append((M, math.fsum(segments)))
        prev = M
    return out


def _power_family_verdict(kind, psi, f):
    """(verdict, basis) by the integral test, when analytically decidable."""
    if psi.kind == "table":
        return None
    s = None
    if kind == "lebesgue":
        s = 4.0
    elif kind == "simultaneous":
        s = 4.0
    elif kind == "hausdorff":
        if f.kind != "power":
            return None
        s = f.s
    m_pow = 4 if kind == "simultaneous" else 7
    e = m_pow - psi.v * s
    log_pow = (psi.w * s) if psi.kind == "power_log" else 0.0
    if e < -1 or (e == -1 and log_pow > 1):
        return ("converges", "analytic")
    return ("diverges", "analytic")


def critical_sum(kind, psi, f=None, M_max=100_000, schedule=None, kappa=2):
    """Partial sums of one critical series in fixed ascending order.

    kinds: "lebesgue"     sum psi(m)^4 m^7
           "hausdorff"    sum f(psi(m)) m^7          (f required)
           "simultaneous" sum psi(m)^4 m^4
           "ubiquity"     sum_r f(psi(kappa^r)) / rho(kappa^r)^4
                          (f and schedule required)
    """
    if not isinstance(psi, ApproxFunction):
        raise ValidationError("psi must be an ApproxFunction")
    if M_max < 1:
        raise ValidationError("M_max must be >= 1")
    if kind in ("hausdorff", "ubiquity") and not isinstance(f, DimensionFunction):
        raise ValidationError(f"{kind} sums need a dimension function")
    if kind == "ubiquity":
        if schedule is None:
            raise ValidationError("ubiquity sums need an eta schedule")
        if not isinstance(kappa, int) or kappa < 2:
            raise ValidationError("kappa must be an integer >= 2")
        terms = []
        marks = []
        r = 0
        while kappa ** r <= M_max:
            m = kappa ** r
            terms.append(f(psi(m)) / float(schedule.rho_pow4(m)))
            marks.append(r + 1)
            r += 1
        checkpoints = [(r, math.fsum(terms[:r])) for r in marks]
        return SumSeries(
            kind="ubiquity",
            params=f"psi={psi.describe()},f={f.describe()},kappa={kappa}",
            M_max=M_max,
            checkpoints=checkpoints,
            total=checkpoints[-1][1],
            verdict="undetermined",
            verdict_basis=f"table at M_max={M_max}",
        )
    ms = np.arange(1, M_max + 1, dtype=np.float64)
    pv = psi.array(ms)
    if kind == "lebesgue":
        terms = pv ** 4 * ms ** 7
        params = f"psi={psi.describe()}"
    elif kind == "hausdorff":
        terms = f.array(pv) * ms ** 7
        params = f"psi={psi.describe()},f={f.describe()}"
    elif kind == "simultaneous":
        terms = pv ** 4 * ms ** 4
        params = f"psi={psi.describe()}"
    else:
        raise ValidationError(f"unknown sum kind {kind!r}")
    if terms.min() <= 0:
        raise ValidationError("series terms must be positive")
    decades = [10 ** k for k in range(1, 20) if 10 ** k < M_max]
    marks = [M for M in decades if M <= M_max] + [M_max]
    checkpoints = _series_checkpoints(terms.tolist(), marks)
    verdict = _power_family_verdict(kind, psi, f)
    if verdict is None:
        verdict = ("undetermined", f"table at M_max={M_max}")
    return SumSeries(
        kind=kind,
        params=params,
        M_max=M_max,
        checkpoints=checkpoints,
        total=checkpoints[-1][1],
        verdict=verdict[0],
        verdict_basis=verdict[1],
    )


# ---------------------------------------------------------------------------
# the eta / rho / vpi schedule
# ---------------------------------------------------------------------------

class _Kahan:
    __slots__ = ("total", "c")

    def __init__(self, total=0.0, c=0.0):
        self.total = total
        self.c = c

    def add(self, x):
        y = x - self.c
        t = self.total + y
        self.c = (t - self.total) - y
        self.total = t


class EtaSchedule:
    """eta(m) = 1/i on [m_i, m_{i+1}), with derived rho and vpi.

    Exact accessors work with fourth powers so every property check stays
    in rational arithmetic: rho_pow4(m) = 16/(eta(m) m^8) and
    vpi_pow4(m) = eta(m) m^4.  When built from a running F the greedy scan
    state is retained, so eta(m) beyond the build range extends the
    breakpoint list on demand instead of guessing.
    """

    def __init__(self, breakpoints, F=None, scanned_to=None, acc=None, M_max=None):
        bp = [int(b) for b in breakpoints]
        if not bp or bp[0] != 1 or any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValidationError("breakpoints must start at 1 and increase")
        self.breakpoints = bp
        self.F = F
        self.M_max = M_max
        self._scan_m = scanned_to if scanned_to is not None else bp[-1]
        self._acc = acc if acc is not None else _Kahan()

    def _extend(self, m):
        while self._scan_m <= m:
            t = self._scan_m
            self._acc.add(float(self.F(t)))
            self._scan_m += 1
            if self._scan_m >= 2 * self.breakpoints[-1] and self._acc.total > 1.0:
                self.breakpoints.append(self._scan_m)
                self._acc = _Kahan()

    def block_index(self, m):
        if m < 1:
            raise ValidationError("eta is defined on m >= 1")
        if self.F is not None and m >= self._scan_m:
            self._extend(m)
        return bisect_right(self.breakpoints, m)

    def eta(self, m):
        return Fraction(1, self.block_index(m))

    def rho(self, m):
        return 2.0 / (float(self.eta(m)) ** 0.25 * m * m)

    def rho_pow4(self, m):
        return Fraction(16 * self.block_index(m), m ** 8)

    def vpi(self, m):
        return float(self.eta(m)) ** 0.25 * m

    def vpi_pow4(self, m):
        return self.eta(m) * m ** 4

    def blocks(self, upto=None):
        """Completed blocks [m_i, m_{i+1}) with m_{i+1} <= upto."""
        hi = upto if upto is not None else self.breakpoints[-1]
        return [
            (a, b)
            for a, b in zip(self.breakpoints, self.breakpoints[1:])
            if b <= hi
        ]

    def invariant_report(self):
        """(name, ok, witness) triples for every schedule invariant."""
        bp = self.breakpoints
        checks = []
        bad = [(a, b) for a, b in zip(bp, bp[1:]) if b < 2 * a]
        checks.append(
            ("spacing m_{i+1} >= 2 m_i", not bad, bad[:3] or None)
        )
        r_top = (bp[-1] - 1).bit_length() - 1 if bp[-1] > 1 else 0
        dyadic_bad = [
            r
            for r in range(max(0, r_top))
            if self.eta(2 ** r) > 2 * self.eta(2 ** (r + 1))
        ]
        checks.append(
            ("eta(2^r) <= 2 eta(2^{r+1})", not dyadic_bad, dyadic_bad[:3] or None)
        )
        non_inc = all(
            self.eta(a) >= self.eta(b) for a, b in zip(bp, bp[1:])
        )
        checks.append(("eta non-increasing", non_inc, None))
        if self.F is not None:
            sums = [
                math.fsum(float(self.F(m)) for m in range(a, b))
                for a, b in self.blocks()
            ]
            low = [
                (i + 1, s) for i, s in enumerate(sums) if not s > 1.0 - 1e-12
            ]
            checks.append(("block sums > 1", not low, low[:3] or None))
        return checks


def build_eta(F, M_max):
    """Greedy schedule from a divergent series: each breakpoint is the
    smallest m' >= 2 m_i whose block sum exceeds 1."""
    if M_max < 4:
        raise ValidationError("M_max too small to build a schedule")
    breakpoints = [1]
    acc = _Kahan()
    m = 1
    while m <= M_max:
        val = float(F(m))
        if not val > 0:
            raise ValidationError(f"F({m}) is not positive")
        acc.add(val)
        m += 1
        if m >= 2 * breakpoints[-1] and acc.total > 1.0:
            breakpoints.append(m)
            acc = _Kahan()
    if len(breakpoints) < 3:
        raise ValidationError(
            "fewer than 2 complete blocks: cannot certify divergence of F "
            f"at scale M_max={M_max}"
        )
    return EtaSchedule(breakpoints, F=F, scanned_to=m, acc=acc, M_max=M_max)


# ---------------------------------------------------------------------------
# rho property transcript
# ---------------------------------------------------------------------------

@dataclass
class PropertyCheck:
    name: str
    ok: bool
    witness: Optional[str] = None


@dataclass
class RhoReport:
    R_max: int
    samples: List[int]
    checks: List[PropertyCheck]

    def all_ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]


def rho_properties(schedule, R_max=19):
    """Exact finite-range transcript of the four rho facts.

    1. rho decays along dyadic samples, at the geometric rate the band
       implies; 2. rho(m)^-1 / m^2 equals eta(m)^{1/4}/2 and shrinks;
    3. rho(m') <= 2^{1/4} rho(m) for all sampled m <= m'; 4. the dyadic
    band rho(2^r)/4 <= rho(2^{r+1}) <= 2^{1/4} rho(2^r)/4.  All are decided
    on fourth powers in exact rational arithmetic; failures carry witnesses.
    """
    if R_max < 1:
        raise ValidationError("R_max must be >= 1")
    top = 2 ** R_max
    schedule.eta(top)  # force any lazy extension before sampling
    bp = [b for b in schedule.breakpoints if 1 < b <= top]
    samples = {2 ** r for r in range(R_max + 1)}
    samples.update(bp)
    samples.update(b - 1 for b in bp if b - 1 >= 1)
    if schedule.M_max is not None and schedule.M_max <= top:
        samples.add(schedule.M_max)
    samples = sorted(samples)
    checks = []

    # 1: strict dyadic decay at the banded geometric rate
    wit = None
    for r in range(R_max):
        if not schedule.rho_pow4(2 ** (r + 1)) < schedule.rho_pow4(2 ** r):
            wit = f"rho not strictly smaller from 2^{r} to 2^{r + 1}"
            break
    if wit is None:
        rate = Fraction(2, 256) ** R_max * schedule.rho_pow4(1)
        if not schedule.rho_pow4(top) <= rate:
            wit = f"rho(2^{R_max})^4 exceeds the banded rate bound"
    checks.append(PropertyCheck("dyadic decay of rho", wit is None, wit))

    # 2: identity rho(m)^-4 m^-8 = eta(m)/16, and the quarter-power shrinks
    wit = None
    for m in samples:
        if schedule.rho_pow4(m) * schedule.eta(m) * m ** 8 != 16:
            wit = f"identity fails at m={m}"
            break
    if wit is None:
        etas = [schedule.eta(m) for m in samples]
        if any(a < b for a, b in zip(etas, etas[1:])):
            wit = "eta increases along samples"
        elif not schedule.eta(top) <= Fraction(1, 2) * schedule.eta(1):
            wit = f"eta^(1/4)/2 has not shrunk by 2^{R_max} (eta constant?)"
    checks.append(
        PropertyCheck("rho^-1/m^2 = eta^{1/4}/2 -> 0", wit is None, wit)
    )

    # 3: rho(m') <= 2^{1/4} rho(m) for sampled m <= m'
    wit = None
    for i, m in enumerate(samples):
        lhs = schedule.eta(m) * m ** 8
        for mp in samples[i:]:
            if lhs > 2 * schedule.eta(mp) * mp ** 8:
                wit = f"rho({mp}) > 2^(1/4) rho({m})"
                break
        if wit:
            break
    checks.append(PropertyCheck("quarter-power growth bound", wit is None, wit))

    # 4: dyadic band rho(2^r)/4 <= rho(2^{r+1}) <= 2^{1/4} rho(2^r)/4
    wit = None
    for r in range(R_max):
        lo = schedule.eta(2 ** r)
        hi = schedule.eta(2 ** (r + 1))
        if hi > lo:
            wit = f"band lower bound fails at r={r}"
            break
        if lo > 2 * hi:
            wit = f"band upper bound fails at r={r}"
            break
    checks.append(PropertyCheck("dyadic band", wit is None, wit))
    return RhoReport(R_max=R_max, samples=samples, checks=checks)


# ---------------------------------------------------------------------------
# standard vs dyadic ubiquity sums
# ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    standard: SumSeries
    dyadic: SumSeries
    implied_constant: float
    identity_max_rel_err: float
    standard_at_breakpoints: List[Tuple[int, float]]

    def diverging_together(self):
        return (
            self.standard.checkpoints[-1][1] > self.standard.checkpoints[0][1]
            and self.dyadic.checkpoints[-1][1] > self.dyadic.checkpoints[0][1]
        )


def compare_sums(psi, f, schedule, M_max=100_000):
    """Side by side: sum f(psi(m)) m^7 eta(m) and its dyadic counterpart
    sum_r f(psi(2^r))/rho(2^r)^4, plus the exact term rewrite check
    f(psi(m)) m^7 eta(m) = 16 (1/m) f(psi(m)) / rho(m)^4."""
    if not isinstance(f, DimensionFunction):
        raise ValidationError("compare_sums needs a dimension function")
    schedule.eta(M_max)
    blocks = schedule.blocks(upto=M_max)
    if not blocks:
        raise ValidationError("schedule has no complete block below M_max")
    for a, b in blocks:
        ms = np.arange(a, b, dtype=np.float64)
        s = math.fsum((f.array(psi.array(ms)) * ms ** 7).tolist())
        if not s > 1.0 - 1e-9:
            raise ValidationError(
                f"schedule mismatch: block [{a},{b}) sums to {s:.6g} <= 1 "
                "for F(m) = f(psi(m)) m^7"
            )
    ms = np.arange(1, M_max + 1, dtype=np.float64)
    base = f.array(psi.array(ms)) * ms ** 7
    etas = np.empty(M_max, dtype=np.float64)
    bp = schedule.breakpoints
    for i, a in enumerate(bp):
        b = bp[i + 1] if i + 1 < len(bp) else M_max + 1
        if a > M_max:
            break
        etas[a - 1:min(b, M_max + 1) - 1] = 1.0 / (i + 1)
    terms = base * etas
    decades = [10 ** k for k in range(1, 20) if 10 ** k < M_max]
    marks = decades + [M_max]
    standard = SumSeries(
        kind="eta_weighted",
        params=f"psi={psi.describe()},f={f.describe()}",
        M_max=M_max,
        checkpoints=_series_checkpoints(terms.tolist(), marks),
        total=float(math.fsum(terms.tolist())),
        verdict="undetermined",
        verdict_basis=f"table at M_max={M_max}",
    )
    dyadic = critical_sum("ubiquity", psi, f, M_max, schedule=schedule)
    # exact rewrite, evaluated both ways in floats on the sample set
    rel = 0.0
    for m in sorted({2 ** r for r in range((M_max).bit_length() - 1)} | set(
        b for b in bp if b <= M_max
    )):
        lhs = f(psi(m)) * m ** 7 * float(schedule.eta(m))
        rhs = 16.0 * f(psi(m)) / float(schedule.rho_pow4(m)) / m
        if lhs != rhs:
            rel = max(rel, abs(lhs - rhs) / max(lhs, rhs))
    # constant implied by "dyadic >> standard" over aligned prefixes:
    # dyadic partial through r vs standard partial through 2^r
    ratios = []
    std_at = dict(
        (M, S)
        for M, S in _series_checkpoints(
            terms.tolist(), [min(2 ** r, M_max) for r, _ in enumerate(dyadic.checkpoints)]
        )
    )
    for (r, dy_S) in dyadic.checkpoints:
        M = min(2 ** (r - 1), M_max)
        if M in std_at and std_at[M] > 0:
            ratios.append(dy_S / std_at[M])
    at_bp = _series_checkpoints(terms.tolist(), [b - 1 for _, b in blocks])
    return ComparisonReport(
        standard=standard,
        dyadic=dyadic,
        implied_constant=min(ratios) if ratios else float("inf"),
        identity_max_rel_err=rel,
        standard_at_breakpoints=at_bp,
    )


# ---------------------------------------------------------------------------
# Monte Carlo measure of the truncated limsup set
# ---------------------------------------------------------------------------

@dataclass
class CoverageReport:
    psi: str
    N_min: int
    Q_max: int
    fraction: float
    stderr: float
    samples: int
    seed: int
    shards: int

    def as_record(self):
        return {
            "psi": self.psi,
            "N_min": self.N_min,
            "Q_max": self.Q_max,
            "fraction": self.fraction,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }


def _coverage_counts(psi, N_min, Q_grid, samples, seed):
    """Shared engine: one ascending record-first pass at max(Q_grid)."""
    qs = sorted(Q_grid)
    if any(int(Q) != Q for Q in qs):
        raise ValidationError("denominator bounds must be integers")
    qs = [int(Q) for Q in qs]
    if int(N_min) != N_min or not 1 <= N_min <= qs[0]:
        raise ValidationError("need integer 1 <= N_min <= every Q_max")
    N_min = int(N_min)
    hi = qs[-1] ** 2
    coords, norms = scan_reps(hi)
    lo_ix = int(np.searchsorted(norms, N_min * N_min, side="left"))
    coords, norms = coords[lo_ix:], norms[lo_ix:]
    if len(norms) == 0:
        raise ValidationError("no denominators in range")
    sq = np.sqrt(norms.astype(np.float64))
    thresholds = psi.array(sq) * sq
    hits = {Q: 0 for Q in qs}
    per = [samples // MC_SHARDS] * MC_SHARDS
    per[-1] += samples - sum(per)
    for rng, k in zip(spawn_rngs(seed, MC_SHARDS), per):
        pts = sample_delta(rng, k)
        _, first = cover_mask(
            pts, coords, norms, thresholds, record_first=True
        )
        got = first[first > 0]
        for Q in qs:
            hits[Q] += int((got <= Q * Q).sum())
    return hits


def measure_estimate(psi, N_min, Q_max, samples=100_000, seed=0):
    """Fraction of Delta within psi(|q|) of a resonant point of some q with
    N_min <= |q| <= Q_max, by uniform sampling; nearest points are found by
    rounding xi*q over the whole order, so no lattice is materialised."""
    if samples <= 0:
        raise ValidationError("samples must be positive")
    hits = _coverage_counts(psi, N_min, [Q_max], samples, seed)[Q_max]
    return CoverageReport(
        psi=psi.describe(),
        N_min=N_min,
        Q_max=Q_max,
        fraction=hits / samples,
        stderr=binom_stderr(hits, samples),
        samples=samples,
        seed=seed,
        shards=MC_SHARDS,
    )


def coverage_sweep(psi, N_min, Q_grid, samples=100_000, seed=0):
    """measure_estimate at several Q_max from one scan: identical samples,
    so the reported fractions are exactly nested (non-decreasing in Q)."""
    if samples <= 0:
        raise ValidationError("samples must be positive")
    hits = _coverage_counts(psi, N_min, list(Q_grid), samples, seed)
    return [
        CoverageReport(
            psi=psi.describe(),
            N_min=int(N_min),
            Q_max=int(Q),
            fraction=hits[Q] / samples,
            stderr=binom_stderr(hits[Q], samples),
            samples=samples,
            seed=seed,
            shards=MC_SHARDS,
        )
        for Q in sorted(Q_grid)
    ]


# ---------------------------------------------------------------------------
# cover-sum critical exponent (desk-scale Jarnik-Besicovitch)
# ---------------------------------------------------------------------------

@dataclass
class ExponentScan:
    v: float
    M_max: int
    N_grid: Tuple[int, int]
    rows: List[dict]
    s_star: Optional[float]
    s_analytic: Optional[float]
    dimension: float
    saturated: bool = False

    def as_records(self):
        out = []
        for row in self.rows:
            for N in self.N_grid:
                out.append(
                    {
                        "v": self.v,
                        "s": row["s"],
                        "N": N,
                        "tail_value": row[f"T{N}"],
                        "verdict": row["verdict"],
                    }
                )
        return out


def cover_sum_exponent(v, s_grid=None, N_grid=(10, 100), M_max=100_000):
    """Scan s for the transition where the natural cover tail
    T(N, s) = sum_{m=N}^{M_max} m^7 (2 m^-v)^s starts vanishing in N.

    A tail that vanishes as N grows behaves like sum m^{7-vs} with
    7 - vs < -1; the classifier compares the N-decay of T against the
    exactly-critical harmonic decay, so the transition lands at s = 8/v.
    The cruder "drops 10x from N=10 to N=100" reading is reported per row
    as a diagnostic (it transitions near 9/v, not 8/v).
    """
    v = float(v)
    if v <= 2:
        return ExponentScan(
            v=v,
            M_max=M_max,
            N_grid=tuple(N_grid),
            rows=[],
            s_star=None,
            s_analytic=None,
            dimension=4.0,
            saturated=True,
        )
    if len(N_grid) != 2 or not N_grid[0] < N_grid[1] < M_max:
        raise ValidationError("N_grid must be (N_small, N_big) below M_max")
    if s_grid is None:
        s_grid = [round(0.05 * k, 10) for k in range(1, 81)]
    s_grid = sorted(float(s) for s in s_grid)
    if s_grid[0] <= 0:
        raise ValidationError("s must be positive")
    N1, N2 = N_grid
    m1 = np.arange(N1, M_max + 1, dtype=np.float64)
    m2 = np.arange(N2, M_max + 1, dtype=np.float64)

    def tail_ratio(e):
        return float(np.sum(m1 ** e)) / float(np.sum(m2 ** e))

    # decay of the exactly-critical tail (exponent -1): the classifier line.
    # Computed through the same expression as the scan, so a grid point that
    # lands exactly on the critical exponent compares equal, never above.
    theta = tail_ratio(-1.0)
    rows = []
    for s in s_grid:
        e = 7.0 - v * s
        ratio = tail_ratio(e)
        T1 = 2.0 ** s * float(np.sum(m1 ** e))
        T2 = 2.0 ** s * float(np.sum(m2 ** e))
        super_ = ratio > theta
        rows.append(
            {
                "s": s,
                f"T{N1}": T1,
                f"T{N2}": T2,
                "ratio": ratio,
                "verdict": "supercritical" if super_ else "subcritical",
                "tail_drop_10x": ratio >= 10.0,
            }
        )
    s_star = None
    for prev, cur in zip(rows, rows[1:]):
        if prev["verdict"] == "subcritical" and cur["verdict"] == "supercritical":
            s_star = (prev["s"] + cur["s"]) / 2.0
            break
    if s_star is None:
        raise InternalInvariantError(
            f"no subcritical/supercritical transition on the s grid for v={v}"
        )
    return ExponentScan(
        v=v,
        M_max=M_max,
        N_grid=(N1, N2),
        rows=rows,
        s_star=s_star,
        s_analytic=8.0 / v,
        dimension=s_star,
    )


# ---------------------------------------------------------------------------
# simultaneous approximation in R^4 and the embedding check
# ---------------------------------------------------------------------------

@dataclass
class SimultaneousResult:
    p: Tuple[int, int, int, int]
    q: int
    error: float
    bound: float
    qualifying: int

    def as_record(self):
        return {
            "p": list(self.p),
            "q": self.q,
            "error": self.error,
            "bound": self.bound,
        }


def simultaneous_dirichlet(alpha, N):
    """Best simultaneous rational approximation with the Dirichlet-box
    guarantee: q <= N, max_m |alpha_m - p_m/q| < 1/(q N^{1/4}).

    Among the denominators meeting the guarantee, returns the one with the
    smallest error (ties to the smallest q).
    """
    a = np.asarray([float(x) for x in alpha], dtype=np.float64)
    if a.shape != (4,) or not np.isfinite(a).all():
        raise ValidationError("alpha must be four finite reals")
    if not isinstance(N, int) or N < 2:
        raise ValidationError("N must be an integer >= 2")
    qs = np.arange(1, N + 1, dtype=np.float64)
    prod = qs[:, None] * a[None, :]
    frac = np.abs(prod - np.rint(prod))
    e = frac.max(axis=1)
    ok = np.flatnonzero(e < N ** -0.25)
    if len(ok) == 0:
        raise InternalInvariantError(
            f"no denominator q <= {N} meets the Dirichlet box bound"
        )
    errors = e[ok] / qs[ok]
    best = ok[int(np.argmin(errors))]  # first minimum = smallest q on ties
    q = int(best) + 1
    p = tuple(int(t) for t in np.rint(q * a))
    return SimultaneousResult(
        p=p,
        q=q,
        error=float(e[best] / q),
        bound=1.0 / (q * N ** 0.25),
        qualifying=len(ok),
    )


@dataclass
class EmbeddingReport:
    numerators: Tuple[int, int, int, int]
    denominator: int
    sup_error: float
    bound: float
    exponent: float

    def ok(self):
        return self.sup_error < self.bound


def embedding_check(xi, approximant, v):
    """Map a quaternionic approximant to a simultaneous one.

    The value of p q^-1 has coordinates Y_i/(2n) with Y = doubled(p qbar)
    and n = norm_sq(q) (checked exactly), so |xi - p q^-1| < n^{-v/2} hands
    the coordinate vector of xi a simultaneous approximation with
    denominator 2n and sup error below n^{-v/2}: exponent v/2 in n.
    """
    if not v > 0:
        raise ValidationError("v must be positive")
    p, q = approximant.p, approximant.q
    n = q.norm_sq()
    Y = (p * q.conjugate()).doubled
    exact = HurwitzRational(p, q).value().coords
    for num, val in zip(Y, exact):
        if Fraction(num, 2 * n) != val:
            raise InternalInvariantError(
                "value coordinates disagree with the p*qbar/(2n) identity"
            )
    xf = [float(x) for x in xi]
    sup_error = max(abs(x - num / (2 * n)) for x, num in zip(xf, Y))
    return EmbeddingReport(
        numerators=tuple(Y),
        denominator=n,
        sup_error=sup_error,
        bound=n ** (-v / 2.0),
        exponent=v / 2.0,
    )
