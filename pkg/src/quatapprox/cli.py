"""Command line driver: one subcommand per experiment, seeded and recorded.

Every run resolves its parameters with the precedence

    command line flag  >  QUATAPPROX_<KEY> environment variable
                       >  --config file entry  >  built-in default,

writes its tables (CSV with 17-significant-digit numbers, or JSON with
--format json), and drops a manifest.json holding the fully resolved
config, master seed, package versions and wall time.  Re-running the same
resolved config reproduces the data files byte for byte; only the
manifest's timestamp differs.

Exit codes: 0 success, 1 validation error, 2 a checked property failed,
3 an internal invariant broke (a bug in this package).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .approx import (
    BadConstructionConfig,
    dirichlet_search,
    good_approximants,
    markov_constants,
    run_bad_construction,
)
from .errors import InternalInvariantError, PropertyFailure, ValidationError
from .hurwitz import (
    HurwitzInt,
    div_rem_right,
    enumerate_by_norm,
    exact_right_div,
    gcd_right,
    lipschitz_count_formula,
)
from .io import (
    ENV_PREFIX,
    Emitter,
    coerce_choice,
    coerce_dim,
    coerce_float,
    coerce_int,
    coerce_int_list,
    coerce_psi,
    coerce_quat,
    coerce_reals4,
    coerce_str,
    coerce_u64,
    load_config,
    psi_label,
    write_manifest,
)
from .lattice import class_representatives_range, spawn_rngs
from .metrical import (
    build_eta,
    cover_sum_exponent,
    coverage_sweep,
    critical_sum,
    rho_properties,
    simultaneous_dirichlet,
)
from .resonant import count_resonant, near_resonant_volume, ubiquity_check

REQUIRED = object()
OPTIONAL = object()

# Flags shared by every subcommand.
COMMON_SCHEMA = [
    ("seed", coerce_u64, "0", "master RNG seed (64-bit unsigned)"),
    ("out", coerce_str, ".", "output directory"),
    ("format", coerce_choice("csv", "json"), "csv", "table format"),
    ("workers", coerce_int, "1", "worker pool size"),
]


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _random_hurwitz(rng, span):
    """A uniform random element with doubled coordinates in one parity."""
    half = int(rng.integers(2))
    doubled = 2 * rng.integers(-span, span + 1, size=4) + half
    return HurwitzInt.from_doubled(*(int(v) for v in doubled))


def _cmd_arith_check(p, em):
    """Algebraic self-test: ring laws, norms, division, gcd, counting."""
    rng = spawn_rngs(p["seed"], 1)[0]
    trials, span = p["trials"], p["span"]
    rows = []

    def suite(name, cases, fail):
        rows.append({"suite": name, "cases": cases, "failures": fail})

    fails = 0
    for _ in range(trials):
        a, b, c = (_random_hurwitz(rng, span) for _ in range(3))
        ok = (a * b) * c == a * (b * c)
        ok = ok and a * (b + c) == a * b + a * c
        ok = ok and (b + c) * a == b * a + c * a
        ok = ok and (a * b).conjugate() == b.conjugate() * a.conjugate()
        fails += not ok
    suite("ring laws", trials, fails)

    fails = 0
    for _ in range(trials):
        a, b = _random_hurwitz(rng, span), _random_hurwitz(rng, span)
        fails += (a * b).norm_sq() != a.norm_sq() * b.norm_sq()
    suite("norm multiplicativity", trials, fails)

    fails = done = 0
    while done < trials:
        a, q = _random_hurwitz(rng, span), _random_hurwitz(rng, span)
        if q.is_zero():
            continue
        done += 1
        quo, rem = div_rem_right(a, q)
        fails += not (quo * q + rem == a and rem.norm_sq() < q.norm_sq())
    suite("division with remainder", trials, fails)

    fails = done = 0
    while done < trials:
        a, b = _random_hurwitz(rng, span), _random_hurwitz(rng, span)
        if a.is_zero() and b.is_zero():
            continue
        done += 1
        g = gcd_right(a, b)
        try:
            if not a.is_zero():
                exact_right_div(a, g)
            if not b.is_zero():
                exact_right_div(b, g)
        except ValidationError:
            fails += 1
    suite("gcd divides", trials, fails)

    fails = 0
    for m in range(1, p["count_to"] + 1):
        lip = sum(1 for x in enumerate_by_norm(m) if x.is_lipschitz())
        fails += lip != lipschitz_count_formula(m)
    suite("Lipschitz counting formula", p["count_to"], fails)

    em.table("arith_check", ["suite", "cases", "failures"], rows)
    bad = [r for r in rows if r["failures"]]
    for r in bad:
        print(
            f"arith-check: {r['suite']}: {r['failures']}/{r['cases']} failed",
            file=sys.stderr,
        )
    return 2 if bad else 0


def _cmd_dirichlet(p, em):
    a = dirichlet_search(p["xi"], p["n"], workers=p["workers"])
    n = a.q.norm_sq()
    row = a.as_record()
    row["quality"] = a.quality()
    row["bound"] = 2.0 / (n ** 0.5 * p["n"])
    em.table(
        "dirichlet",
        ["p", "q", "err", "norm_sq_q", "quality", "bound"],
        [row],
    )
    return 0


def _cmd_approximants(p, em):
    rows = []
    for a in good_approximants(p["xi"], p["q_max"], workers=p["workers"]):
        row = a.as_record()
        row["quality"] = a.quality()
        rows.append(row)
    em.table(
        "approximants", ["p", "q", "err", "norm_sq_q", "quality"], rows
    )
    return 0


def _cmd_constants(p, em):
    c, big_c = markov_constants(p["xi"], p["q_max"], workers=p["workers"])
    em.table(
        "constants",
        ["Q_max", "c_Q", "C_Q"],
        [{"Q_max": p["q_max"], "c_Q": c, "C_Q": big_c}],
    )
    return 0


def _cmd_bad_construct(p, em):
    cfg = BadConstructionConfig(
        kappa=p["kappa"], depth=p["depth"], seed=p["seed"]
    )
    res = run_bad_construction(cfg)
    rows = [
        {
            "level": lv.level,
            "candidates": lv.candidates,
            "discarded": lv.discarded,
            "survivors": lv.survivors,
            "c0": lv.center[0],
            "c1": lv.center[1],
            "c2": lv.center[2],
            "c3": lv.center[3],
        }
        for lv in res.levels
    ]
    em.table(
        "bad_levels",
        ["level", "candidates", "discarded", "survivors", "c0", "c1", "c2", "c3"],
        rows,
    )
    em.report(
        "bad_construct",
        {
            "config": cfg.as_record(),
            "point": list(res.point.coords),
            "certificate": res.certificate,
        },
    )
    if not res.certificate > 0:
        print(
            f"bad-construct: certificate {res.certificate} is not positive",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_resonant_count(p, em):
    if p["q"] is not None:
        reps = [p["q"]]
    elif p["lo"] is not None and p["hi"] is not None:
        reps = class_representatives_range(p["lo"], p["hi"])
    else:
        raise ValidationError(
            "resonant-count needs either q or both lo and hi"
        )
    rows = []
    worst = 0.0
    for q in reps:
        n = q.norm_sq()
        count = count_resonant(q)
        dev = abs(count - n * n)
        ratio = dev / n ** 1.5
        worst = max(worst, ratio)
        rows.append(
            {
                "q": str(q),
                "norm_sq": n,
                "count": count,
                "predicted": n * n,
                "deviation": dev,
                "dev_over_norm_3_2": ratio,
            }
        )
    em.table(
        "resonant_count",
        ["q", "norm_sq", "count", "predicted", "deviation", "dev_over_norm_3_2"],
        rows,
    )
    em.report("resonant_summary", {"classes": len(rows), "fitted_C": worst})
    return 0


def _cmd_near_volume(p, em):
    est = near_resonant_volume(
        p["q"], p["epsilon"], samples=p["samples"], seed=p["seed"]
    )
    em.table(
        "near_volume",
        [
            "q", "epsilon", "measure", "stderr", "samples", "seed",
            "shards", "analytic_clipped",
        ],
        [est.as_record()],
    )
    return 0


def _cmd_ubiquity(p, em):
    n = p["n"]
    rho = p["rho"] if p["rho"] is not None else 2.0 / (n * n)
    rep = ubiquity_check(
        tuple(float(x) for x in p["center"]),
        p["radius"],
        n,
        rho,
        samples=p["samples"],
        seed=p["seed"],
        vpi_value=p["vpi"],
        workers=p["workers"],
    )
    row = rep.as_record()
    row["center"] = " ".join("%.17g" % c for c in rep.center)
    em.table(
        "ubiquity",
        [
            "center", "radius", "N", "rho", "fraction", "stderr",
            "samples", "seed", "shards", "EN_estimate", "vpi",
        ],
        [row],
    )
    return 0


def _cmd_sums(p, em):
    schedule = None
    if p["kind"] == "ubiquity":
        f, psi = p["f"], p["psi"]
        if f is None:
            raise ValidationError("ubiquity sums need a dimension function f")
        schedule = build_eta(lambda m: f(psi(m)) * m ** 7, p["m_max"])
    series = critical_sum(
        p["kind"],
        p["psi"],
        f=p["f"],
        M_max=p["m_max"],
        schedule=schedule,
        kappa=p["kappa"],
    )
    em.table("sums", ["M", "partial_sum", "kind", "params"], series.as_records())
    em.report(
        "sums_summary",
        {
            "kind": series.kind,
            "params": series.params,
            "M_max": series.M_max,
            "total": series.total,
            "verdict": series.verdict,
            "verdict_basis": series.verdict_basis,
        },
    )
    return 0


def _cmd_eta(p, em):
    f, psi = p["f"], p["psi"]
    sched = build_eta(lambda m: f(psi(m)) * m ** 7, p["m_max"])
    rows = [
        {
            "block": i + 1,
            "start": start,
            "eta": sched.eta(start),
            "rho_at_start": sched.rho(start),
        }
        for i, start in enumerate(sched.breakpoints)
    ]
    em.table("eta", ["block", "start", "eta", "rho_at_start"], rows)
    invariants = [
        {"check": name, "ok": ok, "witness": witness}
        for name, ok, witness in sched.invariant_report()
    ]
    rho_rep = rho_properties(sched, R_max=p["r_max"])
    properties = [
        {"check": c.name, "ok": c.ok, "witness": c.witness}
        for c in rho_rep.checks
    ]
    all_ok = all(r["ok"] for r in invariants) and rho_rep.all_ok()
    em.report(
        "eta_checks",
        {
            "invariants": invariants,
            "rho_properties": properties,
            "R_max": p["r_max"],
            "all_ok": all_ok,
        },
    )
    if not all_ok:
        for r in invariants + properties:
            if not r["ok"]:
                print(f"eta: {r['check']}: {r['witness']}", file=sys.stderr)
        return 2
    return 0


def _cmd_coverage(p, em):
    reports = coverage_sweep(
        p["psi"], p["n_min"], p["q_grid"], samples=p["samples"], seed=p["seed"]
    )
    rows = [
        {
            "v_or_psi_id": psi_label(p["psi"]),
            "N_min": r.N_min,
            "Q_max": r.Q_max,
            "fraction": r.fraction,
            "stderr": r.stderr,
            "seed": r.seed,
        }
        for r in reports
    ]
    em.table(
        "coverage",
        ["v_or_psi_id", "N_min", "Q_max", "fraction", "stderr", "seed"],
        rows,
    )
    return 0


def _cmd_dimension_scan(p, em):
    scan = cover_sum_exponent(
        p["v"], N_grid=(p["n_small"], p["n_big"]), M_max=p["m_max"]
    )
    em.table(
        "dimension_scan",
        ["v", "s", "N", "tail_value", "verdict"],
        scan.as_records(),
    )
    em.report(
        "dimension_summary",
        {
            "v": scan.v,
            "s_star": scan.s_star,
            "s_analytic": scan.s_analytic,
            "dimension": scan.dimension,
            "saturated": scan.saturated,
            "M_max": scan.M_max,
        },
    )
    return 0


def _cmd_simul_r4(p, em):
    res = simultaneous_dirichlet(
        tuple(float(x) for x in p["alpha"]), p["n"]
    )
    row = {
        "q": res.q,
        "p0": res.p[0],
        "p1": res.p[1],
        "p2": res.p[2],
        "p3": res.p[3],
        "error": res.error,
        "bound": res.bound,
        "qualifying": res.qualifying,
    }
    em.table(
        "simul_r4",
        ["q", "p0", "p1", "p2", "p3", "error", "bound", "qualifying"],
        [row],
    )
    return 0


# ---------------------------------------------------------------------------
# schemas and dispatch
# ---------------------------------------------------------------------------

SUBCOMMANDS = {
    "arith-check": (
        "run the algebraic property suites (self-test)",
        [
            ("trials", coerce_int, "1000", "random cases per suite"),
            ("span", coerce_int, "10", "coordinate range of random elements"),
            ("count_to", coerce_int, "20", "largest norm for the count formula"),
        ],
        _cmd_arith_check,
    ),
    "dirichlet": (
        "best single approximant with the pigeonhole guarantee",
        [
            ("xi", coerce_reals4, REQUIRED, "target, four comma-separated coords"),
            ("n", coerce_int, REQUIRED, "denominator bound |q| <= N"),
        ],
        _cmd_dirichlet,
    ),
    "approximants": (
        "all good approximants up to a denominator bound",
        [
            ("xi", coerce_reals4, REQUIRED, "target, four comma-separated coords"),
            ("q_max", coerce_int, REQUIRED, "denominator bound |q| <= Q_max"),
        ],
        _cmd_approximants,
    ),
    "constants": (
        "approximation constants c_Q and C_Q",
        [
            ("xi", coerce_reals4, REQUIRED, "target, four comma-separated coords"),
            ("q_max", coerce_int, REQUIRED, "denominator bound |q| <= Q_max"),
        ],
        _cmd_constants,
    ),
    "bad-construct": (
        "nested-ball construction of a badly approximable point",
        [
            ("kappa", coerce_int, "3", "shrink base (integer >= 3)"),
            ("depth", coerce_int, "4", "construction depth"),
        ],
        _cmd_bad_construct,
    ),
    "resonant-count": (
        "resonant-point counts against the norm-squared prediction",
        [
            ("q", coerce_quat, OPTIONAL, 'one denominator, e.g. "2+1i+0j+0k"'),
            ("lo", coerce_int, OPTIONAL, "lowest denominator norm (class sweep)"),
            ("hi", coerce_int, OPTIONAL, "highest denominator norm (class sweep)"),
        ],
        _cmd_resonant_count,
    ),
    "near-volume": (
        "Monte Carlo measure of the near-resonant neighbourhood",
        [
            ("q", coerce_quat, REQUIRED, 'denominator, e.g. "2+0i+0j+0k"'),
            ("epsilon", coerce_float, REQUIRED, "ball radius"),
            ("samples", coerce_int, "100000", "Monte Carlo sample count"),
        ],
        _cmd_near_volume,
    ),
    "ubiquity": (
        "coverage of a ball by rho-neighbourhoods of rationals",
        [
            ("center", coerce_reals4, "0.5,0.5,0.5,0.25", "ball center"),
            ("radius", coerce_float, "0.08", "ball radius"),
            ("n", coerce_int, REQUIRED, "denominator bound |q| <= N"),
            ("rho", coerce_float, OPTIONAL, "covering radius (default 2/N^2)"),
            ("vpi", coerce_float, OPTIONAL, "small-denominator cut (default sqrt N)"),
            ("samples", coerce_int, "100000", "Monte Carlo sample count"),
        ],
        _cmd_ubiquity,
    ),
    "sums": (
        "partial sums of one critical series",
        [
            (
                "kind",
                coerce_choice("lebesgue", "hausdorff", "simultaneous", "ubiquity"),
                REQUIRED,
                "which critical series",
            ),
            ("psi", coerce_psi, REQUIRED, "approximation function spec"),
            ("f", coerce_dim, OPTIONAL, "dimension function spec (power:s=...)"),
            ("m_max", coerce_int, "100000", "summation cutoff"),
            ("kappa", coerce_int, "2", "dyadic base for ubiquity sums"),
        ],
        _cmd_sums,
    ),
    "eta": (
        "greedy block schedule with its invariant and rho property suite",
        [
            ("psi", coerce_psi, "power:v=2", "approximation function spec"),
            ("f", coerce_dim, "power:s=4", "dimension function spec"),
            ("m_max", coerce_int, "1000000", "scan cutoff"),
            ("r_max", coerce_int, "19", "dyadic range for rho properties"),
        ],
        _cmd_eta,
    ),
    "coverage": (
        "Monte Carlo mass of the truncated approximable set",
        [
            ("psi", coerce_psi, REQUIRED, "approximation function spec"),
            ("n_min", coerce_int, "1", "smallest denominator norm |q|"),
            ("q_grid", coerce_int_list, REQUIRED, "comma list of Q_max values"),
            ("samples", coerce_int, "100000", "Monte Carlo sample count"),
        ],
        _cmd_coverage,
    ),
    "dimension-scan": (
        "cover-sum tail scan locating the critical exponent",
        [
            ("v", coerce_float, REQUIRED, "approximation exponent"),
            ("m_max", coerce_int, "100000", "summation cutoff"),
            ("n_small", coerce_int, "10", "small tail start"),
            ("n_big", coerce_int, "100", "large tail start"),
        ],
        _cmd_dimension_scan,
    ),
    "simul-r4": (
        "classical simultaneous approximation in R^4",
        [
            ("alpha", coerce_reals4, REQUIRED, "target, four comma-separated reals"),
            ("n", coerce_int, REQUIRED, "denominator bound q <= N"),
        ],
        _cmd_simul_r4,
    ),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quatapprox",
        description="Hurwitz-quaternion approximation experiments",
        epilog=(
            "Parameter precedence: flags, then QUATAPPROX_<KEY> environment "
            "variables, then --config entries, then defaults."
        ),
    )
    subs = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name, (help_text, schema, _) in SUBCOMMANDS.items():
        sp = subs.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", default=None, help="flat key = value file")
        for key, _, default, par_help in COMMON_SCHEMA + schema:
            flag = "--" + key.replace("_", "-")
            shown = "" if default in (REQUIRED, OPTIONAL) else f" [{default}]"
            sp.add_argument(
                flag, dest=key, default=None, help=par_help + shown
            )
    return parser


def _resolve_params(args, schema):
    """Apply the flag > environment > config > default precedence and
    coerce every value, reporting errors by parameter name."""
    file_cfg = {}
    config_path = args.config or os.environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        file_cfg = load_config(config_path)
    known = {key for key, _, _, _ in COMMON_SCHEMA + schema}
    unknown = set(file_cfg) - known
    if unknown:
        raise ValidationError(
            f"unknown config keys: {', '.join(sorted(unknown))}"
        )
    params, resolved = {}, {}
    for key, coerce, default, _ in COMMON_SCHEMA + schema:
        raw = getattr(args, key)
        if raw is None:
            raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is None:
            raw = file_cfg.get(key)
        if raw is None:
            if default is REQUIRED:
                raise ValidationError(f"missing required parameter {key!r}")
            if default is OPTIONAL:
                params[key] = None
                continue
            raw = default
        params[key] = coerce(key, raw)
        resolved[key] = raw
    return params, resolved


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 1
    _, schema, handler = SUBCOMMANDS[args.subcommand]
    try:
        params, resolved = _resolve_params(args, schema)
        emitter = Emitter(params["out"], params["format"])
        start = time.perf_counter()
        status = handler(params, emitter)
        write_manifest(
            emitter,
            args.subcommand,
            resolved,
            params["seed"],
            time.perf_counter() - start,
        )
        return status
    except ValidationError as e:
        print(f"quatapprox: {e}", file=sys.stderr)
        return 1
    except PropertyFailure as e:
        print(f"quatapprox: property failure: {e}", file=sys.stderr)
        return 2
    except InternalInvariantError as e:
        print(f"quatapprox: internal invariant broke: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001 -- last-resort mapping to exit 3
        print(f"quatapprox: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
