"""Tests for the approximation searches and the nested-ball construction."""

import math

import numpy as np
import pytest

from quatapprox.approx import (
    BadConstructionConfig,
    construct_badly_approximable,
    dirichlet_search,
    good_approximants,
    markov_constants,
    run_bad_construction,
)
from quatapprox.errors import ValidationError
from quatapprox.hurwitz import HurwitzInt, HurwitzRational, RealQuaternion


def rational_xi(p, q):
    return HurwitzRational(HurwitzInt(*p), HurwitzInt(*q)).value()


class TestDirichlet:
    def test_rational_target_is_hit_exactly(self):
        xi = rational_xi((1, 1, 0, 0), (2, 1, 0, 0))
        a = dirichlet_search(xi, 10)
        assert a.err == 0.0
        assert a.err_exact == 0

    def test_float_example_bound(self):
        xi = RealQuaternion(math.pi / 4, math.e / 10, 0.3, 0.1)
        a = dirichlet_search(xi, 10)
        assert 1 <= a.q.norm_sq() <= 100
        assert a.quality() * 10 < 2.0

    def test_minimal_n(self):
        xi = RealQuaternion(0.37, 0.21, 0.88, 0.44)
        a = dirichlet_search(xi, 2)
        assert a.err < 2.0 / (math.sqrt(a.q.norm_sq()) * 2)

    def test_random_bounds(self):
        rng = np.random.default_rng(101)
        for _ in range(50):
            xi = RealQuaternion(*rng.random(3).tolist(), rng.random() * 0.5)
            N = int(rng.integers(2, 51))
            a = dirichlet_search(xi, N)
            assert a.q.norm_sq() <= N * N
            assert a.err * math.sqrt(a.q.norm_sq()) * N < 2.0

    def test_workers_do_not_change_result(self):
        xi = RealQuaternion(0.123, 0.456, 0.789, 0.321)
        a1 = dirichlet_search(xi, 12, workers=1)
        a2 = dirichlet_search(xi, 12, workers=3)
        assert (a1.p, a1.q, a1.err) == (a2.p, a2.q, a2.err)

    def test_invalid_n(self):
        xi = RealQuaternion(0.1, 0.2, 0.3, 0.4)
        with pytest.raises(ValidationError):
            dirichlet_search(xi, 1)
        with pytest.raises(ValidationError):
            dirichlet_search(xi, 2.5)


class TestGoodApproximants:
    def test_nonempty_and_sorted(self):
        xi = RealQuaternion(0.61, 0.18, 0.43, 0.27)
        out = good_approximants(xi, 6)
        assert out
        keys = [(a.q.norm_sq(), a.err) for a in out]
        assert keys == sorted(keys)

    def test_defining_inequality_exact_for_rational(self):
        xi = rational_xi((1, 0, 1, 0), (2, 1, 0, 1))
        out = good_approximants(xi, 6)
        for a in out:
            n = a.q.norm_sq()
            assert a.err_exact is not None
            assert a.err_exact * n * n < 4

    def test_padded_family_present(self):
        # a rational target keeps all right-multiples (p0*y, q0*y) as
        # zero-error members, not just the reduced form
        xi = rational_xi((1, 1, 0, 0), (2, 1, 0, 0))
        out = good_approximants(xi, 8)
        zero_norms = sorted({a.q.norm_sq() for a in out if a.err_exact == 0})
        assert zero_norms[:4] == [5, 10, 15, 20]

    def test_count_grows_with_q_max(self):
        xi = RealQuaternion(0.31, 0.77, 0.52, 0.14)
        n6 = len(good_approximants(xi, 6))
        n12 = len(good_approximants(xi, 12))
        assert 0 < n6 <= n12

    def test_workers_match(self):
        xi = RealQuaternion(0.31, 0.77, 0.52, 0.14)
        a = good_approximants(xi, 6, workers=1)
        b = good_approximants(xi, 6, workers=3)
        assert [(x.p, x.q) for x in a] == [(x.p, x.q) for x in b]

    def test_invalid_q_max(self):
        with pytest.raises(ValidationError):
            good_approximants(RealQuaternion(0.1, 0.2, 0.3, 0.4), 0)


class TestMarkovConstants:
    def test_rational_target_zero(self):
        xi = rational_xi((1, 1, 0, 0), (2, 1, 0, 0))
        c, C = markov_constants(xi, 10)
        assert c == 0.0
        assert C == math.inf

    def test_monotone_under_doubling(self):
        xi = RealQuaternion(0.7071, 0.2236, 0.4472, 0.1357)
        c10, _ = markov_constants(xi, 10)
        c20, _ = markov_constants(xi, 20)
        c40, _ = markov_constants(xi, 40)
        assert c40 <= c20 <= c10

    def test_reciprocal(self):
        xi = RealQuaternion(0.7071, 0.2236, 0.4472, 0.1357)
        c, C = markov_constants(xi, 15)
        assert c > 0
        assert C == pytest.approx(1.0 / c)


class TestBadConstruction:
    def test_config_validation(self):
        with pytest.raises(ValidationError):
            BadConstructionConfig(kappa=2)
        with pytest.raises(ValidationError):
            BadConstructionConfig(kappa=3, depth=-1)
        cfg = BadConstructionConfig(kappa=3, depth=2, seed=5)
        assert cfg.theta == pytest.approx(0.5 / 9)
        assert cfg.K1 > cfg.K2 > 0
        assert cfg.nu == 3 ** 8

    def test_depth_zero_sentinel(self):
        xi, cert = construct_badly_approximable(BadConstructionConfig(3, 0, seed=1))
        assert cert == math.inf
        assert xi.coords == (0.5, 0.5, 0.5, 0.25)

    def test_levels_and_certificate(self):
        res = run_bad_construction(BadConstructionConfig(kappa=3, depth=2, seed=7))
        assert len(res.levels) == 2
        floor = math.ceil(res.config.K1 * res.config.nu) - 1
        for L in res.levels:
            assert L.candidates == 33
            assert L.discarded <= 1
            assert L.survivors >= floor
        assert res.certificate > 0

    def test_nesting_geometry(self):
        res = run_bad_construction(BadConstructionConfig(kappa=3, depth=3, seed=2))
        prev = np.array([0.5, 0.5, 0.5, 0.25])
        for L in res.levels:
            cur = np.array(L.center)
            r_n = res.config.radius(L.level)
            r_next = res.config.radius(L.level + 1)
            assert np.linalg.norm(cur - prev) + r_next <= r_n + 1e-12
            prev = cur
        # the whole first-level ball stays inside the fundamental domain
        c1 = np.array(res.levels[0].center)
        r1 = res.config.radius(1)
        assert (c1[:3] - r1 > 0).all() and (c1[:3] + r1 < 1).all()
        assert c1[3] - r1 > 0 and c1[3] + r1 < 0.5

    def test_seed_determinism(self):
        a = construct_badly_approximable(BadConstructionConfig(3, 2, seed=11))
        b = construct_badly_approximable(BadConstructionConfig(3, 2, seed=11))
        c = construct_badly_approximable(BadConstructionConfig(3, 2, seed=12))
        assert a[0].coords == b[0].coords and a[1] == b[1]
        assert a[0].coords != c[0].coords

    def test_kappa_four_candidate_count(self):
        res = run_bad_construction(BadConstructionConfig(kappa=4, depth=1, seed=0))
        assert res.levels[0].candidates == 321
        assert res.levels[0].survivors >= math.ceil(res.config.K1 * 4 ** 8) - 1
