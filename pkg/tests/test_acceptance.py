"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Sampled checks run through the identity registry; wherever a cheap route
exists that does not touch the library, the same points are recomputed
with mpmath or plain fractions and compared as well.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import random
from fractions import Fraction

import jsonschema
import mpmath
from hypothesis import HealthCheck, given, settings

from twinbasic.cli import EXIT_OK, main
from twinbasic.dsl import parse_expr, to_text
from twinbasic.identities import (
    EULER_TRUNCATION,
    hermite_coefficients,
    hermite_pq,
    list_identities,
    run_suite,
    verify_identity,
)
from twinbasic.noncomm import nc_binomial_power, oscillator_number, rtt_sides, verify_oscillator_realization
from twinbasic.numkernel import PoleError, ToleranceSpec, is_exact, precision
from twinbasic.operators import phi_difference_residual
from twinbasic.pqcore import (
    BasePair,
    gbin_evaluate,
    gbin_expand,
    pq_binomial,
    pq_exponential,
    pq_pochhammer,
)
from twinbasic.series import (
    Phi,
    confluence_probe,
    embed_phi_to_Phi,
    eval_Phi,
    eval_phi_classical,
    phi,
    project_Phi_to_phi,
)

from conftest import ACCEPTANCE_LINES, mp, rel_err
from test_dsl_cli import REPORT_SCHEMA, exprs

TOL = mpmath.mpf(10) ** -30
DIGITS = 50


def criterion(number: int, title: str):
    """Record PASS or FAIL for the wrapped test, then let pytest judge it."""

    def wrap(fn):
        @functools.wraps(fn)
        def test(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                _line(number, title, False)
                raise
            _line(number, title, True)

        return test

    return wrap


def _line(number: int, title: str, ok: bool) -> None:
    text = f"{'PASS' if ok else 'FAIL'} {number}: {title}"
    ACCEPTANCE_LINES.append(text)
    print(text)


def suite(name: str, samples: int, seed: int, tol: ToleranceSpec | None = None):
    with precision(DIGITS):
        reports = run_suite(seed=seed, samples=samples, names=[name], tol=tol)
    assert len(reports) == samples
    failed = [r.to_json() for r in reports if not r.passed]
    assert not failed, failed[:2]
    return reports


def direct_poch(a, b, p, q, n):
    out = Fraction(1)
    for k in range(n):
        out *= a * p**k - b * q**k
    return out


def rand_rat(rng: random.Random, lo, hi, den=12, nonzero=True) -> Fraction:
    while True:
        d = rng.randint(1, den)
        top, bottom = math.floor(hi * d), math.ceil(lo * d)
        if top < bottom:
            continue
        x = Fraction(rng.randint(bottom, top), d)
        if x or not nonzero:
            return x


def termwise_2Phi1(a, b, c, d, e, f, p, q, z):
    """``2Phi1`` by its term ratio at 70 digits, summed until terms stall."""
    a, b, c, d, e, f, p, q, z = map(mp, (a, b, c, d, e, f, p, q, z))
    total, term, pn, qn, small = mpmath.mpf(1), mpmath.mpf(1), mpmath.mpf(1), mpmath.mpf(1), 0
    for _ in range(20000):
        term *= (a * pn - b * qn) * (c * pn - d * qn) / ((p * pn - q * qn) * (e * pn - f * qn)) * z
        pn, qn = pn * p, qn * q
        total += term
        small = small + 1 if abs(term) < mpmath.mpf(10) ** -65 * abs(total) else 0
        if small == 5:
            return total
    raise AssertionError("oracle did not converge")


# ---------------------------------------------------------------------------


@criterion(1, "(p,q)-binomial theorem, 200 samples, series vs product ratio < 1e-30")
def test_criterion_01_binomial_theorem():
    reports = suite("pq_binomial_theorem", 200, seed=101)
    for r in reports:
        a, b, z = r.params["a"], r.params["b"], r.params["z"]
        p, q = r.base.p, r.base.q
        assert 0 < q < p
        assert abs(z) <= Fraction(9, 10) * p / max(abs(a), abs(b), 1)
        rho = mp(q) / mp(p)
        oracle = mpmath.qp(mp(b * z / p), rho) / mpmath.qp(mp(a * z / p), rho)
        assert rel_err(mpmath.mpf(r.lhs), oracle) < TOL


@criterion(2, "gbin expansion exact for n <= 12 on 100 rational points")
def test_criterion_02_gbin():
    rng = random.Random(2)
    for _ in range(100):
        a, b, p, q = (rand_rat(rng, -3, 3, nonzero=False) for _ in range(4))
        B = BasePair(p, q)
        for n in range(13):
            expanded = gbin_evaluate(gbin_expand(n, B), a, b)
            assert isinstance(expanded, Fraction)
            assert expanded - direct_poch(a, b, p, q, n) == 0
            assert pq_pochhammer((a, b), B, n) == expanded


@criterion(3, "permutation product law, n = 3 exhaustive, matched components give 1")
def test_criterion_03_permutation_law():
    with precision(DIGITS):
        r = verify_identity("permutation_product_law")
        assert r.passed and "checks=38" in r.notes  # 1 + 35 permutations + 2
        P, B = r.params, r.base
        ap = [P["a1p"], P["a2p"], P["a3p"]]
        aq = [P["a1q"], P["a2q"], P["a3q"]]
        z = P["z"]
        value = {(u, v): eval_Phi(Phi([(u, v)], [], B, z)).value for u in ap for v in aq + ap}
    rho = mp(B.q) / mp(B.p)

    def oracle(u, v):
        return mpmath.qp(mp(v * z / B.p), rho) / mpmath.qp(mp(u * z / B.p), rho)

    reference = oracle(ap[0], aq[0]) * oracle(ap[1], aq[1]) * oracle(ap[2], aq[2])
    for s, t in itertools.product(itertools.permutations(range(3)), repeat=2):
        prod = value[ap[s[0]], aq[t[0]]] * value[ap[s[1]], aq[t[1]]] * value[ap[s[2]], aq[t[2]]]
        assert rel_err(prod, reference) < TOL
    matched = value[ap[0], ap[1]] * value[ap[1], ap[2]] * value[ap[2], ap[0]]
    assert rel_err(matched, 1) < TOL


@criterion(4, "exponentials: e(z)E(-z) = 1 on 50 samples, classical products at p = 1")
def test_criterion_04_exponentials():
    suite("exp_product", 50, seed=104)
    with precision(DIGITS):
        for q, z in itertools.product((Fraction(1, 2), Fraction(1, 3), Fraction(3, 4)),
                                      (Fraction(-1, 2), Fraction(1, 4), Fraction(2, 3))):
            e = pq_exponential("small_e", z, (1, q))
            E = pq_exponential("big_E", z, (1, q))
            assert rel_err(e, 1 / mpmath.qp(mp(z), mp(q))) < TOL
            assert rel_err(E, mpmath.qp(mp(-z), mp(q))) < TOL


@criterion(5, "pqbin family: main, p = 0, p -> q and (1/q, q) branches")
def test_criterion_05_pqbin_family():
    suite("pqbin_family", 20, seed=105)
    points = [(Fraction(3, 2), Fraction(1, 2), Fraction(1, 5)), (Fraction(2), Fraction(1, 3), Fraction(-1, 7)),
              (Fraction(1), Fraction(2, 3), Fraction(3, 4)), (Fraction(-1, 2), Fraction(1, 5), Fraction(2, 9))]
    with precision(DIGITS):
        for p, q, z in points:
            B = BasePair(p, q)
            g = lambda n: q ** (n - 1)
            for n in range(1, 11):
                # terminating main identity, exact
                value = eval_Phi(Phi([(q**n, p**n)], [], B, z)).value
                assert isinstance(value, Fraction)
                assert value == direct_poch(p, p**n * z, p, q, n) / p ** (n * (n + 1) // 2)
                # p = 0: geometric coefficients and closed forms
                zero = BasePair(0, q)
                assert eval_Phi(Phi([(q**n, 0)], [], zero, z)).value == 1 - g(n) * z
                if abs(g(n) * z) < 1:
                    series = eval_Phi(Phi([(0, q**n)], [], zero, z)).value
                    assert rel_err(series, 1 / (1 - g(n) * z)) < TOL
                # p -> q: binomial series against (1 - q^(n-1) z)^(-n)
                if abs(g(n) * z) < Fraction(9, 10):
                    w = mp(z)
                    total, k, small = mpmath.mpf(0), 0, 0
                    while small < 5:
                        term = mp(pq_binomial(n - 1 + k, k, BasePair(q, q))) * w**k
                        total += term
                        small = small + 1 if abs(term) < mpmath.mpf(10) ** -65 * abs(total) else 0
                        k += 1
                    assert rel_err(total, (1 - mp(g(n) * z)) ** (-n)) < TOL
                # (1/q, q), exact
                if n <= 8:
                    inv = BasePair(1 / q, q)
                    left = q ** (n * (n + 1) // 2) * pq_pochhammer((1 / q, z * q ** (-n)), inv, n)
                    right = sum((pq_binomial(n, k, inv) * (-z) ** k for k in range(n + 1)), Fraction(0))
                    assert left == right
                    assert left == q ** (n * (n + 1) // 2) * direct_poch(1 / q, z * q ** (-n), 1 / q, q, n)


@criterion(6, "Heine transformation (100) and 1phi1 transformation and summation (50 each)")
def test_criterion_06_heine_and_phi11():
    for r in suite("heine_transformation", 100, seed=106):
        P = r.params
        oracle = termwise_2Phi1(P["a"], P["b"], P["c"], P["d"], P["e"], P["f"], r.base.p, r.base.q, P["z"])
        assert rel_err(mpmath.mpf(r.lhs), oracle) < TOL
    suite("phi11_transformation", 50, seed=106)
    for r in suite("phi11_summation", 50, seed=106):
        a, b, q = r.params["a"], r.params["b"], r.base.q
        if any(b / a * q**k == 1 for k in range(400)):
            assert r.rhs == "0"
            continue
        oracle = mpmath.qp(mp(b / a), mp(q)) / mpmath.qp(mp(b), mp(q))
        assert rel_err(mpmath.mpf(r.lhs), oracle) < TOL


@criterion(7, "Gauss sum and sigma form (100 each), both corollaries at q = 1/2, 1/3")
def test_criterion_07_gauss():
    for r in suite("gauss_sum", 100, seed=107):
        P = r.params
        assert abs(P["a"] * P["c"] * P["f"]) <= Fraction(9, 10) * abs(P["b"] * P["d"] * P["e"])
    suite("sigma_form", 100, seed=107)
    zs = [Fraction(-1, 2), Fraction(-1, 4), Fraction(1, 8), Fraction(1, 3), Fraction(1, 2)]
    with precision(DIGITS):
        for q, z in itertools.product((Fraction(1, 2), Fraction(1, 3)), zs):
            r = verify_identity("gauss_corollary_qsquare", {"z": z}, (1, q))
            assert r.passed
            assert rel_err(mpmath.mpf(r.lhs), 1 / mpmath.qp(mp(q * z), mp(q))) < TOL
            r = verify_identity("gauss_corollary_sqrtq", {"z": z}, (1, q))
            assert r.passed
            assert rel_err(mpmath.mpf(r.lhs), mpmath.qp(mpmath.sqrt(mp(q)) * mp(z), mp(q))) < TOL


@criterion(8, "Ramanujan 1Psi1 sum, 50 samples in the strip, three routes agree < 1e-25")
def test_criterion_08_ramanujan():
    tol = ToleranceSpec(0, Fraction(1, 10**25))
    for r in suite("ramanujan_sum", 50, seed=108, tol=tol):
        a, b, c, d, z = (r.params[k] for k in "abcdz")
        Z = z * a / c  # classical argument
        assert Fraction(11, 10) * abs(a * d / (b * c)) <= abs(Z) <= Fraction(9, 10)
        A, Bc, R, W = mp(b / a), mp(d / c), mp(r.base.q) / mp(r.base.p), mp(Z)
        qp = lambda x: mpmath.qp(x, R)
        oracle = qp(R) * qp(Bc / A) * qp(A * W) * qp(R / (A * W)) / (qp(Bc) * qp(R / A) * qp(W) * qp(Bc / (A * W)))
        assert rel_err(mpmath.mpf(r.lhs), oracle) < mpmath.mpf(10) ** -25


@criterion(9, "Jacobi triple product on rho = 0.1..0.6, 0.2 <= |z| <= 0.9; Euler at q = 1/2, 1/3, 2/3")
def test_criterion_09_jacobi_euler():
    with precision(DIGITS):
        for k, p, z in itertools.product(range(1, 7), (Fraction(1), Fraction(3, 2)),
                                         (Fraction(1, 5), Fraction(-1, 2), Fraction(9, 10), Fraction(-9, 10))):
            B = BasePair(p, p * Fraction(k, 10))
            r = verify_identity("jacobi_triple_product", {"a": Fraction(1), "c": Fraction(1), "z": z}, B)
            assert r.passed and "checks=4" in r.notes  # includes the explicit product
            rho, w = mpmath.mpf(k) / 10, mp(z)
            oracle = mpmath.nsum(lambda n: (-1) ** int(n) * rho ** (n * n / 2) * w**n, [-mpmath.inf, mpmath.inf])
            assert rel_err(mpmath.mpf(r.lhs), oracle) < TOL
        assert EULER_TRUNCATION.max_terms <= 200
        for q in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)):
            r = verify_identity("euler_identity", {}, (1, q))
            assert r.passed
            assert rel_err(mpmath.mpf(r.rhs), mpmath.qp(mp(q), mp(q))) < TOL


@criterion(10, "difference equation residual exactly 0 for five (r,s) shapes, N = 25")
def test_criterion_10_difference_equation():
    rng = random.Random(10)
    for r, s in [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]:
        done = 0
        while done < 10:
            p, q = rand_rat(rng, -3, 3), rand_rat(rng, -3, 3)
            if p == q:
                continue
            num = [(rand_rat(rng, -3, 3), rand_rat(rng, -3, 3)) for _ in range(r)]
            den = [(rand_rat(rng, -3, 3), rand_rat(rng, -3, 3)) for _ in range(s)]
            spec = Phi(num, den, (p, q), rand_rat(rng, -2, 2))
            try:
                res = phi_difference_residual(spec, 25)
            except PoleError:
                continue
            assert isinstance(res, Fraction) and res == 0
            done += 1


@criterion(11, "embedding and projection: structural round trip, 200 numeric samples, confluence")
def test_criterion_11_embedding():
    rng = random.Random(11)
    shapes = [(1, 0), (2, 1), (3, 2), (0, 0), (1, 1), (1, 2)]  # r <= s + 1 converges
    with precision(DIGITS):
        checked = 0
        while checked < 200:
            r, s = shapes[checked % len(shapes)]
            q = rand_rat(rng, Fraction(1, 10), Fraction(7, 10), 20)
            num = [rand_rat(rng, -2, 2) for _ in range(r)]
            den = [rand_rat(rng, -2, 2) for _ in range(s)]
            if any(q**k * d == 1 for d in den for k in range(200)):
                continue
            z = rand_rat(rng, Fraction(-9, 10), Fraction(9, 10), 20) / max([abs(x) for x in num] + [1])
            spec = phi(num, den, q, z)
            nump = [rand_rat(rng, -3, 3) for _ in range(r)]
            denp = [rand_rat(rng, -3, 3) for _ in range(s)]
            bp = rand_rat(rng, Fraction(1, 2), 3)
            lifted = embed_phi_to_Phi(spec, nump, denp, bp)
            if s == r - 1:
                assert project_Phi_to_phi(lifted) == spec
                assert embed_phi_to_Phi(project_Phi_to_phi(lifted), nump, denp, bp) == lifted
            assert rel_err(eval_Phi(lifted).value, eval_phi_classical(spec).value) < TOL
            checked += 1
        probes = [Phi([(1, Fraction(1, 3)), (2, Fraction(1, 5))], [(1, Fraction(1, 2))], (1, Fraction(1, 2)),
                      Fraction(1, 4)),
                  Phi([(Fraction(3, 2), 1)], [], (2, Fraction(2, 3)), Fraction(1, 3))]
        for spec in probes:
            for which in ("q_component", "p_component"):
                surrogate, limit = confluence_probe(spec, 0, which, 10**6)
                assert abs(mp(surrogate) - mp(limit)) <= mpmath.mpf(10) ** -4 * max(abs(mp(limit)), 1)


@criterion(12, "noncommutative binomials (n <= 8), RTT on square points, oscillator to N = 20, all exact")
def test_criterion_12_noncomm():
    rng = random.Random(12)
    for _ in range(20):
        p, q = rand_rat(rng, -3, 3, 6), rand_rat(rng, -3, 3, 6)
        for n in range(9):
            for with_ab in (True, False):
                lhs, first, second = nc_binomial_power(n, p, q, with_ab)
                assert lhs == first == second
                assert all(is_exact(c) for c in lhs.terms.values())
    for _ in range(20):
        s, t = rand_rat(rng, Fraction(1, 3), 3, 6), rand_rat(rng, Fraction(1, 3), 3, 6)
        p, q = s * t, s / t  # pq = s^2 and p/q = t^2
        lhs, rhs, _ = rtt_sides(p, q)
        for i, j in itertools.product(range(4), repeat=2):
            assert lhs[i][j] == rhs[i][j]
            assert all(is_exact(c) for c in lhs[i][j].terms.values())
    done = 0
    while done < 20:
        p, q = rand_rat(rng, -3, 3), rand_rat(rng, -3, 3)
        if 1 / p == q:
            continue
        assert verify_oscillator_realization(p, q, 20)
        for N in range(21):
            assert oscillator_number(N + 1, p, q) - q * oscillator_number(N, p, q) == p ** (-N)
        done += 1


@criterion(13, "Hermite: specialization (n <= 10), rescale relation (n <= 12), non-rescaling witness")
def test_criterion_13_hermite():
    def gaussian(n, k, q):
        return direct_poch(1, q, 1, q, n) / (direct_poch(1, q, 1, q, k) * direct_poch(1, q, 1, q, n - k))

    def recurrence(n, theta, q):
        x, prev, cur = mpmath.cos(mp(theta)), mpmath.mpf(1), 2 * mpmath.cos(mp(theta))
        if n == 0:
            return prev
        for m in range(1, n):
            prev, cur = cur, 2 * x * cur - (1 - mp(q) ** m) * prev
        return cur

    with precision(DIGITS):
        for q in (Fraction(1, 2), Fraction(-2, 3), Fraction(3, 7)):
            for n in range(11):
                assert hermite_coefficients(n, (1, q)) == [gaussian(n, k, q) for k in range(n + 1)]
                value = hermite_pq(n, Fraction(2, 5), (1, q))
                expected = recurrence(n, Fraction(2, 5), q)
                assert abs(value - expected) <= TOL * max(abs(expected), 1)
        for p, q in [(Fraction(2), Fraction(1, 2)), (Fraction(3, 2), Fraction(-1, 3)), (Fraction(-5, 4), Fraction(2, 7))]:
            for n in range(13):
                for k in range(n + 1):
                    assert pq_binomial(n, k, (p, q)) == p ** (k * (n - k)) * pq_binomial(n, k, (1, q / p))
        twin = hermite_pq(3, Fraction(1, 3), (2, Fraction(1, 2)))
        single = hermite_pq(3, Fraction(1, 3), (1, Fraction(1, 4)))
        assert abs(twin - single) > mpmath.mpf(10) ** -3
        assert verify_identity("hermite_rescale").passed


@criterion(14, "CLI: 500-expression round trip, verify all --grid 10 --seed 7, JSON schema")
def test_criterion_14_cli(tmp_path):
    @settings(max_examples=500, derandomize=True, suppress_health_check=list(HealthCheck))
    @given(exprs)
    def round_trip(e):
        assert parse_expr(to_text(e)) == e

    round_trip()
    out = tmp_path / "all.json"
    assert main(["verify", "all", "--grid", "10", "--seed", "7", "--json", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    jsonschema.validate(data, REPORT_SCHEMA)
    names = [c.name for c in list_identities()]
    assert sorted({d["identity"] for d in data}) == sorted(names)
    for name in names:
        assert sum(d["identity"] == name and d["pass"] for d in data) == 10
