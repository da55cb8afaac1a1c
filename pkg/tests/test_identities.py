from __future__ import annotations

import json
import math
from fractions import Fraction

import mpmath
import pytest

from twinbasic.identities import (
    RAMANUJAN_NOTE,
    get_identity,
    hermite_pq,
    list_identities,
    run_suite,
    summarize,
    verify_identity,
)
from twinbasic.numkernel import DivergenceError, precision
from twinbasic.pqcore import BasePair, poch_ratio_infinite
from twinbasic.series import Psi11, eval_Psi11

from conftest import mp, rel_err

EXPECTED = {
    "pq_binomial_theorem", "permutation_product_law", "exp_product", "product_formula_1phi0", "pqbin_family",
    "gbin_equality", "heine_transformation", "phi11_transformation", "phi11_summation", "gauss_sum",
    "sigma_form", "gauss_corollary_qsquare", "gauss_corollary_sqrtq", "ramanujan_sum", "jacobi_triple_product",
    "euler_identity", "oscillator_realization", "operator_binomials", "rtt", "hermite_specialization",
    "hermite_rescale",
}
REPORT_KEYS = ["identity", "params", "base", "precision_digits", "truncation_terms", "lhs", "rhs",
               "abs_residual", "rel_residual", "tolerance", "pass", "notes"]


def test_registry_contents():
    names = [c.name for c in list_identities()]
    assert len(names) == len(set(names))
    assert set(names) == EXPECTED
    ram = get_identity("ramanujan_sum")
    assert RAMANUJAN_NOTE == "base typo corrected" and RAMANUJAN_NOTE in ram.notes
    with pytest.raises(KeyError):
        get_identity("no_such_identity")


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_registered_example_passes(name):
    with precision(50):
        report = verify_identity(name)
    assert report.passed, report.notes
    if report.tolerance == "0":
        assert report.abs_residual == "0"


def test_ramanujan_reports_carry_note():
    with precision(50):
        r = verify_identity("ramanujan_sum")
    assert RAMANUJAN_NOTE in r.notes


def test_gauss_printed_example_is_outside_its_region():
    # acf/bde = 15/7 here, so the point fails the admissibility predicate
    params = dict(a=1, b=Fraction(1, 3), c=1, d=Fraction(1, 5), e=1, f=Fraction(1, 7))
    with precision(50):
        r = verify_identity("gauss_sum", params, BasePair(1, Fraction(1, 2)))
    assert not r.passed
    assert any(n.startswith("inadmissible") for n in r.notes)


def test_gauss_admissible_variant():
    params = dict(a=1, b=3, c=1, d=5, e=1, f=Fraction(1, 7))
    with precision(50):
        r = verify_identity("gauss_sum", params, BasePair(1, Fraction(1, 2)))
    assert r.passed and mpmath.mpf(r.rel_residual) < mpmath.mpf(10) ** -30


def test_gbin_example_exact():
    r = verify_identity("gbin_equality", dict(n=5, a=7, b=5), BasePair(2, 3))
    assert r.passed and r.abs_residual == "0"


def test_exp_product_at_zero():
    with precision(50):
        r = verify_identity("exp_product", dict(z=0), BasePair(2, 1))
    assert r.passed and r.lhs == "1" and r.rhs == "1"


def test_divergence_propagates():
    from twinbasic.numkernel import TruncationPolicy

    with precision(30), pytest.raises(DivergenceError):
        verify_identity("exp_product", dict(z=Fraction(1, 3)), BasePair(1, Fraction(1, 2)),
                        trunc=TruncationPolicy(max_terms=5))
    with precision(30):
        r = verify_identity("exp_product", dict(z=3), BasePair(1, Fraction(1, 2)))
    assert not r.passed and r.notes[0].startswith("inadmissible")


def test_misprinted_ramanujan_base_fails():
    # the literal "(p,a)" product base disagrees with the bilateral sum
    a, b, c, d, z = Fraction(1, 2), Fraction(2), Fraction(3), Fraction(1), Fraction(1)
    p, q = Fraction(1), Fraction(1, 3)
    num = [(p, q), (b * c, a * d), (c, b * z), (p * b * z, q * c)]
    den = [(c, d), (p * b, q * a), (c, a * z), (p * b * z, p * d)]
    with precision(50):
        lhs = eval_Psi11(Psi11((a, b), (c, d), (p, q), z)).value
        good = poch_ratio_infinite(num, den, BasePair(p, q))
        bad = poch_ratio_infinite(num, den, BasePair(p, a))
    assert rel_err(lhs, good) < mpmath.mpf(10) ** -30
    assert rel_err(lhs, bad) > mpmath.mpf(10) ** -3


def test_run_suite_determinism_and_shape():
    names = ["gauss_sum", "ramanujan_sum", "rtt"]
    with precision(50):
        one = run_suite(seed=3, samples=2, names=names)
        two = run_suite(seed=3, samples=2, names=names)
    assert [r.to_json() for r in one] == [r.to_json() for r in two]
    assert len(one) == 6 and all(r.passed for r in one)
    assert all("seed=3" in r.notes for r in one)
    assert run_suite(seed=3, samples=0) == []
    summary = summarize(one)
    assert summary["gauss_sum"]["passed"] == 2 and summary["rtt"]["failed"] == 0


def test_different_seeds_differ():
    with precision(50):
        a = run_suite(seed=1, samples=1, names=["heine_transformation"])[0]
        b = run_suite(seed=2, samples=1, names=["heine_transformation"])[0]
    assert a.params != b.params


def test_report_json_fields():
    with precision(50):
        r = verify_identity("gauss_sum")
    data = json.loads(json.dumps(r.to_json()))
    assert list(data) == REPORT_KEYS
    assert all(isinstance(v, str) for v in data["params"].values())
    assert set(data["base"]) == {"p", "q"}
    for key in ("lhs", "rhs", "abs_residual", "rel_residual", "tolerance"):
        assert isinstance(data[key], str)
    assert isinstance(data["pass"], bool)


def test_failing_report_when_tolerance_impossible():
    # an absurd tolerance below rounding noise turns a numeric check into a failure
    from twinbasic.numkernel import ToleranceSpec

    with precision(50):
        r = verify_identity("exp_product", dict(z=Fraction(1, 3)), BasePair(Fraction(3, 2), Fraction(1, 2)),
                            tol=ToleranceSpec(0, Fraction(1, 10**200)))
    assert not r.passed
    assert any(n.startswith("failed:") for n in r.notes)


def test_hermite_examples():
    theta = Fraction(7, 10)
    x = mpmath.cos(mp(theta))
    p, q = Fraction(3, 2), Fraction(1, 3)
    with precision(50):
        h0 = hermite_pq(0, theta, BasePair(p, q))
        h1 = hermite_pq(1, theta, BasePair(p, q))
        h2 = hermite_pq(2, theta, BasePair(p, q))
    assert h0 == 1
    assert rel_err(h1, 2 * x) < mpmath.mpf(10) ** -45
    assert rel_err(h2, 4 * x**2 - 2 + mp(p + q)) < mpmath.mpf(10) ** -45


def test_hermite_classical_oracle():
    # classical continuous q-Hermite: sum_k (q;q)_n/((q;q)_k (q;q)_{n-k}) e^{i(n-2k)theta}
    q, theta = Fraction(2, 5), Fraction(1, 3)
    for n in range(11):
        oracle = mpmath.mpf(0)
        for k in range(n + 1):
            coef = mpmath.qp(mp(q), mp(q), n) / (mpmath.qp(mp(q), mp(q), k) * mpmath.qp(mp(q), mp(q), n - k))
            oracle += coef * mpmath.cos((n - 2 * k) * mp(theta))
        with precision(50):
            v = hermite_pq(n, theta, BasePair(1, q))
        assert rel_err(v, oracle) < mpmath.mpf(10) ** -40


def test_hermite_rescale_witness():
    # hermite at {p,q} is not a theta-rescaling of the q/p family: compare n = 3 shapes
    p, q, theta = Fraction(2), Fraction(1, 2), Fraction(1, 2)
    with precision(50):
        v = hermite_pq(3, theta, BasePair(p, q))
        w = hermite_pq(3, theta, BasePair(1, q / p))
    assert rel_err(v, w) > mpmath.mpf(10) ** -3
    assert math.isclose(float(v), float(2 * mpmath.cos(3 * mp(theta)) + 2 * p**2 * (1 + q / p + (q / p) ** 2)
                                      * mpmath.cos(mp(theta))), rel_tol=1e-12)


def test_exact_zero_reference_uses_unit_scale():
    # a = b makes the product side (1;q)_inf vanish exactly; the series
    # only cancels to working precision
    r = verify_identity("phi11_summation", {"a": Fraction(-3, 2), "b": Fraction(-3, 2)}, BasePair(1, Fraction(8, 15)))
    assert r.passed and r.rhs == "0"
