"""Top-level verification gate.

Each test runs one headline property of the calculus at full scale and
stated tolerance, records a single PASS/FAIL summary line, and enforces
its wall-clock budget.
"""

import random
import time
from fractions import Fraction

from adl.bv import PFORM, TheorySpec
from adl.exact import to_complex
from adl.geometry import COS, SIN, FormMode, SpectralForm, Torus
from adl.observables import PolynomialObservable
from adl.oracle import (GaussianSpec, expectation_isserlis,
                        expectation_montecarlo)
from adl.verify import (bd_suite, double_dual_suite, factorisation_suite,
                        geometry_suite, hermite_suite, plancherel_suite,
                        stokes_suite, wilson_thooft_suite)
from adl.wick import expectation_diagrams


def _report(summary_line, name, rows, elapsed, budget):
    ok = all(r["passed"] for r in rows) and elapsed < budget
    worst = max((r["value"] for r in rows), default=0.0)
    summary_line(name, ok,
                 f"{sum(r['passed'] for r in rows)}/{len(rows)} checks, "
                 f"worst defect {worst:.3g}, {elapsed:.2f}s "
                 f"(budget {budget:g}s)")
    assert all(r["passed"] for r in rows), \
        [r for r in rows if not r["passed"]]
    assert elapsed < budget


def _timed(fn, **kw):
    t0 = time.perf_counter()
    rows = fn(**kw)
    return rows, time.perf_counter() - t0


def test_hermite_tower_of_the_self_dual_point(summary_line):
    rows, dt = _timed(hermite_suite, max_order=10)
    _report(summary_line, "self-dual Hermite tower (orders <= 10)",
            rows, dt, 1.0)


def test_monomials_return_unchanged_through_both_transforms(summary_line):
    rows, dt = _timed(double_dual_suite, rounds=50)
    _report(summary_line,
            "inverse-after-forward identity on 50 random monomials",
            rows, dt, 10.0)


def test_pairing_sum_equals_moment_recursion_and_sampling(summary_line):
    t0 = time.perf_counter()
    rng = random.Random(90210)
    t2 = Torus(2)
    pool = [((1, 2), COS), ((2, 1), SIN), ((0, 1), COS), ((1, 1), SIN),
            ((2, 2), COS), ((1, 0), COS)]

    def random_case():
        gens = []
        for _ in range(rng.randint(1, 3)):
            entries = {m: Fraction(rng.randint(-4, 4), rng.randint(1, 3))
                       for m in rng.sample(pool, rng.randint(1, 3))}
            coeff = {FormMode(k, ph, (0,)): c
                     for (k, ph), c in entries.items()}
            gens.append(SpectralForm(t2, 1, 9.0, coeff, validate=False))
        terms = {}
        for _ in range(rng.randint(1, 3)):
            exps = tuple(rng.randint(0, 2) for _ in gens)
            terms[exps] = terms.get(exps, Fraction(0)) + \
                Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        if all(not any(e) for e in terms):
            # keep every case genuinely stochastic so the sampling error
            # bar below is meaningful
            exps = (2,) + (0,) * (len(gens) - 1)
            terms[exps] = Fraction(1)
        obs = PolynomialObservable(gens, terms, validate=False)
        theory = TheorySpec(t2, PFORM, 9.0, degree=1,
                            r_squared=Fraction(rng.randint(1, 4),
                                               rng.randint(1, 3)))
        return obs, theory

    cases = [random_case() for _ in range(100)]
    exact_agree = 0
    for obs, theory in cases:
        spec = GaussianSpec.from_theory(obs.generators, theory)
        if expectation_diagrams(obs, theory) == \
                expectation_isserlis(obs, spec):
            exact_agree += 1
    mc_hits = 0
    worst_pull = 0.0
    for obs, theory in cases[::10]:
        spec = GaussianSpec.from_theory(obs.generators, theory)
        truth = to_complex(expectation_isserlis(obs, spec)).real
        est, se = expectation_montecarlo(obs, spec, samples=100000, seed=7)
        pull = abs(to_complex(est).real - truth) / se if se > 0 else 0.0
        worst_pull = max(worst_pull, pull)
        if abs(to_complex(est).real - truth) <= 4.0 * se:
            mc_hits += 1
    dt = time.perf_counter() - t0
    ok = exact_agree == 100 and mc_hits == 10 and dt < 60.0
    summary_line(
        "pairing sum vs moment recursion vs sampling", ok,
        f"{exact_agree}/100 exact matches, {mc_hits}/10 sampled within "
        f"4 SE (worst pull {worst_pull:.2f}), {dt:.1f}s (budget 60s)")
    assert exact_agree == 100
    assert mc_hits == 10
    assert dt < 60.0


def test_divergence_observables_average_to_zero(summary_line):
    rows, dt = _timed(stokes_suite, rounds=25, tolerance=1e-10)
    _report(summary_line,
            "expectation of the differential of 25 random degree -1 "
            "observables", rows, dt, 10.0)


def test_differential_algebra_identities(summary_line):
    rows, dt = _timed(bd_suite, max_degree=6)
    _report(summary_line,
            "bracket symmetry, product rule, squared differentials",
            rows, dt, 10.0)


def test_expectations_agree_across_the_coupling_inversion(summary_line):
    rows, dt = _timed(plancherel_suite)
    _report(summary_line,
            "two-sided expectation match over 5 pairs x 3 couplings x "
            "3 geometries", rows, dt, 600.0)


def test_loop_operator_matches_its_disorder_dual(summary_line):
    rows, dt = _timed(wilson_thooft_suite)
    _report(summary_line,
            "smeared loop vs dual disorder operator on the 2-torus",
            rows, dt, 120.0)


def test_transform_respects_disjoint_supports(summary_line):
    rows, dt = _timed(factorisation_suite)
    _report(summary_line,
            "multiplicativity on disjoint supports and antipodal bumps",
            rows, dt, 30.0)


def test_spectral_calculus_identities_full_basis(summary_line):
    rows, dt = _timed(geometry_suite)
    _report(summary_line,
            "derivative/adjoint/star identities over the full mode basis",
            rows, dt, 30.0)
