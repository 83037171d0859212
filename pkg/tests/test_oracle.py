"""Independent expectation routes: the recursive moment oracle, seeded
Monte Carlo, the harmonic-sector lattice sum, and the pointwise transform
integral, cross-checked against each other and against hand formulas."""

import math
from fractions import Fraction

import pytest

from adl.bv import CLOSED_PFORM, PFORM, TheorySpec
from adl.errors import MasslessSector, VariantMismatch
from adl.exact import to_complex
from adl.geometry import (COS, SIN, FormMode, HarmonicLattice, SpectralForm,
                          Torus, exact_part)
from adl.observables import PolynomialObservable
from adl.oracle import (RNG_NAME, GaussianSpec, central_moments_table,
                        covariance_from_theory, expectation_isserlis,
                        expectation_montecarlo, fourier_dual_integral,
                        maxwell_expectation, moment_isserlis)
from adl.wick import fourier_dual

T2 = Torus(2)


def _form(entries, idx=(0,), cutoff=9.0):
    coeff = {FormMode(k, ph, idx): c for (k, ph), c in entries.items()}
    return SpectralForm(T2, len(idx), cutoff, coeff, validate=False)


def test_central_moments_closed_forms():
    v = Fraction(3, 7)
    table = central_moments_table((8,), ((v,),))
    double_fact = {0: 1, 2: 1, 4: 3, 6: 15, 8: 105}
    for n in range(9):
        expected = double_fact[n] * v ** (n // 2) if n % 2 == 0 else 0
        assert table[(n,)] == expected
    # bivariate: E[X^2 Y^2] = Vx Vy + 2 C^2, E[X^3 Y] = 3 Vx C
    vx, vy, c = Fraction(2), Fraction(5, 3), Fraction(1, 2)
    t2 = central_moments_table((3, 2), ((vx, c), (c, vy)))
    assert t2[(2, 2)] == vx * vy + 2 * c * c
    assert t2[(3, 1)] == 3 * vx * c
    assert t2[(1, 1)] == c


def test_moments_with_nonzero_mean():
    v, mu = Fraction(5, 4), Fraction(2, 3)
    spec = GaussianSpec((mu,), ((v,),))
    assert moment_isserlis((2,), spec) == v + mu * mu
    assert moment_isserlis((3,), spec) == mu ** 3 + 3 * mu * v
    assert moment_isserlis((4,), spec) == (mu ** 4 + 6 * mu ** 2 * v
                                           + 3 * v ** 2)


def test_montecarlo_within_error_bars_and_seeded():
    theory = TheorySpec(T2, PFORM, 9.0, degree=1, r_squared=Fraction(1))
    x = _form({((1, 2), COS): Fraction(2), ((2, 1), SIN): Fraction(1)})
    y = _form({((0, 1), COS): Fraction(1)})
    obs = PolynomialObservable([x, y], {(2, 2): Fraction(1),
                                        (1, 1): Fraction(-2)}, validate=False)
    spec = GaussianSpec.from_theory(obs.generators, theory)
    truth = to_complex(expectation_isserlis(obs, spec)).real
    est, se = expectation_montecarlo(obs, spec, samples=40000, seed=11)
    assert abs(to_complex(est).real - truth) <= 4.0 * se
    est2, se2 = expectation_montecarlo(obs, spec, samples=40000, seed=11)
    assert est == est2 and se == se2
    est3, _ = expectation_montecarlo(obs, spec, samples=40000, seed=12)
    assert est3 != est
    assert RNG_NAME == "philox4x64"


def test_lattice_expectation_matches_sector_by_sector_sum():
    theory = TheorySpec(T2, CLOSED_PFORM, 2.0, degree=1,
                        r_squared=Fraction(7, 10))
    g1 = _form({((0, 0), COS): 0.8, ((1, 0), COS): 0.5}, cutoff=2.0)
    g2 = SpectralForm(T2, 1, 2.0,
                      {FormMode((0, 0), COS, (1,)): 0.4,
                       FormMode((0, 1), SIN, (1,)): 1.1}, validate=False)
    obs = PolynomialObservable([g1, g2], {(2, 0): 1.0, (1, 1): 0.5,
                                          (0, 2): -0.25, (1, 0): 2.0},
                               validate=False)
    c = 12.0
    got = maxwell_expectation(obs, theory, lattice_cutoff=c)

    # brute force: Gaussian moments with a per-sector harmonic mean shift
    r2 = float(theory.r_squared)
    lattice = HarmonicLattice(T2, 1, r2, cutoff=2.0)
    egens = [exact_part(g) for g in obs.generators]
    cov = tuple(tuple(to_complex(gi.pairing(gj)).real / (2.0 * r2)
                      for gj in egens) for gi in egens)
    base = GaussianSpec((0.0, 0.0), cov)
    hgens = lattice.generators()
    num, den = 0.0 + 0.0j, 0.0
    for m, action in lattice.elements(c):
        mu = [sum(m[d] * to_complex(h.pairing(g)) for d, h in enumerate(hgens))
              for g in obs.generators]
        w = math.exp(-action)
        num += w * to_complex(expectation_isserlis(obs, base.with_mean(mu)))
        den += w
    assert abs(to_complex(got.value) - num / den) <= 1e-12


def test_lattice_expectation_thread_count_invariance():
    theory = TheorySpec(T2, CLOSED_PFORM, 9.0, degree=1, r_squared=0.6)
    g = _form({((0, 0), COS): 1.0, ((1, 2), COS): 0.7}, cutoff=9.0)
    obs = PolynomialObservable([g], {(2,): 1.0, (4,): 0.1}, validate=False)
    one = maxwell_expectation(obs, theory, lattice_cutoff=60.0, threads=1)
    four = maxwell_expectation(obs, theory, lattice_cutoff=60.0, threads=4)
    assert one.value == four.value
    assert one.tail_bound == four.tail_bound


def test_lattice_cutoff_refinement_within_tail_bounds():
    theory = TheorySpec(T2, CLOSED_PFORM, 9.0, degree=1, r_squared=0.8)
    g = _form({((0, 0), COS): 1.2, ((2, 1), SIN): 0.4}, cutoff=9.0)
    obs = PolynomialObservable([g], {(2,): 1.0, (1,): 0.3}, validate=False)
    coarse = maxwell_expectation(obs, theory, lattice_cutoff=20.0)
    fine = maxwell_expectation(obs, theory, lattice_cutoff=80.0)
    drift = abs(to_complex(coarse.value) - to_complex(fine.value))
    assert drift <= coarse.tail_bound + fine.tail_bound


def test_lattice_warns_when_only_zero_sector_fits():
    theory = TheorySpec(T2, CLOSED_PFORM, 9.0, degree=1, r_squared=1.0)
    g = _form({((1, 2), COS): 1.0}, cutoff=9.0)
    obs = PolynomialObservable([g], {(2,): 1.0}, validate=False)
    first_action = 4.0 * math.pi  # r = 1
    low = maxwell_expectation(obs, theory, lattice_cutoff=first_action / 2)
    assert any("zero sector" in w for w in low.warnings)
    high = maxwell_expectation(obs, theory, lattice_cutoff=2 * first_action)
    assert not high.warnings


def test_result_record_fields():
    theory = TheorySpec(T2, CLOSED_PFORM, 9.0, degree=1, r_squared=1.0)
    g = _form({((1, 2), COS): 1.0}, cutoff=9.0)
    obs = PolynomialObservable([g], {(2,): 1.0}, validate=False)
    rec = maxwell_expectation(obs, theory, lattice_cutoff=30.0).to_dict()
    assert rec["method"] == "lattice"
    assert rec["mode_cutoff"] == 9.0 and rec["lattice_cutoff"] == 30.0
    assert set(rec["value"]) == {"im", "re"}
    assert rec["tail_bound"] >= 0.0
    assert rec["theory"]["variant"] == CLOSED_PFORM


def test_transform_integral_matches_dual_polynomial_pointwise():
    theory = TheorySpec(T2, PFORM, 9.0, degree=1, r_squared=Fraction(4, 5))
    x = _form({((1, 2), COS): Fraction(1), ((2, 1), SIN): Fraction(-2)})
    y = _form({((0, 1), COS): Fraction(3, 2)})
    obs = PolynomialObservable([x, y], {(2, 1): Fraction(1),
                                        (0, 3): Fraction(-1, 2),
                                        (1, 0): Fraction(2)}, validate=False)
    dual_obs, _ = fourier_dual(obs, theory)
    dual_field = _form({((1, 2), SIN): 0.7, ((2, 1), COS): -1.3,
                        ((0, 1), SIN): 0.4, ((1, 1), COS): 0.9})
    direct = to_complex(fourier_dual_integral(obs, theory, dual_field))
    via_poly = to_complex(dual_obs.evaluate(dual_field))
    assert abs(direct - via_poly) <= 1e-12 * max(1.0, abs(via_poly))


def test_transform_integral_fourth_power_many_points():
    import random
    rng = random.Random(31)
    theory = TheorySpec(T2, PFORM, 9.0, degree=1, r_squared=Fraction(1, 2))
    beta = _form({((1, 2), COS): Fraction(1)})
    obs = PolynomialObservable([beta], {(4,): Fraction(1)}, validate=False)
    dual_obs, _ = fourier_dual(obs, theory)
    pool = [((1, 2), COS), ((1, 2), SIN), ((2, 1), COS), ((0, 1), SIN)]
    for _ in range(20):
        field = _form({m: rng.uniform(-2, 2) for m in pool})
        direct = to_complex(fourier_dual_integral(obs, theory, field))
        via_poly = to_complex(dual_obs.evaluate(field))
        assert abs(direct - via_poly) <= 1e-10


def test_lattice_average_of_odd_harmonic_observable_vanishes():
    # the sector measure is even under lattice negation, so a purely
    # harmonic linear observable averages to zero
    theory = TheorySpec(T2, CLOSED_PFORM, 9.0, degree=1, r_squared=0.9)
    g = _form({((0, 0), COS): 1.0}, cutoff=9.0)
    obs = PolynomialObservable([g], {(1,): 1.0}, validate=False)
    res = maxwell_expectation(obs, theory, lattice_cutoff=50.0)
    assert abs(to_complex(res.value)) <= 1e-14


def test_covariance_guards():
    closed = TheorySpec(T2, CLOSED_PFORM, 9.0, degree=1, r_squared=1.0)
    g = _form({((0, 0), COS): 1.0, ((1, 2), COS): 1.0}, cutoff=9.0)
    with pytest.raises(MasslessSector):
        covariance_from_theory([g], closed)
    pform = TheorySpec(T2, PFORM, 9.0, degree=1, r_squared=1.0)
    with pytest.raises(VariantMismatch):
        maxwell_expectation(PolynomialObservable([g], {(1,): 1.0},
                                                 validate=False),
                            pform, lattice_cutoff=10.0)
