"""Spectral exterior calculus checked against an independent oracle:
periodic grid quadrature, which is exact for trigonometric polynomials
once the grid outresolves every retained wavevector."""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from adl.errors import DegreeMismatch, DegreeOutOfRange
from adl.geometry import (COS, SIN, FormMode, HarmonicLattice, ModeBasis,
                          SpectralForm, Torus, canonical_wavevector,
                          codifferential, evaluate_components,
                          exterior_derivative, harmonic_part, hodge_decompose,
                          hodge_star, hodge_star_inverse,
                          integrate_over_cycle, laplacian, mode_norm_constant,
                          mode_values)

CUT = 9.0


def _grid(n, samples):
    axes = [np.arange(samples) * (2 * math.pi / samples) for _ in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    weight = (2 * math.pi / samples) ** n
    return pts, weight


def _random_form(rng, torus, degree, n_modes=4):
    modes = ModeBasis(torus, CUT).modes(degree)
    coeff = {m: rng.uniform(-1, 1)
             for m in rng.sample(modes, min(n_modes, len(modes)))}
    return SpectralForm(torus, degree, CUT, coeff, validate=False)


def test_mode_normalisation_constants():
    for n in (2, 3, 4):
        assert mode_norm_constant(n, (0,) * n) == pytest.approx(
            (2 * math.pi) ** (-n / 2))
        assert mode_norm_constant(n, (1,) + (0,) * (n - 1)) == pytest.approx(
            math.sqrt(2) * (2 * math.pi) ** (-n / 2))


def test_wavevector_canonicalisation_rules():
    assert canonical_wavevector((0, 0)) == ((0, 0), 1)
    assert canonical_wavevector((2, -1)) == ((2, -1), 1)
    k, sign = canonical_wavevector((-2, 1))
    assert k == (2, -1) and sign == -1
    k, sign = canonical_wavevector((0, -3, 1))
    assert k == (0, 3, -1) and sign == -1


def test_scalar_modes_are_orthonormal_by_quadrature():
    torus = Torus(2)
    modes = ModeBasis(torus, CUT).modes(0)
    pts, weight = _grid(2, 8)  # 8 > 2 * kmax = 6, so sums are exact
    vals = np.stack([mode_values(m, 2, pts) for m in modes])
    gram = vals @ vals.T * weight
    assert np.max(np.abs(gram - np.eye(len(modes)))) < 1e-12


def test_pairing_matches_quadrature_on_one_forms():
    rng = random.Random(11)
    torus = Torus(2)
    pts, weight = _grid(2, 8)
    for _ in range(5):
        a = _random_form(rng, torus, 1)
        b = _random_form(rng, torus, 1)
        va = evaluate_components(a, pts)
        vb = evaluate_components(b, pts)
        num = sum((va.get(idx, 0.0) * vb.get(idx, 0.0)).sum() * weight
                  for idx in {(0,), (1,)})
        assert complex(a.pairing(b)) == pytest.approx(num, abs=1e-12)


def test_exterior_derivative_matches_analytic_gradient():
    # d applied to single scalar modes, checked pointwise against the
    # hand-written chain rule for cos(k.x) and sin(k.x)
    torus = Torus(3)
    pts, _ = _grid(3, 6)
    for k, phase in (((1, 2, 0), COS), ((2, 0, -1), SIN), ((0, 1, 1), COS)):
        f = SpectralForm(torus, 0, CUT, {FormMode(k, phase, ()): 1.0},
                         validate=False)
        df = evaluate_components(exterior_derivative(f), pts)
        arg = pts @ np.asarray(k, dtype=float)
        norm = mode_norm_constant(3, k)
        base = -np.sin(arg) if phase == COS else np.cos(arg)
        for j in range(3):
            expect = norm * k[j] * base
            got = df.get((j,), np.zeros(len(pts)))
            assert np.max(np.abs(got - expect)) < 1e-12


def test_wedge_pairing_identifies_hodge_star():
    # <a, b> = integral of a ^ *b fixes the star's sign and scaling; on T^2
    # both a and *b are 1-forms and a ^ *b = (a0 c1 - a1 c0) dx0^dx1
    rng = random.Random(12)
    torus = Torus(2)
    pts, weight = _grid(2, 8)
    zeros = np.zeros(len(pts))
    for _ in range(5):
        a = _random_form(rng, torus, 1)
        b = _random_form(rng, torus, 1)
        va = evaluate_components(a, pts)
        c = evaluate_components(hodge_star(b), pts)
        num = ((va.get((0,), zeros) * c.get((1,), zeros)
                - va.get((1,), zeros) * c.get((0,), zeros)).sum()) * weight
        assert complex(a.pairing(b)) == pytest.approx(num, abs=1e-12)


def test_star_inverse_and_double_star_signs():
    rng = random.Random(13)
    for n in (2, 3, 4):
        torus = Torus(n)
        for p in range(n + 1):
            a = _random_form(rng, torus, p, n_modes=3)
            back = hodge_star_inverse(hodge_star(a))
            assert (back - a).is_zero(1e-15)
            sign = (-1) ** (p * (n - p))
            twice = hodge_star(hodge_star(a))
            assert (twice - a * sign).is_zero(1e-15)


def test_hodge_parts_have_defining_memberships():
    # exact parts are d-closed, coexact parts are delta-closed, harmonic
    # parts are Laplace-null -- membership, not just orthogonality
    rng = random.Random(14)
    for n in (2, 3):
        torus = Torus(n)
        for p in range(n + 1):
            a = _random_form(rng, torus, p, n_modes=5)
            parts = hodge_decompose(a)
            if p < n:
                assert exterior_derivative(parts.exact).is_zero(1e-12)
            if p > 0:
                assert codifferential(parts.coexact).is_zero(1e-12)
            assert laplacian(parts.harmonic).is_zero(1e-12)
            assert (parts.exact + parts.coexact + parts.harmonic
                    - a).is_zero(1e-12)


def test_harmonic_part_is_the_constant_mode_content():
    torus = Torus(2)
    zero = FormMode((0, 0), COS, (0,))
    wave = FormMode((1, 0), COS, (0,))
    a = SpectralForm(torus, 1, CUT, {zero: 2.5, wave: -1.0}, validate=False)
    h = harmonic_part(a)
    assert h.coeff == {zero: 2.5}


def test_cycle_integration_against_parametric_quadrature():
    torus = Torus(2)
    form = SpectralForm(torus, 1, CUT, {
        FormMode((0, 2), COS, (0,)): 0.7,
        FormMode((1, 0), COS, (0,)): 1.3,   # oscillates along the cycle
        FormMode((0, 1), SIN, (1,)): -0.4,  # wrong component
    }, validate=False)
    offset = (0.0, 0.9)
    got = integrate_over_cycle(form, (0,), offset=offset)
    ts = np.arange(512) * (2 * math.pi / 512)
    pts = np.stack([ts, np.full_like(ts, offset[1])], axis=-1)
    comps = evaluate_components(form, pts)
    num = comps.get((0,), np.zeros(len(ts))).sum() * (2 * math.pi / 512)
    assert complex(got) == pytest.approx(num, abs=1e-12)


def test_harmonic_lattice_geometry():
    for n, p, r in ((2, 1, 1.0), (3, 1, 0.7), (3, 2, 1.3)):
        lattice = HarmonicLattice(Torus(n), p, r * r, cutoff=CUT)
        assert lattice.spacing == pytest.approx(2.0 * math.sqrt(math.pi) * r)
        assert lattice.rank == math.comb(n, p)
        m = tuple(range(1, lattice.rank + 1))
        expected = 4.0 * math.pi * r ** 4 * sum(c * c for c in m)
        assert lattice.action_of(m) == pytest.approx(expected)
        # enumeration matches a brute-force box scan
        max_action = 60.0
        bound = int(math.isqrt(int(max_action / (4 * math.pi * r ** 4)))) + 1
        brute = sorted(
            ms for ms in itertools.product(range(-bound, bound + 1),
                                           repeat=lattice.rank)
            if 4.0 * math.pi * r ** 4 * sum(c * c for c in ms) <= max_action)
        got = [ms for ms, _ in lattice.elements(max_action)]
        assert got == brute


def test_harmonic_lattice_periods_are_quantised():
    for n, p, r in ((2, 1, 1.0), (3, 2, 0.8)):
        lattice = HarmonicLattice(Torus(n), p, r * r, cutoff=CUT)
        unit = 2.0 * math.sqrt(math.pi) * r * (2 * math.pi) ** (p - n / 2)
        for ms, _ in lattice.elements(30.0):
            form = lattice.element_form(ms)
            for direction, m in zip(lattice.directions(), ms):
                period = complex(integrate_over_cycle(form, direction))
                assert period == pytest.approx(m * unit, abs=1e-12)


def test_form_validation_rejects_bad_data():
    torus = Torus(2)
    with pytest.raises(DegreeOutOfRange):
        SpectralForm(torus, 3, CUT, {})
    with pytest.raises(ValueError):
        Torus(5)
    with pytest.raises(ValueError):
        # mode beyond the stated cutoff
        SpectralForm(torus, 0, 1.0, {FormMode((2, 0), COS, ()): 1.0})
    with pytest.raises(DegreeMismatch):
        integrate_over_cycle(
            SpectralForm(torus, 1, CUT, {}, validate=False), (0, 1))


def test_serialisation_roundtrip_drops_dust():
    torus = Torus(2)
    a = SpectralForm(torus, 1, CUT, {
        FormMode((1, 2), COS, (0,)): 0.5,
        FormMode((2, 1), SIN, (1,)): 1e-16,   # below the write threshold
    }, validate=False)
    data = a.to_dict()
    assert len(data["modes"]) == 1
    back = SpectralForm.from_dict(data)
    assert back.coeff == {FormMode((1, 2), COS, (0,)): 0.5}
    assert back.degree == 1 and back.torus == torus
