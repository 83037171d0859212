"""Graded observables, the shifted Poisson bracket, and the quantum,
classical and total differentials, checked on hand-derived small cases in
exact arithmetic."""

from fractions import Fraction

import pytest

from adl.bv import (CLOSED_PFORM, PFORM, SCALAR, GradedObservable,
                    TheorySpec, classical_bv, is_gauge_invariant,
                    poisson_bracket, quantum_bv, total_bv)
from adl.errors import (DegreeOutOfRange, MasslessMode,
                        NotImplementedInCalculus, VariantMismatch)
from adl.geometry import (COS, SIN, FormMode, SpectralForm, Torus,
                          codifferential, exterior_derivative)
from adl.observables import PolynomialObservable

CUT = 9.0
T2 = Torus(2)


def _field(k, phase, idx, c=Fraction(1)):
    return SpectralForm(T2, len(idx), CUT, {FormMode(k, phase, idx): c},
                        validate=False)


def _obs(form):
    return GradedObservable.from_polynomial(
        PolynomialObservable.monomial(form, 1))


def test_theory_validation():
    with pytest.raises(VariantMismatch):
        TheorySpec(T2, "weird", CUT)
    with pytest.raises(DegreeOutOfRange):
        TheorySpec(T2, PFORM, CUT, degree=3, r_squared=1)
    with pytest.raises(ValueError):
        TheorySpec(T2, PFORM, CUT, degree=1, r_squared=0)
    with pytest.raises(ValueError):
        TheorySpec(T2, SCALAR, CUT)
    with pytest.raises(MasslessMode):
        # -m^2 cancels the |k|^2 = 4 eigenvalue
        TheorySpec(T2, SCALAR, CUT, mass=2, mass_sign=-1)
    # massive scalar with the default sign is fine at any retained mode
    TheorySpec(T2, SCALAR, CUT, mass=Fraction(3, 2))


def test_dual_theory_is_an_involution():
    theory = TheorySpec(T2, PFORM, CUT, degree=1, r_squared=Fraction(9, 4))
    dual = theory.dual()
    assert dual.degree == 1 and dual.r_squared == Fraction(1, 9)
    assert dual.dual() == theory
    with pytest.raises(VariantMismatch):
        theory.to_closed().dual()


def test_antifields_anticommute_and_square_to_zero():
    chi1 = _field((1, 2), COS, (0,))
    chi2 = _field((2, 1), SIN, (0,))
    v1 = GradedObservable.antifield(chi1)
    v2 = GradedObservable.antifield(chi2)
    assert v1 * v2 == (v2 * v1).scale(-1)
    assert v1 * v1 == GradedObservable.constant(0)


def test_bracket_elementary_pairing_value():
    chi = _field((1, 2), COS, (0,), Fraction(3))
    beta = _field((1, 2), COS, (0,), Fraction(1, 2))
    v = GradedObservable.antifield(chi)
    o = _obs(beta)
    expected = GradedObservable.constant(Fraction(3, 2))
    assert poisson_bracket(v, o) == expected
    # the bracket is graded symmetric: both orders give + <chi, beta>
    assert poisson_bracket(o, v) == expected


def test_bracket_leibniz_on_a_product():
    chi = _field((1, 2), COS, (0,), Fraction(2))
    beta = _field((1, 2), COS, (0,), Fraction(1))
    v = GradedObservable.antifield(chi)
    o = _obs(beta)
    # {v, O^2} = 2 <chi, beta> O
    got = poisson_bracket(v, o * o)
    assert got == o.scale(Fraction(4))


def test_bracket_guards_deep_antifield_terms():
    chis = [_field((1, 2), COS, (0,)), _field((2, 1), COS, (0,)),
            _field((0, 1), SIN, (0,))]
    vs = [GradedObservable.antifield(c) for c in chis]
    deep = vs[0] * vs[1] * vs[2]
    with pytest.raises(NotImplementedInCalculus):
        poisson_bracket(deep, _obs(chis[0]))


def test_quantum_differential_contracts_pairs():
    chi = _field((1, 2), COS, (0,), Fraction(2))
    beta = _field((1, 2), COS, (0,), Fraction(5))
    v = GradedObservable.antifield(chi)
    o = _obs(beta)
    # D(v O) = <chi, beta> and D(v O^2) = 2 <chi, beta> O
    assert quantum_bv(v * o) == GradedObservable.constant(Fraction(10))
    assert quantum_bv(v * o * o) == o.scale(Fraction(20))
    assert quantum_bv(o) == GradedObservable.constant(0)


def test_classical_differential_is_minus_twice_q():
    chi = _field((1, 2), COS, (0,))
    theory = TheorySpec(T2, PFORM, CUT, degree=1, r_squared=Fraction(3, 2))
    v = GradedObservable.antifield(chi)
    got = classical_bv(v, theory)
    expected = GradedObservable.from_polynomial(
        PolynomialObservable.monomial(chi * Fraction(-3), 1))
    assert got == expected


def test_total_differential_squares_to_zero_explicit():
    chi = _field((1, 2), COS, (0,))
    beta = _field((2, 1), SIN, (0,))
    theory = TheorySpec(T2, PFORM, CUT, degree=1, r_squared=Fraction(1, 2))
    w = GradedObservable.antifield(chi) * _obs(beta) * _obs(beta)
    once = total_bv(w, theory)
    assert total_bv(once, theory) == GradedObservable.constant(0)


def test_scalar_theory_uses_laplace_plus_mass():
    phi = _field((1, 2), COS, ())
    theory = TheorySpec(T2, SCALAR, CUT, mass=Fraction(3, 2))
    got = theory.apply_q(phi)
    # (|k|^2 + m^2) phi with |k|^2 = 5
    assert (got - phi * Fraction(29, 4)).is_zero(0.0)
    tachyonic = TheorySpec(T2, SCALAR, CUT, mass=Fraction(3, 2),
                           mass_sign=-1)
    assert (tachyonic.apply_q(phi) - phi * Fraction(11, 4)).is_zero(0.0)


def test_closed_variant_applies_q_to_closed_part_only():
    coexact = codifferential(_field((1, 2), COS, (0, 1)))
    exact = exterior_derivative(_field((1, 2), COS, ()))
    theory = TheorySpec(T2, CLOSED_PFORM, CUT, degree=1, r_squared=Fraction(2))
    assert theory.apply_q(coexact).is_zero(0.0)
    assert (theory.apply_q(exact) - exact * Fraction(2)).is_zero(0.0)


def test_gauge_invariance_detects_coexact_content():
    exact = exterior_derivative(_field((1, 2), COS, ()))
    coexact = codifferential(_field((1, 2), COS, (0, 1)))
    assert is_gauge_invariant(_obs(exact))
    assert not is_gauge_invariant(_obs(exact + coexact))


def test_field_part_strips_antifield_terms():
    chi = _field((1, 2), COS, (0,))
    beta = _field((2, 1), SIN, (0,))
    w = GradedObservable.antifield(chi) * _obs(beta) + _obs(beta)
    fp = w.field_part()
    assert fp.terms == {(1,): Fraction(1)}
