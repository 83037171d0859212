"""Polynomial observable algebra: evaluation is the oracle (two expressions
are equal iff they agree on random field configurations), plus structural
checks for canonicalisation and serialisation."""

import json
import random
from fractions import Fraction

import pytest

from adl.geometry import COS, SIN, FormMode, ModeBasis, SpectralForm, Torus
from adl.observables import (PolynomialObservable, canonicalise,
                             restrict_to_closed, star_transport,
                             star_inverse_transport, support_orthogonal)

CUT = 9.0
T2 = Torus(2)


def _mode_form(k, phase, idx, c=1.0):
    return SpectralForm(T2, len(idx), CUT, {FormMode(k, phase, idx): c},
                        validate=False)


def _random_field(rng, degree):
    modes = ModeBasis(T2, CUT).modes(degree)
    coeff = {m: rng.uniform(-2, 2) for m in rng.sample(modes, 6)}
    return SpectralForm(T2, degree, CUT, coeff, validate=False)


def _random_obs(rng, gens):
    terms = {}
    for _ in range(rng.randint(1, 4)):
        exps = tuple(rng.randint(0, 3) for _ in gens)
        terms[exps] = rng.uniform(-2, 2)
    return PolynomialObservable(gens, terms)


def test_ring_laws_via_evaluation():
    rng = random.Random(21)
    gens = tuple(_random_field(rng, 1) for _ in range(3))
    fields = [_random_field(rng, 1) for _ in range(4)]
    for _ in range(10):
        p = _random_obs(rng, gens)
        q = _random_obs(rng, gens)
        r = _random_obs(rng, gens)
        for a in fields:
            lhs = complex(((p + q) * r).evaluate(a))
            rhs = complex((p * r).evaluate(a) + (q * r).evaluate(a))
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
            assert complex((p ** 3).evaluate(a)) == pytest.approx(
                complex((p * p * p).evaluate(a)), rel=1e-12)
            assert complex(p.scale(-1).evaluate(a)) == pytest.approx(
                -complex(p.evaluate(a)), rel=1e-12)


def test_product_merges_shared_generators():
    beta = _mode_form((1, 2), COS, (0,))
    gamma = _mode_form((2, 1), SIN, (0,))
    p = PolynomialObservable((beta,), {(2,): 1.0})
    q = PolynomialObservable((beta, gamma), {(1, 1): 3.0})
    prod = p * q
    assert len(prod.generators) == 2
    assert prod.terms == {(3, 1): 3.0}


def test_canonical_rewrites_dependent_generators():
    # generators beta and 2*beta span a rank-one space; the canonical form
    # keeps the first and rewrites powers of the second multinomially
    beta = _mode_form((1, 2), COS, (0,), Fraction(1))
    double = beta * 2
    p = PolynomialObservable((beta, double),
                            {(1, 0): Fraction(1), (0, 1): Fraction(5),
                             (0, 2): Fraction(1)})
    canon = p.canonical()
    assert len(canon.generators) == 1
    assert canon.generators[0] == beta
    # x + 5(2x) + (2x)^2 = 11 x + 4 x^2
    assert canon.terms == {(1,): Fraction(11), (2,): Fraction(4)}


def test_canonical_preserves_evaluation_in_float_arithmetic():
    rng = random.Random(22)
    beta = _random_field(rng, 1)
    gamma = _random_field(rng, 1)
    mix = beta * 0.6 + gamma * -1.1
    p = PolynomialObservable((beta, gamma, mix),
                            {(1, 1, 1): 0.5, (0, 0, 2): 1.25, (2, 0, 0): -0.3})
    canon = p.canonical()
    assert len(canon.generators) == 2  # mix is dependent
    for _ in range(4):
        a = _random_field(rng, 1)
        assert complex(canon.evaluate(a)) == pytest.approx(
            complex(p.evaluate(a)), rel=1e-10, abs=1e-10)


def test_canonical_drops_unused_generators():
    beta = _mode_form((1, 2), COS, (0,))
    gamma = _mode_form((2, 1), SIN, (0,))
    p = PolynomialObservable((beta, gamma), {(2, 0): 1.0, (0, 0): 4.0})
    canon = p.canonical()
    assert len(canon.generators) == 1
    assert canon.generators[0] == beta


def test_canonicalise_factor_list_entry_point():
    beta = _mode_form((1, 2), COS, (0,), Fraction(1))
    product = canonicalise([(beta, 2), (beta * 3, 1)])
    assert len(product.generators) == 1
    # x^2 * (3x) = 3 x^3
    assert product.terms == {(3,): Fraction(3)}


def test_restriction_removes_coexact_content():
    from adl.geometry import closed_part
    rng = random.Random(23)
    gens = tuple(_random_field(rng, 1) for _ in range(2))
    p = PolynomialObservable(gens, {(1, 1): 2.0, (2, 0): -1.0})
    restricted = restrict_to_closed(p)
    for g, rg in zip(gens, restricted.generators):
        assert (rg - closed_part(g)).is_zero(1e-15)
    assert restricted.terms == p.terms


def test_star_transport_roundtrip_is_exact():
    rng = random.Random(24)
    gens = tuple(_random_field(rng, 1).as_exact() for _ in range(2))
    p = PolynomialObservable(gens, {(2, 1): Fraction(3, 7)})
    back = star_inverse_transport(star_transport(p))
    assert len(back.generators) == len(p.generators)
    for g, bg in zip(p.generators, back.generators):
        assert (bg - g).is_zero(0.0)
    assert back.terms == p.terms


def test_support_orthogonality_detection():
    a = _mode_form((1, 2), COS, (0,))
    b = _mode_form((2, 1), SIN, (1,))
    pa = PolynomialObservable((a,), {(2,): 1.0})
    pb = PolynomialObservable((b,), {(1,): 1.0})
    assert support_orthogonal(pa, pb)
    assert not support_orthogonal(pa, pa)
    # constants have empty support
    one = PolynomialObservable.constant(1.0)
    assert support_orthogonal(pa, one)


def test_serialisation_roundtrip_bytes_are_stable():
    rng = random.Random(25)
    gens = tuple(_random_field(rng, 1) for _ in range(2))
    p = PolynomialObservable(gens, {(2, 1): 0.5 + 0.25j, (0, 0): -3.0})
    once = json.dumps(p.to_dict(), sort_keys=True)
    back = PolynomialObservable.from_dict(json.loads(once))
    assert json.dumps(back.to_dict(), sort_keys=True) == once


def test_serialisation_keeps_wide_rationals_exact():
    beta = _mode_form((1, 2), COS, (0,), Fraction(1))
    wide = Fraction(2 ** 70 + 1, 2 ** 71)
    p = PolynomialObservable((beta,), {(2,): wide})
    back = PolynomialObservable.from_dict(
        json.loads(json.dumps(p.to_dict())))
    assert back.terms[(2,)] == wide  # float fields alone would round


def test_validation_rejects_mismatched_terms():
    beta = _mode_form((1, 2), COS, (0,))
    with pytest.raises(ValueError):
        PolynomialObservable((beta,), {(1, 2): 1.0})
    with pytest.raises(ValueError):
        PolynomialObservable((beta,), {(-1,): 1.0})
