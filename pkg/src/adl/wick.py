"""Gaussian contraction engine and the duality transform on observables.

Expectations of polynomial observables in a free theory reduce to sums over
pairings of half-edges (one half-edge per factor of a linear observable).
The engine enumerates edge multisets between generator vertices with exact
multiplicities

    ways(e, m) = prod_i n_i! / ( prod_i m_i! * prod_{i<j} e_ij!
                                 * prod_i e_ii! 2^{e_ii} ),

where n_i is the number of half-edges at vertex i, e_ij the number of
propagator edges between i and j, and m_i the residual unpaired half-edges
(sources).  ``count_matchings`` recounts the same objects with the direct
lowest-index recursion over labelled half-edges as an independent
cross-check.

Propagators (edge weights) per theory variant:

    pform          <beta_i, beta_j> / (2 R^2)
    closed_pform   <E beta_i, E beta_j> / (2 R^2)   (E = exact-part projector;
                   smearings meeting the harmonic sector are rejected)
    scalar         (1/2) sum_m beta_i[m] beta_j[m] / q(m)

The duality transform of the free p-form theory sends each residual
half-edge to a dual generator with smearing *beta and source weight
i/(2 R^2); dual coupling rho^2 = 1/(4 R^2), dual degree n - p.  The inverse
transform uses source weight -i/(2 rho^2) and transports smearings through
the inverse star.  Composing the two is the identity on observables in
exact arithmetic: composite source weights multiply to 1 and the two
Gaussian contraction layers cancel.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .bv import CLOSED_PFORM, PFORM, SCALAR, TheorySpec
from .errors import (LiftRequired, MasslessSector, TooLarge, VariantMismatch)
from .exact import ExactComplex, is_exact, to_complex
from .geometry import (SpectralForm, exact_part, harmonic_part, hodge_star,
                       hodge_star_inverse)
from .observables import PolynomialObservable

#: half-edge budget per term; beyond this the pairing sum is refused
MAX_HALF_EDGES = 24


def _check_size(obs: PolynomialObservable):
    worst = max((sum(e) for e in obs.terms), default=0)
    if worst > MAX_HALF_EDGES:
        raise TooLarge(
            f"term of degree {worst} exceeds the pairing budget "
            f"{MAX_HALF_EDGES}")


def _observable_exact(obs: PolynomialObservable) -> bool:
    return (all(is_exact(c) for c in obs.terms.values())
            and all(all(is_exact(c) for c in g.coeff.values())
                    for g in obs.generators))


def _half_inverse(r_squared, exact: bool):
    if exact and is_exact(r_squared):
        return Fraction(1, 2) / Fraction(r_squared)
    return 1.0 / (2.0 * float(r_squared))


def propagator_matrix(generators, theory: TheorySpec, exact: bool | None = None):
    """Edge weights <beta_i, Q^{-1} beta_j> / 2 for the given theory."""
    gens = list(generators)
    for g in gens:
        theory.check_form(g)
    if exact is None:
        exact = all(all(is_exact(c) for c in g.coeff.values()) for g in gens)
    if theory.variant in (PFORM, CLOSED_PFORM):
        if theory.variant == CLOSED_PFORM:
            for g in gens:
                h = harmonic_part(g)
                scale = max((abs(to_complex(c)) for c in g.coeff.values()),
                            default=0.0)
                if not h.is_zero(1e-12 * max(1.0, scale)):
                    raise MasslessSector(
                        "smearing has a harmonic component; the closed-sector "
                        "propagator is undefined there")
            gens = [exact_part(g) for g in gens]
        w = _half_inverse(theory.r_squared, exact)
        return [[gi.pairing(gj) * w for gj in gens] for gi in gens]
    # scalar: diagonal quadratic form |k|^2 + mass_sign m^2 per mode
    half = Fraction(1, 2) if exact and is_exact(theory.mass) else 0.5
    out = []
    for gi in gens:
        row = []
        for gj in gens:
            acc = 0
            for mode, c in gi.coeff.items():
                d = gj.coeff.get(mode)
                if d is not None:
                    q = theory.q_eigenvalue(mode)
                    if exact and is_exact(q) and is_exact(c) and is_exact(d):
                        acc = acc + c * d * (Fraction(1) / Fraction(q))
                    else:
                        acc = acc + to_complex(c) * to_complex(d) / to_complex(q)
            row.append(acc * half)
        out.append(row)
    return out


# -- edge-multiset enumeration ----------------------------------------


def _contractions(counts, prop, allow_sources):
    """Yield (residual source vector, multiplicity, propagator weight)
    over all edge multisets compatible with the half-edge counts."""
    v = len(counts)
    base = 1
    for n in counts:
        base *= math.factorial(n)

    results = []

    def distribute(i, residual, denom, weight, sources):
        if i == v:
            results.append((tuple(sources), base // denom, weight))
            return
        r = residual[i]

        def later(j, rem, denom_j, weight_j):
            if j == v:
                # leftover rem splits into self-loops and sources
                max_loops = rem // 2
                for t in range(max_loops + 1):
                    m = rem - 2 * t
                    if m and not allow_sources:
                        continue
                    d2 = denom_j * math.factorial(t) * (2 ** t) * math.factorial(m)
                    w2 = weight_j
                    for _ in range(t):
                        w2 = w2 * prop(i, i)
                    sources.append(m)
                    distribute(i + 1, residual, d2, w2, sources)
                    sources.pop()
                return
            cap = min(rem, residual[j])
            for e in range(cap + 1):
                residual[j] -= e
                w2 = weight_j
                for _ in range(e):
                    w2 = w2 * prop(i, j)
                later(j + 1, rem - e, denom_j * math.factorial(e), w2)
                residual[j] += e

        later(i + 1, r, denom, weight)

    distribute(0, list(counts), 1, 1, [])
    return results


def expectation_diagrams(obs: PolynomialObservable, theory: TheorySpec):
    """Gaussian expectation of a polynomial observable as a weighted sum
    over perfect pairings (odd-degree terms vanish)."""
    _check_size(obs)
    exact = _observable_exact(obs) and (
        is_exact(theory.r_squared) if theory.variant != SCALAR
        else is_exact(theory.mass))
    prop_m = propagator_matrix(obs.generators, theory, exact=exact)

    def prop(i, j):
        return prop_m[i][j]

    total = 0
    for exps, c in obs.terms.items():
        if sum(exps) % 2:
            continue
        for _, mult, weight in _contractions(exps, prop, allow_sources=False):
            total = total + c * mult * weight
    return total


def count_matchings(counts, allow_sources: bool = False) -> int:
    """Number of (partial) pairings of labelled half-edges, by the direct
    lowest-index recursion; cross-checks the multiset enumeration."""
    if sum(counts) > 2 * MAX_HALF_EDGES:
        raise TooLarge(f"half-edge total {sum(counts)} too large to count")
    counts = tuple(int(c) for c in counts)

    @lru_cache(maxsize=None)
    def rec(state):
        for i, ci in enumerate(state):
            if ci:
                break
        else:
            return 1
        total = 0
        if allow_sources:
            total += rec(state[:i] + (ci - 1,) + state[i + 1:])
        if ci >= 2:
            total += (ci - 1) * rec(state[:i] + (ci - 2,) + state[i + 1:])
        for j in range(i + 1, len(state)):
            if state[j]:
                total += state[j] * rec(
                    state[:i] + (ci - 1,) + state[i + 1:j]
                    + (state[j] - 1,) + state[j + 1:])
        return total

    return rec(counts)


# -- duality transform ------------------------------------------------


def _source_weight(theory: TheorySpec, inverse: bool, exact: bool):
    """i/(2 R^2) forward, -i/(2 rho^2) on the way back."""
    w = _half_inverse(theory.r_squared, exact)
    if exact and is_exact(w):
        return ExactComplex(0, -w if inverse else w)
    return complex(0.0, -w if inverse else w)


def fourier_dual(obs: PolynomialObservable, theory: TheorySpec,
                 inverse: bool = False):
    """Duality transform of a polynomial observable of the free p-form
    theory.  Returns (dual observable, dual theory).

    Each term contracts pairs of half-edges with the propagator and sends
    every residual half-edge to a dual generator (smearing *beta forward,
    inverse star backward).  ``inverse`` undoes a forward transform exactly.
    """
    if theory.variant == CLOSED_PFORM:
        raise LiftRequired(
            "closed-sector observables must be lifted to the free p-form "
            "theory before dualising")
    if theory.variant != PFORM:
        raise VariantMismatch(f"duality transform needs a p-form theory, "
                              f"got {theory.variant}")
    _check_size(obs)
    for g in obs.generators:
        theory.check_form(g)
    exact = _observable_exact(obs) and is_exact(theory.r_squared)
    prop_m = propagator_matrix(obs.generators, theory, exact=exact)
    src = _source_weight(theory, inverse, exact)
    transport = hodge_star_inverse if inverse else hodge_star
    dual_gens = [transport(g) for g in obs.generators]
    dual_theory = theory.dual()

    def prop(i, j):
        return prop_m[i][j]

    terms: dict = {}
    for exps, c in obs.terms.items():
        for m, mult, weight in _contractions(exps, prop, allow_sources=True):
            v = c * mult * weight
            for _ in range(sum(m)):
                v = v * src
            terms[m] = terms.get(m, 0) + v
    return (PolynomialObservable(dual_gens, terms, validate=False),
            dual_theory)


def inverse_fourier_dual(obs: PolynomialObservable, theory: TheorySpec):
    return fourier_dual(obs, theory, inverse=True)
