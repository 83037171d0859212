"""Verification suites shared by the test suite and the command line tool.

Every suite returns a list of row dicts

    {"suite": ..., "check": ..., "value": ..., "tolerance": ..., "passed": ...}

where ``value`` is a discrepancy measure (maximal absolute defect, relative
error, or failure count) and ``passed`` is ``value <= tolerance``.  Suites
accept keyword parameters so the command line tool can run them at reduced
cost while the top-level test gate pins the full-scale settings.
"""

from __future__ import annotations

import inspect
import itertools
import math
import random
from fractions import Fraction

import numpy as np

from .bv import (CLOSED_PFORM, PFORM, SCALAR, GradedObservable, TheorySpec,
                 poisson_bracket, quantum_bv, total_bv)
from .exact import ExactComplex, scalar_is_zero, to_complex
from .geometry import (COS, SIN, FormMode, ModeBasis, SpectralForm, Torus,
                       codifferential, exterior_derivative, hodge_decompose,
                       hodge_star, laplacian, mode_norm_constant)
from .observables import PolynomialObservable, restrict_to_closed, support_orthogonal
from .oracle import maxwell_expectation
from .wick import expectation_diagrams, fourier_dual
from .wilson import (dual_exponential, expectation_exponential,
                     smear_coordinate_cycle, wilson_observable)


def _row(suite: str, check: str, value, tolerance: float) -> dict:
    value = float(value)
    return {"suite": suite, "check": check, "value": value,
            "tolerance": float(tolerance), "passed": value <= tolerance}


def _max_abs_coeff(form_or_graded) -> float:
    if hasattr(form_or_graded, "coeff"):
        vals = form_or_graded.coeff.values()
    else:
        vals = form_or_graded.terms.values()
    return max((abs(to_complex(c)) for c in vals), default=0.0)


# -- exterior calculus over the full truncated basis -------------------


def geometry_suite(dims=(2, 3), cutoff=64.0, tolerance=1e-12) -> list[dict]:
    """Identities of d, d*, star, Laplacian and the Hodge split, checked on
    every basis mode of every degree; adjointness via operator transpose
    equality over the orthonormal basis."""
    rows = []
    for n in dims:
        torus = Torus(n)
        basis = ModeBasis(torus, cutoff)
        modes_by_p = {p: basis.modes(p) for p in range(n + 1)}

        def unit(mode):
            return SpectralForm(torus, len(mode.idx), cutoff, {mode: 1},
                                validate=False)

        dd = 0.0
        deltadelta = 0.0
        adj = 0.0
        star2 = 0.0
        orth = 0.0
        recomp = 0.0
        commd = 0.0
        commdelta = 0.0
        commstar = 0.0
        for p in range(n + 1):
            d_mat: dict = {}
            for mode in modes_by_p[p]:
                f = unit(mode)
                if p < n:
                    df = exterior_derivative(f)
                    for om, c in df.coeff.items():
                        d_mat[(om, mode)] = c
                    if p < n - 1:
                        dd = max(dd, _max_abs_coeff(exterior_derivative(df)))
                if p > 0:
                    cf = codifferential(f)
                    if p > 1:
                        deltadelta = max(deltadelta,
                                         _max_abs_coeff(codifferential(cf)))
                # double star sign
                sign = -1 if (p * (n - p)) % 2 else 1
                ss = hodge_star(hodge_star(f)) - f * sign
                star2 = max(star2, _max_abs_coeff(ss))
                # Hodge split
                parts = hodge_decompose(f)
                for a, b in itertools.combinations(parts, 2):
                    orth = max(orth, abs(to_complex(a.pairing(b))))
                resid = parts.exact + parts.coexact + parts.harmonic - f
                recomp = max(recomp, _max_abs_coeff(resid))
                # Laplacian commutation
                lf = laplacian(f)
                if p < n:
                    commd = max(commd, _max_abs_coeff(
                        exterior_derivative(lf) - laplacian(exterior_derivative(f))))
                if p > 0:
                    commdelta = max(commdelta, _max_abs_coeff(
                        codifferential(lf) - laplacian(codifferential(f))))
                commstar = max(commstar, _max_abs_coeff(
                    hodge_star(lf) - laplacian(hodge_star(f))))
            if p < n:
                # adjointness: matrix of d on degree p vs transpose of the
                # matrix of d* on degree p+1
                delta_mat: dict = {}
                for mode in modes_by_p[p + 1]:
                    cf = codifferential(unit(mode))
                    for om, c in cf.coeff.items():
                        delta_mat[(om, mode)] = c
                keys = set(d_mat) | {(b, a) for (a, b) in delta_mat}
                for (om, im) in keys:
                    lhs = d_mat.get((om, im), 0)
                    rhs = delta_mat.get((im, om), 0)
                    adj = max(adj, abs(to_complex(lhs - rhs)))
        label = f"T^{n}"
        rows.append(_row("geometry", f"d_squared_zero[{label}]", dd, tolerance))
        rows.append(_row("geometry", f"codifferential_squared_zero[{label}]",
                         deltadelta, tolerance))
        rows.append(_row("geometry", f"adjointness_transpose[{label}]", adj,
                         tolerance))
        rows.append(_row("geometry", f"double_star_sign[{label}]", star2,
                         tolerance))
        rows.append(_row("geometry", f"hodge_orthogonality[{label}]", orth,
                         tolerance))
        rows.append(_row("geometry", f"hodge_recomposition[{label}]", recomp,
                         tolerance))
        rows.append(_row("geometry", f"laplacian_commutes_d[{label}]", commd,
                         tolerance))
        rows.append(_row("geometry", f"laplacian_commutes_codifferential"
                         f"[{label}]", commdelta, tolerance))
        rows.append(_row("geometry", f"laplacian_commutes_star[{label}]",
                         commstar, tolerance))
    return rows


# -- random exact ingredients -----------------------------------------


def _random_exact_form(rng: random.Random, torus: Torus, degree: int, cutoff,
                       n_modes: int = 3) -> SpectralForm:
    modes = ModeBasis(torus, cutoff).modes(degree)
    coeff = {}
    for mode in rng.sample(modes, min(n_modes, len(modes))):
        c = Fraction(rng.randint(-4, 4), rng.randint(1, 4))
        if c:
            coeff[mode] = c
    if not coeff:
        coeff[modes[rng.randrange(len(modes))]] = Fraction(1)
    return SpectralForm(torus, degree, cutoff, coeff, validate=False)


def _random_theory(rng: random.Random, torus: Torus, degree: int, cutoff,
                   allow_scalar: bool = False) -> TheorySpec:
    if allow_scalar and rng.random() < 0.3:
        mass = Fraction(rng.randint(1, 3), rng.randint(1, 2))
        return TheorySpec(torus, SCALAR, cutoff, mass=mass)
    r2 = Fraction(rng.randint(1, 4), rng.randint(1, 4))
    return TheorySpec(torus, PFORM, cutoff, degree=degree, r_squared=r2)


# -- graded complex ----------------------------------------------------


def bd_suite(seed=20240, rounds=40, max_degree=6, tolerance=0.0) -> list[dict]:
    """Bracket rules, the bracket/contraction compatibility identity, and
    nilpotency of the quantum and total differentials, in exact arithmetic
    on random graded observables up to the given total degree."""
    rng = random.Random(seed)
    cutoff = 9
    elementary = 0.0
    two_term = 0.0
    bd = 0.0
    d_sq = 0.0
    total_sq = 0.0
    for _ in range(rounds):
        n = rng.choice((2, 3))
        torus = Torus(n)
        p = rng.randrange(0, n + 1)
        theory = _random_theory(rng, torus, p, cutoff, allow_scalar=True)
        p_eff = theory.degree
        chi = [_random_exact_form(rng, torus, p_eff, cutoff) for _ in range(2)]
        beta = [_random_exact_form(rng, torus, p_eff, cutoff) for _ in range(3)]
        obs = [GradedObservable.from_polynomial(
            PolynomialObservable.monomial(b, 1)) for b in beta]
        anti = [GradedObservable.antifield(c) for c in chi]

        # {v(chi), O(beta)} = <chi, beta> both ways round
        br = poisson_bracket(anti[0], obs[0])
        g = chi[0].pairing(beta[0])
        defect = br - GradedObservable.constant(g)
        elementary = max(elementary, _max_abs_coeff(defect))
        defect = poisson_bracket(obs[0], anti[0]) - GradedObservable.constant(g)
        elementary = max(elementary, _max_abs_coeff(defect))

        # {v1 F1, v2 F2} = v2 dF2(chi1) F1 - v1 dF1(chi2) F2 on monomials
        e1 = rng.randint(1, 2)
        e2 = rng.randint(1, 2)
        f1 = obs[0]
        for _ in range(e1 - 1):
            f1 = f1 * obs[0]
        f2 = obs[1]
        for _ in range(e2 - 1):
            f2 = f2 * obs[1]
        a_g = anti[0] * f1
        b_g = anti[1] * f2
        lhs = poisson_bracket(a_g, b_g)
        df2_chi1 = e2 * chi[0].pairing(beta[1])
        df1_chi2 = e1 * chi[1].pairing(beta[0])
        part1 = (anti[1] * f1 * _power(obs[1], e2 - 1)).scale(df2_chi1)
        part2 = (anti[0] * _power(obs[0], e1 - 1) * f2).scale(df1_chi2)
        two_term = max(two_term, _max_abs_coeff(lhs - part1 + part2))

        # compatibility: D(AB) = D(A)B + (-1)^{|A|} A D(B) + {A, B}
        a_poly = _random_graded(rng, obs, anti, max_degree // 2,
                                parity_homogeneous=True)
        b_poly = _random_graded(rng, obs, anti, max_degree // 2,
                                parity_homogeneous=False)
        sign = -1 if _antifield_parity(a_poly) else 1
        defect = (quantum_bv(a_poly * b_poly) - quantum_bv(a_poly) * b_poly
                  - (a_poly * quantum_bv(b_poly)).scale(sign)
                  - poisson_bracket(a_poly, b_poly))
        bd = max(bd, _max_abs_coeff(defect))

        # nilpotency
        w = _random_graded(rng, obs, anti, max_degree,
                           parity_homogeneous=False, max_antifields=2)
        d_sq = max(d_sq, _max_abs_coeff(quantum_bv(quantum_bv(w))))
        t1 = total_bv(w, theory)
        total_sq = max(total_sq, _max_abs_coeff(total_bv(t1, theory)))
    return [
        _row("bd", "bracket_elementary_pairs", elementary, tolerance),
        _row("bd", "bracket_two_antifield_rule", two_term, tolerance),
        _row("bd", "bracket_contraction_compatibility", bd, tolerance),
        _row("bd", "quantum_differential_nilpotent", d_sq, tolerance),
        _row("bd", "total_differential_nilpotent", total_sq, tolerance),
    ]


def _power(x: GradedObservable, e: int) -> GradedObservable:
    out = GradedObservable.constant(1)
    for _ in range(e):
        out = out * x
    return out


def _antifield_parity(g: GradedObservable) -> int:
    parities = {len(mask) % 2 for _, mask in g.terms}
    if len(parities) > 1:
        raise ValueError("mixed antifield parity")
    return parities.pop() if parities else 0


def _random_graded(rng, obs, anti, max_field_degree, parity_homogeneous,
                   max_antifields: int = 1) -> GradedObservable:
    terms = rng.randint(1, 2)
    target_parity = rng.randint(0, 1)
    out = None
    for _ in range(terms):
        t = GradedObservable.constant(Fraction(rng.randint(-3, 3) or 1))
        for _ in range(rng.randint(0, max_field_degree)):
            t = t * rng.choice(obs)
        n_anti = rng.randint(0, max_antifields)
        if parity_homogeneous:
            n_anti = target_parity if max_antifields == 1 else (
                target_parity + 2 * rng.randint(0, (max_antifields -
                                                    target_parity) // 2))
        for a in rng.sample(anti, min(n_anti, len(anti))):
            t = t * a
        out = t if out is None else out + t
    return out


# -- duality -----------------------------------------------------------


def double_dual_suite(seed=20241, rounds=50, tolerance=0.0) -> list[dict]:
    """Forward-then-inverse duality transform is the identity in exact
    arithmetic on random monomials (up to four generators, total degree up
    to eight, rational Gram data and rational couplings): generators, terms
    and theory all round-trip on the nose."""
    rng = random.Random(seed)
    cutoff = 9
    failures = 0
    for _ in range(rounds):
        n = rng.choice((2, 3, 4))
        torus = Torus(n)
        p = rng.randrange(0, n + 1)
        r2 = Fraction(rng.randint(1, 4), rng.randint(1, 4))
        theory = TheorySpec(torus, PFORM, cutoff, degree=p, r_squared=r2)
        gens = [_random_exact_form(rng, torus, p, cutoff,
                                   n_modes=rng.randint(1, 4))
                for _ in range(rng.randint(1, 4))]
        while True:
            exps = tuple(rng.randint(0, 3) for _ in gens)
            if sum(exps) <= 8:
                break
        coeff = Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 3))
        obs = PolynomialObservable(gens, {exps: coeff})
        dual_obs, dual_theory = fourier_dual(obs, theory)
        back, back_theory = fourier_dual(dual_obs, dual_theory, inverse=True)
        ok = (back_theory == theory
              and _poly_equal_exact(back.canonical(), obs.canonical()))
        failures += 0 if ok else 1
    return [_row("double-dual", f"roundtrip_identity[{rounds} cases]",
                 failures, tolerance)]


def _poly_equal_exact(a: PolynomialObservable, b: PolynomialObservable) -> bool:
    if len(a.generators) != len(b.generators):
        return False
    for ga, gb in zip(a.generators, b.generators):
        diff = ga - gb
        if not all(scalar_is_zero(c) for c in diff.coeff.values()):
            return False
    keys = set(a.terms) | set(b.terms)
    for k in keys:
        if not scalar_is_zero(a.terms.get(k, 0) - b.terms.get(k, 0)):
            return False
    return True


def hermite_suite(max_order=10, tolerance=0.0) -> list[dict]:
    """At coupling R^2 = 1/2 and a unit-norm smearing the duality transform
    of O^m has coefficients i^m He_m (probabilists' Hermite, three-term
    recurrence); in particular O^4 maps to O~^4 - 6 O~^2 + 3."""
    torus = Torus(2)
    cutoff = 9
    beta = SpectralForm(torus, 1, cutoff,
                        {FormMode((1, 2), COS, (0,)): Fraction(1)})
    theory = TheorySpec(torus, PFORM, cutoff, degree=1,
                        r_squared=Fraction(1, 2))
    # probabilists' Hermite coefficient rows via the recurrence
    he = [{0: Fraction(1)}, {1: Fraction(1)}]
    for m in range(1, max_order):
        nxt: dict = {}
        for j, c in he[m].items():
            nxt[j + 1] = nxt.get(j + 1, 0) + c
        for j, c in he[m - 1].items():
            nxt[j] = nxt.get(j, 0) - m * c
        he.append({j: c for j, c in nxt.items() if c})
    tower = 0.0
    fourth = 0.0
    for m in range(max_order + 1):
        dual_obs, _ = fourier_dual(
            PolynomialObservable.monomial(beta, m), theory)
        phase = ExactComplex.i() ** m
        expected = {(j,): phase * c for j, c in he[m].items()}
        keys = set(dual_obs.terms) | set(expected)
        defect = max(abs(to_complex(dual_obs.terms.get(k, 0)
                                    - expected.get(k, 0))) for k in keys)
        tower = max(tower, defect)
        if m == 4:
            target = {(4,): 1, (2,): -6, (0,): 3}
            keys4 = set(dual_obs.terms) | set(target)
            fourth = max(abs(to_complex(dual_obs.terms.get(k, 0)
                                        - target.get(k, 0))) for k in keys4)
    rows = [_row("hermite", "fourth_power_coefficients_1_m6_3", fourth,
                 tolerance),
            _row("hermite", f"tower_matches_recurrence[m<={max_order}]",
                 tower, tolerance)]
    return rows


# -- Stokes ------------------------------------------------------------


def stokes_suite(seed=20242, rounds=25, tolerance=1e-10,
                 allow_scalar=False) -> list[dict]:
    """The Gaussian expectation of the total differential of any ghost
    degree -1 observable vanishes (integration by parts)."""
    rng = random.Random(seed)
    cutoff = 9
    worst = 0.0
    for _ in range(rounds):
        n = rng.choice((2, 3))
        torus = Torus(n)
        p = rng.randrange(0, n + 1)
        theory = _random_theory(rng, torus, p, cutoff,
                                allow_scalar=allow_scalar)
        p_eff = theory.degree
        beta = [_random_exact_form(rng, torus, p_eff, cutoff)
                for _ in range(2)]
        obs = [GradedObservable.from_polynomial(
            PolynomialObservable.monomial(b, 1)) for b in beta]
        w = None
        for _ in range(rng.randint(1, 2)):
            chi = _random_exact_form(rng, torus, p_eff, cutoff)
            t = GradedObservable.antifield(chi).scale(
                Fraction(rng.randint(-3, 3) or 1))
            for _ in range(rng.randint(0, 5)):
                t = t * rng.choice(obs)
            w = t if w is None else w + t
        dw = total_bv(w, theory).field_part()
        val = expectation_diagrams(dw, theory)
        worst = max(worst, abs(to_complex(val)))
    return [_row("stokes", f"degree_minus_one_expectation[{rounds} cases]",
                 worst, tolerance)]


# -- lattice-summed duality -------------------------------------------


def _random_float_form(rng: random.Random, torus: Torus, degree: int, cutoff,
                       n_modes=3, harmonic_weight=1.0) -> SpectralForm:
    basis = ModeBasis(torus, cutoff)
    modes = [m for m in basis.modes(degree) if any(m.k)]
    coeff = {}
    for mode in rng.sample(modes, min(n_modes, len(modes))):
        coeff[mode] = round(rng.uniform(-1, 1), 6)
    zero_k = (0,) * torus.dim
    idxs = list(itertools.combinations(range(torus.dim), degree))
    idx = idxs[rng.randrange(len(idxs))]
    coeff[FormMode(zero_k, COS, idx)] = round(
        harmonic_weight * rng.uniform(-1, 1), 6)
    return SpectralForm(torus, degree, cutoff, coeff, validate=False)


def plancherel_suite(configs=((2, 1), (3, 1), (3, 2)),
                     radii=(0.7, 1.0, 1.3), cutoff=64.0,
                     lattice_cutoff=40.0, pairs=5, seed=20243,
                     tolerance=1e-6, check_monotone=True,
                     threads=1) -> list[dict]:
    """Lattice-summed duality: for observable pairs built by dualising in
    the free theory and restricting both sides to the closed sector, the
    two expectations agree relatively to the stated tolerance, and the
    discrepancy does not grow when the lattice cutoff doubles (within the
    reported tail bounds)."""
    rng = random.Random(seed)
    rows = []
    for (n, p) in configs:
        torus = Torus(n)
        for r in radii:
            theory = TheorySpec(torus, PFORM, cutoff, degree=p,
                                r_squared=r * r)
            worst = 0.0
            worst_mono = -math.inf
            for _ in range(pairs):
                gens = [_random_float_form(rng, torus, p, cutoff,
                                           n_modes=rng.randint(1, 3))
                        for _ in range(rng.randint(1, 2))]
                terms = {}
                for _ in range(rng.randint(1, 3)):
                    exps = tuple(rng.randint(0, 2) for _ in gens)
                    if 0 < sum(exps) <= 4:
                        terms[exps] = round(rng.uniform(-2, 2), 6)
                if not terms:
                    terms[tuple(1 for _ in gens)] = 1.0
                obs = PolynomialObservable(gens, terms)
                dual_obs, dual_theory = fourier_dual(obs, theory)
                lhs_obs = restrict_to_closed(obs)
                rhs_obs = restrict_to_closed(dual_obs)
                lhs = maxwell_expectation(lhs_obs, theory.to_closed(),
                                          lattice_cutoff, threads=threads)
                rhs = maxwell_expectation(rhs_obs, dual_theory.to_closed(),
                                          lattice_cutoff, threads=threads)
                d1 = (abs(lhs.value - rhs.value)
                      / (1.0 + abs(lhs.value)))
                worst = max(worst, d1)
                if check_monotone:
                    lhs2 = maxwell_expectation(lhs_obs, theory.to_closed(),
                                               2.0 * lattice_cutoff,
                                               threads=threads)
                    rhs2 = maxwell_expectation(rhs_obs,
                                               dual_theory.to_closed(),
                                               2.0 * lattice_cutoff,
                                               threads=threads)
                    d2 = (abs(lhs2.value - rhs2.value)
                          / (1.0 + abs(lhs2.value)))
                    allowance = (lhs.tail_bound + rhs.tail_bound
                                 + lhs2.tail_bound + rhs2.tail_bound
                                 + 1e-12)
                    worst_mono = max(worst_mono, d2 - d1 - allowance)
            label = f"T^{n} p={p} R={r:g}"
            rows.append(_row("plancherel", f"duality_agreement[{label}]",
                             worst, tolerance))
            if check_monotone:
                rows.append(_row("plancherel",
                                 f"cutoff_doubling_monotone[{label}]",
                                 worst_mono, 0.0))
    return rows


# -- exponential duality ----------------------------------------------


def wilson_thooft_suite(epsilons=(0.1, 0.05), charge=1.0, r_squared=1.0,
                        cutoff=64.0, lattice_cutoff=40.0,
                        tolerance=1e-6) -> list[dict]:
    """Closed-sector expectation of an exponential holonomy observable on a
    coordinate cycle equals prefactor times the dual exponential's
    expectation in the dual theory; the double transform returns the
    original observable."""
    torus = Torus(2)
    theory = TheorySpec(torus, PFORM, cutoff, degree=1, r_squared=r_squared)
    rows = []
    round_trip = 0.0
    for eps in epsilons:
        beta = smear_coordinate_cycle(torus, cutoff, cycle=(0,),
                                      offset=(0.0, 1.3), epsilon=eps)
        wil = wilson_observable(beta, charge)
        lhs = expectation_exponential(wil, theory.to_closed(),
                                      lattice_cutoff=lattice_cutoff)
        pre, dual_obs, dual_theory = dual_exponential(wil, theory)
        rhs = expectation_exponential(dual_obs, dual_theory.to_closed(),
                                      lattice_cutoff=lattice_cutoff)
        rel = (abs(lhs.value - pre * rhs.value)
               / (1.0 + abs(lhs.value)))
        rows.append(_row("wilson-thooft",
                         f"cycle_duality[eps={eps:g}]", rel, tolerance))
        pre2, back, _ = dual_exponential(dual_obs, dual_theory, inverse=True)
        round_trip = max(round_trip, abs(pre * pre2 - 1.0),
                         abs(to_complex(back.charge) - charge),
                         _max_abs_coeff(back.smearing - beta))
    rows.append(_row("wilson-thooft", "double_transform_roundtrip",
                     round_trip, 1e-12))
    return rows


# -- factorisation ----------------------------------------------------


def _bump_form(torus: Torus, cutoff, centre, heat_time: float,
               idx: tuple) -> SpectralForm:
    """Heat-smoothed point source in a single form component."""
    n = torus.dim
    coeff = {}
    for k in ModeBasis(torus, cutoff).wavevectors():
        damp = math.exp(-heat_time * sum(c * c for c in k))
        norm = mode_norm_constant(n, k)
        arg = sum(k[j] * centre[j] for j in range(n))
        coeff[FormMode(k, COS, idx)] = norm * damp * math.cos(arg)
        if any(k):
            coeff[FormMode(k, SIN, idx)] = norm * damp * math.sin(arg)
    return SpectralForm(torus, len(idx), cutoff, coeff, validate=False)


def _dual_difference(a: PolynomialObservable,
                     b: PolynomialObservable) -> float:
    """Sup-norm of the aligned coefficient difference, relative to the
    larger coefficient scale."""
    diff = a + b.scale(-1)
    worst = max((abs(to_complex(c)) for c in diff.terms.values()),
                default=0.0)
    scale = max((abs(to_complex(c)) for c in a.terms.values()), default=0.0)
    return worst / (1.0 + scale)


def factorisation_suite(cutoff=64.0, heat_time=0.12, seed=20244,
                        rounds=10, tolerance=1e-6) -> list[dict]:
    """The duality transform is multiplicative over observables with
    orthogonal supports: transform(P*Q) = transform(P)*transform(Q),
    exactly for disjoint mode content, and within tolerance for heat-kernel
    bumps centred at antipodal points (whose cross-pairing is small but
    nonzero).  Expectations of such products factor accordingly."""
    rng = random.Random(seed)
    small_cutoff = 9
    dual_worst = 0.0
    expect_worst = 0.0
    detect_fail = 0
    for _ in range(rounds):
        n = rng.choice((2, 3))
        torus = Torus(n)
        p = rng.randrange(0, n + 1)
        theory = _random_theory(rng, torus, p, small_cutoff)
        p_eff = theory.degree
        modes = ModeBasis(torus, small_cutoff).modes(p_eff)
        half = len(modes) // 2
        picks_a = rng.sample(modes[:half], min(3, half))
        picks_b = rng.sample(modes[half:], min(3, len(modes) - half))
        ga = SpectralForm(torus, p_eff, small_cutoff,
                          {m: Fraction(rng.randint(-3, 3) or 1)
                           for m in picks_a}, validate=False)
        gb = SpectralForm(torus, p_eff, small_cutoff,
                          {m: Fraction(rng.randint(-3, 3) or 1)
                           for m in picks_b}, validate=False)
        pa = PolynomialObservable.monomial(ga, rng.randint(1, 3)) + \
            PolynomialObservable.constant(Fraction(rng.randint(-2, 2)))
        pb = PolynomialObservable.monomial(gb, rng.randint(1, 3)) + \
            PolynomialObservable.constant(Fraction(rng.randint(-2, 2)))
        if not support_orthogonal(pa, pb):
            detect_fail += 1
        if support_orthogonal(pa, pa.scale(2)) and not ga.is_zero():
            detect_fail += 1  # self-overlap must be detected
        # the transform factors exactly over the disjoint supports
        dual_prod, _ = fourier_dual(pa * pb, theory)
        dual_a, _ = fourier_dual(pa, theory)
        dual_b, _ = fourier_dual(pb, theory)
        split = dual_a * dual_b
        diff = dual_prod + split.scale(-1)
        if not all(scalar_is_zero(c) for c in diff.terms.values()):
            dual_worst = max(dual_worst, _max_abs_coeff(diff))
        # and so do the expectations
        lhs = expectation_diagrams(pa * pb, theory)
        rhs = expectation_diagrams(pa, theory) * expectation_diagrams(
            pb, theory)
        expect_worst = max(expect_worst, abs(to_complex(lhs - rhs)))
    rows = [
        _row("factorisation", f"disjoint_dual_multiplicative[{rounds} cases]",
             dual_worst, 0.0),
        _row("factorisation", f"disjoint_expectation_factorises"
             f"[{rounds} cases]", expect_worst, 0.0),
        _row("factorisation", "support_orthogonality_detection",
             float(detect_fail), 0.0),
    ]

    # heat-kernel bumps at antipodal centres on T^2, sharing a component so
    # the cross-pairing is genuinely nonzero
    torus = Torus(2)
    theory = TheorySpec(torus, PFORM, cutoff, degree=1, r_squared=1.0)
    b0 = _bump_form(torus, cutoff, (0.0, 0.0), heat_time, (0,))
    b1 = _bump_form(torus, cutoff, (math.pi, math.pi), heat_time, (0,))
    pa = PolynomialObservable((b0,), {(2,): 1.0, (1,): 0.3})
    pb = PolynomialObservable((b1,), {(2,): 1.0, (1,): -0.7})
    cross = abs(to_complex(b0.pairing(b1)))
    dual_prod, _ = fourier_dual(pa * pb, theory)
    dual_a, _ = fourier_dual(pa, theory)
    dual_b, _ = fourier_dual(pb, theory)
    rows.append(_row("factorisation",
                     f"antipodal_heat_bumps_dual[t={heat_time:g}]",
                     _dual_difference(dual_prod, dual_a * dual_b),
                     tolerance))
    lhs = to_complex(expectation_diagrams(pa * pb, theory))
    rhs = (to_complex(expectation_diagrams(pa, theory))
           * to_complex(expectation_diagrams(pb, theory)))
    rows.append(_row("factorisation",
                     f"antipodal_heat_bumps_expectation[t={heat_time:g}]",
                     abs(lhs - rhs) / (1.0 + abs(lhs)), tolerance))
    # the bumps are not exactly orthogonal; the checks must be non-vacuous
    rows.append(_row("factorisation", "antipodal_cross_pairing_nonzero",
                     0.0 if cross > 0 else 1.0, 0.0))
    return rows


# -- registry ----------------------------------------------------------


SUITES = {
    "geometry": geometry_suite,
    "bd": bd_suite,
    "double-dual": double_dual_suite,
    "hermite": hermite_suite,
    "stokes": stokes_suite,
    "plancherel": plancherel_suite,
    "wilson-thooft": wilson_thooft_suite,
    "factorisation": factorisation_suite,
}


def run_suites(names=None, **params) -> list[dict]:
    """Run the named suites (all by default), forwarding only the keyword
    parameters each suite accepts."""
    rows = []
    for name in names or sorted(SUITES):
        fn = SUITES[name]
        accepted = set(inspect.signature(fn).parameters)
        kwargs = {k: v for k, v in params.items() if k in accepted}
        rows.extend(fn(**kwargs))
    return rows
