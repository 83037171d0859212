"""Polynomial algebra of smeared linear observables.

A linear observable O(beta) pairs the field against a fixed p-form smearing
beta: a |-> <a, beta>.  Polynomial observables are finite sums

    P = sum_t  c_t * prod_i O(beta_i)^(e_{t,i})

stored as a generator tuple (the smearings) plus a dict mapping exponent
tuples to coefficients.  The algebra supports addition, multiplication,
evaluation on spectral fields, transport of all smearings through a linear
map (Hodge star, closed projection), and a canonical form that detects
linear dependencies among generators and rewrites the polynomial over an
independent subset, e.g. O(beta) * O(2 beta) -> 2 O(beta)^2.

Rank detection is order-preserving greedy: generators are scanned in order
and kept as pivots when their residual against the span of earlier pivots
is nonzero (exact elimination for exact coefficients, relative threshold
1e-10 otherwise).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegreeMismatch
from .exact import (ExactComplex, exact_lift, exact_to_strings, is_exact,
                    scalar_is_zero, strings_to_exact, to_complex)
from .geometry import (SpectralForm, closed_part, hodge_star,
                       hodge_star_inverse)

#: relative residual threshold below which a generator counts as dependent
RANK_THRESHOLD = 1e-10


@dataclass(frozen=True)
class LinearObservable:
    """Field functional a |-> <a, smearing>."""

    smearing: SpectralForm

    def evaluate(self, field: SpectralForm):
        return field.pairing(self.smearing)

    def as_polynomial(self) -> "PolynomialObservable":
        return PolynomialObservable.monomial(self.smearing, 1)


def _coerce_smearing(g) -> SpectralForm:
    return g.smearing if isinstance(g, LinearObservable) else g


class PolynomialObservable:
    """Polynomial in linear observables over a fixed generator tuple."""

    __slots__ = ("generators", "terms")

    def __init__(self, generators, terms, validate: bool = True):
        self.generators: tuple[SpectralForm, ...] = tuple(
            _coerce_smearing(g) for g in generators)
        if validate:
            for g in self.generators[1:]:
                if (g.torus != self.generators[0].torus
                        or g.degree != self.generators[0].degree):
                    raise DegreeMismatch(
                        "all generator smearings must share torus and degree")
        self.terms: dict[tuple[int, ...], object] = {}
        width = len(self.generators)
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != width:
                raise ValueError(
                    f"exponent tuple {exps} does not match {width} generators")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if not scalar_is_zero(c):
                self.terms[exps] = self.terms.get(exps, 0) + c

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value) -> "PolynomialObservable":
        return cls((), {(): value}, validate=False)

    @classmethod
    def monomial(cls, smearing, power: int = 1, coefficient=1) -> "PolynomialObservable":
        return cls((smearing,), {(power,): coefficient})

    # -- structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        """Maximal total polynomial degree over all terms (0 for constants)."""
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def smearing_degree(self) -> int | None:
        return self.generators[0].degree if self.generators else None

    # -- algebra ------------------------------------------------------

    def _aligned(self, other: "PolynomialObservable"):
        """Common generator tuple plus index maps for both operands."""
        gens = list(self.generators)
        index = {id_key(g): i for i, g in enumerate(gens)}
        other_map = []
        for g in other.generators:
            key = id_key(g)
            if key not in index:
                index[key] = len(gens)
                gens.append(g)
            other_map.append(index[key])
        return tuple(gens), list(range(len(self.generators))), other_map

    def _embed(self, exps, mapping, width):
        out = [0] * width
        for e, pos in zip(exps, mapping):
            out[pos] += e
        return tuple(out)

    def __add__(self, other) -> "PolynomialObservable":
        if not isinstance(other, PolynomialObservable):
            other = PolynomialObservable.constant(other)
        gens, smap, omap = self._aligned(other)
        width = len(gens)
        terms: dict[tuple[int, ...], object] = {}
        for exps, c in self.terms.items():
            key = self._embed(exps, smap, width)
            terms[key] = terms.get(key, 0) + c
        for exps, c in other.terms.items():
            key = self._embed(exps, omap, width)
            terms[key] = terms.get(key, 0) + c
        return PolynomialObservable(gens, terms, validate=False)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, PolynomialObservable):
            other = PolynomialObservable.constant(other)
        return self + other.scale(-1)

    def scale(self, scalar) -> "PolynomialObservable":
        return PolynomialObservable(
            self.generators,
            {e: c * scalar for e, c in self.terms.items()}, validate=False)

    def __mul__(self, other) -> "PolynomialObservable":
        if not isinstance(other, PolynomialObservable):
            return self.scale(other)
        gens, smap, omap = self._aligned(other)
        width = len(gens)
        terms: dict[tuple[int, ...], object] = {}
        for e1, c1 in self.terms.items():
            k1 = self._embed(e1, smap, width)
            for e2, c2 in other.terms.items():
                k2 = self._embed(e2, omap, width)
                key = tuple(a + b for a, b in zip(k1, k2))
                v = terms.get(key, 0) + c1 * c2
                terms[key] = v
        return PolynomialObservable(gens, terms, validate=False)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int) -> "PolynomialObservable":
        if n < 0:
            raise ValueError("negative power of an observable")
        out = PolynomialObservable.constant(1)
        for _ in range(n):
            out = out * self
        return out

    # -- evaluation ---------------------------------------------------

    def evaluate(self, field: SpectralForm):
        vals = [field.pairing(g) for g in self.generators]
        total = 0
        for exps, c in self.terms.items():
            v = c
            for x, e in zip(vals, exps):
                for _ in range(e):
                    v = v * x
            total = total + v
        return total

    def evaluate_linear_values(self, vals):
        """Evaluate given precomputed generator values (arrays allowed)."""
        total = 0
        for exps, c in self.terms.items():
            v = to_complex(c) if is_exact(c) else c
            for x, e in zip(vals, exps):
                if e:
                    v = v * x ** e
            total = total + v
        return total

    # -- smearing transport -------------------------------------------

    def map_smearings(self, fn) -> "PolynomialObservable":
        return PolynomialObservable([fn(g) for g in self.generators],
                                    dict(self.terms), validate=False)

    def as_exact(self) -> "PolynomialObservable":
        return PolynomialObservable(
            [g.as_exact() for g in self.generators],
            {e: exact_lift(c) for e, c in self.terms.items()}, validate=False)

    def as_float(self) -> "PolynomialObservable":
        def fl(c):
            z = to_complex(c)
            return z.real if z.imag == 0.0 else z
        return PolynomialObservable(
            [g.as_float() for g in self.generators],
            {e: fl(c) for e, c in self.terms.items()}, validate=False)

    # -- canonical form -----------------------------------------------

    def canonical(self) -> "PolynomialObservable":
        """Drop zero terms/unused generators and rewrite over an independent
        generator subset (first come, first pivot)."""
        # prune unused generators
        used = [i for i in range(len(self.generators))
                if any(e[i] for e in self.terms)]
        gens = [self.generators[i] for i in used]
        terms = {tuple(e[i] for i in used): c for e, c in self.terms.items()}
        if not gens:
            return PolynomialObservable((), _sorted_terms(terms), validate=False)

        pivots, combos = _independent_split(gens)
        width = len(pivots)
        out: dict[tuple[int, ...], object] = {}
        for exps, c in terms.items():
            # each term becomes a polynomial over the pivots
            expansion = {tuple(0 for _ in range(width)): c}
            for i, e in enumerate(exps):
                if e == 0:
                    continue
                combo = combos[i]
                power = _linear_power(combo, e, width)
                expansion = _convolve(expansion, power)
            for key, v in expansion.items():
                s = out.get(key, 0) + v
                out[key] = s
        out = {k: v for k, v in out.items() if not scalar_is_zero(v)}
        final_used = [j for j in range(width) if any(k[j] for k in out)]
        final_gens = tuple(gens[pivots[j]] for j in final_used)
        final_terms = {tuple(k[j] for j in final_used): v for k, v in out.items()}
        return PolynomialObservable(final_gens, _sorted_terms(final_terms),
                                    validate=False)

    # -- serialisation ------------------------------------------------

    def to_dict(self) -> dict:
        gens = [g.to_dict() for g in self.generators]
        terms = []
        for exps in sorted(self.terms):
            c = self.terms[exps]
            z = to_complex(c)
            entry = {"exps": list(exps), "re": z.real, "im": z.imag}
            if is_exact(c):
                # rationals wider than a double mantissa round through the
                # float fields; keep a lossless record alongside
                entry["exact"] = exact_to_strings(c)
            terms.append(entry)
        return {"kind": "polynomial", "generators": gens, "terms": terms}

    @classmethod
    def from_dict(cls, data: dict) -> "PolynomialObservable":
        gens = [SpectralForm.from_dict(g) for g in data["generators"]]
        terms = {}
        for t in data["terms"]:
            exps = tuple(int(e) for e in t["exps"])
            if "exact" in t:
                terms[exps] = strings_to_exact(t["exact"])
                continue
            re, im = float(t.get("re", 0.0)), float(t.get("im", 0.0))
            terms[exps] = re if im == 0.0 else complex(re, im)
        return cls(gens, terms)

    def __repr__(self):
        return (f"PolynomialObservable(generators={len(self.generators)}, "
                f"terms={len(self.terms)}, degree={self.degree})")


def id_key(form: SpectralForm):
    """Hashable identity of a smearing used to merge generator lists."""
    return (form.torus.dim, form.degree,
            tuple(sorted((m, to_complex(c)) for m, c in form.coeff.items())))


def _sorted_terms(terms: dict) -> dict:
    return {k: terms[k] for k in sorted(terms)}


def _convolve(a: dict, b: dict) -> dict:
    out: dict[tuple[int, ...], object] = {}
    for k1, c1 in a.items():
        for k2, c2 in b.items():
            key = tuple(x + y for x, y in zip(k1, k2))
            out[key] = out.get(key, 0) + c1 * c2
    return out


def _linear_power(combo: dict, e: int, width: int) -> dict:
    """(sum_j combo[j] * O_j)^e as exponent-tuple -> coefficient."""
    base = {}
    for j, c in combo.items():
        key = tuple(1 if t == j else 0 for t in range(width))
        base[key] = c
    out = {tuple(0 for _ in range(width)): 1}
    for _ in range(e):
        out = _convolve(out, base)
    return out


def _independent_split(gens: list[SpectralForm]):
    """Greedy split of generators into pivots and combinations.

    Returns (pivots, combos): pivots is the list of independent generator
    positions in scan order; combos[i] expresses generator i as
    {pivot_rank: coefficient} over the pivots.
    """
    if all(all(is_exact(c) for c in g.coeff.values()) for g in gens):
        return _independent_split_exact(gens)
    return _independent_split_float(gens)


def _independent_split_exact(gens: list[SpectralForm]):
    modes = sorted({m for g in gens for m in g.coeff})
    pos = {m: i for i, m in enumerate(modes)}
    # reduced rows spanning the pivot space; row_expr writes the reduced row
    # as a combination {pivot_rank: coeff} of the original pivot generators
    rows: list[tuple[int, list, dict]] = []
    pivots: list[int] = []
    combos: list[dict] = []
    for i, g in enumerate(gens):
        vec = [Fraction(0)] * len(modes)
        for m, c in g.coeff.items():
            vec[pos[m]] = c
        expr: dict[int, object] = {}
        for lead, row, row_expr in rows:
            if scalar_is_zero(vec[lead]):
                continue
            factor = vec[lead] / row[lead]
            for t in range(len(modes)):
                vec[t] = vec[t] - factor * row[t]
            for r, cr in row_expr.items():
                expr[r] = expr.get(r, 0) + factor * cr
        if all(scalar_is_zero(v) for v in vec):
            combos.append({r: c for r, c in expr.items()
                           if not scalar_is_zero(c)})
            continue
        lead = next(t for t in range(len(modes)) if not scalar_is_zero(vec[t]))
        rank = len(pivots)
        pivots.append(i)
        # residual row = generator i minus the part already explained
        row_expr = {rank: 1}
        for r, cr in expr.items():
            row_expr[r] = row_expr.get(r, 0) - cr
        rows.append((lead, vec, row_expr))
        combos.append({rank: 1})
    return pivots, combos


def _independent_split_float(gens: list[SpectralForm]):
    modes = sorted({m for g in gens for m in g.coeff})
    pos = {m: i for i, m in enumerate(modes)}
    a = np.zeros((len(gens), max(len(modes), 1)), dtype=complex)
    for i, g in enumerate(gens):
        for m, c in g.coeff.items():
            a[i, pos[m]] = to_complex(c)
    pivots: list[int] = []
    combos: list[dict] = []
    for i in range(len(gens)):
        row = a[i]
        if pivots:
            basis = a[pivots]
            coef, *_ = np.linalg.lstsq(basis.T, row, rcond=None)
            residual = row - coef @ basis
        else:
            coef = np.zeros(0, dtype=complex)
            residual = row
        scale = np.linalg.norm(row)
        if scale == 0.0 or np.linalg.norm(residual) <= RANK_THRESHOLD * scale:
            combo = {}
            for j, c in enumerate(coef):
                c = complex(c)
                if c != 0:
                    combo[j] = c.real if c.imag == 0.0 else c
            combos.append(combo)
        else:
            combos.append({len(pivots): 1.0})
            pivots.append(i)
    return pivots, combos


# -- helpers on observables -------------------------------------------


def canonicalise(factors) -> PolynomialObservable:
    """Product of (smearing-or-linear-observable, exponent) pairs in
    canonical form."""
    out = PolynomialObservable.constant(1)
    for g, e in factors:
        out = out * PolynomialObservable.monomial(_coerce_smearing(g), int(e))
    return out.canonical()


def restrict_to_closed(obs: PolynomialObservable) -> PolynomialObservable:
    """Drop coexact smearing parts; the result evaluates identically on
    closed fields."""
    return obs.map_smearings(closed_part)


def star_transport(obs: PolynomialObservable) -> PolynomialObservable:
    return obs.map_smearings(hodge_star)


def star_inverse_transport(obs: PolynomialObservable) -> PolynomialObservable:
    return obs.map_smearings(hodge_star_inverse)


def support_orthogonal(a: PolynomialObservable, b: PolynomialObservable,
                       tol: float = 1e-12) -> bool:
    """True when every cross pairing of smearings vanishes within tol."""
    for g in a.generators:
        for h in b.generators:
            if abs(to_complex(g.pairing(h))) > tol:
                return False
    return True
