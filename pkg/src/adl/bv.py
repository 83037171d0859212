"""Graded observable complex for the free Gaussian theories.

Theories
--------
``TheorySpec`` fixes the Gaussian weight exp(-<a, Q a>) on a truncated mode
space:

* ``pform``         fields are all p-forms, Q = R^2 (coupling r_squared),
* ``closed_pform``  fields are closed p-forms (exact + quantised harmonic),
                    same Q restricted to the closed sector,
* ``scalar``        fields are functions, Q = Laplacian + mass_sign * m^2.

Graded observables
------------------
A ``GradedObservable`` is a polynomial in even field generators O(beta_j)
(ghost degree 0) and odd antifield generators v(chi_l) (ghost degree -1,
v^2 = 0).  Terms are stored in normal order, fields first and antifields
ascending, as (field exponents, antifield position tuple) -> coefficient.

Structure maps (g_{lj} = <chi_l, beta_j> throughout):

* odd bracket: the unique biderivation with {v(chi), O(beta)} = <chi, beta>,
  computable from left/right derivatives as
      {A, B} = sum_{l,j} g_{lj} [ dR A/dv_l * dB/dx_j
                                  + (-1)^|A| dA/dx_j * dL B/dv_l ],
* second-order contraction D: pairs one antifield with one field,
      D(x^a v_S) = sum_{l in S} (-1)^{pos(l)} sum_j a_j g_{lj}
                   x^{a - e_j} v_{S - l},
  which satisfies D(AB) = D(A) B + (-1)^|A| A D(B) + {A, B},
* classical differential: the odd derivation v(chi) -> O(-2 Q chi)
  induced by the first variation dS(chi) = 2 <Q a, chi> of the action,
* total differential = classical + D; it squares to zero because Q is
  symmetric.

For degree -1 observables W the expectation of the total differential
vanishes (Gaussian integration by parts), which is the discrete Stokes
identity of this calculus.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import (DegreeMismatch, DegreeOutOfRange, MasslessMode,
                     NotImplementedInCalculus, VariantMismatch)
from .exact import is_exact, scalar_is_zero
from .geometry import (ModeBasis, SpectralForm, Torus, closed_part, laplacian,
                       laplace_eigenvalue)
from .observables import PolynomialObservable, id_key

PFORM = "pform"
CLOSED_PFORM = "closed_pform"
SCALAR = "scalar"

_VARIANTS = (PFORM, CLOSED_PFORM, SCALAR)


@dataclass(frozen=True)
class TheorySpec:
    """Free Gaussian theory on a truncated torus mode space."""

    torus: Torus
    variant: str
    cutoff: float
    degree: Optional[int] = None
    r_squared: object = None
    mass: object = None
    mass_sign: int = 1

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise VariantMismatch(f"unknown variant {self.variant!r}")
        if self.variant in (PFORM, CLOSED_PFORM):
            if self.degree is None or not 0 <= self.degree <= self.torus.dim:
                raise DegreeOutOfRange(
                    f"degree {self.degree} outside 0..{self.torus.dim}")
            if self.r_squared is None or not self.r_squared > 0:
                raise ValueError("p-form theories need r_squared > 0")
        else:
            if self.mass is None:
                raise ValueError("scalar theory needs a mass")
            if self.mass_sign not in (1, -1):
                raise ValueError("mass_sign must be +1 or -1")
            object.__setattr__(self, "degree", 0)
            self._check_massless()

    def _check_massless(self):
        """Reject couplings with a zero Q-eigenvalue on a retained mode."""
        m2 = float(self.mass) ** 2
        tol = 1e-9 * max(1.0, m2)
        for lam in _attainable_eigenvalues(self.torus.dim, self.cutoff):
            if abs(lam + self.mass_sign * m2) <= tol:
                raise MasslessMode(
                    f"Q-eigenvalue vanishes at |k|^2 = {lam} for mass "
                    f"{self.mass} (sign {self.mass_sign:+d})")

    # -- spectral data ------------------------------------------------

    def q_eigenvalue(self, mode):
        """Eigenvalue of the quadratic form Q on a basis mode."""
        if self.variant in (PFORM, CLOSED_PFORM):
            return self.r_squared
        lam = laplace_eigenvalue(mode)
        if is_exact(self.mass):
            return lam + self.mass_sign * self.mass * self.mass
        return lam + self.mass_sign * float(self.mass) ** 2

    def apply_q(self, form: SpectralForm) -> SpectralForm:
        if self.variant == PFORM:
            return form * self.r_squared
        if self.variant == CLOSED_PFORM:
            return closed_part(form) * self.r_squared
        m2 = (self.mass * self.mass if is_exact(self.mass)
              else float(self.mass) ** 2)
        return laplacian(form) + form * (self.mass_sign * m2)

    def check_form(self, form: SpectralForm):
        if form.torus != self.torus or form.degree != self.degree:
            raise DegreeMismatch(
                f"form (n={form.torus.dim}, p={form.degree}) does not "
                f"match theory (n={self.torus.dim}, p={self.degree})")

    # -- duality ------------------------------------------------------

    def dual(self) -> "TheorySpec":
        """Dual free theory: degree n-p, coupling rho^2 = 1/(4 R^2)."""
        if self.variant != PFORM:
            raise VariantMismatch(
                f"duality maps the free p-form theory; got {self.variant}")
        if is_exact(self.r_squared):
            rho2 = Fraction(1, 4) / Fraction(self.r_squared)
        else:
            rho2 = 1.0 / (4.0 * float(self.r_squared))
        return TheorySpec(self.torus, PFORM, self.cutoff,
                          degree=self.torus.dim - self.degree,
                          r_squared=rho2)

    def to_closed(self) -> "TheorySpec":
        if self.variant == SCALAR:
            raise VariantMismatch("scalar theory has no closed variant")
        return replace(self, variant=CLOSED_PFORM)

    def to_pform(self) -> "TheorySpec":
        if self.variant == SCALAR:
            raise VariantMismatch("scalar theory has no p-form lift")
        return replace(self, variant=PFORM)

    # -- serialisation ------------------------------------------------

    def to_dict(self) -> dict:
        out = {"variant": self.variant, "torus_dim": self.torus.dim,
               "cutoff": float(self.cutoff)}
        if self.variant in (PFORM, CLOSED_PFORM):
            out["degree"] = self.degree
            out["r_squared"] = float(self.r_squared)
            if is_exact(self.r_squared):
                # couplings like 1/(4 R^2) need not fit a double exactly
                out["r_squared_exact"] = str(Fraction(self.r_squared))
        else:
            out["mass"] = float(self.mass)
            out["mass_sign"] = self.mass_sign
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TheorySpec":
        torus = Torus(int(data["torus_dim"]))
        variant = data["variant"]
        if variant in (PFORM, CLOSED_PFORM):
            if "r_squared_exact" in data:
                r2 = Fraction(data["r_squared_exact"])
            else:
                r2 = data["r_squared"]
            return cls(torus, variant, data["cutoff"],
                       degree=int(data["degree"]), r_squared=r2)
        return cls(torus, variant, data["cutoff"], mass=data["mass"],
                   mass_sign=int(data.get("mass_sign", 1)))


def _attainable_eigenvalues(n: int, cutoff) -> set:
    vals = set()
    for k in ModeBasis(Torus(n), cutoff).wavevectors():
        vals.add(sum(c * c for c in k))
    return vals


# -- graded observables ------------------------------------------------


def _sort_sign(seq):
    """Sort an odd-generator position sequence; sign = parity of the sort."""
    seq = list(seq)
    sign = 1
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    return tuple(seq), sign


def _merge_masks(s: tuple, t: tuple):
    """Normal-ordered union of two ascending antifield masks with Koszul
    sign; (None, 0) when they overlap (odd squares vanish)."""
    if set(s) & set(t):
        return None, 0
    sign = 1
    for a in s:
        for b in t:
            if a > b:
                sign = -sign
    merged = tuple(sorted(s + t))
    return merged, sign


class GradedObservable:
    """Polynomial in even field and odd antifield generators."""

    __slots__ = ("field_generators", "antifield_generators", "terms")

    def __init__(self, field_generators, antifield_generators, terms,
                 validate: bool = True):
        self.field_generators = tuple(field_generators)
        self.antifield_generators = tuple(antifield_generators)
        if validate:
            all_gens = self.field_generators + self.antifield_generators
            for g in all_gens[1:]:
                if (g.torus != all_gens[0].torus
                        or g.degree != all_gens[0].degree):
                    raise DegreeMismatch(
                        "all smearings must share torus and degree")
        self.terms = {}
        nf = len(self.field_generators)
        na = len(self.antifield_generators)
        for (exps, mask), c in terms.items():
            exps = tuple(int(e) for e in exps)
            mask = tuple(int(l) for l in mask)
            if len(exps) != nf:
                raise ValueError("field exponent width mismatch")
            if any(e < 0 for e in exps):
                raise ValueError("negative field exponent")
            if mask != tuple(sorted(set(mask))) or any(
                    not 0 <= l < na for l in mask):
                raise ValueError(f"antifield mask {mask} not canonical")
            if not scalar_is_zero(c):
                key = (exps, mask)
                self.terms[key] = self.terms.get(key, 0) + c

    # -- constructors -------------------------------------------------

    @classmethod
    def from_polynomial(cls, obs: PolynomialObservable) -> "GradedObservable":
        terms = {(exps, ()): c for exps, c in obs.terms.items()}
        return cls(obs.generators, (), terms, validate=False)

    @classmethod
    def antifield(cls, smearing: SpectralForm, coefficient=1) -> "GradedObservable":
        return cls((), (smearing,), {((), (0,)): coefficient}, validate=False)

    @classmethod
    def constant(cls, value) -> "GradedObservable":
        return cls((), (), {((), ()): value}, validate=False)

    # -- structure ----------------------------------------------------

    def ghost_degrees(self) -> set[int]:
        return {-len(mask) for _, mask in self.terms}

    def max_total_degree(self) -> int:
        return max((sum(e) + len(m) for e, m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def field_part(self) -> PolynomialObservable:
        """Ghost-degree-0 component as an ordinary polynomial observable."""
        terms = {exps: c for (exps, mask), c in self.terms.items() if not mask}
        return PolynomialObservable(self.field_generators, terms,
                                    validate=False)

    # -- generator alignment ------------------------------------------

    def _aligned_with(self, other: "GradedObservable"):
        fgens = list(self.field_generators)
        fmap_idx = {id_key(g): i for i, g in enumerate(fgens)}
        other_f = []
        for g in other.field_generators:
            key = id_key(g)
            if key not in fmap_idx:
                fmap_idx[key] = len(fgens)
                fgens.append(g)
            other_f.append(fmap_idx[key])
        agens = list(self.antifield_generators)
        amap_idx = {id_key(g): i for i, g in enumerate(agens)}
        other_a = []
        for g in other.antifield_generators:
            key = id_key(g)
            if key not in amap_idx:
                amap_idx[key] = len(agens)
                agens.append(g)
            other_a.append(amap_idx[key])
        return fgens, agens, other_f, other_a

    @staticmethod
    def _embed_term(exps, mask, fmap, amap, nf):
        new_exps = [0] * nf
        for e, pos in zip(exps, fmap):
            new_exps[pos] += e
        mapped = [amap[l] for l in mask]
        new_mask, sign = _sort_sign(mapped)
        return tuple(new_exps), new_mask, sign

    # -- algebra ------------------------------------------------------

    def __add__(self, other: "GradedObservable") -> "GradedObservable":
        fgens, agens, of, oa = self._aligned_with(other)
        nf = len(fgens)
        smap = list(range(len(self.field_generators)))
        samap = list(range(len(self.antifield_generators)))
        terms: dict = {}
        for (exps, mask), c in self.terms.items():
            e, m, s = self._embed_term(exps, mask, smap, samap, nf)
            terms[(e, m)] = terms.get((e, m), 0) + s * c
        for (exps, mask), c in other.terms.items():
            e, m, s = self._embed_term(exps, mask, of, oa, nf)
            terms[(e, m)] = terms.get((e, m), 0) + s * c
        return GradedObservable(fgens, agens, terms, validate=False)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, scalar) -> "GradedObservable":
        return GradedObservable(
            self.field_generators, self.antifield_generators,
            {k: c * scalar for k, c in self.terms.items()}, validate=False)

    def __mul__(self, other: "GradedObservable") -> "GradedObservable":
        if not isinstance(other, GradedObservable):
            return self.scale(other)
        fgens, agens, of, oa = self._aligned_with(other)
        nf = len(fgens)
        smap = list(range(len(self.field_generators)))
        samap = list(range(len(self.antifield_generators)))
        terms: dict = {}
        mine = [(self._embed_term(e, m, smap, samap, nf), c)
                for (e, m), c in self.terms.items()]
        theirs = [(self._embed_term(e, m, of, oa, nf), c)
                  for (e, m), c in other.terms.items()]
        for (e1, m1, s1), c1 in mine:
            for (e2, m2, s2), c2 in theirs:
                merged, ms = _merge_masks(m1, m2)
                if merged is None:
                    continue
                key = (tuple(a + b for a, b in zip(e1, e2)), merged)
                terms[key] = terms.get(key, 0) + s1 * s2 * ms * c1 * c2
        return GradedObservable(fgens, agens, terms, validate=False)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, GradedObservable):
            return NotImplemented
        diff = self - other
        return all(scalar_is_zero(c) for c in diff.terms.values())

    __hash__ = None

    def approx_zero(self, tol: float = 0.0) -> bool:
        return all(scalar_is_zero(c, tol) for c in self.terms.values())

    def __repr__(self):
        return (f"GradedObservable(fields={len(self.field_generators)}, "
                f"antifields={len(self.antifield_generators)}, "
                f"terms={len(self.terms)})")


# -- pairing table -----------------------------------------------------


def _pairing_table(graded: GradedObservable):
    cache: dict[tuple[int, int], object] = {}

    def g(l: int, j: int):
        if (l, j) not in cache:
            cache[(l, j)] = graded.antifield_generators[l].pairing(
                graded.field_generators[j])
        return cache[(l, j)]

    return g


def _guard_antifield_depth(obs: GradedObservable, limit: int, what: str):
    worst = max((len(m) for _, m in obs.terms), default=0)
    if worst > limit:
        raise NotImplementedInCalculus(
            f"{what} supports at most {limit} antifields per term, got {worst}")


# -- structure maps ----------------------------------------------------


def poisson_bracket(a: GradedObservable, b: GradedObservable) -> GradedObservable:
    """Odd bracket extending {v(chi), O(beta)} = <chi, beta> as a
    biderivation; supports terms at most quadratic in antifields."""
    _guard_antifield_depth(a, 2, "poisson_bracket")
    _guard_antifield_depth(b, 2, "poisson_bracket")
    product = a * b  # cheap way to obtain the aligned generator tuples
    fgens = product.field_generators
    agens = product.antifield_generators
    nf = len(fgens)
    # re-embed both operands on the common generator tuples
    empty = GradedObservable(fgens, agens, {}, validate=False)
    ea = empty + a
    eb = empty + b
    pair = _pairing_table(empty)

    terms: dict = {}

    def add(key, val):
        if scalar_is_zero(val):
            return
        terms[key] = terms.get(key, 0) + val

    for (e1, m1), c1 in ea.terms.items():
        for (e2, m2), c2 in eb.terms.items():
            par = -1 if len(m1) % 2 else 1
            # right derivative of A by v_l against field derivative of B
            for posl, l in enumerate(m1):
                sr = -1 if (len(m1) - 1 - posl) % 2 else 1
                s_rest = tuple(x for x in m1 if x != l)
                for j in range(nf):
                    if e2[j] == 0:
                        continue
                    merged, ms = _merge_masks(s_rest, m2)
                    if merged is None:
                        continue
                    gl = pair(l, j)
                    if scalar_is_zero(gl):
                        continue
                    e_new = list(x + y for x, y in zip(e1, e2))
                    e_new[j] -= 1
                    add((tuple(e_new), merged),
                        c1 * c2 * sr * ms * e2[j] * gl)
            # field derivative of A against left derivative of B by v_l
            for posl, l in enumerate(m2):
                sl = -1 if posl % 2 else 1
                t_rest = tuple(x for x in m2 if x != l)
                for j in range(nf):
                    if e1[j] == 0:
                        continue
                    merged, ms = _merge_masks(m1, t_rest)
                    if merged is None:
                        continue
                    gl = pair(l, j)
                    if scalar_is_zero(gl):
                        continue
                    e_new = list(x + y for x, y in zip(e1, e2))
                    e_new[j] -= 1
                    add((tuple(e_new), merged),
                        c1 * c2 * par * sl * ms * e1[j] * gl)
    return GradedObservable(fgens, agens, terms, validate=False)


def quantum_bv(obs: GradedObservable) -> GradedObservable:
    """Second-order contraction D pairing one antifield with one field."""
    pair = _pairing_table(obs)
    terms: dict = {}
    for (exps, mask), c in obs.terms.items():
        for posl, l in enumerate(mask):
            sgn = -1 if posl % 2 else 1
            rest = tuple(x for x in mask if x != l)
            for j, ej in enumerate(exps):
                if ej == 0:
                    continue
                gl = pair(l, j)
                if scalar_is_zero(gl):
                    continue
                e_new = list(exps)
                e_new[j] -= 1
                key = (tuple(e_new), rest)
                v = terms.get(key, 0) + c * sgn * ej * gl
                terms[key] = v
    return GradedObservable(obs.field_generators, obs.antifield_generators,
                            terms, validate=False)


def classical_bv(obs: GradedObservable, theory: TheorySpec) -> GradedObservable:
    """Odd derivation replacing each antifield v(chi) by the field
    observable O(-2 Q chi) coming from the first variation of the action."""
    fgens = list(obs.field_generators)
    findex = {id_key(g): i for i, g in enumerate(fgens)}
    images = []
    for chi in obs.antifield_generators:
        theory.check_form(chi)
        img = theory.apply_q(chi) * (-2)
        key = id_key(img)
        if key not in findex:
            findex[key] = len(fgens)
            fgens.append(img)
        images.append(findex[key])
    nf = len(fgens)
    terms: dict = {}
    for (exps, mask), c in obs.terms.items():
        base = list(exps) + [0] * (nf - len(exps))
        for posl, l in enumerate(mask):
            sgn = -1 if posl % 2 else 1
            rest = tuple(x for x in mask if x != l)
            e_new = list(base)
            e_new[images[l]] += 1
            key = (tuple(e_new), rest)
            terms[key] = terms.get(key, 0) + c * sgn
    # re-embed untouched terms on the widened field tuple
    out = GradedObservable(fgens, obs.antifield_generators, terms,
                           validate=False)
    return out


def total_bv(obs: GradedObservable, theory: TheorySpec) -> GradedObservable:
    """Total differential: classical part plus quantum contraction."""
    return classical_bv(obs, theory) + quantum_bv(obs)


def is_gauge_invariant(obs: GradedObservable, tol: float = 1e-12) -> bool:
    """True when every smearing is free of coexact parts, i.e. the
    observable descends to the closed sector."""
    from .geometry import coexact_part
    for g in obs.field_generators + obs.antifield_generators:
        if not coexact_part(g).is_zero(tol):
            return False
    return True
