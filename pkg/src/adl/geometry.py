"""Spectral exterior calculus on flat tori.

Forms on the torus T^n = [0, 2pi]^n (unit flat metric, n in {2, 3, 4}) are
stored as finite coefficient dictionaries over an L^2-orthonormal real
Fourier basis.  A basis element is labelled by a mode

    FormMode(k, phase, idx)  ~  N_k * phase(k . x) dx_idx

with phase in {cos, sin}, idx a strictly increasing tuple of 0-based
coordinate indices, and normalisation

    N_k = sqrt(2) * (2pi)^(-n/2)   for k != 0,
    N_0 = (2pi)^(-n/2).

Wavevectors are canonicalised to a half lattice: k = 0 keeps only the cos
mode, otherwise the first nonzero component of k is positive (the sign of a
sin mode absorbs the reflection).  A truncation retains |k|^2 <= cutoff.

On this basis the exterior derivative d, the codifferential d* (the L^2
adjoint of d), the Hodge star and the Laplacian act mode-by-mode:

    d   : cos <-> sin with factors -k_j / +k_j and wedge signs,
    d*  = (-1)^(n(p+1)+1) * d *   on p-forms,
    *   : (phi dx_I) -> sign(I, I^c) phi dx_{I^c},
    Lap : multiplication by |k|^2.

Every truncated form splits orthogonally into exact + coexact + harmonic
parts; the harmonic part is exactly the k = 0 sector.  Harmonic forms with
quantised periods form a lattice whose generator in direction dx_I has L^2
norm 2*sqrt(pi)*R at coupling R^2 (so the primal and dual lattice spacings
multiply to 2*pi, making the two sides of the duality Poisson-dual).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import DegreeMismatch, DegreeOutOfRange
from .exact import exact_lift, scalar_is_zero, to_complex

COS = "cos"
SIN = "sin"

#: serialisation drops coefficients below this magnitude
COEFF_DROP_THRESHOLD = 1e-15


class FormMode(NamedTuple):
    """Basis label: wavevector, trig phase, coordinate index set."""

    k: tuple[int, ...]
    phase: str
    idx: tuple[int, ...]


@dataclass(frozen=True)
class Torus:
    """Flat torus [0, 2pi]^dim with the unit metric."""

    dim: int

    def __post_init__(self):
        if self.dim not in (2, 3, 4):
            raise ValueError(f"torus dimension must be 2, 3 or 4, got {self.dim}")

    @property
    def volume(self) -> float:
        return (2.0 * math.pi) ** self.dim


def canonical_wavevector(k: Iterable[int]) -> tuple[tuple[int, ...], int]:
    """Map k to its half-lattice representative.

    Returns (canonical k, sign) where sign = -1 iff k was reflected; a sin
    mode picks up that sign, a cos mode does not.
    """
    kt = tuple(int(c) for c in k)
    for c in kt:
        if c > 0:
            return kt, 1
        if c < 0:
            return tuple(-x for x in kt), -1
    return kt, 1


def is_canonical_wavevector(k: tuple[int, ...]) -> bool:
    for c in k:
        if c > 0:
            return True
        if c < 0:
            return False
    return True


def mode_norm_constant(n: int, k: tuple[int, ...]) -> float:
    """L^2 normalisation N_k of the scalar mode function."""
    base = (2.0 * math.pi) ** (-0.5 * n)
    if any(k):
        return math.sqrt(2.0) * base
    return base


def merge_sign(left: tuple[int, ...], right: tuple[int, ...]) -> int:
    """Koszul sign of sorting the concatenation of two increasing index
    tuples; 0 if they overlap."""
    sign = 1
    for a in left:
        for b in right:
            if a == b:
                return 0
            if a > b:
                sign = -sign
    return sign


def insertion_sign(j: int, idx: tuple[int, ...]) -> int:
    """Sign of dx_j wedge dx_idx ordered into dx_{sorted}; 0 if j in idx."""
    return merge_sign((j,), idx)


def complement(idx: tuple[int, ...], n: int) -> tuple[int, ...]:
    return tuple(j for j in range(n) if j not in idx)


def _check_same_shape(a: "SpectralForm", b: "SpectralForm"):
    if a.torus != b.torus or a.degree != b.degree:
        raise DegreeMismatch(
            f"forms live in different spaces: (n={a.torus.dim}, p={a.degree}) "
            f"vs (n={b.torus.dim}, p={b.degree})")


class SpectralForm:
    """Truncated p-form: finite dict FormMode -> coefficient.

    Coefficients may be int/Fraction/ExactComplex (exact mode) or
    float/complex (numeric mode); the algebra preserves exactness.
    """

    __slots__ = ("torus", "degree", "cutoff", "coeff")

    def __init__(self, torus: Torus, degree: int, cutoff, coeff=None,
                 validate: bool = True):
        if not 0 <= degree <= torus.dim:
            raise DegreeOutOfRange(
                f"degree {degree} outside 0..{torus.dim}")
        self.torus = torus
        self.degree = int(degree)
        self.cutoff = cutoff
        self.coeff = {}
        if coeff:
            for mode, c in coeff.items():
                if validate:
                    self._check_mode(mode)
                if not scalar_is_zero(c):
                    self.coeff[mode] = c

    def _check_mode(self, mode: FormMode):
        n = self.torus.dim
        if len(mode.k) != n:
            raise ValueError(f"wavevector length {len(mode.k)} != {n}")
        if mode.phase not in (COS, SIN):
            raise ValueError(f"unknown phase {mode.phase!r}")
        if not is_canonical_wavevector(mode.k):
            raise ValueError(f"wavevector {mode.k} is not canonical")
        if mode.phase == SIN and not any(mode.k):
            raise ValueError("k = 0 has no sin mode")
        if len(mode.idx) != self.degree:
            raise ValueError(
                f"index set {mode.idx} has size {len(mode.idx)}, "
                f"expected degree {self.degree}")
        if any(not 0 <= j < n for j in mode.idx):
            raise ValueError(f"coordinate index out of range in {mode.idx}")
        if tuple(sorted(set(mode.idx))) != mode.idx:
            raise ValueError(f"index set {mode.idx} not strictly increasing")
        if sum(c * c for c in mode.k) > self.cutoff:
            raise ValueError(f"wavevector {mode.k} above cutoff {self.cutoff}")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, torus: Torus, degree: int, cutoff) -> "SpectralForm":
        return cls(torus, degree, cutoff)

    @classmethod
    def unit_mode(cls, torus: Torus, cutoff, k, phase: str,
                  idx: Iterable[int] = ()) -> "SpectralForm":
        """The basis form of a single mode with coefficient 1."""
        kc, sign = canonical_wavevector(k)
        c = 1 if phase == COS else sign
        mode = FormMode(kc, phase, tuple(idx))
        return cls(torus, len(mode.idx), cutoff, {mode: c})

    def _like(self, coeff, degree=None) -> "SpectralForm":
        return SpectralForm(self.torus, self.degree if degree is None else degree,
                            self.cutoff, coeff, validate=False)

    # -- algebra ------------------------------------------------------

    def __add__(self, other: "SpectralForm") -> "SpectralForm":
        _check_same_shape(self, other)
        out = dict(self.coeff)
        for mode, c in other.coeff.items():
            s = out.get(mode, 0) + c
            if scalar_is_zero(s):
                out.pop(mode, None)
            else:
                out[mode] = s
        res = self._like(out)
        res.cutoff = max(self.cutoff, other.cutoff)
        return res

    def __sub__(self, other: "SpectralForm") -> "SpectralForm":
        return self + (-1) * other

    def __neg__(self) -> "SpectralForm":
        return self._like({m: -c for m, c in self.coeff.items()})

    def __mul__(self, scalar) -> "SpectralForm":
        if scalar_is_zero(scalar):
            return self._like({})
        return self._like({m: c * scalar for m, c in self.coeff.items()})

    __rmul__ = __mul__

    def map_coeff(self, fn) -> "SpectralForm":
        out = {}
        for m, c in self.coeff.items():
            v = fn(m, c)
            if not scalar_is_zero(v):
                out[m] = v
        return self._like(out)

    # -- pairings -----------------------------------------------------

    def pairing(self, other: "SpectralForm"):
        """Bilinear L^2 pairing <a, b> = sum of coefficient products."""
        _check_same_shape(self, other)
        if len(other.coeff) < len(self.coeff):
            self, other = other, self
        total = 0
        for mode, c in self.coeff.items():
            d = other.coeff.get(mode)
            if d is not None:
                total = total + c * d
        return total

    def hermitian_pairing(self, other: "SpectralForm"):
        """Sesquilinear pairing (conjugate-linear in self)."""
        _check_same_shape(self, other)
        total = 0
        for mode, c in self.coeff.items():
            d = other.coeff.get(mode)
            if d is not None:
                cc = c.conjugate() if hasattr(c, "conjugate") else c
                total = total + cc * d
        return total

    def norm_sq(self):
        return self.pairing(self)

    # -- predicates ---------------------------------------------------

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(scalar_is_zero(c, tol) for c in self.coeff.values())

    def approx_eq(self, other: "SpectralForm", tol: float = 1e-12) -> bool:
        _check_same_shape(self, other)
        for mode in set(self.coeff) | set(other.coeff):
            a = to_complex(self.coeff.get(mode, 0))
            b = to_complex(other.coeff.get(mode, 0))
            if abs(a - b) > tol:
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, SpectralForm):
            return NotImplemented
        return (self.torus == other.torus and self.degree == other.degree
                and self.coeff == other.coeff)

    def __hash__(self):
        return hash((self.torus, self.degree,
                     frozenset((m, to_complex(c)) for m, c in self.coeff.items())))

    def __repr__(self):
        return (f"SpectralForm(n={self.torus.dim}, p={self.degree}, "
                f"modes={len(self.coeff)})")

    # -- exact/float conversion ---------------------------------------

    def as_exact(self) -> "SpectralForm":
        return self._like({m: exact_lift(c) for m, c in self.coeff.items()})

    def as_float(self) -> "SpectralForm":
        out = {}
        for m, c in self.coeff.items():
            z = to_complex(c)
            out[m] = z.real if z.imag == 0.0 else z
        return self._like(out)

    # -- serialisation ------------------------------------------------

    def to_dict(self, threshold: float = COEFF_DROP_THRESHOLD) -> dict:
        modes = []
        for mode in sorted(self.coeff):
            z = to_complex(self.coeff[mode])
            if abs(z) < threshold:
                continue
            modes.append({"k": list(mode.k), "phase": mode.phase,
                          "idx": list(mode.idx), "re": z.real, "im": z.imag})
        return {"torus_dim": self.torus.dim, "degree": self.degree,
                "cutoff": float(self.cutoff), "modes": modes}

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralForm":
        torus = Torus(int(data["torus_dim"]))
        coeff = {}
        for entry in data["modes"]:
            mode = FormMode(tuple(int(c) for c in entry["k"]),
                            entry["phase"], tuple(int(j) for j in entry["idx"]))
            re, im = float(entry.get("re", 0.0)), float(entry.get("im", 0.0))
            coeff[mode] = re if im == 0.0 else complex(re, im)
        return cls(torus, int(data["degree"]), data["cutoff"], coeff)


# -- truncated mode basis ---------------------------------------------


class ModeBasis:
    """Enumeration of the canonical modes with |k|^2 <= cutoff."""

    def __init__(self, torus: Torus, cutoff):
        if cutoff < 0:
            raise ValueError("cutoff must be non-negative")
        self.torus = torus
        self.cutoff = cutoff

    def wavevectors(self) -> list[tuple[int, ...]]:
        """Canonical wavevectors in the ball, lexicographically sorted."""
        n = self.torus.dim
        kmax = math.isqrt(int(self.cutoff))
        out = []
        for k in itertools.product(range(-kmax, kmax + 1), repeat=n):
            if sum(c * c for c in k) <= self.cutoff and is_canonical_wavevector(k):
                out.append(k)
        out.sort()
        return out

    def scalar_modes(self) -> list[tuple[tuple[int, ...], str]]:
        out = []
        for k in self.wavevectors():
            out.append((k, COS))
            if any(k):
                out.append((k, SIN))
        return out

    def modes(self, degree: int) -> list[FormMode]:
        n = self.torus.dim
        if not 0 <= degree <= n:
            raise DegreeOutOfRange(f"degree {degree} outside 0..{n}")
        idxs = list(itertools.combinations(range(n), degree))
        return [FormMode(k, phase, idx)
                for (k, phase) in self.scalar_modes() for idx in idxs]

    def dimension(self, degree: int) -> int:
        return len(self.modes(degree))


# -- mode-by-mode operators -------------------------------------------


def exterior_derivative(form: SpectralForm) -> SpectralForm:
    """d: p-forms -> (p+1)-forms."""
    n = form.torus.dim
    p = form.degree
    if p >= n:
        raise DegreeOutOfRange(f"d would leave degree range: p = {p} on T^{n}")
    out: dict[FormMode, object] = {}
    for mode, c in form.coeff.items():
        k, phase, idx = mode
        new_phase = SIN if phase == COS else COS
        for j in range(n):
            kj = k[j]
            if kj == 0 or j in idx:
                continue
            s = insertion_sign(j, idx)
            factor = (-kj if phase == COS else kj) * s
            new_idx = tuple(sorted(idx + (j,)))
            key = FormMode(k, new_phase, new_idx)
            v = out.get(key, 0) + c * factor
            if scalar_is_zero(v):
                out.pop(key, None)
            else:
                out[key] = v
    return SpectralForm(form.torus, p + 1, form.cutoff, out, validate=False)


def hodge_star(form: SpectralForm) -> SpectralForm:
    """Hodge star: (phi dx_I) -> sign(I, I^c) phi dx_{I^c}."""
    n = form.torus.dim
    out = {}
    for mode, c in form.coeff.items():
        idx_c = complement(mode.idx, n)
        s = merge_sign(mode.idx, idx_c)
        key = FormMode(mode.k, mode.phase, idx_c)
        out[key] = c * s
    return SpectralForm(form.torus, n - form.degree, form.cutoff, out,
                        validate=False)


def hodge_star_inverse(form: SpectralForm) -> SpectralForm:
    """Inverse of the Hodge star on q-forms: (-1)^(q(n-q)) * star."""
    n = form.torus.dim
    q = form.degree
    g = hodge_star(form)
    return g if (q * (n - q)) % 2 == 0 else -g


def codifferential(form: SpectralForm) -> SpectralForm:
    """d* = (-1)^(n(p+1)+1) * d * : p-forms -> (p-1)-forms (L^2 adjoint of d)."""
    n = form.torus.dim
    p = form.degree
    if p <= 0:
        raise DegreeOutOfRange(f"d* undefined on degree {p}")
    g = hodge_star(exterior_derivative(hodge_star(form)))
    sign = -1 if (n * (p + 1) + 1) % 2 else 1
    return g if sign == 1 else -g


def laplacian(form: SpectralForm) -> SpectralForm:
    """Hodge Laplacian: multiplication by |k|^2 in every mode."""
    return form.map_coeff(lambda m, c: c * sum(x * x for x in m.k))


def laplace_eigenvalue(mode: FormMode) -> int:
    return sum(c * c for c in mode.k)


class HodgeParts(NamedTuple):
    exact: SpectralForm
    coexact: SpectralForm
    harmonic: SpectralForm


def hodge_decompose(form: SpectralForm) -> HodgeParts:
    """Orthogonal split into exact + coexact + harmonic parts.

    Per nonzero mode the projectors are d d*/|k|^2 and d* d/|k|^2; the k = 0
    sector is harmonic.  Degree 0 has no exact part, degree n no coexact.
    """
    n = form.torus.dim
    p = form.degree
    harm = {m: c for m, c in form.coeff.items() if not any(m.k)}
    rest = form._like({m: c for m, c in form.coeff.items() if any(m.k)})
    harmonic = form._like(harm)
    zero = form._like({})
    if rest.is_zero():
        return HodgeParts(zero, zero, harmonic)
    if p == 0:
        return HodgeParts(zero, rest, harmonic)
    if p == n:
        return HodgeParts(rest, zero, harmonic)
    exact = exterior_derivative(codifferential(rest))
    exact = exact.map_coeff(
        lambda m, c: c * _inv_eigenvalue(m, c))
    coexact = rest - exact
    return HodgeParts(exact, coexact, harmonic)


def _inv_eigenvalue(mode: FormMode, c):
    lam = laplace_eigenvalue(mode)
    if isinstance(c, (int, Fraction)) or hasattr(c, "re"):
        return Fraction(1, lam)
    return 1.0 / lam


def exact_part(form: SpectralForm) -> SpectralForm:
    return hodge_decompose(form).exact


def coexact_part(form: SpectralForm) -> SpectralForm:
    return hodge_decompose(form).coexact


def harmonic_part(form: SpectralForm) -> SpectralForm:
    return hodge_decompose(form).harmonic


def closed_part(form: SpectralForm) -> SpectralForm:
    """Exact + harmonic part (range of the projector onto closed forms)."""
    parts = hodge_decompose(form)
    return parts.exact + parts.harmonic


# -- pointwise evaluation and cycle integrals -------------------------


def mode_values(mode: FormMode, n: int, points: np.ndarray) -> np.ndarray:
    """Scalar factor N_k phase(k . x) of a mode at an (N, n) array of points."""
    pts = np.asarray(points, dtype=float).reshape(-1, n)
    arg = pts @ np.asarray(mode.k, dtype=float)
    fn = np.cos if mode.phase == COS else np.sin
    return mode_norm_constant(n, mode.k) * fn(arg)


def evaluate_components(form: SpectralForm, points: np.ndarray) -> dict:
    """Componentwise values {idx: array} of a numeric form at sample points."""
    n = form.torus.dim
    out: dict[tuple[int, ...], np.ndarray] = {}
    for mode, c in form.coeff.items():
        vals = to_complex(c) * mode_values(mode, n, points)
        if mode.idx in out:
            out[mode.idx] = out[mode.idx] + vals
        else:
            out[mode.idx] = vals
    return {idx: (v.real if np.allclose(v.imag, 0) else v)
            for idx, v in out.items()}


def integrate_over_cycle(form: SpectralForm, cycle: tuple[int, ...],
                         offset=None) -> complex:
    """Integral of a p-form over the coordinate p-cycle spanned by `cycle`
    at the given offset in the transverse directions.

    Only modes whose index set equals the cycle and whose wavevector
    vanishes along it survive; each contributes
    coeff * N_k * phase(k . offset) * (2pi)^p.
    """
    n = form.torus.dim
    p = form.degree
    cycle = tuple(sorted(cycle))
    if len(cycle) != p:
        raise DegreeMismatch(
            f"cycle of dimension {len(cycle)} cannot support a {p}-form")
    x0 = [0.0] * n if offset is None else list(offset)
    total = 0.0 + 0.0j
    for mode, c in form.coeff.items():
        if mode.idx != cycle or any(mode.k[j] for j in cycle):
            continue
        arg = sum(mode.k[j] * x0[j] for j in range(n))
        ph = math.cos(arg) if mode.phase == COS else math.sin(arg)
        total += (to_complex(c) * mode_norm_constant(n, mode.k) * ph
                  * (2.0 * math.pi) ** p)
    return total if total.imag != 0.0 else total.real


# -- harmonic period lattice ------------------------------------------


@dataclass(frozen=True)
class HarmonicLattice:
    """Lattice of harmonic p-forms with quantised periods at coupling R^2.

    The generator in direction dx_I is spacing * (unit-norm constant mode),
    with spacing = 2*sqrt(pi)*R; its integral over the coordinate I-cycle is
    2*sqrt(pi)*R*(2pi)^(p - n/2).  The Gaussian action of the lattice
    element with integer coordinates m is then

        S(m) = R^2 * |lambda_m|^2 = 4*pi*R^4 * sum(m_i^2).

    This scaling makes the primal (coupling R) and dual (coupling 1/(2R))
    lattices Poisson-dual: s(R) * s(1/(2R)) = 2*pi.
    """

    torus: Torus
    degree: int
    r_squared: float
    cutoff: float = 0.0

    def __post_init__(self):
        if not 0 <= self.degree <= self.torus.dim:
            raise DegreeOutOfRange(
                f"degree {self.degree} outside 0..{self.torus.dim}")
        if not self.r_squared > 0:
            raise ValueError("coupling r_squared must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * math.sqrt(math.pi * float(self.r_squared))

    @property
    def rank(self) -> int:
        return math.comb(self.torus.dim, self.degree)

    def directions(self) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(self.torus.dim), self.degree))

    def generators(self) -> list[SpectralForm]:
        zero_k = (0,) * self.torus.dim
        return [SpectralForm(self.torus, self.degree, self.cutoff,
                             {FormMode(zero_k, COS, idx): self.spacing},
                             validate=False)
                for idx in self.directions()]

    def element_form(self, m: Iterable[int]) -> SpectralForm:
        zero_k = (0,) * self.torus.dim
        coeff = {}
        for mi, idx in zip(m, self.directions()):
            if mi:
                coeff[FormMode(zero_k, COS, idx)] = mi * self.spacing
        return SpectralForm(self.torus, self.degree, self.cutoff, coeff,
                            validate=False)

    def action_of(self, m: Iterable[int]) -> float:
        r2 = float(self.r_squared)
        return 4.0 * math.pi * r2 * r2 * sum(mi * mi for mi in m)

    def elements(self, max_action: float) -> Iterator[tuple[tuple[int, ...], float]]:
        """All integer coordinate vectors with action <= max_action, in
        lexicographic order."""
        r2 = float(self.r_squared)
        bound = max_action / (4.0 * math.pi * r2 * r2)
        radius = int(math.floor(math.sqrt(bound))) if bound >= 0 else -1
        rng = range(-radius, radius + 1)
        for m in itertools.product(rng, repeat=self.rank):
            if sum(mi * mi for mi in m) <= bound:
                yield m, self.action_of(m)
