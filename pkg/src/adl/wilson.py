"""Exponential holonomy observables and their duality.

A Wilson-type observable is W = exp(i r <a, beta>) for a p-form smearing
beta, typically the heat-smoothed current of a p-cycle so that <a, beta>
approximates the period of a over the cycle.  A 't-Hooft-type observable is
the same functional defined through a chain of complementary degree q =
n - p: its effective smearing is the inverse star transport of the chain
current (the transport sign is folded into the stored smearing and recorded
in ``defining_degree``).

The duality transform acts on exponentials in closed form.  From coupling
R^2 with rho^2 = 1/(4 R^2):

    dual(e^{i r O(beta)}) = e^{- r^2 ||beta||^2 / (4 R^2)}
                            * e^{i (i r / 2R^2) O(*beta)},

i.e. prefactor from completing the square, charge r -> i r/(2 R^2), smearing
transported by the star, and the kind flips Wilson <-> 't Hooft.  The
inverse transform uses charge factor -i/(2 rho^2) and the inverse star;
composing the two returns the original observable with prefactor product
exactly 1.

Closed-sector expectations factor into a Gaussian part over exact
fluctuations and a theta-function ratio over the harmonic lattice:

    <W>_closed = e^{- r^2 ||E beta||^2 / (4 R^2)}
                 * sum_m e^{-S(m) + i r <lambda_m, beta>} / sum_m e^{-S(m)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bv import CLOSED_PFORM, PFORM, SCALAR, TheorySpec
from .errors import (DegreeOutOfRange, LiftRequired, QuadratureFail,
                     VariantMismatch)
from .exact import (ExactComplex, exact_lift, exact_to_strings, is_exact,
                    strings_to_exact, to_complex)
from .geometry import (COS, SIN, FormMode, HarmonicLattice, ModeBasis,
                       SpectralForm, Torus, exact_part, harmonic_part,
                       hodge_star, hodge_star_inverse, mode_norm_constant)
from .observables import PolynomialObservable
from .oracle import ExpectationResult, covariance_from_theory

WILSON = "wilson"
THOOFT = "thooft"

#: quadrature halving error above which chain smearing is rejected
QUADRATURE_TOL = 1e-8


@dataclass(frozen=True)
class ExponentialObservable:
    """exp(i * charge * <a, smearing>) with the smearing in field degree."""

    kind: str
    smearing: SpectralForm
    charge: object
    defining_degree: int = None  # degree of the defining chain

    def __post_init__(self):
        if self.kind not in (WILSON, THOOFT):
            raise ValueError(f"unknown exponential kind {self.kind!r}")
        if self.defining_degree is None:
            object.__setattr__(self, "defining_degree", self.smearing.degree)

    def evaluate(self, field: SpectralForm):
        t = to_complex(field.pairing(self.smearing))
        return complex(np.exp(1j * to_complex(self.charge) * t))

    def to_dict(self) -> dict:
        z = to_complex(self.charge)
        charge = {"im": z.imag, "re": z.real}
        if is_exact(self.charge):
            charge["exact"] = exact_to_strings(self.charge)
        return {"kind": self.kind, "charge": charge,
                "defining_degree": self.defining_degree,
                "smearing": self.smearing.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "ExponentialObservable":
        ch = data["charge"]
        if "exact" in ch:
            charge = strings_to_exact(ch["exact"])
        else:
            charge = complex(float(ch["re"]), float(ch["im"]))
            if charge.imag == 0.0:
                charge = charge.real
        dd = data.get("defining_degree")
        return cls(data["kind"], SpectralForm.from_dict(data["smearing"]),
                   charge, defining_degree=None if dd is None else int(dd))


def wilson_observable(smearing: SpectralForm, charge) -> ExponentialObservable:
    return ExponentialObservable(WILSON, smearing, charge)


def thooft_observable(chain_smearing: SpectralForm, charge) -> ExponentialObservable:
    """Disorder-type exponential of a chain of complementary degree; the
    stored smearing is the inverse star transport of the chain current."""
    eff = hodge_star_inverse(chain_smearing)
    return ExponentialObservable(THOOFT, eff, charge,
                                 defining_degree=chain_smearing.degree)


# -- chain smearing ---------------------------------------------------


def smear_coordinate_cycle(torus: Torus, cutoff, cycle, offset=None,
                           epsilon: float = 0.0) -> SpectralForm:
    """Heat-smoothed current of the coordinate p-cycle spanned by the given
    axes at a transverse offset.

    The pairing <a, beta> equals the cycle period of e^{-eps Lap} a: mode
    (k, phase, I) contributes exactly when I = cycle and k vanishes along
    it, with coefficient N_k phase(k . offset) (2 pi)^p e^{-eps |k|^2}.
    """
    n = torus.dim
    cycle = tuple(sorted(int(j) for j in cycle))
    p = len(cycle)
    if not 0 <= p <= n or any(not 0 <= j < n for j in cycle):
        raise DegreeOutOfRange(f"cycle axes {cycle} invalid on T^{n}")
    if len(set(cycle)) != p:
        raise ValueError(f"repeated axis in cycle {cycle}")
    x0 = [0.0] * n if offset is None else [float(v) for v in offset]
    coeff = {}
    vol_p = (2.0 * math.pi) ** p
    for k in ModeBasis(torus, cutoff).wavevectors():
        if any(k[j] for j in cycle):
            continue
        damp = math.exp(-epsilon * sum(c * c for c in k))
        norm = mode_norm_constant(n, k)
        arg = sum(k[j] * x0[j] for j in range(n))
        c_cos = norm * math.cos(arg) * vol_p * damp
        if abs(c_cos) > 0.0:
            coeff[FormMode(k, COS, cycle)] = c_cos
        if any(k):
            c_sin = norm * math.sin(arg) * vol_p * damp
            if abs(c_sin) > 0.0:
                coeff[FormMode(k, SIN, cycle)] = c_sin
    return SpectralForm(torus, p, cutoff, coeff, validate=False)


def smear_parametric_chain(torus: Torus, cutoff, chart, degree: int,
                           samples: int = 256,
                           epsilon: float = 0.0) -> SpectralForm:
    """Heat-smoothed current of a parametrised closed p-chain.

    ``chart(u)`` maps a parameter point u in [0,1)^p to (x, T) with x the
    position in [0, 2pi)^n and T the (p, n) tangent matrix dx/du; the
    parametrisation must be periodic.  Integration uses the rectangle rule
    on a samples^p grid; the result is rejected (QUADRATURE_FAIL) when
    halving the grid moves any coefficient by more than 1e-8.
    """
    if samples < 4 or samples % 2:
        raise ValueError("samples must be an even integer >= 4")
    fine = _chain_quadrature(torus, cutoff, chart, degree, samples, epsilon)
    coarse = _chain_quadrature(torus, cutoff, chart, degree, samples // 2,
                               epsilon)
    err = 0.0
    for mode in set(fine) | set(coarse):
        err = max(err, abs(fine.get(mode, 0.0) - coarse.get(mode, 0.0)))
    if err > QUADRATURE_TOL:
        raise QuadratureFail(
            f"chain quadrature error {err:.3e} above {QUADRATURE_TOL:g} "
            f"at {samples} samples per axis")
    return SpectralForm(torus, degree, cutoff, fine, validate=False)


def _chain_quadrature(torus: Torus, cutoff, chart, degree, samples, epsilon):
    n = torus.dim
    p = degree
    grid = [np.arange(samples) / samples for _ in range(p)]
    mesh = np.meshgrid(*grid, indexing="ij") if p else []
    upoints = (np.stack([m.ravel() for m in mesh], axis=-1)
               if p else np.zeros((1, 0)))
    weight = 1.0 / max(len(upoints), 1)
    xs = np.empty((len(upoints), n))
    dets: dict[tuple, np.ndarray] = {}
    tangents = np.empty((len(upoints), p, n))
    for i, u in enumerate(upoints):
        x, t = chart(tuple(u))
        xs[i] = x
        tangents[i] = np.asarray(t, dtype=float).reshape(p, n)
    import itertools
    for idx in itertools.combinations(range(n), p):
        sub = tangents[:, :, idx]
        dets[idx] = (np.linalg.det(sub) if p
                     else np.ones(len(upoints)))
    coeff: dict[FormMode, float] = {}
    for k in ModeBasis(torus, cutoff).wavevectors():
        damp = math.exp(-epsilon * sum(c * c for c in k))
        norm = mode_norm_constant(n, k)
        arg = xs @ np.asarray(k, dtype=float)
        for idx, det in dets.items():
            c_cos = norm * damp * weight * float(np.sum(np.cos(arg) * det))
            if abs(c_cos) > 1e-18:
                coeff[FormMode(k, COS, idx)] = c_cos
            if any(k):
                c_sin = norm * damp * weight * float(np.sum(np.sin(arg) * det))
                if abs(c_sin) > 1e-18:
                    coeff[FormMode(k, SIN, idx)] = c_sin
    return coeff


# -- duality on exponentials ------------------------------------------


def dual_exponential(exp_obs: ExponentialObservable, theory: TheorySpec,
                     inverse: bool = False):
    """Duality transform of an exponential observable in the free p-form
    theory.  Returns (prefactor, dual observable, dual theory)."""
    if theory.variant == CLOSED_PFORM:
        raise LiftRequired(
            "dualise exponentials in the free p-form theory; the closed "
            "sector is handled by the lattice-summed expectation")
    if theory.variant != PFORM:
        raise VariantMismatch(
            f"duality transform needs a p-form theory, got {theory.variant}")
    theory.check_form(exp_obs.smearing)
    rc = to_complex(exp_obs.charge)
    r2 = float(theory.r_squared)
    norm_sq = to_complex(exp_obs.smearing.norm_sq())
    prefactor = complex(np.exp(-rc * rc * norm_sq / (4.0 * r2)))
    transport = hodge_star_inverse if inverse else hodge_star
    if is_exact(theory.r_squared):
        # exact charge transport so a forward/backward pass is the identity
        factor = (ExactComplex(0, -1 if inverse else 1)
                  / (2 * Fraction(theory.r_squared)))
        new_charge = exact_lift(exp_obs.charge) * factor
    else:
        new_charge = rc * (complex(0.0, -1.0 if inverse else 1.0)
                           / (2.0 * r2))
        if new_charge.imag == 0.0:
            new_charge = new_charge.real
    kind = THOOFT if exp_obs.kind == WILSON else WILSON
    dual_obs = ExponentialObservable(
        kind, transport(exp_obs.smearing), new_charge,
        defining_degree=exp_obs.defining_degree)
    return prefactor, dual_obs, theory.dual()


def taylor_truncate(exp_obs: ExponentialObservable,
                    order: int) -> PolynomialObservable:
    """Polynomial truncation sum_{j<=order} (i r)^j O^j / j!."""
    r = to_complex(exp_obs.charge)
    terms = {}
    for j in range(order + 1):
        c = (1j * r) ** j / math.factorial(j)
        terms[(j,)] = c.real if c.imag == 0.0 else c
    return PolynomialObservable((exp_obs.smearing,), terms, validate=False)


# -- expectations -----------------------------------------------------


def expectation_exponential(exp_obs: ExponentialObservable,
                            theory: TheorySpec,
                            lattice_cutoff: float = None) -> ExpectationResult:
    """Expectation of an exponential observable.

    Free variants use the exact characteristic function
    E[e^{i r X}] = e^{- r^2 Var(X) / 2}; the closed variant multiplies the
    Gaussian factor of the exact sector by the harmonic theta-function
    ratio, truncated at the lattice action cutoff."""
    beta = exp_obs.smearing
    r = to_complex(exp_obs.charge)
    if theory.variant in (PFORM, SCALAR):
        var = to_complex(covariance_from_theory([beta], theory)[0][0])
        value = complex(np.exp(-r * r * var / 2.0))
        return ExpectationResult(value=value, method="exact",
                                 theory=theory.to_dict(),
                                 mode_cutoff=theory.cutoff)
    if lattice_cutoff is None:
        raise ValueError("closed-sector expectation needs a lattice cutoff")
    theory.check_form(beta)
    r2 = float(theory.r_squared)
    ebeta = exact_part(beta)
    var = to_complex(ebeta.norm_sq()).real / (2.0 * r2)
    gauss = complex(np.exp(-r * r * var / 2.0))

    lattice = HarmonicLattice(theory.torus, theory.degree, r2,
                              cutoff=theory.cutoff)
    hbeta = harmonic_part(beta)
    # pairing of each lattice generator with the smearing
    gen_pairings = np.array([to_complex(g.pairing(hbeta))
                             for g in lattice.generators()])
    warnings = []
    first_action = 4.0 * math.pi * r2 * r2
    if lattice_cutoff < first_action:
        warnings.append(
            f"lattice cutoff {lattice_cutoff:g} below the first excited "
            f"sector action {first_action:g}; only the zero sector is summed")
    entries = list(lattice.elements(4.0 * lattice_cutoff))
    ms = np.array([m for m, _ in entries], dtype=float)
    actions = np.array([s for _, s in entries])
    phases = ms @ gen_pairings
    values = np.exp(1j * r * phases)
    inside = actions <= lattice_cutoff
    boltz = np.exp(-actions)
    z_in = float(np.sum(boltz[inside]))
    theta = complex(np.sum(values[inside] * boltz[inside])) / z_in
    value = gauss * theta

    half = np.exp(-0.5 * actions[~inside])
    tail_num = float(np.sum(np.abs(values[~inside]) * half))
    tail_den = float(np.sum(half))
    tail = (abs(gauss) * math.exp(-0.5 * lattice_cutoff)
            * (tail_num + abs(theta) * tail_den) / z_in)
    return ExpectationResult(value=value, method="lattice",
                             theory=theory.to_dict(),
                             mode_cutoff=theory.cutoff,
                             lattice_cutoff=lattice_cutoff, tail_bound=tail,
                             warnings=tuple(warnings))
