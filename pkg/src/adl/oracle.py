"""Reference Gaussian moment routes and lattice-summed expectations.

This module deliberately duplicates none of the contraction engine's
combinatorics: moments come from the classical lowest-index pairing
recursion for central moments plus a binomial expansion over means, and
from seeded Monte Carlo sampling.  Agreement between these routes and the
edge-multiset engine is a two-route integrity check, so keep them
independent.

``maxwell_expectation`` computes expectations in the closed-sector theory,
where a field is an exact fluctuation plus a harmonic lattice element:

    <P> = sum_lambda e^{-S(lambda)} E_lambda[P] / sum_lambda e^{-S(lambda)},

with E_lambda the Gaussian expectation at mean <beta_i, lambda> and
covariance <E beta_i, E beta_j>/(2 R^2).  The lattice sum is truncated at
action S <= lattice_cutoff; the reported tail bound uses
e^{-S} = e^{-S/2} e^{-S/2} <= e^{-cutoff/2} e^{-S/2} on the discarded
sectors, with the e^{-S/2} series accumulated over a 4x enlarged region
(the remainder beyond that is smaller by another factor e^{-cutoff}).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Optional, Sequence

import numpy as np

from .bv import CLOSED_PFORM, PFORM, SCALAR, TheorySpec
from .errors import MasslessSector, VariantMismatch
from .exact import is_exact, to_complex
from .geometry import (HarmonicLattice, SpectralForm, exact_part,
                       harmonic_part, hodge_star)
from .observables import PolynomialObservable

RNG_NAME = "philox4x64"


@dataclass
class GaussianSpec:
    """Finite-dimensional Gaussian law: mean vector plus covariance."""

    mean: tuple
    cov: tuple

    @classmethod
    def from_theory(cls, generators: Sequence[SpectralForm],
                    theory: TheorySpec) -> "GaussianSpec":
        cov = covariance_from_theory(generators, theory)
        return cls(tuple(0 for _ in generators), cov)

    def dimension(self) -> int:
        return len(self.mean)

    def with_mean(self, mean) -> "GaussianSpec":
        return GaussianSpec(tuple(mean), self.cov)


def covariance_from_theory(generators: Sequence[SpectralForm],
                           theory: TheorySpec):
    """Covariance of the linear observables <a, beta_i> in the free theory:
    Cov_ij = <beta_i, Q^{-1} beta_j> / 2, computed mode by mode."""
    gens = list(generators)
    for g in gens:
        theory.check_form(g)
    if theory.variant == CLOSED_PFORM:
        for g in gens:
            scale = max((abs(to_complex(c)) for c in g.coeff.values()),
                        default=0.0)
            if not harmonic_part(g).is_zero(1e-12 * max(1.0, scale)):
                raise MasslessSector(
                    "smearing has a harmonic component; use the lattice-"
                    "summed expectation for the closed sector")
        gens = [exact_part(g) for g in gens]
    exact = (all(all(is_exact(c) for c in g.coeff.values()) for g in gens)
             and is_exact(theory.r_squared if theory.variant != SCALAR
                          else theory.mass))
    rows = []
    for gi in gens:
        row = []
        for gj in gens:
            acc = 0
            for mode, c in gi.coeff.items():
                d = gj.coeff.get(mode)
                if d is None:
                    continue
                q = theory.q_eigenvalue(mode)
                if exact:
                    acc = acc + c * d * Fraction(1, 2) / Fraction(q)
                else:
                    acc = acc + (to_complex(c) * to_complex(d)
                                 / (2.0 * to_complex(q)))
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


# -- moment recursion -------------------------------------------------


def central_moments_table(max_counts: tuple, cov) -> dict:
    """All central moments E[prod Z_i^{k_i}] for k <= max_counts, by the
    lowest-index pairing recursion."""
    size = 1
    for c in max_counts:
        size *= c + 1
    if size > 1 << 22:
        from .errors import TooLarge
        raise TooLarge(f"moment table with {size} entries refused")
    table: dict[tuple, object] = {}

    def rec(state: tuple):
        if state in table:
            return table[state]
        total_halfedges = sum(state)
        if total_halfedges == 0:
            table[state] = 1
            return 1
        if total_halfedges % 2:
            table[state] = 0
            return 0
        i = next(t for t, c in enumerate(state) if c)
        total = 0
        ci = state[i]
        if ci >= 2:
            nxt = state[:i] + (ci - 2,) + state[i + 1:]
            total = total + (ci - 1) * cov[i][i] * rec(nxt)
        for j in range(i + 1, len(state)):
            if state[j]:
                nxt = (state[:i] + (ci - 1,) + state[i + 1:j]
                       + (state[j] - 1,) + state[j + 1:])
                total = total + state[j] * cov[i][j] * rec(nxt)
        table[state] = total
        return total

    for k in iter_product(*(range(c + 1) for c in max_counts)):
        rec(k)
    return table


def moment_isserlis(exps: tuple, spec: GaussianSpec, _table: dict = None):
    """E[prod X_i^{n_i}] for X = mean + Z via binomial expansion over the
    mean and pairing recursion for the central part."""
    exps = tuple(int(e) for e in exps)
    table = _table if _table is not None else central_moments_table(
        exps, spec.cov)
    mean = spec.mean
    if all(m == 0 for m in mean):
        return table[exps]
    total = 0
    for k in iter_product(*(range(e + 1) for e in exps)):
        central = table[k]
        if central == 0:
            continue
        coef = 1
        for ni, ki, mi in zip(exps, k, mean):
            coef = coef * math.comb(ni, ki)
            for _ in range(ni - ki):
                coef = coef * mi
        total = total + coef * central
    return total


def expectation_isserlis(obs: PolynomialObservable, spec: GaussianSpec):
    """Expectation of a polynomial observable under the Gaussian law."""
    if not obs.terms:
        return 0
    widths = tuple(max(e[i] for e in obs.terms)
                   for i in range(len(obs.generators)))
    table = central_moments_table(widths, spec.cov)
    total = 0
    for exps, c in obs.terms.items():
        total = total + c * moment_isserlis(exps, spec, _table=table)
    return total


# -- Monte Carlo ------------------------------------------------------


def _covariance_factor(cov: np.ndarray) -> np.ndarray:
    """Factor L with L L^T = cov for a real PSD covariance."""
    cov = np.asarray(cov, dtype=float)
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    w, v = np.linalg.eigh(cov)
    floor = -1e-9 * max(1.0, float(np.max(np.abs(w))))
    if np.any(w < floor):
        raise ValueError("covariance is not positive semidefinite")
    return v * np.sqrt(np.clip(w, 0.0, None))


def expectation_montecarlo(obs: PolynomialObservable, spec: GaussianSpec,
                           samples: int, seed: int):
    """Seeded Monte Carlo estimate of E[P]; returns (estimate, std error).

    Sampling uses the counter-based Philox generator, so results are
    reproducible from the seed alone.
    """
    k = spec.dimension()
    cov = np.array([[to_complex(spec.cov[i][j]).real for j in range(k)]
                    for i in range(k)])
    imag = max(abs(to_complex(spec.cov[i][j]).imag)
               for i in range(k) for j in range(k)) if k else 0.0
    if imag > 1e-14:
        raise ValueError("Monte Carlo sampling needs a real covariance")
    mean = np.array([to_complex(m) for m in spec.mean])
    lfac = _covariance_factor(cov) if k else np.zeros((0, 0))
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((int(samples), k))
    lin = z @ lfac.T + mean[None, :]
    cols = [lin[:, i] for i in range(k)]
    vals = obs.evaluate_linear_values(cols)
    vals = np.asarray(vals) + np.zeros(int(samples), dtype=complex)
    est = complex(np.mean(vals))
    var = float(np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1))
    se = math.sqrt(var / samples)
    return est, se


# -- actions and lattice-summed expectations --------------------------


def gaussian_action(a: SpectralForm, theory: TheorySpec):
    """Action <a, Q a> of a field configuration."""
    theory.check_form(a)
    total = 0
    for mode, c in a.coeff.items():
        total = total + c * c * theory.q_eigenvalue(mode)
    return total


@dataclass
class ExpectationResult:
    """Expectation value with full provenance for deterministic reports."""

    value: complex
    method: str
    theory: dict
    mode_cutoff: float
    lattice_cutoff: Optional[float] = None
    tail_bound: Optional[float] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    rng: Optional[str] = None
    standard_error: Optional[float] = None
    warnings: tuple = ()

    def to_dict(self) -> dict:
        z = to_complex(self.value)
        out = {"method": self.method,
               "mode_cutoff": float(self.mode_cutoff),
               "theory": self.theory,
               "value": {"im": z.imag, "re": z.real},
               "warnings": list(self.warnings)}
        if self.lattice_cutoff is not None:
            out["lattice_cutoff"] = float(self.lattice_cutoff)
        if self.tail_bound is not None:
            out["tail_bound"] = float(self.tail_bound)
        if self.samples is not None:
            out["samples"] = int(self.samples)
            out["seed"] = int(self.seed)
            out["rng"] = self.rng
            out["standard_error"] = float(self.standard_error)
        return out


def _harmonic_coordinates(g: SpectralForm, lattice: HarmonicLattice):
    """Coefficients of the harmonic part of g against the unit-norm
    constant modes, ordered like the lattice directions."""
    from .geometry import COS, FormMode
    zero_k = (0,) * g.torus.dim
    return [to_complex(g.coeff.get(FormMode(zero_k, COS, idx), 0))
            for idx in lattice.directions()]


#: sector block size; fixed so results do not depend on the thread count
SECTOR_CHUNK = 4096


def _sector_values_vectorised(obs: PolynomialObservable, table: dict,
                              mus: np.ndarray) -> np.ndarray:
    """E_lambda[P] for every sector row of the mean matrix at once."""
    nsec, k = mus.shape
    out = np.zeros(nsec, dtype=complex)
    powers: list[dict] = [dict() for _ in range(k)]

    def power(i: int, e: int) -> np.ndarray:
        if e not in powers[i]:
            powers[i][e] = mus[:, i] ** e
        return powers[i][e]

    for exps, c in obs.terms.items():
        for kv in iter_product(*(range(e + 1) for e in exps)):
            central = table[kv]
            if central == 0:
                continue
            w = to_complex(c) * to_complex(central)
            acc = None
            for i, (ni, ki) in enumerate(zip(exps, kv)):
                w *= math.comb(ni, ki)
                if ni - ki:
                    col = power(i, ni - ki)
                    acc = col.copy() if acc is None else acc * col
            if acc is None:
                out += w
            else:
                out += w * acc
    return out


def maxwell_expectation(obs: PolynomialObservable, theory: TheorySpec,
                        lattice_cutoff: float, threads: int = 1) -> ExpectationResult:
    """Expectation in the closed-sector theory by summing harmonic lattice
    sectors up to the action cutoff.

    ``threads`` parallelises over fixed-size sector blocks; block boundaries
    and the reduction order are thread-count independent, so the result is
    bit-identical for any thread setting.
    """
    if theory.variant != CLOSED_PFORM:
        raise VariantMismatch(
            f"lattice-summed expectation needs the closed variant, got "
            f"{theory.variant}")
    for g in obs.generators:
        theory.check_form(g)
    warnings = []
    r2 = float(theory.r_squared)
    lattice = HarmonicLattice(theory.torus, theory.degree, r2,
                              cutoff=theory.cutoff)
    first_action = 4.0 * math.pi * r2 * r2
    if lattice_cutoff < first_action:
        warnings.append(
            f"lattice cutoff {lattice_cutoff:g} below the first excited "
            f"sector action {first_action:g}; only the zero sector is summed")

    # Gaussian data shared by all sectors
    egens = [exact_part(g) for g in obs.generators]
    k = len(egens)
    cov = tuple(tuple(to_complex(gi.pairing(gj)).real / (2.0 * r2)
                      for gj in egens) for gi in egens)
    widths = tuple(max((e[i] for e in obs.terms), default=0) for i in range(k))
    table = central_moments_table(widths, cov)
    hmat = np.array([_harmonic_coordinates(g, lattice)
                     for g in obs.generators], dtype=complex)
    hmat = hmat.T if hmat.size else np.zeros((lattice.rank, k))

    # enumerate sectors over the enlarged tail-bound region once
    entries = list(lattice.elements(4.0 * lattice_cutoff))
    if not entries:
        entries = [((0,) * lattice.rank, 0.0)]
    ms = np.array([m for m, _ in entries], dtype=float)
    actions = np.array([s for _, s in entries])
    mus = lattice.spacing * (ms @ hmat)  # (sectors, k)

    blocks = [slice(i, i + SECTOR_CHUNK)
              for i in range(0, len(actions), SECTOR_CHUNK)]

    def block_values(blk: slice) -> np.ndarray:
        return _sector_values_vectorised(obs, table, mus[blk])

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block_values, blocks))
    else:
        parts = [block_values(blk) for blk in blocks]
    values = np.concatenate(parts)

    inside = actions <= lattice_cutoff
    boltz = np.exp(-actions)
    z_in = float(np.sum(boltz[inside]))
    num_in = complex(np.sum(values[inside] * boltz[inside]))
    value = num_in / z_in

    half = np.exp(-0.5 * actions[~inside])
    tail_num = float(np.sum(np.abs(values[~inside]) * half))
    tail_den = float(np.sum(half))
    scale = math.exp(-0.5 * lattice_cutoff)
    tail = scale * (tail_num + abs(value) * tail_den) / z_in

    return ExpectationResult(
        value=value, method="lattice", theory=theory.to_dict(),
        mode_cutoff=theory.cutoff, lattice_cutoff=lattice_cutoff,
        tail_bound=tail, warnings=tuple(warnings))


# -- analytic dual-side evaluation ------------------------------------


def fourier_dual_integral(obs: PolynomialObservable, theory: TheorySpec,
                          dual_field: SpectralForm):
    """Value of the dual observable at a dual field configuration, computed
    as the Gaussian transform integral rather than diagrammatically.

    For the free p-form theory the transform of P is the Gaussian
    expectation of P shifted to complex mean mu_i = (i/2R^2) <a~, *beta_i>
    with covariance <beta_i, beta_j>/(2R^2); this evaluates the transform
    pointwise at a~ without ever constructing the dual polynomial.
    """
    if theory.variant != PFORM:
        raise VariantMismatch(
            f"transform integral needs the free p-form theory, got "
            f"{theory.variant}")
    for g in obs.generators:
        theory.check_form(g)
    r2 = float(theory.r_squared)
    mean = []
    for g in obs.generators:
        t = to_complex(dual_field.pairing(hodge_star(g)))
        mean.append(1j * t / (2.0 * r2))
    cov = tuple(tuple(to_complex(gi.pairing(gj)) / (2.0 * r2)
                      for gj in obs.generators) for gi in obs.generators)
    spec = GaussianSpec(tuple(mean), cov)
    return to_complex(expectation_isserlis(obs, spec))
