"""Spectral exterior calculus with Gaussian observable duality on flat tori.

The package implements, on truncated Fourier mode spaces of T^n:

* exterior calculus (d, d*, star, Laplacian) acting mode by mode and the
  exact-coexact-harmonic splitting (:mod:`adl.geometry`),
* a polynomial algebra of smeared linear observables with canonical forms
  (:mod:`adl.observables`),
* graded observables with antifields, an odd bracket, and classical /
  quantum / total differentials (:mod:`adl.bv`),
* Gaussian expectations as weighted pairing sums and the duality transform
  exchanging degree p with n - p and coupling R^2 with 1/(4 R^2)
  (:mod:`adl.wick`),
* independent Gaussian oracles: moment recursion, seeded Monte Carlo, and
  lattice-summed closed-sector expectations (:mod:`adl.oracle`),
* exponential holonomy observables and their duality (:mod:`adl.wilson`),
* shared verification suites (:mod:`adl.verify`) and the ``adl`` command
  line tool (:mod:`adl.cli`).
"""

from .bv import (CLOSED_PFORM, PFORM, SCALAR, GradedObservable, TheorySpec,
                 classical_bv, is_gauge_invariant, poisson_bracket,
                 quantum_bv, total_bv)
from .errors import (AdlError, DegreeMismatch, DegreeOutOfRange, IOFail,
                     LiftRequired, MasslessMode, MasslessSector,
                     NotImplementedInCalculus, QuadratureFail, TooLarge,
                     VariantMismatch)
from .exact import (ExactComplex, exact_lift, exact_to_strings, is_exact,
                    scalar_is_zero, strings_to_exact, to_complex)
from .verify import SUITES, run_suites
from .geometry import (COS, SIN, FormMode, HarmonicLattice, HodgeParts,
                       ModeBasis, SpectralForm, Torus, closed_part,
                       codifferential, coexact_part, exact_part,
                       exterior_derivative, harmonic_part, hodge_decompose,
                       hodge_star, hodge_star_inverse, integrate_over_cycle,
                       laplacian)
from .observables import (LinearObservable, PolynomialObservable,
                          canonicalise, restrict_to_closed, star_transport,
                          support_orthogonal)
from .oracle import (ExpectationResult, GaussianSpec, covariance_from_theory,
                     expectation_isserlis, expectation_montecarlo,
                     fourier_dual_integral, gaussian_action,
                     maxwell_expectation, moment_isserlis)
from .wick import (count_matchings, expectation_diagrams, fourier_dual,
                   inverse_fourier_dual, propagator_matrix)
from .wilson import (ExponentialObservable, dual_exponential,
                     expectation_exponential, smear_coordinate_cycle,
                     smear_parametric_chain, taylor_truncate,
                     thooft_observable, wilson_observable)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
