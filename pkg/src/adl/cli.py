"""Command line front end.

Three subcommands drive the engines:

* ``adl expect``  — expectation value of an observable file in a theory.
* ``adl dualize`` — duality transform of an observable file (``--inverse``
  for the reverse direction; the reverse output is canonicalised, so a
  forward/backward round trip reproduces the canonical form of the input
  byte for byte).
* ``adl verify``  — run named verification suites and emit a report.

Configuration is TOML (``--config``)::

    [theory]
    dim = 2                 # torus dimension, 2..4
    variant = "pform"       # pform | closed_pform | scalar
    degree = 1              # p-form degree (pform / closed_pform)
    cutoff = 64.0           # spectral truncation: keep |k|^2 <= cutoff
    r_squared = 1.0         # coupling R^2 (pform / closed_pform)
    # mass = 1.0            # scalar variant
    # mass_sign = 1         # +1 or -1 (scalar variant)

    [expect]
    method = "diagrams"     # diagrams | isserlis | montecarlo | lattice
    lattice_cutoff = 40.0
    samples = 100000
    seed = 0
    threads = 1

    [verify]
    suites = ["hermite", "double-dual"]
    # any further keys are forwarded to the suites that accept them,
    # e.g. rounds, pairs, tolerance, lattice_cutoff, seed

Observable files are JSON.  A file may be a bare observable object
(``kind`` is ``polynomial``, ``wilson`` or ``thooft``) or a wrapper
``{"observable": ..., "theory": ...}`` as written by ``dualize``; an
embedded theory takes precedence over the ``[theory]`` config table so
transformed files stay self-contained.

Flags override the config.  All outputs are JSON (or CSV for verify
reports written to a ``.csv`` path) with sorted keys and no timestamps,
so identical inputs and seeds reproduce identical bytes; verify reports
additionally carry per-suite wall-clock seconds.

Exit codes: 0 success; 2 usage, parse or I/O failure; 3 semantic
precondition violated (e.g. a closed-sector observable where a free-theory
lift is required); 4 numerical guard exceeded or verification failed.

The environment variable ``ADL_LOG`` sets the log level and nothing else.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import inspect
import io
import json
import logging
import os
import sys
import time
from fractions import Fraction

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .bv import CLOSED_PFORM, PFORM, SCALAR, TheorySpec
from .errors import (AdlError, DegreeMismatch, DegreeOutOfRange, IOFail,
                     LiftRequired, MasslessMode, MasslessSector,
                     NotImplementedInCalculus, QuadratureFail, TooLarge,
                     VariantMismatch)
from .exact import to_complex
from .geometry import Torus
from .observables import PolynomialObservable
from .oracle import (RNG_NAME, ExpectationResult, GaussianSpec,
                     expectation_isserlis, expectation_montecarlo,
                     maxwell_expectation)
from .wick import expectation_diagrams, fourier_dual
from .wilson import (ExponentialObservable, dual_exponential,
                     expectation_exponential)
from .verify import SUITES

log = logging.getLogger("adl")

_USAGE_ERRORS = 2
_PRECONDITION_ERRORS = 3
_NUMERIC_ERRORS = 4

_EXIT_BY_TYPE = (
    (IOFail, _USAGE_ERRORS),
    (LiftRequired, _PRECONDITION_ERRORS),
    (VariantMismatch, _PRECONDITION_ERRORS),
    (DegreeMismatch, _PRECONDITION_ERRORS),
    (DegreeOutOfRange, _PRECONDITION_ERRORS),
    (NotImplementedInCalculus, _PRECONDITION_ERRORS),
    (TooLarge, _NUMERIC_ERRORS),
    (QuadratureFail, _NUMERIC_ERRORS),
    (MasslessMode, _NUMERIC_ERRORS),
    (MasslessSector, _NUMERIC_ERRORS),
)


class UsageError(AdlError):
    code = "E_USAGE"


def _configure_logging() -> None:
    level_name = os.environ.get("ADL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _emit_error(exc: Exception) -> int:
    if isinstance(exc, AdlError):
        code, rc = exc.code, _USAGE_ERRORS
        for typ, mapped in _EXIT_BY_TYPE:
            if isinstance(exc, typ):
                rc = mapped
                break
    else:
        code, rc = "E_USAGE", _USAGE_ERRORS
    payload = {"error": {"code": code, "message": str(exc)}}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return rc


# -- input parsing -----------------------------------------------------


def _read_text(path: str, what: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IOFail(f"cannot read {what} {path!r}: {exc}") from exc


def _load_config(path) -> dict:
    if path is None:
        return {}
    text = _read_text(path, "config")
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise IOFail(f"config {path!r} is not valid TOML: {exc}") from exc


def _theory_from_table(table: dict) -> TheorySpec:
    try:
        torus = Torus(int(table["dim"]))
        variant = table.get("variant", PFORM)
        cutoff = float(table["cutoff"])
        if variant in (PFORM, CLOSED_PFORM):
            return TheorySpec(torus, variant, cutoff,
                              degree=int(table["degree"]),
                              r_squared=float(table["r_squared"]))
        if variant == SCALAR:
            return TheorySpec(torus, variant, cutoff,
                              mass=float(table["mass"]),
                              mass_sign=int(table.get("mass_sign", 1)))
        raise UsageError(f"unknown theory variant {variant!r}")
    except KeyError as exc:
        raise UsageError(f"theory table is missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid theory table: {exc}") from exc


def _load_observable(path: str):
    """Returns (observable, embedded theory or None). The observable is a
    PolynomialObservable or an ExponentialObservable."""
    text = _read_text(path, "observable")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IOFail(f"observable {path!r} is not valid JSON: {exc}") from exc
    theory = None
    if isinstance(data, dict) and "observable" in data:
        if "theory" in data:
            theory = TheorySpec.from_dict(data["theory"])
        data = data["observable"]
    try:
        kind = data.get("kind", "polynomial")
        if kind == "polynomial":
            return PolynomialObservable.from_dict(data), theory
        if kind in ("wilson", "thooft"):
            return ExponentialObservable.from_dict(data), theory
        raise UsageError(f"unknown observable kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise IOFail(
            f"observable {path!r} does not match the schema: {exc}") from exc


def _resolve_theory(embedded, config: dict) -> TheorySpec:
    if embedded is not None:
        return embedded
    table = config.get("theory")
    if table is None:
        raise UsageError("no theory: give --config with a [theory] table or "
                         "an observable file with an embedded theory")
    return _theory_from_table(table)


def _override_cutoff(theory: TheorySpec, mode_cutoff) -> TheorySpec:
    if mode_cutoff is None:
        return theory
    return dataclasses.replace(theory, cutoff=float(mode_cutoff))


# -- output ------------------------------------------------------------


def _dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _write_output(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFail(f"cannot write {out_path!r}: {exc}") from exc
    log.info("wrote %s", out_path)


# -- expect ------------------------------------------------------------


_METHODS = ("diagrams", "isserlis", "montecarlo", "lattice", "exact")


def _expect_polynomial(obs, theory, method, table, args) -> ExpectationResult:
    if method is None:
        method = "lattice" if theory.variant == CLOSED_PFORM else "diagrams"
    if method == "diagrams":
        value = expectation_diagrams(obs, theory)
        return ExpectationResult(value=to_complex(value), method="diagrams",
                                 theory=theory.to_dict(),
                                 mode_cutoff=theory.cutoff, tail_bound=0.0)
    if method == "isserlis":
        spec = GaussianSpec.from_theory(obs.generators, theory)
        value = expectation_isserlis(obs, spec)
        return ExpectationResult(value=to_complex(value), method="isserlis",
                                 theory=theory.to_dict(),
                                 mode_cutoff=theory.cutoff, tail_bound=0.0)
    if method == "montecarlo":
        samples = int(args.samples or table.get("samples", 100000))
        seed = int(args.seed if args.seed is not None
                   else table.get("seed", 0))
        spec = GaussianSpec.from_theory(obs.generators, theory)
        value, se = expectation_montecarlo(obs, spec, samples, seed)
        return ExpectationResult(value=value, method="montecarlo",
                                 theory=theory.to_dict(),
                                 mode_cutoff=theory.cutoff, samples=samples,
                                 seed=seed, rng=RNG_NAME, standard_error=se)
    if method == "lattice":
        lattice_cutoff = args.lattice_cutoff or table.get("lattice_cutoff")
        if lattice_cutoff is None:
            raise UsageError("method 'lattice' needs --lattice-cutoff")
        threads = int(args.threads or table.get("threads", 1))
        return maxwell_expectation(obs, theory, float(lattice_cutoff),
                                   threads=threads)
    raise UsageError(f"method {method!r} does not apply to polynomial "
                     "observables")


def cmd_expect(args) -> int:
    config = _load_config(args.config)
    if args.observable is None:
        raise UsageError("expect needs --observable")
    obs, embedded = _load_observable(args.observable)
    theory = _override_cutoff(_resolve_theory(embedded, config),
                              args.mode_cutoff)
    table = config.get("expect", {})
    method = args.method or table.get("method")
    if method is not None and method not in _METHODS:
        raise UsageError(f"unknown method {method!r}; choose from "
                         f"{', '.join(_METHODS)}")
    if isinstance(obs, ExponentialObservable):
        if method not in (None, "exact", "lattice"):
            raise UsageError(
                f"method {method!r} does not apply to exponential "
                "observables; use 'exact' (free) or 'lattice' (closed)")
        lattice_cutoff = args.lattice_cutoff or table.get("lattice_cutoff")
        result = expectation_exponential(
            obs, theory,
            lattice_cutoff=None if lattice_cutoff is None
            else float(lattice_cutoff))
    else:
        result = _expect_polynomial(obs, theory, method, table, args)
    log.info("expect: method=%s value=%s", result.method, result.value)
    _write_output(_dump_json(result.to_dict()), args.out)
    return 0


# -- dualize -----------------------------------------------------------


def _lift_theory(theory: TheorySpec) -> TheorySpec:
    if theory.variant == PFORM and not isinstance(
            theory.r_squared, Fraction):
        return dataclasses.replace(
            theory, r_squared=Fraction(theory.r_squared))
    return theory


def cmd_dualize(args) -> int:
    config = _load_config(args.config)
    if args.observable is None:
        raise UsageError("dualize needs --observable")
    obs, embedded = _load_observable(args.observable)
    theory = _lift_theory(_override_cutoff(
        _resolve_theory(embedded, config), args.mode_cutoff))
    out = {}
    if isinstance(obs, ExponentialObservable):
        lifted = ExponentialObservable(
            obs.kind, obs.smearing.as_exact(), obs.charge,
            defining_degree=obs.defining_degree)
        prefactor, dual_obs, dual_theory = dual_exponential(
            lifted, theory, inverse=args.inverse)
        z = complex(prefactor)
        out["prefactor"] = {"im": z.imag, "re": z.real}
    else:
        dual_obs, dual_theory = fourier_dual(obs.as_exact(), theory,
                                             inverse=args.inverse)
        if args.inverse:
            dual_obs = dual_obs.canonical()
    out["observable"] = dual_obs.to_dict()
    out["theory"] = dual_theory.to_dict()
    log.info("dualize: %s -> degree %s", "inverse" if args.inverse
             else "forward", dual_theory.degree)
    _write_output(_dump_json(out), args.out)
    return 0


# -- verify ------------------------------------------------------------


_SUITE_PARAM_KEYS = ("rounds", "pairs", "tolerance", "max_order",
                     "max_degree", "epsilons", "radii", "heat_time",
                     "check_monotone", "dims", "charge", "r_squared")


def cmd_verify(args) -> int:
    config = _load_config(args.config)
    table = dict(config.get("verify", {}))
    names = args.suite or table.pop("suites", None) or sorted(SUITES)
    params = {k: table[k] for k in list(table) if k in _SUITE_PARAM_KEYS}
    if args.mode_cutoff is not None:
        params["cutoff"] = float(args.mode_cutoff)
    elif "cutoff" in table:
        params["cutoff"] = float(table["cutoff"])
    if args.lattice_cutoff is not None:
        params["lattice_cutoff"] = float(args.lattice_cutoff)
    elif "lattice_cutoff" in table:
        params["lattice_cutoff"] = float(table["lattice_cutoff"])
    if args.seed is not None:
        params["seed"] = int(args.seed)
    elif "seed" in table:
        params["seed"] = int(table["seed"])
    if args.threads:
        params["threads"] = int(args.threads)

    rows = []
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown suite {name!r}; choose from "
                             f"{', '.join(sorted(SUITES))}")
        fn = SUITES[name]
        accepted = set(inspect.signature(fn).parameters)
        kwargs = {k: v for k, v in params.items() if k in accepted}
        log.info("running suite %s %s", name, kwargs or "")
        start = time.perf_counter()
        suite_rows = fn(**kwargs)
        seconds = round(time.perf_counter() - start, 3)
        for row in suite_rows:
            row["seconds"] = seconds
        rows.extend(suite_rows)
    all_passed = all(r["passed"] for r in rows)
    if args.out is not None and args.out.endswith(".csv"):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=(
            "suite", "check", "value", "tolerance", "passed", "seconds"))
        writer.writeheader()
        for row in rows:
            flat = dict(row)
            flat["passed"] = "true" if row["passed"] else "false"
            writer.writerow(flat)
        _write_output(buf.getvalue(), args.out)
    else:
        report = {"all_passed": all_passed, "checks": rows,
                  "failed": [f"{r['suite']}:{r['check']}" for r in rows
                             if not r["passed"]]}
        _write_output(_dump_json(report), args.out)
    for row in rows:
        if not row["passed"]:
            log.warning("FAIL %s/%s value=%.3e tolerance=%.3e",
                        row["suite"], row["check"], row["value"],
                        row["tolerance"])
    return 0 if all_passed else _NUMERIC_ERRORS


# -- entry point -------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Parser whose failures follow the structured-error contract instead
    of printing bare usage text and exiting."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="adl",
        description="Spectral observable calculus on flat tori: "
                    "expectations, duality transforms, verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, observable=True):
        p.add_argument("--config", metavar="PATH",
                       help="TOML configuration file")
        if observable:
            p.add_argument("--observable", metavar="PATH",
                           help="JSON observable file")
        p.add_argument("--lambda", dest="mode_cutoff", type=float,
                       metavar="CUT", help="spectral truncation override: "
                       "keep modes with |k|^2 <= CUT")
        p.add_argument("--lattice-cutoff", type=float, metavar="ACTION",
                       help="harmonic lattice action cutoff")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--threads", type=int,
                       help="worker threads for lattice sums")
        p.add_argument("--out", metavar="PATH",
                       help="output file (default: stdout)")

    p_expect = sub.add_parser("expect", help="compute an expectation value")
    common(p_expect)
    p_expect.add_argument("--method", choices=_METHODS,
                          help="expectation engine")
    p_expect.add_argument("--samples", type=int,
                          help="Monte Carlo sample count")
    p_expect.set_defaults(func=cmd_expect)

    p_dual = sub.add_parser("dualize",
                            help="duality-transform an observable")
    common(p_dual)
    p_dual.add_argument("--inverse", action="store_true",
                        help="apply the inverse transform and canonicalise")
    p_dual.set_defaults(func=cmd_dualize)

    p_verify = sub.add_parser("verify", help="run verification suites")
    common(p_verify, observable=False)
    p_verify.add_argument("--suite", action="append", metavar="NAME",
                          help="suite to run (repeatable; default: all): "
                          + ", ".join(sorted(SUITES)))
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except AdlError as exc:
        return _emit_error(exc)
    except (OverflowError, ZeroDivisionError, FloatingPointError) as exc:
        payload = {"error": {"code": "E_NUMERIC", "message": str(exc)}}
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        return _NUMERIC_ERRORS


if __name__ == "__main__":
    sys.exit(main())
