"""Command-line front end.

One verb per experiment: normal forms (bnf, invert, roundtrip, qbnf),
spectra (spectrum, weyl), model fitting (fit, pipeline), and traces
(trace, trace-fit).  Outputs are written atomically; every run prints a
one-line summary followed by a machine-readable JSON report.

Exit codes: 0 success, 2 bad configuration or inputs, 3 mathematical
failure (small divisors, resonant times, non-convergence), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import serialize
from .classical import classical_bnf, verify_conjugation
from .errors import MathError
from .inverse import recover_potential
from .phasepoly import Frequencies, coeff_to_complex
from .quantum import model_eigenvalue, quantum_normal_form
from .randjets import random_case
from .spectral import (
    builtin_potential,
    eigensolve_many,
    fit_model_from_spectra,
    pipeline_invert,
    potential_function,
    weyl_count,
)
from .traces import fit_expansion, trace_model, trace_spectrum


@dataclass
class RunConfig:
    """Everything needed to reproduce a run."""

    verb: str
    inputs: dict = field(default_factory=dict)
    out: str = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("BNFLAB_WORKERS", "1")))
    except ValueError:
        return 1


def _default_tol() -> float:
    try:
        return float(os.environ.get("BNFLAB_RESONANCE_TOL", "1e-9"))
    except ValueError:
        return 1e-9


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bnflab-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str) -> dict:
    with open(path) as handle:
        return json.load(handle)


def _load_potential(spec: str, tol: float):
    """A potential given as a builtin name or a jet JSON path."""
    if spec in ("harmonic1d", "quartic1d", "coupled2d"):
        jet, omega = builtin_potential(spec)
        return jet, Frequencies.numeric(omega.values, resonance_tol=tol), None
    jet, omega, metric = serialize.jet_from_json(_read_json(spec))
    if omega is None:
        raise ValueError(f"{spec} carries no omega block")
    return jet, omega, metric


def _numeric_omega(omega: Frequencies) -> Frequencies:
    if omega.is_symbolic:
        raise ValueError("this verb needs numeric frequencies")
    return Frequencies.numeric([float(v) for v in omega.values],
                               resonance_tol=omega.resonance_tol)


# ---------------------------------------------------------------------------
# verb handlers: each returns (summary_line, report_extras)
# ---------------------------------------------------------------------------

def _run_bnf(config: RunConfig):
    jet, omega, metric = serialize.jet_from_json(
        _read_json(config.inputs["in"]))
    if omega is None:
        raise ValueError("input jet carries no omega block")
    mode = config.params.get("mode")
    if mode == "float":
        omega = _numeric_omega(omega)
    elif mode == "exact" and not omega.is_exact:
        raise ValueError("exact mode requested but omega values are floats")
    order = config.params["order"]
    nf = classical_bnf(jet, omega, metric=metric, order=order)
    residual = verify_conjugation(nf, jet, metric=metric)
    doc = serialize.normalform_to_json(nf)
    _write_atomic(config.out, serialize.dump_json(doc))
    if residual.is_zero:
        res_norm = 0.0
    else:
        values = None if omega.is_symbolic else omega.float_values()
        res_norm = max(abs(coeff_to_complex(c, values))
                       for c in residual.terms.values())
    summary = (f"bnf: order {order}, n = {jet.n}, "
               f"{sum(len(nf.actions[i].terms) for i in nf.actions)} action "
               f"terms -> {config.out}")
    return summary, {"order": order, "residual_zero": residual.is_zero,
                     "residual_norm": res_norm}


def _run_invert(config: RunConfig):
    doc = _read_json(config.inputs["in"])
    nf = serialize.normalform_from_json(doc)
    metric = None
    if config.inputs.get("metric"):
        _, _, metric = serialize.jet_from_json(
            _read_json(config.inputs["metric"]))
    jet = recover_potential(nf.actions, nf.omega, metric=metric)
    _write_atomic(config.out,
                  serialize.dump_json(serialize.jet_to_json(jet, nf.omega,
                                                            metric)))
    summary = f"invert: recovered {len(jet.terms)} jet terms -> {config.out}"
    return summary, {"terms": len(jet.terms)}


def _run_roundtrip(config: RunConfig):
    if config.inputs.get("in"):
        jet, omega, metric = serialize.jet_from_json(
            _read_json(config.inputs["in"]))
        if omega is None:
            omega = Frequencies.symbolic(jet.n)
        order = config.params.get("order") or jet.half_degree
        cases = [(jet, omega, metric, order)]
    else:
        rng = random.Random(config.seed)
        cases = []
        for _ in range(config.params.get("random", 10)):
            n, order, jet, metric = random_case(rng)
            cases.append((jet, Frequencies.symbolic(n), metric, order))
    failures = 0
    for jet, omega, metric, order in cases:
        nf = classical_bnf(jet, omega, metric=metric, order=order)
        back = recover_potential(nf.actions, omega, metric=metric)
        want = {k: c for k, c in jet.terms.items() if sum(k) <= order}
        if dict(back.terms) != want:
            failures += 1
    discrepancy = "0 (exact)" if failures == 0 else f"{failures} cases"
    summary = (f"roundtrip: {len(cases)} case(s), max coefficient "
               f"discrepancy: {discrepancy}")
    report = {"cases": len(cases), "failures": failures, "seed": config.seed}
    if config.out:
        _write_atomic(config.out, serialize.dump_json(report))
    if failures:
        raise MathError(f"round trip failed on {failures} case(s)")
    return summary, report


def _run_qbnf(config: RunConfig):
    jet, omega, _ = serialize.jet_from_json(_read_json(config.inputs["in"]))
    if omega is None:
        raise ValueError("input jet carries no omega block")
    degree_cap = config.params["degree_cap"]
    hbar_cap = config.params["hbar_cap"]
    pieces = quantum_normal_form(jet, omega, degree_cap, hbar_cap)
    _write_atomic(config.out,
                  serialize.dump_json(serialize.qbnf_to_json(pieces, omega)))
    nonzero = [j for j, p in enumerate(pieces) if not p.is_zero]
    summary = (f"qbnf: caps (degree {degree_cap}, hbar {hbar_cap}), "
               f"nonzero orders {nonzero} -> {config.out}")
    return summary, {"nonzero_orders": nonzero}


def _run_spectrum(config: RunConfig):
    tol = config.params.get("tol", _default_tol())
    jet, omega, _ = _load_potential(config.inputs["potential"], tol)
    omega = _numeric_omega(omega)
    V = potential_function(jet, omega.values)
    samples = eigensolve_many(
        V, config.params["hbars"], workers=config.workers,
        dim=jet.n, box_halfwidth=config.params["box"],
        grid_points=config.params["grid"], count=config.params["count"],
        refine_tol=config.params.get("refine_tol"))
    _write_atomic(config.out, serialize.spectra_to_csv(samples))
    drift = max(s.meta["refinement_drift"] for s in samples)
    summary = (f"spectrum: {len(samples)} hbar value(s) x "
               f"{config.params['count']} levels, max refinement drift "
               f"{drift:.2e} -> {config.out}")
    return summary, {"max_drift": drift,
                     "hbars": list(config.params["hbars"])}


def _run_fit(config: RunConfig):
    samples = serialize.spectra_from_csv(
        open(config.inputs["spectra"]).read())
    omega = Frequencies.numeric(config.params["omega"],
                                resonance_tol=config.params.get(
                                    "tol", _default_tol()))
    fitted = fit_model_from_spectra(
        samples, omega.n, omega, config.params["degree_cap"],
        config.params["hbar_cap"], max_k=config.params.get("max_k"),
        energy_cutoff=config.params.get("energy_cutoff"))
    doc = {
        "omega": list(fitted.omega),
        "degree_cap": fitted.degree_cap,
        "hbar_cap": fitted.hbar_cap,
        "coefficients": [
            {"j": j, "m": list(m), "c": c}
            for (j, m), c in sorted(fitted.coefficients.items())
        ],
        "residual_norm": fitted.residual_norm,
        "rows": fitted.n_rows,
    }
    _write_atomic(config.out, serialize.dump_json(doc))
    summary = (f"fit: {fitted.n_rows} levels, residual "
               f"{fitted.residual_norm:.3e} -> {config.out}")
    return summary, {"residual": fitted.residual_norm,
                     "rows": fitted.n_rows}


def _run_pipeline(config: RunConfig):
    samples = serialize.spectra_from_csv(
        open(config.inputs["spectra"]).read())
    omega = Frequencies.numeric(config.params["omega"],
                                resonance_tol=config.params.get(
                                    "tol", _default_tol()))
    jet, diagnostics = pipeline_invert(
        samples, omega, config.params["degree_cap"],
        config.params["hbar_cap"], max_k=config.params.get("max_k"),
        energy_cutoff=config.params.get("energy_cutoff"))
    doc = serialize.jet_to_json(jet, omega)
    doc["diagnostics"] = diagnostics
    _write_atomic(config.out, serialize.dump_json(doc))
    summary = (f"pipeline: recovered {len(jet.terms)} jet term(s), fit "
               f"residual {diagnostics['fit_residual']:.3e} -> {config.out}")
    return summary, diagnostics


def _run_trace(config: RunConfig):
    rows = []
    eps = config.params["epsilon"]
    if config.inputs.get("spectra"):
        samples = serialize.spectra_from_csv(
            open(config.inputs["spectra"]).read())
        for sample in samples:
            for t in config.params["times"]:
                rows.append((t, sample.hbar,
                             trace_spectrum(sample, t, eps)))
    else:
        pieces, omega = serialize.qbnf_from_json(
            _read_json(config.inputs["model"]))
        if omega.is_symbolic:
            raise ValueError("trace needs numeric frequencies in the model")
        pieces = [p.to_float() for p in pieces]
        for hbar in config.params["hbars"]:
            for t in config.params["times"]:
                rows.append((t, hbar, trace_model(pieces, t, hbar, eps)))
    _write_atomic(config.out, serialize.traces_to_csv(rows))
    summary = f"trace: {len(rows)} (t, hbar) value(s) -> {config.out}"
    return summary, {"rows": len(rows)}


def _run_trace_fit(config: RunConfig):
    rows = serialize.traces_from_csv(open(config.inputs["in"]).read())
    t_values = sorted({t for t, _, _ in rows})
    t = config.params.get("t")
    if t is None:
        if len(t_values) != 1:
            raise ValueError(f"trace file holds several t values "
                             f"{t_values}; pass --t")
        t = t_values[0]
    pairs = [(h, v) for tt, h, v in rows if tt == t]
    order = config.params["order"]
    coeffs, residual = fit_expansion(pairs, t, order)
    doc = {
        "t": t,
        "a": [{"l": l, "re": c.real, "im": c.imag}
              for l, c in enumerate(coeffs)],
        "residual": residual,
    }
    _write_atomic(config.out, serialize.dump_json(doc))
    summary = (f"trace-fit: t = {t}, a0 = {coeffs[0]:.6g}, residual "
               f"{residual:.3e} -> {config.out}")
    return summary, {"t": t, "residual": residual}


def _run_weyl(config: RunConfig):
    tol = config.params.get("tol", _default_tol())
    jet, omega, _ = _load_potential(config.inputs["potential"], tol)
    omega = _numeric_omega(omega)
    V = potential_function(jet, omega.values)
    hbar = config.params["hbar"]
    delta = config.params["delta"]
    sample = eigensolve_many(
        V, [hbar], workers=1, dim=jet.n,
        box_halfwidth=config.params["box"],
        grid_points=config.params["grid"],
        count=config.params["count"])[0]
    count, prediction, ratio = weyl_count(V, delta, hbar, sample)
    report = {"count": count, "prediction": prediction, "ratio": ratio,
              "delta": delta, "hbar": hbar}
    if config.out:
        _write_atomic(config.out, serialize.dump_json(report))
    summary = (f"weyl: count {count} vs prediction {prediction:.3f}, "
               f"ratio {ratio:.4f}")
    return summary, report


_HANDLERS = {
    "bnf": _run_bnf,
    "invert": _run_invert,
    "roundtrip": _run_roundtrip,
    "qbnf": _run_qbnf,
    "spectrum": _run_spectrum,
    "fit": _run_fit,
    "pipeline": _run_pipeline,
    "trace": _run_trace,
    "trace-fit": _run_trace_fit,
    "weyl": _run_weyl,
}


def run(config: RunConfig) -> dict:
    """Dispatch a run and return the JSON report (raises on failure)."""
    if config.verb not in _HANDLERS:
        raise ValueError(f"unknown verb {config.verb!r}")
    start = time.time()
    summary, extras = _HANDLERS[config.verb](config)
    report = {
        "verb": config.verb,
        "config": asdict(config),
        "elapsed_s": round(time.time() - start, 6),
        "status": "ok",
        "summary": summary,
    }
    report.update(extras)
    return report


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnflab",
        description="Birkhoff normal forms, their inverse, and spectral "
                    "validation experiments.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("bnf", help="classical normal form of a jet")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--mode", choices=["exact", "float"])
    p.add_argument("--out", required=True)

    p = sub.add_parser("invert", help="recover a jet from a normal form")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--metric")
    p.add_argument("--out", required=True)

    p = sub.add_parser("roundtrip", help="forward + inverse, report drift")
    p.add_argument("--in", dest="infile")
    p.add_argument("--order", type=int)
    p.add_argument("--random", type=int,
                   help="number of random jets instead of --in")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("qbnf", help="semiclassical normal form of a jet")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--degree-cap", type=int, required=True)
    p.add_argument("--hbar-cap", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("spectrum", help="finite-difference eigenvalues")
    p.add_argument("--potential", required=True,
                   help="builtin name or jet JSON path")
    p.add_argument("--hbar", type=float, action="append", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--box", type=float, default=4.0)
    p.add_argument("--refine-tol", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit the eigenvalue model to spectra")
    p.add_argument("--spectra", required=True, help="CSV from 'spectrum'")
    p.add_argument("--omega", type=float, action="append", required=True)
    p.add_argument("--degree-cap", type=int, required=True)
    p.add_argument("--hbar-cap", type=int, required=True)
    p.add_argument("--max-k", type=int)
    p.add_argument("--energy-cutoff", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pipeline", help="spectra -> fitted model -> jet")
    p.add_argument("--spectra", required=True)
    p.add_argument("--omega", type=float, action="append", required=True)
    p.add_argument("--degree-cap", type=int, required=True)
    p.add_argument("--hbar-cap", type=int, required=True)
    p.add_argument("--max-k", type=int)
    p.add_argument("--energy-cutoff", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("trace", help="smoothed trace sums")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spectra", help="CSV from 'spectrum'")
    src.add_argument("--model", help="JSON from 'qbnf'")
    p.add_argument("--t", type=float, action="append", required=True)
    p.add_argument("--hbar", type=float, action="append",
                   help="hbar grid (model source only)")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("trace-fit", help="fit the hbar expansion of traces")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--t", type=float)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("weyl", help="eigenvalue count vs phase-space volume")
    p.add_argument("--potential", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--hbar", type=float, required=True)
    p.add_argument("--count", type=int, default=120)
    p.add_argument("--grid", type=int, default=4000)
    p.add_argument("--box", type=float, default=4.0)
    p.add_argument("--out")

    return parser


def config_from_args(args) -> RunConfig:
    verb = args.verb
    inputs, params = {}, {}
    if verb in ("bnf", "invert", "roundtrip", "qbnf", "trace-fit"):
        if getattr(args, "infile", None):
            inputs["in"] = args.infile
    if verb == "invert" and args.metric:
        inputs["metric"] = args.metric
    if verb in ("spectrum", "weyl"):
        inputs["potential"] = args.potential
    if verb in ("fit", "pipeline"):
        inputs["spectra"] = args.spectra
    if verb == "trace":
        if args.spectra:
            inputs["spectra"] = args.spectra
        else:
            inputs["model"] = args.model

    if verb == "bnf":
        params = {"order": args.order, "mode": args.mode}
    elif verb == "roundtrip":
        params = {"order": args.order, "random": args.random or 10}
        if args.infile and args.random:
            raise ValueError("--in and --random are mutually exclusive")
    elif verb == "qbnf":
        params = {"degree_cap": args.degree_cap, "hbar_cap": args.hbar_cap}
    elif verb == "spectrum":
        params = {"hbars": args.hbar, "count": args.count,
                  "grid": args.grid, "box": args.box,
                  "refine_tol": args.refine_tol}
    elif verb in ("fit", "pipeline"):
        params = {"omega": args.omega, "degree_cap": args.degree_cap,
                  "hbar_cap": args.hbar_cap, "max_k": args.max_k,
                  "energy_cutoff": args.energy_cutoff}
    elif verb == "trace":
        params = {"times": args.t, "epsilon": args.epsilon,
                  "hbars": args.hbar or []}
        if args.model and not args.hbar:
            raise ValueError("model traces need at least one --hbar")
    elif verb == "trace-fit":
        params = {"t": args.t, "order": args.order}
    elif verb == "weyl":
        params = {"delta": args.delta, "hbar": args.hbar,
                  "count": args.count, "grid": args.grid, "box": args.box}

    return RunConfig(verb=verb, inputs=inputs,
                     out=getattr(args, "out", None), params=params,
                     seed=getattr(args, "seed", 0),
                     workers=_default_workers())


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = config_from_args(args)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        report = run(config)
    except (ValueError, TypeError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MathError as exc:
        print(f"mathematical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    print(report["summary"])
    print(json.dumps(report, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
