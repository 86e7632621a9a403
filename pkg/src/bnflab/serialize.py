"""JSON and CSV wire formats.

Everything numeric is written exactly: rational strings "p/q" in lowest
terms (floats convert to their exact binary rational), denominators as
lists of integer linear forms.  Documents are emitted with sorted keys so
identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Optional

import numpy as np

from .classical import MetricJet, NormalForm, PotentialJet
from .exactnum import GaussianRational, Q, Scalar, as_rational, rational_str
from .phasepoly import ActionPoly, Frequencies, PhasePoly
from .spectral import SpectrumSample


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def coefficient_to_json(c) -> dict:
    """One polynomial coefficient as {re, im, den_forms, den_int}.

    Scalars whose numerator depends on the frequencies carry the full
    numerator under "num_poly" (list of {w, re, im}); the plain re/im pair
    covers the constant case, which is the only one the normal-form inputs
    ever need.
    """
    if isinstance(c, complex):
        return {
            "re": rational_str(as_rational(c.real)),
            "im": rational_str(as_rational(c.imag)),
            "den_forms": [],
            "den_int": "1",
        }
    if isinstance(c, GaussianRational):
        return {
            "re": rational_str(c.re),
            "im": rational_str(c.im),
            "den_forms": [],
            "den_int": "1",
        }
    if isinstance(c, Scalar):
        c = c.simplified()
        doc = {
            "den_forms": [list(f) for f in c.forms],
            "den_int": "1",
        }
        if c.is_constant:
            g = c.constant_value()
            doc["re"] = rational_str(g.re)
            doc["im"] = rational_str(g.im)
        else:
            zero = (0,) * c.nvars
            g = c.num.get(zero)
            doc["re"] = rational_str(g.re if g else Q(0))
            doc["im"] = rational_str(g.im if g else Q(0))
            doc["num_poly"] = [
                {"w": list(e), "re": rational_str(v.re),
                 "im": rational_str(v.im)}
                for e, v in sorted(c.num.items())
            ]
        return doc
    raise TypeError(f"cannot serialize coefficient of type {type(c)}")


def coefficient_from_json(doc: dict, omega: Frequencies):
    den_int = int(doc.get("den_int", "1"))
    forms = [tuple(int(v) for v in f) for f in doc.get("den_forms", [])]
    if omega.is_symbolic:
        n = omega.n
        if "num_poly" in doc:
            num = {tuple(int(v) for v in item["w"]):
                   GaussianRational(Q(item["re"]), Q(item["im"]))
                   for item in doc["num_poly"]}
            out = Scalar(n, num)
        else:
            out = Scalar(n, {(0,) * n:
                             GaussianRational(Q(doc["re"]), Q(doc["im"]))})
        if den_int != 1:
            out = out.scale(Q(1, den_int))
        for f in forms:
            out = out.div_form(f)
        return out
    if "num_poly" in doc:
        raise ValueError("frequency-dependent coefficient needs symbolic "
                         "frequencies")
    if omega.is_exact:
        out = GaussianRational(Q(doc["re"]), Q(doc["im"]))
        if den_int != 1:
            out = out.scale(Q(1, den_int))
        for f in forms:
            out = omega.div_form(out, f)
        return out
    out = complex(float(Q(doc["re"])), float(Q(doc["im"])))
    if den_int != 1:
        out /= den_int
    for f in forms:
        out = omega.div_form(out, f)
    return out


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def phasepoly_to_json(p: PhasePoly) -> dict:
    terms = []
    for (alpha, beta), c in sorted(p.terms.items()):
        doc = {"alpha": list(alpha), "beta": list(beta)}
        doc.update(coefficient_to_json(c))
        terms.append(doc)
    return {"n": p.n, "terms": terms}


def phasepoly_from_json(doc: dict, omega: Frequencies) -> PhasePoly:
    n = int(doc["n"])
    terms = {}
    for item in doc["terms"]:
        key = (tuple(int(v) for v in item["alpha"]),
               tuple(int(v) for v in item["beta"]))
        terms[key] = coefficient_from_json(item, omega)
    return PhasePoly(n, terms)


def actionpoly_to_json(p: ActionPoly) -> dict:
    return phasepoly_to_json(p.embed())


def actionpoly_from_json(doc: dict, omega: Frequencies) -> ActionPoly:
    p = phasepoly_from_json(doc, omega)
    if not p.off_diagonal().is_zero:
        raise ValueError("document contains off-diagonal terms")
    return p.diagonal_part()


# ---------------------------------------------------------------------------
# frequencies and jets
# ---------------------------------------------------------------------------

def frequencies_to_json(omega: Frequencies) -> dict:
    if omega.is_symbolic:
        return {"mode": "symbolic", "n": omega.n}
    values = [rational_str(v) if not isinstance(v, float) else v
              for v in omega.values]
    return {"mode": "numeric", "values": values,
            "tol": omega.resonance_tol}


def frequencies_from_json(doc: dict) -> Frequencies:
    if doc["mode"] == "symbolic":
        return Frequencies.symbolic(int(doc["n"]))
    values = [Q(v) if isinstance(v, str) else float(v)
              for v in doc["values"]]
    return Frequencies.numeric(values, resonance_tol=doc.get("tol", 1e-9))


def _value_to_json(c):
    if isinstance(c, float):
        return {"c": rational_str(as_rational(c)), "float": True}
    return {"c": rational_str(as_rational(c))}


def _value_from_json(doc):
    q = Q(doc["c"])
    if doc.get("float"):
        return float(q)
    return q


def jet_to_json(jet: PotentialJet, omega: Optional[Frequencies] = None,
                metric: Optional[MetricJet] = None) -> dict:
    doc = {
        "n": jet.n,
        "potential": [dict(k=list(k), **_value_to_json(c))
                      for k, c in sorted(jet.terms.items())],
    }
    if jet.max_half_degree is not None:
        doc["max_half_degree"] = jet.max_half_degree
    if metric is not None:
        doc["metric"] = [dict(i=i, j=j, k=list(k), **_value_to_json(c))
                         for (i, j, k), c in sorted(metric.terms.items())]
    if omega is not None:
        doc["omega"] = frequencies_to_json(omega)
    return doc


def jet_from_json(doc: dict):
    """Returns (jet, omega or None, metric or None)."""
    n = int(doc["n"])
    terms = {tuple(int(v) for v in item["k"]): _value_from_json(item)
             for item in doc.get("potential", [])}
    jet = PotentialJet(n, terms,
                       max_half_degree=doc.get("max_half_degree"))
    metric = None
    if doc.get("metric"):
        mterms = {}
        for item in doc["metric"]:
            key = (int(item["i"]), int(item["j"]),
                   tuple(int(v) for v in item["k"]))
            mterms[key] = _value_from_json(item)
        metric = MetricJet(n, mterms)
    omega = frequencies_from_json(doc["omega"]) if "omega" in doc else None
    return jet, omega, metric


# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------

def normalform_to_json(nf: NormalForm, include_audit: bool = True) -> dict:
    doc = {
        "omega": frequencies_to_json(nf.omega),
        "order": nf.order,
        "H": [{"degree": i, "poly": actionpoly_to_json(nf.actions[i])}
              for i in sorted(nf.actions)],
        "G": [{"degree": i, "poly": phasepoly_to_json(nf.generators[i])}
              for i in sorted(nf.generators)],
    }
    if include_audit:
        doc["audit"] = {
            "remainders": [{"degree": i, "poly": phasepoly_to_json(nf.remainders[i])}
                           for i in sorted(nf.remainders)],
            "artifacts": [{"degree": i, "poly": phasepoly_to_json(nf.artifacts[i])}
                          for i in sorted(nf.artifacts)],
        }
    return doc


def normalform_from_json(doc: dict) -> NormalForm:
    omega = frequencies_from_json(doc["omega"])
    actions = {int(item["degree"]): actionpoly_from_json(item["poly"], omega)
               for item in doc["H"]}
    generators = {int(item["degree"]): phasepoly_from_json(item["poly"], omega)
                  for item in doc["G"]}
    audit = doc.get("audit", {})
    remainders = {int(item["degree"]): phasepoly_from_json(item["poly"], omega)
                  for item in audit.get("remainders", [])}
    artifacts = {int(item["degree"]): phasepoly_from_json(item["poly"], omega)
                 for item in audit.get("artifacts", [])}
    return NormalForm(omega=omega, order=int(doc["order"]), actions=actions,
                      generators=generators, remainders=remainders,
                      artifacts=artifacts)


# ---------------------------------------------------------------------------
# quantum output
# ---------------------------------------------------------------------------

def qbnf_to_json(pieces, omega: Frequencies) -> dict:
    out = []
    for j, poly in enumerate(pieces):
        terms = []
        for m, c in sorted(poly.terms.items()):
            doc = {"m": list(m)}
            doc.update(coefficient_to_json(c))
            terms.append(doc)
        out.append({"j": j, "terms": terms})
    return {"omega": frequencies_to_json(omega), "p": out}


def qbnf_from_json(doc: dict):
    omega = frequencies_from_json(doc["omega"])
    pieces = []
    for block in doc["p"]:
        terms = {tuple(int(v) for v in item["m"]):
                 coefficient_from_json(item, omega)
                 for item in block["terms"]}
        pieces.append(ActionPoly(omega.n, terms))
    return pieces, omega


# ---------------------------------------------------------------------------
# CSV spectra and traces
# ---------------------------------------------------------------------------

def spectra_to_csv(samples) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["hbar", "index", "energy"])
    for sample in samples:
        for idx, energy in enumerate(sample.energies):
            writer.writerow([repr(float(sample.hbar)), idx,
                             repr(float(energy))])
    return buf.getvalue()


def spectra_from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:3] != ["hbar", "index", "energy"]:
        raise ValueError("expected CSV header 'hbar,index,energy'")
    groups = {}
    for row in rows[1:]:
        if not row:
            continue
        hbar, _, energy = float(row[0]), int(row[1]), float(row[2])
        groups.setdefault(hbar, []).append(energy)
    return [SpectrumSample(h, np.sort(np.asarray(es)))
            for h, es in sorted(groups.items())]


def traces_to_csv(rows) -> str:
    """rows: iterable of (t, hbar, complex value)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "hbar", "re", "im"])
    for t, hbar, value in rows:
        writer.writerow([repr(float(t)), repr(float(hbar)),
                         repr(value.real), repr(value.imag)])
    return buf.getvalue()


def traces_from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:4] != ["t", "hbar", "re", "im"]:
        raise ValueError("expected CSV header 't,hbar,re,im'")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        out.append((float(row[0]), float(row[1]),
                    complex(float(row[2]), float(row[3]))))
    return out


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
