"""Batch front end.

    ptspec <command> --input job.json --out DIR --format csv|json

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence
(partial results written with a status column), 3 internal invariant
violation.
"""
import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

import jsonschema
import numpy as np

from . import classifier, lfun, shooting
from .asymcoeff import (PotentialSpec, coeff_table, invert_series,
                        predict_lambda)

log = logging.getLogger(__name__)

COMMANDS = ("coeffs", "predict", "solve", "classify", "verify", "sweep")

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_INVARIANT = 0, 1, 2, 3

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ptspec job",
    "type": "object",
    "additionalProperties": False,
    "required": ["m", "a"],
    "properties": {
        "m": {"type": "integer", "minimum": 3},
        "a": {"type": "array", "items": _complex},
        "command": {"enum": list(COMMANDS)},
        "n_range": {"type": "array", "items": {"type": "integer", "minimum": 0},
                    "minItems": 2, "maxItems": 2},
        "tol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "real": {"type": "number", "exclusiveMinimum": 0},
                "ode_rtol": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-4},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a_to"],
            "properties": {
                "a_to": {"type": "array", "items": _complex},
                "steps": {"type": "integer", "minimum": 1},
                "trust_radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


class ValidationError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


class NonConvergedResult(Exception):
    """Nothing usable was computed."""


# -- input ---------------------------------------------------------------------

def _field(path):
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else p)
    return out or "<root>"


def parse_job(text, source="<input>"):
    """Validate job JSON text and return a plain dict with defaults filled."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(raw),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise ValidationError(f"{source}: field {_field(e.absolute_path)}: {e.message}")
    m = raw["m"]
    if len(raw["a"]) != m:
        raise ValidationError(f"{source}: field a: expected {m} coefficients, got {len(raw['a'])}")
    job = {
        "spec": spec_from_json(raw),
        "command": raw.get("command"),
        "n_range": list(raw.get("n_range", [0, 9])),
        "tol": dict(raw.get("tol", {})),
        "sweep": raw.get("sweep"),
    }
    if job["sweep"] is not None and len(job["sweep"]["a_to"]) != m:
        raise ValidationError(f"{source}: field sweep.a_to: expected {m} coefficients")
    return job


def spec_from_json(obj):
    return PotentialSpec(obj["m"], tuple(complex(re, im) for re, im in obj["a"]))


def spec_to_json(spec):
    return {"m": spec.m, "a": [cjson(x) for x in spec.a]}


def cjson(z):
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    # normalise -0.0 so output does not depend on the sign of zero
    return x + 0.0


# -- output --------------------------------------------------------------------

def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def _flat(name, z):
    """CSV columns re_<name>, im_<name> for a complex value."""
    if z is None:
        return {f"re_{name}": None, f"im_{name}": None}
    re, im = cjson(z)
    return {f"re_{name}": re, f"im_{name}": im}


def write_output(out_dir, command, fmt, payload, tables):
    """``payload`` goes to <command>.json; ``tables`` is {name: list of dicts}."""
    os.makedirs(out_dir, exist_ok=True)
    if fmt == "json":
        text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
        path = os.path.join(out_dir, f"{command}.json")
        _atomic_write(path, text)
        return [path]
    paths = []
    for name, rows in tables.items():
        header = list(rows[0]) if rows else []
        path = os.path.join(out_dir, f"{name}.csv")
        _atomic_write(path, _csv_text(header, [list(r.values()) for r in rows]))
        paths.append(path)
    return paths


# -- commands ------------------------------------------------------------------

def _cfg(job):
    tol = job["tol"]
    return shooting.RayConfig(rtol=tol.get("ode_rtol", 1e-11))


def run_coeffs(job):
    spec = job["spec"]
    t = coeff_table(spec)
    jmax = t.bjk.shape[0] - 1
    payload = {
        **spec_to_json(spec),
        "nu": cjson(t.nu), "rm": cjson(t.rm), "mu": cjson(t.mu),
        "b": [cjson(t.bj[j]) for j in range(1, jmax + 1)],
        "bjk": [[cjson(t.bjk[j, k]) for k in range(1, j + 1)] for j in range(1, jmax + 1)],
        "K": [cjson(x) for x in t.K],
        "c": [cjson(x) for x in t.c],
    }
    rows = [{"name": "nu", "j": "", "k": "", **_flat("value", t.nu)},
            {"name": "rm", "j": "", "k": "", **_flat("value", t.rm)},
            {"name": "mu", "j": "", "k": "", **_flat("value", t.mu)}]
    for j in range(1, jmax + 1):
        for k in range(1, j + 1):
            rows.append({"name": "bjk", "j": j, "k": k, **_flat("value", t.bjk[j, k])})
    for j in range(1, jmax + 1):
        rows.append({"name": "b", "j": j, "k": "", **_flat("value", t.bj[j])})
    for j, x in enumerate(t.K):
        rows.append({"name": "K", "j": j, "k": "", **_flat("value", x)})
    for j, x in enumerate(t.c):
        rows.append({"name": "c", "j": j, "k": "", **_flat("value", x)})
    return payload, {"coeffs": rows}, EXIT_OK


def run_predict(job):
    spec = job["spec"]
    inv = invert_series(coeff_table(spec).c, spec.m)
    n0, n1 = job["n_range"]
    lams = [(n, predict_lambda(inv, n)) for n in range(n0, n1 + 1)]
    payload = {
        **spec_to_json(spec),
        "d": [cjson(x) for x in inv.d],
        "exponents": [_num(x) for x in inv.exponents],
        "lambda": [{"n": n, "lam": cjson(z)} for n, z in lams],
    }
    dtab = [{"j": j, "exponent": _num(e), **_flat("d", d)}
            for j, (d, e) in enumerate(zip(inv.d, inv.exponents))]
    ltab = [{"n": n, **_flat("lam", z)} for n, z in lams]
    return payload, {"predict_d": dtab, "predict": ltab}, EXIT_OK


def _solve_records(job, seed_source):
    spec = job["spec"]
    n0, n1 = job["n_range"]
    try:
        recs = shooting.spectrum(spec, n0, n1, _cfg(job), seed_source=seed_source)
        missing = []
    except shooting.SpectrumGap as gap:
        recs, missing = gap.records, gap.missing
    return recs, missing


def _record_rows(recs, missing):
    rows = []
    for r in recs:
        rows.append({"n": r.n, "status": "ok", **_flat("lam", r.lam), "source": r.source,
                     "det_residual": _num(r.det_residual),
                     **_flat("counting_residual", r.counting_residual)})
    for n in missing:
        rows.append({"n": n, "status": "not_converged", **_flat("lam", None), "source": "",
                     "det_residual": None, **_flat("counting_residual", None)})
    rows.sort(key=lambda r: r["n"])
    return rows


def run_solve(job):
    spec = job["spec"]
    recs, missing = _solve_records(job, job["seed_source"])
    for r in recs:
        if not all(math.isfinite(x) for x in (r.lam.real, r.lam.imag)):
            raise InvariantViolation(f"non-finite eigenvalue for n={r.n}")
    rows = _record_rows(recs, missing)
    payload = {**spec_to_json(spec), "eigenvalues": [
        {"n": r["n"], "status": r["status"],
         "lam": [r["re_lam"], r["im_lam"]], "source": r["source"],
         "det_residual": r["det_residual"],
         "counting_residual": [r["re_counting_residual"], r["im_counting_residual"]]}
        for r in rows]}
    return payload, {"solve": rows}, EXIT_NONCONVERGED if missing else EXIT_OK


def run_classify(job):
    spec = job["spec"]
    v = classifier.classify_reality(spec, job["tol"].get("real"))
    imag = max(abs(x.imag) for x in v.translated_a)
    if v.verdict is classifier.Verdict.PT and (v.z0 != 0 or imag > v.tolerance):
        raise InvariantViolation("PT verdict with nonzero shift or complex coefficients")
    if v.verdict is classifier.Verdict.TRANSLATED_PT and imag > v.tolerance:
        raise InvariantViolation("TRANSLATED_PT verdict with complex translated coefficients")
    payload = {**spec_to_json(spec), "verdict": v.verdict.value, "z0": cjson(v.z0),
               "translated_a": [cjson(x) for x in v.translated_a],
               "tolerance": _num(v.tolerance)}
    row = {"verdict": v.verdict.value, **_flat("z0", v.z0), "tolerance": _num(v.tolerance)}
    for j, x in enumerate(v.translated_a, 1):
        row.update(_flat(f"a{j}", x))
    return payload, {"classify": [row]}, EXIT_OK


def _slope(ns, gaps):
    pts = [(n, g) for n, g in zip(ns, gaps)
           if n > 0 and g is not None and g > 0 and math.isfinite(g)]
    if len(pts) < 3:
        return None
    x, y = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
    return _num(np.polyfit(x, y, 1)[0])


def run_verify(job):
    spec = job["spec"]
    inv = invert_series(coeff_table(spec).c, spec.m)
    recs, missing = _solve_records(job, "series")
    by_n = {r.n: r for r in recs}
    n0, n1 = job["n_range"]
    rows = []
    failed = list(missing)
    for n in range(n0, n1 + 1):
        series = predict_lambda(inv, n)
        try:
            quant = lfun.quantization_solve(spec, n, series)
        except (ArithmeticError, ValueError) as exc:
            log.info("quantization condition not solved for n=%d: %s", n, exc)
            quant = None
        shoot = by_n[n].lam if n in by_n else None
        gs = abs(series - shoot) / abs(shoot) if shoot is not None else None
        gq = abs(quant - shoot) / abs(shoot) if shoot is not None and quant is not None else None
        status = "ok" if shoot is not None else "not_converged"
        rows.append({"n": n, "status": status, **_flat("series", series),
                     **_flat("quantization", quant), **_flat("shooting", shoot),
                     "gap_series": _num(gs) if gs is not None else None,
                     "gap_quantization": _num(gq) if gq is not None else None})
    ns = [r["n"] for r in rows]
    fit = {"slope_gap_series": _slope(ns, [r["gap_series"] for r in rows]),
           "slope_gap_quantization": _slope(ns, [r["gap_quantization"] for r in rows])}
    payload = {**spec_to_json(spec), "fit": fit, "rows": [
        {"n": r["n"], "status": r["status"],
         "series": [r["re_series"], r["im_series"]],
         "quantization": [r["re_quantization"], r["im_quantization"]],
         "shooting": [r["re_shooting"], r["im_shooting"]],
         "gap_series": r["gap_series"], "gap_quantization": r["gap_quantization"]}
        for r in rows]}
    fit_rows = [{"quantity": k, "slope": v} for k, v in fit.items()]
    return payload, {"verify": rows, "verify_fit": fit_rows}, (
        EXIT_NONCONVERGED if failed else EXIT_OK)


def run_sweep(job):
    spec = job["spec"]
    sw = job["sweep"]
    if sw is None:
        raise ValidationError("field sweep: required for the sweep command")
    target = PotentialSpec(spec.m, tuple(complex(re, im) for re, im in sw["a_to"]))
    recs, missing = _solve_records(job, job["seed_source"])
    if not recs:
        raise NonConvergedResult(f"start eigenvalues {missing} not found")
    starts = [r.lam for r in sorted(recs, key=lambda r: r.n)]
    ns = [r.n for r in sorted(recs, key=lambda r: r.n)]
    status = "ok"
    try:
        tr = shooting.track_eigenvalues(spec, target, starts, steps=sw.get("steps", 40),
                                        cfg=_cfg(job), trust_radius=sw.get("trust_radius", 0.5))
    except shooting.TrackingError as exc:
        log.warning("tracking stopped: %s", exc)
        return ({**spec_to_json(spec), "status": "not_converged", "paths": []},
                {"sweep": []}, EXIT_NONCONVERGED)
    if tr.max_jump() >= tr.trust_radius:
        raise InvariantViolation("accepted tracking step exceeds the trust radius")
    tol_real = job["tol"].get("real", 1e-6)
    deps = tr.departures(tol_real)
    rows = []
    for k, s in enumerate(tr.s):
        for i, n in enumerate(ns):
            rows.append({"step": k, "s": _num(s), "n": n, "status": status,
                         **_flat("lam", tr.paths[i, k])})
    payload = {**spec_to_json(spec), "a_to": spec_to_json(target)["a"],
               "trust_radius": _num(tr.trust_radius), "max_jump": _num(tr.max_jump()),
               "s": [_num(s) for s in tr.s],
               "paths": [{"n": n, "lam": [cjson(z) for z in tr.paths[i]]}
                         for i, n in enumerate(ns)],
               "collisions": [{"s": _num(s), "n": [ns[i], ns[j]]} for s, i, j in tr.collisions],
               "departures": [{"s": _num(s), "n": [ns[i] for i in idx], "kind": kind}
                              for s, idx, kind in deps]}
    dep_rows = [{"s": _num(s), "n": " ".join(str(ns[i]) for i in idx), "kind": kind}
                for s, idx, kind in deps]
    payload["missing"] = missing
    return payload, {"sweep": rows, "sweep_departures": dep_rows}, (
        EXIT_NONCONVERGED if missing else EXIT_OK)


RUNNERS = {"coeffs": run_coeffs, "predict": run_predict, "solve": run_solve,
           "classify": run_classify, "verify": run_verify, "sweep": run_sweep}


# -- entry point ---------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ptspec", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--input", help="job file (JSON)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--nmin", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--tol-real", type=float)
    p.add_argument("--seed-source", choices=("series", "quantization"), default="quantization")
    p.add_argument("--schema", action="store_true", help="print the input schema and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _prepare(args):
    if args.input is None:
        raise ValidationError("--input is required")
    try:
        with open(args.input) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {args.input}: {exc.strerror}")
    job = parse_job(text, args.input)
    command = args.command or job["command"]
    if command is None:
        raise ValidationError("no command given on the command line or in the input")
    if args.command and job["command"] and args.command != job["command"]:
        raise ValidationError(f"{args.input}: field command: {job['command']!r} "
                              f"conflicts with command line {args.command!r}")
    job["command"] = command
    if args.nmin is not None:
        job["n_range"][0] = args.nmin
    if args.nmax is not None:
        job["n_range"][1] = args.nmax
    n0, n1 = job["n_range"]
    if n0 < 0 or n1 < n0:
        raise ValidationError(f"n_range: need 0 <= n_min <= n_max, got [{n0}, {n1}]")
    if args.tol_real is not None:
        if not args.tol_real > 0:
            raise ValidationError("--tol-real must be positive")
        job["tol"]["real"] = args.tol_real
    job["seed_source"] = args.seed_source
    return job


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.schema:
        print(json.dumps(SCHEMA, indent=2))
        return EXIT_OK
    try:
        job = _prepare(args)
        payload, tables, code = RUNNERS[job["command"]](job)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonConvergedResult as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (InvariantViolation, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ArithmeticError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    payload = {"command": job["command"], "status": "ok" if code == EXIT_OK else "partial",
               **payload}
    for path in write_output(args.out, job["command"], args.format, payload, tables):
        log.info("wrote %s", path)
    return code


if __name__ == "__main__":
    sys.exit(main())
