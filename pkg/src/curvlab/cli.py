"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 no valid certificate, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys

import numpy as np

from .calculus import hessian_B
from .chain import commutativity_report, representation_problems, validate_chain
from .criteria import best_certificate, lambda_criterion
from .errors import CurvlabError, NoRoot
from .models import all_certificates, build_model, ising_threshold, parse_model_document
from .verifier import sample_density, spectral_gap, verify

EXIT_OK, EXIT_INPUT, EXIT_NO_CERT, EXIT_VERIFY = 0, 1, 2, 3

SCAN_COLUMNS = ["kind", "beta", "epsilon", "lambda", "bound"]
CERT_COLUMNS = ["criterion", "valid", "bound", "intermediates", "notes"]


class InputError(Exception):
    pass


def _fmt(value):
    if isinstance(value, float):
        return "" if math.isnan(value) else format(value, ".17g")
    if value is None:
        return ""
    return value if isinstance(value, str) else json.dumps(value)


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _table(pairs) -> str:
    width = max((len(k) for k, _ in pairs), default=0)
    lines = []
    for k, v in pairs:
        if isinstance(v, float):
            v = format(v, ".17g")
        elif isinstance(v, (dict, list)):
            v = json.dumps(v)
        lines.append(f"{k.ljust(width)}  {v}")
    return "\n".join(lines) + "\n"


def read_csv_rows(text: str) -> list[dict]:
    """Parse CSV written by this module back into typed rows."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        out = {}
        for k, v in row.items():
            if v == "":
                out[k] = None
                continue
            try:
                out[k] = json.loads(v)
            except json.JSONDecodeError:
                out[k] = v
        rows.append(out)
    return rows


def _load_model(args):
    if bool(args.model) == bool(args.inline):
        raise InputError("give exactly one of --model PATH or --inline JSON")
    try:
        text = open(args.model).read() if args.model else args.inline
        doc = parse_model_document(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model: {exc}") from exc
    return build_model(doc)


def parse_split(text: str):
    """``H1=0,1,2,H2=3,4,5`` -> ``([0, 1, 2], [3, 4, 5])``."""
    m = re.fullmatch(r"\s*H1=([\d,\s]*?),?\s*H2=([\d,\s]*)\s*", text or "")
    if not m:
        raise InputError(f"bad --split {text!r}; expected H1=i,j,...,H2=k,l,...")

    def ids(part):
        return [int(v) for v in part.replace(" ", "").split(",") if v]

    return ids(m.group(1)), ids(m.group(2))


def _needs_chain(model):
    if model.chain is None:
        raise InputError(f"model type {model.kind!r} has no chain; only 'scan' applies")


def _oracle_check(model, samples=20, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        rho = sample_density(rng, model.chain.pi)
        psi = rng.standard_normal(model.chain.n)
        hessian_B(model.rep, model.chain.pi, rho, psi, oracle=True)


def _certificates(args, model):
    split = parse_split(args.split) if args.split else None
    certs = all_certificates(model, split=split)
    return certs, best_certificate(certs)


def cmd_validate(args) -> int:
    model = _load_model(args)
    _needs_chain(model)
    report = validate_chain(model.chain)
    out = {
        "n_states": model.chain.n,
        "chain_valid": report.ok,
        "failures": [{"invariant": f.invariant, "witness": list(f.witness), "detail": f.detail} for f in report.failures],
    }
    if model.rep is not None:
        comm = commutativity_report(model.rep)
        out.update({
            "n_moves": model.rep.n_moves,
            "representation_problems": representation_problems(model.rep, model.chain.pi),
            "commutative": comm.commutative,
            "support_commutative": comm.support_commutative,
            "involutive": comm.involutive,
            "witnesses": [list(w) for w in comm.witnesses],
        })
    ok = report.ok and not out.get("representation_problems")
    _emit(args, out, [out])
    return EXIT_OK if ok else EXIT_INPUT


def _emit(args, doc, rows, columns=None):
    if args.format == "json":
        _write(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif args.format == "csv":
        cols = columns or sorted({k for r in rows for k in r})
        _write(args, _csv(cols, rows))
    else:
        _write(args, _table(list(doc.items())))


def cmd_bound(args) -> int:
    model = _load_model(args)
    _needs_chain(model)
    if args.oracle_b:
        _oracle_check(model)
    certs, best = _certificates(args, model)
    doc = {
        "model": model.kind,
        "info": model.info,
        "best": best.to_dict() if best else None,
        "certificates": [c.to_dict() for c in certs],
    }
    if args.format == "table":
        lines = [f"model  {model.kind}"]
        for c in certs:
            lines.append(f"{c.criterion.value:<18} valid={str(c.valid):<5} bound={_fmt(c.bound) or '-'}")
            for k, v in c.intermediates.items():
                lines.append(f"    {k:<22} {_fmt(v) if isinstance(v, float) else v}")
            for note in c.notes:
                lines.append(f"    note: {note}")
        lines.append(f"best   {best.criterion.value} {_fmt(best.bound)}" if best else "best   none")
        _write(args, "\n".join(lines) + "\n")
    elif args.format == "csv":
        _write(args, _csv(CERT_COLUMNS, [c.to_dict() for c in certs]))
    else:
        _write(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if best else EXIT_NO_CERT


def cmd_scan(args) -> int:
    model = _load_model(args)
    if model.epsilon is None:
        raise InputError(f"model type {model.kind!r} has no temperature parameter")
    lo, hi, steps = args.beta_min, args.beta_max, args.beta_steps
    if not (0 <= lo < hi) or steps < 2:
        raise InputError("need 0 <= beta-min < beta-max and beta-steps >= 2")
    if args.log:
        if lo <= 0:
            raise InputError("--log needs beta-min > 0")
        grid = np.geomspace(lo, hi, steps)
    else:
        grid = np.linspace(lo, hi, steps)
    rows = []
    for beta in grid:
        row = {"kind": "grid", "beta": float(beta), "epsilon": float(model.epsilon(beta)),
               "lambda": float("nan"), "bound": float("nan")}
        if model.rebuild is not None:
            chain, rep, closed = model.rebuild(float(beta))
            lam = lambda_criterion(rep, chain.pi)
            row["lambda"] = lam.intermediates["lambda"]
            best = best_certificate([lam] + closed)
            row["bound"] = best.bound if best else float("nan")
        rows.append(row)
    try:
        root = ising_threshold(model.epsilon)
        if lo <= root <= hi:
            rows.append({"kind": "root", "beta": root, "epsilon": float(model.epsilon(root)),
                         "lambda": float("nan"), "bound": float("nan")})
    except NoRoot:
        pass
    if args.format == "json":
        _write(args, json.dumps({"columns": SCAN_COLUMNS, "rows": rows}, indent=2) + "\n")
    elif args.format == "table":
        lines = ["  ".join(f"{c:>22}" for c in SCAN_COLUMNS)]
        lines += ["  ".join(f"{_fmt(r[c]) or '-':>22}" for c in SCAN_COLUMNS) for r in rows]
        _write(args, "\n".join(lines) + "\n")
    else:
        _write(args, _csv(SCAN_COLUMNS, rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    model = _load_model(args)
    _needs_chain(model)
    if args.oracle_b:
        _oracle_check(model)
    certs, best = _certificates(args, model)
    kappa = best.bound if best else None
    if kappa is not None and args.corrupt_certificate is not None:
        kappa = kappa * args.corrupt_certificate + 1.0
    report = verify(model.chain, model.rep, kappa, args.samples, args.seed, args.refine)
    doc = report.to_dict()
    doc["certificate"] = best.to_dict() if best else None
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
    summary = {k: doc[k] for k in ("kappa", "min_ratio", "spectral_gap", "mlsi_min_ratio", "ced_min_gap", "passed", "seed", "samples")}
    if args.format == "json":
        _write(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif args.format == "csv":
        _write(args, _csv(list(summary), [summary]))
    else:
        pairs = list(summary.items()) + [(f"check.{k}", v) for k, v in doc["checks"].items()]
        _write(args, _table(pairs))
    if best is None:
        return EXIT_NO_CERT
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_spectrum(args) -> int:
    model = _load_model(args)
    _needs_chain(model)
    doc = {"model": model.kind, "n_states": model.chain.n, "spectral_gap": spectral_gap(model.chain)}
    _emit(args, doc, [doc], ["model", "n_states", "spectral_gap"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvlab", description="Entropic Ricci curvature bounds for finite Markov chains.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, default_format="table"):
        sp.add_argument("--model", help="path to a model JSON document")
        sp.add_argument("--inline", help="model JSON document given inline")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=["json", "csv", "table"], default=default_format)

    sp = sub.add_parser("validate", help="check chain and representation invariants")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    for name, func, help_ in (("bound", cmd_bound, "run every applicable curvature criterion"),
                              ("verify", cmd_verify, "cross-check the best certificate numerically")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--split", help="move halves for the split criterion: H1=i,j,...,H2=k,l,...")
        sp.add_argument("--oracle-b", action="store_true", help="cross-check B against its two-line form")
        if name == "verify":
            sp.add_argument("--samples", type=int, default=2000)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--refine", type=int, default=10, help="number of best samples to refine")
            sp.add_argument("--report", help="write the full JSON report here")
            sp.add_argument("--corrupt-certificate", type=float, default=None, help=argparse.SUPPRESS)
        sp.set_defaults(func=func)

    sp = sub.add_parser("scan", help="sweep beta for temperature families")
    common(sp, default_format="csv")
    sp.add_argument("--beta-min", type=float, default=0.0)
    sp.add_argument("--beta-max", type=float, default=1.0)
    sp.add_argument("--beta-steps", type=int, default=200)
    sp.add_argument("--log", action="store_true", help="log-spaced beta grid")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("spectrum", help="spectral gap of the generator")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, CurvlabError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
