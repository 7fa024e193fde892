"""Command-line front end: ``surfdiv COMMAND [JOBFILE] [options]``.

Exit status 0 means the claim was verified, 1 that it was refuted (with a
witness), 2 an input or contract error. SURFDIV_VERBOSE=1 adds step
summaries, SURFDIV_VERBOSE=2 prints whole traces.
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter

from .certificate import (
    CertificateFormatError,
    certificate_document,
    dumps,
    singular_block,
    verify_text,
)
from .cones import extremal_rays, is_nef, is_pseudo_effective, zariski_decompose
from .errors import SurfdivError
from .jobs import JobSpec, parse_job
from .models import abelian_product, remark_counterexample
from .nonvanishing import nonvanish
from .resolution import anti_canonical, build_singular, nonvanish_singular
from .scalars import fmt
from .suite import run_suite
from .verify import verify_trace

EXIT_OK, EXIT_REFUTED, EXIT_INPUT = 0, 1, 2
JOB_COMMANDS = ("pseff", "nef", "zariski", "rays", "nonvanish", "resolve", "antik")


def _verbosity() -> int:
    try:
        return int(os.environ.get("SURFDIV_VERBOSE", "0"))
    except ValueError:
        return 0


def _vec(v) -> str:
    return "(" + ", ".join(fmt(x) for x in v.coords) + ")"


def _trace_report(trace, out):
    level = _verbosity()
    if level >= 1:
        counts = Counter(s.kind for s in trace)
        out.write("trace: " + ", ".join(f"{k} x{n}" for k, n in sorted(counts.items())) + "\n")
    if level >= 2:
        for s in trace:
            shown = {k: v for k, v in s.data.items() if k not in ("target", "pushforward", "pullback")}
            out.write(f"  [{s.level}] {s.kind} {shown}\n")


def _write_certificate(doc: dict, path: str | None, out):
    text = dumps(doc)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        out.write(f"certificate written to {path}\n")


def _class_name(job: JobSpec) -> str:
    return job.target or next(iter(job.classes), "D")


def cmd_pseff(job: JobSpec, args, out) -> int:
    lat, d = job.lattice, job.target_class()
    res = is_pseudo_effective(lat, d)
    name = _class_name(job)
    if res:
        out.write(f"{name} = {_vec(d)} is pseudo-effective\n")
        if res.certificate is not None:
            out.write(f"  {name} = {res.certificate.describe()}\n")
        else:
            out.write(f"  {res.reason}\n")
        return EXIT_OK
    out.write(f"{name} = {_vec(d)} is not pseudo-effective\n")
    if res.separator is not None:
        out.write(f"  witness: nef class h = {_vec(res.separator)} with h.{name} = {fmt(lat.pair(res.separator, d))}\n")
    else:
        out.write(f"  {res.reason}\n")
    return EXIT_REFUTED


def cmd_nef(job: JobSpec, args, out) -> int:
    lat, d = job.lattice, job.target_class()
    res = is_nef(lat, d)
    name = _class_name(job)
    if res:
        out.write(f"{name} = {_vec(d)} is nef ({res.reason})\n")
        return EXIT_OK
    out.write(f"{name} = {_vec(d)} is not nef\n")
    if res.witness is not None:
        out.write(f"  witness: {name}.{res.witness.name} = {fmt(res.value)}\n")
    else:
        out.write(f"  {res.reason}\n")
    return EXIT_REFUTED


def cmd_zariski(job: JobSpec, args, out) -> int:
    lat, d = job.lattice, job.target_class()
    z = zariski_decompose(lat, d)
    out.write(f"P = {_vec(z.P)}\n")
    terms = [f"{fmt(a)}*{c.name}" for c, a in zip(z.N_support, z.N_coeffs)]
    out.write("N = " + (" + ".join(terms) if terms else "0") + "\n")
    return EXIT_OK


def cmd_rays(job: JobSpec, args, out) -> int:
    lat = job.lattice
    rays = extremal_rays(lat)
    out.write(f"{len(rays)} extremal rays\n")
    for r in rays:
        c = r.generator
        out.write(f"  {c.name}: {_vec(c.cls)} square {fmt(lat.square(c.cls))} K.C {fmt(lat.pair(lat.canonical, c.cls))}\n")
    return EXIT_OK


def cmd_nonvanish(job: JobSpec, args, out) -> int:
    lat, L = job.lattice, job.target_class()
    cert, trace = nonvanish(lat, L)
    check = verify_trace(lat, cert, trace)
    out.write(f"K + L = {_vec(cert.target)} = {cert.describe()}\n")
    _trace_report(trace, out)
    out.write(f"verification: {check}\n")
    _write_certificate(certificate_document(lat, cert, trace, "nonvanish"), args.out, out)
    return EXIT_OK if check else EXIT_REFUTED


def _singular(job: JobSpec):
    return build_singular(job.lattice, job.exceptional)


def _report_singular(s, out):
    out.write(f"exceptional: {', '.join(e.name for e in s.exceptional) or 'none'}\n")
    terms = [f"{fmt(b)}*{e.name}" for b, e in zip(s.b_coeffs, s.exceptional) if b]
    out.write("B = " + (" + ".join(terms) if terms else "0") + "\n")
    out.write("quotient basis: " + ", ".join(s.quotient.basis_labels) + "\n")
    out.write(f"K_X = {_vec(s.canonical)}\n")


def _run_singular(job, args, out, result, s, command) -> int:
    cert = result.certificate
    out.write(f"certificate on X: {_vec(cert.target)} = {cert.describe()}\n")
    _trace_report(result.trace, out)
    check = verify_trace(s.resolution, result.resolution_certificate, result.trace)
    out.write(f"verification: {check}\n")
    doc = certificate_document(s.resolution, result.resolution_certificate, result.trace, command,
                               singular_block(s, result))
    _write_certificate(doc, args.out, out)
    return EXIT_OK if check else EXIT_REFUTED


def cmd_resolve(job: JobSpec, args, out) -> int:
    s = _singular(job)
    _report_singular(s, out)
    if not job.classes:
        return EXIT_OK
    L = job.target_class()
    if len(L.coords) != len(s.quotient_basis):
        raise SurfdivError("class on X must be given in quotient coordinates "
                           f"(length {len(s.quotient_basis)})")
    result = nonvanish_singular(s, s.quotient.cls(L.coords))
    return _run_singular(job, args, out, result, s, "resolve")


def cmd_antik(job: JobSpec, args, out) -> int:
    s = _singular(job)
    _report_singular(s, out)
    result = anti_canonical(s)
    return _run_singular(job, args, out, result, s, "antik")


def cmd_remark(args, out) -> int:
    n_max = args.bound if args.bound is not None else 1000
    report = remark_counterexample(abelian_product(), n_max)
    out.write(f"M = {_vec(report.M)}\n")
    out.write(f"M^2 = {fmt(report.M_square)}, M.F1 = {fmt(report.M_dot_F1)}\n")
    out.write(f"{'p':>8} {'q':>8}  M.G(p,q) = (q - p*sqrt(2))^2{'':>12} < 1/p\n")
    for r in report.rows:
        flag = "yes" if r.positive and r.below_bound else "NO"
        out.write(f"{r.p:>8} {r.q:>8}  {fmt(r.value):<40} {flag}\n")
    out.write(f"inequality 0 < M.G < 1/p holds for all {len(report.rows)} rows: {report.holds}\n")
    return EXIT_OK if report.holds else EXIT_REFUTED


def cmd_suite(args, out) -> int:
    instances = args.instances if args.instances is not None else 100
    seed = args.seed if args.seed is not None else 0
    report = run_suite(instances, seed, workers=args.workers)
    for r in report.results:
        status = "ok" if r.ok and r.oracle and r.verified else "FAIL"
        line = f"#{r.index:03d} r={r.r} L={_vec(r.L)} {status}"
        if status != "ok":
            line += f" ({r.message})"
        out.write(line + "\n")
    out.write(f"{report.passed}/{len(report.results)} instances verified\n")
    return EXIT_OK if report else EXIT_REFUTED


def cmd_verify(path: str, out) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        out.write(f"error: {exc}\n")
        return EXIT_INPUT
    try:
        result = verify_text(text)
    except CertificateFormatError as exc:
        out.write(f"error: malformed certificate: {exc}\n")
        return EXIT_INPUT
    out.write(f"{result}\n")
    return EXIT_OK if result else EXIT_REFUTED


_JOB_HANDLERS = {
    "pseff": cmd_pseff,
    "nef": cmd_nef,
    "zariski": cmd_zariski,
    "rays": cmd_rays,
    "nonvanish": cmd_nonvanish,
    "resolve": cmd_resolve,
    "antik": cmd_antik,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surfdiv", description="Exact divisor computations on surfaces.")
    p.add_argument("command", choices=JOB_COMMANDS + ("remark", "suite", "verify", "run"))
    p.add_argument("file", nargs="?", help="job file (certificate file for verify)")
    p.add_argument("--seed", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--bound", type=int)
    p.add_argument("--out", help="write the certificate here")
    p.add_argument("--workers", type=int, default=4, help="parallel workers for suite")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            if not args.file:
                out.write("error: verify needs a certificate file\n")
                return EXIT_INPUT
            return cmd_verify(args.file, out)
        job = None
        if args.file:
            with open(args.file, encoding="utf-8") as fh:
                job = parse_job(fh.read())
            for key in ("seed", "instances", "bound"):
                if getattr(args, key) is None and key in job.options:
                    setattr(args, key, job.options[key])
        command = args.command
        if command == "run":
            if job is None or not job.command:
                out.write("error: run needs a job file with command = ... under [job]\n")
                return EXIT_INPUT
            command = job.command
        if command == "remark":
            return cmd_remark(args, out)
        if command == "suite":
            return cmd_suite(args, out)
        if job is None:
            out.write(f"error: {command} needs a job file\n")
            return EXIT_INPUT
        return _JOB_HANDLERS[command](job, args, out)
    except (SurfdivError, OSError) as exc:
        out.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
