"""Batch entry point: configure a backend and box budgets, run the
verification suites or the cohomology tables, and emit deterministic
machine-readable reports.

Exit codes: 0 when every check passes, 1 when a check fails (the report
carries a witness), 2 on usage errors.  Reports are byte-identical across
runs and parallelism degrees: work is scheduled sequentially in a fixed
order and timing fields are zeroed in the emitted output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from itertools import product

from .scalars import QI, ZERO, ONE, format_qi, parse_qi
from .liealg import GradedBackend, StructureError, parse_backend
from .fock import Box
from .sca import (
    N2_SYMBOLS,
    SCAElement,
    SYMBOLS,
    SuperVectorField,
    derext_action,
    n2_bracket,
    remark_F_field,
    s2a_basis_bracket,
    s2a_bracket,
    s_alpha_obstruction,
    spectral_flow,
    vf_bracket,
    vf_realize,
)
from .verify import (
    N2_TABLE_SYMBOLS,
    S2A_TABLE_SYMBOLS,
    RelationReport,
    check_chain_identities,
    check_d_compatibility,
    check_relative_derext,
    check_representation,
    claimed_charge,
    extract_central_charge,
    n2_builder,
    n2_table,
    s2a_builder,
    s2a_table,
)
from .cohomology import cohomology_table, harmonic_lefschetz_report

COMMANDS = (
    "verify-n2",
    "verify-s2a",
    "verify-chain",
    "verify-relative",
    "sca-tables",
    "cohomology",
    "kahler",
)

CSV_HEADER = (
    "E",
    "DegS",
    "DegLambda",
    "dim",
    "rank_in",
    "rank_out",
    "coh_dim",
    "gram_signature",
    "harmonic_dim",
)


class UsageError(ValueError):
    pass


# -- report normalization ----------------------------------------------


def _report_dict(report) -> dict:
    """Uniform report record; millis is zeroed so equal configurations
    emit byte-identical documents."""
    if isinstance(report, RelationReport):
        out = {
            "check": report.check,
            "params": dict(report.params),
            "box": report.box,
            "status": report.status,
            "millis": 0,
        }
        if report.witness is not None:
            out["witness"] = dict(report.witness)
        return out
    # structural CheckReport
    out = {
        "check": report.name,
        "params": {},
        "box": report.detail,
        "status": "pass" if report.passed else "fail",
        "millis": 0,
    }
    if report.witness is not None:
        out["witness"] = {"value": str(report.witness)}
    return out


def emit_report(results, fmt: str) -> bytes:
    """Serialize check reports (json/text) or table rows (csv) with a
    stable field order; equal inputs give byte-identical output."""
    if fmt == "json":
        docs = [_report_dict(r) for r in results]
        return (json.dumps(docs, sort_keys=True, indent=2) + "\n").encode()
    if fmt == "text":
        lines = []
        for r in results:
            d = _report_dict(r)
            line = f"{d['status'].upper():4s} {d['check']}"
            if d["box"]:
                line += f" [{d['box']}]"
            if d["params"]:
                line += " " + " ".join(
                    f"{k}={v}" for k, v in sorted(d["params"].items())
                )
            if "witness" in d:
                line += " witness: " + " ".join(
                    f"{k}={v}" for k, v in sorted(d["witness"].items())
                )
            lines.append(line)
        return ("\n".join(lines) + "\n").encode()
    raise UsageError(f"unknown format: {fmt}")


def emit_rows(rows, fmt: str) -> bytes:
    """Cohomology-table rows; CSV follows the fixed schema."""
    records = [
        {
            "E": r.energy,
            "DegS": r.deg_s,
            "DegLambda": r.deg_l,
            "dim": r.dim,
            "rank_in": r.rank_in,
            "rank_out": r.rank_out,
            "coh_dim": r.coh_dim,
            "gram_signature": r.gram_signature,
            "harmonic_dim": r.harmonic_dim,
        }
        for r in rows
    ]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for rec in records:
            w.writerow([rec[k] for k in CSV_HEADER])
        return buf.getvalue().encode()
    if fmt == "json":
        return (json.dumps(records, sort_keys=True, indent=2) + "\n").encode()
    if fmt == "text":
        lines = ["  ".join(CSV_HEADER)]
        for rec in records:
            lines.append("  ".join(str(rec[k]) for k in CSV_HEADER))
        return ("\n".join(lines) + "\n").encode()
    raise UsageError(f"unknown format: {fmt}")


# -- suites -------------------------------------------------------------


def _central_charge_report(name, builder, backend) -> RelationReport:
    claimed = claimed_charge(backend)
    extracted = extract_central_charge(builder)
    return RelationReport(
        name,
        tuple(
            sorted(
                {
                    "backend": backend.name,
                    "claimed": format_qi(claimed),
                    "extracted": format_qi(extracted),
                }.items()
            )
        ),
        "vacuum probe",
        "pass" if claimed == extracted else "fail",
        None,
        0,
    )


def suite_verify_n2(cfg):
    backend = cfg["backend"]
    builder = n2_builder(backend)
    reports = [_central_charge_report("n2:central-charge", builder, backend)]
    reports.append(
        check_representation(
            "n2:relations",
            n2_table,
            builder,
            claimed_charge(backend),
            backend.dim,
            cfg["box"],
            cfg["window"],
            N2_TABLE_SYMBOLS,
            params=(("backend", backend.name),),
        )
    )
    return reports


def suite_verify_s2a(cfg):
    backend = cfg["backend"]
    alpha = cfg["alpha"]
    builder = s2a_builder(backend, alpha)
    reports = [_central_charge_report("s2a:central-charge", builder, backend)]
    reports.append(
        check_representation(
            "s2a:relations",
            s2a_table(alpha),
            builder,
            claimed_charge(backend),
            backend.dim,
            cfg["box"],
            cfg["window"],
            S2A_TABLE_SYMBOLS,
            params=(("alpha", format_qi(alpha)), ("backend", backend.name)),
        )
    )
    return reports


def suite_verify_chain(cfg):
    return check_chain_identities(cfg["backend"], cfg["box"], cfg["window"])


def suite_verify_relative(cfg):
    reports = [check_d_compatibility(cfg["backend"], cfg["box"], cfg["window"])]
    reports.extend(
        check_relative_derext(cfg["backend"], cfg["box"], cfg["window"])
    )
    return reports


def _vf_of_element(alpha, el):
    out = SuperVectorField()
    for (sym, n), c in el.coeffs.items():
        out = out + vf_realize(alpha, sym, n).scale(c)
    return out


def _table_report(check, alpha, window, witness) -> RelationReport:
    return RelationReport(
        check,
        (("alpha", format_qi(alpha)), ("window", str(window))),
        "abstract",
        "fail" if witness else "pass",
        witness,
        0,
    )


def suite_sca_tables(cfg):
    alpha = cfg["alpha"]
    window = cfg["window"]
    basis = [(s, n) for s in SYMBOLS for n in range(-window, window + 1)]
    reports = []

    # typed bracket table against the independent super-vector-field oracle
    witness = None
    for (sa, na), (sb, nb) in product(basis, repeat=2):
        lhs = vf_bracket(vf_realize(alpha, sa, na), vf_realize(alpha, sb, nb))
        tab = s2a_basis_bracket(alpha, sa, na, sb, nb, include_cocycle=False)
        if not (lhs - _vf_of_element(alpha, tab)).is_zero():
            witness = (("pair", f"[{sa}[{na}],{sb}[{nb}]]"),)
            break
    reports.append(_table_report("sca:table-vs-fields", alpha, window, witness))

    # graded Jacobi identity, including the central cocycle
    witness = None
    jw = min(window, 2)
    jbasis = [(s, n) for s in SYMBOLS for n in range(-jw, jw + 1)]
    for (sa, na), (sb, nb), (sc, nc) in product(jbasis, repeat=3):
        A = SCAElement.basis(sa, na)
        B = SCAElement.basis(sb, nb)
        C = SCAElement.basis(sc, nc)
        t1 = s2a_bracket(alpha, A, s2a_bracket(alpha, B, C))
        t2 = s2a_bracket(alpha, s2a_bracket(alpha, A, B), C)
        t3 = s2a_bracket(alpha, B, s2a_bracket(alpha, A, C))
        if A.parity() and B.parity():
            t3 = t3.scale(QI(-1))
        if not (t1 - t2 - t3).is_zero():
            witness = (
                ("triple", f"({sa}[{na}],{sb}[{nb}],{sc}[{nc}])"),
            )
            break
    reports.append(_table_report("sca:super-jacobi", alpha, jw, witness))

    # spectral flow is a bracket homomorphism onto the unflowed subalgebra
    witness = None
    for (sa, na), (sb, nb) in product(
        [(s, n) for s in N2_SYMBOLS for n in range(-window, window + 1)],
        repeat=2,
    ):
        A = SCAElement.basis(sa, na)
        B = SCAElement.basis(sb, nb)
        lhs = spectral_flow(alpha, s2a_bracket(alpha, A, B))
        rhs = n2_bracket(spectral_flow(alpha, A), spectral_flow(alpha, B))
        if not (lhs - rhs).is_zero():
            witness = (("pair", f"[{sa}[{na}],{sb}[{nb}]]"),)
            break
    reports.append(_table_report("sca:spectral-flow", alpha, window, witness))

    # the lowering derivation as a weighted-divergence-free field
    # (integer parameter only: the raising operator shifts the weight grid)
    if alpha.im == 0 and Fraction(alpha.re).denominator == 1:
        witness = None
        field = remark_F_field(alpha)
        if s_alpha_obstruction(alpha, field):
            witness = (("field", "weighted divergence is nonzero"),)
        else:
            for s in ("h", "p", "x", "y"):
                for k in range(-window, window + 1):
                    lhs = vf_bracket(field, vf_realize(alpha, s, k))
                    rhs = _vf_of_element(
                        alpha, derext_action(alpha, "FF", SCAElement.basis(s, k))
                    )
                    if not (lhs - rhs).is_zero():
                        witness = (("pair", f"[FF,{s}[{k}]]"),)
                        break
                if witness:
                    break
        reports.append(
            _table_report("sca:lowering-field", alpha, window, witness)
        )
    return reports


def suite_cohomology(cfg):
    backend = cfg["backend"]
    emax = cfg["emax"]
    deg_s_lo = -(cfg["emax"] + cfg["b0max"])
    rows, _ = cohomology_table(
        backend,
        range(0, emax + 1),
        range(deg_s_lo, emax + 1),
        cfg["rel"],
    )
    return rows


def suite_kahler(cfg):
    rows, checks = harmonic_lefschetz_report(cfg["backend"], emax=cfg["emax"])
    return rows, checks


# -- configuration ------------------------------------------------------


def _read_config_file(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweil",
        description="Exact verification suites for the semi-infinite Weil "
        "complex: superconformal relation checks, cohomology tables, and "
        "the harmonic/Lefschetz operator package.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--backend", default="loop:sl2")
        p.add_argument("--alpha", default="0")
        p.add_argument("--emax", type=int, default=3)
        p.add_argument("--b0max", type=int, default=2)
        p.add_argument("--window", type=int, default=2)
        p.add_argument("--rel", action="store_true")
        p.add_argument("--format", default="text", dest="fmt",
                       choices=("json", "csv", "text"))
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--config", default=None)
    return parser


_CONFIG_DEFAULTS = {
    "backend": "loop:sl2",
    "alpha": "0",
    "emax": 3,
    "b0max": 2,
    "window": 2,
    "rel": False,
    "fmt": "text",
    "jobs": 1,
}


def resolve_config(args) -> dict:
    """Merge config-file values under explicit flags and validate."""
    values = {k: getattr(args, k) for k in _CONFIG_DEFAULTS}
    if args.config:
        file_values = _read_config_file(args.config)
        for key, raw in file_values.items():
            dest = "fmt" if key == "format" else key
            if dest not in _CONFIG_DEFAULTS:
                raise UsageError(f"unknown config key: {key}")
            # command-line flags take precedence over the config file
            if values[dest] != _CONFIG_DEFAULTS[dest]:
                continue
            default = _CONFIG_DEFAULTS[dest]
            if isinstance(default, bool):
                values[dest] = raw.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                values[dest] = int(raw)
            else:
                values[dest] = raw
    if values["emax"] < 0 or values["b0max"] < 0 or values["window"] < 0:
        raise UsageError("box budgets must be nonnegative")
    if values["jobs"] < 1:
        raise UsageError("--jobs must be at least 1")
    if values["fmt"] not in ("json", "csv", "text"):
        raise UsageError(f"unknown format: {values['fmt']}")
    try:
        backend = parse_backend(values["backend"])
    except (StructureError, ValueError) as exc:
        raise UsageError(f"bad backend {values['backend']!r}: {exc}")
    try:
        alpha = QI.of(parse_qi(values["alpha"]))
    except (StructureError, ValueError) as exc:
        raise UsageError(f"bad alpha {values['alpha']!r}: {exc}")
    return {
        "backend": backend,
        "alpha": alpha,
        "emax": values["emax"],
        "b0max": values["b0max"],
        "window": values["window"],
        "rel": values["rel"],
        "fmt": values["fmt"],
        "jobs": values["jobs"],
        "box": Box(emax=values["emax"], b0max=values["b0max"]),
        "command": args.command,
    }


def run(cfg, out=None) -> int:
    """Execute the selected suite and write the report; exit status 0 only
    when every check passes."""
    out = out if out is not None else sys.stdout.buffer
    fmt = cfg["fmt"]
    command = cfg["command"]
    if command == "cohomology":
        rows = suite_cohomology(cfg)
        out.write(emit_rows(rows, fmt))
        return 0
    if command == "kahler":
        rows, checks = suite_kahler(cfg)
        if fmt == "csv":
            out.write(emit_rows(rows, fmt))
        else:
            out.write(emit_report(checks, fmt))
        return 0 if all(_report_dict(c)["status"] == "pass" for c in checks) else 1
    if fmt == "csv":
        raise UsageError("csv output is only available for table commands")
    suites = {
        "verify-n2": suite_verify_n2,
        "verify-s2a": suite_verify_s2a,
        "verify-chain": suite_verify_chain,
        "verify-relative": suite_verify_relative,
        "sca-tables": suite_sca_tables,
    }
    reports = suites[command](cfg)
    out.write(emit_report(reports, fmt))
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return run(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
