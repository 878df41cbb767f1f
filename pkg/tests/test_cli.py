import io
import json

import pytest

from sweil.scalars import ONE
from sweil.liealg import LieAlgebraSpec, builtin_sl2_orthonormal, loop_backend
from sweil.fock import Box
from sweil.cli import (
    CSV_HEADER,
    build_parser,
    emit_report,
    emit_rows,
    main,
    resolve_config,
    run,
)
from sweil.verify import check_chain_identities


def capture(argv):
    parser = build_parser()
    cfg = resolve_config(parser.parse_args(argv))
    buf = io.BytesIO()
    status = run(cfg, out=buf)
    return status, buf.getvalue()


def test_empty_report_is_valid_document():
    assert json.loads(emit_report([], "json")) == []
    assert emit_report([], "text") == b"\n"
    rows = emit_rows([], "csv").decode().splitlines()
    assert rows == [",".join(CSV_HEADER)]


def test_failing_check_json_carries_witness_monomial():
    good = builtin_sl2_orthonormal()
    c = [[[x for x in col] for col in row] for row in good.c]
    c[0][1][2] = c[0][1][2] + ONE
    bad = loop_backend(LieAlgebraSpec(c, good.form, "sl2-mutated"))
    reports = check_chain_identities(bad, Box(emax=1, b0max=1), window=1)
    docs = json.loads(emit_report(reports, "json"))
    failed = [d for d in docs if d["status"] == "fail"]
    assert failed
    assert all("witness" in d and "monomial" in d["witness"] for d in failed)


def test_csv_header_matches_schema():
    assert CSV_HEADER == (
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


def test_sca_tables_passes_and_exits_zero():
    status, out = capture(
        ["sca-tables", "--alpha", "1/2", "--window", "1", "--format", "json"]
    )
    assert status == 0
    docs = json.loads(out)
    assert docs and all(d["status"] == "pass" for d in docs)
    assert all(d["millis"] == 0 for d in docs)


def test_abelian_relative_cohomology_csv():
    status, out = capture(
        [
            "cohomology",
            "--backend",
            "loop:abelian:1",
            "--rel",
            "--emax",
            "2",
            "--b0max",
            "1",
            "--format",
            "csv",
        ]
    )
    assert status == 0
    lines = out.decode().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) > 1
    for line in lines[1:]:
        cells = line.split(",")
        assert cells[6] == cells[3]  # coh_dim == dim: the differential is 0


def test_jobs_do_not_change_bytes():
    argv = [
        "verify-chain",
        "--backend",
        "loop:abelian:1",
        "--emax",
        "1",
        "--b0max",
        "1",
        "--window",
        "1",
        "--format",
        "json",
    ]
    s1, out1 = capture(argv + ["--jobs", "1"])
    s8, out8 = capture(argv + ["--jobs", "8"])
    assert (s1, out1) == (s8, out8)
    assert s1 == 0


def test_usage_errors_exit_two(capsys):
    assert main(["verify-s2a", "--backend", "bogus"]) == 2
    assert main(["verify-n2", "--jobs", "0"]) == 2
    assert main(["verify-chain", "--config", "/nonexistent/path"]) == 2
    capsys.readouterr()


def test_csv_rejected_for_relation_suites():
    assert (
        main(
            [
                "verify-chain",
                "--backend",
                "loop:abelian:1",
                "--emax",
                "0",
                "--format",
                "csv",
            ]
        )
        == 2
    )


def test_config_file_supplies_defaults(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "backend = loop:abelian:1\nemax = 1\nb0max = 1\nwindow = 1\n"
        "format = json\n"
    )
    parser = build_parser()
    cfg = resolve_config(
        parser.parse_args(
            ["verify-chain", "--config", str(cfgfile), "--window", "0"]
        )
    )
    assert cfg["backend"].name == "loop:abelian:1"
    assert cfg["emax"] == 1
    assert cfg["fmt"] == "json"
    # explicit flags beat the config file
    assert cfg["window"] == 0
