import json
import math

import pytest

from phidual.cli import main
from phidual.serialize import (
    InstanceFormatError,
    dumps_canonical,
    load_instance,
    parse_instance,
)

INSTANCE_DOC = {
    "dimension": 1,
    "f": {
        "type": "piecewise-quadratic",
        "label": "f",
        "pieces": [{"interval": ["-inf", "+inf"], "coeffs": [2.0, 0.0, 0.0]}],
    },
    "g": {
        "type": "piecewise-quadratic",
        "label": "g",
        "pieces": [{"interval": ["-inf", "+inf"], "coeffs": [-1.0, 0.0, 0.0]}],
    },
    "box": {"lower": [-10.0], "upper": [10.0], "samples": [2001]},
    "phi": {"kind": "lsc-quadratic", "a_max": 8.0, "v_max": 32.0, "grid": [65, 65]},
}


def _write_instance(tmp_path, doc):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_parse_instance_roundtrip():
    inst = parse_instance(INSTANCE_DOC)
    assert inst.f(1.0) == 2.0 and inst.g(2.0) == -4.0
    assert inst.phi.kind == "lsc-quadratic"


def test_parse_rejects_missing_fields():
    with pytest.raises(InstanceFormatError):
        parse_instance({"dimension": 1})


def test_parse_tabulated_function(tmp_path):
    n = 101
    xs = [(-2.0 + 4.0 * i / (n - 1)) for i in range(n)]
    doc = {
        "dimension": 1,
        "f": {"type": "tabulated", "label": "t", "table": {"values": [x * x for x in xs]}},
        "g": {
            "type": "piecewise-quadratic",
            "pieces": [{"interval": ["-inf", "+inf"], "coeffs": [0.0, 0.0, 0.0]}],
        },
        "box": {"lower": [-2.0], "upper": [2.0], "samples": [n]},
        "phi": {"kind": "affine", "v_max": 8.0, "grid": [33]},
    }
    inst = parse_instance(doc)
    assert inst.f(1.0) == pytest.approx(1.0)
    path = _write_instance(tmp_path, doc)
    assert load_instance(path).f(0.0) == 0.0


def test_load_reports_line_and_column(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dimension": 1,\n  "oops"\n}')
    with pytest.raises(InstanceFormatError) as err:
        load_instance(str(path))
    assert "line" in str(err.value) and "column" in str(err.value)


def test_cli_dual_report_catalog(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["dual-report", "--catalog", "example-6.1", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["values"]["val_P"] == 0.0
    assert doc["values"]["val_CD"] == 0.0
    assert doc["values"]["val_ICD"] == "-inf"
    assert doc["chain_ok"] is True


def test_cli_dual_report_fenchel_all_zero(tmp_path):
    out = tmp_path / "rep.json"
    assert main(["dual-report", "--catalog", "fenchel-quadratic", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert all(v == 0.0 for v in doc["values"].values())


def test_cli_dual_report_instance_file(tmp_path):
    path = _write_instance(tmp_path, INSTANCE_DOC)
    out = tmp_path / "rep.json"
    assert main(["dual-report", "--instance", path, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["values"]["val_P"] == 0.0


def test_cli_dual_report_bad_instance_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["dual-report", "--instance", path.as_posix()]) == 1
    assert "line" in capsys.readouterr().err


def test_cli_dual_report_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["dual-report", "--catalog", "kkt-example", "--out", str(a)])
    main(["dual-report", "--catalog", "kkt-example", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_cli_dual_report_csv(tmp_path):
    out = tmp_path / "rep.csv"
    code = main(
        ["dual-report", "--catalog", "example-6.1", "--format", "csv", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "name,value,attainer,method,truncation"
    assert len(lines) == 7
    assert any("val_ICD,-inf" in ln for ln in lines)


def test_cli_kkt_verify_exit_codes(tmp_path):
    assert (
        main(["kkt-verify", "--catalog", "kkt-example", "--x", "2", "--a", "1",
              "--w", "0", "--out", str(tmp_path / "c.json")])
        == 0
    )
    assert (
        main(["kkt-verify", "--catalog", "kkt-example", "--x", "0", "--a", "1",
              "--w", "0", "--out", str(tmp_path / "c0.json")])
        == 3
    )
    assert main(["kkt-verify", "--catalog", "kkt-example"]) == 1  # missing --x


def test_cli_kkt_verify_writes_certificate(tmp_path):
    out = tmp_path / "cert.json"
    main(["kkt-verify", "--catalog", "kkt-example", "--x", "2", "--a", "1",
          "--w", "0", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert doc["optimal"] is True
    assert doc["primal_value"] == -2.0 and doc["dual_value"] == -2.0


def test_cli_gap_analyze_quadratic_pair(tmp_path):
    out = tmp_path / "gap.json"
    assert main(["gap-analyze", "--catalog", "example-6.1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    ga = doc["gap_analysis"]
    assert ga["condition_sum"] is False
    assert ga["condition_intersection"] is True
    assert ga["contradiction"] is False
    assert all(item["found"] for item in ga["intersection"])


def test_cli_gap_analyze_convex_pair(tmp_path):
    out = tmp_path / "gap.json"
    assert main(["gap-analyze", "--catalog", "fenchel-quadratic", "--out", str(out)]) == 0
    ga = json.loads(out.read_text())["gap_analysis"]
    assert ga["condition_sum"] is True and ga["condition_intersection"] is True


def test_cli_gap_analyze_gap_instance(tmp_path):
    out = tmp_path / "gap.json"
    assert main(["gap-analyze", "--catalog", "gap-instance", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    ga = doc["gap_analysis"]
    assert ga["condition_sum"] is False
    assert all(not item["found"] for item in ga["intersection"])
    assert doc["gaps"]["cd"] > 0.5


def test_cli_conjugate_values(capsys):
    assert main(["conjugate", "--catalog", "example-6.1", "--which", "g",
                 "--a", "2", "--b", "1"]) == 0
    assert capsys.readouterr().out.strip() == "0.25"
    assert main(["conjugate", "--catalog", "example-6.1", "--which", "g",
                 "--a", "1", "--b", "0"]) == 0
    assert capsys.readouterr().out.strip() == "0"
    assert main(["conjugate", "--catalog", "example-6.1", "--which", "g",
                 "--a", "0.5", "--b", "0"]) == 0
    assert capsys.readouterr().out.strip() == "+inf"


def test_cli_unknown_catalog_exits_1(capsys):
    assert main(["dual-report", "--catalog", "nope"]) == 1
    assert "unknown catalog entry" in capsys.readouterr().err


def test_cli_box_override(tmp_path):
    out = tmp_path / "rep.json"
    code = main(["dual-report", "--catalog", "example-6.1", "--box=-5,5",
                 "--grid", "1001", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["instance"]["box"]["lower"] == [-5.0]
    assert doc["instance"]["box"]["samples"] == [1001]


def test_canonical_dump_encodes_infinities():
    text = dumps_canonical({"a": math.inf, "b": -math.inf, "c": 0.1 + 0.2})
    doc = json.loads(text)
    assert doc["a"] == "+inf" and doc["b"] == "-inf"
    assert doc["c"] == 0.3  # 12 significant digits


def test_cli_conjugate_left_transform(capsys):
    # left conjugate of f = 2x^2 at (1, 0): sup(-2x^2 + x^2) = 0
    assert main(["conjugate", "--catalog", "example-6.1", "--which", "f",
                 "--a", "1", "--b", "0", "--left"]) == 0
    assert capsys.readouterr().out.strip() == "0"
    # and at (0, 2): sup(-2x^2 - 2x) = 1/2
    assert main(["conjugate", "--catalog", "example-6.1", "--which", "f",
                 "--a", "0", "--b", "2", "--left"]) == 0
    assert capsys.readouterr().out.strip() == "0.5"


def test_cli_dual_report_tabulated_instance_is_chain_coherent(tmp_path):
    # a tabulated member pins every quantifier to the grid; the chain must
    # come back coherent (exit 0), not tripped by sub-grid interpolation dips
    import numpy as np

    n = 801
    xs = np.linspace(-10, 10, n)
    doc = {
        "dimension": 1,
        "f": {
            "type": "piecewise-quadratic",
            "label": "f",
            "pieces": [{"interval": ["-inf", "+inf"], "coeffs": [2.0, 0.0, 0.0]}],
        },
        "g": {"type": "tabulated", "label": "g", "table": {"values": list(-xs * xs)}},
        "box": {"lower": [-10.0], "upper": [10.0], "samples": [n]},
        "phi": {"kind": "lsc-quadratic", "a_max": 8.0, "v_max": 32.0, "grid": [33, 33]},
    }
    path = tmp_path / "tab.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "rep.json"
    assert main(["dual-report", "--instance", str(path), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["chain_ok"] is True
    assert rep["values"]["val_P"] == 0.0 and rep["values"]["val_CD"] == 0.0


def test_cli_gap_analyze_rejects_bad_lists(capsys):
    assert main(["gap-analyze", "--catalog", "example-6.1",
                 "--alpha-list", "0.5"]) == 1
    assert "must be below" in capsys.readouterr().err
    assert main(["gap-analyze", "--catalog", "fenchel-quadratic",
                 "--eps-list=-1"]) == 1
    assert ">= 0" in capsys.readouterr().err
