import csv
import io
import json
import math

import numpy as np
import pytest

from packcert.cli import main
from packcert.packing import Packing, generate_fcc, load, save


def rows_of(doc, table):
    cols = doc["tables"][table]["columns"]
    return [dict(zip(cols, r)) for r in doc["tables"][table]["rows"]]


def quantity(doc, name):
    return [r["value"] for r in rows_of(doc, "measure") if r["quantity"] == name]


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["generate", "fcc", "--radius", "10", "--out", str(d / "fcc.json")]) == 0
    assert main(["generate", "cubic", "--radius", "10", "--out", str(d / "cubic.json")]) == 0
    assert main(["generate", "random", "--radius", "10", "--seed", "7", "--out", str(d / "r7.json")]) == 0
    return d


def test_generate_fcc_count(tmp_path, capsys):
    out = tmp_path / "f.json"
    assert main(["generate", "--kind", "fcc", "--radius", "12", "--out", str(out)]) == 0
    n = len(load(out))
    assert abs(n - 4 / 3 * math.pi * 12**3 / (4 * math.sqrt(2))) < 100
    text = capsys.readouterr().out
    assert f"centers: {n}" in text and "saturated" in text


def test_generate_deterministic(files, tmp_path):
    again = tmp_path / "again.json"
    assert main(["generate", "random", "--radius", "10", "--seed", "7", "--out", str(again)]) == 0
    assert again.read_bytes() == (files / "r7.json").read_bytes()


def test_generate_errors(tmp_path):
    assert main(["generate", "fcc", "--radius", "2", "--out", str(tmp_path / "x.json")]) == 2
    assert main(["generate", "random", "--radius", "8", "--out", str(tmp_path / "x.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["generate", "hexagonal", "--radius", "8"])
    assert exc.value.code == 2
    assert main(["generate", "fcc", "--radius", "8", "--out", str(tmp_path / "no" / "x.json")]) == 3


def test_measure_fcc(files, tmp_path):
    out = tmp_path / "m.json"
    assert main(["measure", str(files / "fcc.json"), "--r", "3", "--r", "5", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["version"] and doc["config"]["r"] == [3.0, 5.0]
    assert len(quantity(doc, "density")) == 2
    assert all(abs(g) < 1e-9 for g in quantity(doc, "G_min") + quantity(doc, "G_max"))
    assert quantity(doc, "L_sum_max") == [pytest.approx(12.0)]
    assert abs(quantity(doc, "fcc_compat_min")[0]) < 1e-9
    assert all(r["anchor"] for r in rows_of(doc, "measure"))


def test_measure_cubic(files, capsys):
    assert main(["measure", str(files / "cubic.json"), "--format", "csv"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("# packcert ")
    rows = list(csv.reader(line for line in io.StringIO(text) if not line.startswith("#")))
    vals = {r[0]: r[2] for r in rows[1:]}
    assert float(vals["L_sum_max"]) == pytest.approx(6.0)
    assert float(vals["fcc_compat_min"]) == pytest.approx(1.2199, abs=1e-4)


def test_measure_deterministic(files, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["measure", str(files / "r7.json"), "--r", "4", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_measure_unsaturated(tmp_path):
    p = generate_fcc(12)
    keep = np.linalg.norm(p.centers - np.array([1.4, 1.4, 0.0]), axis=1) > 3.2  # carve a hole near the origin
    holey = Packing(p.centers[keep], 12.0, "custom")
    save(holey, tmp_path / "holey.json")
    assert main(["measure", str(tmp_path / "holey.json")]) == 1


def test_measure_io_and_usage(files, tmp_path):
    assert main(["measure", str(tmp_path / "missing.json")]) == 3
    (tmp_path / "bad.json").write_text("[]")
    assert main(["measure", str(tmp_path / "bad.json")]) == 3
    assert main(["measure", str(files / "fcc.json"), "--r", "0.5"]) == 2
    assert main(["measure", str(files / "fcc.json"), "--r", "9.5"]) == 2
    assert main(["measure", str(files / "fcc.json"), "--region", "5"]) == 2
    assert main(["measure"]) == 2
    assert main(["measure", str(files / "fcc.json"), "--kind", "fcc", "--radius", "8"]) == 2


def test_measure_from_generator_spec(capsys):
    assert main(["measure", "--kind", "cubic", "--radius", "8", "--region", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["kind"] == "cubic"


def test_voronoi_stats(files, capsys):
    assert main(["voronoi-stats", str(files / "fcc.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    rows = rows_of(doc, "voronoi")
    assert rows and all(abs(r["volume_minus_4sqrt2"]) < 1e-9 for r in rows)
    assert all(r["faces"] == 12 for r in rows)


def test_cells(files, capsys):
    assert main(["cells", str(files / "fcc.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    summary = {r["quantity"]: r["value"] for r in rows_of(doc, "cells_summary")}
    assert summary["cell_count"] > 0
    assert doc["tables"]["clusters"]["rows"] == []
    assert main(["cells", str(files / "r7.json"), "--format", "csv"]) == 0
    assert "# table: clusters" in capsys.readouterr().out


def test_audit(tmp_path, capsys):
    out = tmp_path / "cert.json"
    assert main(["audit", "--out", str(out)]) == 0
    cert = json.loads(out.read_text())
    assert isinstance(cert, list) and all(s["pass"] for s in cert)
    assert {"name", "claim", "computed", "bound", "pass"} <= set(cert[0])
    assert main(["audit", "--tighten", "12710:12709", "--out", str(tmp_path / "bad.json")]) == 1
    assert not all(s["pass"] for s in json.loads((tmp_path / "bad.json").read_text()))
    assert main(["audit", "--tighten", "nonsense"]) == 2


def test_audit_csv_same_content(tmp_path):
    assert main(["audit", "--out", str(tmp_path / "c.json")]) == 0
    assert main(["audit", "--format", "csv", "--out", str(tmp_path / "c.csv")]) == 0
    cert = json.loads((tmp_path / "c.json").read_text())
    lines = [l for l in (tmp_path / "c.csv").read_text().splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(lines))
    assert [r["name"] for r in rows] == [s["name"] for s in cert]
    for r, s in zip(rows, cert):
        assert r["claim"] == s["claim"]
        assert [float(r["computed_lo"]), float(r["computed_hi"])] == s["computed"]
        assert [float(r["bound_lo"]), float(r["bound_hi"])] == s["bound"]
        assert (r["pass"] == "true") == s["pass"]


def test_audit_with_packing(files, capsys):
    assert main(["audit", str(files / "fcc.json"), "--r", "5"]) == 0
    cert = json.loads(capsys.readouterr().out)
    assert any(s["name"] == "bound_final_r5" for s in cert)


def test_report(files, tmp_path):
    out = tmp_path / "rep.json"
    assert main(["report", str(files / "r7.json"), "--r", "4", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc["tables"]) == {"measure", "cells_summary", "clusters", "audit"}
    assert doc["failed_checks"] == []
    assert main(["report", str(files / "r7.json"), "--tighten", "24373:24372", "--out", str(out)]) == 1
