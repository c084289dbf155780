import csv
import os
from pathlib import Path

import pytest

import pktablex

FIXTURES = Path(os.environ.get("PKTABLEX_FIXTURE_DIR", Path(__file__).parents[1] / "fixtures"))
MEL = FIXTURES / "corpus" / "10.1016_j.smallrumres.2018.01.001.xml"
IMIDOL = FIXTURES / "corpus" / "10.1016_j.ijpharm.2013.12.002.xml"


def test_table2a_normalizes_to_dense_grid():
    (raw,) = pktablex.find_tables((FIXTURES / "synthetic" / "table2a.xml").read_text())
    grid = pktablex.normalize(raw)
    assert grid.cells[0] == ["A", "A", "A", "B", "C", "D"]
    assert grid.cells[-1][-2:] == ["NaN", "NaN"]
    assert pktablex.validate_grid(grid) == []


def test_mel_sentences_match_golden():
    (raw,) = pktablex.find_tables(MEL.read_text())
    doc = pktablex.extract_sentences(raw, pktablex.Ontology.defaults())
    golden = (FIXTURES / "golden" / "mel_case1.txt").read_text().rstrip("\n")
    assert len(doc.sentences) == 17
    assert doc.joined == golden


def test_imidol_clearance_records():
    (raw,) = pktablex.find_tables(IMIDOL.read_text())
    recs = pktablex.extract_records(raw, pktablex.Ontology.defaults(), {"clearance"})
    assert [r.dose[0] for r in recs] == [10.02, 30.25, 70.55, 320.3, 10.20]
    assert [r.route for r in recs] == ["PO"] * 4 + ["IV"]


def test_parse_value_and_matching():
    v = pktablex.parse_value("15.48 ± 6.64 a")
    assert (v.mean, v.spread) == (15.48, 6.64)
    assert pktablex.parse_value("<0.5").qualifier == "less-than"
    assert pktablex.Ontology.defaults().match_parameter("C max (ng/ml)") == ("cmax", "ng/ml")


def test_malformed_document_raises():
    with pytest.raises(ValueError):
        pktablex.find_tables((FIXTURES / "malformed" / "broken.xml").read_text())


def test_run_writes_csv(tmp_path):
    out = tmp_path / "out.csv"
    report = pktablex.run([str(FIXTURES / "corpus")], str(out), "records", {"clearance"}, 2)
    assert report["exit_code"] == 0
    with out.open(newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert rows and all(r["parameter_canonical"] == "clearance" for r in rows)
    assert len(rows) == report["records_emitted"]
