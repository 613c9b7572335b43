import json
import math

from skewlab import reports
from skewlab.pcf import PcfValue
from skewlab.skew import BunchingRates, check_center_bunched, check_partial_hyperbolicity
from skewlab.transfer import ClassifyConfig, classify


def test_csv_cells() -> None:
    text = reports.csv_text(("a", "b", "c", "d"), [(None, True, 0.1, 3), (1e-17, False, -math.inf, "x")])

    assert "a,b,c,d\n,true,0.1,3\n1e-17,false,-inf,x\n" == text


def test_json_text_is_sorted_and_finite() -> None:
    text = reports.json_text({"b": math.nan, "a": [1.0, math.inf], "c": {"z": 1, "y": (2, 3)}})

    assert {"a": [1.0, "inf"], "b": "nan", "c": {"y": [2, 3], "z": 1}} == json.loads(text)
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert text.endswith("}\n")


def test_write_replaces_file(tmp_path) -> None:
    reports.write(tmp_path / "nested", "out.json", "first")
    path = reports.write(tmp_path / "nested", "out.json", "second")

    assert "second" == path.read_text(encoding="utf-8")
    assert ["out.json"] == sorted(p.name for p in path.parent.iterdir())


def test_pcf_payload() -> None:
    payload = reports.pcf_payload(PcfValue(value=0.25, error_bound=1e-11, terms_used=40), "quad cycle")

    assert {"path": "quad cycle", "value": 0.25, "error_bound": 1e-11, "terms_used": 40} == payload


def test_bunching_csv() -> None:
    rates = BunchingRates(nu=0.4, nu_hat=0.4, gamma=0.8, gamma_hat=1.0)
    table = [check_partial_hyperbolicity(rates), check_center_bunched(rates)]

    lines = reports.bunching_csv(table).splitlines()

    assert ",".join(reports.BUNCHING_HEADER) == lines[0]
    assert sum(len(report.checks) for report in table) == len(lines) - 1
    assert all(line.count(",") == len(reports.BUNCHING_HEADER) - 1 for line in lines)


def test_classification_payload_of_coboundary(cat, coboundary) -> None:
    result = classify(coboundary, cat, ClassifyConfig(grid_n=16, sample_nodes=6))

    payload = reports.classification_payload(result, deviation=1e-9)

    assert "coboundary" == payload["verdict"]
    assert 16 == payload["grid_n"]
    assert [0.0, 0.0] == payload["anchor"]
    assert 1e-9 == payload["sup_deviation"]
    assert "holder" not in payload
    assert 16 * 16 + 1 == len(reports.grid_csv(result.unwrap()).splitlines())


def test_classification_payload_of_obstruction(cat, obstructed) -> None:
    payload = reports.classification_payload(classify(obstructed, cat))

    assert "obstructed" == payload["verdict"]
    assert "periodic_orbit" == payload["witness"]["kind"]
    assert 1 == payload["witness"]["orbit"]["period"]
    assert [[0, 0]] == payload["witness"]["orbit"]["numerators"]
