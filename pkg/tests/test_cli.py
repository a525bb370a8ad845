import json
import math

import pytest

from umapstab.cli import main
from umapstab.epmetric import EpMetric
from umapstab.errors import FormatError
from umapstab.io import (
    neighborhood_to_dict,
    read_distance_csv,
    read_inclusion_csv,
    read_neighborhood_json,
    read_points_csv,
    write_distance_csv,
)
from umapstab.neighborhood import knn, weights


@pytest.fixture
def line_csv(tmp_path):
    p = tmp_path / "line.csv"
    p.write_text("id,x\na,0\nb,1\nc,3\n")
    return p


@pytest.fixture
def line4_csv(tmp_path):
    p = tmp_path / "line4.csv"
    p.write_text("a,0\nb,1\nd,2\nc,3\n")
    return p


@pytest.fixture
def incl_csv(tmp_path):
    p = tmp_path / "incl.csv"
    p.write_text("a,a\nb,b\nc,c\n")
    return p


def test_distance_csv_round_trip(tmp_path):
    m = EpMetric("abc", [[0, 1, math.inf], [1, 0, 2.5], [math.inf, 2.5, 0]])
    path = tmp_path / "d.csv"
    write_distance_csv(m, path)
    assert "inf" in path.read_text()
    assert read_distance_csv(path).equals(m)
    assert read_distance_csv(path, exact=True).d("b", "c") == 2.5


def test_distance_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0,1\n")
    with pytest.raises(FormatError):
        read_distance_csv(p)
    p.write_text("a,b\n0,x\nx,0\n")
    with pytest.raises(FormatError):
        read_distance_csv(p)


def test_points_csv(line_csv):
    m = read_points_csv(line_csv, exact=True)
    assert m.points == ("a", "b", "c") and m.d("a", "c") == 3
    man = read_points_csv(line_csv, metric="manhattan")
    assert man.d("b", "c") == 2.0


def test_points_csv_rejects_inf(tmp_path):
    p = tmp_path / "dist.csv"
    p.write_text("a,b,c\n0,1,inf\n1,0,1\ninf,1,0\n")
    with pytest.raises(FormatError):
        read_points_csv(p)


def test_neighborhood_json_round_trip(tmp_path, line):
    ns = weights(knn(line, 2), line, "scaled")
    p = tmp_path / "ns.json"
    p.write_text(json.dumps(neighborhood_to_dict(ns)))
    back = read_neighborhood_json(p, exact=True)
    assert back.neighbors == ns.neighbors and back.weights == ns.weights


def test_inclusion_csv(tmp_path, incl_csv):
    assert read_inclusion_csv(incl_csv) == {"a": "a", "b": "b", "c": "c"}
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n")
    with pytest.raises(FormatError):
        read_inclusion_csv(bad)


def test_cluster_line(tmp_path, line_csv, capsys):
    out = tmp_path / "out"
    assert main(["cluster", str(line_csv), "--k", "1", "--out", str(out)]) == 0
    dendro = json.loads((out / "dendrogram.json").read_text())
    assert dendro["merges"] == [
        {"s": 1.0, "absorbed": "b", "into": "a"},
        {"s": 2.0, "absorbed": "c", "into": "a"},
    ]
    assert dendro["roots"] == ["a"]
    parts = json.loads((out / "partitions.json").read_text())["partitions"]
    assert parts[0] == {"s": 1.0, "blocks": [["a", "b"], ["c"]]}
    assert "components at s=inf: 1" in capsys.readouterr().out


def test_cluster_rational_strings(tmp_path, line_csv):
    out = tmp_path / "out"
    assert main(["cluster", str(line_csv), "--k", "2", "--scheme", "scaled", "--arith", "rational",
                 "--out", str(out)]) == 0
    dendro = json.loads((out / "dendrogram.json").read_text())
    assert dendro["merges"][0]["s"] == "1/3"


def test_cluster_single_point(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("a,5,5\n")
    out = tmp_path / "out"
    assert main(["cluster", str(p), "--out", str(out)]) == 0
    assert json.loads((out / "dendrogram.json").read_text()) == {"merges": [], "roots": ["a"]}


def test_cluster_rejects_distance_file_in_points_mode(tmp_path, capsys):
    p = tmp_path / "dist.csv"
    p.write_text("a,b,c\n0,1,inf\n1,0,1\ninf,1,0\n")
    assert main(["cluster", str(p), "--format", "points-csv", "--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_cluster_distance_and_json_inputs(tmp_path, line):
    d = tmp_path / "d.csv"
    write_distance_csv(line, d)
    assert main(["cluster", str(d), "--format", "distance-csv", "--k", "1", "--out", str(tmp_path / "o1")]) == 0
    ns = tmp_path / "ns.json"
    ns.write_text(json.dumps({"points": ["a", "b", "c"], "neighbors": {"a": ["b"], "b": ["a"], "c": ["b"]}}))
    assert main(["cluster", str(ns), "--format", "neighborhood-json", "--out", str(tmp_path / "o2")]) == 2
    assert main(["cluster", str(ns), "--format", "neighborhood-json", "--ambient", str(d),
                 "--out", str(tmp_path / "o2")]) == 0
    a = (tmp_path / "o1" / "dendrogram.json").read_bytes()
    b = (tmp_path / "o2" / "dendrogram.json").read_bytes()
    assert a == b


def test_verify_remark5(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--which", "remark5", "--points", "3", "--out", str(out)]) == 0
    rep = json.loads((out / "verify.json").read_text())["remark5"]
    assert rep["chi"] == -3 and rep["betti"][:2] == [1, 4] and rep["verdict"] == "PASS"


def test_verify_remark5_guard(tmp_path, capsys):
    assert main(["verify", "--which", "remark5", "--points", "8", "--out", str(tmp_path)]) == 2
    assert "limited" in capsys.readouterr().err


def test_verify_excision_generated_and_input(tmp_path, line_csv):
    assert main(["verify", "--which", "excision", "--instances", "20", "--arith", "rational",
                 "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", str(line_csv), "--which", "excision", "--k", "2", "--out", str(tmp_path / "b")]) == 0
    rep = json.loads((tmp_path / "b" / "verify.json").read_text())
    assert rep["excision"] == {"instances": 1, "failures": [], "verdict": "PASS"}


def test_verify_stability_identity(tmp_path, line_csv, incl_csv):
    out = tmp_path / "s"
    assert main(["verify-stability", str(line_csv), str(line_csv), str(incl_csv), "--k", "1",
                 "--out", str(out)]) == 0
    cert = json.loads((out / "certificate-a.json").read_text())
    assert cert["verdict"] and cert["m"] == 1.0 and cert["r"] == 0.0


def test_verify_stability_nested(tmp_path, line_csv, line4_csv, incl_csv):
    out = tmp_path / "s"
    assert main(["verify-stability", str(line_csv), str(line4_csv), str(incl_csv), "--k", "1", "--k-y", "2",
                 "--arith", "rational", "--out", str(out)]) == 0
    cert = json.loads((out / "certificate-a.json").read_text())
    assert cert["verdict"] and cert["theta"]["d"] == "b" and cert["r"] == "1"


def test_verify_stability_violation(tmp_path, incl_csv, capsys):
    x = tmp_path / "x.json"
    y = tmp_path / "y.json"
    x.write_text(json.dumps({"points": ["a", "b", "c"], "neighbors": {"a": ["b"]}, "weights": {"a": [1]}}))
    y.write_text(json.dumps({"points": ["a", "b", "c"], "neighbors": {"a": ["b"]}, "weights": {"a": [2]}}))
    code = main(["verify-stability", str(x), str(y), str(incl_csv), "--format", "neighborhood-json",
                 "--out", str(tmp_path / "s")])
    assert code == 3
    assert "violation: ('a', 'b'" in capsys.readouterr().err


def test_cli_runs_are_byte_identical(tmp_path, line_csv, line4_csv, incl_csv):
    def run(tag):
        out = tmp_path / tag
        main(["cluster", str(line4_csv), "--k", "2", "--scheme", "shifted", "--out", str(out)])
        main(["verify", "--instances", "10", "--out", str(out)])
        main(["verify-stability", str(line_csv), str(line4_csv), str(incl_csv), "--k", "1", "--k-y", "2",
              "--out", str(out)])
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    assert run("one") == run("two")
