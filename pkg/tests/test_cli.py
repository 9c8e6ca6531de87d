from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import pytest

from selfsim.catalog import builtin, generators_equal, parse_presentation
from selfsim.cli import ExperimentConfig, cmd_walk, parse_config, parse_measure, run
from selfsim.errors import ConfigError

SQRT2_MEASURE = (
    "a=-1/2+1/2*sqrt(2), a^-1=-1/2+1/2*sqrt(2), b=1-1/2*sqrt(2), b^-1=1-1/2*sqrt(2)"
)


def call(capsys, *argv):
    rc = run(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_expand_adding_machine(capsys):
    rc, out, _ = call(capsys, "expand", "--presentation", "adding-machine", "--generator", "a", "--level", "2")
    assert rc == 0
    assert "array: 2 3 1 0" in out
    assert "([00][10][01][11])" in out
    assert "matrix: 0 1; a 0" in out


def test_expand_identity_and_csv(capsys):
    rc, out, _ = call(capsys, "expand", "--presentation", "basilica", "--generator", "e", "--level", "3", "--format", "json")
    assert rc == 0
    assert json.loads(out)["results"]["permutation"] == list(range(8))


def test_expand_basilica_b_level_3_matches_oracle(capsys):
    import oracles

    rc, out, _ = call(capsys, "expand", "--presentation", "basilica", "--generator", "b", "--level", "3", "--format", "json")
    perm = json.loads(out)["results"]["permutation"]
    assert perm == list(oracles.level_images(oracles.BASILICA, (("b", 1),), 2, 3))


def test_schur_sqrt2_verdict(capsys):
    rc, out, _ = call(
        capsys, "schur", "--presentation", "basilica", "--field", "quadratic:2", "--measure", SQRT2_MEASURE, "--format", "json"
    )
    assert rc == 0
    res = json.loads(out)["results"]
    assert res["self_similar"] and res["coefficient"] == "1/2*sqrt(2)"
    assert math.isclose(float(res["coefficient_float"]), math.sqrt(2) / 2, rel_tol=1e-15)


def test_schur_quarter_weights_not_self_similar(capsys):
    rc, out, _ = call(capsys, "schur", "--presentation", "basilica", "--measure", "uniform", "--format", "json")
    res = json.loads(out)["results"]
    assert rc == 0 and res["self_similar"] is False and res["path"] == "schur-complement"


def test_schur_mother_group_uses_row_projection(capsys):
    rc, out, _ = call(capsys, "schur", "--presentation", "mother-2", "--measure", "mA*mB", "--format", "json")
    doc = json.loads(out)
    assert rc == 0
    assert doc["results"]["path"] == "row-projection"
    assert doc["results"]["projection_equals_family_mixture"] is True
    assert {r[0]: r[1] for r in doc["rows"]} == {"e": "1/2", "(01)": "1/4", "B(();(01))": "1/4"}


def test_growth_csv(capsys):
    rc, out, _ = call(capsys, "growth", "--presentation", "adding-machine", "--N", "6")
    table = rows(out)
    assert table[0] == ["n", "ball_size", "ratio", "log_growth"]
    assert [int(r[1]) for r in table[1:]] == [2 * n + 1 for n in range(7)]


def test_entropy_csv_starts_at_zero(capsys):
    rc, out, _ = call(capsys, "entropy", "--presentation", "basilica", "--N", "3")
    table = rows(out)
    assert rc == 0 and float(table[1][2]) == 0.0 and len(table) == 5


def test_folner_intervals(capsys):
    rc, out, _ = call(capsys, "folner", "--presentation", "adding-machine", "--sets", "intervals", "--N", "5")
    assert rc == 0
    for r in rows(out)[2:]:
        n = int(r[0])
        assert Fraction(r[3]) == Fraction(2, n + 1) == Fraction(r[5])


def _without_timing(text):
    doc = json.loads(text)
    doc.pop("timing")
    return json.dumps(doc, sort_keys=True)


def test_walk_report_is_byte_identical(capsys):
    args = ("walk", "--presentation", "basilica", "--n", "25", "--seed", "9")
    assert call(capsys, *args)[1] == call(capsys, *args)[1]
    first = call(capsys, *args, "--format", "json")[1]
    second = call(capsys, *args, "--format", "json")[1]
    assert _without_timing(first) == _without_timing(second)
    assert json.loads(first)["metadata"]["rng"] == "numpy.random.Philox"
    other = call(capsys, "walk", "--presentation", "basilica", "--n", "25", "--seed", "10")[1]
    assert other != call(capsys, *args)[1]


def test_walk_endpoints_report(tmp_path):
    cfg = ExperimentConfig(presentation="basilica", n=3, samples=2000, seed=1)
    rep = cmd_walk(cfg)
    assert rep.results["exact_atoms"] == 40
    assert sum(r[1] for r in rep.rows) == 2000
    assert rep.payload() == cmd_walk(cfg).payload()


def test_export_round_trip(tmp_path, capsys):
    out = tmp_path / "g.txt"
    rc, _, _ = call(capsys, "export", "--presentation", "grigorchuk", "--out", str(out))
    assert rc == 0
    assert generators_equal(parse_presentation(out.read_text()), builtin("grigorchuk"))
    rc, text, _ = call(capsys, "growth", "--presentation", str(out), "--N", "3")
    assert [int(r[1]) for r in rows(text)[1:]] == [1, 5, 11, 23]


def test_out_file_and_config_file(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# growth run\npresentation: adding-machine\nN: 4\nformat: json\n")
    out = tmp_path / "res" / "growth.json"
    rc, _, _ = call(capsys, "growth", "--config", str(conf), "--out", str(out))
    assert rc == 0
    assert json.loads(out.read_text())["results"]["sizes"] == [1, 3, 5, 7, 9]
    # command-line flags win over the file
    rc, text, _ = call(capsys, "growth", "--config", str(conf), "--N", "1")
    assert json.loads(text)["results"]["sizes"] == [1, 3]


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("presentation: basilica\nN: many\n", 2, 4),
        ("seed: 1\n\n  cap: -3\n", 3, 8),
        ("field: quadratic:4\n", 1, 8),
        ("bogus: 1\n", 1, 1),
        ("presentation basilica\n", 1, 1),
        ("epsilon: 2\n", 1, 10),
    ],
)
def test_config_errors_are_positioned(text, line, column):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_measure_spec_errors():
    P = builtin("basilica")
    for bad in ["a=1/2", "a=1/2, z=1/2", "a=1/2, b=-1/2, b^-1=1", "a", "a=sqrt(2)"]:
        with pytest.raises(ConfigError):
            parse_measure(bad, P)
    with pytest.raises(ConfigError):
        parse_measure("mA", P)
    assert parse_measure("a=1/2, a*a^-1=1/2", P)[P.identity] == Fraction(1, 2)


def test_exit_codes(tmp_path, capsys, monkeypatch):
    rc, _, err = call(capsys, "growth", "--presentation", "lamplighter")
    assert rc == 2 and "basilica" in err
    rc, _, _ = call(capsys, "growth", "--presentation", "grigorchuk", "--N", "8", "--cap", "50")
    assert rc == 3
    rc, _, err = call(capsys, "schur", "--presentation", "basilica", "--measure", "a=1")
    assert rc == 4 and "spectral radius" in err
    rc, _, _ = call(capsys, "schur", "--presentation", "basilica", "--measure", "a=1/2, a^-1=1/2", "--n", "x")
    assert rc == 2
    monkeypatch.setenv("SELFSIM_CAP", "nope")
    rc, _, _ = call(capsys, "growth")
    assert rc == 2
    monkeypatch.setenv("SELFSIM_CAP", "30")
    rc, _, _ = call(capsys, "growth", "--presentation", "grigorchuk", "--N", "8")
    assert rc == 3


def test_unknown_letter_exit_code(capsys):
    rc, _, err = call(capsys, "schur", "--presentation", "basilica", "--measure", "uniform", "--letter", "9")
    assert rc == 2
