import csv
import json

import pytest
from hypothesis import given, strategies as st

from ptspec import cli, shooting
from ptspec.asymcoeff import PotentialSpec
from ptspec.classifier import RealityVerdict, Verdict


def write_job(tmp_path, job, name="job.json"):
    p = tmp_path / name
    p.write_text(json.dumps(job) if not isinstance(job, str) else job)
    return str(p)


def test_solve_csv(tmp_path):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3, "command": "solve", "n_range": [0, 9]})
    out = tmp_path / "out"
    assert cli.main(["--input", inp, "--out", str(out), "--format", "csv"]) == 0
    rows = list(csv.DictReader(open(out / "solve.csv")))
    assert len(rows) == 10
    assert [int(r["n"]) for r in rows] == list(range(10))
    assert all(abs(float(r["im_lam"])) < 1e-6 for r in rows)
    assert float(rows[0]["re_lam"]) == pytest.approx(1.15627, rel=1e-5)


def test_classify_json(tmp_path):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 3], [-2, 0], [0, 0]]})
    assert cli.main(["classify", "--input", inp, "--out", str(tmp_path)]) == 0
    res = json.load(open(tmp_path / "classify.json"))
    assert res["verdict"] == "TRANSLATED_PT"
    assert res["z0"] == pytest.approx([1.0, 0.0])


def test_bad_range_writes_nothing(tmp_path, capsys):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3})
    out = tmp_path / "out"
    assert cli.main(["predict", "--input", inp, "--out", str(out), "--nmin", "5", "--nmax", "2"]) == 1
    assert not out.exists()
    assert "n_range" in capsys.readouterr().err


def test_unknown_field_rejected(tmp_path, capsys):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3, "tol": {"rael": 1e-6}})
    assert cli.main(["coeffs", "--input", inp, "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "field tol" in err and "rael" in err


def test_wrong_coefficient_count(tmp_path, capsys):
    inp = write_job(tmp_path, {"m": 4, "a": [[0, 0]] * 3})
    assert cli.main(["coeffs", "--input", inp]) == 1
    assert "field a" in capsys.readouterr().err


def test_malformed_json_position(tmp_path, capsys):
    inp = write_job(tmp_path, '{"m": 3,\n "a": [[0, 0],]\n}')
    assert cli.main(["coeffs", "--input", inp]) == 1
    assert "line 2 column" in capsys.readouterr().err


def test_missing_command(tmp_path):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3})
    assert cli.main(["--input", inp]) == 1


def test_schema_flag(capsys):
    assert cli.main(["--schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert schema["additionalProperties"] is False


def test_coeffs_deterministic(tmp_path):
    inp = write_job(tmp_path, {"m": 4, "a": [[0.1, 0.2], [1, 0], [0, -1], [2, 2]]})
    texts = []
    for d in ("a", "b"):
        assert cli.main(["coeffs", "--input", inp, "--out", str(tmp_path / d)]) == 0
        texts.append((tmp_path / d / "coeffs.json").read_bytes())
    assert texts[0] == texts[1]
    assert json.loads(texts[0])["status"] == "ok"


def test_predict_tables(tmp_path):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3, "n_range": [0, 4]})
    assert cli.main(["predict", "--input", inp, "--out", str(tmp_path), "--format", "csv"]) == 0
    rows = list(csv.DictReader(open(tmp_path / "predict.csv")))
    assert len(rows) == 5
    assert (tmp_path / "predict_d.csv").exists()


def test_partial_results_exit_2(tmp_path, monkeypatch):
    real = shooting.spectrum

    def gappy(spec, n_min, n_max, *args, **kw):
        recs = real(spec, n_min, 2)
        raise shooting.SpectrumGap("indices [3] unresolved", recs, [3])

    monkeypatch.setattr(shooting, "spectrum", gappy)
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3, "n_range": [0, 3]})
    assert cli.main(["solve", "--input", inp, "--out", str(tmp_path)]) == 2
    res = json.load(open(tmp_path / "solve.json"))
    assert res["status"] == "partial"
    assert [e["status"] for e in res["eigenvalues"]] == ["ok"] * 3 + ["not_converged"]
    assert res["eigenvalues"][3]["lam"] == [None, None]


def test_invariant_violation_exit_3(tmp_path, monkeypatch):
    bad = RealityVerdict(Verdict.PT, 1j, (0j, 1j, 0j), 1e-10)
    monkeypatch.setattr(cli.classifier, "classify_reality", lambda spec, tol=None: bad)
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3})
    assert cli.main(["classify", "--input", inp, "--out", str(tmp_path)]) == 3
    assert not (tmp_path / "classify.json").exists()


def test_verify_table(tmp_path):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3, "n_range": [6, 10]})
    assert cli.main(["verify", "--input", inp, "--out", str(tmp_path)]) == 0
    res = json.load(open(tmp_path / "verify.json"))
    gaps = [r["gap_quantization"] for r in res["rows"]]
    assert all(g < 1e-2 for g in gaps)
    assert res["fit"]["slope_gap_quantization"] < 0


def test_sweep_reports_pair(tmp_path):
    job = {"m": 3, "a": [[0, 0]] * 3, "n_range": [0, 1],
           "sweep": {"a_to": [[0, 0], [3, 0], [0, 0]], "steps": 12}}
    inp = write_job(tmp_path, job)
    assert cli.main(["sweep", "--input", inp, "--out", str(tmp_path), "--format", "csv"]) == 0
    deps = list(csv.DictReader(open(tmp_path / "sweep_departures.csv")))
    assert [d["kind"] for d in deps] == ["conjugate_pair"]
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert {r["n"] for r in rows} == {"0", "1"}


def test_sweep_requires_target(tmp_path):
    inp = write_job(tmp_path, {"m": 3, "a": [[0, 0]] * 3})
    assert cli.main(["sweep", "--input", inp]) == 1


@given(st.integers(3, 8).flatmap(lambda m: st.lists(
    st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=m, max_size=m)))
def test_spec_round_trip(a):
    spec = PotentialSpec(len(a), tuple(complex(x, y) for x, y in a))
    text = json.dumps(cli.spec_to_json(spec))
    assert cli.spec_from_json(json.loads(text)) == spec
