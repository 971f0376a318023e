import io
import json

import numpy as np
import pytest

from apca import encode, pca_fit
from apca.cli import main, parse_grid, UsageError
from apca.io import load_model, load_result, read_dataset


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def cohort(tmp_path):
    path = tmp_path / "cohort.csv"
    assert run("gen", "--preset", "confounded", "--n", 120, "--seed", 3, "-o", path)[0] == 0
    return path


def test_gen_shape(tmp_path):
    path = tmp_path / "d.csv"
    code, _ = run("gen", "--n", 62, "--d-primary", 36, "--d-concomitant", 3, "-o", path)
    assert code == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + 62
    assert all(len(line.split(",")) == 36 + 3 + 2 for line in lines)
    sidecar = json.loads((tmp_path / "d.csv.json").read_text())
    assert sidecar["spec"]["n_samples"] == 62


def test_gen_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("gen", "--preset", "confounded", "--seed", 7, "-o", a)
    run("gen", "--preset", "confounded", "--seed", 7, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.json").read_bytes() == (tmp_path / "b.csv.json").read_bytes()


def test_gen_rejects_zero_noise(tmp_path):
    code, _ = run("gen", "--noise-sigma", 0, "-o", tmp_path / "d.csv")
    assert code == 1
    assert not (tmp_path / "d.csv").exists()


def test_fit_prints_terms_and_transform_round_trip(tmp_path, cohort):
    model_path, factors_path = tmp_path / "m.json", tmp_path / "s.csv"
    code, text = run("fit", cohort, "--mu", 2, "--factors", 2, "-o", model_path)
    assert code == 0
    assert "objective" in text and "adversary_term" in text and "eigenvalues" in text
    assert run("transform", model_path, cohort, "-o", factors_path)[0] == 0
    S = np.loadtxt(factors_path, delimiter=",", skiprows=1).T
    expected = encode(load_model(model_path), read_dataset(cohort))
    np.testing.assert_allclose(S, expected, atol=1e-12, rtol=0)


def test_fit_mu_zero_matches_pca(tmp_path, cohort):
    code, text = run("fit", cohort, "--mu", 0, "--factors", 2, "-o", tmp_path / "m.json")
    primary = float(text.splitlines()[1].split()[1])
    X = read_dataset(cohort).primary
    ref = np.sum((X - pca_fit(X, 2).reconstruct(X)) ** 2)
    assert abs(primary - ref) <= 1e-6 * ref


def test_fit_without_labels(tmp_path):
    path = tmp_path / "d.csv"
    rng = np.random.default_rng(0)
    rows = ["primary:a,primary:b,primary:c,concomitant:y"]
    rows += [",".join(repr(float(v)) for v in r) for r in rng.standard_normal((30, 4))]
    path.write_text("\n".join(rows) + "\n")
    assert run("fit", path, "--mu", 1, "--factors", 2, "-o", tmp_path / "m.json")[0] == 0


def test_fit_parse_error_exit_code(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("primary:a,concomitant:b\n1,2\nfoo,3\n")
    assert run("fit", path, "--mu", 1, "--factors", 1, "-o", tmp_path / "m.json")[0] == 2


def test_fit_singular_gram_without_ridge_is_numeric_failure(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("primary:a,primary:b,concomitant:y\n1,2,0\n2,4,0\n3,6,0\n")
    code, _ = run("fit", path, "--mu", 1, "--factors", 1, "--ridge", 0, "-o", tmp_path / "m.json")
    assert code == 3


def test_fit_invalid_factor_count_is_usage_error(tmp_path, cohort):
    assert run("fit", cohort, "--mu", 1, "--factors", 9, "-o", tmp_path / "m.json")[0] == 1


def test_evaluate_none_skips_k_and_mu(cohort):
    code, text = run("evaluate", cohort, "--preprocessing", "none", "--c-grid", "0.1,1,10")
    assert code == 0
    header = text.splitlines()[0].split()
    assert "k" not in header and "mu" not in header
    assert "features" in text and "AUC" in text


def test_evaluate_reports_component_count(cohort):
    code, text = run("evaluate", cohort, "--preprocessing", "apca", "--c-grid", "1",
                     "--mu-grid", "0,5")
    header = text.splitlines()[0]
    assert code == 0 and " k " in f" {header} " and "mu" in header


def test_evaluate_invalid_preprocessing(cohort):
    with pytest.raises(SystemExit) as exc:
        run("evaluate", cohort, "--preprocessing", "ica")
    assert exc.value.code != 0


def test_sweep_default_grid_has_201_rows(tmp_path):
    data = tmp_path / "d.csv"
    run("gen", "--n", 40, "--seed", 1, "-o", data)
    out = tmp_path / "r.json"
    code, _ = run("sweep", data, "--experiment", "confound", "--c-grid", "1", "-o", out)
    assert code == 0
    result, _ = load_result(out)
    assert len(result.records) == 201
    assert result.records[-1].mu == 20.0 and result.records[1].mu == 0.1


def test_sweep_mu_zero_row_equals_pca_evaluation(tmp_path, cohort):
    out, report = tmp_path / "r.json", tmp_path / "e.json"
    run("sweep", cohort, "--experiment", "confound", "--mu-grid", "0", "-o", out)
    run("evaluate", cohort, "--preprocessing", "pca", "-o", report)
    row = load_result(out)[0].records[0]
    ev = json.loads(report.read_text())["target"]
    assert abs(row.auc_target - ev["best_auc"]) <= 1e-6
    assert (row.best_k, row.best_c) == (ev["best_k"], ev["best_c"])


def test_sweep_emits_curves(tmp_path, cohort):
    curves = tmp_path / "c.csv"
    run("sweep", cohort, "--experiment", "confound", "--mu-grid", "0:2:1", "--c-grid", "1",
        "--emit-curves", curves, "-o", tmp_path / "r.json")
    lines = curves.read_text().splitlines()
    assert lines[0] == "mu,series,value" and len(lines) == 1 + 5 * 3


def test_sweep_missing_labels_is_data_error(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("primary:a,concomitant:b,label:target\n1,2,0\n2,1,1\n3,3,0\n4,0,1\n")
    code, _ = run("sweep", path, "--experiment", "confound", "-o", tmp_path / "r.json")
    assert code == 2


def test_multimodal_sweep_prints_comparison(tmp_path):
    data = tmp_path / "m.csv"
    run("gen", "--preset", "multimodal", "--n", 60, "--d-primary", 6, "-o", data)
    code, text = run("sweep", data, "--experiment", "multimodal", "--mu-grid", "0,10",
                     "--c-grid", "1", "-o", tmp_path / "r.json")
    assert code == 0 and "# of features" in text
    assert load_result(tmp_path / "r.json")[1] is not None


def test_oracle_command(cohort):
    code, text = run("oracle", cohort, "--mu", 2, "--factors", 2)
    assert code == 0
    gap = float([l for l in text.splitlines() if l.startswith("relative_gap")][0].split()[1])
    assert abs(gap) < 1e-3


def test_parse_grid():
    assert parse_grid("0:1:0.5") == (0.0, 0.5, 1.0)
    assert len(parse_grid("0:20:0.1")) == 201
    assert parse_grid("1,2,3", int) == (1, 2, 3)
    with pytest.raises(UsageError):
        parse_grid("a:b")
    with pytest.raises(UsageError):
        parse_grid("1.5", int)


def _all_commands(d):
    data, multi = d / "d.csv", d / "m.csv"
    return [
        ("gen", "--preset", "confounded", "--n", 80, "--seed", 5, "-o", data),
        ("gen", "--preset", "multimodal", "--n", 60, "--d-primary", 5, "--seed", 5, "-o", multi),
        ("fit", data, "--mu", 3, "--factors", 2, "-o", d / "m.json"),
        ("transform", d / "m.json", data, "-o", d / "s.csv"),
        ("sweep", data, "--experiment", "confound", "--mu-grid", "0,4", "--c-grid", "1,10",
         "--emit-curves", d / "c.csv", "-o", d / "r.json"),
        ("sweep", multi, "--experiment", "multimodal", "--mu-grid", "0,4", "--c-grid", "1",
         "-o", d / "r2.json"),
        ("evaluate", data, "--preprocessing", "apca", "--mu-grid", "0,4", "--c-grid", "1",
         "-o", d / "e.json"),
        ("oracle", data, "--mu", 3, "--factors", 2),
    ]


def test_every_command_is_deterministic(tmp_path):
    runs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        stdout = [run(*cmd)[1].replace(str(d), "<dir>") for cmd in _all_commands(d)]
        files = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
        runs.append((stdout, files))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1].keys() == runs[1][1].keys() and len(runs[0][1]) == 10
    for name in runs[0][1]:
        assert runs[0][1][name] == runs[1][1][name], name
