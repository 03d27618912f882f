import csv

import numpy as np
import pytest

from mtv.cli import main
from mtv.experiments import synthetic_image
from mtv.io import load_image, save_image


@pytest.fixture
def image(tmp_path):
    p = tmp_path / "in.pgm"
    save_image(synthetic_image(5, 32), p)
    return p


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_denoise_writes_image_and_report(tmp_path, image):
    out = tmp_path / "out.png"
    assert main(["denoise", "--input", str(image), "--output", str(out), "--lambda", "0.05", "--theta", "0.5", "--sigma", "0.1"]) == 0
    assert load_image(out).shape == (32, 32)
    r = rows(tmp_path / "out.csv")
    assert len(r) == 1 and float(r[0]["lambda"]) == 0.05


def test_denoise_lambda_zero_returns_input(tmp_path, image):
    out = tmp_path / "out.pgm"
    assert main(["denoise", "--input", str(image), "--output", str(out), "--lambda", "0"]) == 0
    np.testing.assert_array_equal(load_image(out).values, load_image(image).values)


def test_denoise_theta_zero(tmp_path, image):
    out = tmp_path / "tv.pgm"
    assert main(["denoise", "--input", str(image), "--output", str(out), "--lambda", "0.05", "--theta", "0"]) == 0


def test_denoise_deterministic(tmp_path, image):
    args = ["denoise", "--input", str(image), "--lambda", "0.05", "--sigma", "0.1", "--seed", "4"]
    main(args + ["--output", str(tmp_path / "a.pgm")])
    main(args + ["--output", str(tmp_path / "b.pgm")])
    assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()


def test_denoise_nonconvergence_exit_code(tmp_path, image):
    out = tmp_path / "o.pgm"
    code = main(["denoise", "--input", str(image), "--output", str(out), "--lambda", "0.1", "--max-iter", "3", "--tol", "1e-15"])
    assert code == 2 and out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["denoise", "--input", "x.pgm", "--output", "o.pgm", "--lambda", "-1"],
        ["denoise", "--input", "missing.pgm", "--output", "o.pgm", "--lambda", "0.1"],
        ["denoise", "--input", "x.pgm", "--output", "o.pgm", "--lambda", "abc"],
        ["denoise", "--output", "o.pgm", "--lambda", "0.1"],
        ["sweep", "--output", "s.csv", "--theta-grid", ""],
        ["sweep", "--output", "s.csv", "--theta-grid", "1.5"],
        ["bench", "--output", "b.csv", "--data-dir", "no/such/dir"],
        ["nonsense"],
    ],
)
def test_bad_flags_exit_1(tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 1


def test_verify_passes_and_fault_fails(capsys):
    assert main(["verify", "--seed", "1"]) == 0
    assert "FAIL" not in capsys.readouterr().out
    assert main(["verify", "--inject-fault"]) != 0


def test_sweep_rows(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--output", str(out), "--theta-grid", "0,1", "--lambda-grid", "0.05,0.1,0.2"]) == 0
    assert len(rows(out)) == 6
    assert main(["sweep", "--output", str(out), "--theta-grid", "0.5", "--lambda-grid", "0.1"]) == 0
    assert len(rows(out)) == 1


def test_refine_single_level(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["refine", "--output", str(out), "--crop", "8", "--levels", "3"]) == 0
    assert len(rows(out)) == 1


def test_refine_rejects_coarse_level(tmp_path):
    assert main(["refine", "--output", str(tmp_path / "r.csv"), "--crop", "8", "--levels", "2"]) == 1


def test_bench_empty_dir(tmp_path):
    (tmp_path / "d").mkdir()
    assert main(["bench", "--output", str(tmp_path / "b.csv"), "--data-dir", str(tmp_path / "d")]) == 1


def test_bench_env_dir(tmp_path, monkeypatch):
    d = tmp_path / "data"
    d.mkdir()
    save_image(synthetic_image(1, 16), d / "one.png")
    monkeypatch.setenv("MTV_DATA_DIR", str(d))
    out = tmp_path / "b.csv"
    code = main(["bench", "--output", str(out), "--sigma", "0.1", "--mode", "fixed", "--lambda", "0.1", "--theta", "0.5"])
    assert code == 0
    r = rows(out)
    assert [x["image_id"] for x in r] == ["one:tv", "one:mtv"]
