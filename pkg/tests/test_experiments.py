import csv
import filecmp

import numpy as np
import pytest

from sparsetfd.errors import InvalidArgument
from sparsetfd.experiments import (
    FAIL_MSE,
    ExperimentConfig,
    agreement,
    evaluate,
    example2_pipelines,
    run_experiment,
)
from sparsetfd.ifest import IFTrack, IFTruth
from sparsetfd.io import save_signal
from sparsetfd.signals import PhaseSpec, gen_fm_signal
from sparsetfd.tfd import TFKind, TFMatrix


def manifest(path):
    lines = (path / "manifest.txt").read_text().splitlines()
    return dict(line.split("=", 1) for line in lines)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def tone_file(tmp_path):
    N = 64
    spec = PhaseSpec(((1.0, "linear", 2 * np.pi * 0.125),), 0.0, float(N))
    path = tmp_path / "tone.txt"
    save_signal(gen_fm_signal(spec, N, sample_rate=1.0), path)
    return path


def test_config_validation():
    with pytest.raises(InvalidArgument):
        ExperimentConfig(experiment="table2")
    with pytest.raises(InvalidArgument):
        ExperimentConfig(experiment="custom")
    with pytest.raises(InvalidArgument):
        ExperimentConfig(mask_side=10)
    with pytest.raises(InvalidArgument):
        ExperimentConfig(seeds=())


def test_example1_artifacts_and_determinism(tmp_path):
    cfg = ExperimentConfig("example1", N=64, mask_side=15, seeds=(0, 1))
    a = run_experiment(cfg.replace(output_dir=str(tmp_path / "a")))
    b = run_experiment(cfg.replace(output_dir=str(tmp_path / "b")))
    assert a == b
    m = manifest(tmp_path / "a")
    assert m["files"].split() == a[:-1]
    for name in a:
        assert (tmp_path / "a" / name).exists()
        if name.endswith((".csv", ".pgm", ".txt")):
            assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)
    assert {"seeds", "solver.lambda_rel", "branch_flag_density", "trim.Q"} <= set(m)
    assert "CS_15x15_60pct_seed1.iterations" in m
    names = [r["distribution"] for r in rows(tmp_path / "a" / "mse_summary.csv")]
    assert names[:5] == ["WD", "Cohen_delta120", "Cohen_delta80", "Cohen_delta20",
                         "CTD4_direct"]
    assert "CTD4_via_ambiguity" in names and names.count("CTD4+CS") == 2


def test_example2_without_noise(tmp_path):
    res = example2_pipelines(N=64, S=15, impulses=0)
    clean, noisy = res["clean"], res["noisy"]
    np.testing.assert_array_equal(clean[0].values, noisy[0].values)
    assert res["noisy_agreement"] == 1.0
    cfg = ExperimentConfig("example2", N=64, mask_side=15, fraction=0.5, noise=False,
                           output_dir=str(tmp_path))
    run_experiment(cfg)
    assert filecmp.cmp(tmp_path / "CS_clean_seed0.csv", tmp_path / "CS_noisy_seed0.csv",
                       shallow=False)
    assert filecmp.cmp(tmp_path / "CS_clean_seed0_if.csv", tmp_path / "CS_noisy_seed0_if.csv",
                       shallow=False)


def test_custom_pure_tone(tone_file, tmp_path):
    out = tmp_path / "run"
    files = run_experiment(ExperimentConfig("custom", input_path=str(tone_file), mask_side=9,
                                            output_dir=str(out)))
    assert "CTD4_direct_if.csv" in files
    for name in ("CTD4_direct_if.csv", "CS_9x9_60pct_seed0_if.csv"):
        track = [r["track0_bin"] for r in rows(out / name)]
        assert set(track) == {"8"}
    summary = rows(out / "mse_summary.csv")
    assert all(r["mse_c1"] == "" and r["failed"] == "0" for r in summary)
    assert manifest(out)["N"] == "64"


def test_custom_length_check(tone_file, tmp_path):
    with pytest.raises(InvalidArgument):
        run_experiment(ExperimentConfig("custom", N=90, input_path=str(tone_file),
                                        output_dir=str(tmp_path)))


def test_evaluate_failure_rules():
    nf = 32
    truth = IFTruth(np.full((1, nf), 4 / nf))
    tf = np.zeros((nf, nf))
    tf[:, 4] = 1
    good = evaluate(TFMatrix(tf, np.arange(nf) / nf, TFKind.SPARSE), truth, 1)
    assert not good.failed and good.mse == (0.0,)
    far = np.zeros((nf, nf))
    far[:, 20] = 1
    bad = evaluate(TFMatrix(far, np.arange(nf) / nf, TFKind.SPARSE), IFTruth(np.full(nf, 0.0)), 1)
    assert bad.mse[0] <= FAIL_MSE and not bad.failed
    empty = evaluate(TFMatrix(np.zeros((nf, nf)), np.arange(nf) / nf, TFKind.SPARSE), truth, 1)
    assert empty.failed and empty.tracks is None


def test_agreement():
    axis = np.arange(40) / 40
    a = IFTrack(np.full(40, 10), np.ones(40, bool), 0, axis)
    b = IFTrack(np.r_[np.full(20, 11), np.full(20, 14)], np.ones(40, bool), 0, axis)
    assert agreement(a, a) == 1.0
    assert agreement(a, b) == pytest.approx(16 / 32)
