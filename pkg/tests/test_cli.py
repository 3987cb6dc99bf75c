import numpy as np
import pytest

from wavenets import checkpoint, raster
from wavenets.cli import main
from wavenets.nn import ModelConfig, build_classifier
from wavenets.nn.serialize import save_network


@pytest.fixture
def checker(tmp_path):
    img = np.indices((8, 8)).sum(axis=0) % 2 * 1.0
    p = tmp_path / "checker.pgm"
    raster.write_pgm(p, img, plain=True)
    return p


def _summary(text):
    return dict(line.split(" ", 1) for line in text.strip().splitlines())


def test_dwt_constant_image(tmp_path, capsys):
    p = tmp_path / "flat.pgm"
    raster.write_pgm(p, np.full((6, 6), 0.5))
    assert main(["dwt", str(p), "--out", str(tmp_path / "o")]) == 0
    s = _summary(capsys.readouterr().out)
    for band in "vhd":
        assert float(s[f"energy_{band}"]) == 0.0
    for name in ("a.pgm", "v.pgm", "h.pgm", "d.pgm", "subbands.wvnc", "summary.txt"):
        assert (tmp_path / "o" / name).exists()


def test_dwt_checkerboard_diagonal_dominates(checker, tmp_path, capsys):
    assert main(["dwt", str(checker), "--out", str(tmp_path / "o")]) == 0
    s = _summary(capsys.readouterr().out)
    # each 2x2 block is [[0,1],[1,0]]: diagonal coefficient -1, approximation 1, others 0
    assert float(s["energy_d"]) == pytest.approx(16.0)
    assert float(s["energy_a"]) == pytest.approx(16.0)
    assert float(s["energy_v"]) == pytest.approx(0.0, abs=1e-20)
    assert float(s["energy_h"]) == pytest.approx(0.0, abs=1e-20)


def test_dwt_paths_write_identical_files(tmp_path, capsys):
    img = np.random.default_rng(0).random((16, 12))
    p = tmp_path / "r.pgm"
    raster.write_pgm(p, img)
    assert main(["dwt", str(p), "--path", "matmul", "--out", str(tmp_path / "m")]) == 0
    assert main(["dwt", str(p), "--path", "conv", "--out", str(tmp_path / "c")]) == 0
    for name in ("a.pgm", "v.pgm", "h.pgm", "d.pgm"):
        assert (tmp_path / "m" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    m = checkpoint.load(tmp_path / "m" / "subbands.wvnc")
    c = checkpoint.load(tmp_path / "c" / "subbands.wvnc")
    for k in m:
        np.testing.assert_allclose(m[k], c[k], atol=1e-12)


def test_dwt_user_errors(tmp_path, capsys):
    assert main(["dwt", str(tmp_path / "missing.pgm")]) == 1
    assert "error" in capsys.readouterr().err
    p = tmp_path / "r.pgm"
    raster.write_pgm(p, np.random.default_rng(0).random((8, 8)))
    assert main(["dwt", str(p), "--bank", "random", "--path", "matmul", "--out", str(tmp_path / "x")]) == 1


def test_pgm_round_trip(tmp_path):
    img = np.random.default_rng(1).integers(0, 256, (5, 7)) / 255.0
    for plain in (True, False):
        p = tmp_path / f"i{plain}.pgm"
        img[0, 0], img[0, 1] = 0.0, 1.0
        raster.write_pgm(p, img, plain=plain)
        np.testing.assert_allclose(raster.read_pgm(p), img, atol=1e-12)


def test_filters_export_import_and_verify_fault(tmp_path, capsys):
    out = tmp_path / "banks.wvnc"
    assert main(["filters", "--seed", "3", "--d", "3", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.count("max|G-I|") == 8
    assert main(["filters", "--import", str(out)]) == 0
    assert capsys.readouterr().out == text
    assert main(["verify", "--quick", "--seeds", "5", "--filters", str(out)]) == 0
    assert "8/8 checks passed" in capsys.readouterr().out
    entries = checkpoint.load(out)
    entries["filters.extra2"] = entries["filters.extra2"] * 1.5
    bad = tmp_path / "bad.wvnc"
    checkpoint.save(bad, entries)
    assert main(["verify", "--quick", "--seeds", "5", "--filters", str(bad)]) == 2
    assert "[FAIL] orthonormality" in capsys.readouterr().out


def test_verify_seed_sweep(capsys):
    assert main(["verify", "--quick", "--seeds", "3"]) == 0
    out = capsys.readouterr().out
    assert "3 seeds x d in (2, 3, 4, 5)" in out


def test_eval_untrained_is_chance(tmp_path, capsys):
    net = build_classifier(ModelConfig(squeeze_mode="gap", seed=5))
    ck = tmp_path / "untrained.wvnc"
    save_network(ck, net)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_samples = 400\nsqueeze_mode = gap\n")
    assert main(["eval", str(ck), "--config", str(cfg)]) == 0
    acc = float(capsys.readouterr().out.split()[1])
    assert 0.15 <= acc <= 0.35


def test_eval_refuses_corrupt_checkpoint(tmp_path, capsys):
    ck = tmp_path / "m.wvnc"
    save_network(ck, build_classifier(ModelConfig(squeeze_mode="gap")))
    raw = bytearray(ck.read_bytes())
    raw[100] ^= 0x10
    ck.write_bytes(bytes(raw))
    assert main(["eval", str(ck)]) == 1
    assert "CRC" in capsys.readouterr().err


def test_train_then_eval_short(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("epochs = 2\nn_samples = 200\nsqueeze_mode = wavenet\n")
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "model.wvnc").exists() and (out / "metrics.csv").exists()
    assert "squeeze_mode = wavenet" in (out / "run.cfg").read_text()
    capsys.readouterr()
    assert main(["eval", str(out / "model.wvnc"), "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("accuracy ")


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("epochs = 2\nwhat = 1\n")
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "line 2" in capsys.readouterr().err


def test_bench_runs(capsys, monkeypatch):
    monkeypatch.setenv("WAVENET_THREADS", "1")
    assert main(["bench", "--sizes", "8", "--repeat", "1"]) == 0
    out = capsys.readouterr().out
    assert "wavenet_c overhead vs gap" in out and "im2col" in out
