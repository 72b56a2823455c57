import json

import numpy as np
import pytest

from evckit.bundle import load_bundle
from evckit.cli import main
from evckit.units import load_codebook, load_units, save_features, save_units

from conftest import SR, write_tone_wav


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExtract:
    def test_tone_bundle(self, tmp_path, capsys):
        wav = write_tone_wav(tmp_path / "tone.wav", 220.0)
        out = tmp_path / "tone.json"
        code, stdout, _ = run(capsys, "extract", wav, "--out", out)
        assert code == 0
        bundle = load_bundle(out)
        assert bundle.vuv.mean() >= 0.95
        voiced = bundle.f0[bundle.vuv.astype(bool)]
        assert 218.0 <= np.median(voiced) <= 222.0
        summary = json.loads(stdout.strip())
        assert summary["frames"] == bundle.n_frames

    def test_silence_all_unvoiced(self, tmp_path, capsys):
        from evckit.signal_io import Waveform, save_wav

        wav = tmp_path / "sil.wav"
        save_wav(wav, Waveform(np.zeros(SR), SR))
        out = tmp_path / "sil.json"
        code, _, _ = run(capsys, "extract", wav, "--out", out)
        assert code == 0
        bundle = load_bundle(out)
        assert bundle.vuv.sum() == 0
        assert np.all(bundle.f0 == 0.0)

    def test_missing_file_exits_2(self, tmp_path, capsys):
        out = tmp_path / "x.json"
        code, _, stderr = run(capsys, "extract", tmp_path / "nope.wav", "--out", out)
        assert code == 2
        assert not out.exists()
        assert "error" in stderr

    def test_sample_rate_mismatch_exits_2(self, tmp_path, capsys):
        wav = write_tone_wav(tmp_path / "t8k.wav", 220.0, sr=8000)
        code, _, stderr = run(capsys, "extract", wav, "--out", tmp_path / "x.json")
        assert code == 2
        assert "sample rate" in stderr

    def test_multiple_wavs_to_dir(self, tmp_path, capsys):
        wavs = [write_tone_wav(tmp_path / f"t{i}.wav", 150.0 + 50 * i) for i in range(3)]
        out_dir = tmp_path / "bundles"
        code, stdout, _ = run(capsys, "extract", *wavs, "--out-dir", out_dir, "--jobs", "2")
        assert code == 0
        lines = [json.loads(line) for line in stdout.strip().splitlines()]
        # summaries come back in input order regardless of completion order
        assert [l["input"] for l in lines] == [str(w) for w in wavs]
        assert all((out_dir / f"t{i}.bundle.json").exists() for i in range(3))

    def test_units_add_durations(self, tmp_path, capsys):
        wav = write_tone_wav(tmp_path / "tone.wav", 220.0)
        units_file = tmp_path / "u.txt"
        save_units(units_file, [4, 4, 4, 2, 2, 9])
        out = tmp_path / "b.json"
        code, _, _ = run(capsys, "extract", wav, "--out", out, "--units", units_file)
        assert code == 0
        bundle = load_bundle(out)
        assert np.array_equal(bundle.durations.unique_units, [4, 2, 9])
        assert np.array_equal(bundle.durations.counts, [3, 2, 1])
        assert bundle.durations_smooth is not None


class TestSmoothAndAugment:
    def make_bundle(self, tmp_path, capsys):
        wav = write_tone_wav(tmp_path / "tone.wav", 220.0)
        out = tmp_path / "b.json"
        assert run(capsys, "extract", wav, "--out", out)[0] == 0
        return out

    def test_smooth_updates_params(self, tmp_path, capsys):
        src = self.make_bundle(tmp_path, capsys)
        out = tmp_path / "s.json"
        code, _, _ = run(capsys, "smooth", src, "--out", out, "--savgol-window", "7")
        assert code == 0
        assert load_bundle(out).meta["savgol_window"] == 7

    def test_augment_deterministic_per_seed(self, tmp_path, capsys):
        src = self.make_bundle(tmp_path, capsys)
        out1, out2 = tmp_path / "a1.json", tmp_path / "a2.json"
        assert run(capsys, "augment", src, "--out", out1, "--seed", "11")[0] == 0
        assert run(capsys, "augment", src, "--out", out2, "--seed", "11")[0] == 0
        assert out1.read_bytes() == out2.read_bytes()
        bundle = load_bundle(out1)
        assert bundle.f0_aug is not None
        assert bundle.f0_aug.size == bundle.n_frames
        assert bundle.meta["augment"]["seed"] == 11

    def test_augment_without_seed_records_one(self, tmp_path, capsys):
        src = self.make_bundle(tmp_path, capsys)
        out = tmp_path / "a.json"
        code, stdout, _ = run(capsys, "augment", src, "--out", out)
        assert code == 0
        recorded = load_bundle(out).meta["augment"]["seed"]
        assert isinstance(recorded, int)
        assert json.loads(stdout.strip())["seed"] == recorded

    def test_corrupt_bundle_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema": 1}')
        code, _, stderr = run(capsys, "augment", bad, "--out", tmp_path / "o.json")
        assert code == 2
        assert "error" in stderr


class TestUnitsCommands:
    def test_fit_three_points(self, tmp_path, capsys):
        feats = tmp_path / "f.csv"
        save_features(feats, np.array([[0.0, 0.0], [5.0, 5.0], [9.0, 0.0]]))
        out = tmp_path / "cb.json"
        code, _, _ = run(capsys, "units", "fit", "--features", feats, "--k", "3",
                         "--seed", "0", "--out", out)
        assert code == 0
        cb = load_codebook(out)
        assert sorted(map(tuple, cb.centroids.tolist())) == [
            (0.0, 0.0), (5.0, 5.0), (9.0, 0.0)]

    def test_encode_dedup_expand_roundtrip(self, tmp_path, capsys, rng):
        feats_path = tmp_path / "f.csv"
        centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        rows = centers[[0, 0, 1, 2, 2, 2, 0]] + rng.normal(0, 0.01, (7, 2))
        save_features(feats_path, rows)
        cb_path = tmp_path / "cb.json"
        assert run(capsys, "units", "fit", "--features", feats_path, "--k", "3",
                   "--seed", "1", "--out", cb_path)[0] == 0
        units_path = tmp_path / "u.txt"
        assert run(capsys, "units", "encode", "--features", feats_path,
                   "--codebook", cb_path, "--out", units_path)[0] == 0
        dd_path = tmp_path / "d.json"
        assert run(capsys, "units", "dedup", "--units", units_path, "--out", dd_path)[0] == 0
        back_path = tmp_path / "u2.txt"
        assert run(capsys, "units", "expand", "--dedup", dd_path, "--out", back_path)[0] == 0
        assert np.array_equal(load_units(back_path), load_units(units_path))

    def test_fit_with_too_large_k(self, tmp_path, capsys):
        feats = tmp_path / "f.csv"
        save_features(feats, np.zeros((3, 2)))
        code, _, stderr = run(capsys, "units", "fit", "--features", feats, "--k", "10",
                              "--out", tmp_path / "cb.json")
        assert code == 2
        assert "at least" in stderr


class TestEval:
    def make_pair(self, tmp_path, capsys):
        wav1 = write_tone_wav(tmp_path / "a.wav", 220.0)
        wav2 = write_tone_wav(tmp_path / "b.wav", 180.0)
        b1, b2 = tmp_path / "a.json", tmp_path / "b.json"
        assert run(capsys, "extract", wav1, "--out", b1)[0] == 0
        assert run(capsys, "extract", wav2, "--out", b2)[0] == 0
        return b1, b2

    def test_self_evaluation(self, tmp_path, capsys):
        b1, _ = self.make_pair(tmp_path, capsys)
        code, stdout, _ = run(capsys, "eval", "--ref", b1, "--hyp", b1)
        assert code == 0
        report = json.loads(stdout.strip())
        assert report["f0_pcc"] == pytest.approx(1.0, abs=1e-12)
        assert report["e_pcc"] == pytest.approx(1.0, abs=1e-12)
        assert report["eecs"] is None
        assert report["wer"] is None

    def test_transcripts_and_embeddings(self, tmp_path, capsys):
        b1, b2 = self.make_pair(tmp_path, capsys)
        ref_txt = tmp_path / "r.txt"
        hyp_txt = tmp_path / "h.txt"
        ref_txt.write_text("the quick brown fox\n")
        hyp_txt.write_text("the quick brown fox\n")
        ref_emb = tmp_path / "r.emb"
        hyp_emb = tmp_path / "h.emb"
        np.savetxt(ref_emb, np.array([1.0, 2.0, 3.0]), delimiter=",")
        np.savetxt(hyp_emb, np.array([2.0, 4.0, 6.0]), delimiter=",")
        code, stdout, _ = run(
            capsys, "eval", "--ref", b1, "--hyp", b2,
            "--ref-text", ref_txt, "--hyp-text", hyp_txt,
            "--ref-emb", ref_emb, "--hyp-emb", hyp_emb,
        )
        assert code == 0
        report = json.loads(stdout.strip())
        assert report["wer"] == 0.0
        assert report["cer"] == 0.0
        assert report["eecs"] == pytest.approx(1.0, abs=1e-12)

    def test_batch_mode_emits_summary(self, tmp_path, capsys):
        b1, b2 = self.make_pair(tmp_path, capsys)
        code, stdout, _ = run(capsys, "eval", "--ref", b1, "--hyp", b1,
                              "--ref", b2, "--hyp", b2)
        assert code == 0
        lines = [json.loads(line) for line in stdout.strip().splitlines()]
        assert len(lines) == 3
        assert lines[-1]["summary"] is True
        assert lines[-1]["f0_pcc"] == pytest.approx(1.0, abs=1e-12)

    def test_zero_variance_yields_null_with_warning(self, tmp_path, capsys):
        from evckit.bundle import ProsodyBundle, save_bundle

        flat = ProsodyBundle(
            f0=np.full(10, 100.0), f0_smooth=np.full(10, 100.0),
            energy=np.zeros(10), energy_smooth=np.zeros(10), vuv=np.ones(10),
        )
        path = tmp_path / "flat.json"
        save_bundle(path, flat)
        code, stdout, stderr = run(capsys, "eval", "--ref", path, "--hyp", path)
        assert code == 0
        report = json.loads(stdout.strip())
        assert report["f0_pcc"] is None
        assert report["e_pcc"] is None
        assert "warning" in stderr

    def test_mismatched_pair_counts(self, tmp_path, capsys):
        b1, b2 = self.make_pair(tmp_path, capsys)
        code, _, stderr = run(capsys, "eval", "--ref", b1, "--ref", b2, "--hyp", b1)
        assert code == 2


class TestCheckCommand:
    def test_oracle_suite_passes(self, capsys):
        code, stdout, _ = run(capsys, "check", "--oracles")
        assert code == 0
        for line in stdout.strip().splitlines():
            assert json.loads(line)["pass"] is True

    def test_failing_check_exits_1(self, capsys, monkeypatch):
        import evckit.cli as cli_mod

        def fake_run_checks(grads, oracles):
            return [{"check": "stub", "max_err": 1.0, "tolerance": 0.5, "pass": False}]

        monkeypatch.setattr(cli_mod.check_suites, "run_checks", fake_run_checks)
        code, stdout, _ = run(capsys, "check")
        assert code == 1
        assert json.loads(stdout.strip())["pass"] is False


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path, capsys):
        wav = write_tone_wav(tmp_path / "tone.wav", 220.0)
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("# analysis overrides\nsavgol-window=7\n")
        out = tmp_path / "b.json"
        code, _, _ = run(capsys, "extract", wav, "--out", out, "--config", cfg)
        assert code == 0
        assert load_bundle(out).meta["savgol_window"] == 7

    def test_explicit_flag_beats_config(self, tmp_path, capsys):
        wav = write_tone_wav(tmp_path / "tone.wav", 220.0)
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("savgol-window=7\n")
        out = tmp_path / "b.json"
        code, _, _ = run(capsys, "extract", wav, "--out", out, "--config", cfg,
                         "--savgol-window", "11")
        assert code == 0
        assert load_bundle(out).meta["savgol_window"] == 11

    def test_malformed_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("not a pair\n")
        code, _, _ = run(capsys, "extract", "x.wav", "--out", "y.json", "--config", cfg)
        assert code == 2


class TestArgumentErrors:
    def test_unknown_command(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2

    def test_extract_requires_destination(self, tmp_path, capsys):
        wav = write_tone_wav(tmp_path / "t.wav", 220.0)
        assert run(capsys, "extract", wav)[0] == 2
