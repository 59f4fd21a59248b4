import filecmp
import os

import pytest

from melostyle.cli import main


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """A small generated corpus shared by the CLI tests.

    30 clips keeps every class large enough for the quadratic classifier's
    covariance fit in 4-fold splits."""
    root = tmp_path_factory.mktemp("cli")
    out = str(root / "corpus")
    assert main(["gen", "--style", "all", "--count", "30", "--duration", "12",
                 "--seed", "5", "--out", out, "--audio"]) == 0
    return root, out


@pytest.fixture(scope="module")
def table(corpus):
    root, out = corpus
    path = str(root / "table.csv")
    assert main(["extract", "--manifest", f"{out}/manifest.csv", "--out", path]) == 0
    return path


@pytest.fixture(scope="module")
def cv_outputs(corpus, table):
    root, _ = corpus
    out = str(root / "cv")
    assert main(["crossval", "--table", table, "--subset", "A", "--folds", "4",
                 "--out", out]) == 0
    return out


def run(args):
    return main([str(a) for a in args])


class TestGen:
    def test_count_written(self, corpus):
        _, out = corpus
        pitches = [f for f in os.listdir(out) if f.endswith("_pitch.csv")]
        assert len(pitches) == 30

    def test_rerun_byte_identical(self, corpus, tmp_path):
        _, out = corpus
        again = str(tmp_path / "again")
        assert run(["gen", "--style", "all", "--count", 30, "--duration", 12,
                    "--seed", 5, "--out", again, "--audio"]) == 0
        for name in sorted(os.listdir(out)):
            assert filecmp.cmp(os.path.join(out, name), os.path.join(again, name),
                               shallow=False), name


class TestExtract:
    def test_writes_table(self, corpus):
        root, out = corpus
        table = str(root / "features.csv")
        assert run(["extract", "--manifest", f"{out}/manifest.csv", "--out", table]) == 0
        header = open(table, encoding="utf-8").readline().strip()
        assert header.startswith("clip_id,stable_note,")
        assert header.endswith(",style")
        assert len(open(table, encoding="utf-8").read().splitlines()) == 31

    def test_rerun_byte_identical(self, corpus):
        root, out = corpus
        a, b = str(root / "fa.csv"), str(root / "fb.csv")
        assert run(["extract", "--manifest", f"{out}/manifest.csv", "--out", a]) == 0
        assert run(["extract", "--manifest", f"{out}/manifest.csv", "--out", b]) == 0
        assert filecmp.cmp(a, b, shallow=False)

    def test_missing_pitch_file_exits_2(self, corpus, tmp_path, capsys):
        manifest = tmp_path / "m.csv"
        manifest.write_text(
            "clip_id,style,tonic_hz,pitch_path,energy_path,audio_path\n"
            "ghost,Hindustani,220,ghost.csv,,\n",
            encoding="utf-8",
        )
        assert run(["extract", "--manifest", manifest, "--out", tmp_path / "f.csv"]) == 2
        assert "ghost" in capsys.readouterr().err

    def test_warns_without_audio(self, corpus, tmp_path, capsys):
        root, out = corpus
        lines = open(f"{out}/manifest.csv", encoding="utf-8").read().splitlines()
        rows = [lines[0]] + [",".join(r.split(",")[:5]) + "," for r in lines[1:2]]
        manifest = tmp_path / "noaudio.csv"
        manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
        # paths are relative to the manifest location, so copy alongside
        for name in os.listdir(out):
            if name.startswith("H001"):
                src = os.path.join(out, name)
                (tmp_path / name).write_bytes(open(src, "rb").read())
        assert run(["extract", "--manifest", manifest, "--out", tmp_path / "f.csv"]) == 0
        assert "no audio" in capsys.readouterr().err


class TestRankAndCrossval:
    def test_rank(self, corpus, table):
        root, _ = corpus
        out = str(root / "rank.csv")
        assert run(["rank", "--table", table, "--out", out]) == 0
        lines = open(out, encoding="utf-8").read().splitlines()
        assert lines[0] == "feature,info_gain_bits"
        gains = [float(l.split(",")[1]) for l in lines[1:]]
        assert gains == sorted(gains, reverse=True)

    def test_crossval_quadratic_subset_a(self, cv_outputs):
        out = cv_outputs
        assert os.path.exists(f"{out}/cv_summary.csv")
        assert os.path.exists(f"{out}/cv_confusion.csv")
        preds = open(f"{out}/cv_predictions.csv", encoding="utf-8").read().splitlines()
        assert preds[0] == "clip_id,true,predicted,p_H,p_C,p_T"
        assert len(preds) == 31

    def test_crossval_rerun_identical(self, corpus, table):
        root, _ = corpus
        a, b = str(root / "cva"), str(root / "cvb")
        for out in (a, b):
            assert run(["crossval", "--table", table, "--subset", "A", "--folds", 4,
                        "--classifier", "knn", "--k", 3, "--seed", 9, "--out", out]) == 0
        for name in ("cv_summary.csv", "cv_confusion.csv", "cv_predictions.csv"):
            assert filecmp.cmp(os.path.join(a, name), os.path.join(b, name), shallow=False)

    def test_subset_missing_column_exits_1(self, corpus, table, tmp_path, capsys):
        lines = open(table, encoding="utf-8").read().splitlines()
        header = lines[0].split(",")
        drop = header.index("MIPD")
        pruned = "\n".join(
            ",".join(c for i, c in enumerate(l.split(",")) if i != drop) for l in lines
        )
        p = tmp_path / "noMIPD.csv"
        p.write_text(pruned + "\n", encoding="utf-8")
        assert run(["crossval", "--table", p, "--subset", "C", "--folds", 4,
                    "--out", tmp_path / "cv"]) == 1
        assert "MIPD" in capsys.readouterr().err


class TestAgree:
    def _fixtures(self, corpus, cv_outputs):
        root, _ = corpus
        preds = f"{cv_outputs}/cv_predictions.csv"
        responses = str(root / "responses.csv")
        if not os.path.exists(responses):
            rows = ["clip_id,listener_id,category,label"]
            for line in open(preds, encoding="utf-8").read().splitlines()[1:]:
                clip_id, true = line.split(",")[:2]
                for j in range(5):
                    rows.append(f"{clip_id},L{j},AvidListener,{true}")
            open(responses, "w", encoding="utf-8").write("\n".join(rows) + "\n")
        return preds, responses

    def test_agreement_report(self, corpus, cv_outputs, tmp_path):
        preds, responses = self._fixtures(corpus, cv_outputs)
        out = str(tmp_path / "agree.csv")
        assert run(["agree", "--predictions", preds, "--responses", responses,
                    "--out", out]) == 0
        text = open(out, encoding="utf-8").read()
        assert "significant_at_5pct" in text
        assert "responses_AvidListener,150" in text  # 30 clips x 5 listeners

    def test_disjoint_clips_exit_2(self, corpus, cv_outputs, tmp_path):
        preds, _ = self._fixtures(corpus, cv_outputs)
        stray = tmp_path / "stray.csv"
        stray.write_text(
            "clip_id,listener_id,category,label\nzzz,L0,Amateur,H\n", encoding="utf-8"
        )
        assert run(["agree", "--predictions", preds, "--responses", stray,
                    "--out", tmp_path / "a.csv"]) == 2


class TestSynth:
    def test_synthesizes_wav(self, corpus, tmp_path):
        _, out = corpus
        wav = str(tmp_path / "x.wav")
        assert run(["synth", "--pitch", f"{out}/H001_pitch.csv",
                    "--energy", f"{out}/H001_energy.csv", "--tonic", 210,
                    "--out", wav]) == 0
        from melostyle import decode_wav

        clip = decode_wav(wav)
        assert len(clip) == 1200 * 160

    def test_rerun_byte_identical(self, corpus, tmp_path):
        _, out = corpus
        a, b = str(tmp_path / "a.wav"), str(tmp_path / "b.wav")
        for wav in (a, b):
            assert run(["synth", "--pitch", f"{out}/H001_pitch.csv",
                        "--energy", f"{out}/H001_energy.csv", "--tonic", 210,
                        "--out", wav]) == 0
        assert filecmp.cmp(a, b, shallow=False)


class TestConfig:
    def test_unknown_config_key_exits_1(self, corpus, tmp_path, capsys):
        _, out = corpus
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("N_ms=400\nwibble=3\n", encoding="utf-8")
        code = run(["extract", "--manifest", f"{out}/manifest.csv",
                    "--out", tmp_path / "f.csv", "--config", cfg])
        assert code == 1
        assert "wibble" in capsys.readouterr().err

    def test_flag_overrides_config(self, corpus, tmp_path):
        _, out = corpus
        cfg = tmp_path / "steady.cfg"
        cfg.write_text("N_ms=700\nJ_cents=10\n", encoding="utf-8")
        a = str(tmp_path / "a.csv")
        b = str(tmp_path / "b.csv")
        assert run(["extract", "--manifest", f"{out}/manifest.csv", "--out", a,
                    "--config", cfg, "--N_ms", 400, "--J_cents", 20]) == 0
        assert run(["extract", "--manifest", f"{out}/manifest.csv", "--out", b]) == 0
        assert filecmp.cmp(a, b, shallow=False)

    def test_usage_error_exits_1(self):
        assert run(["crossval", "--table", "x.csv", "--subset", "Q", "--out", "y"]) == 1
