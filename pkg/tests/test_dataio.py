import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from melostyle import (
    CentsTrack,
    EnergyContour,
    FormatError,
    PitchTrack,
    ValidationError,
    load_dataset,
    load_pitch_track,
    load_responses,
    to_cents,
    write_pitch_track,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadPitchTrack:
    def test_direct_readback(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.00,220.0\n0.01,220.0\n")
        track = load_pitch_track(p)
        assert len(track) == 2
        assert np.all(track.voiced)
        assert np.allclose(track.f0, 220.0)

    def test_gap_fill(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.00,220.0\n0.02,220.0\n")
        track = load_pitch_track(p)
        assert len(track) == 3
        assert track.voiced.tolist() == [True, False, True]

    def test_parse_error_names_line(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.01,abc\n")
        with pytest.raises(FormatError, match="line 2"):
            load_pitch_track(p)

    def test_parse_error_deeper_line(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.00,220.0\n0.01,abc\n")
        with pytest.raises(FormatError, match="line 3"):
            load_pitch_track(p)

    def test_off_grid_time_rejected(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.000,220.0\n0.015,220.0\n")
        with pytest.raises(FormatError, match="grid"):
            load_pitch_track(p)

    def test_time_jitter_within_1ms_snapped(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.0000,220.0\n0.0104,230.0\n")
        track = load_pitch_track(p)
        assert len(track) == 2

    def test_decreasing_time_rejected(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.01,220.0\n0.00,220.0\n")
        with pytest.raises(FormatError, match="increase"):
            load_pitch_track(p)

    def test_out_of_range_voiced_f0(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.00,3500.0\n")
        with pytest.raises(ValidationError, match="out of range"):
            load_pitch_track(p)

    def test_negative_f0_treated_unvoiced(self, tmp_path):
        p = write(tmp_path / "a.csv", "time_s,f0_hz\n0.00,-220.0\n0.01,220.0\n")
        track = load_pitch_track(p)
        assert track.voiced.tolist() == [False, True]

    def test_missing_header(self, tmp_path):
        p = write(tmp_path / "a.csv", "0.00,220.0\n")
        with pytest.raises(FormatError, match="header"):
            load_pitch_track(p)


def test_pitch_roundtrip_six_decimals(tmp_path):
    rng = np.random.default_rng(3)
    f0 = np.where(rng.uniform(size=200) < 0.2, 0.0, rng.uniform(60, 1900, 200))
    track = PitchTrack(f0=f0)
    write_pitch_track(track, str(tmp_path / "rt.csv"))
    back = load_pitch_track(str(tmp_path / "rt.csv"))
    assert len(back) == len(track)
    assert np.allclose(back.f0, track.f0, atol=5e-7)


class TestToCents:
    def test_identity_at_tonic(self):
        track = PitchTrack(f0=np.array([220.0]))
        assert to_cents(track, 220.0).cents[0] == pytest.approx(0.0, abs=1e-12)

    def test_octave(self):
        track = PitchTrack(f0=np.array([440.0]))
        assert to_cents(track, 220.0).cents[0] == pytest.approx(1200.0, abs=1e-9)

    def test_fifth_above_derived(self):
        # 220 Hz over a tonic of 110*2^(7/12): exactly 1200*(1 - 7/12) = 500.
        tonic = 110.0 * 2 ** (7.0 / 12.0)
        track = PitchTrack(f0=np.array([220.0]))
        assert to_cents(track, tonic).cents[0] == pytest.approx(500.0, abs=1e-9)

    def test_unvoiced_preserved(self):
        track = PitchTrack(f0=np.array([220.0, 0.0, 220.0]))
        cents = to_cents(track, 220.0)
        assert cents.voiced.tolist() == [True, False, True]

    def test_nonpositive_tonic_rejected(self):
        track = PitchTrack(f0=np.array([220.0]))
        with pytest.raises(ValueError):
            to_cents(track, 0.0)

    @given(
        st.floats(min_value=50.0, max_value=1999.0),
        st.floats(min_value=1.0, max_value=1.5),
    )
    def test_order_preserving(self, f0, factor):
        lo, hi = f0, min(f0 * factor, 2000.0)
        track = PitchTrack(f0=np.array([lo, hi]))
        cents = to_cents(track, 220.0)
        assert cents.cents[0] <= cents.cents[1]


class TestLoadDataset:
    def _manifest(self, tmp_path, rows):
        pitch = write(tmp_path / "p.csv", "time_s,f0_hz\n0.00,220.0\n")
        body = "\n".join(r.format(pitch="p.csv") for r in rows)
        return write(
            tmp_path / "m.csv",
            "clip_id,style,tonic_hz,pitch_path,energy_path,audio_path\n" + body + "\n",
        )

    def test_three_styles(self, tmp_path):
        m = self._manifest(
            tmp_path,
            [
                "a,Hindustani,220,{pitch},,",
                "b,Carnatic,220,{pitch},,",
                "c,Turkish,220,{pitch},,",
            ],
        )
        records = load_dataset(m)
        assert [r.clip_id for r in records] == ["a", "b", "c"]
        assert records[0].energy_path is None and records[0].audio_path is None

    def test_duplicate_id(self, tmp_path):
        m = self._manifest(
            tmp_path, ["a,Hindustani,220,{pitch},,", "a,Carnatic,220,{pitch},,"]
        )
        with pytest.raises(ValidationError, match="duplicate clip_id 'a'"):
            load_dataset(m)

    def test_unknown_style(self, tmp_path):
        m = self._manifest(tmp_path, ["a,Ottoman,220,{pitch},,"])
        with pytest.raises(ValidationError, match="unknown style"):
            load_dataset(m)

    def test_missing_pitch_file(self, tmp_path):
        m = write(
            tmp_path / "m.csv",
            "clip_id,style,tonic_hz,pitch_path,energy_path,audio_path\n"
            "a,Hindustani,220,nope.csv,,\n",
        )
        with pytest.raises(ValidationError, match="missing file"):
            load_dataset(m)

    def test_manifest_order_preserved(self, tmp_path):
        rows = [f"clip{i},Hindustani,220,{{pitch}},," for i in (5, 1, 3)]
        m = self._manifest(tmp_path, rows)
        assert [r.clip_id for r in load_dataset(m)] == ["clip5", "clip1", "clip3"]


class TestLoadResponses:
    def test_valid(self, tmp_path):
        p = write(
            tmp_path / "r.csv",
            "clip_id,listener_id,category,label\na,l1,Amateur,H\na,l2,Trained<3y,NC\n",
        )
        responses = load_responses(p)
        assert [r.label for r in responses] == ["H", "NC"]

    def test_duplicate_pair_rejected(self, tmp_path):
        p = write(
            tmp_path / "r.csv",
            "clip_id,listener_id,category,label\na,l1,Amateur,H\na,l1,Amateur,C\n",
        )
        with pytest.raises(ValidationError, match="duplicate response"):
            load_responses(p)

    def test_unknown_label_rejected(self, tmp_path):
        p = write(
            tmp_path / "r.csv", "clip_id,listener_id,category,label\na,l1,Amateur,X\n"
        )
        with pytest.raises(ValidationError, match="unknown response label"):
            load_responses(p)


def test_energy_contour_rejects_negative():
    with pytest.raises(ValidationError):
        EnergyContour(energy=np.array([1.0, -0.5]))


def test_pitch_track_duration():
    track = PitchTrack(f0=np.zeros(250))
    assert math.isclose(track.duration_s, 2.5)


def test_cents_track_voiced_values():
    ct = CentsTrack(cents=np.array([0.0, np.nan, 700.0]), tonic_hz=220.0)
    assert ct.voiced_values().tolist() == [0.0, 700.0]
