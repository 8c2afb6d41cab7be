import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from cdplab import cli
from cdplab.errors import ParseError, ValidationError
from cdplab.io import (
    FIXTURE_DIR,
    channel_from_dict,
    channel_to_dict,
    fixture_channels,
    fixture_states,
    read_channel,
    read_state,
    state_from_dict,
    state_to_dict,
    write_state,
)
from cdplab.objects import isotropic_state


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# --- files ----------------------------------------------------------------------


def test_shipped_fixtures_match_generators():
    for name, st in fixture_states().items():
        assert np.allclose(read_state(FIXTURE_DIR / f"{name}.json").rho, st.rho, atol=1e-15)
    for name, ch in fixture_channels().items():
        assert np.allclose(read_channel(name).choi, ch.choi, atol=1e-15)


def test_state_round_trip(tmp_path):
    st = isotropic_state(3, 0.25)
    write_state(st, tmp_path / "iso.json")
    back = read_state(tmp_path / "iso.json")
    assert np.array_equal(back.rho, st.rho)
    assert state_from_dict(state_to_dict(st)).dA == 3


def test_channel_round_trip():
    ch = fixture_channels()["random_unitary_d2"]
    back = channel_from_dict(json.loads(json.dumps(channel_to_dict(ch))))
    assert np.allclose(back.choi, ch.choi, atol=1e-15)


def test_malformed_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dA": 2,\n  "dB": }')
    with pytest.raises(ParseError, match="line 2"):
        read_state(p)


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"dA": 0}, "dA"),
        ({"matrix_real": [[1.0]]}, "matrix_real"),
        ({"matrix_imag": [[0, 0, 0, "x"]] * 4}, "matrix_imag"),
    ],
)
def test_bad_fields_are_named(patch, field):
    d = state_to_dict(isotropic_state(2, 0.5))
    d.update(patch)
    with pytest.raises(ParseError) as exc:
        state_from_dict(d)
    assert exc.value.field == field


def test_missing_field():
    d = state_to_dict(isotropic_state(2, 0.5))
    del d["dB"]
    with pytest.raises(ParseError, match="dB"):
        state_from_dict(d)


def test_invalid_state_is_a_validation_error():
    d = state_to_dict(isotropic_state(2, 0.5))
    d["matrix_real"][0][0] += 0.5
    with pytest.raises(ValidationError, match="trace"):
        state_from_dict(d)


def test_non_trace_preserving_channel_rejected():
    d = channel_to_dict(fixture_channels()["identity_d2"])
    d["kraus"][0]["real"][0][0] = 0.5
    with pytest.raises(ValidationError):
        channel_from_dict(d)


def test_unknown_fixture_name():
    with pytest.raises(ParseError):
        read_state("no_such_fixture")


# --- commands -------------------------------------------------------------------


def test_osd_isotropic(capsys):
    code, out, _ = run(["osd", "--input", "iso_d2_p50"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["coefficients"] == pytest.approx([0.5, 0.25, 0.25, 0.25], abs=1e-12)
    assert rep["rank"] == 4


def test_osd_product_and_bell(capsys):
    _, out, _ = run(["osd", "--input", "product_d2"], capsys)
    assert json.loads(out)["rank"] == 1
    _, out, _ = run(["osd", "--input", "bell_d2"], capsys)
    rep = json.loads(out)
    assert rep["realignment_verdict"] == "fails (entangled)"
    assert rep["realignment_sum"] == pytest.approx(2.0)


def test_osd_text_and_csv(capsys):
    _, out, _ = run(["osd", "--input", "iso_d2_p50", "--format", "text"], capsys)
    assert "coefficients: [0.5, 0.25, 0.25, 0.25]" in out
    _, out, _ = run(["osd", "--input", "iso_d2_p50", "--format", "csv"], capsys)
    rows = dict(csv.reader(io.StringIO(out)))
    assert float(rows["coefficients[1]"]) == pytest.approx(0.25)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ("identity_d2", "identity_d2", 0.0),
        ("eq9_pair_d2_0", "eq9_pair_d2_1", 2.0),
        ("identity_d2", "dephase_d2", 1.0),
    ],
)
def test_diamond(capsys, a, b, expected):
    code, out, _ = run(["diamond", "--input", a, "--input-b", b], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["value"] == pytest.approx(expected, abs=1e-6)
    assert rep["ascent_value"] <= rep["sdp_value"] + 1e-6


def test_diamond_dimension_mismatch(tmp_path, capsys):
    from cdplab.io import write_channel
    from cdplab.objects import identity_channel

    write_channel(identity_channel(3), tmp_path / "id3.json")
    code, _, err = run(["diamond", "--input", "identity_d2", "--input-b", str(tmp_path / "id3.json")], capsys)
    assert code == 2
    assert "dimension mismatch" in err


@pytest.mark.parametrize("name, exact", [("bell_d2", 0.5), ("pure_82", 0.2)])
def test_cdp_pure_fixtures(capsys, name, exact):
    code, out, _ = run(["cdp", "--input", name, "--budget", "4"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["exact"] == pytest.approx(exact)
    assert rep["adversarial_estimate"] == pytest.approx(exact, abs=1e-7)
    assert rep["state_id"] == name


def test_cdp_isotropic_bracket(capsys):
    _, out, _ = run(["cdp", "--input", "iso_d2_p50", "--budget", "4"], capsys)
    rep = json.loads(out)
    assert 0.2 - 1e-7 <= rep["lower_bound"] <= rep["adversarial_estimate"] <= rep["upper_bound"] <= 0.5 + 1e-7
    assert len(rep["witness_channels"]) == 2


def test_cdp_json_is_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"out{k}.json"
        assert cli.main(["cdp", "--input", "iso_d2_p33", "--seed", "5", "--budget", "4", "--output", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_cdp_text_summary(capsys):
    _, out, _ = run(["cdp", "--input", "pure_82", "--budget", "4", "--format", "text"], capsys)
    assert "exact: 0.2" in out
    assert "thm1: 0.2" in out


def test_tomography_report_and_sweep(capsys):
    code, out, _ = run(["tomography", "--input", "iso_d2_p50", "--trials", "4"], capsys)
    assert code == 0
    assert json.loads(out)["residual_to_truth"] <= 1e-8
    code, out, _ = run(["tomography", "--format", "csv", "--trials", "4"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["p"]) for r in rows] == [1.0, 0.5, 0.1]


def test_tomography_incomplete_state(capsys):
    code, _, err = run(["tomography", "--input", "classical_on_A_d2"], capsys)
    assert code == 2
    assert "rank" in err


def test_malformed_input_exit_code(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    code, _, err = run(["osd", "--input", str(p)], capsys)
    assert code == 2 and "line 1" in err


def test_missing_input_flag(capsys):
    code, _, err = run(["osd"], capsys)
    assert code == 2 and "--input" in err


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cdplab.cli", "osd", "--input", "product_d2", "--format", "text"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "rank: 1" in proc.stdout
