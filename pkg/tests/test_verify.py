import json
import shutil

import pytest

from cdplab import cli
from cdplab.io import FIXTURE_DIR
from cdplab.verify import CHECKS, SKIPPED, run_suite, scoreboard


@pytest.fixture(scope="module")
def clean_results():
    return run_suite(FIXTURE_DIR, seed=0, budget=4)


@pytest.fixture
def fixture_copy(tmp_path):
    target = tmp_path / "fixtures"
    shutil.copytree(FIXTURE_DIR, target)
    return target


def test_fresh_fixtures_pass_every_check(clean_results):
    failed = [(r.tag, r.detail) for r in clean_results if r.status != "pass"]
    assert not failed
    assert len(clean_results) == len(CHECKS)


def test_scoreboard_lists_every_tag(clean_results):
    board = scoreboard(clean_results)
    for r in clean_results:
        assert r.tag in board


def test_corrupted_fixture_is_named(fixture_copy):
    path = fixture_copy / "bell_d2.json"
    data = json.loads(path.read_text())
    data["matrix_real"][0][0] = 2.0
    path.write_text(json.dumps(data))
    results = run_suite(fixture_copy, seed=0, budget=4, only=["fixtures", "thm1"])
    by_tag = {r.tag: r for r in results}
    assert by_tag["fixtures"].failed and "bell_d2" in by_tag["fixtures"].detail
    assert by_tag["thm1"].failed


def test_corrupted_fixture_exit_code(fixture_copy, capsys):
    (fixture_copy / "iso_d2_p50.json").write_text("{")
    code = cli.main(["verify-suite", "--input", str(fixture_copy), "--budget", "4", "--format", "text"])
    out = capsys.readouterr().out
    assert code == 4
    assert "iso_d2_p50" in out


def test_threshold_override_skips_rank_dependent_checks():
    results = run_suite(FIXTURE_DIR, seed=0, budget=4, threshold=0.3)
    skipped = {r.tag for r in results if r.status == SKIPPED}
    assert {"osr", "tomography"} <= skipped
    assert not any(r.failed for r in results)
