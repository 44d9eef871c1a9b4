import json

import pytest

from app import cli
from app.models.code import Word
from app.services import covercode, graphcore


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 and "--csv" not in argv else out)


def test_gen_then_decide_from_file(capsys, tmp_path):
    path = str(tmp_path / "g.asg")
    code, doc = run(capsys, "gen", "--n", "200", "--seed", "5", "--out", path)
    assert code == 0 and doc["n"] == 200 and doc["out"] == path
    assert graphcore.read_graph(path).edge_count() == doc["edges"]

    code, from_file = run(capsys, "decide-deg", "--in", path)
    assert code == 0
    code, sampled = run(capsys, "decide-deg", "--n", "200", "--seed", "5")
    assert from_file["in_a"] == sampled["in_a"]
    assert from_file["ydown"] == sampled["ydown"] and from_file["z"] == sampled["z"]
    assert from_file["config"] == {"in": path, "down_len": sampled["config"]["down_len"], "up_len": sampled["config"]["up_len"]}


def test_attack_deg_changes_at_most_one_slot(capsys, tmp_path):
    src, dst = str(tmp_path / "in.asg"), str(tmp_path / "out.asg")
    run(capsys, "gen", "--n", "300", "--seed", "9", "--out", src)
    code, doc = run(capsys, "attack-deg", "--in", src, "--out", dst)
    assert code == 0
    changed = graphcore.diff_slots(graphcore.read_graph(src), graphcore.read_graph(dst))
    assert len(changed) <= 1
    if doc["success"]:
        _, decided = run(capsys, "decide-deg", "--in", dst)
        assert decided["in_a"]


def test_attack_qk_with_exhaustive_fallback(capsys):
    code, doc = run(capsys, "attack-qk", "--n", "20", "--seed", "1", "--k", "13", "--fallback-exhaustive")
    assert code == 0
    assert doc["config"]["exhaustive"] is True
    assert doc["outcome"]["reason"] in {
        "already_in_property", "unresolved_hence_in", "code_flip_applied", "no_flip_found"
    }


def test_decide_qk_reports_k(capsys):
    code, doc = run(capsys, "decide-qk", "--n", "300", "--k", "13")
    assert code == 0 and doc["k"] == 13
    assert doc["decision"]["in_qk"] == doc["in_qk"]


def test_code_check(capsys):
    code, doc = run(capsys, "code", "--check", "--len", "7")
    assert code == 0
    assert doc["covering"] is True
    assert doc["density"] == 0.125
    assert doc["codewords"] == 16


def test_code_flip(capsys):
    code, doc = run(capsys, "code", "--flip", "--len", "7", "--word", "1011001")
    assert code == 0
    c = covercode.build_code(7)
    assert covercode.contains(c, Word.from_string(doc["codeword"]))


def test_code_min_cover(capsys):
    code, doc = run(capsys, "code", "--min-cover", "--len", "3")
    assert code == 0 and doc["min_cover_size"] == 2


def test_code_needs_a_mode():
    with pytest.raises(SystemExit):
        cli.main(["code", "--len", "7"])


def test_stats(capsys):
    code, doc = run(capsys, "stats", "--n", "300", "--seed", "4")
    assert code == 0
    assert sum(doc["vertex_classes"].values()) == 300
    assert set(doc["degree_range"]) == {"part1", "part2", "part3", "part4", "part5"}
    assert doc["log_g"] is not None


@pytest.mark.parametrize(
    "argv",
    [
        ["decide-qk", "--n", "50", "--k", "12"],
        ["decide-deg", "--n", "100"],
        ["decide-deg"],
        ["simulate", "--experiment", "mod_uniformity", "--n", "50", "--trials", "5"],
    ],
)
def test_domain_and_input_errors_exit_1(capsys, argv):
    assert cli.main(argv) == 1
    assert capsys.readouterr().out == ""


def test_code_length_override_is_checked_against_window(capsys):
    assert cli.main(["decide-deg", "--n", "1000", "--codes-down-len", "5"]) == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "does not match the degree window" in captured.err
    code, doc = run(capsys, "decide-deg", "--n", "500", "--codes-down-len", "12", "--codes-up-len", "12")
    assert code == 0


def test_file_errors_exit_2(capsys, tmp_path):
    assert cli.main(["decide-deg", "--in", str(tmp_path / "missing.asg")]) == 2
    bad = tmp_path / "bad.asg"
    bad.write_bytes(b"not a graph\n")
    assert cli.main(["decide-deg", "--in", str(bad)]) == 2
    schedule = tmp_path / "k.txt"
    schedule.write_text("5000 13 7\n")
    assert cli.main(["decide-qk", "--n", "200", "--schedule", str(schedule)]) == 2


def test_simulate_does_not_depend_on_jobs(capsys):
    argv = ["simulate", "--experiment", "prob_a", "--n", "200", "--trials", "8", "--seed", "3"]
    _, one = run(capsys, *argv, "--jobs", "1")
    _, two = run(capsys, *argv, "--jobs", "2")
    one.pop("elapsed_s")
    two.pop("elapsed_s")
    assert one == two


def test_simulate_csv(capsys):
    code, out = run(capsys, "simulate", "--experiment", "prob_a", "--n", "200", "--trials", "4", "--csv")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.split(",") == cli.CSV_FIELDS
    assert row.split(",")[0] == "prob_a"


def test_simulate_echoes_code_lengths(capsys):
    code, doc = run(capsys, "simulate", "--experiment", "prob_a", "--n", "500", "--trials", "4")
    assert code == 0
    assert list(doc)[:3] == ["experiment", "n", "k"]
    assert list(doc)[-2:] == ["z", "config"]
    assert doc["config"]["down_len"] == doc["config"]["up_len"] == 12
