import json
import shutil

from optcert.corpus import corpus_dir, corpus_run, load_seeds


def test_shipped_corpus_matches_expectations():
    rep = corpus_run()
    bad = [r for r in rep["instances"] if not r["match"]]
    assert not bad and rep["exit_status"] == 0


def test_seeds_are_fixed():
    assert load_seeds() == [11, 23, 37, 41, 53, 67, 79, 97]


def test_mismatch_exits_one(tmp_path):
    src = corpus_dir() / "abs_min.json"
    data = json.loads(src.read_text())
    data["expected"] = {"fj-convex": "fails"}
    (tmp_path / "abs_min.json").write_text(json.dumps(data))
    rep = corpus_run("", tmp_path)
    assert rep["mismatches"] == 1 and rep["exit_status"] == 1


def test_missing_directory_exits_three(tmp_path):
    assert corpus_run("", tmp_path / "nowhere")["exit_status"] == 3


def test_filter_selects_subset(tmp_path):
    for name in ("abs_min", "kkt_bound"):
        shutil.copy(corpus_dir() / f"{name}.json", tmp_path)
    rep = corpus_run("kkt", tmp_path)
    assert {r["instance"] for r in rep["instances"]} == {"kkt_bound"}
