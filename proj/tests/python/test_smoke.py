import math

import pytest

import verifai


def test_tokenize_and_normalize():
    assert verifai.tokenize("Stomp the Yard!") == ["stomp", "the", "yard"]
    assert verifai.normalize_value("  Mary JONES ") == "mary jones"
    assert verifai.normalize_value("Cafe\u0301") == "caf\u00e9"


def test_embed_text_is_unit_length():
    v = verifai.embed_text("red fox")
    assert len(v) == 256
    assert math.isclose(sum(x * x for x in v), 1.0, rel_tol=1e-12)
    assert verifai.embed_text("red fox") == v


def test_maxsim_self_match():
    text = "meagan good plays april"
    assert math.isclose(verifai.maxsim_score(text, text), 4.0, rel_tol=1e-12)
    assert verifai.maxsim_score(text, "") == 0.0


def test_content_index_search():
    idx = verifai.ContentIndex.build([("d1", "the red fox"), ("d2", "red red fox jumps"), ("d3", "blue sky")])
    hits = idx.search("red fox", 10)
    assert [h[0] for h in hits] == ["d2", "d1"]
    assert hits[0][1] > hits[1][1] > 0
    assert idx.doc_count == 3


def test_parse_verdict():
    assert verifai.parse_verdict("Refuted. The table shows 22 teams.") == ("Refuted", "The table shows 22 teams.")
    with pytest.raises(verifai.ParseError):
        verifai.parse_verdict("I cannot determine this.")


def test_completion_prompt():
    p = verifai.render_completion_prompt("t", ["a", "b"], [["1", "NaN"]])
    assert p == "Question:\nt\na\tb\n1\tNaN\nPlease fill the missing values, annotated by NaN"
    with pytest.raises(verifai.ContractError):
        verifai.render_completion_prompt("t", ["a"], [["1"]])


def test_serialize_object():
    g = verifai.imputed_tuple("g1", "elections", ["election", "incumbent"], ["Ohio 1", "John Smith"], ["election"],
                              "incumbent")
    assert verifai.serialize_object(g) == "election: Ohio 1 ; incumbent: John Smith"


def test_end_to_end(tmp_path):
    spec = {"seed": 3, "n_tables": 8, "rows_per_table": 4, "n_objects": 6, "n_claims": 0, "corruption_rate": 0.0}
    verifai.write_benchmark(spec, tmp_path / "bench")
    lake = tmp_path / "bench" / "lake"
    summary = verifai.index_lake(str(lake), str(lake / ".index"))
    assert '"instances"' in summary

    engine = verifai.Engine(lake, log_path=tmp_path / "lineage.jsonl")
    assert len(engine) > 0
    import json

    first = json.loads((tmp_path / "bench" / "objects.jsonl").read_text().splitlines()[0])
    report = engine.verify(first)
    assert report["aggregate"] == "Verified"
    assert report["lineage_id"] == 1

    listed = verifai.list_lineage(tmp_path / "lineage.jsonl")
    assert [s["lineage_id"] for s in listed] == [1]
    assert verifai.load_lineage(tmp_path / "lineage.jsonl", 1)["aggregate"] == "Verified"
    with pytest.raises(verifai.NotFoundError):
        verifai.load_lineage(tmp_path / "lineage.jsonl", 7)


def test_run_benchmark_rows():
    rows = verifai.run_benchmark({"seed": 4, "n_tables": 10, "rows_per_table": 5, "n_objects": 10})
    recall = [r for r in rows if r["metric"] == "recall" and r["retrieved"] == "tuple"]
    assert recall and recall[0]["value"] >= 0.9
    assert all(0.0 <= r["value"] <= 1.0 for r in rows)


def test_invalid_object_is_rejected(tmp_path):
    with pytest.raises(ValueError):
        verifai.serialize_object({"object_id": "x"})
