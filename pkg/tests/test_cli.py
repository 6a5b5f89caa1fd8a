import csv
import io
import json

import numpy as np
import pytest

from builders import (
    CLOSED_LOOP_CORPUS,
    analogy_world,
    closed_loop_embeddings,
    footnote_embeddings,
    write_embeddings,
    write_lines,
)
from wordassoc.cli import main
from wordassoc.embedding_store import EmbeddingSet, load_embeddings
from wordassoc.relations import RelationVector, scalar_projection


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    return json.loads(lines[0][len("# config: "):]), list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


@pytest.fixture
def toy(tmp_path):
    emb = EmbeddingSet.from_dict({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [0.3, -2.0]})
    return write_embeddings(tmp_path / "emb.txt", emb)


def test_ripa_delegates_to_scalar_projection(tmp_path, toy):
    pairs = write_lines(tmp_path / "p.tsv", ["a\tb"])
    out = tmp_path / "ripa.csv"
    assert main(["ripa", "--embeddings", str(toy), "--pairs", str(pairs), "--out", str(out)]) == 0
    config, rows = read_csv(out)
    assert config["subcommand"] == "ripa" and config["seed"] == 0
    b = RelationVector(np.array([1.0, -1.0]) / np.sqrt(2))
    emb = load_embeddings(toy)
    for row in rows:
        assert float(row["ripa"]) == pytest.approx(scalar_projection(emb[row["word"]], b), abs=1e-15)


def test_ripa_missing_pair_token(tmp_path, toy, capsys):
    pairs = write_lines(tmp_path / "p.tsv", ["a\tghost"])
    assert main(["ripa", "--embeddings", str(toy), "--pairs", str(pairs)]) == 1
    assert "'ghost'" in capsys.readouterr().err


def test_missing_file_is_input_error(tmp_path, capsys):
    assert main(["ripa", "--embeddings", str(tmp_path / "nope.txt")]) == 1


def test_ripa_default_pairs(tmp_path, rng):
    emb = write_embeddings(tmp_path / "e.txt", footnote_embeddings(rng, 5, 6))
    out = tmp_path / "r.csv"
    assert main(["ripa", "--embeddings", str(emb), "--out", str(out)]) == 0
    assert len(read_csv(out)[1]) == 25


def weat_files(tmp_path, vectors):
    emb = write_embeddings(tmp_path / "w.txt", EmbeddingSet.from_dict(vectors))
    args = ["weat", "--embeddings", str(emb)]
    for name, words in (("targets1", ["door"]), ("targets2", ["curtain"]), ("attrs1", ["masculine"]), ("attrs2", ["feminine"])):
        args += [f"--{name}", str(write_lines(tmp_path / f"{name}.txt", words))]
    return args


@pytest.mark.parametrize("sign", [1, -1])
def test_weat_singleton_table_pattern(tmp_path, capsys, sign):
    vecs = {
        "door": [1.0, sign * 0.2, 0.1],
        "curtain": [1.0, -sign * 0.2, 0.3],
        "masculine": [0.5, 1.0, 0.0],
        "feminine": [0.5, -1.0, 0.0],
    }
    assert main(weat_files(tmp_path, vecs)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["convention"] == "strictly-greater"
    assert report["n_partitions"] == 2
    if sign > 0:
        assert report["statistic"] > 0 and report["effect_size"] == 2.0 and report["p_value"] == 0.0
    else:
        assert report["statistic"] < 0 and report["effect_size"] == -2.0 and report["p_value"] == 0.5


def test_weat_unequal_targets(tmp_path, capsys):
    vecs = {w: list(np.random.default_rng(len(w)).standard_normal(3)) for w in ["door", "curtain", "masculine", "feminine", "x"]}
    args = weat_files(tmp_path, vecs)
    write_lines(tmp_path / "targets1.txt", ["door", "x"])
    assert main(args) == 1
    assert "unequal" in capsys.readouterr().err


def test_corpus_stats_and_breakdown_from_table(tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text(CLOSED_LOOP_CORPUS)
    table = tmp_path / "t.tsv"
    assert main(["corpus-stats", "--corpus", str(corpus), "--window", "1", "--out", str(table)]) == 0
    assert table.read_text().splitlines()[0] == "# window=1\ttotal_events=30"
    emb = write_embeddings(tmp_path / "e.txt", closed_loop_embeddings())
    out = tmp_path / "b.csv"
    args = [
        "breakdown", "--embeddings", str(emb), "--cooc-table", str(table),
        "--pairs", str(write_lines(tmp_path / "p.tsv", ["x\ty"])),
        "--categories", f"neutral={write_lines(tmp_path / 'n.txt', ['w', 'z', 'ghost'])}",
        "--bootstrap", "200", "--out", str(out),
    ]
    assert main(args) == 0
    _, rows = read_csv(out)
    by_word = {r["word"]: r for r in rows}
    assert abs(float(by_word["w"]["delta_g"])) <= 1e-9
    summary = json.loads((tmp_path / "b.csv.summary.json").read_text())
    cat = summary["categories"]["neutral"]
    assert cat["n_oov"] == 1 and cat["oov"] == ["ghost"]
    assert "artifact convention" in summary["significance_test"]


def test_breakdown_flags_insufficient_counts(tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text(CLOSED_LOOP_CORPUS)
    vecs = closed_loop_embeddings()
    emb = EmbeddingSet.from_dict({**{w: vecs[w] for w in vecs.vocab}, "lonely": [0.1, 0.1, 0.1]})
    out = tmp_path / "b.csv"
    args = [
        "breakdown", "--embeddings", str(write_embeddings(tmp_path / "e.txt", emb)),
        "--corpus", str(corpus), "--window", "1",
        "--pairs", str(write_lines(tmp_path / "p.tsv", ["x\ty"])),
        "--categories", f"neutral={write_lines(tmp_path / 'n.txt', ['w', 'lonely'])}",
        "--bootstrap", "100", "--out", str(out),
    ]
    assert main(args) == 0
    rows = {r["word"]: r for r in read_csv(out)[1]}
    assert rows["lonely"]["flags"] == "insufficient counts" and rows["lonely"]["delta_g"] == ""
    cat = json.loads((tmp_path / "b.csv.summary.json").read_text())["categories"]["neutral"]
    assert cat["n_used"] == 1 and cat["n_insufficient_counts"] == 1


def test_breakdown_requires_out(tmp_path, toy):
    with pytest.raises(SystemExit):
        main(["breakdown", "--embeddings", str(toy), "--categories", "a=b"])


def test_debias_protect_all_is_identity(tmp_path, rng):
    emb = footnote_embeddings(rng, 10, 6)
    src = write_embeddings(tmp_path / "e.txt", emb)
    protected = write_lines(tmp_path / "prot.txt", emb.vocab.words)
    out = tmp_path / "d.txt"
    assert main(["debias", "--embeddings", str(src), "--protected", str(protected), "--out", str(out)]) == 0
    np.testing.assert_array_equal(load_embeddings(out).matrix, emb.matrix)
    assert out.read_bytes() == src.read_bytes()


def test_debias_report_span_residual(tmp_path, rng):
    src = write_embeddings(tmp_path / "e.txt", footnote_embeddings(rng, 30, 12))
    out = tmp_path / "d.txt"
    assert main(["debias", "--embeddings", str(src), "--out", str(out)]) == 0
    report = json.loads((tmp_path / "d.txt.report.json").read_text())
    assert report["subspace_rank"] == 10 and report["n_debiased"] == 30
    assert report["max_orthogonality_residual"] <= 1e-10


def test_debias_unsupervised_selector(tmp_path, rng):
    emb, quads, gender, biased, _ = analogy_world(rng, n_quads=2)
    src = write_embeddings(tmp_path / "e.txt", emb)
    out = tmp_path / "d.txt"
    args = [
        "debias", "--embeddings", str(src), "--selector", "unsupervised",
        "--pairs", str(write_lines(tmp_path / "g.tsv", [f"{a}\t{b}" for a, b in gender])),
        "--biased-pairs", str(write_lines(tmp_path / "b.tsv", [f"{a}\t{b}" for a, b in biased])),
        "--out", str(out),
    ]
    assert main(args) == 0
    report = json.loads((tmp_path / "d.txt.report.json").read_text())
    protected = set(report["protected"])
    assert {"king0", "queen0", "king1", "queen1"} <= protected
    assert not protected & {"doctor0", "nurse0", "doctor1", "nurse1"}


def test_analogy_eval_identity(tmp_path, rng):
    emb, quads, gender, _, _ = analogy_world(rng, n_quads=3)
    src = write_embeddings(tmp_path / "e.txt", emb)
    analogies = write_lines(tmp_path / "a.tsv", ["\t".join(q) for q in quads])
    pairs = write_lines(tmp_path / "g.tsv", [f"{a}\t{b}" for a, b in gender])
    out = tmp_path / "curves.csv"
    args = ["analogy-eval", "--embeddings", str(src), "--debiased", str(src), "--analogies", str(analogies),
            "--pairs", str(pairs), "--out", str(out)]
    assert main(args) == 0
    _, rows = read_csv(out)
    assert len(rows) == 42
    assert all(r["count_before"] == r["count_after"] for r in rows)
    summary = json.loads((tmp_path / "curves.csv.summary.json").read_text())
    assert summary["preserved_fraction_at_0.5"] == {"appropriate": 1.0, "biased": 1.0}


def test_verify_theorems_pass_and_tamper(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify-theorems", "--instances", "20", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True
    assert main(["verify-theorems", "--instances", "10", "--lambda-grid", "0.5", "1", "4", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert {i["lambda"] for i in report["debiasing_theorem"]["instances"]} == {0.5, 1.0, 4.0}
    assert main(["verify-theorems", "--instances", "5", "--tamper-projection", "--out", str(out)]) == 2
    assert json.loads(out.read_text())["passed"] is False
