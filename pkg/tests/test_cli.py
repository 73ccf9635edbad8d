import json
from pathlib import Path

import pytest

from sentmark.cli import main, read_jsonl, write_jsonl
from sentmark.toylm import make_corpus


def write_corpus(path: Path, n: int, seed: int = 31):
    write_jsonl(path, [{"doc_id": f"c-{i}", "text": t} for i, t in enumerate(make_corpus(n, seed))])


@pytest.fixture()
def workspace(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    write_corpus(corpus, 150)
    return tmp_path


def run(*argv) -> int:
    return main([str(a) for a in argv])


class TestFit:
    def test_fit_kmeans_succeeds(self, workspace, capsys):
        out = workspace / "part.json"
        rc = run("fit", "--corpus", workspace / "corpus.jsonl", "--k", "8", "--seed", "1",
                 "--out", out)
        assert rc == 0
        assert out.exists()
        assert "inertia" in capsys.readouterr().out

    def test_fit_lsh_succeeds(self, workspace):
        out = workspace / "lsh.json"
        assert run("fit", "--mode", "lsh", "--d", "3", "--seed", "1", "--out", out) == 0
        obj = json.loads(out.read_text())
        assert obj["type"] == "lsh" and obj["d"] == 3

    def test_empty_corpus_is_data_error(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        rc = run("fit", "--corpus", empty, "--k", "8", "--out", tmp_path / "p.json")
        assert rc == 2  # no sentences -> insufficient data

    def test_missing_corpus_is_io_error(self, tmp_path):
        rc = run("fit", "--corpus", tmp_path / "nope.jsonl", "--k", "8",
                 "--out", tmp_path / "p.json")
        assert rc == 3

    def test_k_exceeding_sentences_is_config_error(self, tmp_path):
        corpus = tmp_path / "tiny.jsonl"
        write_jsonl(corpus, [{"text": "One sentence. Two sentences."}])
        rc = run("fit", "--corpus", corpus, "--k", "50", "--out", tmp_path / "p.json")
        assert rc == 2

    def test_fit_eight_thousand_paragraph_corpus(self, tmp_path, capsys):
        # the documented operating point: K=8 over an 8k-paragraph corpus
        corpus = tmp_path / "big.jsonl"
        write_corpus(corpus, 8000, seed=202)
        out = tmp_path / "part.json"
        assert run("fit", "--corpus", corpus, "--k", "8", "--seed", "3", "--out", out) == 0
        assert "K=8" in capsys.readouterr().out
        assert json.loads(out.read_text())["k"] == 8


class TestPipeline:
    def _pipeline(self, base: Path, seed: int):
        corpus = base / "corpus.jsonl"
        if not corpus.exists():
            write_corpus(corpus, 150)
        part = base / "part.json"
        docs = base / "docs.jsonl"
        traces = base / "traces.jsonl"
        attacked = base / "attacked.jsonl"
        det_m = base / "det_machine.jsonl"
        det_h = base / "det_human.jsonl"
        human = base / "human.jsonl"
        report = base / "report.json"
        roc = base / "roc.csv"

        assert run("fit", "--corpus", corpus, "--k", "8", "--seed", seed, "--out", part) == 0
        assert run("generate", "--partition", part, "--seed", seed, "--num-docs", "50",
                   "--sentences", "8", "--out", docs, "--traces", traces) == 0
        assert run("attack", "--in", docs, "--method", "lexical", "--strength", "0.2",
                   "--seed", seed, "--out", attacked,
                   "--similarities", base / "sims.jsonl") == 0
        # human side: fresh unwatermarked corpus documents of ~9 sentences
        from sentmark.sentences import split_sentences

        human_docs = []
        paras = make_corpus(200, seed=9090)
        sents = [s for p in paras for s in split_sentences(p)]
        for i in range(50):
            human_docs.append({"doc_id": f"h-{i}", "text": " ".join(sents[i * 9:(i + 1) * 9])})
        write_jsonl(human, human_docs)
        assert run("detect", "--in", attacked, "--partition", part, "--seed", seed,
                   "--out", det_m) == 0
        assert run("detect", "--in", human, "--partition", part, "--seed", seed,
                   "--out", det_h) == 0
        assert run("evaluate", "--machine", det_m, "--human", det_h,
                   "--machine-docs", docs, "--traces", traces, "--sem-ent-k", "8",
                   "--seed", seed, "--out", report, "--roc-csv", roc) == 0
        return report, det_m, docs

    def test_full_pipeline_and_report(self, tmp_path):
        report_path, det_path, docs_path = self._pipeline(tmp_path, seed=5)
        report = json.loads(report_path.read_text())
        assert report["auc"] >= 0.95
        assert set(report["tp_at_fpr"]) == {"0.01", "0.05"}
        assert report["ppl"] is None and report["bertscore"] is None
        assert report["ent3_bits"] > 0
        assert report["efficiency"]["mean_candidates_per_sentence"] >= 1.0
        rows = read_jsonl(det_path)
        assert all(set(r) == {"doc_id", "s_t", "s_v", "z", "valid_flags"} for r in rows)
        assert all(len(r["valid_flags"]) == r["s_t"] for r in rows)

    def test_rerun_is_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        a.mkdir()
        b.mkdir()
        report_a, det_a, docs_a = self._pipeline(a, seed=7)
        report_b, det_b, docs_b = self._pipeline(b, seed=7)
        assert report_a.read_bytes() == report_b.read_bytes()
        assert det_a.read_bytes() == det_b.read_bytes()
        assert docs_a.read_bytes() == docs_b.read_bytes()


class TestErrors:
    def test_detect_dimension_mismatch_is_contract_error(self, tmp_path):
        part = tmp_path / "part.json"
        assert run("fit", "--mode", "lsh", "--d", "3", "--embedder", "toy:32:1",
                   "--out", part) == 0
        docs = tmp_path / "docs.jsonl"
        write_jsonl(docs, [{"doc_id": "d", "text": "Star comet. Orbit nebula."}])
        rc = run("detect", "--in", docs, "--partition", part, "--embedder", "toy:64:1",
                 "--out", tmp_path / "out.jsonl")
        assert rc == 4

    def test_corrupt_partition_is_contract_error(self, tmp_path):
        part = tmp_path / "part.json"
        part.write_text("{not json")
        docs = tmp_path / "docs.jsonl"
        write_jsonl(docs, [{"doc_id": "d", "text": "A b. C d."}])
        rc = run("detect", "--in", docs, "--partition", part, "--out", tmp_path / "o.jsonl")
        assert rc == 4

    def test_bad_gamma_is_config_error(self, tmp_path):
        part = tmp_path / "part.json"
        assert run("fit", "--mode", "lsh", "--d", "3", "--out", part) == 0
        docs = tmp_path / "docs.jsonl"
        write_jsonl(docs, [{"doc_id": "d", "text": "A b. C d."}])
        rc = run("detect", "--in", docs, "--partition", part, "--gamma", "1.5",
                 "--out", tmp_path / "o.jsonl")
        assert rc == 2

    def test_help_exits_zero(self, capsys):
        for cmd in ("fit", "generate", "attack", "detect", "evaluate", "selftest"):
            assert run(cmd, "--help") == 0
            assert "usage" in capsys.readouterr().out

    def test_unknown_command_nonzero(self):
        assert run("frobnicate") != 0


class TestConfigResolution:
    def test_config_file_supplies_defaults_and_flags_win(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# operating point\nmode = lsh\nd = 4\n")
        out = tmp_path / "p.json"
        assert run("fit", "--config", cfg, "--out", out) == 0
        assert json.loads(out.read_text())["d"] == 4
        # flag beats file
        out2 = tmp_path / "p2.json"
        assert run("fit", "--config", cfg, "--d", "2", "--out", out2) == 0
        assert json.loads(out2.read_text())["d"] == 2

    def test_env_overrides_file_but_not_flag(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode = lsh\nd = 4\n")
        monkeypatch.setenv("SENTMARK_D", "5")
        out = tmp_path / "p.json"
        assert run("fit", "--config", cfg, "--out", out) == 0
        assert json.loads(out.read_text())["d"] == 5
        out2 = tmp_path / "p2.json"
        assert run("fit", "--config", cfg, "--d", "2", "--out", out2) == 0
        assert json.loads(out2.read_text())["d"] == 2

    def test_selftest_command_passes(self, capsys):
        assert run("selftest") == 0
        out = capsys.readouterr().out
        assert "checks passed" in out
