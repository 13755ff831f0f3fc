"""Acceptance checks for the model service, one test per criterion."""

import math
import random
import string

from qxrank.cli import main as qxrank_main

from rankserve.app import ParaphraseResponse, ScoreResponse
from rankserve.stub import stub_probability


def test_protocol_conformance_and_interop_rankings(
        stub_client, stub_server_url, tmp_path):
    """Randomized stub responses are schema-valid with monotone beam
    log-likelihoods and in-range scores, and the retrieval pipeline ranks
    identically from the live service and the equivalent score file."""
    rng = random.Random(113)

    def text(max_words=10):
        return " ".join(
            "".join(rng.choice(string.ascii_lowercase)
                    for _ in range(rng.randrange(1, 8)))
            for _ in range(rng.randrange(1, max_words)))

    for _ in range(100):
        n = rng.randrange(1, 6)
        num_beams = rng.randrange(1, 6)
        response = stub_client.post("/paraphrase", json={
            "queries": [{"id": f"q{i}", "text": text()} for i in range(n)],
            "num_beams": num_beams})
        assert response.status_code == 200
        parsed = ParaphraseResponse.model_validate(response.json())
        for result in parsed.results:
            assert result.error is None and result.beams is not None
            assert 1 <= len(result.beams) <= num_beams
            lls = [beam.log_likelihood for beam in result.beams]
            assert all(ll <= 0 for ll in lls)
            assert all(a >= b for a, b in zip(lls, lls[1:]))
        response = stub_client.post("/score", json={
            "pairs": [{"id": str(i), "query": text(),
                       "passage": text(30)} for i in range(n)]})
        assert response.status_code == 200
        parsed = ScoreResponse.model_validate(response.json())
        assert [s.id for s in parsed.scores] == [str(i) for i in range(n)]
        assert all(0.0 <= s.probability <= 1.0 for s in parsed.scores)

    candidates_path = tmp_path / "candidates.tsv"
    scores_path = tmp_path / "scores.tsv"
    with open(candidates_path, "w", encoding="utf-8") as cf, \
         open(scores_path, "w", encoding="utf-8") as sf:
        for i in range(1, 4):
            qid = f"q{i:02d}"
            query_text = f"query number {i:02d}"
            for j in range(15):
                pid = f"p{i:02d}_{j:02d}"
                passage_text = f"candidate passage {j:02d} for {i:02d}"
                cf.write(f"{qid}\t{pid}\t{query_text}\t{passage_text}\n")
                probability = stub_probability(query_text, passage_text)
                sf.write(f"{qid}\t{pid}\t{probability:.6f}\n")
    remote_run = tmp_path / "remote.tsv"
    file_run = tmp_path / "file.tsv"
    assert qxrank_main(["rerank", "--candidates", str(candidates_path),
                        "--no-expansion", "--scorer",
                        f"remote:{stub_server_url}", "--out",
                        str(remote_run), "--tag", "stub"]) == 0
    assert qxrank_main(["rerank", "--candidates", str(candidates_path),
                        "--no-expansion", "--scorer",
                        f"file:{scores_path}", "--out",
                        str(file_run), "--tag", "stub"]) == 0
    assert remote_run.read_bytes() == file_run.read_bytes()


def test_training_smoke(trained_paraphraser, trained_scorer):
    """Paraphraser loss strictly decreases on the 200-pair corpus; the
    scorer starts near balanced-data loss and separates the keyword."""
    losses = trained_paraphraser.losses
    assert len(losses) >= 2
    assert all(later < earlier
               for earlier, later in zip(losses, losses[1:]))

    assert abs(trained_scorer.losses[0] - math.log(2)) <= 0.15
    assert trained_scorer.extra["accuracy"] > 0.9
