"""Shared fixtures: corpora, trained checkpoints, clients, live server."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import pytest
from fastapi.testclient import TestClient

from rankserve.app import create_app
from rankserve.backends import StubBackend
from rankserve.training import TrainingConfig, train_paraphraser, train_scorer

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_service_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        _ACCEPTANCE_RESULTS[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("service acceptance criteria")
    for nodeid, outcome in _ACCEPTANCE_RESULTS.items():
        name = nodeid.split("::")[-1]
        label = {"passed": "PASS", "failed": "FAIL",
                 "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{label}: {name}")


@pytest.fixture(scope="session")
def stub_client():
    with TestClient(create_app(StubBackend())) as client:
        yield client


@dataclass(frozen=True)
class AlignedCorpus:
    source_path: str
    target_path: str
    size: int


def write_aligned_corpus(root, size: int) -> AlignedCorpus:
    source_path = str(root / "source.txt")
    target_path = str(root / "target.txt")
    with open(source_path, "w", encoding="utf-8") as s, \
         open(target_path, "w", encoding="utf-8") as t:
        for i in range(size):
            s.write(f"what is item number {i:03d}\n")
            t.write(f"define item number {i:03d} please\n")
    return AlignedCorpus(source_path, target_path, size)


@pytest.fixture(scope="session")
def para_corpus(tmp_path_factory) -> AlignedCorpus:
    return write_aligned_corpus(tmp_path_factory.mktemp("para"), 200)


@dataclass(frozen=True)
class LabeledCorpus:
    pairs_path: str
    queries_path: str
    collection_path: str
    keyword: str


def write_labeled_corpus(root, pairs: int = 50,
                         keyword: str = "zebra") -> LabeledCorpus:
    """Balanced keyword-separable set: positives all contain ``keyword``."""
    queries_path = str(root / "queries.tsv")
    collection_path = str(root / "collection.tsv")
    pairs_path = str(root / "pairs.tsv")
    with open(queries_path, "w", encoding="utf-8") as qf, \
         open(collection_path, "w", encoding="utf-8") as cf, \
         open(pairs_path, "w", encoding="utf-8") as pf:
        for i in range(pairs):
            qf.write(f"q{i:02d}\ttopic {i:02d} question words\n")
            cf.write(f"pos{i:02d}\tanswer mentioning {keyword} "
                     f"fact {i:02d}\n")
            cf.write(f"neg{i:02d}\tanswer mentioning plain fact {i:02d}\n")
            pf.write(f"q{i:02d}\tpos{i:02d}\t1\n")
            pf.write(f"q{i:02d}\tneg{i:02d}\t0\n")
    return LabeledCorpus(pairs_path, queries_path, collection_path, keyword)


@pytest.fixture(scope="session")
def scorer_corpus(tmp_path_factory) -> LabeledCorpus:
    return write_labeled_corpus(tmp_path_factory.mktemp("scorer"))


@pytest.fixture(scope="session")
def trained_paraphraser(para_corpus, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("ckpt") / "paraphraser.pt")
    result = train_paraphraser(para_corpus.source_path,
                               para_corpus.target_path, out,
                               TrainingConfig(seed=7))
    return result


@pytest.fixture(scope="session")
def trained_scorer(scorer_corpus, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("ckpt") / "scorer.pt")
    result = train_scorer(scorer_corpus.pairs_path,
                          scorer_corpus.queries_path,
                          scorer_corpus.collection_path, out,
                          TrainingConfig(seed=7))
    return result


def start_server(app):
    """Run the app under uvicorn on an ephemeral port; returns (url, stop)."""
    import uvicorn

    config = uvicorn.Config(app, host="127.0.0.1", port=0,
                            log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline or not thread.is_alive():
            raise RuntimeError("uvicorn did not start")
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]

    def stop():
        server.should_exit = True
        thread.join(timeout=10)

    return f"http://127.0.0.1:{port}", stop


@pytest.fixture(scope="module")
def stub_server_url():
    url, stop = start_server(create_app(StubBackend(), workers=4))
    yield url
    stop()
