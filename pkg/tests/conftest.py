"""Shared fixtures plus the acceptance-criteria summary hook.

The planted fixture is a synthetic retrieval setup small enough to reason
about by hand: 20 queries, 50 candidates each, with 3 known-relevant
passages per query whose texts repeat the query's distinctive token.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import pytest

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        _ACCEPTANCE_RESULTS[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _ACCEPTANCE_RESULTS.items():
        name = nodeid.split("::")[-1]
        label = {"passed": "PASS", "failed": "FAIL",
                 "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{label}: {name}")


@dataclass(frozen=True)
class PlantedFixture:
    """Paths and in-memory views of the synthetic retrieval setup."""

    root: object
    queries_path: str
    candidates_path: str
    qrels_path: str
    query_ids: tuple[str, ...]
    relevant: dict[str, tuple[str, ...]]
    candidate_order: dict[str, tuple[str, ...]]


def build_planted(root) -> PlantedFixture:
    """Write the planted 20x50 retrieval fixture under ``root``."""
    rng = random.Random(11)
    query_ids = tuple(f"q{i:02d}" for i in range(1, 21))
    relevant: dict[str, tuple[str, ...]] = {}
    candidate_order: dict[str, tuple[str, ...]] = {}
    queries_path = str(root / "queries.tsv")
    candidates_path = str(root / "candidates.tsv")
    qrels_path = str(root / "qrels.tsv")
    with open(queries_path, "w", encoding="utf-8") as qf, \
         open(candidates_path, "w", encoding="utf-8") as cf, \
         open(qrels_path, "w", encoding="utf-8") as jf:
        for i, qid in enumerate(query_ids, start=1):
            query_text = f"unique{i:02d} shared filler words"
            qf.write(f"{qid}\t{query_text}\n")
            pids = [f"p{i:02d}_{j:02d}" for j in range(50)]
            rel = (pids[7], pids[23], pids[41])
            relevant[qid] = rel
            grades = {rel[0]: 1, rel[1]: 2, rel[2]: 1}
            order = pids[:]
            rng.shuffle(order)
            candidate_order[qid] = tuple(order)
            for pid in order:
                if pid in grades:
                    text = f"about unique{i:02d} topic passage {pid}"
                else:
                    text = f"unrelated background passage {pid}"
                cf.write(f"{qid}\t{pid}\t{query_text}\t{text}\n")
            for pid in sorted(grades):
                jf.write(f"{qid} 0 {pid} {grades[pid]}\n")
    return PlantedFixture(root, queries_path, candidates_path, qrels_path,
                          query_ids, relevant, candidate_order)


@pytest.fixture(scope="session")
def planted(tmp_path_factory) -> PlantedFixture:
    return build_planted(tmp_path_factory.mktemp("planted"))
