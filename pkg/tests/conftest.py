import numpy as np
import pytest

from wordassoc.embedding_store import EmbeddingSet


def brute_force_counts(docs, window):
    """Independent sliding-window enumerator: plain double loop per document."""
    counts = {}
    for doc in docs:
        for i, a in enumerate(doc):
            for j, b in enumerate(doc):
                if i != j and abs(i - j) <= window:
                    counts[a, b] = counts.get((a, b), 0) + 1
    return counts


@pytest.fixture
def identity_set():
    return EmbeddingSet.from_dict({"a": [1.0, 0.0], "b": [0.0, 1.0]})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for the terminal summary, then assert."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(criterion, passed, detail=""):
        lines.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}" + (f": {detail}" if detail else ""))
        assert passed, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
