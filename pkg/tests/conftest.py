from pathlib import Path

import pytest

from answerability import interchange
from answerability.dataset import SplitSpec, build_dataset

REPO_ROOT = Path(__file__).resolve().parent.parent
TOY_DIR = REPO_ROOT / "fixtures" / "toy"

# SplitSpec matching fixtures/toy/pipeline.toml.
TOY_SPLIT = SplitSpec(train_fraction=0.5, validation_fraction_of_train=0.34, seed=7)


@pytest.fixture(scope="session")
def toy_corpus_path():
    return TOY_DIR / "corpus.jsonl"


@pytest.fixture(scope="session")
def toy_corpus(toy_corpus_path):
    return interchange.load_corpus(toy_corpus_path)


@pytest.fixture(scope="session")
def toy_built(toy_corpus):
    return build_dataset(toy_corpus, TOY_SPLIT, n=3)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            if outcome != "skipped" and getattr(rep, "when", "call") != "call":
                continue
            lines.append((nodeid.split("::")[-1], outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{outcome:<8} {name}")
