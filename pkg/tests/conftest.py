import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from alignverify.automaton import Automaton  # noqa: E402

# products assert finality and the projection condition on every transition in test runs
Automaton.check_invariants = True


@pytest.fixture(scope="session")
def corpus_dir():
    return Path(__file__).resolve().parents[1] / "corpus"
