import json
import sys
from pathlib import Path

import pytest

import shortcoder

sys.path.insert(0, str(Path(__file__).parent))

CORPUS_PATH = Path(shortcoder.__file__).parent / "data" / "corpus.jsonl"


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return CORPUS_PATH


@pytest.fixture(scope="session")
def corpus_records() -> list[dict]:
    with open(CORPUS_PATH, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
