import json
from pathlib import Path as FsPath

import pytest

from simpledb_testgen.frontend import load_model
from simpledb_testgen.interpreter import TestInput
from simpledb_testgen.paths import Path

ROOT = FsPath(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = FsPath(__file__).resolve().parent / "golden"
CORPUS_FILES = sorted(CORPUS.glob("*.sdb"))


def load_corpus(name: str):
    return load_model((CORPUS / name).read_text())


@pytest.fixture(scope="session")
def example():
    return load_corpus("example.sdb")


@pytest.fixture(scope="session")
def worked_path():
    return Path.from_json(json.loads((GOLDEN / "worked_path.json").read_text()))


@pytest.fixture(scope="session")
def reference_input():
    return TestInput.from_json(json.loads((GOLDEN / "reference_input.json").read_text()))
