from pathlib import Path
from types import MappingProxyType

import numpy as np
import pytest

from mnemo.config import load_config
from mnemo.gateway import Gateway, ReplayBackend
from mnemo.lexicon import LexiconBundle
from mnemo.phonetics import default_pronouncer
from mnemo.pipeline import build_lexicon

FIXTURES = Path(__file__).parent / "fixtures"
REPLAY = FIXTURES / "replay"
CONFIG = FIXTURES / "mnemo.toml"


def make_bundle(imageability=None, aoa=None, embeddings=None, stopwords=("a", "the", "he", "to", "his", "on"),
                lemmas=None) -> LexiconBundle:
    """Small in-memory bundle for unit tests that need exact control."""
    emb = {w: np.asarray(v, dtype=float) for w, v in (embeddings or {}).items()}
    dim = len(next(iter(emb.values()))) if emb else 0
    return LexiconBundle(
        imageability_table=MappingProxyType(dict(imageability or {})),
        aoa_table=MappingProxyType(dict(aoa or {})),
        stopwords=frozenset(stopwords),
        lemmas=MappingProxyType(dict(lemmas or {})),
        embeddings=MappingProxyType(emb),
        dim=dim,
    )


@pytest.fixture(scope="session")
def cfg():
    return load_config(str(CONFIG), env={})


@pytest.fixture(scope="session")
def lex(cfg):
    return build_lexicon(cfg)


@pytest.fixture(scope="session")
def phon():
    return default_pronouncer()


@pytest.fixture
def replay():
    return ReplayBackend(REPLAY)


@pytest.fixture
def gateway(replay):
    return Gateway(replay, backoff=0)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): one acceptance criterion")


_ACCEPTANCE: list = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.user_properties and dict(report.user_properties).get("criterion")
    if name:
        _ACCEPTANCE.append((name, report.outcome))


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker:
        item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
