"""Loads the small fixture lexicon and replay backend the demos run on."""

from pathlib import Path

from mnemo.config import load_config
from mnemo.gateway import Gateway, ReplayBackend
from mnemo.phonetics import default_pronouncer
from mnemo.pipeline import build_lexicon

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"


def setup():
    cfg = load_config(str(FIXTURES / "mnemo.toml"), env={})
    gateway = Gateway(ReplayBackend(FIXTURES / "replay"))
    return build_lexicon(cfg), default_pronouncer(), gateway
