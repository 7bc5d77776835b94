from pathlib import Path

import pytest

from rdfexchange.textio import parse_instance, parse_setting

FIXTURES = Path(__file__).parent / "fixtures"


def load_setting(name: str):
    return parse_setting((FIXTURES / name).read_text(), name)


def load_instance(name: str, s):
    return parse_instance((FIXTURES / name).read_text(), s.source, name)


@pytest.fixture
def bug():
    s = load_setting("bug.setting")
    return s, load_instance("bug.inst", s)
