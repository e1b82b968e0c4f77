import pathlib

import pytest

from deomod.lingrep import ParsedSentence, Token

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def build_sentence(sentence_id: str, rows, text=None) -> ParsedSentence:
    """rows: (surface, pos, head, deprel) with 0-based heads; the root
    token points at itself."""
    tokens = [
        Token(index=i, surface=s, pos=p, head=h, deprel=d)
        for i, (s, p, h, d) in enumerate(rows)
    ]
    return ParsedSentence(sentence_id=sentence_id, tokens=tokens, text=text)


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES
