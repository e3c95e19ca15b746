from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


def corpus_paths(*subsets: str) -> list[Path]:
    """All fixture files, or those under the named subdirectories."""
    subsets = subsets or ("valid", "errors", "repair")
    out: list[Path] = []
    for subset in subsets:
        out.extend(sorted((FIXTURES / subset).glob("*.tml")))
    return out


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
