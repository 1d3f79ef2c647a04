import pytest

from palmdiv import build_encoding, dfs, gen_grid, preprocess_meta

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])


@pytest.fixture
def acceptance(request):
    """Record the PASS/FAIL line of one acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE]

    def record(number: int, ok: bool, text: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        lines[number] = line
        print(line)

    return record


@pytest.fixture(scope="session")
def grid3_single():
    """3x3 grid as a single mini piece, DFS from 1, meta ready."""
    enc = build_encoding(gen_grid(3, 3), r=9, r_tilde=9)
    dfs(enc, 1)
    preprocess_meta(enc)
    return enc


@pytest.fixture(scope="session")
def grid16():
    enc = build_encoding(gen_grid(16, 16))
    dfs(enc, 1)
    preprocess_meta(enc)
    return enc
