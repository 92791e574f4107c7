import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get("NLSYM_EXTENDED"):
        return
    skip = pytest.mark.skip(reason="set NLSYM_EXTENDED=1 to run extended surveys")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


# ---------------------------------------------------------- acceptance report

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


class _Criterion:
    def __init__(self, results, key, title):
        self.results, self.key, self.title = results, key, title
        self.notes = []

    def note(self, text: str):
        self.notes.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = "; ".join(self.notes) if ok else f"{exc_type.__name__}: {exc}".splitlines()[0]
        self.results[self.key] = (ok, self.title, detail)
        print(f"criterion {self.key}: {'PASS' if ok else 'FAIL'}  {self.title}  {detail}")
        return False


@pytest.fixture
def criterion(request):
    results = request.config.stash[ACCEPTANCE]
    return lambda key, title: _Criterion(results, key, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(results):
        ok, title, detail = results[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
