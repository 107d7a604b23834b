import re

import pytest

_results: dict[str, list[tuple[str, str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag): acceptance criterion id, e.g. '5b'")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    tag = mark.args[0]
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0][:160] if call.excinfo else ""
    number = re.match(r"\d+", tag).group()
    _results.setdefault(number, []).append((tag, "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results, key=int):
        parts = sorted(_results[number])
        status = "PASS" if all(s == "PASS" for _, s, _ in parts) else "FAIL"
        body = "; ".join(f"[{tag}] {s}: {d}" if len(parts) > 1 else d for tag, s, d in parts)
        tr.write_line(f"criterion {number:>2}: {status}  {body}")


@pytest.fixture
def detail(record_property):
    """Attach a one-line summary to the acceptance report."""
    return lambda text: record_property("detail", text)
