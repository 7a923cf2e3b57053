import re

import pytest

_results: dict[str, list[tuple[str, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_(criterion|extended)_(\d+)", item.name)
    if m is None or not (rep.when == "call" or rep.failed):
        return
    key = f"{m.group(1).upper()} {int(m.group(2))}"
    _results.setdefault(key, []).append((item.name, "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance")

    def order(key):
        kind, n = key.split()
        return (kind != "CRITERION", int(n))

    for key in sorted(_results, key=order):
        states = [s for _, s in _results[key]]
        verdict = "PASS" if all(s == "PASS" for s in states) else "FAIL"
        label = " (non-gating)" if key.startswith("EXTENDED") else ""
        terminalreporter.write_line(f"{key}: {verdict}{label}")
