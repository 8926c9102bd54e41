import pytest

from shapemine import kernels

BACKENDS = ["python"] + (["cython"] if kernels.compiled is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "details": []})
    entry["ok"] = entry["ok"] and report.passed
    entry["details"] += [str(v) for k, v in item.user_properties if k == "detail"]
    if report.failed and getattr(report.longrepr, "reprcrash", None):
        entry["details"].append(report.longrepr.reprcrash.message.splitlines()[0][:200])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        line = f"criterion {n} {'PASS' if e['ok'] else 'FAIL'}: {e['title']}"
        details = list(dict.fromkeys(e["details"]))
        if details:
            line += " [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)
