import pytest

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.module.__name__.endswith("test_acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        detail = getattr(item.function, "detail", "")
        _ACCEPTANCE.append((item.name, rep.passed, doc, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, doc, detail in _ACCEPTANCE:
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {doc}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
    passed = sum(ok for _, ok, _, _ in _ACCEPTANCE)
    terminalreporter.write_line(f"{passed}/{len(_ACCEPTANCE)} acceptance criteria passed")
