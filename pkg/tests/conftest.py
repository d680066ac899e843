"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    n = props["criterion"]
    status = "PASS" if report.passed else "FAIL"
    _RESULTS[n] = (status, props.get("title", ""), props.get("measured", ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, title, measured = _RESULTS[n]
        line = f"[{status}] #{n:<2d} {title}"
        if measured:
            line += f"  ({measured})"
        terminalreporter.write_line(line)
    passed = sum(s == "PASS" for s, _, _ in _RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(_RESULTS)} criteria passed")
