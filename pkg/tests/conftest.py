_criteria = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, label = props["criterion"]
    failed = report.failed
    if report.when == "call" or (failed and number not in _criteria):
        if report.when == "call" and report.skipped:
            status = "SKIP"
        elif failed:
            status = "FAIL"
        elif props.get("soft_miss"):
            status = "PASS (soft miss reported)"
        else:
            status = "PASS"
        _criteria[number] = (status, label, props.get("detail", ""))
    elif failed:
        _criteria[number] = ("FAIL", label, props.get("detail", f"{report.when} error"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, label, detail = _criteria[number]
        line = f"criterion {number:2d}: {status:<4} {label}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)
