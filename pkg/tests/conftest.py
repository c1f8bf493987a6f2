def pytest_terminal_summary(terminalreporter):
    lines = [
        value
        for rep in terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", [])
        if rep.when == "call"
        for key, value in rep.user_properties
        if key == "acceptance"
    ]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
