def pytest_terminal_summary(terminalreporter):
    """Collect the per-criterion lines recorded by the acceptance tests."""
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            for key, value in getattr(rep, "user_properties", ()):
                if key == "acceptance" and getattr(rep, "when", "call") == "call":
                    lines.append(value)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
