def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance report")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)
