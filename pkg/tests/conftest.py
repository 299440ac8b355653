"""Shared test plumbing: the acceptance-criteria result report.

Each acceptance test records a PASS/FAIL verdict here; the terminal summary
prints one line per criterion after the run so the verdicts are visible even
under pytest's output capture.
"""

ACCEPTANCE_RESULTS = {}


def record_acceptance(n, ok):
    ACCEPTANCE_RESULTS[n] = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {n}: {ACCEPTANCE_RESULTS[n]}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"ACCEPTANCE {n}: {ACCEPTANCE_RESULTS[n]}")
