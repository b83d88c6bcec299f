"""Shared pytest configuration: end-of-run acceptance summary."""

ACCEPTANCE_RESULTS = []


def record_acceptance(result):
    """Called by the acceptance tests so the summary hook can report."""
    ACCEPTANCE_RESULTS.append(result)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(ACCEPTANCE_RESULTS, key=lambda r: r.number):
        verdict = "PASS" if r.passed else "FAIL"
        terminalreporter.write_line(
            f"[{r.number:2d}] {r.name:<24} {verdict}"
            f"  ({r.runtime_seconds:.1f}s)")
