import sys
import time


def pytest_sessionstart(session):
    session.config._suite_t0 = time.monotonic()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # One line per headline property, collected while test_acceptance ran.
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance checklist")
        for line in lines:
            terminalreporter.write_line(line)


def pytest_sessionfinish(session, exitstatus):
    t0 = getattr(session.config, "_suite_t0", None)
    if t0 is not None:
        print(f"\nsuite wall time: {time.monotonic() - t0:.1f} s")
