import re

import pytest

# acceptance tests are named test_cNN_<what>; one summary line per criterion
_CRITERION = re.compile(r"test_c(\d\d)_")


def pytest_terminal_summary(terminalreporter):
    verdicts: dict[int, list[str]] = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" not in rep.nodeid or rep.when != "call" and outcome != "error":
                continue
            m = _CRITERION.search(rep.nodeid)
            if m:
                verdicts.setdefault(int(m.group(1)), []).append(outcome)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        outcomes = verdicts[n]
        ok = all(o == "passed" for o in outcomes)
        detail = f"{outcomes.count('passed')}/{len(outcomes)} checks passed"
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({detail})")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240601)
