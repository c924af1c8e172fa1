import contextlib
import os
import random

import pytest
from hypothesis import HealthCheck, settings

from seqren.rules import DOWN, RuleInstance
from seqren.structure import print_structure, size

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# ---------------------------------------------------------------- affinity watch
#
# Every rule instance built while the tests run is inspected as it is created.
# A down-fragment step whose premise is larger than its conclusion is recorded;
# the acceptance suite and the session hook both fail on any record.

AFFINITY_BREAKS = []
_watch = {"on": True, "instances": 0}
_original_init = RuleInstance.__init__


def _watched_init(self, *args, **kwargs):
    _original_init(self, *args, **kwargs)
    if not _watch["on"]:
        return
    _watch["instances"] += 1
    if self.rule in DOWN and size(self.premise) > size(self.conclusion):
        AFFINITY_BREAKS.append(
            f"{self.rule}: {print_structure(self.conclusion)} <= {print_structure(self.premise)}"
        )


RuleInstance.__init__ = _watched_init


@contextlib.contextmanager
def affinity_unwatched():
    """For tests that build deliberately bogus steps."""
    _watch["on"] = False
    try:
        yield
    finally:
        _watch["on"] = True


def watched_instances() -> int:
    return _watch["instances"]


# ---------------------------------------------------------------- acceptance verdicts

VERDICTS = {}


def record_verdict(number: int, ok: bool, detail: str = "") -> None:
    VERDICTS[number] = (ok, detail)
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}"
    print(line + (f" ({detail})" if detail else ""))


def pytest_collection_modifyitems(items):
    # acceptance last, so the affinity verdict covers every other test
    items.sort(key=lambda it: it.nodeid.split("::")[0].endswith("test_acceptance.py"))


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS and not AFFINITY_BREAKS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        ok, detail = VERDICTS[n]
        terminalreporter.write_line(
            f"criterion {n}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        )
    if AFFINITY_BREAKS:
        terminalreporter.write_line(f"affinity breaks recorded: {len(AFFINITY_BREAKS)}")
        for line in AFFINITY_BREAKS[:10]:
            terminalreporter.write_line("  " + line)


def pytest_sessionfinish(session, exitstatus):
    if AFFINITY_BREAKS and session.exitstatus == 0:
        session.exitstatus = 1


@pytest.fixture
def rng():
    return random.Random(int(os.environ.get("SEQREN_SEED", "0")))
