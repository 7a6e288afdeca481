import functools
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hypothesis import settings

from tropicore.library import example

settings.register_profile("tropicore", max_examples=40, deadline=None)
settings.load_profile("tropicore")

EXAMPLES_DIR = os.path.join(os.path.dirname(__file__), "..", "examples")


@functools.lru_cache(maxsize=None)
def space(name):
    """Bundled examples are immutable once built; share them across tests."""
    return example(name)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
