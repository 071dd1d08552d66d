import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import hypothesis.strategies as st

from cwcsim.terms import Atom, Compartment, Term

MODELS_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "models")
DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def model_path(name: str) -> str:
    return os.path.abspath(os.path.join(MODELS_DIR, name))


def model_text(name: str) -> str:
    with open(model_path(name), encoding="utf-8") as fh:
        return fh.read()


# one "PASS: ..."/"FAIL: ..." line per acceptance criterion, shown after the run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


atoms = st.builds(Atom, st.sampled_from(["a", "b", "c", "d"]))


def _simple_terms(depth: int):
    if depth <= 0:
        return atoms
    comp = st.builds(
        lambda label, wrap, content: Compartment(
            label, Term((a, 1) for a in wrap), content
        ),
        st.sampled_from(["l1", "l2"]),
        st.lists(atoms, max_size=2),
        ground_terms(depth - 1),
    )
    return st.one_of(atoms, comp)


def ground_terms(depth: int = 3, width: int = 6):
    """Random ground terms up to the given nesting depth and width."""
    return st.lists(
        st.tuples(_simple_terms(depth), st.integers(min_value=1, max_value=3)),
        max_size=width,
    ).map(Term)
