from __future__ import annotations

import random
from pathlib import Path

import pytest

from catutil import Dataset

FIXTURES = Path(__file__).parent / "fixtures"

D1_ROWS = [("a",), ("a",), ("b",), ("b",)]
D1_IDS = ["i1", "i2", "i3", "i4"]

D2_ROWS = [("green",), ("brown",), ("blue",)]
D2_WEIGHTS = ["0.4", "0.5", "0.1"]

# A splits 4/4, B splits into 4 pairs, C is distinct for every item
D3_ROWS = [
    ("a1", "b1", "c1"),
    ("a1", "b1", "c2"),
    ("a1", "b2", "c3"),
    ("a1", "b2", "c4"),
    ("a2", "b3", "c5"),
    ("a2", "b3", "c6"),
    ("a2", "b4", "c7"),
    ("a2", "b4", "c8"),
]


def make_d1() -> Dataset:
    return Dataset.from_rows(["color"], D1_ROWS, D1_IDS)


def make_d2() -> Dataset:
    return Dataset.from_rows(["eye-color"], D2_ROWS, ["green", "brown", "blue"], D2_WEIGHTS)


def make_d3() -> Dataset:
    return Dataset.from_rows(["A", "B", "C"], D3_ROWS, [f"x{i}" for i in range(8)])


@pytest.fixture
def d1():
    return make_d1()


@pytest.fixture
def d2():
    return make_d2()


@pytest.fixture
def d3():
    return make_d3()


def random_rows(rng: random.Random, n_items: int, n_dims: int, n_values: int):
    return [tuple(f"v{rng.randrange(n_values)}" for _ in range(n_dims)) for _ in range(n_items)]


def dataset_of(rows, weights=None) -> Dataset:
    names = [f"d{j}" for j in range(len(rows[0]))]
    return Dataset.from_rows(names, rows, None, weights)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
