import numpy as np
import pytest

from curveconf.dataset import Dataset, ModelSpec, OfficeRecord
from curveconf.synth import DgpParams, generate

ACCEPTANCE_LINES = []


def record_acceptance(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_data():
    return generate(DgpParams())


@pytest.fixture
def quadratic_spec():
    return ModelSpec()


@pytest.fixture
def linear_spec():
    return ModelSpec(quadratic=False)


def make_dataset(turnover, performance, absenteeism=None, mean_age=None, region=None):
    n = len(turnover)
    absenteeism = absenteeism if absenteeism is not None else [3.0] * n
    mean_age = mean_age if mean_age is not None else [30.0] * n
    region = region if region is not None else [(i % 3) + 1 for i in range(n)]
    return Dataset(
        tuple(
            OfficeRecord(f"T{i}", float(performance[i]), float(turnover[i]), float(absenteeism[i]),
                         float(mean_age[i]), int(region[i]))
            for i in range(n)
        )
    )


def random_dataset(rng, n=110):
    return make_dataset(
        rng.uniform(0, 30, n),
        rng.normal(50_000, 20_000, n),
        rng.uniform(0, 8, n),
        rng.uniform(20, 45, n),
        rng.integers(1, 4, n),
    )
