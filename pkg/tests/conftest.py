import numpy as np
import pytest

from deformable_bell import density, gamma


@pytest.fixture(scope="session")
def quantum():
    return density.make_quantum()


@pytest.fixture(scope="session")
def uniform():
    return density.make_uniform()


@pytest.fixture(scope="session")
def qmap(quantum):
    return gamma.build(quantum)


@pytest.fixture(scope="session")
def umap(uniform):
    return gamma.build(uniform)


def four_petal_table(n=4097):
    """(1 + cos 4xi / 2) / 2pi sampled on n nodes: a smooth non-builtin density."""
    xi = np.linspace(-np.pi, np.pi, n)
    return xi, (1.0 + 0.5 * np.cos(4 * xi)) / (2 * np.pi)


@pytest.fixture(scope="session")
def petal_map():
    return gamma.build(density.from_table(*four_petal_table()))


# closed-form oracles for rho = |sin|/4
def quantum_cdf_exact(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, (1 + np.cos(x)) / 4, (3 - np.cos(x)) / 4)


def quantum_gamma_inverse_exact(x):
    x = np.asarray(x, dtype=float)
    return np.sign(x) * (np.pi / 2) * (1 - np.cos(x))


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome; the line is printed in the summary."""
    def record(number, title, ok, detail=""):
        line = f"AC{number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s[2:4])):
            terminalreporter.write_line(line)
