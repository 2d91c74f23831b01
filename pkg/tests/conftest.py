import numpy as np
import pytest

from bkbk import spectral as sp


def band_limited_1d(grid, rng, jmax=None, amplitude=1.0):
    """Random real field with modes ``|j| <= jmax`` (default ``n/4``)."""
    jmax = grid.n // 4 if jmax is None else jmax
    c = np.zeros(grid.n // 2 + 1, dtype=complex)
    c[1 : jmax + 1] = rng.normal(size=jmax) + 1j * rng.normal(size=jmax)
    c[0] = rng.normal()
    f = sp.inverse(c, grid.shape)
    return amplitude * f / np.abs(f).max()


def band_limited_2d(grid, rng, jmax=4, amplitude=1.0):
    c = np.zeros(grid.spectral_shape, dtype=complex)
    jy = np.fft.fftfreq(grid.ny, 1.0 / grid.ny)
    rows = np.abs(jy) <= jmax
    c[rows, : jmax + 1] = rng.normal(size=(rows.sum(), jmax + 1)) + 1j * rng.normal(
        size=(rows.sum(), jmax + 1))
    f = sp.inverse(c, grid.shape)
    return amplitude * f / np.abs(f).max()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- acceptance reporting ---------------------------------------------------

ACCEPTANCE_LINES = {}


class Verdict:
    """One pass/fail line per acceptance criterion, echoed in the summary."""

    def __call__(self, number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{text} [{'ok' if passed else 'FAIL'}]" for text, passed in checks)
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line


@pytest.fixture
def verdict():
    return Verdict()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
