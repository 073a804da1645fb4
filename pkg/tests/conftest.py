import numpy as np
import pytest

from soda.augment import ImageSample


@pytest.fixture
def ramp():
    image = np.arange(16, dtype=float).reshape(4, 4)
    mask = (image % 3 == 0).astype(np.uint8)
    return ImageSample(image, mask)


@pytest.fixture
def square_sample():
    rng = np.random.default_rng(7)
    image = rng.normal(size=(16, 16))
    mask = np.zeros((16, 16), dtype=np.uint8)
    mask[4:10, 5:12] = 1
    return ImageSample(image, mask)


_ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record one acceptance criterion outcome: report(number, passed, detail)."""

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
