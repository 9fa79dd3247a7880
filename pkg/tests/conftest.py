import numpy as np
import pytest

from qmimo.config import default_config, validate_config


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_cfg():
    return validate_config(
        default_config(
            large_scale=[1.0, 0.3],
            num_users=2,
            num_antennas=4,
            pilot_length=2,
            adc_bits=2,
            rf_scale_magnitude=0.8,
            rf_phase=0.4,
            rf_noise_var=0.2,
            pilot_power=4.0,
            data_power=6.0,
        )
    )


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one acceptance line, print it, and fail the test if it did not pass."""

    def record(number, name, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
