import pytest

from heatwave import build_heat_spectrum, build_sylvester_data, build_wave_spectrum


@pytest.fixture(scope="session")
def heat_half():
    return build_heat_spectrum(0.5, 16)


@pytest.fixture(scope="session")
def wave16():
    return build_wave_spectrum(16)


@pytest.fixture(scope="session")
def sylv_small(heat_half, wave16):
    # alpha = 0.5 keeps every feedback coefficient far above the series
    # truncation floor, so the build emits no tail warnings
    return build_sylvester_data(0.5, 16, 16, heat=heat_half, wave=wave16)
