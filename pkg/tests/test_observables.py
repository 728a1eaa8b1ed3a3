import numpy as np
import pytest

from spd.models import ladder_density, local_energy
from spd.observables import (
    DegenerateProfileError,
    InsufficientDataError,
    correlation_profile,
    diffusion_constant,
    extrapolate_zero_threshold,
    magnetization,
    msd,
    weight_spectrum_series,
)
from spd.pauli_algebra import InvalidArgumentsError
from spd.pauli_sum import PauliSum


def test_initial_profile_tilted_ising():
    L = 9
    dens = [local_energy(j, L) for j in range(1, L + 1)]
    prof = correlation_profile(dens[4], dens)
    f0 = 3.27812025
    assert prof.raw[4] == pytest.approx(f0, abs=1e-12)
    assert prof.raw[3] == pytest.approx(0.25, abs=1e-15)
    assert prof.values.sum() == pytest.approx(1.0)
    assert msd(prof) == pytest.approx(2 * 0.25 / (f0 + 0.5), abs=1e-14)


def test_initial_profile_ladder():
    L = 7
    dens = [ladder_density(j, L) for j in range(1, L + 1)]
    prof = correlation_profile(dens[3], dens)
    assert list(prof.values) == [0, 0, 0, 1, 0, 0, 0]
    assert msd(prof) == 0.0


def test_msd_of_symmetric_profile():
    assert msd(np.array([0.25, 0.5, 0.25])) == pytest.approx(0.5)
    assert msd(np.array([0.5, 0.5]), positions=[0, 4]) == pytest.approx(4.0)


def test_degenerate_profile():
    dens = [local_energy(j, 5) for j in range(1, 6)]
    with pytest.raises(DegenerateProfileError):
        correlation_profile(PauliSum.empty(5), dens)


def test_diffusion_fit_recovers_line():
    t = np.arange(0, 25, 0.5)
    fit = diffusion_constant(t, 2.8 * t + 1.0)
    assert fit.D == pytest.approx(1.4)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.n_samples == 21
    assert fit.residual < 1e-12


def test_diffusion_fit_errors():
    with pytest.raises(InsufficientDataError):
        diffusion_constant([0, 1, 2], [0, 1, 2])
    with pytest.raises(InvalidArgumentsError):
        diffusion_constant([0, 1], [0, 1], window=(5, 5))


def test_extrapolation_exact_for_linear_points():
    pts = [(2.0**-k / 0.02, 1.4 + 3.0 * 2.0**-k / 0.02) for k in (11, 12, 13)]
    assert extrapolate_zero_threshold(pts) == pytest.approx(1.4, abs=1e-12)


def test_extrapolation_uses_three_smallest():
    pts = [(1.0, 2.0), (2.0, 3.0), (3.0, 4.0), (10.0, 100.0)]
    assert extrapolate_zero_threshold(pts) == pytest.approx(1.0)
    with pytest.raises(InsufficientDataError):
        extrapolate_zero_threshold(pts[:2])
    with pytest.raises(InsufficientDataError):
        extrapolate_zero_threshold([(1, 1), (1, 2), (2, 3)])


def test_weight_spectrum_rescale():
    out = weight_spectrum_series([{1: 2.0, 2: 2.0}, {1: 1.0, 3: 3.0}])
    assert out == [{1: 0.5, 2: 0.5}, {1: 0.25, 3: 0.75}]


def test_magnetization_is_zero_state_expectation():
    s = PauliSum.from_labels({"ZI": 0.3, "ZZ": -0.1, "XI": 5.0})
    assert magnetization(s) == pytest.approx(0.2)
