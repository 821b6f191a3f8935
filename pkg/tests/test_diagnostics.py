import math

import numpy as np
import pytest

from rarepath import (InvalidArgument, RngStream, clamped_drift_family,
                      constant_family, inverse_bessel_family, q_tail_profile,
                      stopped_tail, unity_check)

# frozen by quadrature of the radial transition density started at 1:
# mean of the reciprocal distance at t = 1 equals 2*Phi(1) - 1
INV_BESSEL_MEAN_T1 = 0.6826894921370859


def test_constant_family_profile_consistent():
    fam = constant_family(n_grid=(1, 2, 4), t_grid=(1.0, 2.5))
    prof = q_tail_profile(fam, [2.0, 4.0], replicas=4000, seed=1)
    for (n, t, k), (est, se) in prof.entries.items():
        assert est == 0.0 and se == 0.0
    assert prof.verdict.kind == "consistent"
    assert str(prof.verdict) == "TightnessConsistent"


def test_constant_family_stopped_tail_deterministic():
    fam = constant_family(n_grid=(1, 2, 4), t_grid=(2.5,))
    tails = stopped_tail(fam, replicas=100, seed=2)
    assert tails[(1, 2.5)][0] == 1.0
    assert tails[(2, 2.5)][0] == 1.0
    assert tails[(4, 2.5)][0] == 0.0


def test_constant_family_unity_exact():
    fam = constant_family(n_grid=(1,), t_grid=(1.0,))
    means = unity_check(fam, replicas=100, seed=3)
    assert means[(1, 1.0)] == (1.0, 0.0)


def test_clamped_family_members_coincide_once_clamp_inactive():
    # drift bounded by 3: members 5 and 50 are pathwise identical
    fam = clamped_drift_family(lambda t, w, ws: 3.0 * np.cos(w[:, :1]),
                                  step=1.0 / 64, dim=1, n_grid=(5, 50),
                                  t_grid=(1.0,))
    draws = fam.simulate_multi(RngStream(11, 0), 1.0, 256)
    assert np.array_equal(draws[5].values, draws[50].values)


def test_clamped_family_clamp_is_componentwise():
    # drift (5, -7): the clamp at 6 changes only the second coordinate, so
    # the member-6 and member-8 log variances differ by the right amount
    fam = clamped_drift_family(lambda t, w, ws: np.array([[5.0, -7.0]]),
                                  step=1.0 / 4, dim=2, n_grid=(6, 8),
                                  t_grid=(0.25,))
    draws = fam.simulate_multi(RngStream(12, 0), 0.25, 30000)
    lv6 = np.log(draws[6].values).var()
    lv8 = np.log(draws[8].values).var()
    # var log M = |mu|^2 t with |mu6|^2 = 61, |mu8|^2 = 74 at t = 0.25
    assert abs(lv6 - 61.0 * 0.25) < 0.6
    assert abs(lv8 - 74.0 * 0.25) < 0.7


def test_clamped_family_linear_growth_unity_per_member():
    # drift equal to the running maximum of |W| (linear growth): every
    # clamped member keeps unit expectation
    fam = clamped_drift_family(lambda t, w, ws: ws[:, None],
                                  step=1.0 / 128, dim=1, n_grid=(1, 2, 4),
                                  t_grid=(1.0,))
    means = unity_check(fam, replicas=40000, seed=21)
    for (n, t), (mean, se) in means.items():
        assert abs(mean - 1.0) < 3.0 * se


def test_clamped_family_stopped_tail_vanishes_in_member():
    fam = clamped_drift_family(lambda t, w, ws: np.cos(w[:, :1]),
                                  step=1.0 / 128, dim=1, n_grid=(2, 4, 8),
                                  t_grid=(1.0,))
    tails = stopped_tail(fam, replicas=30000, seed=22)
    vals = [tails[(n, 1.0)][0] for n in (2, 4, 8)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 0.02


def test_inverse_bessel_unity_of_limit():
    fam = inverse_bessel_family(step=1.0 / 256, n_grid=(8,), t_grid=(1.0,))
    means = unity_check(fam, replicas=60000, seed=23)
    mean, se = means[(8, 1.0)]
    assert abs(mean - INV_BESSEL_MEAN_T1) < 3.0 * se
    # and it is far below one: the defect is two orders above the noise
    assert (1.0 - mean) / se > 5.0


def test_inverse_bessel_member_unity_with_freeze():
    # each frozen member keeps (approximately) unit mean: the freeze at n
    # returns the escaping mass
    fam = inverse_bessel_family(step=1.0 / 1024, n_grid=(4,), t_grid=(1.0,))
    means = unity_check(fam, replicas=60000, seed=24, member="member")
    mean, se = means[(4, 1.0)]
    assert abs(mean - 1.0) < max(4.0 * se, 0.02)


def test_inverse_bessel_profile_violated_and_stopped_floor():
    fam = inverse_bessel_family(step=1.0 / 512, n_grid=(8, 16, 32),
                                t_grid=(1.0,))
    prof = q_tail_profile(fam, [2.0, 4.0, 8.0], replicas=60000, seed=25)
    assert prof.verdict.kind == "violated"
    assert prof.verdict.floor > 0.05
    tails = stopped_tail(fam, replicas=60000, seed=25)
    for n in (8, 16, 32):
        est, se = tails[(n, 1.0)]
        assert est - 3.0 * se > 0.05  # the floor does not vanish in n


def test_profile_tail_plus_complement_is_mean():
    fam = inverse_bessel_family(step=1.0 / 128, n_grid=(4, 8), t_grid=(0.5,))
    prof = q_tail_profile(fam, [2.0, 4.0], replicas=20000, seed=26)
    means = unity_check(fam, replicas=20000, seed=26, member="member")
    for n in (4, 8):
        mean = means[(n, 0.5)][0]
        assert prof.means[(n, 0.5)][0] == pytest.approx(mean, abs=1e-12)
        tail = prof.entries[(n, 0.5, 2.0)][0]
        comp = prof.complements[(n, 0.5, 2.0)][0]
        assert tail + comp == pytest.approx(mean, abs=1e-12)


def test_profile_monotone_in_kappa():
    fam = inverse_bessel_family(step=1.0 / 128, n_grid=(8,), t_grid=(1.0,))
    prof = q_tail_profile(fam, [2.0, 4.0, 8.0], replicas=30000, seed=27)
    ests = [prof.entries[(8, 1.0, k)][0] for k in (2.0, 4.0, 8.0)]
    ses = [prof.entries[(8, 1.0, k)][1] for k in (2.0, 4.0, 8.0)]
    for a, b, sa, sb in zip(ests, ests[1:], ses, ses[1:]):
        assert b <= a + 2.0 * math.hypot(sa, sb)


def test_profile_input_validation():
    fam = constant_family()
    with pytest.raises(InvalidArgument):
        q_tail_profile(fam, [4.0, 2.0], replicas=10, seed=1)
    with pytest.raises(InvalidArgument):
        q_tail_profile(fam, [], replicas=10, seed=1)
    with pytest.raises(InvalidArgument):
        unity_check(fam, replicas=10, seed=1, member="bogus")


def test_family_single_member_accessor():
    fam = constant_family(n_grid=(1, 2), t_grid=(1.0,))
    draw = fam.simulate(RngStream(1, 0), 2, 1.0, 16)
    assert np.all(draw.values == 1.0)
    with pytest.raises(InvalidArgument):
        fam.simulate(RngStream(1, 0), 3, 1.0, 16)
