import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from nasq import as_geometry as asg
from nasq.errors import InfeasibleCoords, Unsupported, WrongLength
from nasq.qcore import DensityMatrix, PureState
from nasq.states import max_entangled, random_pure

DS = [2, 3, 4]


def criterion(lam):
    lam = np.sort(lam)[::-1]
    return lam[0] - lam[-2] - 2 * np.sqrt(max(lam[-1] * lam[-3], 0.0))


class TestCriterion:
    def test_maximally_mixed_is_as(self):
        v = asg.is_absolutely_separable(np.full(4, 0.25), 2)
        assert v.is_as and not v.on_boundary
        assert v.criterion_value == pytest.approx(-0.5)

    def test_pure_is_not_as(self):
        assert not asg.is_absolutely_separable([1, 0, 0, 0], 2).is_as

    def test_order_does_not_matter(self):
        a = asg.is_absolutely_separable([0.1, 0.5, 0.2, 0.2], 2)
        b = asg.is_absolutely_separable([0.5, 0.2, 0.2, 0.1], 2)
        assert a == b

    def test_werner_boundary(self):
        lam = [0.5, 1 / 6, 1 / 6, 1 / 6]
        assert asg.is_absolutely_separable(lam, 2).on_boundary

    def test_wrong_length(self):
        with pytest.raises(WrongLength):
            asg.is_absolutely_separable([0.5, 0.5], 2)

    def test_qudit_dim(self):
        assert asg.qudit_dim((2, 3)) == 3
        assert asg.qudit_dim((4, 2)) == 4
        with pytest.raises(Unsupported):
            asg.qudit_dim((3, 3))

    def test_vectorised(self):
        lam = np.array([[0.25] * 4, [1, 0, 0, 0]])
        assert np.allclose(asg.as_criterion(lam), [-0.5, 1.0])


class TestCoordinates:
    @pytest.mark.parametrize("d", DS)
    def test_round_trip(self, d, rng):
        for _ in range(50):
            a = asg.random_coords(d, rng)
            lam = asg.spectrum_from_coords(a)
            assert lam.sum() == pytest.approx(1.0)
            assert np.all(np.diff(lam) <= 1e-15)
            assert np.allclose(asg.coords_from_spectrum(lam), a)

    def test_infeasible(self):
        with pytest.raises(InfeasibleCoords):
            asg.check_coords([0.1, 0.5, 0.5], 2)

    @pytest.mark.parametrize("d", DS)
    def test_flat_tail_attains_upper_bound(self, d):
        lam = asg.boundary_spectrum(asg.flat_tail_coords(d), d)
        assert lam[0] == pytest.approx(3 / (2 * d + 2), abs=1e-15)
        assert abs(asg.as_criterion(lam)) <= 1e-12

    @given(st.lists(st.floats(-30, 30), min_size=5, max_size=5))
    def test_unconstrained_map_is_feasible(self, z):
        a = asg.coords_from_unconstrained(np.array(z))
        asg.check_coords(a, 3)


class TestProjection:
    @pytest.mark.parametrize("d", DS)
    def test_matches_root_finder(self, d, rng):
        u = 1 / (2 * d)
        for _ in range(30):
            lam = -np.sort(-rng.dirichlet(np.ones(2 * d)))
            # the ray leaves the simplex where l_2d reaches 0; there the criterion is >= 0
            t_max = u / (u - lam[-1])
            t_ref = brentq(lambda t: criterion(u + t * (lam - u)), 0.0, t_max, xtol=1e-15)
            assert asg.boundary_scale(lam) == pytest.approx(t_ref, rel=1e-9)

    @given(st.integers(2, 4), st.integers(0, 2**32 - 1))
    @settings(max_examples=60)
    def test_projection_lands_on_boundary(self, d, seed):
        lam = -np.sort(-np.random.default_rng(seed).dirichlet(np.ones(2 * d)))
        out = asg.project_to_boundary(lam)
        assert out.sum() == pytest.approx(1.0)
        assert np.all(out >= 0)
        assert abs(asg.as_criterion(out)) <= 1e-12

    def test_near_flat_input_still_valid(self):
        lam = np.full(4, 0.25) + np.array([3e-17, 1e-17, -1e-17, -3e-17])
        out = asg.project_to_boundary(lam)
        assert out.sum() == pytest.approx(1.0) and np.all(np.diff(out) <= 0)

    def test_flat_input_rejected(self):
        with pytest.raises(InfeasibleCoords):
            asg.project_to_boundary(np.full(4, 0.25))

    def test_rank_deficient_boundary_point(self):
        # the boundary touches the simplex face lambda_2d = 0 at one spectrum
        lam = np.array([1 / 3, 1 / 3, 1 / 3, 0.0])
        assert asg.is_absolutely_separable(lam, 2).on_boundary


class TestSampling:
    @pytest.mark.parametrize("d", DS)
    def test_boundary_samples(self, d):
        lam = asg.sample_boundary_spectra(d, 2000, seed=d)
        lo, hi = asg.lambda1_bounds(d)
        assert np.all(np.abs(asg.as_criterion(lam)) <= 1e-12)
        assert np.all(lam[:, 0] > lo) and np.all(lam[:, 0] <= hi + 1e-15)

    def test_as_samples_inside(self):
        lam = asg.sample_as_spectra(3, 500, seed=0)
        assert np.all(asg.as_criterion(lam) <= 1e-12)

    def test_random_as_state(self):
        rho = asg.random_as_state(2, seed=4, boundary=True)
        assert asg.as_verdict(rho).on_boundary


class TestNearestPure:
    @pytest.mark.parametrize("d", DS)
    def test_structure(self, d):
        alpha = random_pure((2, d), seed=d)
        sigma = asg.nearest_as_pure(alpha)
        lam = sigma.spectrum()
        assert lam[0] == pytest.approx(3 / (2 * d + 2))
        assert np.allclose(lam[1:], 1 / (2 * d + 2))
        assert asg.as_verdict(sigma).on_boundary
        overlap = np.vdot(alpha.amplitudes, np.asarray(sigma) @ alpha.amplitudes).real
        assert overlap == pytest.approx(3 / (2 * d + 2))

    def test_rejects_non_2xd(self):
        with pytest.raises(Unsupported):
            asg.nearest_as_pure(max_entangled(3))


class TestChannels:
    def test_identity(self):
        rho = DensityMatrix((2, 2), np.diag([0.4, 0.3, 0.2, 0.1]))
        out = asg.apply_channel(asg.identity_channel(4), rho)
        assert np.allclose(np.asarray(out), np.asarray(rho))

    def test_validation(self):
        with pytest.raises(ValueError):
            asg.MixedUnitaryChannel((0.5, 0.6), (np.eye(2), np.eye(2)))
        with pytest.raises(ValueError):
            asg.MixedUnitaryChannel((1.0,), (np.ones((2, 2)),))

    def test_preserves_as_set(self, rng):
        for _ in range(20):
            rho = asg.random_as_state(2, seed=rng)
            out = asg.random_channel(4, seed=rng)(rho)
            assert asg.as_verdict(out).is_as

    def test_unital(self, rng):
        ch = asg.random_channel(4, seed=rng)
        out = ch(DensityMatrix((2, 2), np.eye(4) / 4))
        assert np.allclose(np.asarray(out), np.eye(4) / 4)
