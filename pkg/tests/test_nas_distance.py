import math

import numpy as np
import pytest
from scipy.optimize import minimize

from nasq import nas_distance as nd
from nasq.as_geometry import as_verdict, identity_channel, random_as_state, random_channel
from nasq.errors import Unsupported, UnsupportedKind
from nasq.qcore import DensityMatrix, haar_random_unitary
from nasq.states import WernerParams, random_density, random_pure, werner

FAST = nd.OptimizerConfig(restarts=3, max_iters=800)


def slsqp_aligned(alpha, fun):
    """Reference minimiser: SLSQP over ordered spectra with the AS criterion as a constraint."""
    n = alpha.size
    cons = [
        {"type": "eq", "fun": lambda l: l.sum() - 1},
        {"type": "ineq", "fun": lambda l: -(l[0] - l[-2] - 2 * np.sqrt(max(l[-1] * l[-3], 0)))},
        {"type": "ineq", "fun": lambda l: -np.diff(l)},
    ]
    best = math.inf
    for start in (np.full(n, 1 / n), np.linspace(2, 1, n) / np.linspace(2, 1, n).sum()):
        res = minimize(fun, start, method="SLSQP", bounds=[(1e-12, 1)] * n, constraints=cons,
                       options={"ftol": 1e-14, "maxiter": 1000})
        if res.success:
            best = min(best, res.fun)
    return best


class TestClosedForms:
    def test_pure_relent_d2(self):
        assert nd.nas_pure_relent(2) == 1.0

    @pytest.mark.parametrize("d", [3, 4])
    def test_pure_relent(self, d):
        assert nd.nas_pure_relent(d) == pytest.approx(np.log2((2 * d + 2) / 3), abs=1e-15)

    def test_pure_relent_d3_value(self):
        assert nd.nas_pure_relent(3) == pytest.approx(1.415037, abs=1e-6)

    def test_pure_bures(self):
        assert nd.nas_pure_bures(2) == pytest.approx(2 - math.sqrt(2), abs=1e-15)
        assert nd.nas_pure_bures(3) == pytest.approx(0.775255, abs=1e-6)

    @pytest.mark.parametrize("gamma,phi", [(math.pi / 4, 0), (0.3, 1.0), (1.2, 4.0)])
    def test_werner_endpoint(self, gamma, phi):
        params = WernerParams(1.0, gamma, phi)
        assert nd.nas_werner(params, nd.RELATIVE_ENTROPY).value == pytest.approx(1.0, abs=1e-12)
        assert nd.nas_werner(params, nd.BURES).value == pytest.approx(2 - math.sqrt(2), abs=1e-12)

    def test_werner_reference_values(self):
        assert nd.nas_werner(WernerParams(2 / 3), nd.RELATIVE_ENTROPY).value == pytest.approx(0.188722, abs=1e-6)
        assert nd.nas_werner(WernerParams(0.5), nd.BURES).value == pytest.approx(0.015941, abs=1e-6)

    def test_werner_relent_matches_direct_relative_entropy(self):
        # relative entropy to the (1/2, 1/6, 1/6, 1/6) state in the Werner eigenbasis
        from nasq.qcore import relative_entropy

        res = nd.nas_werner(WernerParams(0.8, 0.7), nd.RELATIVE_ENTROPY)
        direct = relative_entropy(werner(WernerParams(0.8, 0.7)), res.nearest_as)
        assert res.value == pytest.approx(direct, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3])
    def test_werner_clamped(self, p):
        for kind in (nd.RELATIVE_ENTROPY, nd.BURES):
            res = nd.nas_werner(WernerParams(p), kind)
            assert res.value == 0.0
            assert "clamped" in res.notes

    def test_unclamped_formula_is_not_zero_below_threshold(self):
        assert nd._werner_relent(0.0) > 0

    def test_werner_nearest_spectrum(self):
        res = nd.nas_werner(WernerParams(0.7), nd.BURES)
        assert np.allclose(res.nearest_spectrum, [0.5, 1 / 6, 1 / 6, 1 / 6])

    def test_werner_kind_check(self):
        with pytest.raises(UnsupportedKind):
            nd.nas_werner(WernerParams(0.5), nd.TRACE_DISTANCE)

    def test_closed_form_dispatch(self):
        rho = random_pure((2, 3), seed=1).density()
        assert nd.nas_closed_form(rho, nd.RELATIVE_ENTROPY).value == pytest.approx(nd.nas_pure_relent(3))
        with pytest.raises(Unsupported):
            nd.nas_closed_form(random_density((2, 2), seed=2), nd.RELATIVE_ENTROPY)


class TestKinds:
    def test_schatten_one_is_trace(self):
        assert nd.schatten(1) is nd.TRACE_DISTANCE
        assert nd.schatten(2) != nd.BURES

    def test_schatten_rejects_bad_p(self):
        with pytest.raises(UnsupportedKind):
            nd.schatten(0)


class TestNumeric:
    def test_as_input(self):
        rho = random_as_state(2, seed=3)
        res = nd.nas_numeric(rho)
        assert res.value == 0.0 and res.nearest_as is rho

    def test_rejects_non_qubit_qudit(self):
        rho = DensityMatrix((3, 3), np.eye(9) / 9)
        with pytest.raises(Unsupported):
            nd.nas_numeric(rho)

    @pytest.mark.parametrize("seed", range(20))
    def test_pure_d2_matches_closed_forms(self, seed):
        rho = random_pure((2, 2), seed=seed).density()
        assert nd.nas_numeric(rho, nd.RELATIVE_ENTROPY, FAST, "aligned").value == pytest.approx(1.0, abs=1e-6)
        assert nd.nas_numeric(rho, nd.BURES, FAST, "aligned").value == pytest.approx(2 - math.sqrt(2), abs=1e-6)

    def test_werner_full(self):
        params = WernerParams(0.8, math.pi / 5)
        for kind in (nd.RELATIVE_ENTROPY, nd.BURES):
            res = nd.nas_numeric(werner(params), kind)
            assert res.method is nd.Method.FULL
            assert res.value == pytest.approx(nd.nas_werner(params, kind).value, abs=1e-4)
            assert res.gap_estimate <= 1e-6

    @pytest.mark.parametrize("kind", [nd.RELATIVE_ENTROPY, nd.BURES, nd.HILBERT_SCHMIDT, nd.TRACE_DISTANCE, nd.schatten(2)])
    @pytest.mark.parametrize("dims", [(2, 2), (2, 3)])
    def test_aligned_matches_constrained_reference(self, kind, dims):
        rng = np.random.default_rng(hash((str(kind), dims)) % 2**32)
        rho = random_density(dims, seed=rng)
        while as_verdict(rho).is_as:
            rho = random_density(dims, seed=rng)
        obj = nd._Objective(rho, kind)
        ref = slsqp_aligned(obj.alpha, obj.aligned)
        got = nd.nas_numeric(rho, kind, nd.OptimizerConfig(), "aligned").value
        # the reference may stall on the non-smooth trace objective, never undercut
        assert got <= ref + 1e-6
        if kind != nd.TRACE_DISTANCE:
            assert got == pytest.approx(ref, abs=1e-6)

    @pytest.mark.parametrize("kind", [nd.RELATIVE_ENTROPY, nd.BURES, nd.TRACE_DISTANCE])
    def test_full_never_above_aligned(self, kind):
        rho = random_density((2, 2), seed=11)
        res = nd.nas_numeric(rho, kind, FAST, "full")
        al = nd.nas_numeric(rho, kind, FAST, "aligned")
        assert res.value <= al.value + 1e-6
        assert res.gap_estimate == pytest.approx(al.value - res.value, abs=1e-9)

    def test_nearest_state_is_as_and_consistent(self):
        rho = random_density((2, 3), seed=5)
        res = nd.nas_numeric(rho, nd.BURES, FAST, "full")
        assert as_verdict(res.nearest_as).on_boundary
        assert nd.distance(nd.BURES, rho, res.nearest_as) == pytest.approx(res.value, abs=1e-9)

    def test_value_below_random_as_states(self, rng):
        rho = random_density((2, 2), seed=rng)
        value = nd.nas_numeric(rho, nd.RELATIVE_ENTROPY, FAST, "aligned").value
        for _ in range(300):
            sigma = random_as_state(2, seed=rng, boundary=True)
            assert nd.distance(nd.RELATIVE_ENTROPY, rho, sigma) >= value - 1e-9

    def test_spectrum_only(self, rng):
        for _ in range(5):
            rho = random_density((2, 2), seed=rng)
            u = haar_random_unitary(4, rng)
            a = nd.nas_numeric(rho, nd.RELATIVE_ENTROPY, FAST, "aligned").value
            b = nd.nas_numeric(rho.conjugate_by(u), nd.RELATIVE_ENTROPY, FAST, "aligned").value
            assert a == pytest.approx(b, abs=1e-5)

    @pytest.mark.parametrize("d", [2, 3])
    def test_pure_maximal(self, d, rng):
        for _ in range(5):
            rho = random_density((2, d), seed=rng)
            assert nd.nas_numeric(rho, nd.RELATIVE_ENTROPY, FAST, "aligned").value <= nd.nas_pure_relent(d) + 1e-6
            assert nd.nas_numeric(rho, nd.BURES, FAST, "aligned").value <= nd.nas_pure_bures(d) + 1e-6


class TestUpperBound:
    def test_pure_equality(self):
        rho = random_pure((2, 2), seed=0).density()
        assert nd.nas_upper_bound(rho, nd.RELATIVE_ENTROPY) == pytest.approx(1.0, abs=1e-8)
        assert nd.nas_upper_bound(rho, nd.BURES) == pytest.approx(2 - math.sqrt(2), abs=1e-8)

    def test_maximally_mixed(self):
        rho = DensityMatrix((2, 2), np.eye(4) / 4)
        assert nd.nas_upper_bound(rho, nd.RELATIVE_ENTROPY) == pytest.approx(0.188722, abs=1e-6)

    def test_werner(self):
        params = WernerParams(0.9)
        for kind in (nd.RELATIVE_ENTROPY, nd.BURES):
            assert nd.nas_upper_bound(werner(params), kind) >= nd.nas_werner(params, kind).value - 1e-12

    def test_dominates_numeric(self, rng):
        for d in (2, 3):
            for _ in range(4):
                rho = random_density((2, d), seed=rng)
                for kind in (nd.RELATIVE_ENTROPY, nd.BURES):
                    num = nd.nas_numeric(rho, kind, FAST, "aligned").value
                    assert nd.nas_upper_bound(rho, kind) >= num - 1e-6

    def test_kind_check(self):
        with pytest.raises(UnsupportedKind):
            nd.nas_upper_bound(random_density((2, 2), seed=0), nd.HILBERT_SCHMIDT)


class TestMonotonicity:
    def test_identity_channel(self):
        rho = random_density((2, 2), seed=1)
        rep = nd.verify_monotonicity(rho, identity_channel(4), nd.RELATIVE_ENTROPY, FAST, "aligned")
        assert rep.slack == pytest.approx(0.0, abs=1e-12)

    def test_single_unitary_is_equality(self, rng):
        from nasq.as_geometry import MixedUnitaryChannel

        rho = random_density((2, 2), seed=rng)
        ch = MixedUnitaryChannel((1.0,), (haar_random_unitary(4, rng),))
        rep = nd.verify_monotonicity(rho, ch, nd.BURES, FAST, "full")
        assert abs(rep.slack) <= 1e-5

    def test_werner_channels(self, rng):
        for _ in range(10):
            params = WernerParams(rng.uniform(0.34, 1), rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            rep = nd.verify_monotonicity(werner(params), random_channel(4, 3, rng), nd.RELATIVE_ENTROPY, FAST, "full")
            assert rep.slack >= -1e-5
