import json
import math

import numpy as np
import pytest

from nasq.as_geometry import as_verdict
from nasq.errors import BadDimension, BadRank, ParamOutOfRange
from nasq.states import (
    StateClass,
    StateFormatError,
    WernerParams,
    bell_basis,
    classify_werner,
    density_from_spectrum,
    dumps_state,
    load_state,
    max_entangled,
    product_state,
    random_density,
    save_state,
    state_from_json,
    werner,
    werner_spectrum,
)


class TestWerner:
    @pytest.mark.parametrize("p", [0.0, 0.3, 0.7, 1.0])
    def test_spectrum(self, p):
        rho = werner(WernerParams(p, 0.4, 2.0))
        assert np.allclose(rho.spectrum(), werner_spectrum(p))

    @pytest.mark.parametrize(
        "field,value", [("p", -0.1), ("p", 1.1), ("gamma", 4.0), ("phi", -1.0)]
    )
    def test_range_checks(self, field, value):
        kw = {"p": 0.5, "gamma": 0.3, "phi": 0.0, field: value}
        with pytest.raises(ParamOutOfRange):
            WernerParams(**kw)

    def test_threshold_values(self):
        assert WernerParams(0.5).entanglement_threshold() == pytest.approx(1 / 3)
        assert WernerParams(0.5, math.pi / 12).entanglement_threshold() == pytest.approx(0.5)
        # the reflected angle gives the same threshold
        assert WernerParams(0.5, math.pi - math.pi / 12).entanglement_threshold() == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "p,gamma,expected",
        [
            (0.2, math.pi / 4, StateClass.AS),
            (1 / 3, math.pi / 4, StateClass.BOUNDARY),
            (0.4, math.pi / 12, StateClass.NON_AS_SEPARABLE),
            (0.6, math.pi / 4, StateClass.ENTANGLED),
            (1.0, 0.0, StateClass.NON_AS_SEPARABLE),
        ],
    )
    def test_classification_examples(self, p, gamma, expected):
        assert classify_werner(WernerParams(p, gamma)) is expected

    def test_classification_agrees_with_generic_tests(self, rng):
        for _ in range(1000):
            params = WernerParams(rng.uniform(0, 1), rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            rho = werner(params)
            label = classify_werner(params)
            is_as = as_verdict(rho).is_as
            npt = rho.pt_min_eigenvalue() < -1e-9
            if label in (StateClass.AS, StateClass.BOUNDARY):
                assert is_as and not npt
            elif label is StateClass.ENTANGLED:
                assert npt and not is_as
            else:
                assert not is_as and rho.pt_min_eigenvalue() > -1e-9


class TestConstructors:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_max_entangled_reduced_state(self, d):
        psi = max_entangled(d)
        red = np.einsum("ijkj->ik", psi.projector().reshape(d, d, d, d))
        assert np.allclose(red, np.eye(d) / d)

    def test_max_entangled_rejects_small_d(self):
        with pytest.raises(BadDimension):
            max_entangled(1)

    def test_bell_basis_unitary(self):
        b = bell_basis()
        assert np.allclose(b.conj().T @ b, np.eye(4))

    def test_product_state(self):
        assert product_state((2, 3), 1, 2).amplitudes[5] == 1.0

    def test_random_density_bad_rank(self):
        with pytest.raises(BadRank):
            random_density((2, 2), rank=5)

    def test_density_from_spectrum(self):
        rho = density_from_spectrum([0.4, 0.3, 0.2, 0.1])
        assert np.allclose(rho.spectrum(), [0.4, 0.3, 0.2, 0.1])


class TestJson:
    def test_round_trip_is_exact(self, tmp_path, rng):
        rho = random_density((2, 3), seed=rng)
        path = tmp_path / "s.json"
        save_state(rho, path)
        back = load_state(path)
        assert np.array_equal(np.asarray(back), np.asarray(rho))
        assert dumps_state(back) == dumps_state(rho)

    @pytest.mark.parametrize(
        "obj,field",
        [
            ({"re": [], "im": []}, "dims"),
            ({"dims": [2], "re": [], "im": []}, "dims"),
            ({"dims": [2, 2], "re": [[1]], "im": [[0]]}, "re"),
            ({"dims": [1, 2], "re": [[0.5, 0], [0, 0.5]], "im": "x"}, "im"),
            ({"dims": [1, 2], "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}, "re/im"),
        ],
    )
    def test_errors_name_the_field(self, obj, field):
        with pytest.raises(StateFormatError) as err:
            state_from_json(obj)
        assert err.value.field == field

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(StateFormatError):
            load_state(path)

    def test_serialisation_layout(self):
        obj = json.loads(dumps_state(max_entangled(2).density()))
        assert obj["dims"] == [2, 2]
        assert len(obj["re"]) == 4 and len(obj["im"][0]) == 4
