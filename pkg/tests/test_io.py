import json
from fractions import Fraction

import numpy as np
import pytest
from helpers import make_system
from hypothesis import given
from hypothesis import strategies as st

from markovcs import io
from markovcs.discretize import RegionRecognizer
from markovcs.recognition import MCS, Recognizer
from markovcs.systems import (
    embed_dfa,
    ends_in_a_dfa,
    gaussian_two_map_spec,
    random_rational_kernel,
    three_state_example,
)


BASE = {
    "schema": "mcs-v1",
    "alphabet": "a",
    "n": 2,
    "kernels": {"a": [["1/2", "1/2"], [0, 1]]},
    "initial": ["1", "0"],
    "recognizer": {"accepting": [1], "cut": "1/2", "isolation": "1/10"},
}


def variant(**changes):
    data = json.loads(json.dumps(BASE))
    data.update(changes)
    return data


class TestNumbers:
    @pytest.mark.parametrize("raw, value", [
        (3, Fraction(3)), (0.1, Fraction(1, 10)), ("2/6", Fraction(1, 3)), (" 0.25 ", Fraction(1, 4)),
    ])
    def test_parse(self, raw, value):
        assert io.parse_number(raw) == value

    @pytest.mark.parametrize("raw", [True, "x", "1/0", None, float("nan"), [1]])
    def test_rejects(self, raw):
        with pytest.raises(io.SystemFileError):
            io.parse_number(raw)

    def test_format(self):
        assert io.format_number(Fraction(3, 4)) == "3/4"
        assert io.format_number(Fraction(2)) == "2"
        assert io.format_number(0.5) == 0.5


class TestParse:
    def test_minimal_file(self):
        sf = io.system_from_dict(BASE)
        T = sf.system
        assert sf.kind == "explicit" and T.alphabet == "a"
        assert T.operators["a"].exact[0][0] == Fraction(1, 2)
        assert sf.recognizer.cut == Fraction(1, 2)
        assert sf.default_seed == 0

    def test_initial_forms(self):
        assert io.system_from_dict(variant(initial="uniform")).system.initial.mass.tolist() == [0.5, 0.5]
        assert io.system_from_dict(variant(initial={"cell": 1})).system.initial.mass.tolist() == [0, 1]
        assert io.system_from_dict(variant(initial=None)).system.initial.exact is not None

    def test_inexact_rows_keep_floats_only(self):
        sf = io.system_from_dict(variant(kernels={"a": [[0.3333333333, 0.6666666666], [0, 1]]}))
        assert sf.system.operators["a"].exact is None

    @pytest.mark.parametrize("changes", [
        {"schema": "mcs-v0"},
        {"kind": "symbolic"},
        {"n": 0},
        {"kernels": {"b": [[1, 0], [0, 1]]}},
        {"kernels": {"a": [[1, 0]]}},
        {"kernels": {"a": [[1, 0], [0.5, 0.4]]}},
        {"kernels": {"a": [[1.5, -0.5], [0, 1]]}},
        {"initial": ["1"]},
        {"recognizer": {"accepting": [1], "cut": "1/2"}},
        {"recognizer": {"accepting": [5], "cut": "1/2", "isolation": "1/10"}},
        {"recognizer": {"accepting": [1], "cut": "1/2", "isolation": "3/5"}},
        {"recognizer": {"region": [0, 1], "cut": "1/2", "isolation": "1/10"}},
        {"recognizer": None},
    ])
    def test_errors(self, changes):
        with pytest.raises(io.SystemFileError):
            io.system_from_dict(variant(**changes))

    def test_missing_key(self):
        data = variant()
        del data["alphabet"]
        with pytest.raises(io.SystemFileError, match="alphabet"):
            io.system_from_dict(data)

    def test_bad_json_and_path(self, tmp_path):
        with pytest.raises(io.SystemFileError):
            io.loads_system("{")
        with pytest.raises(io.SystemFileError):
            io.load_system(tmp_path / "absent.json")
        with pytest.raises(io.SystemFileError):
            io.load_system("bundled:nope")
        with pytest.raises(io.SystemFileError):
            io.system_from_dict([1, 2])

    def test_continuous_file(self):
        sf = io.continuous_file(gaussian_two_map_spec(grid_n=16), RegionRecognizer((0.5, 1.0), 0.5, 0.1),
                                {"point": 0.5}, name="g")
        assert sf.kind == "continuous" and sf.system.n == 16
        assert sf.recognizer.accepting == tuple(range(8, 16))
        assert sf.system.initial.mass[8] == 1.0

    def test_continuous_defect_tolerance(self):
        spec = gaussian_two_map_spec(sigma=0.01, grid_n=32)
        region = RegionRecognizer((0.5, 1.0), 0.5, 0.1)
        with pytest.raises(io.SystemFileError):
            io.continuous_file(spec, region)
        sf = io.continuous_file(spec, region, tolerances={"max_defect": 1.0})
        assert sf.tolerances == {"max_defect": 1.0}


class TestRoundTrip:
    @pytest.mark.parametrize("name", io.bundled_names())
    def test_bundled_files_are_canonical(self, name):
        text = io.bundled_text(name)
        sf = io.loads_system(text)
        assert io.dumps_system(sf) == text
        assert io.systems_equal(sf, io.loads_system(io.dumps_system(sf)))

    def test_bundled_names(self):
        assert {"three_state", "ends_in_a", "even_parity", "weakly_ergodic",
                "gaussian_reflect", "gaussian_truncate"} <= set(io.bundled_names())

    def test_three_state_matches_builder(self):
        sf = io.load_bundled("three_state")
        M = three_state_example()
        np.testing.assert_array_equal(sf.system.kernels, M.system.kernels)
        assert sf.recognizer == M.recognizer

    def test_file_round_trip(self, tmp_path):
        sf = io.explicit_file(embed_dfa(ends_in_a_dfa()), name="e", seeds={"default": 5})
        path = tmp_path / "e.json"
        io.save_system(sf, path)
        back = io.load_system(path)
        assert io.systems_equal(sf, back) and back.default_seed == 5 and back.name == "e"

    def test_float_system_round_trip(self):
        rng = np.random.default_rng(4)
        k = rng.dirichlet(np.ones(3), size=3)
        sf = io.explicit_file(MCS(make_system({"a": k}), Recognizer((0,), 0.5, 0.01)))
        back = io.loads_system(io.dumps_system(sf))
        assert io.systems_equal(sf, back)

    @given(st.integers(0, 2**31), st.integers(1, 5), st.sampled_from(["a", "ab", "abc"]))
    def test_rational_round_trip(self, seed, n, alphabet):
        rng = np.random.default_rng(seed)
        T = make_system({a: random_rational_kernel(rng, n) for a in alphabet})
        sf = io.explicit_file(MCS(T, Recognizer((0,), Fraction(1, 2), Fraction(1, 7))))
        text = io.dumps_system(sf)
        back = io.loads_system(text)
        assert io.systems_equal(sf, back)
        assert io.dumps_system(back) == text

    def test_systems_equal_detects_differences(self):
        a = io.load_bundled("ends_in_a")
        b = io.load_bundled("even_parity")
        assert not io.systems_equal(a, b)


class TestReports:
    def test_layout(self):
        text = io.dumps_report("oracle", {"b": np.float64(0.5), "a": (1, 2), "v": np.int64(3)})
        data = json.loads(text)
        assert data["schema"] == "report-v1" and data["command"] == "oracle"
        assert (data["a"], data["b"], data["v"]) == ([1, 2], 0.5, 3)
        assert text.endswith("\n")
        assert text == io.dumps_report("oracle", {"v": np.int64(3), "a": (1, 2), "b": np.float64(0.5)})
