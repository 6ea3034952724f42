from fractions import Fraction

import numpy as np
import pytest

from poslump.io import (
    control_from_json,
    control_to_json,
    dump_matrix_text,
    dump_pcs_json,
    load_matrix_text,
    load_pcs_json,
    matrix_from_json,
    matrix_to_json,
)
from poslump.pcs import ControlBox


class TestMatrixText:
    def test_round_trip(self, tmp_path):
        M = np.array([[0.0, 2.5], [1.0, 0.0]])
        path = tmp_path / "m.coord"
        dump_matrix_text(M, path)
        assert np.array_equal(load_matrix_text(path), M)

    def test_duplicates_sum(self, tmp_path):
        path = tmp_path / "m.coord"
        path.write_text("2 2 2\n1 1 1.5\n1 1 0.5\n")
        M = load_matrix_text(path)
        assert M[0, 0] == 2.0

    def test_exact_entries(self, tmp_path):
        path = tmp_path / "m.coord"
        path.write_text("1 2 1\n1 2 1/5\n")
        M = load_matrix_text(path, exact=True)
        assert M[0, 1] == Fraction(1, 5)

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "m.coord"
        path.write_text("1 1 5\n1 1 1.0\n")
        with pytest.raises(ValueError):
            load_matrix_text(path)


class TestMatrixJson:
    def test_dense_round_trip(self):
        M = np.array([[1.0, 0.5], [0.0, 2.0]])
        assert np.array_equal(matrix_from_json(matrix_to_json(M)), M)

    def test_bare_nested_list(self):
        assert np.array_equal(matrix_from_json([[1, 2], [3, 4]]), [[1.0, 2.0], [3.0, 4.0]])

    def test_flat_list_is_a_row(self):
        assert matrix_from_json([0, 0, 1]).shape == (1, 3)

    def test_exact_strings(self):
        M = matrix_from_json({"rows": 1, "cols": 2, "data": [["1/5", 2]]}, exact=True)
        assert M[0, 0] == Fraction(1, 5)
        # fractional strings also work in float mode
        Mf = matrix_from_json([["1/5", 2]])
        assert Mf[0, 0] == 0.2

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 2]]})


class TestPcsJson:
    def test_minimal_system(self):
        obj = {"lower": [[0, 2, 0], [1, 1, 1], [0, 0, 1]], "O": [[0, 0, 1]]}
        p = load_pcs_json(obj)
        assert p.n == 3
        assert np.array_equal(p.bounds.lower, p.bounds.upper)
        assert p.U.m == 1 and p.U.contains([0.0]) and not p.U.contains([0.5])

    def test_full_round_trip(self):
        obj = {
            "n": 2,
            "lower": [[0.0, 1.0], [0.5, 0.0]],
            "upper": [[0.0, 2.0], [1.0, 0.0]],
            "O": [[1.0, 0.0]],
            "B": [[1.0], [0.0]],
            "u_max": [2.0],
            "x0": [1.0, 0.5],
        }
        p = load_pcs_json(obj)
        out = dump_pcs_json(p)
        p2 = load_pcs_json(out)
        assert np.array_equal(p.bounds.upper, p2.bounds.upper)
        assert np.array_equal(p.x0, p2.x0)
        assert p2.U.upper[0] == 2.0

    def test_exact_decimals_stay_exact(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text('{"lower": [[0.9]], "O": [[1]]}')
        p = load_pcs_json(str(path), exact=True)
        assert p.bounds.lower[0, 0] == Fraction(9, 10)

    def test_point_control_set(self):
        obj = {"lower": [[0.0]], "O": [[1.0]], "u_points": [[0.0], [1.0]], "B": [[1.0]]}
        p = load_pcs_json(obj)
        assert p.U.points is not None
        assert p.U.contains([1.0])


class TestControlJson:
    def test_round_trip(self):
        from poslump.controls import PiecewiseControl

        ctrl = PiecewiseControl((0.0, 1.0), (np.eye(2), 2.0 * np.eye(2)))
        obj = control_to_json(ctrl)
        back = control_from_json(obj)
        assert back.breakpoints == ctrl.breakpoints
        assert np.array_equal(back.values[1], ctrl.values[1])

    def test_vector_flag_flattens(self):
        obj = {"breakpoints": [0.0], "values": [[[1.0, 2.0]]], "vector": True}
        ctrl = control_from_json(obj)
        assert ctrl.values[0].shape == (2,)
