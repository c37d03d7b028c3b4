"""Value types: construction, validation, and the small accessors."""
import numpy as np
import pytest

import simplexfactor as sf


def test_matrix_basic_shape():
    m = sf.Matrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert m.rows == 2 and m.cols == 2
    assert m.values[1, 0] == 3.0


def test_matrix_rejects_nonfinite():
    with pytest.raises(Exception):
        sf.Matrix(np.array([[1.0, np.nan]]))
    with pytest.raises(Exception):
        sf.Matrix(np.array([[np.inf, 0.0]]))


def test_matrix_rejects_empty():
    with pytest.raises(Exception):
        sf.Matrix(np.zeros((0, 2)))


def test_matrix_values_read_only():
    m = sf.Matrix(np.array([[1.0, 2.0]]))
    with pytest.raises(ValueError):
        m.values[0, 0] = 5.0


def test_composition_row_sums_enforced():
    sf.CompositionMatrix(np.array([[0.5, 0.5], [0.25, 0.75]]))
    with pytest.raises(Exception):
        sf.CompositionMatrix(np.array([[0.5, 0.6]]))
    with pytest.raises(Exception):
        sf.CompositionMatrix(np.array([[1.5, -0.5]]))


def test_composition_from_rows_renormalizes():
    # ingestion path accepts 3-decimal rounding and renormalizes
    c = sf.CompositionMatrix.from_rows(np.array([[0.357, 0.5, 0.143]]))
    assert abs(c.values.sum() - 1.0) <= 1e-15
    with pytest.raises(Exception):
        sf.CompositionMatrix.from_rows(np.array([[0.9, 0.2]]))  # off by 0.1 > tol


def test_joint_prob_total_enforced():
    y = sf.JointProbMatrix(np.array([[0.25, 0.25], [0.25, 0.25]]))
    assert y.base.rows == 2
    with pytest.raises(Exception):
        sf.JointProbMatrix(np.array([[0.5, 0.6]]))


def test_joint_prob_row_masses():
    y = sf.JointProbMatrix(np.array([[0.1, 0.2], [0.3, 0.4]]))
    rm = y.row_masses()
    assert np.allclose(rm.masses, [0.3, 0.7])


def test_row_mass_vector_diagonal():
    rm = sf.RowMassVector(np.array([2.0, 3.0]))
    assert len(rm) == 2
    assert np.array_equal(rm.diagonal(), np.diag([2.0, 3.0]))
    with pytest.raises(Exception):
        sf.RowMassVector(np.array([1.0, -0.5]))
