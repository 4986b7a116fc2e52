"""
Tests for reduced model and basis documents.
"""

import dataclasses
import json

import numpy as np
import pytest

from affine.parameters import Parameter
from errors import InputRejected
from offline.orthonormalize import orthonormalize_columns
from reduced.model import ReducedBasis, project
from reduced.online import solve_and_certify
from reduced.parabolic import solve_reduced_parabolic
from reduced.serialization import basis_path_for, load_basis, load_model, save_basis, save_model
from truth.solvers import solve_truth
from truth.thermal_block import build_thermal_block


@pytest.fixture
def problem():
    return build_thermal_block(2, 2, 8, (0.1, 10.0))


@pytest.fixture
def basis(problem):
    mus = [Parameter((1.0, 1.0, 1.0, 1.0)), Parameter((0.1, 10.0, 0.5, 2.0)), Parameter((7.0, 0.2, 3.0, 0.1))]
    snapshots = np.column_stack([solve_truth(problem, mu).coefficients for mu in mus])
    result = orthonormalize_columns(snapshots, problem.inner_product)
    return ReducedBasis(result.matrix, tuple(mus))


class TestModelDocument:
    """Tests for save_model / load_model."""

    def test_round_trip_is_exact(self, tmp_path, problem, basis):
        """Test that every array survives bit for bit."""
        model = project(problem, basis)
        path = save_model(model, tmp_path / "model.json")

        loaded = load_model(path)

        np.testing.assert_array_equal(loaded.reduced_terms, model.reduced_terms)
        np.testing.assert_array_equal(loaded.reduced_load, model.reduced_load)
        np.testing.assert_array_equal(loaded.residual_gram.c_AA, model.residual_gram.c_AA)
        np.testing.assert_array_equal(loaded.residual_gram.range_blocks, model.residual_gram.range_blocks)
        np.testing.assert_array_equal(loaded.continuity_constants, model.continuity_constants)
        assert loaded.residual_gram.c_ff == model.residual_gram.c_ff
        assert loaded.coefficients == model.coefficients
        assert loaded.domain == model.domain
        assert loaded.snapshot_parameters == basis.snapshot_parameters

    def test_document_holds_every_basis_field(self, tmp_path, basis):
        """Test that the saved basis covers all ReducedBasis fields."""
        loaded = load_basis(save_basis(basis, tmp_path / "basis.json"))

        assert {f.name for f in dataclasses.fields(ReducedBasis)} == {"matrix", "snapshot_parameters"}
        assert loaded.size == basis.size
        assert loaded.complete

    def test_certificates_identical_after_reload(self, tmp_path, problem, basis):
        """Test that a reloaded model certifies exactly like the original."""
        model = project(problem, basis)
        loaded = load_model(save_model(model, tmp_path / "model.json"))
        mu = Parameter((0.3, 4.0, 2.0, 9.0))

        assert solve_and_certify(loaded, mu)[1].to_record() == solve_and_certify(model, mu)[1].to_record()

    def test_document_is_truth_size_free(self, tmp_path, problem, basis):
        """Test that no stored array has the truth dimension."""
        model = project(problem, basis)
        document = json.loads(save_model(model, tmp_path / "model.json").read_text())

        shapes = [value["shape"] for value in document.values() if isinstance(value, dict) and "shape" in value]
        assert shapes
        assert all(problem.size not in shape for shape in shapes)
        assert document["truth_size"] == problem.size

    def test_parabolic_model_round_trip(self, tmp_path, problem, basis):
        """Test that mass and initial data are kept."""
        initial = solve_truth(problem, problem.reference_parameter).coefficients
        model = project(problem, basis, include_mass=True, initial=initial)
        loaded = load_model(save_model(model, tmp_path / "model.json"))

        assert loaded.is_parabolic
        np.testing.assert_array_equal(loaded.reduced_mass, model.reduced_mass)
        np.testing.assert_array_equal(loaded.initial_coordinates, model.initial_coordinates)
        mu = Parameter((2.0, 2.0, 2.0, 2.0))
        assert (
            solve_reduced_parabolic(loaded, mu, 0.1, 0.5).error_surrogate
            == solve_reduced_parabolic(model, mu, 0.1, 0.5).error_surrogate
        )

    def test_incomplete_flag_kept(self, tmp_path, problem, basis):
        """Test that models from aborted runs stay marked."""
        model = project(problem, basis).with_completion(False)
        assert not load_model(save_model(model, tmp_path / "model.json")).complete

    def test_unknown_key_rejected(self, tmp_path, problem, basis):
        """Test schema validation on load."""
        path = save_model(project(problem, basis), tmp_path / "model.json")
        document = json.loads(path.read_text())
        document["surprise"] = 1
        path.write_text(json.dumps(document))

        with pytest.raises(InputRejected):
            load_model(path)

    def test_shape_mismatch_rejected(self, tmp_path, problem, basis):
        """Test that inconsistent array shapes are refused."""
        path = save_model(project(problem, basis), tmp_path / "model.json")
        document = json.loads(path.read_text())
        document["basis_size"] = 2
        path.write_text(json.dumps(document))

        with pytest.raises(InputRejected):
            load_model(path)

    def test_missing_file_rejected(self, tmp_path):
        """Test that a missing file is an input error."""
        with pytest.raises(InputRejected):
            load_model(tmp_path / "absent.json")


class TestBasisDocument:
    """Tests for save_basis / load_basis."""

    def test_round_trip(self, tmp_path, basis):
        """Test matrix and snapshot parameters."""
        loaded = load_basis(save_basis(basis, tmp_path / "basis.json"))

        np.testing.assert_array_equal(loaded.matrix, basis.matrix)
        assert loaded.snapshot_parameters == basis.snapshot_parameters

    def test_sibling_reference(self, tmp_path, problem, basis):
        """Test that the model document names its basis file."""
        save_basis(basis, tmp_path / "basis.json")
        model_path = save_model(project(problem, basis), tmp_path / "model.json", basis_file="basis.json")

        assert basis_path_for(model_path) == tmp_path / "basis.json"
        assert basis_path_for(save_model(project(problem, basis), tmp_path / "other.json")) is None
