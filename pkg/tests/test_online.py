"""
Tests for projection, the online solve and certification.

Tests:
- Galerkin solve against a truth-space oracle
- Residual dual norm against sqrt(r^T X^-1 r)
- Min-theta and continuity bounds against dense eigenvalues
- Rigor and effectivity of certificates
"""

import dataclasses
import time

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from affine.coefficients import CoefficientFunction
from affine.parameters import Parameter, RandomSampling, sample_training_set
from errors import InputRejected, MinThetaInapplicable, ReducedCoercivityLoss
from offline.orthonormalize import orthonormalize_columns
from reduced.model import ReducedBasis, ResidualGram, continuity_constants, project, residual_range_basis
from reduced.online import (
    certify,
    coercivity_lower_bound,
    continuity_upper_bound,
    residual_dual_norm,
    solve_and_certify,
    solve_reduced,
)
from truth.linalg import smallest_generalized_eigenvalue, x_norm
from truth.solvers import solve_truth
from truth.thermal_block import build_poisson_1d, build_thermal_block


@pytest.fixture
def thermal_block():
    """2x2 thermal block on an 8x8 mesh."""
    return build_thermal_block(2, 2, 8, (0.1, 10.0))


@pytest.fixture
def random_parameters(thermal_block):
    return sample_training_set(thermal_block.domain, RandomSampling(6, seed=11))


@pytest.fixture
def basis5(thermal_block):
    """X-orthonormal basis from five random snapshots."""
    snapshot_mus = sample_training_set(thermal_block.domain, RandomSampling(5, seed=2))
    snapshots = np.column_stack([solve_truth(thermal_block, mu).coefficients for mu in snapshot_mus])
    return orthonormalize_columns(snapshots, thermal_block.inner_product)


@pytest.fixture
def model5(thermal_block, basis5):
    return project(thermal_block, basis5)


def single_snapshot_basis(problem, mu: Parameter) -> ReducedBasis:
    u = solve_truth(problem, mu).coefficients
    return orthonormalize_columns(u[:, None], problem.inner_product, parameter=mu)


def truth_dual_norm(problem, r: np.ndarray) -> float:
    """sqrt(r^T X^-1 r) with an independent sparse solve."""
    return float(np.sqrt(r @ spla.spsolve(sp.csc_matrix(problem.inner_product), r)))


class TestProject:
    """Tests for project."""

    def test_reduced_sizes(self, model5):
        """Test that every stored block has reduced dimensions."""
        assert model5.basis_size == 5
        assert model5.reduced_terms.shape == (4, 5, 5)
        assert model5.residual_gram.c_fA.shape == (4, 5)
        assert model5.residual_gram.c_AA.shape == (4, 4, 5, 5)
        assert not model5.is_parabolic

    def test_non_orthonormal_basis_rejected(self, thermal_block):
        """Test rejection of a basis violating V^T X V = I."""
        basis = ReducedBasis(np.ones((thermal_block.size, 1)))
        with pytest.raises(InputRejected):
            project(thermal_block, basis)

    def test_wrong_row_count_rejected(self, thermal_block):
        """Test rejection of a basis built for another mesh."""
        with pytest.raises(InputRejected):
            project(thermal_block, ReducedBasis.empty(10))

    def test_eigenvector_basis_gives_diagonal_matrix(self):
        """Test A^N = diag(lambda) for X-orthonormal generalized eigenvectors."""
        base = build_poisson_1d(40)
        stiffness = base.operator.matrices[0]
        x = (stiffness + base.mesh.mass_matrix).tocsr()
        values, vectors = sla.eigh(stiffness.toarray(), x.toarray())
        problem = dataclasses.replace(base, inner_product=x, reference_coercivity=float(values[0]))

        model = project(problem, ReducedBasis(vectors[:, :6]))

        np.testing.assert_allclose(model.reduced_terms[0], np.diag(values[:6]), atol=1e-10)

    def test_continuity_constants_match_dense(self, thermal_block):
        """Test gamma_q against a dense generalized eigensolver."""
        x = thermal_block.inner_product.toarray()
        expected = [
            sla.eigh(a_q.toarray(), x, eigvals_only=True)[-1] for a_q in thermal_block.operator.matrices
        ]
        np.testing.assert_allclose(continuity_constants(thermal_block), expected, rtol=1e-10)


class TestSolveReduced:
    """Tests for solve_reduced."""

    def test_reproduces_snapshot(self, thermal_block):
        """Test that N = 1 at mu* reproduces the truth solution."""
        mu = thermal_block.reference_parameter
        basis = single_snapshot_basis(thermal_block, mu)
        model = project(thermal_block, basis)

        solution = solve_reduced(model, mu)

        truth = solve_truth(thermal_block, mu).coefficients
        assert x_norm(thermal_block.inner_product, truth - basis.lift(solution.coordinates)) <= 1e-10

    def test_galerkin_oracle(self, thermal_block, basis5, model5, random_parameters):
        """Test V u_N against the explicit V^T A(mu) V solve."""
        v = basis5.matrix
        for mu in random_parameters:
            a = thermal_block.operator.assemble(mu)
            oracle = np.linalg.solve(v.T @ (a @ v), v.T @ thermal_block.load)

            coordinates = solve_reduced(model5, mu).coordinates

            np.testing.assert_allclose(v @ coordinates, v @ oracle, rtol=1e-10, atol=1e-14)

    def test_reduced_residual_small(self, model5, random_parameters):
        """Test ||A^N u_N - f^N|| <= 1e-10 ||f^N||."""
        for mu in random_parameters:
            theta = model5.evaluate_coefficients(mu)
            a_n = np.tensordot(theta, model5.reduced_terms, axes=1)
            u_n = solve_reduced(model5, mu).coordinates
            assert np.linalg.norm(a_n @ u_n - model5.reduced_load) <= 1e-10 * np.linalg.norm(model5.reduced_load)

    def test_single_block_scaling(self):
        """Test u_N(mu) = u_N(mu_bar) / mu_1 for one block."""
        problem = build_thermal_block(1, 1, 8, (0.1, 10.0))
        model = project(problem, single_snapshot_basis(problem, problem.reference_parameter))

        reference = solve_reduced(model, problem.reference_parameter).coordinates
        scaled = solve_reduced(model, Parameter((4.0,))).coordinates

        np.testing.assert_allclose(scaled, reference / 4.0, rtol=1e-13)

    def test_outputs(self, model5, random_parameters):
        """Test s_N = s V u_N."""
        solution = solve_reduced(model5, random_parameters[0])
        np.testing.assert_allclose(solution.outputs, model5.reduced_outputs @ solution.coordinates)

    def test_empty_basis(self, thermal_block):
        """Test that N = 0 returns empty coordinates and zero outputs."""
        model = project(thermal_block, ReducedBasis.empty(thermal_block.size))
        solution = solve_reduced(model, thermal_block.reference_parameter)
        assert solution.coordinates.shape == (0,)
        np.testing.assert_array_equal(solution.outputs, [0.0])

    def test_outside_domain_rejected(self, model5):
        """Test that inadmissible parameters are rejected."""
        with pytest.raises(InputRejected):
            solve_reduced(model5, Parameter((0.01, 1.0, 1.0, 1.0)))

    def test_loss_of_definiteness(self, model5):
        """Test that a non-SPD reduced matrix is reported."""
        broken = dataclasses.replace(model5, reduced_terms=-model5.reduced_terms)
        with pytest.raises(ReducedCoercivityLoss):
            solve_reduced(broken, Parameter((1.0, 1.0, 1.0, 1.0)))


class TestResidualDualNorm:
    """Tests for residual_dual_norm."""

    def test_matches_truth_space_oracle(self, thermal_block, basis5, model5, random_parameters):
        """Test the offline/online split against sqrt(r^T X^-1 r) for random u_N."""
        rng = np.random.default_rng(9)
        for mu in random_parameters:
            u_n = rng.standard_normal(5)
            r = thermal_block.load - thermal_block.operator.assemble(mu) @ (basis5.matrix @ u_n)

            assert residual_dual_norm(model5, mu, u_n) == pytest.approx(
                truth_dual_norm(thermal_block, r), rel=1e-8
            )

    def test_zero_coordinates(self, thermal_block, model5):
        """Test that u_N = 0 gives the dual norm of f."""
        mu = Parameter((0.5, 2.0, 1.0, 8.0))
        expected = truth_dual_norm(thermal_block, thermal_block.load)

        assert residual_dual_norm(model5, mu, np.zeros(5)) == pytest.approx(expected, rel=1e-12)
        assert np.sqrt(model5.residual_gram.c_ff) == pytest.approx(expected, rel=1e-12)

    def test_near_zero_at_reproduced_snapshot(self, thermal_block):
        """Test the residual at a reproduced snapshot parameter."""
        mu = thermal_block.reference_parameter
        model = project(thermal_block, single_snapshot_basis(thermal_block, mu))
        u_n = solve_reduced(model, mu).coordinates

        assert residual_dual_norm(model, mu, u_n) <= 1e-8 * np.sqrt(model.residual_gram.c_ff)

    def test_gram_form_agrees_with_range_form(self, model5, random_parameters):
        """Test that the expanded quadratic form matches the range coordinates."""
        gram = model5.residual_gram
        gram_only = dataclasses.replace(
            model5, residual_gram=ResidualGram(gram.c_ff, gram.c_fA, gram.c_AA)
        )
        rng = np.random.default_rng(10)
        for mu in random_parameters:
            u_n = rng.standard_normal(5)
            assert residual_dual_norm(gram_only, mu, u_n) == pytest.approx(
                residual_dual_norm(model5, mu, u_n), rel=1e-8
            )

    def test_range_dimension_bounded(self, model5):
        """Test r <= 1 + Q N for the residual range."""
        gram = model5.residual_gram
        assert 1 <= gram.range_dimension <= 1 + 4 * 5
        assert gram.range_blocks.shape == (4, gram.range_dimension, 5)

    def test_gram_schmidt_coordinates_agree(self, thermal_block, basis5, model5):
        """Test that the Gram-Schmidt range basis reproduces the whitened coordinates."""
        x = thermal_block.inner_product
        applied = [a_q @ basis5.matrix for a_q in thermal_block.operator.matrices]
        duals = np.column_stack([thermal_block.load, *applied])
        representers = spla.spsolve(sp.csc_matrix(x), duals)

        range_basis = residual_range_basis(x, representers)
        coordinates = range_basis.T @ duals
        gram = model5.residual_gram

        assert np.abs(range_basis.T @ (x @ range_basis) - np.eye(range_basis.shape[1])).max() <= 1e-10
        rng = np.random.default_rng(12)
        for _ in range(5):
            weights = np.concatenate([[1.0], rng.standard_normal(4 * 5)])
            expected = np.linalg.norm(
                gram.range_load * weights[0]
                + np.einsum("jrn,jn->r", gram.range_blocks, weights[1:].reshape(4, 5))
            )
            assert np.linalg.norm(coordinates @ weights) == pytest.approx(expected, rel=1e-9)

    def test_length_mismatch_rejected(self, model5):
        """Test that u_N must have the basis size."""
        with pytest.raises(InputRejected):
            residual_dual_norm(model5, Parameter((1.0, 1.0, 1.0, 1.0)), np.zeros(4))


class TestResidualDualNormAtScale:
    """Residual norms at n_h = 9801, where the residual is many digits below ||f||."""

    @pytest.fixture(scope="class")
    def fine_setup(self):
        problem = build_thermal_block(2, 2, 100, (0.1, 10.0))
        snapshot_mus = sample_training_set(problem.domain, RandomSampling(20, seed=21))
        snapshots = np.column_stack([solve_truth(problem, mu).coefficients for mu in snapshot_mus])
        basis = orthonormalize_columns(snapshots, problem.inner_product)
        return problem, basis, project(problem, basis)

    def test_reduced_solution_residuals(self, fine_setup):
        """Test reduced-data dual norms against truth Riesz solves at 50 parameters."""
        problem, basis, model = fine_setup
        assert problem.size == 9801

        for mu in sample_training_set(problem.domain, RandomSampling(50, seed=22)):
            u_n = solve_reduced(model, mu).coordinates
            r = problem.load - problem.operator.assemble(mu) @ basis.lift(u_n)

            assert residual_dual_norm(model, mu, u_n) == pytest.approx(truth_dual_norm(problem, r), rel=1e-8)


class TestOnlineCostIndependentOfTruthSize:
    """Online data and timing at two mesh sizes with the same reduced dimension."""

    @staticmethod
    def _model(cells: int):
        problem = build_thermal_block(2, 2, cells, (0.1, 10.0))
        snapshot_mus = sample_training_set(problem.domain, RandomSampling(5, seed=2))
        snapshots = np.column_stack([solve_truth(problem, mu).coefficients for mu in snapshot_mus])
        return problem, project(problem, orthonormalize_columns(snapshots, problem.inner_product))

    @staticmethod
    def _online_seconds(model, parameters) -> float:
        best = float("inf")
        for _ in range(5):
            start = time.perf_counter()
            for mu in parameters:
                solve_and_certify(model, mu)
            best = min(best, time.perf_counter() - start)
        return best

    def test_reduced_arrays_carry_no_truth_dimension(self):
        """Test that every online array has the same shape at n_h = 49 and n_h = 3969."""
        coarse_problem, coarse = self._model(8)
        fine_problem, fine = self._model(64)
        assert (coarse_problem.size, fine_problem.size) == (49, 3969)

        for name in ("reduced_terms", "reduced_load", "reduced_outputs", "continuity_constants", "output_dual_norms"):
            assert getattr(coarse, name).shape == getattr(fine, name).shape, name
        for model in (coarse, fine):
            gram = model.residual_gram
            assert gram.c_fA.shape == (4, 5)
            assert gram.c_AA.shape == (4, 4, 5, 5)
            assert gram.range_dimension <= 1 + 4 * 5
            assert gram.range_blocks.shape == (4, gram.range_dimension, 5)

    def test_solve_and_certify_time(self):
        """Test that 200 online queries at n_h = 3969 cost at most twice those at n_h = 49."""
        _, coarse = self._model(8)
        _, fine = self._model(64)
        parameters = sample_training_set(coarse.domain, RandomSampling(200, seed=4))
        self._online_seconds(coarse, parameters[:10])

        assert self._online_seconds(fine, parameters) <= 2.0 * self._online_seconds(coarse, parameters)


class TestBounds:
    """Tests for the coercivity and continuity bounds."""

    def test_min_theta_formula(self, model5):
        """Test C_ref min_q theta_q(mu) / theta_q(mu_bar)."""
        assert coercivity_lower_bound(model5, Parameter((0.5, 2.0, 0.3, 9.0))) == pytest.approx(0.3)

    def test_min_theta_below_true_coercivity(self, thermal_block, model5, random_parameters):
        """Test the lower bound against the smallest generalized eigenvalue."""
        x = thermal_block.inner_product
        for mu in random_parameters:
            exact = smallest_generalized_eigenvalue(thermal_block.operator.assemble(mu), x)
            assert coercivity_lower_bound(model5, mu) <= exact * (1.0 + 1e-10)

    def test_continuity_above_true_norm(self, thermal_block, model5, random_parameters):
        """Test the upper bound against the largest generalized eigenvalue."""
        x = thermal_block.inner_product.toarray()
        for mu in random_parameters:
            a = thermal_block.operator.assemble(mu).toarray()
            exact = sla.eigh(a, x, eigvals_only=True)[-1]
            assert continuity_upper_bound(model5, mu) >= exact * (1.0 - 1e-10)

    def test_unflagged_coefficient_rejected(self, model5):
        """Test that min-theta refuses coefficients not declared positive."""
        unflagged = tuple(
            CoefficientFunction.component(q, positive=False) for q in range(model5.num_terms)
        )
        model = dataclasses.replace(model5, coefficients=unflagged)
        with pytest.raises(MinThetaInapplicable):
            coercivity_lower_bound(model, Parameter((1.0, 1.0, 1.0, 1.0)))


class TestCertify:
    """Tests for certify."""

    def test_error_bound_is_residual_over_coercivity(self, model5, random_parameters):
        """Test error_bound = residual / alpha_LB and the output bound."""
        _, certificate = solve_and_certify(model5, random_parameters[0])

        assert certificate.error_bound == certificate.residual_dual_norm / certificate.coercivity_lb
        np.testing.assert_allclose(
            certificate.output_bound, model5.output_dual_norms * certificate.error_bound
        )

    def test_rigor_and_effectivity(self, thermal_block, basis5, model5, random_parameters):
        """Test true error <= bound <= (UB/LB) true error."""
        x = thermal_block.inner_product
        for mu in random_parameters:
            solution, certificate = solve_and_certify(model5, mu)
            truth = solve_truth(thermal_block, mu).coefficients
            true_error = x_norm(x, truth - basis5.lift(solution.coordinates))
            ratio = continuity_upper_bound(model5, mu) / certificate.coercivity_lb

            assert certificate.error_bound + 1e-9 >= true_error
            assert certificate.error_bound <= ratio * true_error + 1e-8

    def test_output_rigor(self, thermal_block, model5, random_parameters):
        """Test |s(u) - s_N| <= output bound."""
        for mu in random_parameters:
            solution, certificate = solve_and_certify(model5, mu)
            truth = solve_truth(thermal_block, mu).coefficients
            output_error = np.abs(thermal_block.outputs @ truth - solution.outputs)
            assert np.all(output_error <= certificate.output_bound + 1e-9)

    def test_reproduced_snapshot_certified(self, thermal_block):
        """Test error_bound <= 1e-7 at the snapshot parameter."""
        mu = thermal_block.reference_parameter
        model = project(thermal_block, single_snapshot_basis(thermal_block, mu))

        _, certificate = solve_and_certify(model, mu)

        assert certificate.error_bound <= 1e-7

    def test_parameter_mismatch_rejected(self, model5, random_parameters):
        """Test that a solution for another parameter is refused."""
        solution = solve_reduced(model5, random_parameters[0])
        with pytest.raises(InputRejected):
            certify(model5, random_parameters[1], solution)

    def test_record_layout(self, model5, random_parameters):
        """Test the JSON record keys."""
        _, certificate = solve_and_certify(model5, random_parameters[0])
        record = certificate.to_record()

        assert set(record) == {
            "mu", "outputs", "error_bound", "output_bounds", "coercivity_lb", "residual_norm",
        }
        assert record["mu"] == list(random_parameters[0].values)
