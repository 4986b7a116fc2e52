"""
Tests for offline basis construction.

Tests:
- Gram-Schmidt extension and dependence detection
- POD against a dense SVD
- Weak and strong greedy runs, traces and aborts
- Parameter sweeps
"""

import dataclasses

import numpy as np
import pytest
import scipy.sparse as sp

from affine.coefficients import CoefficientFunction
from affine.operator import AffineOperator
from affine.parameters import Parameter, RandomSampling, UniformGrid, sample_training_set
from artifacts.store import read_csv_rows
from errors import GreedyAborted, InputRejected, LinearDependence
from nwidth.rates import fit_subexponential_decay
from offline.greedy import GreedyConfig, GreedyMode, run_greedy, select_argmax, weak_greedy_gamma
from offline.orthonormalize import orthonormalize_columns, orthonormalize_extend
from offline.pod import pod
from offline.sweep import ParameterSweep, SweepFailed
from offline.trace import GreedyIteration, GreedyTrace
from reduced.model import ReducedBasis, project
from reduced.online import solve_and_certify
from truth.linalg import x_norm, x_norms
from truth.solvers import solve_truth
from truth.thermal_block import build_poisson_1d, build_thermal_block


@pytest.fixture
def thermal_block():
    """2x2 thermal block on an 8x8 mesh."""
    return build_thermal_block(2, 2, 8, (0.1, 10.0))


@pytest.fixture
def weighted_metric():
    """Random SPD tridiagonal inner product of size 60."""
    rng = np.random.default_rng(0)
    off = -rng.uniform(0.1, 0.4, 59)
    main = 2.0 + rng.uniform(0.0, 1.0, 60)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


class TestOrthonormalize:
    """Tests for orthonormalize_extend / orthonormalize_columns."""

    def test_extend_empty_basis(self, weighted_metric):
        """Test that the first column is v / ||v||_X."""
        v = np.random.default_rng(1).standard_normal(60)

        basis = orthonormalize_extend(ReducedBasis.empty(60), v, weighted_metric)

        np.testing.assert_allclose(basis.matrix[:, 0], v / x_norm(weighted_metric, v), rtol=1e-12)

    def test_dependent_vector_rejected(self, weighted_metric):
        """Test rejection of a vector in the current span."""
        v = np.random.default_rng(2).standard_normal(60)
        basis = orthonormalize_extend(ReducedBasis.empty(60), v, weighted_metric)

        with pytest.raises(LinearDependence):
            orthonormalize_extend(basis, 3.0 * v, weighted_metric)
        with pytest.raises(LinearDependence):
            orthonormalize_extend(basis, np.zeros(60), weighted_metric)

    def test_random_extension_orthonormal(self, weighted_metric):
        """Test V^T X V = I after many extensions."""
        vectors = np.random.default_rng(3).standard_normal((60, 25))

        basis = orthonormalize_columns(vectors, weighted_metric)

        assert basis.size == 25
        assert basis.orthonormality_defect(weighted_metric) <= 1e-10

    def test_dependent_column_skipped(self, weighted_metric):
        """Test that orthonormalize_columns skips a repeated direction."""
        v = np.random.default_rng(4).standard_normal((60, 2))
        vectors = np.column_stack([v, v[:, 0] + v[:, 1]])

        assert orthonormalize_columns(vectors, weighted_metric).size == 2

    def test_parameter_recorded(self, weighted_metric):
        """Test that the snapshot parameter is stored with the column."""
        mu = Parameter((0.5,))
        basis = orthonormalize_extend(ReducedBasis.empty(60), np.ones(60), weighted_metric, mu)
        assert basis.snapshot_parameters == (mu,)


class TestPOD:
    """Tests for pod."""

    def test_single_snapshot(self, weighted_metric):
        """Test that one snapshot gives one mode +-v/||v||_X and sigma_1 = ||v||_X."""
        v = np.random.default_rng(5).standard_normal(60)
        norm = x_norm(weighted_metric, v)

        result = pod([v], weighted_metric, 3)

        assert result.num_modes == 1
        assert result.singular_values[0] == pytest.approx(norm, rel=1e-12)
        assert abs(result.modes[:, 0] @ (weighted_metric @ v)) == pytest.approx(norm, rel=1e-12)

    def test_matches_dense_svd(self, weighted_metric):
        """Test singular values and projection errors against an SVD of L^T S."""
        snapshots = np.random.default_rng(6).standard_normal((60, 20))
        lower = np.linalg.cholesky(weighted_metric.toarray())
        expected = np.linalg.svd(lower.T @ snapshots, compute_uv=False)

        result = pod(snapshots, weighted_metric, 8)

        np.testing.assert_allclose(result.spectrum, expected, rtol=1e-9)
        assert result.singular_values.shape == (8,)
        coefficients = result.modes.T @ (weighted_metric @ snapshots)
        defects = snapshots - result.modes @ coefficients
        projection_error = np.sqrt(np.sum(x_norms(weighted_metric, defects) ** 2))
        assert projection_error == pytest.approx(result.tail_energy(8), rel=1e-9)

    def test_modes_orthonormal_and_sorted(self, weighted_metric):
        """Test X-orthonormal modes and descending singular values."""
        result = pod(np.random.default_rng(7).standard_normal((60, 12)), weighted_metric, 12)

        gram = result.modes.T @ (weighted_metric @ result.modes)
        assert np.abs(gram - np.eye(result.num_modes)).max() <= 1e-10
        assert np.all(np.diff(result.singular_values) <= 0.0)

    def test_rank_truncation(self, weighted_metric):
        """Test that a rank-2 set yields at most two modes."""
        v = np.random.default_rng(8).standard_normal((60, 2))
        snapshots = v @ np.random.default_rng(9).standard_normal((2, 10))

        assert pod(snapshots, weighted_metric, 5).num_modes == 2

    def test_zero_snapshots(self, weighted_metric):
        """Test that an all-zero set gives no modes and zero singular values."""
        result = pod(np.zeros((60, 4)), weighted_metric, 2)
        assert result.num_modes == 0
        np.testing.assert_array_equal(result.singular_values, [0.0, 0.0])

    def test_invalid_requests_rejected(self, weighted_metric):
        """Test m < 1 and empty sets."""
        with pytest.raises(InputRejected):
            pod(np.ones((60, 2)), weighted_metric, 0)
        with pytest.raises(InputRejected):
            pod([], weighted_metric, 1)


class TestParameterSweep:
    """Tests for ParameterSweep."""

    def test_order_preserved_with_threads(self):
        """Test that results follow input order for any worker count."""
        parameters = [Parameter((float(i),)) for i in range(20)]
        sequential = ParameterSweep(1).map(lambda mu: mu.values[0] ** 2, parameters)
        threaded = ParameterSweep(4).map(lambda mu: mu.values[0] ** 2, parameters)
        assert sequential == threaded == [float(i * i) for i in range(20)]

    def test_first_failure_reported(self):
        """Test that the earliest failing index is propagated."""
        def fail_from_five(mu):
            if mu.values[0] >= 5:
                raise ValueError("boom")
            return mu.values[0]

        parameters = [Parameter((float(i),)) for i in range(10)]
        with pytest.raises(SweepFailed) as exc_info:
            ParameterSweep(3).map(fail_from_five, parameters)
        assert exc_info.value.index == 5
        assert isinstance(exc_info.value.cause, ValueError)

    def test_invalid_thread_count(self):
        """Test that at least one worker is required."""
        with pytest.raises(ValueError):
            ParameterSweep(0)


class TestGreedyConfig:
    """Tests for GreedyConfig validation."""

    def test_rejects_bad_values(self):
        """Test empty training sets and non-positive limits."""
        mu = Parameter((1.0,))
        with pytest.raises(InputRejected):
            GreedyConfig(training_set=(), max_basis_size=1, target_error=1e-3)
        with pytest.raises(InputRejected):
            GreedyConfig(training_set=(mu,), max_basis_size=0, target_error=1e-3)
        with pytest.raises(InputRejected):
            GreedyConfig(training_set=(mu,), max_basis_size=1, target_error=0.0)

    def test_rejects_parameters_outside_domain(self, thermal_block):
        """Test that run_greedy checks the training set before solving."""
        config = GreedyConfig(
            training_set=(Parameter((20.0, 1.0, 1.0, 1.0)),), max_basis_size=3, target_error=1e-6
        )
        with pytest.raises(InputRejected):
            run_greedy(thermal_block, config)

    def test_argmax_ties_go_to_lowest_index(self):
        """Test tie-breaking of the selection."""
        assert select_argmax(np.array([1.0, 3.0, 3.0, 2.0])) == 1


class TestRunGreedy:
    """Tests for run_greedy."""

    def test_singleton_training_set(self, thermal_block):
        """Test one iteration to reproduce the only training parameter."""
        mu = thermal_block.reference_parameter
        config = GreedyConfig(training_set=(mu,), max_basis_size=5, target_error=1e-7)

        basis, model, trace = run_greedy(thermal_block, config)

        assert basis.size == 1
        assert trace.stop_reason == "target"
        assert trace.final_error <= 1e-7
        assert basis.snapshot_parameters == (mu,)
        assert model.basis_size == 1

    def test_single_block_needs_one_snapshot(self):
        """Test that a ray manifold is captured at N = 1."""
        problem = build_thermal_block(1, 1, 8, (0.1, 10.0))
        training = sample_training_set(problem.domain, UniformGrid(7))
        config = GreedyConfig(training_set=tuple(training), max_basis_size=5, target_error=1e-6)

        basis, _, trace = run_greedy(problem, config)

        assert basis.size == 1
        assert trace.stop_reason == "target"
        # Empty-basis bounds scale like 1/mu, so the smallest mu is chosen first.
        assert trace.iterations[0].selected_mu == Parameter((0.1,))

    def test_thermal_block_convergence(self, thermal_block):
        """Test trace consistency and error decay on a 3^4 training grid."""
        training = sample_training_set(thermal_block.domain, UniformGrid(3))
        config = GreedyConfig(training_set=tuple(training), max_basis_size=12, target_error=1e-10)

        basis, model, trace = run_greedy(thermal_block, config)

        assert basis.orthonormality_defect(thermal_block.inner_product) <= 1e-10
        assert trace.argmax_consistent()
        # One snapshot per iteration; the last record only reports the final error.
        assert trace.basis_sizes[:-1] == list(range(1, basis.size + 1))
        assert trace.iterations[-1].selected_mu is None
        envelope = trace.envelope()
        assert np.all(np.diff(envelope) <= 0.0)
        assert envelope[-1] < 1e-2 * envelope[0]
        assert model.basis_size == basis.size

    def test_decay_fit_has_positive_rate(self, thermal_block):
        """Test that the greedy curve fits C exp(-c N^(1/Q)) with c > 0."""
        training = sample_training_set(thermal_block.domain, UniformGrid(3))
        config = GreedyConfig(training_set=tuple(training), max_basis_size=10, target_error=1e-10)

        _, _, trace = run_greedy(thermal_block, config)

        sizes = np.array([it.basis_size_after for it in trace.iterations[:-1]]) - 1
        fit = fit_subexponential_decay(sizes[1:], trace.envelope()[1:-1], 0.25)
        assert fit.rate > 0.0

    def test_estimator_table_is_certified(self, thermal_block):
        """Test that every table entry bounds the true error of the final model."""
        training = sample_training_set(thermal_block.domain, RandomSampling(8, seed=4))
        config = GreedyConfig(training_set=tuple(training), max_basis_size=4, target_error=1e-10)

        basis, model, trace = run_greedy(thermal_block, config)

        for mu, bound in zip(training, trace.error_tables[-1]):
            truth = solve_truth(thermal_block, mu).coefficients
            coordinates = solve_and_certify(model, mu)[0].coordinates
            assert x_norm(thermal_block.inner_product, truth - basis.lift(coordinates)) <= bound + 1e-9

    def test_seed_parameter(self, thermal_block):
        """Test that a seed replaces the first argmax."""
        seed = Parameter((5.0, 5.0, 5.0, 5.0))
        training = sample_training_set(thermal_block.domain, UniformGrid(2))
        config = GreedyConfig(
            training_set=tuple(training), max_basis_size=3, target_error=1e-10, seed_parameter=seed
        )

        basis, _, trace = run_greedy(thermal_block, config)

        assert trace.iterations[0].seeded
        assert trace.iterations[0].selected_mu == seed
        assert basis.snapshot_parameters[0] == seed
        assert trace.argmax_consistent()

    def test_strong_mode_uses_true_errors(self, thermal_block):
        """Test that strong selection reports true errors, below the certified bounds."""
        training = tuple(sample_training_set(thermal_block.domain, RandomSampling(6, seed=5)))
        weak = GreedyConfig(training_set=training, max_basis_size=3, target_error=1e-10)
        strong = dataclasses.replace(weak, mode=GreedyMode.STRONG)

        _, _, weak_trace = run_greedy(thermal_block, weak)
        _, _, strong_trace = run_greedy(thermal_block, strong)

        # Same empty-basis start: true errors never exceed the bounds.
        assert np.all(strong_trace.error_tables[0] <= weak_trace.error_tables[0] + 1e-12)
        assert strong_trace.stop_reason == "max_size"

    def test_validation_set_logs_true_error(self, thermal_block):
        """Test held-out true errors in the trace."""
        training = tuple(sample_training_set(thermal_block.domain, RandomSampling(6, seed=6)))
        held_out = tuple(sample_training_set(thermal_block.domain, RandomSampling(3, seed=7)))
        config = GreedyConfig(
            training_set=training, max_basis_size=2, target_error=1e-10, validation_set=held_out
        )

        _, _, trace = run_greedy(thermal_block, config)

        assert all(it.max_true_error is not None for it in trace.iterations)

    def test_threads_do_not_change_result(self, thermal_block):
        """Test that the sweep worker count leaves the basis unchanged."""
        training = tuple(sample_training_set(thermal_block.domain, RandomSampling(10, seed=8)))
        config = GreedyConfig(training_set=training, max_basis_size=3, target_error=1e-10)

        basis_1, _, _ = run_greedy(thermal_block, config)
        basis_4, _, _ = run_greedy(thermal_block, dataclasses.replace(config, threads=4))

        np.testing.assert_array_equal(basis_1.matrix, basis_4.matrix)

    def test_abort_keeps_partial_state(self):
        """Test that an estimator failure surfaces as GreedyAborted with the trace."""
        base = build_poisson_1d(16)
        operator = AffineOperator(
            (CoefficientFunction.component(0, positive=False),), base.operator.matrices, base.domain
        )
        problem = dataclasses.replace(base, operator=operator)
        config = GreedyConfig(training_set=(Parameter((1.0,)),), max_basis_size=2, target_error=1e-8)

        with pytest.raises(GreedyAborted) as exc_info:
            run_greedy(problem, config)

        aborted = exc_info.value
        assert aborted.trace.stop_reason == "aborted"
        assert aborted.basis.size == 0
        assert aborted.model is not None and not aborted.model.complete


class TestGreedyAtDeskScale:
    """Weak greedy on the 2x2 block, 64 cells per axis, 5^4 training grid, target 1e-6."""

    @pytest.fixture(scope="class")
    def run(self):
        problem = build_thermal_block(2, 2, 64, (0.1, 10.0))
        training = sample_training_set(problem.domain, UniformGrid(5))
        config = GreedyConfig(training_set=tuple(training), max_basis_size=40, target_error=1e-6)
        return problem, *run_greedy(problem, config)

    def test_reaches_target(self, run):
        """Test convergence below 1e-6 within N <= 40 with argmax-consistent selections."""
        _, basis, model, trace = run

        assert trace.stop_reason == "target"
        assert trace.final_error <= 1e-6
        assert basis.size <= 40
        assert model.basis_size == basis.size
        assert trace.argmax_consistent()

    def test_energy_errors_non_increasing(self, run):
        """Test that Galerkin energy-norm errors never grow as the nested basis grows."""
        problem, basis, _, _ = run
        v = basis.matrix
        for mu in sample_training_set(problem.domain, RandomSampling(4, seed=8)):
            a = problem.operator.assemble(mu)
            u = solve_truth(problem, mu).coefficients
            av = a @ v
            errors = []
            for n in range(1, basis.size + 1):
                coordinates = np.linalg.solve(v[:, :n].T @ av[:, :n], v[:, :n].T @ problem.load)
                e = u - v[:, :n] @ coordinates
                errors.append(np.sqrt(max(float(e @ (a @ e)), 0.0)))
            assert all(later <= earlier * (1 + 1e-8) + 1e-12 for earlier, later in zip(errors, errors[1:]))

    def test_envelope_decay_fit(self, run):
        """Test a positive rate for C exp(-c N^(1/4)) fitted to the running minimum."""
        _, _, _, trace = run
        envelope = trace.envelope()
        sizes = np.arange(envelope.size)

        assert np.all(np.diff(envelope) <= 0.0)
        fit = fit_subexponential_decay(sizes[1:], envelope[1:], 0.25)
        assert fit.rate > 0.0
        assert envelope[-1] == trace.final_error


class TestGreedyTrace:
    """Tests for the trace exports."""

    def test_csv_exports(self, tmp_path, thermal_block):
        """Test trace and error-table layouts."""
        training = sample_training_set(thermal_block.domain, UniformGrid(2))
        config = GreedyConfig(training_set=tuple(training), max_basis_size=2, target_error=1e-10)
        _, _, trace = run_greedy(thermal_block, config)

        rows = read_csv_rows(trace.to_csv(tmp_path / "trace.csv"))
        table = read_csv_rows(trace.error_table_to_csv(tmp_path / "table.csv"))

        assert len(rows) == len(trace.iterations) == 3
        assert rows[-1]["mu_0"] == ""
        assert float(rows[0]["max_estimated_error"]) == trace.max_errors[0]
        assert len(table) == 16 * len(trace.error_tables)

    def test_argmax_check_detects_tampering(self):
        """Test that a non-argmax selection is reported."""
        mus = [Parameter((0.0,)), Parameter((1.0,))]
        trace = GreedyTrace(mus)
        trace.record(GreedyIteration(0, mus[0], 2.0, 1), np.array([1.0, 2.0]))

        assert not trace.argmax_consistent()

    def test_envelope_is_running_minimum(self):
        """Test that a rising max estimate is flattened in the envelope."""
        mus = [Parameter((0.0,))]
        trace = GreedyTrace(mus)
        for index, value in enumerate([4.0, 1.0, 2.5, 0.5]):
            trace.record(GreedyIteration(index, mus[0], value, index + 1), np.array([value]))

        np.testing.assert_array_equal(trace.envelope(), [4.0, 1.0, 1.0, 0.5])


class TestWeakGreedyGamma:
    """Tests for weak_greedy_gamma."""

    def test_single_term_is_one(self):
        """Test gamma = 1 for a Q = 1 problem."""
        problem = build_poisson_1d(16)
        model = project(problem, ReducedBasis.empty(problem.size))
        training = sample_training_set(problem.domain, UniformGrid(5))

        assert weak_greedy_gamma(model, training) == pytest.approx(1.0, rel=1e-10)

    def test_thermal_block_positive(self, thermal_block):
        """Test 0 < gamma <= 1 and the worst-corner ratio."""
        model = project(thermal_block, ReducedBasis.empty(thermal_block.size))
        corners = thermal_block.domain.corners()

        gamma = weak_greedy_gamma(model, corners)

        assert 0.0 < gamma <= 1.0
        assert gamma == min(weak_greedy_gamma(model, [mu]) for mu in corners)

    def test_scaling_invariance(self, thermal_block):
        """Test that mu -> c mu leaves gamma unchanged."""
        model = project(thermal_block, ReducedBasis.empty(thermal_block.size))
        training = sample_training_set(thermal_block.domain, RandomSampling(5, seed=9))
        scaled = [mu.scaled(0.5) for mu in training]

        assert weak_greedy_gamma(model, scaled) == pytest.approx(weak_greedy_gamma(model, training), rel=1e-12)
