"""
Tests for error handler module
"""

import logging

import numpy as np
import pytest

from thermoporo.error_handler import (
    EXIT_SOLVER,
    EXIT_USAGE,
    ArgumentError,
    ConfigError,
    ConvergenceError,
    DomainError,
    OverflowGuardError,
    ShapeError,
    SingularSystemError,
    SolverError,
    SweepError,
    ThermoporoError,
    exit_code_for,
    handle_failed_run,
    is_solver_failure,
)


class TestIsSolverFailure:
    """Tests for is_solver_failure function"""

    def test_singular_system_is_solver_failure(self):
        """Test that singular systems are solver failures"""
        assert is_solver_failure(SingularSystemError("zero pivot in column 3")) is True

    def test_overflow_guard_is_solver_failure(self):
        """Test that overflow guards are solver failures"""
        assert is_solver_failure(OverflowGuardError("alpha_f too large")) is True

    def test_convergence_error_is_solver_failure(self):
        """Test that a failed order check is a solver failure"""
        assert is_solver_failure(ConvergenceError("order 0.9 below 1.5")) is True

    def test_solver_error_is_solver_failure(self):
        """Test that solver errors with context are solver failures"""
        assert is_solver_failure(SolverError("step failed", t=60.0)) is True

    def test_numpy_linalg_error_is_solver_failure(self):
        """Test that LinAlgError from numpy is a solver failure"""
        assert is_solver_failure(np.linalg.LinAlgError("Singular matrix")) is True

    def test_floating_point_error_is_solver_failure(self):
        """Test that trapped floating point errors are solver failures"""
        assert is_solver_failure(FloatingPointError("overflow")) is True

    def test_config_error_is_usage(self):
        """Test that config errors are usage failures"""
        assert is_solver_failure(ConfigError("unknown key")) is False

    @pytest.mark.parametrize("cls", [DomainError, ShapeError, ArgumentError])
    def test_input_errors_are_usage(self, cls):
        """Test that domain, shape and argument errors are usage failures"""
        assert is_solver_failure(cls("bad input")) is False

    def test_os_error_is_usage(self):
        """Test that unreadable files are usage failures"""
        assert is_solver_failure(FileNotFoundError("run.ini")) is False

    def test_sweep_error_follows_cause(self):
        """Test that a sweep failure is classified by its cause"""
        solver = SweepError("kappa_s", 2.0, SingularSystemError("zero pivot"))
        usage = SweepError("phi_f", 1.5, ConfigError("phi_f must be < 1"))
        assert is_solver_failure(solver) is True
        assert is_solver_failure(usage) is False


class TestExceptions:
    """Tests for the exception hierarchy"""

    def test_value_error_compatibility(self):
        """Test that input errors are also ValueErrors"""
        assert issubclass(DomainError, ValueError)
        assert issubclass(ShapeError, ValueError)
        assert issubclass(ArgumentError, ValueError)

    def test_singular_is_linalg_error(self):
        """Test that SingularSystemError is a numpy LinAlgError"""
        assert issubclass(SingularSystemError, np.linalg.LinAlgError)

    def test_context_kept(self):
        """Test that keyword context is stored on the exception"""
        error = SolverError("failed", Da=0.05, n=201)
        assert error.context == {"Da": 0.05, "n": 201}
        assert isinstance(error, ThermoporoError)

    def test_config_error_message(self):
        """Test that ConfigError prefixes the line and appends a suggestion"""
        error = ConfigError(
            "unknown key 'grid_node'", line=7, key="grid_node", suggestion="grid_nodes"
        )
        assert str(error) == "line 7: unknown key 'grid_node' (did you mean 'grid_nodes'?)"
        assert error.line == 7

    def test_sweep_error_chains_cause(self):
        """Test that SweepError keeps the failing value and its cause"""
        cause = OverflowGuardError("overflow")
        error = SweepError("h_exch", 1e9, cause)
        assert error.__cause__ is cause
        assert error.value == 1e9
        assert "h_exch" in str(error)


class TestHandleFailedRun:
    """Tests for handle_failed_run function"""

    def test_exit_codes(self):
        """Test exit code 2 for solver failures and 1 otherwise"""
        assert exit_code_for(SingularSystemError("x")) == EXIT_SOLVER
        assert exit_code_for(ConfigError("x")) == EXIT_USAGE
        assert exit_code_for(RuntimeError("x")) == EXIT_USAGE

    def test_logs_solver_failure(self, caplog):
        """Test that solver failures are logged with their context"""
        error = SolverError("transient step is singular", t=120.0, n_nodes=21.0)
        with caplog.at_level(logging.ERROR, logger="thermoporo"):
            code = handle_failed_run("transient", error)
        assert code == EXIT_SOLVER
        assert "Solver failure in 'transient'" in caplog.text
        record = caplog.records[-1]
        assert record.command == "transient"
        assert record.ctx_t == 120.0
        assert record.exit_code == EXIT_SOLVER

    def test_logs_usage_failure(self, caplog):
        """Test that usage failures are logged as invalid usage"""
        with caplog.at_level(logging.ERROR, logger="thermoporo"):
            code = handle_failed_run("solve", ConfigError("bad value", line=3, key="dt"))
        assert code == EXIT_USAGE
        assert "Invalid usage of 'solve'" in caplog.text
        record = caplog.records[-1]
        assert record.ctx_line == 3
        assert not hasattr(record, "ctx_suggestion")
