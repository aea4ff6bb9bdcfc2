import pytest
from SteinFlow.core.errors import (
    ConfigError,
    DomainError,
    EmptyBasisError,
    InstabilityError,
    InsufficientDataError,
    InvalidSpecError,
    NumericAbort,
    NumericError,
    SolverError,
    SteinFlowError,
)


class TestHierarchy:
    @pytest.mark.parametrize(
        "error,bases",
        [
            (InvalidSpecError, (SteinFlowError, ValueError)),
            (ConfigError, (InvalidSpecError,)),
            (DomainError, (SteinFlowError, ValueError)),
            (NumericError, (SteinFlowError, ArithmeticError)),
            (SolverError, (NumericError,)),
            (EmptyBasisError, (NumericError,)),
            (InstabilityError, (NumericError,)),
            (NumericAbort, (NumericError,)),
            (InsufficientDataError, (SteinFlowError, ValueError)),
        ],
    )
    def test_bases(self, error, bases):
        assert issubclass(error, bases)


class TestPayload:
    def test_config_error(self):
        e = ConfigError("schedule.h0", "step size must be positive")
        assert e.path == "schedule.h0"
        assert str(e) == "schedule.h0: step size must be positive"
        assert str(ConfigError("", "empty")) == "empty"

    def test_domain_error(self):
        e = DomainError("outside", coordinate=15.0)
        assert e.coordinate == 15.0

    def test_solver_error(self):
        e = SolverError("no convergence", residual=1e-3)
        assert e.residual == 1e-3
        assert "1.000e-03" in str(e)
        assert SolverError("no convergence").residual is None

    def test_numeric_abort(self):
        e = NumericAbort("escaped", particle=4, iteration=17)
        assert (e.particle, e.iteration) == (4, 17)
        assert "particle 4" in str(e)
