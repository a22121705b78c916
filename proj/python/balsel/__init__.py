"""Sensor and actuator selection from balanced modes."""

from ._core import (  # noqa: F401
    DimensionError,
    DomainError,
    Error,
    FeasibilityError,
    HorizonError,
    NumericError,
    RankError,
    SingularityError,
    SizeError,
    SynthesisError,
    balance,
    brute_force,
    gl_place,
    gramians,
    h2_norm,
    logdet,
    pivoted_qr,
    random_system,
    select,
    solve_care,
    solve_lyapunov,
    solve_stein,
)

__version__ = "0.1.0"
