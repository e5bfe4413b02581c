"""Spectral jump-diffusion simulator with pathwise sensitivities."""

from ._core import (
    __version__,
    bell_number,
    exponent_plan_check,
    gamma,
    run,
    semigroup_apply,
    set_partitions,
    simulate,
    solve_system,
    term_count,
)

__all__ = [
    "__version__",
    "bell_number",
    "exponent_plan_check",
    "gamma",
    "run",
    "semigroup_apply",
    "set_partitions",
    "simulate",
    "solve_system",
    "term_count",
]
