"""Validation utility functions for suite inputs and scenarios."""

from typing import List, Sequence

SWEEP_PARAMETERS = ("k", "N", "grid", "tau")


def validate_resolutions(values: Sequence[int], minimum: int, name: str = "resolution") -> List[int]:
    """Check a list of resolutions or levels.

    Args:
        values: Levels, grid sizes or loop vertex counts
        minimum: Smallest admissible entry
        name: Label used in the error message

    Returns:
        The values as a list, unchanged

    Raises:
        ValueError: If the list is empty, an entry is below ``minimum`` or the list repeats a value
    """
    values = [int(v) for v in values]
    if not values:
        raise ValueError(f"At least one {name} is required")
    if min(values) < minimum:
        raise ValueError(f"Every {name} must be >= {minimum}, got {min(values)}")
    if len(set(values)) != len(values):
        raise ValueError(f"Repeated {name} in {values}")
    return values


def validate_ascending(values: Sequence[int], name: str = "resolution") -> List[int]:
    """Check that a convergence ladder is strictly increasing."""
    values = list(values)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} values must increase, got {values}")
    return values


def validate_sweep_parameter(name: str) -> str:
    """Normalize a sweep parameter name.

    Raises:
        ValueError: If the parameter is not one of ``k``, ``N``, ``grid``, ``tau``
    """
    if name not in SWEEP_PARAMETERS:
        raise ValueError(f"Unknown sweep parameter {name!r}; choose one of {', '.join(SWEEP_PARAMETERS)}")
    return name
