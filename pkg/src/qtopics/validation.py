"""Shared argument-checking helpers and the contract-violation error type.

Input errors (bad files, bad arguments) raise ``ValueError``/``OSError``
subclasses and map to CLI exit code 1.  ``ContractViolationError`` marks a
broken internal invariant (negative counts, unnormalized weights) and maps
to exit code 2.
"""
from __future__ import annotations

import numpy as np


class ContractViolationError(RuntimeError):
    """An internal invariant was violated (caller or library bug)."""


def check_positive(name: str, value) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")


def check_fraction(name: str, value) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must be in (0, 1), got {value!r}")


def check_counts_nonnegative(name: str, counts: np.ndarray) -> None:
    if np.any(np.asarray(counts) < 0):
        raise ContractViolationError(f"{name} contains negative counts")


def check_weights_normalized(weights: np.ndarray, tol: float = 1e-6) -> None:
    total = float(np.sum(weights))
    if abs(total - 1.0) > tol:
        raise ContractViolationError(
            f"weight vector must sum to 1 (got {total!r})"
        )
    if np.any(np.asarray(weights) < 0):
        raise ContractViolationError("weight vector contains negative entries")
