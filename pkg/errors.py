#!/usr/bin/env python3
# Copyright (c) 2025-2026 Chris Favre - MIT License
# See LICENSE file for full terms
"""Error types shared by the toolkit and the exit codes the CLI maps them to."""

from __future__ import annotations

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class DeJongError(ValueError):
    """Base class for every error raised by the toolkit."""

    exit_code = EXIT_USAGE


class ModelError(DeJongError):
    """Malformed model: bad indices, shapes, probabilities or orders."""


class ContractError(DeJongError):
    """A documented precondition of an operation was violated."""


class NormalizationError(DeJongError):
    """Normalization requested for a statistic with (numerically) zero variance."""


class PositiveDefinitenessError(DeJongError):
    """Covariance matrix is not positive definite where it has to be."""


class BudgetError(DeJongError):
    """An exact enumeration would exceed the configured joint-atom budget."""

    exit_code = EXIT_BUDGET


class CapabilityError(DeJongError):
    """The request is beyond what the toolkit is configured to compute."""

    exit_code = EXIT_BUDGET


class ValidationFailure(DeJongError):
    """A checked identity or inequality did not hold within tolerance."""

    exit_code = EXIT_VALIDATION
