"""
Standardized exit codes for the netspec CLI.
"""

from __future__ import annotations


class ExitCode:
    """Standard exit codes for netspec."""

    SUCCESS = 0  # Operation completed successfully
    ERROR = 1  # Unexpected error
    CONFIG_ERROR = 2  # Invalid run configuration or input files
    SINGULAR_MATRIX = 3  # Stage-1 matrix A is singular
    INTEGRATION_FAILURE = 4  # Consensus flow diverged or step size too large
    VALIDATION_ERROR = 5  # Zero-pattern or graph validation reported violations
    ROOT_FINDING_ERROR = 6  # Polynomial root finder did not converge
