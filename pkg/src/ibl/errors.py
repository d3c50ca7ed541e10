"""Shared exception types."""


class ContractViolation(Exception):
    """A declared structural fact failed its probe (e.g. a non-bijection)."""


class CertificateError(Exception):
    """A tail certificate contradicted directly computed partial sums."""


class UnsupportedInput(Exception):
    """The operation is exact-only and the input has no exact route."""
