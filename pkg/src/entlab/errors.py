"""Exception hierarchy shared by all entlab modules.

The CLI maps these onto exit codes: validation problems (everything under
``ValidationError``) exit 1, ``ConsistencyError`` exits 2, I/O failures exit 3.
"""

from __future__ import annotations


class EntlabError(Exception):
    """Base class for all errors raised by entlab."""

    code = "error"


class ValidationError(EntlabError):
    """Invalid input: bad shapes, broken invariants, unusable configs."""

    code = "validation"


class ShapeError(ValidationError):
    """Matrix or structure dimensions do not line up."""

    code = "shape"


class SizeError(ValidationError):
    """Requested tensor dimension exceeds the configured maximum."""

    code = "size"


class DomainError(ValidationError):
    """Input is the right shape but outside an operation's domain."""

    code = "domain"


class NotPSDError(DomainError):
    """Matrix has an eigenvalue below the positive-semidefinite tolerance."""

    code = "not_psd"


class StructureError(ValidationError):
    """Operator is not supported on the declared block structure."""

    code = "structure"


class RefusalError(DomainError):
    """Brute-force oracle refused an instance it cannot enumerate."""

    code = "refusal"


class ConsistencyError(EntlabError):
    """Internal invariant violated; signals a numerics bug, not bad input."""

    code = "consistency"
