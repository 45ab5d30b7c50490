"""Exception types shared across the package.

The CLI maps these onto exit codes: schema/input problems exit 3,
internal invariant failures exit 4.
"""


class SchemaError(ValueError):
    """A file or config does not match its expected schema."""


class InvariantViolation(ValueError):
    """Validated data breaks one of its declared invariants.

    The message names the first violated invariant.
    """


class InternalError(RuntimeError):
    """A condition the engine itself guarantees was broken (a bug)."""
