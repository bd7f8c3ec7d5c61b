"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed user input: unknown attributes, bad cell values, bad flags."""


class NotChainError(ValueError):
    """The FD set is not equivalent to one with an lhs chain, so the
    polynomial algorithms do not apply."""


class NotPrimaryKeyError(ValueError):
    """The FD set is not equivalent to a single primary key, so the
    linear-time scan does not apply."""


class CapExceededError(RuntimeError):
    """An exact enumeration would exceed its configured size cap.

    Raised instead of truncating: brute-force results are used as ground
    truth and must never be approximate.
    """
