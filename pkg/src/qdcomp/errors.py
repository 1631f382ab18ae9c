"""Exception types shared by every module."""


class QdcompError(Exception):
    """Base class for all errors raised by :mod:`qdcomp`."""


class ContractError(QdcompError, ValueError):
    """An input violates an operation's precondition."""


class ResourceError(QdcompError, RuntimeError):
    """A configured size cap would be exceeded.

    Parameters
    ----------
    cap : str
        Name of the cap (``"max_dim"`` or ``"max_enum"``).
    limit : int
        Configured value of the cap.
    requested : int
        Size the operation would have needed.
    """

    def __init__(self, cap, limit, requested, what=""):
        self.cap = cap
        self.limit = limit
        self.requested = requested
        msg = f"{cap} exceeded: requested {requested} > limit {limit}"
        if what:
            msg = f"{what}: {msg}"
        super().__init__(msg)
