"""Exception types raised by the toolkit.

Plain argument problems raise ``ValueError``; the classes below mark the
failure modes callers usually want to tell apart.
"""


class PreconditionError(ValueError):
    """An operation was called on an object that lacks a required property."""


class NetExhaustedError(RuntimeError):
    """No entry of a net schedule satisfied the averaging criterion."""


class InconsistentDynamicsError(RuntimeError):
    """The dynamics could not be pushed through the GNS map consistently."""
