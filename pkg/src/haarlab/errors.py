"""Exception hierarchy shared by all haarlab modules."""


class HaarlabError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class InvalidArgumentError(HaarlabError, ValueError):
    pass


class GroupMismatchError(InvalidArgumentError):
    pass


class WindowOverflowError(HaarlabError):
    """A result would wrap around a finite torus window and alias."""


class CapExceededError(HaarlabError):
    exit_code = 4


class UnsupportedError(HaarlabError):
    pass


class NotAMemberError(HaarlabError):
    """An integer lacks the digit patterns a construction needs."""


class ConfigError(HaarlabError, ValueError):
    exit_code = 2

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
