"""Exception hierarchy; the CLI maps these onto exit codes."""


class LocalsynError(Exception):
    pass


class ConfigError(LocalsynError, ValueError):
    """Invalid run configuration (CLI exit code 2)."""


class NumericalError(LocalsynError, RuntimeError):
    """A numerical routine could not produce a trustworthy answer (exit code 3)."""


class AssemblyError(NumericalError):
    """An assembled map violates a structural guarantee such as causality."""


class RankDeficiencyError(NumericalError):
    pass


class PoleProximityError(NumericalError, ZeroDivisionError):
    """A controller formula was evaluated (numerically) on one of its poles."""
