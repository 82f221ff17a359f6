"""Exception hierarchy shared by the model, planner, Monte Carlo, and CLI layers.

The split matters for the CLI exit codes: configuration problems map to
exit 2, model-level failures (diverging or unreachable configurations)
to exit 3, and simulation aborts to exit 4.
"""


class ConfigError(ValueError):
    """A parameter, flag, or config-file entry is malformed or out of range."""


class ModelError(RuntimeError):
    """Base class for failures of the analytical model itself."""


class NonTerminatingProcess(ModelError):
    """Entanglement creation has zero success probability; waiting times diverge."""


class UnreachableConfiguration(ModelError):
    """The end-to-end success probability underflows to zero."""


class BeyondRepresentable(ModelError):
    """A requested quantity overflows double precision."""


class NoCrossoverInRange(ModelError):
    """Repeater and direct-transmission curves do not cross inside the bracket."""


class SimulationAbort(RuntimeError):
    """The sampler hit the rounds-per-success guard and gave up."""
