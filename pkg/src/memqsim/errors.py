"""Exception types shared across the simulator."""


class MemqsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(MemqsimError):
    """Invalid configuration (bad scenario field, unknown preset, ...).

    The CLI maps this to exit status 2.
    """


class SimulationError(MemqsimError):
    """Internal inconsistency detected while simulating (programming fault).

    The CLI maps this to exit status 1.
    """
