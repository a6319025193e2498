"""Exception types shared across the simulator."""


class EcosimError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(EcosimError):
    """An experiment configuration is structurally or semantically invalid."""


class InvalidInputError(EcosimError):
    """A function received arguments outside its documented domain."""


class UnservableRequestError(EcosimError):
    """Evolution was asked to serve a request from an empty agent pool."""
