class ParameterError(ValueError):
    """Invalid physical parameter or malformed input."""


class InvariantError(RuntimeError):
    """A numerical invariant was violated during a simulation."""


class ConfigError(ValueError):
    """Experiment configuration could not be parsed or validated."""
