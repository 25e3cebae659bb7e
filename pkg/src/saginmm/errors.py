"""Exception types shared across the testbed."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration input."""


class CheckpointError(RuntimeError):
    """Checkpoint file is corrupt, truncated, or from an unknown format version."""


class TrainingDivergence(RuntimeError):
    """A loss or gradient became non-finite; training must stop loudly."""
