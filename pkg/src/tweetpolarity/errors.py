"""Error types shared across the pipeline.

DataError covers malformed inputs (bad TSV rows, missing classes, broken
checkpoints); the CLI maps it to exit code 2.
"""


class DataError(ValueError):
    pass


class CheckpointError(DataError):
    pass


class ConfigError(DataError):
    pass
