#!/usr/bin/python3.10
########################################################################################
# __utils__.py - The utility module for the microsar package.                          #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 14/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

import logging
import os

from dataclasses import dataclass
from importlib import resources
from logging import Logger
from typing import Any

import yaml

__all__ = (
    "AmbiguousClassificationError",
    "data_directory",
    "DEFAULT_CHECKPOINT_INTERVAL",
    "DEFAULT_MAX_CROSS_HOPS",
    "DEFAULT_OVERLAP_THRESHOLD",
    "DEFAULT_RULE_MAX_HOPS",
    "DEFAULT_WORKERS",
    "DuplicateServiceError",
    "EmptyInputError",
    "get_logger",
    "GLOBAL_SETTINGS_FILEPATH",
    "GlobalSettings",
    "InputError",
    "MalformedDocumentError",
    "MicrosarError",
    "MissingTargetError",
    "PROFILE_ENVIRONMENT_VARIABLE",
    "ProfileError",
    "ProgrammerJudgementFault",
    "read_global_settings",
    "read_yaml",
    "SchemaViolationError",
    "ServiceNameMismatchError",
    "SourceParseError",
    "StaleBaselineError",
    "UndefinedSimilarityError",
    "UnknownRuleBindingError",
    "UnreadableTreeError",
    "VersionChainError",
    "VersionControlError",
)

# Checkpoint interval:
#   Keyword for parsing the full-extraction checkpoint interval.
CHECKPOINT_INTERVAL: str = "checkpoint_interval"

# Default checkpoint interval:
#   The number of replayed versions between two full-extraction integrity checks.
DEFAULT_CHECKPOINT_INTERVAL: int = 50

# Default max cross hops:
#   The default number of cross-service hops followed by impact analysis.
DEFAULT_MAX_CROSS_HOPS: int = 2

# Default overlap threshold:
#   The default entity similarity at or above which a data-overlap edge is created.
DEFAULT_OVERLAP_THRESHOLD: float = 0.5

# Default rule max hops:
#   The default traversal depth for generic rules.
DEFAULT_RULE_MAX_HOPS: int = 1

# Default workers:
#   The default number of worker threads used when parsing source files.
DEFAULT_WORKERS: int = 4

# Global settings filepath:
#   Path to the global-settings file.
GLOBAL_SETTINGS_FILEPATH: str = "global_settings.yaml"

# Logs directory:
#   The directory into which log files are written.
LOGS_DIRECTORY: str = "logs"

# Max cross hops:
#   Keyword for parsing the cross-service hop bound.
MAX_CROSS_HOPS: str = "max_cross_hops"

# Overlap threshold:
#   Keyword for parsing the data-overlap threshold.
OVERLAP_THRESHOLD: str = "overlap_threshold"

# Profile:
#   Keyword for parsing the marker-profile path.
PROFILE: str = "profile"

# Profile environment variable:
#   The environment variable naming the default marker-profile file.
PROFILE_ENVIRONMENT_VARIABLE: str = "MICROSAR_PROFILE"

# Rule max hops:
#   Keyword for parsing the generic-rule traversal depth.
RULE_MAX_HOPS: str = "rule_max_hops"

# Workers:
#   Keyword for parsing the number of parser threads.
WORKERS: str = "workers"


class MicrosarError(Exception):
    """Base class for all errors raised by microsar."""


class InputError(MicrosarError):
    """Raised when user-provided input is unusable."""


class AmbiguousClassificationError(InputError):
    """Raised when a source unit carries markers of more than one component type."""

    def __init__(self, unit_name: str, component_types: list[str]) -> None:
        """
        Instantiate a :class:`AmbiguousClassificationError` instance.

        :param: unit_name
            The name of the source unit.

        :param: component_types
            The component types whose markers matched.

        """

        super().__init__(
            f"Source unit '{unit_name}' matches markers of several component types: "
            f"{', '.join(sorted(component_types))}"
        )


class DuplicateServiceError(InputError):
    """Raised when two microservice IRs share a name."""

    def __init__(self, service_name: str) -> None:
        super().__init__(f"Duplicate microservice name '{service_name}'.")


class EmptyInputError(InputError):
    """Raised when a required identifier part is empty."""


class MalformedDocumentError(InputError):
    """
    Raised when an IR, delta or service document cannot be read.

    .. attribute:: location
        The location within the document, as a dotted path.

    """

    def __init__(self, location: str, msg: str) -> None:
        """
        Instantiate a :class:`MalformedDocumentError` instance.

        :param: location
            The dotted path into the document at which the problem was found.

        :param: msg
            The error message to append.

        """

        self.location = location
        super().__init__(f"Malformed document at '{location}': {msg}")


class MissingTargetError(InputError):
    """Raised when a delta deletes or modifies a component absent from the baseline."""


class ProfileError(InputError):
    """Raised when a marker profile is invalid."""

    def __init__(self, profile_name: str, msg: str) -> None:
        super().__init__(f"Invalid marker profile '{profile_name}': {msg}")


class ProgrammerJudgementFault(MicrosarError):
    """Raised when an internal invariant is broken."""

    def __init__(self, location: str, msg: str) -> None:
        super().__init__(
            f"A programmer judgement fault has occurred at {location}: {msg}"
        )


class SchemaViolationError(InputError):
    """
    Raised when a rule or profile document violates its schema.

    .. attribute:: field_path
        The path of the offending field.

    """

    def __init__(self, field_path: str, msg: str) -> None:
        self.field_path = field_path
        super().__init__(f"Schema violation at '{field_path}': {msg}")


class ServiceNameMismatchError(InputError):
    """Raised when two IRs of different microservices are compared."""

    def __init__(self, old_name: str, new_name: str) -> None:
        super().__init__(
            f"Cannot compare microservice '{old_name}' with microservice '{new_name}'."
        )


class SourceParseError(MicrosarError):
    """Raised when a source file cannot be parsed structurally."""

    def __init__(self, path: str, line: int, msg: str) -> None:
        """
        Instantiate a :class:`SourceParseError` instance.

        :param: path
            The path to the file being parsed.

        :param: line
            The line number at which parsing failed.

        :param: msg
            The error message to append.

        """

        self.path = path
        self.line = line
        self.msg = msg
        super().__init__(f"Error parsing '{path}' at line {line}: {msg}")


class StaleBaselineError(InputError):
    """Raised when a delta was computed against a different baseline version."""


class UndefinedSimilarityError(MicrosarError):
    """Raised when entity similarity is requested for an entity without fields."""


class UnknownRuleBindingError(InputError):
    """Raised when a rule cannot be bound to any evaluation strategy."""


class UnreadableTreeError(InputError):
    """Raised when a source tree does not exist or cannot be read."""

    def __init__(self, path: str, msg: str) -> None:
        super().__init__(f"Cannot read source tree '{path}': {msg}")


class VersionChainError(InputError):
    """Raised when two deltas do not form a version chain."""


class VersionControlError(MicrosarError):
    """Raised when the version-control executable fails."""


@dataclass(frozen=True)
class GlobalSettings:
    """
    Represents the run defaults read from the global-settings file.

    .. attribute:: checkpoint_interval
        The number of versions between full-extraction integrity checks.

    .. attribute:: max_cross_hops
        The number of cross-service hops followed by impact analysis.

    .. attribute:: overlap_threshold
        The entity similarity at or above which data-overlap edges are created.

    .. attribute:: profile
        The marker-profile path, or `None` for the bundled profile.

    .. attribute:: rule_max_hops
        The traversal depth for generic rules.

    .. attribute:: workers
        The number of parser threads.

    """

    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL
    max_cross_hops: int = DEFAULT_MAX_CROSS_HOPS
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD
    profile: str | None = None
    rule_max_hops: int = DEFAULT_RULE_MAX_HOPS
    workers: int = DEFAULT_WORKERS


def data_directory() -> str:
    """Return the path to the bundled data directory."""

    try:
        return str(resources.files("microsar").joinpath("data"))
    except (ModuleNotFoundError, TypeError):
        return os.path.join("src", "microsar", "data")


def get_logger(logger_name: str, verbose: bool = False) -> Logger:
    """
    Set-up and return a logger.

    Messages are written at DEBUG level to `logs/<logger_name>.log` and, at WARNING
    level (DEBUG if verbose), to the console.

    :param: logger_name
        The name of the logger, used for the log file name.

    :param: verbose
        Whether to echo all messages to the console.

    :return:
        The :class:`logging.Logger` to use for the run.

    """

    logger = logging.getLogger(logger_name)
    logger.setLevel(logging.DEBUG)
    if logger.handlers:
        return logger

    formatter = logging.Formatter(
        "%(asctime)s: %(name)s: %(levelname)s: %(message)s"
    )

    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    try:
        os.makedirs(LOGS_DIRECTORY, exist_ok=True)
        file_handler = logging.FileHandler(
            os.path.join(LOGS_DIRECTORY, f"{logger_name}.log"), encoding="utf-8"
        )
    except OSError:
        logger.warning("Log directory is not writable, logging to console only.")
    else:
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def read_yaml(filepath: str, logger: Logger) -> Any:
    """
    Reads a YAML file and returns the contents.

    :param: filepath
        The path to the YAML file.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :return:
        The parsed contents of the file.

    """

    with open(filepath, "r", encoding="utf-8") as filedata:
        try:
            contents = yaml.safe_load(filedata)
        except yaml.YAMLError as error:
            logger.error("Error parsing YAML file '%s': %s", filepath, error)
            raise InputError(f"Error parsing YAML file '{filepath}': {error}") from None

    logger.info("Data successfully read from '%s'.", filepath)
    return contents


def read_global_settings(
    logger: Logger, filepath: str = GLOBAL_SETTINGS_FILEPATH
) -> GlobalSettings:
    """
    Read the global settings.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :param: filepath
        The path to the global-settings file.

    :return:
        The :class:`GlobalSettings`, defaulted where the file or a key is missing.

    """

    try:
        global_settings_yaml = read_yaml(filepath, logger)
    except FileNotFoundError:
        logger.info("No global-settings file found, using defaults.")
        return GlobalSettings()

    if not isinstance(global_settings_yaml, dict):
        logger.warning("Global-settings file is not a mapping, using defaults.")
        return GlobalSettings()

    def _setting(key: str, default: int | float, convert: type) -> int | float:
        value = global_settings_yaml.get(key, default)
        try:
            return convert(value)
        except (TypeError, ValueError):
            raise SchemaViolationError(
                f"{filepath}:{key}", f"expected {convert.__name__}, found {value!r}"
            ) from None

    return GlobalSettings(
        checkpoint_interval=_setting(
            CHECKPOINT_INTERVAL, DEFAULT_CHECKPOINT_INTERVAL, int
        ),
        max_cross_hops=_setting(MAX_CROSS_HOPS, DEFAULT_MAX_CROSS_HOPS, int),
        overlap_threshold=_setting(OVERLAP_THRESHOLD, DEFAULT_OVERLAP_THRESHOLD, float),
        profile=global_settings_yaml.get(PROFILE) or None,
        rule_max_hops=_setting(RULE_MAX_HOPS, DEFAULT_RULE_MAX_HOPS, int),
        workers=_setting(WORKERS, DEFAULT_WORKERS, int),
    )
