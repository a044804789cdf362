#!/usr/bin/python3.10
########################################################################################
# profile.py - Marker profiles for microsar extraction.                                #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 15/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Marker profiles describe the framework vocabulary that classifies source units.

A profile is a YAML document, e.g.::

    name: spring
    controllerMarkers: [RestController, Controller]
    serviceMarkers: [Service]
    repositoryMarkers: [Repository]
    entityMarkers: [Entity, Document]
    endpointMarkers:
      GetMapping: GET
      RequestMapping: "*"
    remoteCallPatterns:
      - {receiver: RestTemplate, method: exchange, urlArgument: 0, verb: "argument:1"}

An endpoint marker mapped to `*` is a composite request mapping whose verbs are read
from its `method` attribute.

"""

import os

from dataclasses import dataclass, field
from logging import Logger
from typing import Any

from ..__utils__ import (
    data_directory,
    ProfileError,
    read_yaml,
    SchemaViolationError,
)
from ..ir_model import ComponentType, HttpMethod

__all__ = (
    "COMPOSITE_VERB",
    "DEFAULT_PROFILE_FILENAME",
    "load_profile",
    "MarkerProfile",
    "profile_from_document",
    "RemoteCallPattern",
)

# Argument prefix:
#   Prefix of a remote-call verb read from a call argument.
ARGUMENT_PREFIX: str = "argument:"

# Composite verb:
#   Endpoint-marker value for a request mapping carrying a method attribute.
COMPOSITE_VERB: str = "*"

# Controller markers:
#   Keyword for parsing the controller markers.
CONTROLLER_MARKERS: str = "controllerMarkers"

# Default profile filename:
#   The file name of the bundled marker profile.
DEFAULT_PROFILE_FILENAME: str = "default_profile.yaml"

# Endpoint markers:
#   Keyword for parsing the endpoint markers.
ENDPOINT_MARKERS: str = "endpointMarkers"

# Entity markers:
#   Keyword for parsing the entity markers.
ENTITY_MARKERS: str = "entityMarkers"

# Exclude directories:
#   Keyword for parsing the directory names skipped while scanning.
EXCLUDE_DIRECTORIES: str = "excludeDirectories"

# File extensions:
#   Keyword for parsing the scanned file extensions.
FILE_EXTENSIONS: str = "fileExtensions"

# Remote call patterns:
#   Keyword for parsing the remote-call patterns.
REMOTE_CALL_PATTERNS: str = "remoteCallPatterns"

# Repository markers:
#   Keyword for parsing the repository markers.
REPOSITORY_MARKERS: str = "repositoryMarkers"

# Repository supertypes:
#   Keyword for parsing the supertypes that classify a unit as a repository.
REPOSITORY_SUPERTYPES: str = "repositorySupertypes"

# Service markers:
#   Keyword for parsing the service markers.
SERVICE_MARKERS: str = "serviceMarkers"

# Transient markers:
#   Keyword for parsing the markers excluding an entity field.
TRANSIENT_MARKERS: str = "transientMarkers"


@dataclass(frozen=True)
class RemoteCallPattern:
    """
    Describes an invocation that performs a remote call.

    .. attribute:: receiver
        The receiver type token, e.g. `RestTemplate`.

    .. attribute:: method
        The invoked method name, e.g. `exchange`.

    .. attribute:: url_argument
        The position of the URL argument.

    .. attribute:: verb
        Either a fixed HTTP verb or `argument:<position>` naming the argument that
        carries the verb.

    """

    receiver: str
    method: str
    url_argument: int = 0
    verb: str = HttpMethod.GET.value

    @property
    def verb_argument(self) -> int | None:
        """Return the position of the verb argument, if the verb is not fixed."""

        if self.verb.startswith(ARGUMENT_PREFIX):
            return int(self.verb[len(ARGUMENT_PREFIX) :])
        return None


@dataclass(frozen=True)
class MarkerProfile:
    """
    Represents the framework vocabulary used to classify and extract units.

    .. attribute:: name
        The profile name.

    .. attribute:: controller_markers
        Annotations marking controllers.

    .. attribute:: service_markers
        Annotations marking services.

    .. attribute:: repository_markers
        Annotations marking repositories.

    .. attribute:: entity_markers
        Annotations marking entities.

    .. attribute:: endpoint_markers
        Map from endpoint annotation to HTTP verb, or :data:`COMPOSITE_VERB`.

    .. attribute:: remote_call_patterns
        The invocations that perform remote calls.

    .. attribute:: repository_supertypes
        Supertypes that classify a unit as a repository without an annotation.

    .. attribute:: transient_markers
        Annotations excluding an entity field.

    .. attribute:: file_extensions
        The file extensions of source files.

    .. attribute:: exclude_directories
        Directory names skipped while scanning.

    """

    name: str
    controller_markers: frozenset[str] = frozenset()
    service_markers: frozenset[str] = frozenset()
    repository_markers: frozenset[str] = frozenset()
    entity_markers: frozenset[str] = frozenset()
    endpoint_markers: dict[str, str] = field(default_factory=dict, compare=False)
    remote_call_patterns: tuple[RemoteCallPattern, ...] = ()
    repository_supertypes: frozenset[str] = frozenset()
    transient_markers: frozenset[str] = frozenset()
    file_extensions: tuple[str, ...] = (".java",)
    exclude_directories: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        marker_sets = self.classification_markers
        seen: dict[str, ComponentType] = {}
        for component_type, markers in marker_sets.items():
            for marker in markers:
                if marker in seen:
                    raise ProfileError(
                        self.name,
                        f"marker '{marker}' classifies both {seen[marker].value} and "
                        f"{component_type.value}",
                    )
                seen[marker] = component_type

    @property
    def classification_markers(self) -> dict[ComponentType, frozenset[str]]:
        """Return the classification marker sets keyed by component type."""

        return {
            ComponentType.CONTROLLER: self.controller_markers,
            ComponentType.ENTITY: self.entity_markers,
            ComponentType.REPOSITORY: self.repository_markers,
            ComponentType.SERVICE: self.service_markers,
        }


def _string_set(document: dict[str, Any], key: str) -> frozenset[str]:
    """Read a list of strings from the profile document."""

    value = document.get(key, [])
    if value is None:
        return frozenset()
    if not isinstance(value, list) or not all(isinstance(item, str) for item in value):
        raise SchemaViolationError(key, "expected a list of strings")
    return frozenset(value)


def _endpoint_markers(document: dict[str, Any]) -> dict[str, str]:
    """Read and validate the endpoint-marker map."""

    value = document.get(ENDPOINT_MARKERS, {}) or {}
    if not isinstance(value, dict):
        raise SchemaViolationError(ENDPOINT_MARKERS, "expected a mapping")

    markers: dict[str, str] = {}
    for marker, verb in value.items():
        verb = str(verb).upper()
        if verb != COMPOSITE_VERB and verb not in HttpMethod.__members__:
            raise SchemaViolationError(
                f"{ENDPOINT_MARKERS}.{marker}", f"unknown HTTP verb '{verb}'"
            )
        markers[str(marker)] = verb
    return markers


def _remote_call_patterns(document: dict[str, Any]) -> tuple[RemoteCallPattern, ...]:
    """Read and validate the remote-call patterns."""

    value = document.get(REMOTE_CALL_PATTERNS, []) or []
    if not isinstance(value, list):
        raise SchemaViolationError(REMOTE_CALL_PATTERNS, "expected a list")

    patterns: list[RemoteCallPattern] = []
    for index, entry in enumerate(value):
        location = f"{REMOTE_CALL_PATTERNS}[{index}]"
        if not isinstance(entry, dict):
            raise SchemaViolationError(location, "expected a mapping")
        try:
            pattern = RemoteCallPattern(
                receiver=str(entry["receiver"]),
                method=str(entry["method"]),
                url_argument=int(entry.get("urlArgument", 0)),
                verb=str(entry.get("verb", HttpMethod.GET.value)),
            )
        except KeyError as error:
            raise SchemaViolationError(
                f"{location}.{error.args[0]}", "missing required key"
            ) from None
        except ValueError:
            raise SchemaViolationError(
                f"{location}.urlArgument", "expected an integer"
            ) from None

        if pattern.verb_argument is None and pattern.verb.upper() not in HttpMethod.__members__:
            raise SchemaViolationError(f"{location}.verb", f"unknown verb '{pattern.verb}'")
        patterns.append(pattern)

    return tuple(patterns)


def profile_from_document(document: Any, profile_name: str = "profile") -> MarkerProfile:
    """
    Build a :class:`MarkerProfile` from a parsed profile document.

    :param: document
        The parsed YAML document.

    :param: profile_name
        The name to use when the document does not carry one.

    :return:
        The validated :class:`MarkerProfile`.

    """

    if not isinstance(document, dict):
        raise ProfileError(profile_name, "the profile document must be a mapping")

    return MarkerProfile(
        name=str(document.get("name", profile_name)),
        controller_markers=_string_set(document, CONTROLLER_MARKERS),
        service_markers=_string_set(document, SERVICE_MARKERS),
        repository_markers=_string_set(document, REPOSITORY_MARKERS),
        entity_markers=_string_set(document, ENTITY_MARKERS),
        endpoint_markers=_endpoint_markers(document),
        remote_call_patterns=_remote_call_patterns(document),
        repository_supertypes=_string_set(document, REPOSITORY_SUPERTYPES),
        transient_markers=_string_set(document, TRANSIENT_MARKERS),
        file_extensions=tuple(sorted(_string_set(document, FILE_EXTENSIONS)))
        or (".java",),
        exclude_directories=_string_set(document, EXCLUDE_DIRECTORIES),
    )


def load_profile(filepath: str | None, logger: Logger) -> MarkerProfile:
    """
    Load a marker profile.

    :param: filepath
        The path to the profile YAML file, or `None` for the bundled profile.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :return:
        The :class:`MarkerProfile`.

    """

    if filepath is None:
        filepath = os.path.join(data_directory(), DEFAULT_PROFILE_FILENAME)

    try:
        document = read_yaml(filepath, logger)
    except FileNotFoundError:
        logger.error("Marker profile '%s' could not be found.", filepath)
        raise ProfileError(filepath, "file not found") from None

    profile = profile_from_document(
        document, os.path.splitext(os.path.basename(filepath))[0]
    )
    logger.info(
        "Marker profile '%s' loaded with %s endpoint markers and %s remote-call patterns.",
        profile.name,
        len(profile.endpoint_markers),
        len(profile.remote_call_patterns),
    )
    return profile
