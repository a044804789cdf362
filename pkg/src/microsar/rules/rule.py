#!/usr/bin/python3.10
########################################################################################
# rule.py - Declarative conflict rules for microsar.                                   #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Declarative change-conflict rules.

A rule document is a YAML mapping, or a list of mappings, of the shape::

    {
      Name: "IC",
      AnalysisLevels: ["System"],
      ChangedComponents: [
        {ComponentType: ["Endpoint", "Call"], ChangeType: ["All"]}],
      MonitoredImpact: {ComponentType: "Call", ImpactType: "Unmatched"}
    }

"""

import enum
import os

from dataclasses import dataclass
from logging import Logger
from typing import Any

import yaml

from ..__utils__ import (
    data_directory,
    DEFAULT_RULE_MAX_HOPS,
    InputError,
    read_yaml,
    SchemaViolationError,
)

__all__ = (
    "AnalysisLevel",
    "BUILTIN_RULE_FILES",
    "ChangedComponentFilter",
    "ChangeType",
    "default_rules",
    "ImpactType",
    "load_rule_files",
    "load_rules",
    "MonitoredImpact",
    "Rule",
    "rule_from_document",
    "rules_from_document",
    "RuleComponentType",
)

# Analysis levels:
#   Keyword for parsing the analysis levels of a rule.
ANALYSIS_LEVELS: str = "AnalysisLevels"

# Builtin rule files:
#   The bundled rule documents, in time-series column order.
BUILTIN_RULE_FILES: tuple[str, ...] = ("ic.yaml", "uem.yaml", "smm.yaml", "rmm.yaml")

# Changed components:
#   Keyword for parsing the changed-component filters of a rule.
CHANGED_COMPONENTS: str = "ChangedComponents"

# Change type:
#   Keyword for parsing the change-type filter.
CHANGE_TYPE: str = "ChangeType"

# Component type:
#   Keyword for parsing a component-type filter.
COMPONENT_TYPE: str = "ComponentType"

# Impact type:
#   Keyword for parsing the monitored impact type.
IMPACT_TYPE: str = "ImpactType"

# Max hops:
#   Keyword for parsing the traversal depth of a generic rule.
MAX_HOPS: str = "MaxHops"

# Monitored impact:
#   Keyword for parsing the monitored impact of a rule.
MONITORED_IMPACT: str = "MonitoredImpact"

# Name:
#   Keyword for parsing the rule name.
NAME: str = "Name"

# Rules directory:
#   The sub-directory of the data directory holding the bundled rules.
RULES_DIRECTORY: str = "rules"


class AnalysisLevel(str, enum.Enum):
    """
    The context a rule is evaluated in.

    - DELTA:
        The rule consumes the baseline and the delta.

    - SYSTEM:
        The rule sweeps the whole increment.

    """

    DELTA = "Delta"
    SYSTEM = "System"


class RuleComponentType(str, enum.Enum):
    """
    The component vocabulary of rule filters.

    Endpoints and calls are members of components and act as virtual component types.

    """

    CALL = "Call"
    CONTROLLER = "Controller"
    ENDPOINT = "Endpoint"
    REPOSITORY = "Repository"
    SERVICE = "Service"


class ChangeType(str, enum.Enum):
    """The change types of rule filters."""

    ADD = "Add"
    DELETE = "Delete"
    UPDATE = "Update"


class ImpactType(str, enum.Enum):
    """
    The impact predicate tested on monitored items.

    - INCONSISTENT:
        The item exists before and after the change with different content.

    - UNMATCHED:
        The item has no link partner.

    - UNUSED:
        Nothing refers to the item.

    """

    INCONSISTENT = "Inconsistent"
    UNMATCHED = "Unmatched"
    UNUSED = "Unused"


# Change type aliases:
#   Accepted spellings of change types beyond the canonical values.
_CHANGE_TYPE_ALIASES: dict[str, frozenset[ChangeType]] = {
    "All": frozenset(ChangeType),
    "Modify": frozenset({ChangeType.UPDATE}),
    "Remove": frozenset({ChangeType.DELETE}),
}


@dataclass(frozen=True)
class ChangedComponentFilter:
    """
    Selects the changes that trigger a rule.

    .. attribute:: component_types
        The component types selected.

    .. attribute:: change_types
        The change types selected.

    """

    component_types: frozenset[RuleComponentType]
    change_types: frozenset[ChangeType]


@dataclass(frozen=True)
class MonitoredImpact:
    """
    The impact a rule watches for.

    .. attribute:: component_type
        The type of the monitored items.

    .. attribute:: impact_type
        The predicate tested on them.

    """

    component_type: RuleComponentType
    impact_type: ImpactType


@dataclass(frozen=True)
class Rule:
    """
    Represents a change-conflict rule.

    .. attribute:: name
        The rule name; the names `IC`, `UEM`, `SMM` and `RMM` bind to the built-in
        detectors.

    .. attribute:: analysis_levels
        The levels the rule is evaluated at.

    .. attribute:: changed_components
        The filters selecting triggering changes.

    .. attribute:: monitored_impact
        The impact watched for.

    .. attribute:: max_hops
        The traversal depth from changed components for generic rules.

    """

    name: str
    analysis_levels: frozenset[AnalysisLevel]
    changed_components: tuple[ChangedComponentFilter, ...]
    monitored_impact: MonitoredImpact
    max_hops: int = DEFAULT_RULE_MAX_HOPS


def _as_list(value: Any) -> list[Any]:
    return value if isinstance(value, list) else [value]


def _enum_values(
    enum_type: type[enum.Enum], values: Any, field_path: str
) -> frozenset[Any]:
    """Parse a list of enum labels, rejecting unknown vocabulary."""

    parsed: set[Any] = set()
    for index, value in enumerate(_as_list(values)):
        try:
            parsed.add(enum_type(value))
        except ValueError:
            raise SchemaViolationError(
                f"{field_path}[{index}]", f"unknown value '{value}'"
            ) from None
    if not parsed:
        raise SchemaViolationError(field_path, "at least one value is required")
    return frozenset(parsed)


def _change_types(values: Any, field_path: str) -> frozenset[ChangeType]:
    """Parse change-type labels, expanding aliases."""

    change_types: set[ChangeType] = set()
    for index, value in enumerate(_as_list(values)):
        if isinstance(value, str) and value in _CHANGE_TYPE_ALIASES:
            change_types |= _CHANGE_TYPE_ALIASES[value]
            continue
        try:
            change_types.add(ChangeType(value))
        except ValueError:
            raise SchemaViolationError(
                f"{field_path}[{index}]", f"unknown change type '{value}'"
            ) from None
    if not change_types:
        raise SchemaViolationError(field_path, "at least one change type is required")
    return frozenset(change_types)


def _require(document: dict[str, Any], key: str, field_path: str) -> Any:
    if key not in document:
        raise SchemaViolationError(f"{field_path}.{key}", "missing required key")
    return document[key]


def rule_from_document(
    document: Any,
    location: str = "rule",
    default_max_hops: int = DEFAULT_RULE_MAX_HOPS,
) -> Rule:
    """
    Build a :class:`Rule` from a parsed rule document.

    :param: document
        The parsed rule mapping.

    :param: location
        The location of the document, used in error messages.

    :param: default_max_hops
        The traversal depth used when the document does not set one.

    :return:
        The validated :class:`Rule`.

    """

    if not isinstance(document, dict):
        raise SchemaViolationError(location, "a rule must be a mapping")

    name = _require(document, NAME, location)
    if not isinstance(name, str) or not name:
        raise SchemaViolationError(f"{location}.{NAME}", "expected a non-empty string")

    analysis_levels = _enum_values(
        AnalysisLevel,
        _require(document, ANALYSIS_LEVELS, location),
        f"{location}.{ANALYSIS_LEVELS}",
    )

    changed_documents = _require(document, CHANGED_COMPONENTS, location)
    if not isinstance(changed_documents, list):
        raise SchemaViolationError(f"{location}.{CHANGED_COMPONENTS}", "expected a list")
    changed_components: list[ChangedComponentFilter] = []
    for index, changed in enumerate(changed_documents):
        field_path = f"{location}.{CHANGED_COMPONENTS}[{index}]"
        if not isinstance(changed, dict):
            raise SchemaViolationError(field_path, "expected a mapping")
        changed_components.append(
            ChangedComponentFilter(
                _enum_values(
                    RuleComponentType,
                    _require(changed, COMPONENT_TYPE, field_path),
                    f"{field_path}.{COMPONENT_TYPE}",
                ),
                _change_types(
                    _require(changed, CHANGE_TYPE, field_path),
                    f"{field_path}.{CHANGE_TYPE}",
                ),
            )
        )

    monitored = _require(document, MONITORED_IMPACT, location)
    field_path = f"{location}.{MONITORED_IMPACT}"
    if not isinstance(monitored, dict):
        raise SchemaViolationError(field_path, "expected exactly one mapping")
    component_type = _require(monitored, COMPONENT_TYPE, field_path)
    if isinstance(component_type, list):
        if len(component_type) != 1:
            raise SchemaViolationError(
                f"{field_path}.{COMPONENT_TYPE}", "expected exactly one component type"
            )
        component_type = component_type[0]
    (monitored_type,) = _enum_values(
        RuleComponentType, component_type, f"{field_path}.{COMPONENT_TYPE}"
    )
    (impact_type,) = _enum_values(
        ImpactType,
        _require(monitored, IMPACT_TYPE, field_path),
        f"{field_path}.{IMPACT_TYPE}",
    )

    max_hops = document.get(MAX_HOPS, default_max_hops)
    if not isinstance(max_hops, int) or isinstance(max_hops, bool) or max_hops < 0:
        raise SchemaViolationError(
            f"{location}.{MAX_HOPS}", "expected a non-negative integer"
        )

    return Rule(
        name=name,
        analysis_levels=analysis_levels,
        changed_components=tuple(changed_components),
        monitored_impact=MonitoredImpact(monitored_type, impact_type),
        max_hops=max_hops,
    )


def load_rules(
    rule_document: bytes | str,
    location: str = "rules",
    default_max_hops: int = DEFAULT_RULE_MAX_HOPS,
) -> list[Rule]:
    """
    Load the rules of a rule document.

    :param: rule_document
        The YAML text of a rule mapping or a list of rule mappings.

    :param: location
        The location of the document, used in error messages.

    :param: default_max_hops
        The traversal depth used by rules that do not set one.

    :return:
        The validated rules.

    """

    try:
        document = yaml.safe_load(rule_document)
    except yaml.YAMLError as error:
        raise InputError(f"Error parsing rule document '{location}': {error}") from None

    return rules_from_document(document, location, default_max_hops)


def rules_from_document(
    document: Any,
    location: str = "rules",
    default_max_hops: int = DEFAULT_RULE_MAX_HOPS,
) -> list[Rule]:
    """Build the rules of a parsed rule mapping or list of rule mappings."""

    if isinstance(document, dict):
        return [rule_from_document(document, location, default_max_hops)]
    if isinstance(document, list):
        return [
            rule_from_document(entry, f"{location}[{index}]", default_max_hops)
            for index, entry in enumerate(document)
        ]
    raise SchemaViolationError(location, "expected a rule mapping or a list of rules")


def load_rule_files(
    filepaths: list[str],
    logger: Logger,
    default_max_hops: int = DEFAULT_RULE_MAX_HOPS,
) -> list[Rule]:
    """
    Load the rules of several rule files.

    :param: filepaths
        The paths to the rule files.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :param: default_max_hops
        The traversal depth used by rules that do not set one.

    :return:
        The rules, in file order.

    """

    rules: list[Rule] = []
    for filepath in filepaths:
        document = read_yaml(filepath, logger)
        rules.extend(
            rules_from_document(
                document, os.path.basename(filepath), default_max_hops
            )
        )
    logger.info("%s rules loaded from %s files.", len(rules), len(filepaths))
    return rules


def default_rules(
    logger: Logger, default_max_hops: int = DEFAULT_RULE_MAX_HOPS
) -> list[Rule]:
    """Load the bundled IC, UEM, SMM and RMM rules."""

    return load_rule_files(
        [
            os.path.join(data_directory(), RULES_DIRECTORY, filename)
            for filename in BUILTIN_RULE_FILES
        ],
        logger,
        default_max_hops,
    )
