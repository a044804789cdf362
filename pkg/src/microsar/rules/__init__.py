#!/usr/bin/python3.10
########################################################################################
# __init__.py - The rules sub-package of microsar.                                     #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

from .detectors import (
    detect_invalid_calls,
    detect_repository_method_modifications,
    detect_service_method_modifications,
    detect_uncalled_endpoints,
)
from .engine import bind_rule, evaluate, evaluate_step, evaluate_system
from .rule import (
    AnalysisLevel,
    ChangeType,
    default_rules,
    ImpactType,
    load_rule_files,
    load_rules,
    Rule,
    RuleComponentType,
)
from .violation import ImpactedItem, Violation, violations_document, violations_text

__all__ = (
    "AnalysisLevel",
    "bind_rule",
    "ChangeType",
    "default_rules",
    "detect_invalid_calls",
    "detect_repository_method_modifications",
    "detect_service_method_modifications",
    "detect_uncalled_endpoints",
    "evaluate",
    "evaluate_step",
    "evaluate_system",
    "ImpactedItem",
    "ImpactType",
    "load_rule_files",
    "load_rules",
    "Rule",
    "RuleComponentType",
    "Violation",
    "violations_document",
    "violations_text",
)
