#!/usr/bin/python3.10
########################################################################################
# test_rules.py - Tests for rule loading and change-conflict detection.                #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

from collections import Counter

import pytest

from microsar.__utils__ import SchemaViolationError, UnknownRuleBindingError
from microsar.delta import compute_delta
from microsar.ir_model import ChangeKind
from microsar.rules import (
    AnalysisLevel,
    ChangeType,
    ImpactType,
    RuleComponentType,
    bind_rule,
    default_rules,
    evaluate_step,
    evaluate_system,
    load_rules,
    violations_document,
    violations_text,
)

# Expected counts:
#   The per-rule violation counts of each fixture version.
EXPECTED_COUNTS: list[dict[str, int]] = [
    {"IC": 0, "UEM": 2, "SMM": 0, "RMM": 0},
    {"IC": 0, "UEM": 2, "SMM": 1, "RMM": 0},
    {"IC": 0, "UEM": 2, "SMM": 0, "RMM": 1},
    {"IC": 1, "UEM": 2, "SMM": 0, "RMM": 0},
    {"IC": 1, "UEM": 3, "SMM": 0, "RMM": 0},
    {"IC": 0, "UEM": 3, "SMM": 1, "RMM": 0},
]

CONTROLLER_RULE: str = """
Name: CTRL
AnalysisLevels: [Delta]
ChangedComponents:
  - {ComponentType: [Service], ChangeType: [Modify]}
MonitoredImpact: {ComponentType: Controller, ImpactType: Inconsistent}
MaxHops: 1
"""

CALL_UPDATE_RULE: str = """
Name: CALL-UPDATE
AnalysisLevels: [Delta]
ChangedComponents:
  - {ComponentType: Call, ChangeType: Update}
MonitoredImpact: {ComponentType: Controller, ImpactType: Inconsistent}
MaxHops: 1
"""


@pytest.fixture(name="rules")
def fixture_rules(logger):
    return default_rules(logger)


def _step(extract, history, index):
    """Return the baseline, deltas and increment leading to a fixture version."""

    baseline = extract(history[index - 1])
    increment = extract(history[index])
    deltas = [
        compute_delta(baseline.services[name], increment.services[name])
        for name in sorted(increment.services)
    ]
    return baseline, deltas, increment


def _counts(violations) -> dict[str, int]:
    counts = Counter(violation.rule_name for violation in violations)
    return {name: counts.get(name, 0) for name in ("IC", "UEM", "SMM", "RMM")}


def test_default_rules(rules):
    assert [rule.name for rule in rules] == ["IC", "UEM", "SMM", "RMM"]

    smm = rules[2]
    assert smm.analysis_levels == frozenset({AnalysisLevel.DELTA})
    assert smm.changed_components[0].change_types == frozenset({ChangeType.UPDATE})
    assert smm.monitored_impact.component_type == RuleComponentType.SERVICE
    assert smm.monitored_impact.impact_type == ImpactType.INCONSISTENT

    ic = rules[0]
    assert ic.changed_components[0].change_types == frozenset(ChangeType)
    assert ic.changed_components[0].component_types == frozenset(
        {RuleComponentType.ENDPOINT, RuleComponentType.CALL}
    )


def test_load_rules_list_and_aliases():
    rules = load_rules(
        """
        - Name: A
          AnalysisLevels: System
          ChangedComponents: [{ComponentType: Endpoint, ChangeType: [Remove, Add]}]
          MonitoredImpact: {ComponentType: [Endpoint], ImpactType: Unused}
        - Name: B
          AnalysisLevels: [Delta, System]
          ChangedComponents: []
          MonitoredImpact: {ComponentType: Call, ImpactType: Unmatched}
          MaxHops: 3
        """
    )

    first, second = rules
    assert first.changed_components[0].change_types == frozenset(
        {ChangeType.DELETE, ChangeType.ADD}
    )
    assert first.monitored_impact.component_type == RuleComponentType.ENDPOINT
    assert second.analysis_levels == frozenset(AnalysisLevel)
    assert second.max_hops == 3


@pytest.mark.parametrize(
    "document,field_path",
    [
        (
            "{Name: X, AnalysisLevels: [Later], ChangedComponents: [], "
            "MonitoredImpact: {ComponentType: Call, ImpactType: Unmatched}}",
            "rules.AnalysisLevels[0]",
        ),
        (
            "{Name: X, AnalysisLevels: [System], "
            "ChangedComponents: [{ComponentType: [Entity], ChangeType: [All]}], "
            "MonitoredImpact: {ComponentType: Call, ImpactType: Unmatched}}",
            "rules.ChangedComponents[0].ComponentType[0]",
        ),
        (
            "{Name: X, AnalysisLevels: [System], ChangedComponents: [], "
            "MonitoredImpact: {ComponentType: [Call, Endpoint], ImpactType: Unused}}",
            "rules.MonitoredImpact.ComponentType",
        ),
        (
            "{Name: X, AnalysisLevels: [System], ChangedComponents: []}",
            "rules.MonitoredImpact",
        ),
        (
            "{Name: X, AnalysisLevels: [System], ChangedComponents: [], MaxHops: -1, "
            "MonitoredImpact: {ComponentType: Call, ImpactType: Unmatched}}",
            "rules.MaxHops",
        ),
    ],
)
def test_schema_violations(document, field_path):
    with pytest.raises(SchemaViolationError) as error:
        load_rules(document)

    assert error.value.field_path == field_path


def test_builtin_rule_needs_its_level():
    (rule,) = load_rules(
        "{Name: IC, AnalysisLevels: [Delta], ChangedComponents: [], "
        "MonitoredImpact: {ComponentType: Call, ImpactType: Unmatched}}"
    )

    with pytest.raises(UnknownRuleBindingError):
        bind_rule(rule)


def test_unsupported_generic_rule():
    (rule,) = load_rules(
        "{Name: DEAD-CALLS, AnalysisLevels: [System], ChangedComponents: [], "
        "MonitoredImpact: {ComponentType: Call, ImpactType: Unused}}"
    )

    with pytest.raises(UnknownRuleBindingError):
        bind_rule(rule)


def test_baseline_violations(baseline, rules):
    violations = evaluate_system(baseline, rules)

    assert _counts(violations) == EXPECTED_COUNTS[0]
    assert all(violation.triggering == () for violation in violations)
    assert {
        item.identity.rsplit(" ", 1)[-1]
        for violation in violations
        for item in violation.impacted
    } == {"/api/v1/order/{*}", "/api/v1/order"}


@pytest.mark.parametrize("index", range(1, len(EXPECTED_COUNTS)))
def test_step_violations(history, extract, rules, index):
    baseline, deltas, increment = _step(extract, history, index)

    assert _counts(evaluate_step(baseline, deltas, increment, rules)) == (
        EXPECTED_COUNTS[index]
    )


@pytest.mark.parametrize("index", range(1, len(EXPECTED_COUNTS)))
def test_system_rules_match_a_fresh_sweep(history, extract, rules, index):
    system_rules = [rule for rule in rules if rule.name in ("IC", "UEM")]
    baseline, deltas, increment = _step(extract, history, index)

    stepped = evaluate_step(baseline, deltas, increment, system_rules)
    fresh = evaluate_system(increment, system_rules)
    assert [violation.dedup_key for violation in stepped] == [
        violation.dedup_key for violation in fresh
    ]


def test_service_method_modification(history, extract, rules):
    baseline, deltas, increment = _step(extract, history, 1)

    (violation,) = [
        violation
        for violation in evaluate_step(baseline, deltas, increment, rules)
        if violation.rule_name == "SMM"
    ]
    assert violation.triggering[0][1] == ChangeKind.MODIFY
    assert violation.triggering[0][0].qualified_name == (
        "ts.station.service.StationServiceImpl"
    )
    method, controller = sorted(violation.impacted, key=lambda item: item.kind != "Method")
    assert method.kind == "Method"
    assert "returnObjectCalls" in dict(method.evidence)
    assert controller.kind == "Controller"
    assert controller.component_id.qualified_name == (
        "ts.station.controller.StationController"
    )


def test_service_return_type_change(history, extract, rules):
    baseline, deltas, increment = _step(extract, history, 5)

    (violation,) = [
        violation
        for violation in evaluate_step(baseline, deltas, increment, rules)
        if violation.rule_name == "SMM"
    ]
    (method,) = [item for item in violation.impacted if item.kind == "Method"]
    assert dict(method.evidence)["returnType"] == "Order -> OrderDTO"


def test_repository_method_modification(history, extract, rules):
    baseline, deltas, increment = _step(extract, history, 2)

    (violation,) = [
        violation
        for violation in evaluate_step(baseline, deltas, increment, rules)
        if violation.rule_name == "RMM"
    ]
    assert {item.kind for item in violation.impacted} == {"Method", "Service"}
    assert "annotations" in dict(
        next(item for item in violation.impacted if item.kind == "Method").evidence
    )


def test_violations_persist_under_one_dedup_key(history, extract, rules):
    _, _, third = _step(extract, history, 3)
    _, _, fourth = _step(extract, history, 4)

    def _ic_keys(system):
        return {
            violation.dedup_key
            for violation in evaluate_system(system, rules)
            if violation.rule_name == "IC"
        }

    assert _ic_keys(third) == _ic_keys(fourth)
    assert len(_ic_keys(third)) == 1


def test_generic_delta_rule(history, extract):
    baseline, deltas, increment = _step(extract, history, 5)
    (rule,) = load_rules(CONTROLLER_RULE)

    (violation,) = evaluate_step(baseline, deltas, increment, [rule])
    assert violation.rule_name == "CTRL"
    (item,) = violation.impacted
    assert item.component_id.qualified_name == "ts.order.controller.OrderController"
    assert [id.qualified_name for id, _ in violation.triggering] == [
        "ts.order.service.OrderServiceImpl"
    ]

    (local_rule,) = load_rules(CONTROLLER_RULE.replace("MaxHops: 1", "MaxHops: 0"))
    assert evaluate_step(baseline, deltas, increment, [local_rule]) == []


def test_call_site_body_change_is_a_call_update(history, extract):
    baseline, deltas, increment = _step(extract, history, 5)
    (rule,) = load_rules(CALL_UPDATE_RULE)

    (violation,) = evaluate_step(baseline, deltas, increment, [rule])
    assert violation.rule_name == "CALL-UPDATE"
    assert [id.qualified_name for id, _ in violation.triggering] == [
        "ts.order.service.OrderServiceImpl"
    ]
    (item,) = violation.impacted
    assert item.component_id.qualified_name == "ts.order.controller.OrderController"

    (added_only,) = load_rules(
        CALL_UPDATE_RULE.replace("ChangeType: Update", "ChangeType: Add")
    )
    assert evaluate_step(baseline, deltas, increment, [added_only]) == []


@pytest.mark.parametrize("index", range(1, 5))
def test_body_changes_without_calls_are_not_call_updates(history, extract, index):
    baseline, deltas, increment = _step(extract, history, index)
    (rule,) = load_rules(CALL_UPDATE_RULE)

    assert evaluate_step(baseline, deltas, increment, [rule]) == []


def test_generic_system_rule_matches_builtin(baseline, rules):
    (rule,) = load_rules(
        "{Name: DEAD-ENDPOINTS, AnalysisLevels: [System], "
        "ChangedComponents: [{ComponentType: Endpoint, ChangeType: All}], "
        "MonitoredImpact: {ComponentType: Endpoint, ImpactType: Unused}}"
    )

    generic = {
        item.identity
        for violation in evaluate_system(baseline, [rule])
        for item in violation.impacted
    }
    builtin = {
        item.identity
        for violation in evaluate_system(baseline, rules)
        if violation.rule_name == "UEM"
        for item in violation.impacted
    }
    assert generic == builtin


def test_violation_reports(baseline, rules):
    violations = evaluate_system(baseline, rules)

    document = violations_document(violations)
    assert [entry["ruleName"] for entry in document] == ["UEM", "UEM"]
    assert set(document[0]) == {
        "dedupKey",
        "impacted",
        "ruleName",
        "systemVersionLabel",
        "triggering",
    }
    assert violations_text(violations).startswith("[UEM] ")
    assert violations_text([]) == "No violations found.\n"
