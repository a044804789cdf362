#!/usr/bin/python3.10
########################################################################################
# engine.py - Rule evaluation for microsar.                                            #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Evaluates rules over (baseline, delta, increment) triples.

Rules named `IC`, `UEM`, `SMM` or `RMM` bind to the built-in detectors. Every other
rule is evaluated generically: changes selected by the rule's filters seed a
traversal over the call graph and the cross-service edges, and the monitored items
within reach are tested against the rule's impact predicate.

"""

from collections import defaultdict
from typing import Callable, Iterable, Iterator

import networkx as nx

from ..__utils__ import UnknownRuleBindingError
from ..ir_model import (
    ChangeKind,
    Component,
    ComponentId,
    ComponentType,
    Delta,
    SystemIR,
)
from ..linker import EndpointIndex
from .detectors import (
    ChangeContext,
    detect_invalid_calls,
    detect_repository_method_modifications,
    detect_service_method_modifications,
    detect_uncalled_endpoints,
)
from .rule import AnalysisLevel, ChangeType, ImpactType, Rule, RuleComponentType
from .violation import ImpactedItem, Violation

__all__ = (
    "bind_rule",
    "evaluate",
    "evaluate_step",
    "evaluate_system",
)

# Change types:
#   Map from delta change kinds to rule change types.
_CHANGE_TYPES: dict[ChangeKind, ChangeType] = {
    ChangeKind.ADD: ChangeType.ADD,
    ChangeKind.DELETE: ChangeType.DELETE,
    ChangeKind.MODIFY: ChangeType.UPDATE,
}

# Component rule types:
#   Map from layer component types to rule component types; entities have none.
_COMPONENT_RULE_TYPES: dict[ComponentType, RuleComponentType] = {
    ComponentType.CONTROLLER: RuleComponentType.CONTROLLER,
    ComponentType.REPOSITORY: RuleComponentType.REPOSITORY,
    ComponentType.SERVICE: RuleComponentType.SERVICE,
}

# Built-in levels:
#   The analysis level each built-in detector runs at.
_BUILTIN_LEVELS: dict[str, AnalysisLevel] = {
    "IC": AnalysisLevel.SYSTEM,
    "RMM": AnalysisLevel.DELTA,
    "SMM": AnalysisLevel.DELTA,
    "UEM": AnalysisLevel.SYSTEM,
}

# Evaluator:
#   Signature of a bound rule: (baseline, deltas, increment) to violations.
Evaluator = Callable[[SystemIR | None, list[Delta], SystemIR], list[Violation]]


def _member_changes(
    kind: ChangeKind, old: Component | None, new: Component | None
) -> dict[RuleComponentType, set[ChangeType]]:
    """
    Return the rule-level changes carried by one component change.

    Besides the component itself, endpoints and calls are compared member by member:
    endpoints by (verb, path) and handler, calls by identity and the body of the
    method making the call.

    """

    changes: dict[RuleComponentType, set[ChangeType]] = defaultdict(set)
    reference = new if new is not None else old
    rule_type = _COMPONENT_RULE_TYPES.get(reference.id.component_type)
    if rule_type is not None:
        changes[rule_type].add(_CHANGE_TYPES[kind])

    old_endpoints = {endpoint.key: endpoint for endpoint in old.endpoints} if old else {}
    new_endpoints = {endpoint.key: endpoint for endpoint in new.endpoints} if new else {}
    if set(new_endpoints) - set(old_endpoints):
        changes[RuleComponentType.ENDPOINT].add(ChangeType.ADD)
    if set(old_endpoints) - set(new_endpoints):
        changes[RuleComponentType.ENDPOINT].add(ChangeType.DELETE)
    for key in set(old_endpoints) & set(new_endpoints):
        if _handler_hashes(old, old_endpoints[key].handler_method) != _handler_hashes(
            new, new_endpoints[key].handler_method
        ):
            changes[RuleComponentType.ENDPOINT].add(ChangeType.UPDATE)

    old_calls = _call_site_hashes(old) if old else {}
    new_calls = _call_site_hashes(new) if new else {}
    if set(new_calls) - set(old_calls):
        changes[RuleComponentType.CALL].add(ChangeType.ADD)
    if set(old_calls) - set(new_calls):
        changes[RuleComponentType.CALL].add(ChangeType.DELETE)
    if any(old_calls[key] != new_calls[key] for key in set(old_calls) & set(new_calls)):
        changes[RuleComponentType.CALL].add(ChangeType.UPDATE)

    return changes


def _call_site_hashes(component: Component) -> dict[str, list[str]]:
    """Map each call identity to the body digests of the methods making the call."""

    site_hashes: dict[str, list[str]] = defaultdict(list)
    for method in component.methods:
        for call in method.rest_calls:
            site_hashes[call.identity].append(method.content_hash)
    return {identity: sorted(hashes) for identity, hashes in site_hashes.items()}


def _handler_hashes(component: Component, handler_method: str) -> list[str]:
    return sorted(
        method.member_hash for method in component.methods if method.name == handler_method
    )


def _seeds(rule: Rule, context: ChangeContext) -> list[tuple[ComponentId, ChangeKind]]:
    """Return the changes selected by the rule's changed-component filters."""

    seeds: list[tuple[ComponentId, ChangeKind]] = []
    for change in context.changes:
        member_changes = _member_changes(change.kind, change.old, change.new)
        if any(
            member_changes.get(component_type, set()) & changed.change_types
            for changed in rule.changed_components
            for component_type in changed.component_types
        ):
            seeds.append((change.id, change.kind))
    return seeds


def _graph(systems: Iterable[SystemIR | None]) -> nx.Graph:
    """Return the undirected union of the call graphs and cross edges."""

    graph = nx.Graph()
    for system in systems:
        if system is None:
            continue
        for service in system.services.values():
            graph.add_nodes_from(service.components)
            graph.add_edges_from(service.call_graph_edges)
        graph.add_edges_from((edge.source, edge.target) for edge in system.cross_edges)
    return graph


def _monitored_items(
    rule: Rule,
    baseline: SystemIR | None,
    increment: SystemIR,
    components: Iterable[Component],
) -> Iterator[ImpactedItem]:
    """Yield the monitored items of the given components that satisfy the predicate."""

    monitored = rule.monitored_impact
    index = EndpointIndex(increment)
    called = {index.match(call) for call in increment.rest_calls}
    inbound = {target for _, target in _all_edges(increment)}

    for component in components:
        previous = baseline.component(component.id) if baseline is not None else None

        if monitored.component_type == RuleComponentType.CALL:
            previous_calls = (
                {call.identity: call for call in previous.rest_calls} if previous else {}
            )
            for method in component.methods:
                for call in method.rest_calls:
                    if monitored.impact_type == ImpactType.UNMATCHED:
                        if index.match(call) is None:
                            yield ImpactedItem(component.id, "Call", call.identity)
                    elif call.identity in previous_calls:
                        before = previous.method(method.name, method.arity)
                        if before is not None and before.member_hash != method.member_hash:
                            yield ImpactedItem(
                                component.id,
                                "Call",
                                f"{call.identity}@{method.member_hash[:16]}",
                            )

        elif monitored.component_type == RuleComponentType.ENDPOINT:
            for endpoint in component.endpoints:
                if monitored.impact_type in (ImpactType.UNMATCHED, ImpactType.UNUSED):
                    if endpoint not in called:
                        yield ImpactedItem(component.id, "Endpoint", endpoint.identity)
                elif previous is not None and any(
                    before.key == endpoint.key for before in previous.endpoints
                ):
                    old_hashes = _handler_hashes(previous, endpoint.handler_method)
                    new_hashes = _handler_hashes(component, endpoint.handler_method)
                    if old_hashes != new_hashes:
                        yield ImpactedItem(
                            component.id,
                            "Endpoint",
                            f"{endpoint.identity}@{component.content_hash[:16]}",
                        )

        elif _COMPONENT_RULE_TYPES.get(component.id.component_type) == (
            monitored.component_type
        ):
            kind = component.id.component_type.value
            if monitored.impact_type == ImpactType.UNMATCHED:
                if any(index.match(call) is None for call in component.rest_calls):
                    yield ImpactedItem(component.id, kind, component.id.key)
            elif monitored.impact_type == ImpactType.UNUSED:
                if component.id not in inbound:
                    yield ImpactedItem(component.id, kind, component.id.key)
            elif previous is not None and previous.content_hash != component.content_hash:
                yield ImpactedItem(
                    component.id, kind, f"{component.id.key}@{component.content_hash[:16]}"
                )


def _all_edges(system: SystemIR) -> Iterator[tuple[ComponentId, ComponentId]]:
    for service in system.services.values():
        yield from service.call_graph_edges
    for edge in system.cross_edges:
        yield edge.source, edge.target


def _generic_evaluator(rule: Rule) -> Evaluator:
    """Bind a rule without a built-in detector to the generic graph evaluation."""

    if (
        rule.monitored_impact.component_type == RuleComponentType.CALL
        and rule.monitored_impact.impact_type == ImpactType.UNUSED
    ):
        raise UnknownRuleBindingError(
            f"Rule '{rule.name}' monitors unused calls, which no evaluation supports."
        )

    def _evaluate(
        baseline: SystemIR | None, deltas: list[Delta], increment: SystemIR
    ) -> list[Violation]:
        violations: list[Violation] = []
        if AnalysisLevel.SYSTEM in rule.analysis_levels:
            seeds = _seeds(rule, ChangeContext(baseline, deltas))
            violations.extend(
                Violation.create(rule.name, increment.version_label, seeds, [item])
                for item in _monitored_items(
                    rule, baseline, increment, increment.components
                )
            )

        if AnalysisLevel.DELTA in rule.analysis_levels and baseline is not None:
            graph = _graph((baseline, increment))
            for delta in deltas:
                seeds = _seeds(rule, ChangeContext(baseline, [delta]))
                reached: set[ComponentId] = set()
                for seed, _ in seeds:
                    if seed in graph:
                        reached.update(
                            nx.single_source_shortest_path_length(
                                graph, seed, cutoff=rule.max_hops
                            )
                        )
                    else:
                        reached.add(seed)
                components = [
                    component
                    for id in sorted(reached)
                    if (component := increment.component(id)) is not None
                ]
                violations.extend(
                    Violation.create(rule.name, increment.version_label, seeds, [item])
                    for item in _monitored_items(rule, baseline, increment, components)
                )
        return violations

    return _evaluate


def bind_rule(rule: Rule) -> Evaluator:
    """
    Bind a rule to its evaluation strategy.

    :param: rule
        The :class:`Rule` to bind.

    :return:
        A callable taking (baseline, deltas, increment) and returning violations.

    """

    builtin_level = _BUILTIN_LEVELS.get(rule.name.upper())
    if builtin_level is None:
        return _generic_evaluator(rule)

    if builtin_level not in rule.analysis_levels:
        raise UnknownRuleBindingError(
            f"Built-in rule '{rule.name}' runs at the {builtin_level.value} level, which "
            "the rule document does not enable."
        )

    match rule.name.upper():
        case "IC":
            return lambda baseline, deltas, increment: detect_invalid_calls(
                increment, baseline, deltas, rule.name
            )
        case "UEM":
            return lambda baseline, deltas, increment: detect_uncalled_endpoints(
                increment, baseline, deltas, rule.name
            )
        case "SMM":
            detector = detect_service_method_modifications
        case _:
            detector = detect_repository_method_modifications

    def _evaluate_deltas(
        baseline: SystemIR | None, deltas: list[Delta], increment: SystemIR
    ) -> list[Violation]:
        if baseline is None:
            return []
        return [
            violation
            for delta in deltas
            for violation in detector(baseline, delta, increment, rule.name)
        ]

    return _evaluate_deltas


def evaluate_step(
    baseline: SystemIR | None,
    deltas: Iterable[Delta],
    increment: SystemIR,
    rules: Iterable[Rule],
) -> list[Violation]:
    """
    Evaluate rules over one step that may carry a delta per microservice.

    :param: baseline
        The baseline :class:`SystemIR`, or `None` for the first version of a history.

    :param: deltas
        The deltas applied to the baseline.

    :param: increment
        The increment the deltas produce.

    :param: rules
        The rules to evaluate.

    :return:
        The violations, deduplicated by dedup key and sorted.

    """

    deltas = list(deltas)
    violations: dict[str, Violation] = {}
    for rule in rules:
        for violation in bind_rule(rule)(baseline, deltas, increment):
            violations.setdefault(violation.dedup_key, violation)
    return sorted(violations.values(), key=lambda violation: violation.sort_key)


def evaluate(
    baseline: SystemIR, delta: Delta, increment: SystemIR, rules: Iterable[Rule]
) -> list[Violation]:
    """
    Evaluate rules over a (baseline, delta, increment) triple.

    :param: baseline
        The baseline :class:`SystemIR`.

    :param: delta
        The applied :class:`Delta`.

    :param: increment
        The increment the delta produces.

    :param: rules
        The rules to evaluate.

    :return:
        The violations, deduplicated by dedup key and sorted.

    """

    return evaluate_step(baseline, [delta], increment, rules)


def evaluate_system(system: SystemIR, rules: Iterable[Rule]) -> list[Violation]:
    """Evaluate the system-level rules over a system without a preceding delta."""

    return evaluate_step(None, [], system, rules)
