#!/usr/bin/python3.10
########################################################################################
# detectors.py - The built-in change-conflict detectors.                               #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
The four built-in detectors.

- IC (invalid call):
    A remote call targets an endpoint that does not exist in the system.

- UEM (uncalled endpoint from middleware):
    An endpoint of the system is not called by any remote call.

- SMM (service method modified):
    A service method changed its return type or the operations performed on the value
    it returns.

- RMM (repository method modified):
    A repository method changed its annotations or its signature.

"""

from dataclasses import dataclass
from typing import Iterable

import networkx as nx

from ..ir_model import (
    ChangeKind,
    Component,
    ComponentId,
    ComponentType,
    Delta,
    HttpMethod,
    Method,
    SystemIR,
)
from ..linker import EndpointIndex
from ..merge import apply_to_service
from .violation import ImpactedItem, Violation

__all__ = (
    "ChangeContext",
    "dependents",
    "detect_invalid_calls",
    "detect_repository_method_modifications",
    "detect_service_method_modifications",
    "detect_uncalled_endpoints",
    "method_identity",
)


@dataclass(frozen=True)
class _ChangedComponent:
    """A change with the component content before and after it."""

    id: ComponentId
    kind: ChangeKind
    old: Component | None
    new: Component | None

    @property
    def versions(self) -> tuple[Component, ...]:
        return tuple(component for component in (self.old, self.new) if component)

    @property
    def endpoint_keys(self) -> set[tuple[HttpMethod, str]]:
        return {
            endpoint.key for component in self.versions for endpoint in component.endpoints
        }

    @property
    def call_keys(self) -> set[tuple[HttpMethod, str]]:
        return {call.key for component in self.versions for call in component.rest_calls}


class ChangeContext:
    """
    The changes of one step, used to attribute system-level violations to changes.

    """

    def __init__(self, baseline: SystemIR | None, deltas: Iterable[Delta]) -> None:
        """
        Instantiate a :class:`ChangeContext` instance.

        :param: baseline
            The baseline the deltas apply to, or `None` when unknown.

        :param: deltas
            The deltas of the step.

        """

        self.changes: list[_ChangedComponent] = [
            _ChangedComponent(
                change.component_id,
                change.kind,
                baseline.component(change.component_id) if baseline else None,
                change.new_component,
            )
            for delta in deltas
            for change in delta.changes
        ]

    def related_to_call(
        self, owner: ComponentId, key: tuple[HttpMethod, str]
    ) -> list[tuple[ComponentId, ChangeKind]]:
        """Return the changes of the calling component or of components serving key."""

        return [
            (change.id, change.kind)
            for change in self.changes
            if change.id == owner or key in change.endpoint_keys
        ]

    def related_to_endpoint(
        self, owner: ComponentId, key: tuple[HttpMethod, str]
    ) -> list[tuple[ComponentId, ChangeKind]]:
        """Return the changes of the owning component or of components calling key."""

        return [
            (change.id, change.kind)
            for change in self.changes
            if change.id == owner or key in change.call_keys
        ]


def method_identity(id: ComponentId, method: Method | None, name: str, arity: int) -> str:
    """Return the identity of a method at its current content."""

    content = method.member_hash[:16] if method is not None else "deleted"
    return f"{id.key}#{name}/{arity}@{content}"


def dependents(
    baseline: SystemIR, delta: Delta, increment: SystemIR | None, id: ComponentId
) -> set[ComponentId]:
    """
    Return the components that reach a component through the call graph.

    The baseline and increment call graphs of the delta's microservice are combined, so
    dependencies removed by the delta still count.

    """

    graph = nx.DiGraph()
    baseline_service = baseline.services.get(delta.microservice)
    if baseline_service is not None:
        graph.add_edges_from(baseline_service.call_graph_edges)
    if increment is not None:
        new_service = increment.services.get(delta.microservice)
    elif baseline_service is not None:
        new_service = apply_to_service(baseline_service, delta)
    else:
        new_service = None
    if new_service is not None:
        graph.add_edges_from(new_service.call_graph_edges)

    if id not in graph:
        return set()
    return set(nx.ancestors(graph, id))


def detect_invalid_calls(
    increment: SystemIR,
    baseline: SystemIR | None = None,
    deltas: Iterable[Delta] = (),
    rule_name: str = "IC",
) -> list[Violation]:
    """
    Flag remote calls that match no endpoint of the system.

    :param: increment
        The linked :class:`SystemIR` to sweep.

    :param: baseline
        The baseline of the step, used to attribute violations to changes.

    :param: deltas
        The deltas of the step.

    :param: rule_name
        The name to report the violations under.

    :return:
        One violation per unmatched call.

    """

    index = EndpointIndex(increment)
    context = ChangeContext(baseline, deltas)
    violations: list[Violation] = []
    for call in sorted(increment.rest_calls):
        if index.match(call) is not None:
            continue
        item = ImpactedItem(
            call.owning_component,
            "Call",
            call.identity,
            (
                ("call", f"{call.http_method.value} {call.target_service}{call.path}"),
                ("service", call.owning_component.microservice),
                ("siteMethod", call.site_method),
            ),
        )
        violations.append(
            Violation.create(
                rule_name,
                increment.version_label,
                context.related_to_call(call.owning_component, call.key),
                [item],
            )
        )
    return violations


def detect_uncalled_endpoints(
    increment: SystemIR,
    baseline: SystemIR | None = None,
    deltas: Iterable[Delta] = (),
    rule_name: str = "UEM",
) -> list[Violation]:
    """
    Flag endpoints that no remote call of the system matches.

    :param: increment
        The linked :class:`SystemIR` to sweep.

    :param: baseline
        The baseline of the step, used to attribute violations to changes.

    :param: deltas
        The deltas of the step.

    :param: rule_name
        The name to report the violations under.

    :return:
        One violation per uncalled endpoint.

    """

    index = EndpointIndex(increment)
    called = {index.match(call) for call in increment.rest_calls}
    context = ChangeContext(baseline, deltas)
    violations: list[Violation] = []
    for endpoint in sorted(increment.endpoints):
        if endpoint in called:
            continue
        item = ImpactedItem(
            endpoint.owning_component,
            "Endpoint",
            endpoint.identity,
            (
                ("endpoint", f"{endpoint.http_method.value} {endpoint.path}"),
                ("handlerMethod", endpoint.handler_method),
                ("service", endpoint.owning_component.microservice),
            ),
        )
        violations.append(
            Violation.create(
                rule_name,
                increment.version_label,
                context.related_to_endpoint(endpoint.owning_component, endpoint.key),
                [item],
            )
        )
    return violations


def _modified_components(
    baseline: SystemIR, delta: Delta, component_type: ComponentType
) -> Iterable[tuple[Component, Component]]:
    """Yield the (old, new) versions of the modified components of one type."""

    for change in delta.changes:
        if (
            change.kind != ChangeKind.MODIFY
            or change.component_id.component_type != component_type
        ):
            continue
        old = baseline.component(change.component_id)
        if old is not None:
            yield old, change.new_component


def _method_violation(
    rule_name: str,
    label: str,
    old: Component,
    method: Method | None,
    name: str,
    arity: int,
    reasons: list[tuple[str, str]],
    dependent_ids: set[ComponentId],
    dependent_type: ComponentType,
) -> Violation:
    """Build the violation of a modified method and its dependents."""

    identity = method_identity(old.id, method, name, arity)
    items = [ImpactedItem(old.id, "Method", identity, tuple(reasons))]
    items.extend(
        ImpactedItem(dependent, dependent_type.value, dependent.key, (("uses", identity),))
        for dependent in sorted(dependent_ids)
        if dependent.component_type == dependent_type
    )
    return Violation.create(rule_name, label, [(old.id, ChangeKind.MODIFY)], items)


def detect_service_method_modifications(
    baseline: SystemIR,
    delta: Delta,
    increment: SystemIR | None = None,
    rule_name: str = "SMM",
) -> list[Violation]:
    """
    Flag service methods that possibly return inconsistent results.

    Methods are paired by name and arity. A pair is flagged when the return type
    changed, or when the calls made on values of the return type changed.

    :param: baseline
        The baseline :class:`SystemIR`.

    :param: delta
        The :class:`Delta` applied to it.

    :param: increment
        The increment, if already derived.

    :param: rule_name
        The name to report the violations under.

    :return:
        One violation per flagged method, impacting its calling controllers.

    """

    label = increment.version_label if increment is not None else baseline.version_label
    violations: list[Violation] = []
    for old, new in _modified_components(baseline, delta, ComponentType.SERVICE):
        for method in new.methods:
            previous = old.method(method.name, method.arity)
            if previous is None or previous.member_hash == method.member_hash:
                continue

            reasons: list[tuple[str, str]] = []
            if previous.return_type != method.return_type:
                reasons.append(
                    ("returnType", f"{previous.return_type} -> {method.return_type}")
                )
            if set(previous.return_object_calls) != set(method.return_object_calls):
                reasons.append(
                    (
                        "returnObjectCalls",
                        f"{', '.join(previous.return_object_calls) or '-'} -> "
                        f"{', '.join(method.return_object_calls) or '-'}",
                    )
                )
            if not reasons:
                continue

            reasons.append(("method", method.signature))
            violations.append(
                _method_violation(
                    rule_name,
                    label,
                    old,
                    method,
                    method.name,
                    method.arity,
                    reasons,
                    dependents(baseline, delta, increment, old.id),
                    ComponentType.CONTROLLER,
                )
            )
    return violations


def detect_repository_method_modifications(
    baseline: SystemIR,
    delta: Delta,
    increment: SystemIR | None = None,
    rule_name: str = "RMM",
) -> list[Violation]:
    """
    Flag repository methods whose definition changed.

    Methods are paired by name and arity. A pair is flagged when its annotation set or
    its signature changed; an added or removed method is flagged when it carries
    annotations.

    :param: baseline
        The baseline :class:`SystemIR`.

    :param: delta
        The :class:`Delta` applied to it.

    :param: increment
        The increment, if already derived.

    :param: rule_name
        The name to report the violations under.

    :return:
        One violation per flagged method, impacting the services using the repository.

    """

    label = increment.version_label if increment is not None else baseline.version_label
    violations: list[Violation] = []
    for old, new in _modified_components(baseline, delta, ComponentType.REPOSITORY):
        old_methods = {(method.name, method.arity): method for method in old.methods}
        new_methods = {(method.name, method.arity): method for method in new.methods}
        for name, arity in sorted(set(old_methods) | set(new_methods)):
            before = old_methods.get((name, arity))
            after = new_methods.get((name, arity))
            before_annotations = sorted(before.annotations) if before else []
            after_annotations = sorted(after.annotations) if after else []

            reasons: list[tuple[str, str]] = []
            if before_annotations != after_annotations:
                reasons.append(
                    (
                        "annotations",
                        f"{', '.join(before_annotations) or '-'} -> "
                        f"{', '.join(after_annotations) or '-'}",
                    )
                )
            if before is not None and after is not None and (
                before.signature != after.signature
            ):
                reasons.append(("signature", f"{before.signature} -> {after.signature}"))
            if not reasons:
                continue

            violations.append(
                _method_violation(
                    rule_name,
                    label,
                    old,
                    after,
                    name,
                    arity,
                    reasons,
                    dependents(baseline, delta, increment, old.id),
                    ComponentType.SERVICE,
                )
            )
    return violations
