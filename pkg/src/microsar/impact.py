#!/usr/bin/python3.10
########################################################################################
# impact.py - Change-impact analysis for microsar.                                     #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Computes the direct and indirect impact of a delta.

The direct impact are the components the delta changes. The indirect impact are the
components reachable from them through the users of a component (reversed call-graph
edges) and through cross-service edges, which are followed in both directions.

"""

from collections import deque
from dataclasses import dataclass, field
from typing import Any

import networkx as nx

from .__utils__ import DEFAULT_MAX_CROSS_HOPS, DEFAULT_OVERLAP_THRESHOLD
from .extraction.java_parser import simple_type
from .ir_model import ComponentId, ComponentType, Delta, EdgeKind, SystemIR
from .merge import apply_delta

__all__ = (
    "export_graph",
    "impact_set",
    "impact_text",
    "ImpactReport",
    "ImpactStep",
)

# Call graph:
#   Label of a traversal step from a component to one of its users.
CALL_GRAPH: str = "CallGraph"

# Entity usage:
#   Label of a traversal step from an entity to a component referencing it.
ENTITY_USAGE: str = "EntityUsage"


@dataclass(frozen=True)
class ImpactStep:
    """
    One step of an impact path.

    .. attribute:: source
        The component the impact comes from.

    .. attribute:: target
        The component the impact reaches.

    .. attribute:: kind
        The edge followed: `CallGraph`, `EntityUsage`, `RemoteCall` or `DataOverlap`.

    """

    source: ComponentId
    target: ComponentId
    kind: str

    @property
    def crosses_services(self) -> bool:
        return self.source.microservice != self.target.microservice


@dataclass(frozen=True)
class ImpactReport:
    """
    The impact of a delta.

    .. attribute:: direct
        The changed components.

    .. attribute:: indirect
        Map from each indirectly impacted component to the shortest path reaching it
        from a changed component.

    .. attribute:: affected_services
        The services, other than the changed one, holding indirectly impacted
        components.

    """

    direct: frozenset[ComponentId] = frozenset()
    indirect: dict[ComponentId, tuple[ImpactStep, ...]] = field(default_factory=dict)
    affected_services: frozenset[str] = frozenset()

    def to_document(self) -> dict[str, Any]:
        """Return the report as a JSON-serializable document."""

        return {
            "affectedServices": sorted(self.affected_services),
            "direct": sorted(id.key for id in self.direct),
            "indirect": [
                {
                    "componentId": id.key,
                    "path": [
                        {"from": step.source.key, "kind": step.kind, "to": step.target.key}
                        for step in self.indirect[id]
                    ],
                }
                for id in sorted(self.indirect)
            ],
        }


def _entity_users(system: SystemIR) -> list[tuple[ComponentId, ComponentId]]:
    """Return the (entity, user) pairs of components referencing an entity type."""

    pairs: list[tuple[ComponentId, ComponentId]] = []
    for service in system.services.values():
        entities = {
            id.simple_name: id
            for id in service.components
            if id.component_type == ComponentType.ENTITY
        }
        for component in service.components.values():
            if component.id.component_type == ComponentType.ENTITY:
                continue
            referenced = {simple_type(declared) for _, declared in component.fields}
            for method in component.methods:
                referenced.add(simple_type(method.return_type))
                referenced.update(simple_type(declared) for _, declared in method.parameters)
            referenced.update(
                argument.strip()
                for supertype in component.supertypes
                if "<" in supertype
                for argument in supertype[supertype.index("<") + 1 : -1].split(",")
            )
            pairs.extend(
                (entities[name], component.id)
                for name in sorted(referenced & set(entities))
            )
    return pairs


def _impact_graph(
    systems: list[SystemIR], include_data_overlap: bool, include_entity_usage: bool
) -> nx.DiGraph:
    """Build the directed graph along which impact propagates."""

    graph = nx.DiGraph()
    for system in systems:
        for service in system.services.values():
            graph.add_nodes_from(service.components)
            for caller, callee in service.call_graph_edges:
                graph.add_edge(callee, caller, kind=CALL_GRAPH)
        if include_entity_usage:
            for entity, user in _entity_users(system):
                if not graph.has_edge(entity, user):
                    graph.add_edge(entity, user, kind=ENTITY_USAGE)
        for edge in sorted(
            system.cross_edges, key=lambda edge: (edge.kind.value, edge.source, edge.target)
        ):
            if edge.kind == EdgeKind.DATA_OVERLAP and not include_data_overlap:
                continue
            for source, target in ((edge.source, edge.target), (edge.target, edge.source)):
                if not graph.has_edge(source, target):
                    graph.add_edge(source, target, kind=edge.kind.value)
    return graph


def impact_set(
    baseline: SystemIR,
    delta: Delta,
    max_hops: int | None = None,
    include_data_overlap: bool = True,
    *,
    max_cross_hops: int = DEFAULT_MAX_CROSS_HOPS,
    include_entity_usage: bool = False,
    increment: SystemIR | None = None,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> ImpactReport:
    """
    Compute the impact of a delta.

    The traversal runs over the union of the baseline and the increment, so removed
    and added dependencies both propagate impact.

    :param: baseline
        The baseline :class:`SystemIR`.

    :param: delta
        The :class:`Delta`.

    :param: max_hops
        The maximum path length, or `None` for no bound.

    :param: include_data_overlap
        Whether data-overlap edges propagate impact.

    :param: max_cross_hops
        The maximum number of cross-service steps on a path.

    :param: include_entity_usage
        Whether a changed entity impacts the components referencing it.

    :param: increment
        The increment, derived from the baseline when omitted.

    :param: overlap_threshold
        The entity similarity used when deriving the increment.

    :return:
        The :class:`ImpactReport`.

    """

    direct = frozenset(delta.changed_ids)
    if not direct:
        return ImpactReport()
    if increment is None:
        increment = apply_delta(baseline, delta, overlap_threshold)

    graph = _impact_graph(
        [baseline, increment], include_data_overlap, include_entity_usage
    )
    paths: dict[ComponentId, tuple[ImpactStep, ...]] = {}
    queue: deque[tuple[ComponentId, int, tuple[ImpactStep, ...]]] = deque(
        (id, 0, ()) for id in sorted(direct)
    )
    visited: set[tuple[ComponentId, int]] = {(id, 0) for id in direct}
    while queue:
        current, cross_hops, path = queue.popleft()
        if max_hops is not None and len(path) >= max_hops:
            continue
        if current not in graph:
            continue
        for neighbour in sorted(graph.successors(current)):
            step = ImpactStep(current, neighbour, graph.edges[current, neighbour]["kind"])
            next_cross_hops = cross_hops + step.crosses_services
            if next_cross_hops > max_cross_hops or (neighbour, next_cross_hops) in visited:
                continue
            visited.add((neighbour, next_cross_hops))
            if neighbour not in direct and neighbour not in paths:
                paths[neighbour] = path + (step,)
            queue.append((neighbour, next_cross_hops, path + (step,)))

    return ImpactReport(
        direct=direct,
        indirect=dict(sorted(paths.items())),
        affected_services=frozenset(
            id.microservice for id in paths if id.microservice != delta.microservice
        ),
    )


def impact_text(report: ImpactReport) -> str:
    """Render a human-readable impact report."""

    lines = [f"Direct impact ({len(report.direct)}):"]
    lines.extend(f"  {id.key}" for id in sorted(report.direct))
    lines.append(f"Indirect impact ({len(report.indirect)}):")
    for id, path in report.indirect.items():
        lines.append(f"  {id.key}")
        lines.extend(
            f"    {step.source.key} -[{step.kind}]-> {step.target.key}" for step in path
        )
    lines.append(
        "Affected services: "
        + (", ".join(sorted(report.affected_services)) or "none")
    )
    return "\n".join(lines) + "\n"


def export_graph(report: ImpactReport, system: SystemIR) -> dict[str, Any]:
    """
    Export the impacted system as a node-link graph document.

    Nodes are tagged `direct`, `indirect` or `context`.

    :param: report
        The :class:`ImpactReport`.

    :param: system
        The :class:`SystemIR` providing the context nodes and edges.

    :return:
        The networkx node-link document.

    """

    graph = nx.DiGraph()
    nodes = {component.id for component in system.components}
    nodes |= report.direct | set(report.indirect)
    for id in sorted(nodes):
        graph.add_node(
            id.key,
            componentType=id.component_type.value,
            microservice=id.microservice,
            tag=(
                "direct"
                if id in report.direct
                else "indirect" if id in report.indirect else "context"
            ),
        )
    for service in system.services.values():
        for caller, callee in sorted(service.call_graph_edges):
            graph.add_edge(caller.key, callee.key, kind=CALL_GRAPH)
    for edge in system.cross_edges:
        graph.add_edge(edge.source.key, edge.target.key, kind=edge.kind.value)
    for path in report.indirect.values():
        for step in path:
            if not graph.has_edge(step.source.key, step.target.key) and not graph.has_edge(
                step.target.key, step.source.key
            ):
                graph.add_edge(step.source.key, step.target.key, kind=step.kind)

    return nx.node_link_data(graph)
