#!/usr/bin/python3.10
########################################################################################
# linker.py - Cross-service linking for microsar.                                      #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Combines per-service IRs into one :class:`SystemIR`.

Remote calls are matched to endpoints by verb and normalized path, and entities of
different services are compared by field-name overlap.

"""

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Iterable, Mapping

import networkx as nx

from .__utils__ import (
    DEFAULT_OVERLAP_THRESHOLD,
    DuplicateServiceError,
    UndefinedSimilarityError,
)
from .ir_model import (
    ComponentId,
    DependencyEdge,
    EdgeKind,
    Endpoint,
    Entity,
    HttpMethod,
    MicroserviceIR,
    render_version_label,
    RestCall,
    SystemIR,
    UNRESOLVED,
)

__all__ = (
    "build_system_ir",
    "data_overlap_edges",
    "EndpointIndex",
    "entity_overlap",
    "export_service_graph",
    "link_report",
    "LinkReport",
    "match_call_to_endpoint",
    "remote_call_edges",
    "service_graph",
    "uncalled_endpoints",
    "unmatched_calls",
)


def _service_list(
    services: SystemIR | Mapping[str, MicroserviceIR] | Iterable[MicroserviceIR],
) -> list[MicroserviceIR]:
    """Return the microservices of any accepted system form."""

    if isinstance(services, SystemIR):
        services = services.services
    if isinstance(services, Mapping):
        services = services.values()
    return sorted(services, key=lambda service: service.name)


class EndpointIndex:
    """
    Endpoints of a system keyed by (verb, path) for call matching.

    """

    def __init__(
        self,
        services: SystemIR | Mapping[str, MicroserviceIR] | Iterable[MicroserviceIR],
    ) -> None:
        """
        Instantiate a :class:`EndpointIndex` instance.

        :param: services
            The system, or its microservices.

        """

        self._endpoints: dict[tuple[HttpMethod, str], list[Endpoint]] = defaultdict(list)
        for service in _service_list(services):
            for component in service.components.values():
                for endpoint in component.endpoints:
                    self._endpoints[endpoint.key].append(endpoint)
        for candidates in self._endpoints.values():
            candidates.sort()

    def match(self, call: RestCall) -> Endpoint | None:
        """
        Match a remote call to an endpoint.

        :param: call
            The :class:`RestCall` to match.

        :return:
            The matched :class:`Endpoint`, or `None` when there is no match or an
            unresolved call matches endpoints of several services.

        """

        candidates = self._endpoints.get(call.key, [])
        if call.target_service != UNRESOLVED:
            candidates = [
                endpoint
                for endpoint in candidates
                if endpoint.owning_component.microservice == call.target_service
            ]
        if not candidates:
            return None
        if len({endpoint.owning_component.microservice for endpoint in candidates}) > 1:
            return None
        return candidates[0]


def match_call_to_endpoint(
    call: RestCall,
    system: SystemIR | Mapping[str, MicroserviceIR] | Iterable[MicroserviceIR],
) -> Endpoint | None:
    """
    Match a remote call against the endpoints of a system.

    :param: call
        The :class:`RestCall` to match.

    :param: system
        The system, or its microservices.

    :return:
        The matched :class:`Endpoint`, or `None`.

    """

    return EndpointIndex(system).match(call)


def entity_overlap(a: Entity, b: Entity) -> float:
    """
    Compute the field-name similarity of two entities.

    :param: a
        The first entity.

    :param: b
        The second entity.

    :return:
        The Jaccard index over the lower-cased field names.

    """

    names_a = a.field_names
    names_b = b.field_names
    if not names_a or not names_b:
        raise UndefinedSimilarityError(
            f"Similarity of '{a.name}' and '{b.name}' is undefined for an entity "
            "without fields."
        )
    return len(names_a & names_b) / len(names_a | names_b)


def remote_call_edges(
    index: EndpointIndex, calls: Iterable[RestCall]
) -> set[DependencyEdge]:
    """
    Derive the remote-call edges of the given calls.

    A call matching an endpoint of its own service produces no edge.

    :param: index
        The :class:`EndpointIndex` of the system.

    :param: calls
        The calls to match.

    :return:
        The remote-call :class:`DependencyEdge` set.

    """

    edges: set[DependencyEdge] = set()
    for call in calls:
        endpoint = index.match(call)
        if (
            endpoint is None
            or endpoint.owning_component.microservice
            == call.owning_component.microservice
        ):
            continue
        edges.add(
            DependencyEdge(
                EdgeKind.REMOTE_CALL,
                call.owning_component,
                endpoint.owning_component,
                call=call,
                endpoint=endpoint,
            )
        )
    return edges


def _entities(services: Iterable[MicroserviceIR]) -> list[tuple[ComponentId, Entity]]:
    """Return the entities of the given services with fields, in id order."""

    return sorted(
        (component.id, component.entity)
        for service in services
        for component in service.components.values()
        if component.entity is not None and component.entity.fields
    )


def data_overlap_edges(
    services: SystemIR | Mapping[str, MicroserviceIR] | Iterable[MicroserviceIR],
    overlap_threshold: float,
    only: Iterable[ComponentId] | None = None,
) -> set[DependencyEdge]:
    """
    Derive the data-overlap edges between entities of different services.

    Each edge is stored once, from the smaller to the larger component id.

    :param: services
        The system, or its microservices.

    :param: overlap_threshold
        The similarity at or above which an edge is created.

    :param: only
        When given, only pairs involving one of these components are compared.

    :return:
        The data-overlap :class:`DependencyEdge` set.

    """

    entities = _entities(_service_list(services))
    focus = set(only) if only is not None else None
    edges: set[DependencyEdge] = set()
    for (id_a, entity_a), (id_b, entity_b) in combinations(entities, 2):
        if id_a.microservice == id_b.microservice:
            continue
        if focus is not None and id_a not in focus and id_b not in focus:
            continue
        similarity = entity_overlap(entity_a, entity_b)
        if similarity >= overlap_threshold:
            edges.add(
                DependencyEdge(
                    EdgeKind.DATA_OVERLAP, id_a, id_b, similarity=similarity
                )
            )
    return edges


def build_system_ir(
    services: Iterable[MicroserviceIR],
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    version_label: str | None = None,
) -> SystemIR:
    """
    Link microservice IRs into a :class:`SystemIR`.

    :param: services
        The microservice IRs; names must be unique.

    :param: overlap_threshold
        The entity similarity at or above which a data-overlap edge is created.

    :param: version_label
        The system version label; rendered from the service versions when omitted.

    :return:
        The :class:`SystemIR`.

    """

    service_map: dict[str, MicroserviceIR] = {}
    for service in services:
        if service.name in service_map:
            raise DuplicateServiceError(service.name)
        service_map[service.name] = service
    service_map = dict(sorted(service_map.items()))

    index = EndpointIndex(service_map)
    calls = [
        call
        for service in service_map.values()
        for component in service.components.values()
        for call in component.rest_calls
    ]
    cross_edges = remote_call_edges(index, calls) | data_overlap_edges(
        service_map, overlap_threshold
    )

    return SystemIR(
        version_label=(
            version_label
            if version_label is not None
            else render_version_label(service_map)
        ),
        services=service_map,
        cross_edges=frozenset(cross_edges),
    )


def unmatched_calls(system: SystemIR) -> list[RestCall]:
    """Return the remote calls that match no endpoint, in order."""

    index = EndpointIndex(system)
    return sorted(call for call in system.rest_calls if index.match(call) is None)


def uncalled_endpoints(system: SystemIR) -> list[Endpoint]:
    """Return the endpoints that no remote call of the system matches, in order."""

    index = EndpointIndex(system)
    called = {index.match(call) for call in system.rest_calls}
    return sorted(endpoint for endpoint in system.endpoints if endpoint not in called)


@dataclass(frozen=True)
class LinkReport:
    """
    Summarises the linking of a system.

    .. attribute:: version_label
        The system version label.

    .. attribute:: matched_calls
        The number of calls matching an endpoint.

    .. attribute:: unmatched_calls
        The calls matching no endpoint.

    .. attribute:: uncalled_endpoints
        The endpoints no call matches.

    .. attribute:: remote_call_edges
        The number of remote-call edges.

    .. attribute:: data_overlap_edges
        The number of data-overlap edges.

    """

    version_label: str
    matched_calls: int
    unmatched_calls: tuple[RestCall, ...]
    uncalled_endpoints: tuple[Endpoint, ...]
    remote_call_edges: int
    data_overlap_edges: int

    def to_document(self) -> dict[str, Any]:
        """Return the report as a JSON-serializable document."""

        return {
            "dataOverlapEdges": self.data_overlap_edges,
            "matchedCalls": self.matched_calls,
            "remoteCallEdges": self.remote_call_edges,
            "uncalledEndpoints": [
                endpoint.identity for endpoint in self.uncalled_endpoints
            ],
            "unmatchedCalls": [call.identity for call in self.unmatched_calls],
            "versionLabel": self.version_label,
        }


def link_report(system: SystemIR) -> LinkReport:
    """
    Summarise the linking of a system.

    :param: system
        The linked :class:`SystemIR`.

    :return:
        The :class:`LinkReport`.

    """

    unmatched = tuple(unmatched_calls(system))
    return LinkReport(
        version_label=system.version_label,
        matched_calls=sum(1 for _ in system.rest_calls) - len(unmatched),
        unmatched_calls=unmatched,
        uncalled_endpoints=tuple(uncalled_endpoints(system)),
        remote_call_edges=sum(
            1 for edge in system.cross_edges if edge.kind == EdgeKind.REMOTE_CALL
        ),
        data_overlap_edges=sum(
            1 for edge in system.cross_edges if edge.kind == EdgeKind.DATA_OVERLAP
        ),
    )


def service_graph(system: SystemIR) -> nx.DiGraph:
    """
    Collapse a system into its service dependency graph.

    Every microservice becomes one node; the cross-service edges between two services
    are aggregated into one directed edge counting them per kind. Data-overlap edges
    keep their stored orientation.

    :param: system
        The linked :class:`SystemIR`.

    :return:
        The :class:`networkx.DiGraph` with `components` and `endpoints` counts on the
        nodes and `remoteCalls`, `dataOverlaps` and `weight` counts on the edges.

    """

    graph = nx.DiGraph()
    for name, service in system.services.items():
        graph.add_node(
            name,
            components=len(service.components),
            endpoints=sum(1 for _ in service.endpoints),
            versionId=service.version_id,
        )

    counts: dict[tuple[str, str], dict[EdgeKind, int]] = defaultdict(
        lambda: dict.fromkeys(EdgeKind, 0)
    )
    for edge in system.cross_edges:
        counts[(edge.source.microservice, edge.target.microservice)][edge.kind] += 1
    for (source, target), kinds in sorted(counts.items()):
        graph.add_edge(
            source,
            target,
            remoteCalls=kinds[EdgeKind.REMOTE_CALL],
            dataOverlaps=kinds[EdgeKind.DATA_OVERLAP],
            weight=sum(kinds.values()),
        )

    return graph


def export_service_graph(system: SystemIR) -> dict[str, Any]:
    """Return the service dependency graph of a system as a node-link document."""

    return nx.node_link_data(service_graph(system))
