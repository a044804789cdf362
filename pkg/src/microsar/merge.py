#!/usr/bin/python3.10
########################################################################################
# merge.py - Applying deltas to a system baseline.                                     #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Applies a :class:`Delta` to a :class:`SystemIR` baseline, producing the increment.

Cross-service edges are maintained incrementally: only the edges whose matching could
depend on a changed component are re-derived, all others are carried over.

"""

from .__utils__ import (
    DEFAULT_OVERLAP_THRESHOLD,
    MissingTargetError,
    ServiceNameMismatchError,
    StaleBaselineError,
)
from .extraction.callgraph import build_call_graph
from .ir_model import (
    ChangeKind,
    Component,
    ComponentId,
    Delta,
    DependencyEdge,
    EdgeKind,
    HttpMethod,
    MicroserviceIR,
    render_version_label,
    SystemIR,
)
from .linker import data_overlap_edges, EndpointIndex, remote_call_edges

__all__ = (
    "apply_delta",
    "apply_to_service",
    "drop_service",
)


def apply_to_service(service: MicroserviceIR, delta: Delta) -> MicroserviceIR:
    """
    Apply a delta to one microservice.

    :param: service
        The baseline :class:`MicroserviceIR`.

    :param: delta
        The :class:`Delta` of that microservice.

    :return:
        The microservice at the delta's new version, with its call graph recomputed.

    """

    if service.name != delta.microservice:
        raise ServiceNameMismatchError(service.name, delta.microservice)

    components: dict[ComponentId, Component] = dict(service.components)
    for change in delta.changes:
        current = components.get(change.component_id)
        if change.kind == ChangeKind.ADD:
            if current is not None:
                raise StaleBaselineError(
                    f"Cannot add {change.component_id}: it is already present."
                )
            components[change.component_id] = change.new_component
            continue

        if current is None:
            raise MissingTargetError(
                f"Cannot {change.kind.value.lower()} {change.component_id}: it is not "
                f"part of version '{service.version_id}'."
            )
        if current.content_hash != change.old_content_hash:
            raise StaleBaselineError(
                f"The delta was computed against different content of "
                f"{change.component_id}."
            )
        if change.kind == ChangeKind.DELETE:
            del components[change.component_id]
        else:
            components[change.component_id] = change.new_component

    return MicroserviceIR(
        name=service.name,
        version_id=delta.new_version_id,
        components=dict(sorted(components.items())),
        call_graph_edges=build_call_graph(components),
    )


def _relink(
    baseline: SystemIR,
    services: dict[str, MicroserviceIR],
    changed: set[ComponentId],
    affected_keys: set[tuple[HttpMethod, str]],
    overlap_threshold: float,
) -> frozenset[DependencyEdge]:
    """
    Maintain the cross edges after components changed.

    Remote-call edges are re-derived for calls owned by changed components and for
    every call whose (verb, path) key is served by a changed component; data-overlap
    edges are re-derived for changed entities.

    """

    kept: set[DependencyEdge] = set()
    for edge in baseline.cross_edges:
        if (
            edge.source.microservice not in services
            or edge.target.microservice not in services
            or edge.source in changed
            or edge.target in changed
        ):
            continue
        if edge.kind == EdgeKind.REMOTE_CALL and edge.call.key in affected_keys:
            continue
        kept.add(edge)

    calls = [
        call
        for service in services.values()
        for component in service.components.values()
        for call in component.rest_calls
        if component.id in changed or call.key in affected_keys
    ]
    kept |= remote_call_edges(EndpointIndex(services), calls)
    kept |= data_overlap_edges(services, overlap_threshold, only=changed)
    return frozenset(kept)


def apply_delta(
    baseline: SystemIR,
    delta: Delta,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> SystemIR:
    """
    Apply a delta to a system baseline.

    :param: baseline
        The baseline :class:`SystemIR`.

    :param: delta
        The :class:`Delta`; a delta of an unknown microservice must only add.

    :param: overlap_threshold
        The entity similarity at or above which a data-overlap edge is created.

    :return:
        The increment :class:`SystemIR`.

    """

    service = baseline.services.get(delta.microservice)
    if service is None:
        if any(change.kind != ChangeKind.ADD for change in delta.changes):
            raise MissingTargetError(
                f"Microservice '{delta.microservice}' is not part of the baseline."
            )
        service = MicroserviceIR(delta.microservice, delta.old_version_id)

    new_service = apply_to_service(service, delta)
    services = dict(baseline.services)
    services[new_service.name] = new_service
    services = dict(sorted(services.items()))

    changed = set(delta.changed_ids)
    affected_keys = {
        endpoint.key
        for id in changed
        for component in (service.components.get(id), new_service.components.get(id))
        if component is not None
        for endpoint in component.endpoints
    }

    return SystemIR(
        version_label=render_version_label(services),
        services=services,
        cross_edges=_relink(baseline, services, changed, affected_keys, overlap_threshold),
    )


def drop_service(
    system: SystemIR,
    service_name: str,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> SystemIR:
    """
    Remove a microservice that no longer exists.

    :param: system
        The :class:`SystemIR`.

    :param: service_name
        The name of the microservice to remove.

    :param: overlap_threshold
        The entity similarity at or above which a data-overlap edge is created.

    :return:
        The :class:`SystemIR` without the microservice; calls that matched its
        endpoints are re-matched.

    """

    removed = system.services.get(service_name)
    if removed is None:
        raise MissingTargetError(
            f"Microservice '{service_name}' is not part of the system."
        )

    services = {
        name: service for name, service in system.services.items() if name != service_name
    }
    affected_keys = {endpoint.key for endpoint in removed.endpoints}
    return SystemIR(
        version_label=render_version_label(services),
        services=services,
        cross_edges=_relink(system, services, set(), affected_keys, overlap_threshold),
    )
