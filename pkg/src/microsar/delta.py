#!/usr/bin/python3.10
########################################################################################
# delta.py - Component-level deltas between microservice versions.                     #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Computes and composes the :class:`Delta` between two versions of one microservice.

"""

from .__utils__ import ServiceNameMismatchError, VersionChainError
from .ir_model import Change, ChangeKind, ComponentId, Delta, MicroserviceIR

__all__ = (
    "compose_deltas",
    "compute_delta",
    "empty_delta",
)


def compute_delta(old_ir: MicroserviceIR, new_ir: MicroserviceIR) -> Delta:
    """
    Compute the component-level difference between two versions of a microservice.

    :param: old_ir
        The earlier version.

    :param: new_ir
        The later version.

    :return:
        The :class:`Delta`; components with equal content hashes are absent.

    """

    if old_ir.name != new_ir.name:
        raise ServiceNameMismatchError(old_ir.name, new_ir.name)

    changes: list[Change] = []
    for id in sorted(set(old_ir.components) | set(new_ir.components)):
        old_component = old_ir.components.get(id)
        new_component = new_ir.components.get(id)
        if old_component is None:
            changes.append(Change(ChangeKind.ADD, id, new_component=new_component))
        elif new_component is None:
            changes.append(
                Change(
                    ChangeKind.DELETE, id, old_content_hash=old_component.content_hash
                )
            )
        elif old_component.content_hash != new_component.content_hash:
            changes.append(
                Change(
                    ChangeKind.MODIFY,
                    id,
                    new_component=new_component,
                    old_content_hash=old_component.content_hash,
                )
            )

    return Delta(old_ir.name, old_ir.version_id, new_ir.version_id, tuple(changes))


def empty_delta(service: MicroserviceIR, new_version_id: str) -> Delta:
    """Return a delta that only moves a microservice to a new version."""

    return Delta(service.name, service.version_id, new_version_id)


def _chain_error(id: ComponentId, first: ChangeKind, second: ChangeKind) -> VersionChainError:
    return VersionChainError(
        f"{second.value} of {id} cannot follow {first.value} in a version chain."
    )


def _compose_changes(first: Change, second: Change) -> Change | None:
    """
    Compose two successive changes of one component.

    :return:
        The combined :class:`Change`, or `None` when the changes cancel out.

    """

    id = first.component_id
    if first.kind != ChangeKind.DELETE and second.kind != ChangeKind.ADD:
        if second.old_content_hash != first.new_component.content_hash:
            raise VersionChainError(
                f"Change of {id} does not start from the content the previous delta "
                "produced."
            )

    match (first.kind, second.kind):
        case (ChangeKind.ADD, ChangeKind.MODIFY):
            return Change(ChangeKind.ADD, id, new_component=second.new_component)
        case (ChangeKind.ADD, ChangeKind.DELETE):
            return None
        case (ChangeKind.MODIFY, ChangeKind.MODIFY) | (ChangeKind.DELETE, ChangeKind.ADD):
            if second.new_component.content_hash == first.old_content_hash:
                return None
            return Change(
                ChangeKind.MODIFY,
                id,
                new_component=second.new_component,
                old_content_hash=first.old_content_hash,
            )
        case (ChangeKind.MODIFY, ChangeKind.DELETE):
            return Change(
                ChangeKind.DELETE, id, old_content_hash=first.old_content_hash
            )
        case _:
            raise _chain_error(id, first.kind, second.kind)


def compose_deltas(first: Delta, second: Delta) -> Delta:
    """
    Compose two successive deltas of one microservice.

    :param: first
        The earlier delta.

    :param: second
        The later delta, starting at the version `first` produces.

    :return:
        The :class:`Delta` spanning both.

    """

    if first.microservice != second.microservice:
        raise VersionChainError(
            f"Cannot compose deltas of '{first.microservice}' and "
            f"'{second.microservice}'."
        )
    if first.new_version_id != second.old_version_id:
        raise VersionChainError(
            f"Delta ending at '{first.new_version_id}' cannot be followed by a delta "
            f"starting at '{second.old_version_id}'."
        )

    first_changes = {change.component_id: change for change in first.changes}
    second_changes = {change.component_id: change for change in second.changes}
    changes: list[Change] = []
    for id in sorted(set(first_changes) | set(second_changes)):
        if id not in second_changes:
            changes.append(first_changes[id])
        elif id not in first_changes:
            changes.append(second_changes[id])
        elif (
            composed := _compose_changes(first_changes[id], second_changes[id])
        ) is not None:
            changes.append(composed)

    return Delta(
        first.microservice, first.old_version_id, second.new_version_id, tuple(changes)
    )
