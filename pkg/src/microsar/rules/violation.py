#!/usr/bin/python3.10
########################################################################################
# violation.py - Rule violations and their reports.                                    #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 16/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

import hashlib
import json

from dataclasses import dataclass
from typing import Any, Iterable

from ..ir_model import ChangeKind, ComponentId

__all__ = (
    "ImpactedItem",
    "Violation",
    "violations_document",
    "violations_text",
)


@dataclass(frozen=True, order=True)
class ImpactedItem:
    """
    An item flagged by a violation.

    .. attribute:: component_id
        The component the item belongs to.

    .. attribute:: kind
        The item kind, e.g. `Call`, `Endpoint`, `Method` or a component type.

    .. attribute:: identity
        The stable identity of the item across versions.

    .. attribute:: evidence
        The (key, value) pairs explaining why the item is flagged.

    """

    component_id: ComponentId
    kind: str
    identity: str
    evidence: tuple[tuple[str, str], ...] = ()

    def to_document(self) -> dict[str, Any]:
        return {
            "componentId": self.component_id.key,
            "evidence": dict(self.evidence),
            "identity": self.identity,
            "kind": self.kind,
        }


@dataclass(frozen=True)
class Violation:
    """
    A potential change conflict.

    .. attribute:: rule_name
        The name of the violated rule.

    .. attribute:: system_version_label
        The label of the system version the violation was found in.

    .. attribute:: triggering
        The (component, change kind) pairs of the changes related to the violation;
        empty for system-level sweeps with no related change.

    .. attribute:: impacted
        The flagged items, sorted.

    .. attribute:: dedup_key
        The digest of the rule name and the impacted identities; equal across versions
        while the same logical violation persists.

    """

    rule_name: str
    system_version_label: str
    triggering: tuple[tuple[ComponentId, ChangeKind], ...]
    impacted: tuple[ImpactedItem, ...]
    dedup_key: str

    def __post_init__(self) -> None:
        if not self.impacted:
            raise ValueError(f"A {self.rule_name} violation must impact an item.")

    @classmethod
    def create(
        cls,
        rule_name: str,
        system_version_label: str,
        triggering: Iterable[tuple[ComponentId, ChangeKind]],
        impacted: Iterable[ImpactedItem],
    ) -> "Violation":
        """
        Create a violation, computing its dedup key.

        :param: rule_name
            The name of the violated rule.

        :param: system_version_label
            The system version label.

        :param: triggering
            The related changes.

        :param: impacted
            The flagged items.

        :return:
            The :class:`Violation`.

        """

        impacted = tuple(sorted(set(impacted)))
        dedup_key = hashlib.sha256(
            json.dumps(
                [rule_name, sorted(item.identity for item in impacted)],
                separators=(",", ":"),
            ).encode("utf-8")
        ).hexdigest()
        return cls(
            rule_name,
            system_version_label,
            tuple(sorted(set(triggering))),
            impacted,
            dedup_key,
        )

    @property
    def sort_key(self) -> tuple[str, tuple[str, ...]]:
        return (self.rule_name, tuple(item.identity for item in self.impacted))

    def to_document(self) -> dict[str, Any]:
        return {
            "dedupKey": self.dedup_key,
            "impacted": [item.to_document() for item in self.impacted],
            "ruleName": self.rule_name,
            "systemVersionLabel": self.system_version_label,
            "triggering": [
                {"changeKind": kind.value, "componentId": id.key}
                for id, kind in self.triggering
            ],
        }


def violations_document(violations: Iterable[Violation]) -> list[dict[str, Any]]:
    """Return the machine-readable report of violations."""

    return [violation.to_document() for violation in violations]


def violations_text(violations: Iterable[Violation]) -> str:
    """
    Render a human-readable report of violations.

    :param: violations
        The violations, in report order.

    :return:
        One block per violation, or a single line when there are none.

    """

    lines: list[str] = []
    for violation in violations:
        lines.append(f"[{violation.rule_name}] {violation.system_version_label}")
        for item in violation.impacted:
            lines.append(f"  {item.kind}: {item.identity}")
            lines.extend(f"    {key}: {value}" for key, value in item.evidence)
        for id, kind in violation.triggering:
            lines.append(f"  triggered by {kind.value} {id.key}")

    if not lines:
        return "No violations found.\n"
    return "\n".join(lines) + "\n"
