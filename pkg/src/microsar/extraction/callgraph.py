#!/usr/bin/python3.10
########################################################################################
# callgraph.py - Intra-service call-graph resolution.                                  #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 15/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Resolves the body call targets of components into component call-graph edges.

"""

from collections import defaultdict
from typing import Iterable, Mapping

from ..ir_model import Component, ComponentId, ComponentType
from .java_parser import simple_type

__all__ = (
    "build_call_graph",
    "parse_call_target",
    "type_names",
)


def parse_call_target(target: str) -> tuple[str, str, int]:
    """
    Split a body call target into its parts.

    :param: target
        A call target of the form `<hint>.<method>/<arity>`.

    :return:
        The (receiver type hint, method name, arity) triple.

    """

    signature, _, arity = target.rpartition("/")
    hint, _, name = signature.rpartition(".")
    return hint, name, int(arity)


def type_names(component: Component) -> frozenset[str]:
    """Return the simple names under which a component can be referenced."""

    return frozenset(
        {component.id.simple_name}
        | {simple_type(supertype) for supertype in component.supertypes}
    )


def build_call_graph(
    components: Mapping[ComponentId, Component] | Iterable[Component],
) -> frozenset[tuple[ComponentId, ComponentId]]:
    """
    Resolve call targets into intra-service call-graph edges.

    A target resolves to the components declaring a method of the same name and
    arity. A receiver type hint further restricts them to the components referenced by
    that type, either by their own name or through a supertype. A hinted repository
    with supertypes also matches methods it does not declare, since it inherits them
    from outside the service. Entities are data holders and never callees.

    :param: components
        The components of one microservice.

    :return:
        The set of (caller, callee) edges; self-edges are dropped.

    """

    if isinstance(components, Mapping):
        components = components.values()
    components = sorted(components, key=lambda component: component.id)

    declared: dict[tuple[str, int], set[ComponentId]] = defaultdict(set)
    by_type_name: dict[str, set[ComponentId]] = defaultdict(set)
    inheriting: set[ComponentId] = set()
    for component in components:
        if component.id.component_type == ComponentType.ENTITY:
            continue
        for method in component.methods:
            declared[(method.name, method.arity)].add(component.id)
        for name in type_names(component):
            by_type_name[name].add(component.id)
        if component.id.component_type == ComponentType.REPOSITORY and component.supertypes:
            inheriting.add(component.id)

    edges: set[tuple[ComponentId, ComponentId]] = set()
    for component in components:
        for method in component.methods:
            for target in method.body_call_targets:
                hint, name, arity = parse_call_target(target)
                callees = declared.get((name, arity), set())
                if hint:
                    callees = {
                        callee
                        for callee in by_type_name.get(hint, set())
                        if callee in callees or callee in inheriting
                    }
                edges.update(
                    (component.id, callee) for callee in callees if callee != component.id
                )

    return frozenset(edges)
