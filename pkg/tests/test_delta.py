#!/usr/bin/python3.10
########################################################################################
# test_delta.py - Tests for computing and composing deltas.                            #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

import random

import pytest

from microsar.__utils__ import ServiceNameMismatchError, VersionChainError
from microsar.delta import compose_deltas, compute_delta, empty_delta
from microsar.ir_model import (
    ChangeKind,
    Component,
    ComponentType,
    Method,
    MicroserviceIR,
    component_id,
)
from microsar.merge import apply_to_service

# Component pool:
#   The ids random versions draw their components from.
COMPONENT_POOL = tuple(
    component_id("svc", component_type, f"svc.Unit{index}")
    for index, component_type in enumerate(
        (ComponentType.SERVICE, ComponentType.REPOSITORY) * 4
    )
)

# Random cases:
#   The number of generated version chains.
RANDOM_CASES: int = 1000


def _component(id, variant: int) -> Component:
    return Component.build(
        id, methods=[Method("handle", content_hash=f"body-{variant}")]
    )


def _random_version(generator: random.Random, version_id: str) -> MicroserviceIR:
    components = {
        id: _component(id, generator.randint(0, 2))
        for id in COMPONENT_POOL
        if generator.random() < 0.6
    }
    return MicroserviceIR("svc", version_id, components)


def _random_chain(generator: random.Random, length: int) -> list[MicroserviceIR]:
    return [_random_version(generator, f"v{index}") for index in range(length)]


def test_apply_inverts_compute():
    generator = random.Random(3)
    for _ in range(RANDOM_CASES):
        old, new = _random_chain(generator, 2)

        assert apply_to_service(old, compute_delta(old, new)) == new


def test_compose_is_associative():
    generator = random.Random(5)
    for _ in range(RANDOM_CASES):
        v0, v1, v2, v3 = _random_chain(generator, 4)
        d01, d12, d23 = (
            compute_delta(v0, v1),
            compute_delta(v1, v2),
            compute_delta(v2, v3),
        )

        assert compose_deltas(compose_deltas(d01, d12), d23) == compose_deltas(
            d01, compose_deltas(d12, d23)
        )


def test_compose_commutes_with_apply():
    generator = random.Random(13)
    for _ in range(RANDOM_CASES):
        v0, v1, v2 = _random_chain(generator, 3)
        composed = compose_deltas(compute_delta(v0, v1), compute_delta(v1, v2))

        assert apply_to_service(v0, composed) == v2
        assert composed == compute_delta(v0, v2)


def test_empty_delta_is_identity():
    generator = random.Random(17)
    for _ in range(RANDOM_CASES // 10):
        v0, v1 = _random_chain(generator, 2)
        delta = compute_delta(v0, v1)

        assert apply_to_service(v0, empty_delta(v0, "v0")) == v0
        assert compose_deltas(delta, empty_delta(v1, "v1")) == delta
        assert compose_deltas(empty_delta(v0, "v0"), delta) == delta


def test_equal_versions_give_empty_delta():
    version = _random_version(random.Random(19), "v0")
    later = MicroserviceIR("svc", "v1", dict(version.components))

    delta = compute_delta(version, later)
    assert delta.changes == ()
    assert (delta.old_version_id, delta.new_version_id) == ("v0", "v1")


def test_change_kinds():
    kept, modified, deleted, added = COMPONENT_POOL[:4]
    old = MicroserviceIR(
        "svc",
        "v0",
        {
            kept: _component(kept, 0),
            modified: _component(modified, 0),
            deleted: _component(deleted, 0),
        },
    )
    new = MicroserviceIR(
        "svc",
        "v1",
        {
            kept: _component(kept, 0),
            modified: _component(modified, 1),
            added: _component(added, 0),
        },
    )

    delta = compute_delta(old, new)
    assert {change.component_id: change.kind for change in delta.changes} == {
        modified: ChangeKind.MODIFY,
        deleted: ChangeKind.DELETE,
        added: ChangeKind.ADD,
    }
    assert [change.component_id for change in delta.changes] == sorted(
        change.component_id for change in delta.changes
    )
    assert delta.change_for(modified).old_content_hash == (
        old.components[modified].content_hash
    )


def test_compose_collapses_cancelling_changes():
    id = COMPONENT_POOL[0]
    empty = MicroserviceIR("svc", "v0")
    added = MicroserviceIR("svc", "v1", {id: _component(id, 0)})
    modified = MicroserviceIR("svc", "v2", {id: _component(id, 1)})
    restored = MicroserviceIR("svc", "v3", {id: _component(id, 0)})

    emptied = MicroserviceIR("svc", "v2")
    round_trip = compose_deltas(compute_delta(empty, added), compute_delta(added, emptied))
    assert round_trip.changes == ()

    reverted = compose_deltas(
        compute_delta(added, modified), compute_delta(modified, restored)
    )
    assert reverted.changes == ()

    (change,) = compose_deltas(
        compute_delta(empty, added), compute_delta(added, modified)
    ).changes
    assert change.kind == ChangeKind.ADD
    assert change.new_component == _component(id, 1)


def test_compose_rejects_broken_chains():
    generator = random.Random(23)
    v0, v1, v2 = _random_chain(generator, 3)
    d01 = compute_delta(v0, v1)

    with pytest.raises(VersionChainError):
        compose_deltas(d01, compute_delta(v0, v2))
    with pytest.raises(VersionChainError):
        compose_deltas(d01, empty_delta(MicroserviceIR("other", "v1"), "v2"))

    id = COMPONENT_POOL[0]
    base = MicroserviceIR("svc", "v0", {id: _component(id, 0)})
    first = compute_delta(base, MicroserviceIR("svc", "v1", {id: _component(id, 1)}))
    unrelated = compute_delta(
        MicroserviceIR("svc", "v1", {id: _component(id, 2)}),
        MicroserviceIR("svc", "v2", {id: _component(id, 0)}),
    )
    with pytest.raises(VersionChainError):
        compose_deltas(first, unrelated)

    added = compute_delta(
        MicroserviceIR("svc", "v0"), MicroserviceIR("svc", "v1", {id: _component(id, 0)})
    )
    added_again = compute_delta(
        MicroserviceIR("svc", "v1"), MicroserviceIR("svc", "v2", {id: _component(id, 1)})
    )
    with pytest.raises(VersionChainError):
        compose_deltas(added, added_again)


def test_compute_rejects_different_services():
    with pytest.raises(ServiceNameMismatchError):
        compute_delta(MicroserviceIR("a", "v0"), MicroserviceIR("b", "v1"))
