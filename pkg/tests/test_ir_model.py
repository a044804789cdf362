#!/usr/bin/python3.10
########################################################################################
# test_ir_model.py - Tests for the IR data model and its document formats.             #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

import json

import pytest

from microsar.__utils__ import EmptyInputError, MalformedDocumentError
from microsar.ir_model import (
    Change,
    ChangeKind,
    Component,
    ComponentType,
    Delta,
    DependencyEdge,
    EdgeKind,
    Endpoint,
    HttpMethod,
    Method,
    MicroserviceIR,
    body_hash,
    component_id,
    deserialize_delta,
    deserialize_ir,
    deserialize_microservice,
    hash_component,
    normalize_body,
    normalize_path,
    render_version_label,
    serialize_delta,
    serialize_ir,
    serialize_microservice,
)

SERVICE_ID = component_id("ts-order", ComponentType.SERVICE, "ts.order.OrderServiceImpl")
CONTROLLER_ID = component_id(
    "ts-order", ComponentType.CONTROLLER, "ts.order.OrderController"
)


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("api/v1/order/{id}", "/api/v1/order/{*}"),
        ("/api//v1/order/", "/api/v1/order"),
        ("/", "/"),
        ("", "/"),
        ("/orders?page=1", "/orders"),
        ("/orders/{id:[0-9]+}/items/{item}", "/orders/{*}/items/{*}"),
    ],
)
def test_normalize_path(raw, expected):
    assert normalize_path(raw) == expected


def test_normalize_body_drops_comments_and_whitespace():
    assert normalize_body("{ a(); // first\n b(); }") == "{ a(); b(); }"
    assert normalize_body("{ a();   /* block\n comment */ b(); }") == "{ a(); b(); }"
    assert body_hash("{ a(); // x\n b(); }") == body_hash("{ a();\n\n\tb(); }")


def test_normalize_body_keeps_literals():
    assert normalize_body('{ url = "http://ts-price/api"; }') == (
        '{ url = "http://ts-price/api"; }'
    )
    assert body_hash('{ s = "a  b"; }') != body_hash('{ s = "a b"; }')


def test_component_hash_ignores_member_order():
    first = Method("a", content_hash=body_hash("{ x(); }"))
    second = Method("b", parameters=(("id", "String"),))

    assert (
        Component.build(SERVICE_ID, methods=[first, second]).content_hash
        == Component.build(SERVICE_ID, methods=[second, first]).content_hash
    )


def test_component_hash_tracks_content():
    original = Component.build(SERVICE_ID, methods=[Method("a")])

    changed_body = Component.build(
        SERVICE_ID, methods=[Method("a", content_hash=body_hash("{ y(); }"))]
    )
    changed_type = Component.build(
        SERVICE_ID, methods=[Method("a", return_type="Order")]
    )
    changed_field = Component.build(
        SERVICE_ID, methods=[Method("a")], fields=[("cache", "Map")]
    )

    hashes = {
        original.content_hash,
        changed_body.content_hash,
        changed_type.content_hash,
        changed_field.content_hash,
    }
    assert len(hashes) == 4
    assert original.content_hash == hash_component(original)


def test_component_rejects_misplaced_members():
    endpoint = Endpoint(HttpMethod.GET, "/orders", "list", SERVICE_ID)

    with pytest.raises(ValueError):
        Component.build(SERVICE_ID, endpoints=[endpoint])
    with pytest.raises(ValueError):
        Component.build(
            component_id("ts-order", ComponentType.ENTITY, "ts.order.Order")
        )


def test_component_id_requires_names():
    with pytest.raises(EmptyInputError):
        component_id("", ComponentType.SERVICE, "ts.order.OrderServiceImpl")
    with pytest.raises(EmptyInputError):
        component_id("ts-order", ComponentType.SERVICE, "")

    assert SERVICE_ID.simple_name == "OrderServiceImpl"
    assert SERVICE_ID.key == "ts-order:Service:ts.order.OrderServiceImpl"


def test_dependency_edges_cross_services():
    with pytest.raises(ValueError):
        DependencyEdge(EdgeKind.DATA_OVERLAP, SERVICE_ID, CONTROLLER_ID, similarity=1.0)


def test_change_kind_labels():
    assert ChangeKind.from_label("REMOVE") == ChangeKind.DELETE
    assert ChangeKind.from_label("modify") == ChangeKind.MODIFY
    with pytest.raises(ValueError):
        ChangeKind.from_label("RENAME")


def test_delta_rejects_repeated_components():
    component = Component.build(SERVICE_ID)
    change = Change(ChangeKind.ADD, SERVICE_ID, new_component=component)

    with pytest.raises(ValueError):
        Delta("ts-order", "v0", "v1", (change, change))
    with pytest.raises(ValueError):
        Delta("ts-price", "v0", "v1", (change,))
    with pytest.raises(ValueError):
        Change(ChangeKind.DELETE, SERVICE_ID, new_component=component, old_content_hash="")


def test_render_version_label():
    services = {
        name: MicroserviceIR(name, version) for name, version in (("b", "2"), ("a", "1"))
    }

    assert render_version_label(services) == "a@1,b@2"


def test_system_document_reproduces_the_system(baseline):
    document = serialize_ir(baseline)
    restored = deserialize_ir(document)

    assert restored == baseline
    assert serialize_ir(restored) == document
    assert json.loads(document)["schema"] == "microsar.ir/1"


def test_service_document_reproduces_the_service(baseline):
    service = baseline.services["ts-price"]

    assert deserialize_microservice(serialize_microservice(service)) == service


def test_delta_document_accepts_remove_alias():
    component = Component.build(SERVICE_ID)
    delta = Delta(
        "ts-order",
        "v0",
        "v1",
        (Change(ChangeKind.DELETE, SERVICE_ID, old_content_hash=component.content_hash),),
    )
    document = json.loads(serialize_delta(delta))
    document["changes"][0]["changeKind"] = "REMOVE"

    assert deserialize_delta(json.dumps(document)) == delta


def test_malformed_documents(baseline):
    with pytest.raises(MalformedDocumentError):
        deserialize_ir(b"{not json")

    with pytest.raises(MalformedDocumentError) as error:
        deserialize_ir(json.dumps({"schema": "microsar.delta/1"}))
    assert error.value.location == "$.schema"

    with pytest.raises(MalformedDocumentError) as error:
        deserialize_ir(json.dumps({"schema": "microsar.ir/1", "crossEdges": []}))
    assert error.value.location == "$.services"

    document = json.loads(serialize_ir(baseline))
    del document["services"]["ts-station"]
    with pytest.raises(MalformedDocumentError) as error:
        deserialize_ir(json.dumps(document))
    assert error.value.location.startswith("$.crossEdges")
