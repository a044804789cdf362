#!/usr/bin/python3.10
########################################################################################
# test_impact.py - Tests for delta impact analysis.                                    #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

import pytest

from microsar.delta import compute_delta, empty_delta
from microsar.impact import (
    CALL_GRAPH,
    ENTITY_USAGE,
    ImpactReport,
    export_graph,
    impact_set,
    impact_text,
)
from microsar.ir_model import (
    Change,
    ChangeKind,
    Component,
    Delta,
    EdgeKind,
    Entity,
)


@pytest.fixture(name="station_delta")
def fixture_station_delta(history, extract, baseline):
    increment = extract(history[1])
    return compute_delta(
        baseline.services["ts-station"], increment.services["ts-station"]
    )


def _names(ids) -> set[str]:
    return {id.qualified_name for id in ids}


def _entity_delta(baseline, service_name: str, added_field: str) -> Delta:
    (old,) = [
        component
        for component in baseline.services[service_name].components.values()
        if component.entity is not None
    ]
    entity = Entity(
        old.entity.name,
        tuple(sorted(old.entity.fields + ((added_field, "String"),))),
        old.entity.annotations,
    )
    new = Component.build(
        old.id,
        entity=entity,
        supertypes=old.supertypes,
        fields=old.fields + ((added_field, "String"),),
    )
    return Delta(
        service_name,
        "v0",
        "v1",
        (
            Change(
                ChangeKind.MODIFY,
                old.id,
                new_component=new,
                old_content_hash=old.content_hash,
            ),
        ),
    )


def test_empty_delta_has_no_impact(baseline):
    report = impact_set(baseline, empty_delta(baseline.services["ts-order"], "v1"))

    assert report == ImpactReport()


def test_impact_crosses_services(baseline, station_delta):
    report = impact_set(baseline, station_delta)

    assert _names(report.direct) == {"ts.station.service.StationServiceImpl"}
    assert _names(report.indirect) == {
        "ts.station.controller.StationController",
        "ts.price.service.PriceServiceImpl",
        "ts.price.controller.PriceController",
        "ts.order.service.OrderServiceImpl",
        "ts.order.controller.OrderController",
    }
    assert report.affected_services == frozenset({"ts-price", "ts-order"})

    (controller,) = [
        id for id in report.indirect if id.qualified_name.endswith("StationController")
    ]
    (step,) = report.indirect[controller]
    assert step.kind == CALL_GRAPH
    assert not step.crosses_services


def test_zero_hops_gives_direct_impact_only(baseline, station_delta):
    report = impact_set(baseline, station_delta, max_hops=0)

    assert report.direct == station_delta.changed_ids
    assert report.indirect == {}
    assert report.affected_services == frozenset()


def test_impact_grows_with_hops(baseline, station_delta):
    previous: set = set()
    for max_hops in range(7):
        report = impact_set(baseline, station_delta, max_hops=max_hops)
        assert previous <= set(report.indirect)
        assert all(len(path) <= max_hops for path in report.indirect.values())
        previous = set(report.indirect)

    assert previous == set(impact_set(baseline, station_delta).indirect)


def test_impact_paths_are_connected(baseline, station_delta):
    report = impact_set(baseline, station_delta)

    for target, path in report.indirect.items():
        assert path[0].source in report.direct
        assert path[-1].target == target
        assert all(
            first.target == second.source for first, second in zip(path, path[1:])
        )
        assert sum(step.crosses_services for step in path) <= 2


def test_cross_hops_bound(baseline, station_delta):
    report = impact_set(baseline, station_delta, max_cross_hops=1)

    assert report.affected_services == frozenset({"ts-price"})
    assert "ts.order.service.OrderServiceImpl" not in _names(report.indirect)

    local = impact_set(baseline, station_delta, max_cross_hops=0)
    assert _names(local.indirect) == {"ts.station.controller.StationController"}


def test_data_overlap_flag(baseline):
    delta = _entity_delta(baseline, "ts-price", "currency")

    with_overlap = impact_set(baseline, delta)
    assert _names(with_overlap.indirect) == {"ts.order.entity.Order"}
    (path,) = with_overlap.indirect.values()
    assert path[0].kind == EdgeKind.DATA_OVERLAP.value

    assert impact_set(baseline, delta, include_data_overlap=False).indirect == {}


def test_entity_usage_flag(baseline):
    delta = _entity_delta(baseline, "ts-station", "zone")

    assert impact_set(baseline, delta).indirect == {}

    report = impact_set(baseline, delta, include_entity_usage=True)
    assert {
        "ts.station.repository.StationRepository",
        "ts.station.service.StationServiceImpl",
        "ts.station.controller.StationController",
    } <= _names(report.indirect)
    (repository,) = [
        id for id in report.indirect if id.qualified_name.endswith("StationRepository")
    ]
    assert [step.kind for step in report.indirect[repository]] == [ENTITY_USAGE]


def test_impact_reports(baseline, station_delta):
    report = impact_set(baseline, station_delta)

    document = report.to_document()
    assert document["affectedServices"] == ["ts-order", "ts-price"]
    assert len(document["indirect"]) == 5
    assert impact_text(report).endswith("Affected services: ts-order, ts-price\n")


def test_export_graph(baseline, station_delta):
    report = impact_set(baseline, station_delta)
    document = export_graph(report, baseline)

    tags = {node["id"].rsplit(".", 1)[-1]: node["tag"] for node in document["nodes"]}
    assert tags["StationServiceImpl"] == "direct"
    assert tags["OrderController"] == "indirect"
    assert tags["Station"] == "context"
    assert len(document["nodes"]) == sum(1 for _ in baseline.components)
