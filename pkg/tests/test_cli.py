#!/usr/bin/python3.10
########################################################################################
# test_cli.py - Tests for the microsar command line.                                   #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

import json
import os

import pytest

from microsar.__main__ import main
from microsar.__utils__ import PROFILE_ENVIRONMENT_VARIABLE
from microsar.ir_model import deserialize_delta, deserialize_ir, deserialize_microservice

# Golden timeseries:
#   The expected time series of the fixture history.
GOLDEN_TIMESERIES_FILEPATH: str = os.path.join(
    os.path.dirname(__file__), "data", "timeseries.csv"
)

# Services:
#   The service names of the fixture system.
SERVICES: tuple[str, ...] = ("ts-order", "ts-price", "ts-station")


@pytest.fixture(autouse=True)
def fixture_workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(PROFILE_ENVIRONMENT_VARIABLE, raising=False)


@pytest.fixture(name="system_file")
def fixture_system_file(history):
    """Extract and link the first fixture version, returning the system IR file."""

    for service in SERVICES:
        assert (
            main(
                [
                    "extract",
                    os.path.join(history[0], service),
                    "--version",
                    "v0",
                    "--out",
                    os.path.join("ir", f"{service}.json"),
                ]
            )
            == 0
        )
    assert (
        main(
            [
                "link",
                *(os.path.join("ir", f"{service}.json") for service in SERVICES),
                "--out",
                "system.json",
            ]
        )
        == 0
    )
    return "system.json"


@pytest.fixture(name="delta_file")
def fixture_delta_file(history):
    """Compute the station delta from the first to the second fixture version."""

    assert (
        main(
            [
                "delta",
                os.path.join(history[0], "ts-station"),
                os.path.join(history[1], "ts-station"),
                "--old-version",
                "v0",
                "--new-version",
                "v1",
                "--out",
                "delta.json",
            ]
        )
        == 0
    )
    return "delta.json"


def test_extract(history, capsys):
    exit_code = main(
        [
            "extract",
            os.path.join(history[0], "ts-price"),
            "--version",
            "v0",
            "--out",
            "price.json",
        ]
    )

    assert exit_code == 0
    with open("price.json", "rb") as ir_file:
        service = deserialize_microservice(ir_file.read())
    assert (service.name, service.version_id) == ("ts-price", "v0")
    assert "Extracted 4 components from 'ts-price'" in capsys.readouterr().out


def test_extract_to_stdout(history, capsys):
    assert main(["extract", os.path.join(history[0], "ts-station")]) == 0

    document = json.loads(capsys.readouterr().out)["service"]
    assert (document["name"], document["versionId"]) == ("ts-station", "working")


def test_link(capsys, system_file):
    with open(system_file, "rb") as ir_file:
        system = deserialize_ir(ir_file.read())

    assert system.version_label == "ts-order@v0,ts-price@v0,ts-station@v0"
    assert "2 remote-call edges, 1 data-overlap edges" in capsys.readouterr().out


def test_delta_of_source_trees(capsys, delta_file):
    with open(delta_file, "rb") as delta_document:
        delta = deserialize_delta(delta_document.read())

    assert delta.microservice == "ts-station"
    assert len(delta.changes) == 1
    assert "1 changes to 'ts-station' from 'v0' to 'v1'." in capsys.readouterr().out


def test_merge(system_file, delta_file):
    assert main(["merge", system_file, delta_file, "--out", "increment.json"]) == 0

    with open("increment.json", "rb") as ir_file:
        increment = deserialize_ir(ir_file.read())
    assert increment.version_label == "ts-order@v0,ts-price@v0,ts-station@v1"


def test_analyze(system_file, delta_file, capsys):
    assert main(["analyze", system_file, delta_file, "--out", "report.json"]) == 0
    output = capsys.readouterr().out
    assert "[SMM] " in output
    assert output.endswith("Affected services: ts-order, ts-price\n")

    with open("report.json", "r", encoding="utf-8") as report_file:
        report = json.load(report_file)
    assert sorted(entry["ruleName"] for entry in report["violations"]) == [
        "SMM",
        "UEM",
        "UEM",
    ]

    assert main(["analyze", system_file, delta_file, "--fail-on-violation"]) == 1


def test_impact(system_file, delta_file, capsys):
    exit_code = main(
        [
            "impact",
            system_file,
            delta_file,
            "--max-cross-hops",
            "1",
            "--graph-export",
            "graph.json",
        ]
    )

    assert exit_code == 0
    assert capsys.readouterr().out.endswith("Affected services: ts-price\n")
    with open("graph.json", "r", encoding="utf-8") as graph_file:
        tags = {node["tag"] for node in json.load(graph_file)["nodes"]}
    assert tags == {"direct", "indirect", "context"}


def test_replay(history, tmp_path, capsys):
    config = tmp_path / "replay.yaml"
    config.write_text(
        "versions:\n" + "".join(f"  - {directory}\n" for directory in history),
        encoding="utf-8",
    )

    assert main(["replay", str(config), "--out", "out"]) == 0
    assert "#Commits" in capsys.readouterr().out

    with open(os.path.join("out", "timeseries.csv"), "rb") as timeseries_file:
        with open(GOLDEN_TIMESERIES_FILEPATH, "rb") as golden_file:
            assert timeseries_file.read() == golden_file.read()

    assert main(["replay", str(config), "--out", "out", "--fail-on-violation"]) == 1


@pytest.mark.parametrize(
    "args",
    [
        [],
        ["unknown"],
        ["link"],
        ["impact", "system.json", "delta.json", "--max-hops", "many"],
    ],
)
def test_usage_errors(args):
    assert main(args) == 2


def test_input_errors(tmp_path, capsys):
    assert main(["link", "missing.json"]) == 2

    (tmp_path / "broken.json").write_text("{not json", encoding="utf-8")
    assert main(["merge", "broken.json", "broken.json"]) == 2
    assert "Error: " in capsys.readouterr().err


def test_link_service_graph(system_file):
    exit_code = main(
        [
            "link",
            *(os.path.join("ir", f"{service}.json") for service in SERVICES),
            "--service-graph",
            "services.json",
        ]
    )

    assert exit_code == 0
    with open("services.json", "r", encoding="utf-8") as graph_file:
        document = json.load(graph_file)
    assert sorted(node["id"] for node in document["nodes"]) == list(SERVICES)
    assert sorted(
        (link["source"], link["target"], link["remoteCalls"], link["dataOverlaps"])
        for link in document["links"]
    ) == [("ts-order", "ts-price", 1, 1), ("ts-price", "ts-station", 1, 0)]


@pytest.mark.parametrize(
    "settings", ["workers: [\n", "workers: many\n", "overlap_threshold: {}\n"]
)
def test_malformed_global_settings(history, tmp_path, capsys, settings):
    (tmp_path / "global_settings.yaml").write_text(settings, encoding="utf-8")

    assert main(["extract", os.path.join(history[0], "ts-price")]) == 2
    assert "Error: " in capsys.readouterr().err
