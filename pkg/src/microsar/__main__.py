#!/usr/bin/python3.10
########################################################################################
# __main__.py - The main module for the microsar command-line tool.                    #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
The `microsar` command line.

Exit codes: 0 when clean, 1 when violations are found and `--fail-on-violation` is
set, 2 on input or usage errors and 3 on internal errors.

"""

import argparse
import json
import os
import sys

from logging import Logger
from typing import Any, Callable

from .__utils__ import (
    get_logger,
    GlobalSettings,
    InputError,
    PROFILE_ENVIRONMENT_VARIABLE,
    read_global_settings,
)
from .delta import compute_delta
from .extraction import load_profile, load_service_map, MarkerProfile, scan_repository
from .history import (
    emit_summary,
    load_replay_config,
    replay,
    summary_text,
    write_artifacts,
)
from .impact import export_graph, impact_set, impact_text
from .ir_model import (
    deserialize_delta,
    deserialize_ir,
    deserialize_microservice,
    MicroserviceIR,
    serialize_delta,
    serialize_ir,
    serialize_microservice,
)
from .linker import build_system_ir, export_service_graph, link_report
from .merge import apply_delta
from .rules import (
    default_rules,
    evaluate,
    load_rule_files,
    Rule,
    violations_document,
    violations_text,
)

__all__ = ("main",)

# Exit clean:
#   Exit code of a run without findings.
EXIT_CLEAN: int = 0

# Exit input error:
#   Exit code of a run stopped by invalid input or usage.
EXIT_INPUT_ERROR: int = 2

# Exit internal error:
#   Exit code of a run stopped by an internal error.
EXIT_INTERNAL_ERROR: int = 3

# Exit violations:
#   Exit code of a run finding violations with `--fail-on-violation` set.
EXIT_VIOLATIONS: int = 1

# Working version:
#   The version id of a source tree when none is given.
WORKING_VERSION: str = "working"


def _read_bytes(filepath: str) -> bytes:
    with open(filepath, "rb") as input_file:
        return input_file.read()


def _output(data: bytes, filepath: str | None, logger: Logger) -> None:
    """Write a document to a file, or to stdout when no file is given."""

    if filepath is None:
        sys.stdout.write(data.decode("utf-8"))
        return

    directory = os.path.dirname(filepath)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(filepath, "wb") as output_file:
        output_file.write(data)
    logger.info("Output written to '%s'.", filepath)


def _json_bytes(document: Any) -> bytes:
    return (json.dumps(document, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _profile(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> MarkerProfile:
    """Load the profile given on the command line, the environment or the settings."""

    return load_profile(
        parsed_args.profile
        or os.environ.get(PROFILE_ENVIRONMENT_VARIABLE)
        or global_settings.profile,
        logger,
    )


def _overlap_threshold(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings
) -> float:
    if parsed_args.overlap_threshold is not None:
        return parsed_args.overlap_threshold
    return global_settings.overlap_threshold


def _rules(
    rule_files: list[str] | None, global_settings: GlobalSettings, logger: Logger
) -> list[Rule]:
    if rule_files:
        return load_rule_files(rule_files, logger, global_settings.rule_max_hops)
    return default_rules(logger, global_settings.rule_max_hops)


def _scan(
    tree: str,
    parsed_args: argparse.Namespace,
    version_id: str,
    global_settings: GlobalSettings,
    logger: Logger,
) -> MicroserviceIR:
    return scan_repository(
        tree,
        _profile(parsed_args, global_settings, logger),
        parsed_args.service or os.path.basename(os.path.abspath(tree)),
        version_id,
        logger,
        service_map=load_service_map(parsed_args.service_map, logger),
        workers=global_settings.workers,
    )


def _extract(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> int:
    service = _scan(
        parsed_args.tree,
        parsed_args,
        parsed_args.version or WORKING_VERSION,
        global_settings,
        logger,
    )
    _output(serialize_microservice(service), parsed_args.out, logger)
    if parsed_args.out is not None:
        print(
            f"Extracted {len(service.components)} components from '{service.name}' "
            f"with {len(service.warnings)} warnings."
        )
    return EXIT_CLEAN


def _link(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> int:
    system = build_system_ir(
        [deserialize_microservice(_read_bytes(filepath)) for filepath in parsed_args.ir],
        _overlap_threshold(parsed_args, global_settings),
    )
    _output(serialize_ir(system), parsed_args.out, logger)
    if parsed_args.service_graph is not None:
        _output(
            _json_bytes(export_service_graph(system)), parsed_args.service_graph, logger
        )
    if parsed_args.out is not None:
        report = link_report(system)
        print(
            f"Linked {len(system.services)} services: "
            f"{report.remote_call_edges} remote-call edges, "
            f"{report.data_overlap_edges} data-overlap edges, "
            f"{len(report.unmatched_calls)} unmatched calls, "
            f"{len(report.uncalled_endpoints)} uncalled endpoints."
        )
    return EXIT_CLEAN


def _delta(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> int:
    if os.path.isdir(parsed_args.old) and os.path.isdir(parsed_args.new):
        old_ir = _scan(
            parsed_args.old,
            parsed_args,
            parsed_args.old_version or os.path.basename(os.path.abspath(parsed_args.old)),
            global_settings,
            logger,
        )
        new_ir = _scan(
            parsed_args.new,
            parsed_args,
            parsed_args.new_version or os.path.basename(os.path.abspath(parsed_args.new)),
            global_settings,
            logger,
        )
    else:
        old_ir = deserialize_microservice(_read_bytes(parsed_args.old))
        new_ir = deserialize_microservice(_read_bytes(parsed_args.new))

    delta = compute_delta(old_ir, new_ir)
    _output(serialize_delta(delta), parsed_args.out, logger)
    if parsed_args.out is not None:
        print(
            f"{len(delta.changes)} changes to '{delta.microservice}' from "
            f"'{delta.old_version_id}' to '{delta.new_version_id}'."
        )
    return EXIT_CLEAN


def _merge(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> int:
    increment = apply_delta(
        deserialize_ir(_read_bytes(parsed_args.baseline)),
        deserialize_delta(_read_bytes(parsed_args.delta)),
        _overlap_threshold(parsed_args, global_settings),
    )
    _output(serialize_ir(increment), parsed_args.out, logger)
    if parsed_args.out is not None:
        print(f"Increment {increment.version_label} written.")
    return EXIT_CLEAN


def _analyze(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> int:
    baseline = deserialize_ir(_read_bytes(parsed_args.baseline))
    delta = deserialize_delta(_read_bytes(parsed_args.delta))
    overlap_threshold = _overlap_threshold(parsed_args, global_settings)
    increment = apply_delta(baseline, delta, overlap_threshold)
    violations = evaluate(
        baseline, delta, increment, _rules(parsed_args.rules, global_settings, logger)
    )
    report = impact_set(
        baseline,
        delta,
        max_cross_hops=global_settings.max_cross_hops,
        increment=increment,
    )

    if parsed_args.out is not None:
        _output(
            _json_bytes(
                {
                    "impact": report.to_document(),
                    "violations": violations_document(violations),
                }
            ),
            parsed_args.out,
            logger,
        )
    print(violations_text(violations), end="")
    print(impact_text(report), end="")

    if violations and parsed_args.fail_on_violation:
        return EXIT_VIOLATIONS
    return EXIT_CLEAN


def _impact(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> int:
    baseline = deserialize_ir(_read_bytes(parsed_args.baseline))
    delta = deserialize_delta(_read_bytes(parsed_args.delta))
    increment = apply_delta(
        baseline, delta, _overlap_threshold(parsed_args, global_settings)
    )
    report = impact_set(
        baseline,
        delta,
        parsed_args.max_hops,
        not parsed_args.exclude_data_overlap,
        max_cross_hops=(
            parsed_args.max_cross_hops
            if parsed_args.max_cross_hops is not None
            else global_settings.max_cross_hops
        ),
        include_entity_usage=parsed_args.entity_usage,
        increment=increment,
    )

    if parsed_args.out is not None:
        _output(_json_bytes(report.to_document()), parsed_args.out, logger)
    if parsed_args.graph_export is not None:
        _output(
            _json_bytes(export_graph(report, increment)),
            parsed_args.graph_export,
            logger,
        )
    print(impact_text(report), end="")
    return EXIT_CLEAN


def _replay(
    parsed_args: argparse.Namespace, global_settings: GlobalSettings, logger: Logger
) -> int:
    config = load_replay_config(parsed_args.config, logger)
    profile = load_profile(
        parsed_args.profile
        or config.profile
        or os.environ.get(PROFILE_ENVIRONMENT_VARIABLE)
        or global_settings.profile,
        logger,
    )
    rules = _rules(
        parsed_args.rules or list(config.rule_files), global_settings, logger
    )
    service_map = load_service_map(parsed_args.service_map or config.service_map, logger)
    overlap_threshold = (
        parsed_args.overlap_threshold
        if parsed_args.overlap_threshold is not None
        else (
            config.overlap_threshold
            if config.overlap_threshold is not None
            else global_settings.overlap_threshold
        )
    )

    record = replay(
        config.source,
        profile,
        rules,
        logger,
        service_map=service_map,
        overlap_threshold=overlap_threshold,
        checkpoint_interval=(
            config.checkpoint_interval or global_settings.checkpoint_interval
        ),
        verify_every_step=config.verify_every_step or parsed_args.verify_every_step,
        workers=global_settings.workers,
        show_progress=parsed_args.verbose,
    )
    write_artifacts(record, parsed_args.out, logger)

    summary = emit_summary(record)
    print(summary_text(summary), end="")
    for notice in record.skipped:
        print(f"Skipped version '{notice.version_id}': {notice.reason}")

    if parsed_args.fail_on_violation and any(summary["totals"].values()):
        return EXIT_VIOLATIONS
    return EXIT_CLEAN


def _parser() -> argparse.ArgumentParser:
    """Build the argument parser."""

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--verbose", "-v", action="store_true", help="Log all messages to the console."
    )

    extraction = argparse.ArgumentParser(add_help=False)
    extraction.add_argument(
        "--profile",
        default=None,
        help=f"The marker profile, defaulting to ${PROFILE_ENVIRONMENT_VARIABLE} or "
        "the bundled Spring profile.",
    )
    extraction.add_argument(
        "--service-map",
        default=None,
        help="A YAML map from directory or host name to service name.",
    )

    threshold = argparse.ArgumentParser(add_help=False)
    threshold.add_argument(
        "--overlap-threshold",
        default=None,
        type=float,
        help="The entity similarity at or above which data-overlap edges are created.",
    )

    rules = argparse.ArgumentParser(add_help=False)
    rules.add_argument(
        "--rules",
        action="append",
        default=None,
        help="A rule file; may be repeated. The built-in rules are used when omitted.",
    )
    rules.add_argument(
        "--fail-on-violation",
        action="store_true",
        help="Exit with code 1 when violations are found.",
    )

    parser = argparse.ArgumentParser(
        prog="microsar",
        description="Incremental architecture reconstruction of microservice systems.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    extract_parser = subparsers.add_parser(
        "extract",
        help="Extract the IR of one microservice source tree.",
        parents=[common, extraction],
    )
    extract_parser.add_argument("tree", help="The microservice source tree.")
    extract_parser.add_argument("--service", default=None, help="The service name.")
    extract_parser.add_argument("--version", default=None, help="The version id.")
    extract_parser.add_argument("--out", default=None, help="The output file.")
    extract_parser.set_defaults(handler=_extract)

    link_parser = subparsers.add_parser(
        "link",
        help="Link microservice IRs into a system IR.",
        parents=[common, threshold],
    )
    link_parser.add_argument("ir", nargs="+", help="The microservice IR documents.")
    link_parser.add_argument("--out", default=None, help="The output file.")
    link_parser.add_argument(
        "--service-graph",
        default=None,
        help="A node-link output file for the service dependency graph.",
    )
    link_parser.set_defaults(handler=_link)

    delta_parser = subparsers.add_parser(
        "delta",
        help="Compute the delta between two microservice IRs or source trees.",
        parents=[common, extraction],
    )
    delta_parser.add_argument("old", help="The earlier IR document or source tree.")
    delta_parser.add_argument("new", help="The later IR document or source tree.")
    delta_parser.add_argument("--service", default=None, help="The service name.")
    delta_parser.add_argument("--old-version", default=None, help="The earlier version.")
    delta_parser.add_argument("--new-version", default=None, help="The later version.")
    delta_parser.add_argument("--out", default=None, help="The output file.")
    delta_parser.set_defaults(handler=_delta)

    merge_parser = subparsers.add_parser(
        "merge",
        help="Apply a delta to a system IR.",
        parents=[common, threshold],
    )
    merge_parser.add_argument("baseline", help="The baseline system IR document.")
    merge_parser.add_argument("delta", help="The delta document.")
    merge_parser.add_argument("--out", default=None, help="The output file.")
    merge_parser.set_defaults(handler=_merge)

    analyze_parser = subparsers.add_parser(
        "analyze",
        help="Evaluate the rules and the impact of a delta.",
        parents=[common, threshold, rules],
    )
    analyze_parser.add_argument("baseline", help="The baseline system IR document.")
    analyze_parser.add_argument("delta", help="The delta document.")
    analyze_parser.add_argument("--out", default=None, help="The report file.")
    analyze_parser.set_defaults(handler=_analyze)

    impact_parser = subparsers.add_parser(
        "impact",
        help="Compute the impact of a delta.",
        parents=[common, threshold],
    )
    impact_parser.add_argument("baseline", help="The baseline system IR document.")
    impact_parser.add_argument("delta", help="The delta document.")
    impact_parser.add_argument(
        "--max-hops", default=None, type=int, help="The maximum impact path length."
    )
    impact_parser.add_argument(
        "--max-cross-hops",
        default=None,
        type=int,
        help="The maximum number of cross-service steps on an impact path.",
    )
    impact_parser.add_argument(
        "--exclude-data-overlap",
        action="store_true",
        help="Do not propagate impact along data-overlap edges.",
    )
    impact_parser.add_argument(
        "--entity-usage",
        action="store_true",
        help="Propagate impact from entities to the components referencing them.",
    )
    impact_parser.add_argument(
        "--graph-export", default=None, help="A node-link graph output file."
    )
    impact_parser.add_argument("--out", default=None, help="The report file.")
    impact_parser.set_defaults(handler=_impact)

    replay_parser = subparsers.add_parser(
        "replay",
        help="Replay a version history.",
        parents=[common, extraction, threshold, rules],
    )
    replay_parser.add_argument("config", help="The replay config file.")
    replay_parser.add_argument(
        "--verify-every-step",
        action="store_true",
        help="Compare every increment with a full extraction.",
    )
    replay_parser.add_argument(
        "--out", default="microsar_output", help="The artifact directory."
    )
    replay_parser.set_defaults(handler=_replay)

    return parser


def main(args: list[str] | None = None) -> int:
    """
    The main entry point of the command line.

    :param: args
        The command-line arguments, defaulting to `sys.argv`.

    :return:
        The exit code.

    """

    parser = _parser()
    try:
        parsed_args = parser.parse_args(args)
    except SystemExit as error:
        return EXIT_CLEAN if error.code == 0 else EXIT_INPUT_ERROR

    logger = get_logger(f"microsar_{parsed_args.command}", parsed_args.verbose)
    handler: Callable[[argparse.Namespace, GlobalSettings, Logger], int] = (
        parsed_args.handler
    )

    try:
        global_settings = read_global_settings(logger)
        return handler(parsed_args, global_settings, logger)
    except (FileNotFoundError, InputError, IsADirectoryError, PermissionError) as error:
        logger.error("%s", str(error))
        print(f"Error: {error}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception:
        logger.exception("Internal error while running '%s'.", parsed_args.command)
        print("Internal error, see the log file for details.", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
