#!/usr/bin/python3.10
########################################################################################
# history.py - Replaying the version history of a system.                              #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 17/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Replays an ordered version history.

The first version is reconstructed from scratch. Every later version is extracted,
diffed against the previous version of each microservice and merged into the running
system IR, and the rules are evaluated on each step. The time series and summary
artifacts are written from the resulting :class:`EvolutionRecord`.

"""

import json
import os
import subprocess
import tarfile
import tempfile

from contextlib import contextmanager
from dataclasses import dataclass, field
from logging import Logger
from typing import Any, Iterator

import pandas as pd

from tqdm import tqdm

from .__utils__ import (
    DEFAULT_CHECKPOINT_INTERVAL,
    DEFAULT_OVERLAP_THRESHOLD,
    DEFAULT_WORKERS,
    EmptyInputError,
    InputError,
    read_yaml,
    SchemaViolationError,
    VersionControlError,
)
from .delta import compute_delta
from .extraction import (
    discover_services,
    ExtractionCache,
    MarkerProfile,
    scan_repository,
)
from .ir_model import (
    Delta,
    MicroserviceIR,
    serialize_delta,
    serialize_ir,
    SystemIR,
)
from .linker import build_system_ir
from .merge import apply_delta, drop_service
from .rules import evaluate_step, evaluate_system, Rule, Violation, violations_document

__all__ = (
    "emit_summary",
    "emit_timeseries",
    "EvolutionRecord",
    "load_replay_config",
    "replay",
    "ReplayConfig",
    "SkipNotice",
    "summary_text",
    "VersionRecord",
    "VersionSource",
    "write_artifacts",
)

# Checkpoint interval:
#   Keyword for parsing the checkpoint interval of a replay config.
CHECKPOINT_INTERVAL: str = "checkpointInterval"

# Commits:
#   Keyword for the number of replayed versions in the summary document.
COMMITS: str = "commits"

# Overlap threshold:
#   Keyword for parsing the data-overlap threshold of a replay config.
OVERLAP_THRESHOLD: str = "overlapThreshold"

# Profile:
#   Keyword for parsing the marker-profile path of a replay config.
PROFILE: str = "profile"

# Range:
#   Keyword for parsing a git revision range of a replay config.
RANGE: str = "range"

# Repository:
#   Keyword for parsing the git repository of a replay config.
REPOSITORY: str = "repository"

# Revisions:
#   Keyword for parsing an explicit git revision list of a replay config.
REVISIONS: str = "revisions"

# Rules:
#   Keyword for parsing the rule files of a replay config.
RULES: str = "rules"

# Service map:
#   Keyword for parsing the service-name map of a replay config.
SERVICE_MAP: str = "serviceMap"

# Skipped:
#   Keyword for the skip notices in the summary document.
SKIPPED: str = "skipped"

# Timeseries columns:
#   The time-series column of each built-in rule, in column order.
TIMESERIES_COLUMNS: dict[str, str] = {
    "AR1": "IC",
    "AR2": "UEM",
    "AR3": "SMM",
    "AR4": "RMM",
}

# Totals:
#   Keyword for the per-rule unique totals in the summary document.
TOTALS: str = "totals"

# Verify every step:
#   Keyword for parsing whether a replay checks integrity at every step.
VERIFY_EVERY_STEP: str = "verifyEveryStep"

# Versions:
#   Keyword for parsing the version directories of a replay config.
VERSIONS: str = "versions"


@dataclass(frozen=True)
class VersionSource:
    """
    An ordered, oldest-first list of versions of a system.

    .. attribute:: version_ids
        The version ids: directory names or revision hashes.

    .. attribute:: directories
        The checkout directory of each version, when the versions are materialised.

    .. attribute:: repository
        The git working copy the revisions are archived from, in git mode.

    """

    version_ids: tuple[str, ...]
    directories: tuple[str, ...] = ()
    repository: str | None = None

    def __len__(self) -> int:
        return len(self.version_ids)

    @classmethod
    def from_directories(cls, paths: list[str]) -> "VersionSource":
        """
        Use pre-materialised version checkouts.

        :param: paths
            The version directories, oldest first; their names are the version ids.

        :return:
            The :class:`VersionSource`.

        """

        if not paths:
            raise EmptyInputError("A version history needs at least one version.")
        return cls(
            version_ids=tuple(
                os.path.basename(os.path.normpath(path)) for path in paths
            ),
            directories=tuple(paths),
        )

    @classmethod
    def from_git(
        cls,
        repository: str,
        revisions: list[str] | None = None,
        revision_range: str | None = None,
    ) -> "VersionSource":
        """
        Use the revisions of a git working copy.

        :param: repository
            The path to the git working copy.

        :param: revisions
            Explicit revisions, oldest first.

        :param: revision_range
            A revision range linearised along first parents, e.g. `v1.0..HEAD`; the
            whole history of `HEAD` when neither argument is given.

        :return:
            The :class:`VersionSource`.

        """

        if revisions:
            version_ids = [
                _run_git(repository, ["rev-parse", "--verify", f"{revision}^{{commit}}"])
                .decode("utf-8")
                .strip()
                for revision in revisions
            ]
        else:
            version_ids = (
                _run_git(
                    repository,
                    [
                        "rev-list",
                        "--first-parent",
                        "--reverse",
                        revision_range or "HEAD",
                    ],
                )
                .decode("utf-8")
                .split()
            )
        if not version_ids:
            raise EmptyInputError(f"No revisions found in '{repository}'.")
        return cls(version_ids=tuple(version_ids), repository=repository)

    @contextmanager
    def checkout(self, index: int) -> Iterator[str]:
        """
        Materialise one version.

        :param: index
            The position of the version.

        :return:
            A context yielding the directory of the version; git checkouts are removed
            on exit.

        """

        if self.repository is None:
            yield self.directories[index]
            return

        with tempfile.TemporaryDirectory(prefix="microsar-") as directory:
            archive = _run_git(
                self.repository, ["archive", "--format=tar", self.version_ids[index]]
            )
            with tempfile.TemporaryFile() as archive_file:
                archive_file.write(archive)
                archive_file.seek(0)
                with tarfile.open(fileobj=archive_file, mode="r:") as tar:
                    _extract_archive(tar, directory)
            yield directory


def _extract_archive(tar: tarfile.TarFile, directory: str) -> None:
    """Extract an archive, refusing members that would land outside the directory."""

    if hasattr(tarfile, "data_filter"):
        try:
            tar.extractall(directory, filter="data")
        except tarfile.FilterError as error:
            raise VersionControlError(f"Refusing to extract archive: {error}") from None
        return

    # Interpreters without extraction filters.
    for member in tar.getmembers():
        names = [member.name]
        if member.issym() or member.islnk():
            names.append(member.linkname)
        if any(name.startswith("/") or ".." in name.split("/") for name in names):
            raise VersionControlError(
                f"Refusing to extract archive member '{member.name}'."
            )
    tar.extractall(directory)


def _run_git(repository: str, arguments: list[str]) -> bytes:
    """Run a git command in a working copy and return its output."""

    command = ["git", "-C", repository, *arguments]
    try:
        process = subprocess.Popen(
            command, stdout=subprocess.PIPE, stderr=subprocess.PIPE
        )
    except OSError as error:
        raise VersionControlError(f"Could not run git: {error}") from None
    output, errors = process.communicate()
    if process.returncode != 0:
        raise VersionControlError(
            f"'{' '.join(command)}' failed: {errors.decode('utf-8', 'replace').strip()}"
        )
    return output


@dataclass(frozen=True)
class SkipNotice:
    """
    A version that could not be analysed.

    .. attribute:: position
        The position of the version in the source.

    .. attribute:: version_id
        The version id.

    .. attribute:: reason
        The error that caused the skip.

    """

    position: int
    version_id: str
    reason: str

    def to_document(self) -> dict[str, Any]:
        return {
            "position": self.position,
            "reason": self.reason,
            "versionId": self.version_id,
        }


@dataclass(frozen=True)
class VersionRecord:
    """
    One analysed version.

    .. attribute:: version_id
        The version id.

    .. attribute:: system
        The system IR of the version.

    .. attribute:: deltas
        The deltas applied to reach the version; empty for the baseline.

    .. attribute:: violations
        The violations found at the version.

    """

    version_id: str
    system: SystemIR
    deltas: tuple[Delta, ...]
    violations: tuple[Violation, ...]

    @property
    def version_label(self) -> str:
        return self.system.version_label


@dataclass
class EvolutionRecord:
    """
    The outcome of a replay.

    .. attribute:: rule_names
        The names of the evaluated rules.

    .. attribute:: versions
        The analysed versions, oldest first.

    .. attribute:: skipped
        The versions that could not be analysed.

    .. attribute:: integrity_failures
        The indices of versions whose increment differed from full extraction.

    """

    rule_names: tuple[str, ...]
    versions: list[VersionRecord] = field(default_factory=list)
    skipped: list[SkipNotice] = field(default_factory=list)
    integrity_failures: list[int] = field(default_factory=list)

    @property
    def per_rule_series(self) -> dict[str, list[int]]:
        """Return the number of violations of each rule at each version."""

        series = {name: [0] * len(self.versions) for name in self.rule_names}
        for index, version in enumerate(self.versions):
            for violation in version.violations:
                series.setdefault(violation.rule_name, [0] * len(self.versions))
                series[violation.rule_name][index] += 1
        return series

    @property
    def unique_totals(self) -> dict[str, int]:
        """Return the number of distinct violations of each rule over the history."""

        keys: dict[str, set[str]] = {name: set() for name in self.rule_names}
        for version in self.versions:
            for violation in version.violations:
                keys.setdefault(violation.rule_name, set()).add(violation.dedup_key)
        return {name: len(dedup_keys) for name, dedup_keys in keys.items()}


@dataclass(frozen=True)
class ReplayConfig:
    """
    The inputs of a replay, as read from a replay config file.

    .. attribute:: source
        The :class:`VersionSource`.

    .. attribute:: profile
        The marker-profile path, or `None` for the bundled profile.

    .. attribute:: rule_files
        The rule files, or empty for the built-in rules.

    .. attribute:: service_map
        The service-name map path, if any.

    .. attribute:: overlap_threshold
        The data-overlap threshold, if set.

    .. attribute:: checkpoint_interval
        The full-extraction checkpoint interval, if set.

    .. attribute:: verify_every_step
        Whether integrity is checked at every step.

    """

    source: VersionSource
    profile: str | None = None
    rule_files: tuple[str, ...] = ()
    service_map: str | None = None
    overlap_threshold: float | None = None
    checkpoint_interval: int | None = None
    verify_every_step: bool = False


def load_replay_config(filepath: str, logger: Logger) -> ReplayConfig:
    """
    Load a replay config.

    Relative paths in the config are relative to the config file.

    :param: filepath
        The path to the YAML config.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :return:
        The :class:`ReplayConfig`.

    """

    document = read_yaml(filepath, logger)
    if not isinstance(document, dict):
        raise SchemaViolationError(filepath, "expected a mapping")

    base_directory = os.path.dirname(os.path.abspath(filepath))

    def _path(value: Any, key: str) -> str:
        if not isinstance(value, str) or not value:
            raise SchemaViolationError(f"{filepath}.{key}", "expected a path")
        return os.path.join(base_directory, value)

    def _optional_path(key: str) -> str | None:
        value = document.get(key)
        return None if value is None else _path(value, key)

    if VERSIONS in document:
        versions = document[VERSIONS]
        if not isinstance(versions, list):
            raise SchemaViolationError(f"{filepath}.{VERSIONS}", "expected a list")
        source = VersionSource.from_directories(
            [_path(version, VERSIONS) for version in versions]
        )
    elif REPOSITORY in document:
        revisions = document.get(REVISIONS)
        if revisions is not None and not isinstance(revisions, list):
            raise SchemaViolationError(f"{filepath}.{REVISIONS}", "expected a list")
        source = VersionSource.from_git(
            _path(document[REPOSITORY], REPOSITORY),
            [str(revision) for revision in revisions] if revisions else None,
            document.get(RANGE),
        )
    else:
        raise SchemaViolationError(
            filepath, f"expected either '{VERSIONS}' or '{REPOSITORY}'"
        )

    rule_files = document.get(RULES) or []
    if not isinstance(rule_files, list):
        raise SchemaViolationError(f"{filepath}.{RULES}", "expected a list")

    overlap_threshold = document.get(OVERLAP_THRESHOLD)
    checkpoint_interval = document.get(CHECKPOINT_INTERVAL)
    if checkpoint_interval is not None and (
        not isinstance(checkpoint_interval, int) or checkpoint_interval < 1
    ):
        raise SchemaViolationError(
            f"{filepath}.{CHECKPOINT_INTERVAL}", "expected a positive integer"
        )

    return ReplayConfig(
        source=source,
        profile=_optional_path(PROFILE),
        rule_files=tuple(_path(rule_file, RULES) for rule_file in rule_files),
        service_map=_optional_path(SERVICE_MAP),
        overlap_threshold=(
            None if overlap_threshold is None else float(overlap_threshold)
        ),
        checkpoint_interval=checkpoint_interval,
        verify_every_step=bool(document.get(VERIFY_EVERY_STEP, False)),
    )


def _extract_version(
    root_path: str,
    version_id: str,
    profile: MarkerProfile,
    logger: Logger,
    service_map: dict[str, str],
    cache: ExtractionCache,
    workers: int,
) -> dict[str, MicroserviceIR]:
    """Extract every microservice of one version."""

    return {
        name: scan_repository(
            directory,
            profile,
            name,
            version_id,
            logger,
            service_map=service_map,
            cache=cache,
            workers=workers,
        )
        for name, directory in discover_services(
            root_path, service_map, profile.exclude_directories
        )
    }


def _step(
    system: SystemIR,
    previous: dict[str, MicroserviceIR],
    services: dict[str, MicroserviceIR],
    overlap_threshold: float,
) -> tuple[SystemIR, list[Delta]]:
    """Merge one version into the running system, returning the applied deltas."""

    deltas: list[Delta] = []
    for name in sorted(services):
        old = previous.get(name) or MicroserviceIR(name, services[name].version_id)
        delta = compute_delta(old, services[name])
        deltas.append(delta)
        system = apply_delta(system, delta, overlap_threshold)
    for name in sorted(set(previous) - set(services)):
        system = drop_service(system, name, overlap_threshold)
    return system, deltas


def replay(
    source: VersionSource,
    profile: MarkerProfile,
    rules: list[Rule],
    logger: Logger,
    *,
    service_map: dict[str, str] | None = None,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL,
    verify_every_step: bool = False,
    workers: int = DEFAULT_WORKERS,
    show_progress: bool = False,
) -> EvolutionRecord:
    """
    Replay a version history.

    A version that cannot be extracted is skipped with a notice; the next version is
    diffed against the last analysed one. Every `checkpoint_interval` versions, at the
    first version analysed after a skip, and at every version when verifying, the
    increment is compared with a from-scratch reconstruction and replaced by it on
    mismatch.

    :param: source
        The :class:`VersionSource`.

    :param: profile
        The :class:`MarkerProfile` in use.

    :param: rules
        The rules to evaluate.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :param: service_map
        Map from directory or host name to logical service name.

    :param: overlap_threshold
        The entity similarity at or above which a data-overlap edge is created.

    :param: checkpoint_interval
        The number of versions between two integrity checks.

    :param: verify_every_step
        Whether to check integrity at every version.

    :param: workers
        The number of parser threads.

    :param: show_progress
        Whether to display a progress bar.

    :return:
        The :class:`EvolutionRecord`.

    """

    if len(source) == 0:
        raise EmptyInputError("A version history needs at least one version.")

    service_map = service_map or {}
    cache = ExtractionCache()
    record = EvolutionRecord(rule_names=tuple(rule.name for rule in rules))
    previous: dict[str, MicroserviceIR] = {}
    system: SystemIR | None = None
    reanchor = False

    for position in tqdm(
        range(len(source)),
        desc="Replaying history",
        disable=not show_progress,
        leave=False,
        unit="version",
    ):
        version_id = source.version_ids[position]
        try:
            with source.checkout(position) as root_path:
                services = _extract_version(
                    root_path, version_id, profile, logger, service_map, cache, workers
                )
        except (InputError, VersionControlError) as error:
            logger.error("Version '%s' is skipped: %s", version_id, str(error))
            record.skipped.append(SkipNotice(position, version_id, str(error)))
            reanchor = True
            continue

        index = len(record.versions)
        if system is None:
            increment = build_system_ir(services.values(), overlap_threshold)
            deltas: list[Delta] = []
        else:
            increment, deltas = _step(system, previous, services, overlap_threshold)
            if reanchor or verify_every_step or index % checkpoint_interval == 0:
                reconstructed = build_system_ir(services.values(), overlap_threshold)
                if reconstructed != increment:
                    logger.error(
                        "Increment at version '%s' differs from full extraction, "
                        "re-anchoring.",
                        version_id,
                    )
                    record.integrity_failures.append(index)
                    increment = reconstructed

        violations = (
            evaluate_system(increment, rules)
            if system is None
            else evaluate_step(system, deltas, increment, rules)
        )
        logger.info(
            "Version %s ('%s'): %s changes, %s violations.",
            index,
            version_id,
            sum(len(delta.changes) for delta in deltas),
            len(violations),
        )
        record.versions.append(
            VersionRecord(version_id, increment, tuple(deltas), tuple(violations))
        )
        previous = services
        system = increment
        reanchor = False

    logger.info(
        "Replayed %s versions, skipped %s; %s parsed files reused.",
        len(record.versions),
        len(record.skipped),
        cache.hits,
    )
    return record


def emit_timeseries(record: EvolutionRecord) -> bytes:
    """
    Render the per-version violation counts of the built-in rules as CSV.

    :param: record
        The :class:`EvolutionRecord`.

    :return:
        The CSV document with header `Index,AR1,AR2,AR3,AR4`.

    """

    if not record.versions:
        raise EmptyInputError("The evolution record holds no analysed version.")

    series = record.per_rule_series
    frame = pd.DataFrame(
        {
            "Index": list(range(len(record.versions))),
            **{
                column: series.get(rule_name, [0] * len(record.versions))
                for column, rule_name in TIMESERIES_COLUMNS.items()
            },
        }
    )
    return frame.to_csv(index=False, lineterminator="\n").encode("utf-8")


def emit_summary(record: EvolutionRecord) -> dict[str, Any]:
    """
    Summarise the unique violations of each rule.

    :param: record
        The :class:`EvolutionRecord`.

    :return:
        The summary document with the commit count, the per-rule totals and the skip
        notices.

    """

    if not record.versions and not record.skipped:
        raise EmptyInputError("The evolution record holds no version.")

    totals = {rule_name: 0 for rule_name in TIMESERIES_COLUMNS.values()}
    totals.update(record.unique_totals)
    return {
        COMMITS: len(record.versions) + len(record.skipped),
        SKIPPED: [notice.to_document() for notice in record.skipped],
        TOTALS: totals,
    }


def summary_text(summary: dict[str, Any]) -> str:
    """Render a summary document as an aligned table."""

    builtin = list(TIMESERIES_COLUMNS.values())
    rule_names = builtin + sorted(set(summary[TOTALS]) - set(builtin))
    frame = pd.DataFrame(
        [[summary[TOTALS][name] for name in rule_names] + [summary[COMMITS]]],
        columns=rule_names + ["#Commits"],
    )
    return frame.to_string(index=False) + "\n"


def _write(filepath: str, data: bytes) -> None:
    os.makedirs(os.path.dirname(filepath), exist_ok=True)
    with open(filepath, "wb") as output_file:
        output_file.write(data)


def _json_bytes(document: Any) -> bytes:
    return (json.dumps(document, sort_keys=True, indent=2) + "\n").encode("utf-8")


def write_artifacts(record: EvolutionRecord, out_directory: str, logger: Logger) -> None:
    """
    Write the artifacts of a replay.

    The layout is `ir/<index>.json`, `deltas/<index>.json` (from index 1),
    `violations/<index>.json`, `timeseries.csv` and `summary.json`.

    :param: record
        The :class:`EvolutionRecord`.

    :param: out_directory
        The output directory.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    """

    for index, version in enumerate(record.versions):
        _write(
            os.path.join(out_directory, "ir", f"{index}.json"),
            serialize_ir(version.system),
        )
        if index > 0:
            _write(
                os.path.join(out_directory, "deltas", f"{index}.json"),
                _json_bytes(
                    [json.loads(serialize_delta(delta)) for delta in version.deltas]
                ),
            )
        _write(
            os.path.join(out_directory, "violations", f"{index}.json"),
            _json_bytes(violations_document(version.violations)),
        )

    _write(os.path.join(out_directory, "timeseries.csv"), emit_timeseries(record))
    _write(
        os.path.join(out_directory, "summary.json"), _json_bytes(emit_summary(record))
    )
    logger.info(
        "Artifacts of %s versions written to '%s'.", len(record.versions), out_directory
    )
