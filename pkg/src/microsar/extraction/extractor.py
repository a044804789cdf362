#!/usr/bin/python3.10
########################################################################################
# extractor.py - Microservice source-tree extraction.                                  #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 15/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
Scans one microservice source tree and produces its :class:`MicroserviceIR`.

Source units are classified with a :class:`MarkerProfile`. Controllers contribute
endpoints, every classified unit contributes methods with their remote calls, and
entities contribute their persisted fields.

"""

import hashlib
import os
import threading

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from logging import Logger
from typing import Iterable

from ..__utils__ import (
    AmbiguousClassificationError,
    DEFAULT_WORKERS,
    DuplicateServiceError,
    InputError,
    read_yaml,
    SourceParseError,
    UnreadableTreeError,
)
from ..ir_model import (
    body_hash,
    Component,
    component_id,
    ComponentId,
    ComponentType,
    Endpoint,
    Entity,
    HttpMethod,
    Method,
    MicroserviceIR,
    normalize_path,
    RestCall,
    UNRESOLVED,
    WILDCARD,
)
from .callgraph import build_call_graph
from .java_parser import (
    Annotation,
    CallSite,
    iter_call_sites,
    local_declarations,
    parse_source,
    ParsedField,
    ParsedMethod,
    ParsedSource,
    ParsedUnit,
    simple_type,
    split_arguments,
    Token,
)
from .profile import COMPOSITE_VERB, MarkerProfile, RemoteCallPattern

__all__ = (
    "BUILD_DESCRIPTORS",
    "classify_source_unit",
    "classify_unit",
    "discover_services",
    "ExtractionCache",
    "extract_endpoints",
    "extract_entity",
    "extract_rest_calls",
    "load_service_map",
    "scan_repository",
)

# Build descriptors:
#   File names marking the root of one buildable microservice.
BUILD_DESCRIPTORS: tuple[str, ...] = ("build.gradle", "build.gradle.kts", "pom.xml")

# Format placeholders:
#   Conversion specifiers treated as unknown operands in formatted URLs.
_FORMAT_PLACEHOLDERS: tuple[str, ...] = ("%s", "%d")

# Placeholder:
#   Marker for an operand whose value is not statically known.
_PLACEHOLDER: str = "\0"

# URL schemes:
#   Schemes stripped from remote-call URLs before reading the host.
_URL_SCHEMES: tuple[str, ...] = ("http://", "https://", "lb://")


@dataclass
class ExtractionCache:
    """
    Parsed source files keyed by the digest of their content.

    Replaying a history re-parses only the files whose content changed.

    .. attribute:: entries
        Map from content digest to the parsed file, or the parse error it raised.

    .. attribute:: hits
        The number of lookups answered from the cache.

    .. attribute:: misses
        The number of files parsed.

    """

    entries: dict[str, ParsedSource | SourceParseError] = field(default_factory=dict)
    hits: int = 0
    misses: int = 0
    _lock: threading.Lock = field(
        default_factory=threading.Lock, compare=False, repr=False
    )

    def parse(self, data: bytes, path: str) -> ParsedSource:
        """
        Parse a file, reusing an earlier parse of identical content.

        :param: data
            The raw file content.

        :param: path
            The repository-relative path, used in error messages.

        :return:
            The :class:`ParsedSource`.

        """

        digest = hashlib.sha256(data).hexdigest()
        with self._lock:
            entry = self.entries.get(digest)
            if entry is not None:
                self.hits += 1
        if entry is None:
            try:
                entry = parse_source(data.decode("utf-8", errors="replace"), path)
            except SourceParseError as error:
                entry = error
            except Exception as error:
                entry = SourceParseError(path, 1, f"unexpected parser failure: {error!r}")
            with self._lock:
                self.entries[digest] = entry
                self.misses += 1

        if isinstance(entry, SourceParseError):
            raise SourceParseError(path, entry.line, entry.msg)
        return entry


@dataclass
class _Scope:
    """Static knowledge available while analysing one method body."""

    types: dict[str, str]
    strings: dict[str, list[str]]


def classify_unit(unit: ParsedUnit, profile: MarkerProfile) -> ComponentType | None:
    """
    Classify a parsed source unit.

    :param: unit
        The parsed type declaration.

    :param: profile
        The :class:`MarkerProfile` in use.

    :return:
        The :class:`ComponentType`, or `None` when no marker matches.

    """

    if unit.kind == "@interface":
        return None

    annotation_names = {annotation.name for annotation in unit.annotations}
    matches = [
        component_type
        for component_type, markers in profile.classification_markers.items()
        if annotation_names & markers
    ]
    if not matches and {
        simple_type(supertype) for supertype in unit.supertypes
    } & profile.repository_supertypes:
        matches = [ComponentType.REPOSITORY]

    if len(matches) > 1:
        raise AmbiguousClassificationError(
            unit.qualified_name, [match.value for match in matches]
        )
    return matches[0] if matches else None


def classify_source_unit(unit_text: str, profile: MarkerProfile) -> ComponentType | None:
    """
    Classify the first type declaration of a source text.

    :param: unit_text
        The source text of one unit.

    :param: profile
        The :class:`MarkerProfile` in use.

    :return:
        The :class:`ComponentType`, or `None` when no marker matches.

    """

    parsed = parse_source(unit_text)
    if not parsed.units:
        return None
    return classify_unit(parsed.units[0], profile)


def _mapping_paths(annotation: Annotation) -> tuple[str, ...]:
    """Return the paths declared by a mapping annotation."""

    return annotation.attributes.get("path") or annotation.attributes.get("value") or ("",)


def _mapping_verbs(annotation: Annotation, verb: str) -> list[HttpMethod]:
    """Return the verbs of a mapping annotation, reading composite mappings."""

    if verb != COMPOSITE_VERB:
        return [HttpMethod(verb)]

    verbs = {
        value.rsplit(".", 1)[-1].upper()
        for value in annotation.attributes.get("method", ())
    }
    return sorted(HttpMethod(verb) for verb in verbs if verb in HttpMethod.__members__) or [
        HttpMethod.GET
    ]


def extract_endpoints(
    unit: ParsedUnit, profile: MarkerProfile, owner: ComponentId
) -> list[Endpoint]:
    """
    Extract the endpoints of a controller.

    :param: unit
        The parsed controller unit.

    :param: profile
        The :class:`MarkerProfile` in use.

    :param: owner
        The :class:`ComponentId` of the controller.

    :return:
        The sorted endpoints; handler methods without an endpoint marker are ignored.

    """

    base_paths: tuple[str, ...] = ("",)
    for annotation in unit.annotations:
        if annotation.name in profile.endpoint_markers:
            base_paths = _mapping_paths(annotation)
            break

    endpoints: set[Endpoint] = set()
    for method in unit.methods:
        for annotation in method.annotations:
            verb = profile.endpoint_markers.get(annotation.name)
            if verb is None:
                continue
            for http_method in _mapping_verbs(annotation, verb):
                for base_path in base_paths:
                    for path in _mapping_paths(annotation):
                        endpoints.add(
                            Endpoint(
                                http_method,
                                normalize_path(f"{base_path}/{path}"),
                                method.name,
                                owner,
                            )
                        )

    return sorted(endpoints)


def _split_concatenation(tokens: tuple[Token, ...]) -> list[list[Token]]:
    """Split an expression at top-level `+` operators."""

    parts: list[list[Token]] = [[]]
    depth = 0
    for token in tokens:
        if token.text in ("(", "[", "{"):
            depth += 1
        elif token.text in (")", "]", "}"):
            depth -= 1
        elif token.text == "+" and depth == 0:
            parts.append([])
            continue
        parts[-1].append(token)
    return [part for part in parts if part]


def _literal_fragments(value: str) -> list[str]:
    """Split a string literal at format placeholders."""

    fragments = [value]
    for placeholder in _FORMAT_PLACEHOLDERS:
        fragments = [
            piece
            for fragment in fragments
            for index, text in enumerate(fragment.split(placeholder))
            for piece in ((_PLACEHOLDER, text) if index else (text,))
        ]
    return [fragment for fragment in fragments if fragment]


def _evaluate_string(tokens: tuple[Token, ...], strings: dict[str, list[str]]) -> list[str]:
    """
    Evaluate a string expression into literal fragments and placeholders.

    Literals and known string constants are kept; every other operand becomes a
    placeholder.

    """

    fragments: list[str] = []
    for part in _split_concatenation(tokens):
        if len(part) == 1 and part[0].kind == "string":
            fragments.extend(_literal_fragments(part[0].literal_value))
        elif len(part) == 1 and part[0].kind == "ident" and part[0].text in strings:
            fragments.extend(strings[part[0].text])
        elif (
            len(part) >= 4
            and [token.text for token in part[:3]] == ["String", ".", "format"]
            and part[3].text == "("
        ):
            arguments = split_arguments(part[4:-1])
            fragments.extend(
                _evaluate_string(arguments[0], strings) if arguments else [_PLACEHOLDER]
            )
        else:
            fragments.append(_PLACEHOLDER)
    return fragments


def _unit_strings(unit: ParsedUnit) -> dict[str, list[str]]:
    """Evaluate the unit-level string constants."""

    declared = {
        parsed_field.name: parsed_field
        for parsed_field in unit.fields
        if simple_type(parsed_field.type) == "String" and parsed_field.initializer
    }
    strings: dict[str, list[str]] = {}
    # Constants may refer to constants declared after them.
    for _ in range(2):
        for name, parsed_field in declared.items():
            strings[name] = _evaluate_string(parsed_field.initializer, strings)
    return strings


def _local_strings(
    tokens: tuple[Token, ...], strings: dict[str, list[str]]
) -> dict[str, list[str]]:
    """Evaluate the local string variables declared in a body, in order."""

    strings = dict(strings)
    for index in range(len(tokens) - 2):
        if (
            tokens[index].text == "String"
            and tokens[index + 1].kind == "ident"
            and tokens[index + 2].text == "="
        ):
            end = index + 3
            depth = 0
            while end < len(tokens) and not (depth == 0 and tokens[end].text == ";"):
                if tokens[end].text in ("(", "[", "{"):
                    depth += 1
                elif tokens[end].text in (")", "]", "}"):
                    depth -= 1
                end += 1
            strings[tokens[index + 1].text] = _evaluate_string(
                tokens[index + 3 : end], strings
            )
    return strings


def _resolve_url(fragments: list[str], service_map: dict[str, str]) -> tuple[str, str]:
    """
    Resolve URL fragments into a target service and a normalized path.

    :param: fragments
        The literal fragments and placeholders of the URL expression.

    :param: service_map
        Map from host name to logical service name.

    :return:
        The (target service, path) pair; the target is :data:`UNRESOLVED` when the host
        is not a literal.

    """

    text = "".join(fragments)
    for scheme in _URL_SCHEMES:
        if text.startswith(scheme):
            host, _, path = text[len(scheme) :].partition("/")
            path = f"/{path}"
            if _PLACEHOLDER in host or not host:
                target = UNRESOLVED
            else:
                host = host.split(":", 1)[0]
                target = service_map.get(host, host)
            break
    else:
        target = UNRESOLVED
        path = text
        if text.startswith(_PLACEHOLDER):
            remainder = text.lstrip(_PLACEHOLDER)
            path = remainder[remainder.find("/") :] if "/" in remainder else "/"

    return target, normalize_path(path.replace(_PLACEHOLDER, WILDCARD))


def _receiver_type(site: CallSite, scope: _Scope) -> str | None:
    """Return the simple type of a call receiver, if statically known."""

    if site.receiver and site.receiver in scope.types:
        return simple_type(scope.types[site.receiver])
    return None


def _matching_pattern(
    site: CallSite, scope: _Scope, profile: MarkerProfile
) -> RemoteCallPattern | None:
    """Return the remote-call pattern matched by a call site, if any."""

    if not site.receiver:
        return None

    receiver_type = _receiver_type(site, scope)
    for pattern in profile.remote_call_patterns:
        if site.name != pattern.method:
            continue
        if receiver_type is not None:
            if receiver_type == pattern.receiver:
                return pattern
        elif site.receiver.lower() == pattern.receiver.lower():
            return pattern
    return None


def _rest_call(
    site: CallSite,
    pattern: RemoteCallPattern,
    scope: _Scope,
    owner: ComponentId,
    site_method: str,
    service_map: dict[str, str],
) -> RestCall | None:
    """Build the :class:`RestCall` of a call site matching a remote-call pattern."""

    if pattern.url_argument >= site.arity:
        return None

    http_method = HttpMethod.GET
    verb_argument = pattern.verb_argument
    if verb_argument is None:
        http_method = HttpMethod(pattern.verb.upper())
    elif verb_argument < site.arity and site.arguments[verb_argument]:
        verb = site.arguments[verb_argument][-1].text.upper()
        if verb in HttpMethod.__members__:
            http_method = HttpMethod(verb)

    target, path = _resolve_url(
        _evaluate_string(site.arguments[pattern.url_argument], scope.strings),
        service_map,
    )
    return RestCall(http_method, target, path, site_method, owner)


def _build_method(
    unit: ParsedUnit,
    parsed: ParsedMethod,
    profile: MarkerProfile,
    owner: ComponentId,
    service_map: dict[str, str],
    field_types: dict[str, str],
    unit_strings: dict[str, list[str]],
) -> Method:
    """Analyse one parsed method into a :class:`Method`."""

    types = dict(field_types)
    types.update(dict(parsed.parameters))
    types.update(local_declarations(parsed.body_tokens))
    scope = _Scope(types, _local_strings(parsed.body_tokens, unit_strings))

    return_type = simple_type(parsed.return_type)
    site_method = f"{unit.qualified_name}.{parsed.name}"
    body_call_targets: set[str] = set()
    return_object_calls: set[str] = set()
    rest_calls: list[RestCall] = []

    for site in iter_call_sites(parsed.body_tokens):
        pattern = _matching_pattern(site, scope, profile)
        if pattern is not None:
            rest_call = _rest_call(site, pattern, scope, owner, site_method, service_map)
            if rest_call is not None:
                rest_calls.append(rest_call)

        # Calls on the unit itself never leave the component.
        if site.receiver in ("", "this", "super"):
            continue

        receiver_type = _receiver_type(site, scope)
        if receiver_type is not None:
            hint = receiver_type
        elif site.receiver and site.receiver[:1].isupper():
            hint = site.receiver
        else:
            hint = ""
        body_call_targets.add(f"{hint}.{site.name}/{site.arity}")

        if receiver_type is not None and return_type not in ("", "void") and (
            receiver_type == return_type
        ):
            return_object_calls.add(f"{site.name}/{site.arity}")

    return Method(
        name=parsed.name,
        parameters=parsed.parameters,
        return_type=parsed.return_type,
        annotations=tuple(str(annotation) for annotation in parsed.annotations),
        body_call_targets=tuple(sorted(body_call_targets)),
        rest_calls=tuple(sorted(rest_calls)),
        return_object_calls=tuple(sorted(return_object_calls)),
        content_hash=body_hash(parsed.body_text),
    )


def _unit_methods(
    unit: ParsedUnit,
    profile: MarkerProfile,
    owner: ComponentId,
    service_map: dict[str, str] | None = None,
) -> list[Method]:
    """Analyse every method of a unit."""

    field_types = {parsed_field.name: parsed_field.type for parsed_field in unit.fields}
    unit_strings = _unit_strings(unit)
    return [
        _build_method(
            unit, parsed, profile, owner, service_map or {}, field_types, unit_strings
        )
        for parsed in unit.methods
    ]


def extract_rest_calls(
    unit: ParsedUnit,
    profile: MarkerProfile,
    owner: ComponentId,
    service_map: dict[str, str] | None = None,
) -> list[RestCall]:
    """
    Extract the remote calls made by a unit.

    :param: unit
        The parsed unit.

    :param: profile
        The :class:`MarkerProfile` in use.

    :param: owner
        The :class:`ComponentId` of the unit.

    :param: service_map
        Map from host name to logical service name.

    :return:
        The sorted remote calls.

    """

    return sorted(
        rest_call
        for method in _unit_methods(unit, profile, owner, service_map)
        for rest_call in method.rest_calls
    )


def _is_instance_field(unit_field: ParsedField, profile: MarkerProfile) -> bool:
    """Return whether a field is persisted instance state."""

    if "static" in unit_field.modifiers or "transient" in unit_field.modifiers:
        return False
    return not any(
        annotation.name in profile.transient_markers
        for annotation in unit_field.annotations
    )


def extract_entity(
    unit: ParsedUnit, profile: MarkerProfile, logger: Logger | None = None
) -> Entity:
    """
    Extract the data entity declared by a unit.

    :param: unit
        The parsed entity unit.

    :param: profile
        The :class:`MarkerProfile` in use.

    :param: logger
        The :class:`logging.Logger` to warn on when the entity has no fields.

    :return:
        The :class:`Entity` with its instance fields; static and transient fields are
        excluded.

    """

    entity = Entity(
        name=unit.name,
        fields=tuple(
            sorted(
                (unit_field.name, unit_field.type)
                for unit_field in unit.fields
                if _is_instance_field(unit_field, profile)
            )
        ),
        annotations=tuple(sorted(str(annotation) for annotation in unit.annotations)),
    )
    if not entity.fields and logger is not None:
        logger.warning("Entity '%s' declares no instance fields.", unit.qualified_name)
    return entity


def _build_component(
    unit: ParsedUnit,
    component_type: ComponentType,
    service_name: str,
    profile: MarkerProfile,
    service_map: dict[str, str],
    source_path: str,
    logger: Logger,
) -> Component:
    """Build the :class:`Component` of a classified unit."""

    owner = component_id(service_name, component_type, unit.qualified_name)
    return Component.build(
        id=owner,
        methods=_unit_methods(unit, profile, owner, service_map),
        endpoints=(
            extract_endpoints(unit, profile, owner)
            if component_type == ComponentType.CONTROLLER
            else ()
        ),
        entity=(
            extract_entity(unit, profile, logger)
            if component_type == ComponentType.ENTITY
            else None
        ),
        supertypes=unit.supertypes,
        fields=[
            (unit_field.name, unit_field.type)
            for unit_field in unit.fields
            if "static" not in unit_field.modifiers
        ],
        source_path=source_path,
    )


def _source_files(root_path: str, profile: MarkerProfile) -> list[str]:
    """Return the repository-relative paths of the source files, sorted."""

    source_files: list[str] = []
    for directory, subdirectories, filenames in os.walk(root_path):
        subdirectories[:] = sorted(
            subdirectory
            for subdirectory in subdirectories
            if subdirectory not in profile.exclude_directories
        )
        source_files.extend(
            os.path.relpath(os.path.join(directory, filename), root_path).replace(
                os.sep, "/"
            )
            for filename in filenames
            if filename.endswith(tuple(profile.file_extensions))
        )
    return sorted(source_files)


def scan_repository(
    root_path: str,
    profile: MarkerProfile,
    service_name: str,
    version_id: str,
    logger: Logger,
    *,
    service_map: dict[str, str] | None = None,
    cache: ExtractionCache | None = None,
    workers: int = DEFAULT_WORKERS,
) -> MicroserviceIR:
    """
    Scan one microservice source tree.

    Per-file failures are logged and collected as warnings on the returned IR; they
    never abort the scan.

    :param: root_path
        The root directory of the microservice.

    :param: profile
        The :class:`MarkerProfile` in use.

    :param: service_name
        The microservice name.

    :param: version_id
        The opaque version of the tree.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :param: service_map
        Map from host name to logical service name, for remote-call targets.

    :param: cache
        An :class:`ExtractionCache` to reuse parsed files from.

    :param: workers
        The number of parser threads.

    :return:
        The :class:`MicroserviceIR`.

    """

    if not os.path.isdir(root_path):
        raise UnreadableTreeError(root_path, "not a directory")
    if not os.access(root_path, os.R_OK | os.X_OK):
        raise UnreadableTreeError(root_path, "permission denied")

    cache = cache if cache is not None else ExtractionCache()
    service_map = service_map or {}
    source_files = _source_files(root_path, profile)
    logger.debug(
        "Scanning %s source files of '%s' at version '%s'.",
        len(source_files),
        service_name,
        version_id,
    )

    def _parse(relative_path: str) -> ParsedSource | str:
        try:
            with open(os.path.join(root_path, relative_path), "rb") as source_file:
                data = source_file.read()
            return cache.parse(data, relative_path)
        except SourceParseError as error:
            return str(error)
        except OSError as error:
            return f"Error reading '{relative_path}': {error}"
        except Exception as error:
            return f"Error parsing '{relative_path}': {error!r}"

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        parsed_files = list(executor.map(_parse, source_files))

    components: dict[ComponentId, Component] = {}
    warnings: list[str] = []

    def _warn(message: str) -> None:
        logger.warning(message)
        warnings.append(message)

    for relative_path, parsed in zip(source_files, parsed_files):
        if isinstance(parsed, str):
            _warn(parsed)
            continue
        for unit in parsed.units:
            try:
                component_type = classify_unit(unit, profile)
            except AmbiguousClassificationError as error:
                _warn(str(error))
                continue
            if component_type is None:
                continue
            component = _build_component(
                unit,
                component_type,
                service_name,
                profile,
                service_map,
                relative_path,
                logger,
            )
            if component.id in components:
                _warn(
                    f"Duplicate component '{component.id}' in '{relative_path}' is "
                    "ignored."
                )
                continue
            if component.entity is not None and not component.entity.fields:
                warnings.append(f"Entity '{unit.qualified_name}' declares no fields.")
            components[component.id] = component

    # Endpoint keys are unique per service: the first declaration in path order wins.
    seen_endpoints: dict[tuple, Endpoint] = {}
    for component in list(components.values()):
        kept: list[Endpoint] = []
        for endpoint in component.endpoints:
            first = seen_endpoints.setdefault(endpoint.key, endpoint)
            if first is endpoint:
                kept.append(endpoint)
                continue
            _warn(
                f"Duplicate endpoint {endpoint.http_method.value} {endpoint.path} on "
                f"'{component.id}.{endpoint.handler_method}' is ignored; it is first "
                f"declared by '{first.owning_component}.{first.handler_method}'."
            )
        if len(kept) < len(component.endpoints):
            components[component.id] = Component.build(
                id=component.id,
                methods=component.methods,
                endpoints=kept,
                entity=component.entity,
                supertypes=component.supertypes,
                fields=component.fields,
                source_path=component.source_path,
            )

    logger.info(
        "Extracted %s components from '%s' with %s warnings.",
        len(components),
        service_name,
        len(warnings),
    )
    return MicroserviceIR(
        name=service_name,
        version_id=version_id,
        components=dict(sorted(components.items())),
        call_graph_edges=build_call_graph(components),
        warnings=tuple(warnings),
    )


def load_service_map(filepath: str | None, logger: Logger) -> dict[str, str]:
    """
    Load a service-name map.

    :param: filepath
        The path to a YAML mapping from directory or host name to service name, or
        `None` for no mapping.

    :param: logger
        The :class:`logging.Logger` to use for the run.

    :return:
        The service-name map.

    """

    if filepath is None:
        return {}

    document = read_yaml(filepath, logger)
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise InputError(f"Service map '{filepath}' must be a mapping.")
    return {str(key): str(value) for key, value in document.items()}


def discover_services(
    root_path: str,
    service_map: dict[str, str] | None = None,
    exclude_directories: Iterable[str] = (),
) -> list[tuple[str, str]]:
    """
    Find the microservices under a root directory.

    Every innermost directory holding a build descriptor is one microservice; when no
    descriptor exists the root itself is the only microservice.

    :param: root_path
        The directory to search.

    :param: service_map
        Map from directory name or relative path to logical service name.

    :param: exclude_directories
        Directory names not searched.

    :return:
        The sorted (service name, directory) pairs.

    """

    if not os.path.isdir(root_path):
        raise UnreadableTreeError(root_path, "not a directory")

    service_map = service_map or {}
    excluded = set(exclude_directories)
    candidates: list[str] = []
    for directory, subdirectories, filenames in os.walk(root_path):
        subdirectories[:] = sorted(
            subdirectory for subdirectory in subdirectories if subdirectory not in excluded
        )
        if any(descriptor in filenames for descriptor in BUILD_DESCRIPTORS):
            candidates.append(os.path.normpath(directory))

    innermost = [
        candidate
        for candidate in candidates
        if not any(
            other != candidate and other.startswith(candidate + os.sep)
            for other in candidates
        )
    ] or [os.path.normpath(root_path)]

    services: dict[str, str] = {}
    for directory in innermost:
        relative = os.path.relpath(directory, root_path).replace(os.sep, "/")
        basename = os.path.basename(os.path.abspath(directory))
        name = service_map.get(relative, service_map.get(basename, basename))
        if name in services:
            raise DuplicateServiceError(name)
        services[name] = directory

    return sorted(services.items())
