#!/usr/bin/python3.10
########################################################################################
# ir_model.py - The intermediate-representation module for microsar.                   #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 14/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
The intermediate representation (IR) of a microservice system.

The IR has two dimensions: per-microservice components connected by a component call
graph, and cross-service dependency edges (remote calls and data overlaps). All types
are immutable values once constructed. This module also owns component identity,
content hashing and the JSON document formats for IRs and deltas.

"""

import dataclasses
import enum
import hashlib
import json
import re

from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Pattern

from .__utils__ import EmptyInputError, MalformedDocumentError

__all__ = (
    "ChangeKind",
    "Change",
    "Component",
    "component_id",
    "ComponentId",
    "ComponentType",
    "Delta",
    "DependencyEdge",
    "deserialize_delta",
    "deserialize_ir",
    "deserialize_microservice",
    "EdgeKind",
    "Endpoint",
    "Entity",
    "hash_component",
    "HttpMethod",
    "Method",
    "MicroserviceIR",
    "normalize_body",
    "normalize_path",
    "render_version_label",
    "RestCall",
    "serialize_delta",
    "serialize_ir",
    "serialize_microservice",
    "SystemIR",
    "UNRESOLVED",
    "WILDCARD",
)

# Delta schema:
#   The schema tag written into delta documents.
DELTA_SCHEMA: str = "microsar.delta/1"

# IR schema:
#   The schema tag written into system IR documents.
IR_SCHEMA: str = "microsar.ir/1"

# Service schema:
#   The schema tag written into single-microservice IR documents.
SERVICE_SCHEMA: str = "microsar.service/1"

# Unresolved:
#   Target-service marker for remote calls whose host cannot be evaluated statically.
UNRESOLVED: str = "UNRESOLVED"

# Wildcard:
#   The token replacing every path variable in endpoint and call paths.
WILDCARD: str = "{*}"

# Comment-or-literal regex:
#   Matches string and character literals, which are kept, and comments, which are
#   dropped, in a single left-to-right pass.
_COMMENT_OR_LITERAL_REGEX: Pattern[str] = re.compile(
    r'"(?:\\.|[^"\\\n])*"|\'(?:\\.|[^\'\\\n])*\'|//[^\n]*|/\*.*?\*/', re.DOTALL
)

# Path variable regex:
#   Matches a path-template variable such as `{orderId}` or `{id:[0-9]+}`.
_PATH_VARIABLE_REGEX: Pattern[str] = re.compile(r"\{[^}]*\}")

# Whitespace regex:
#   Matches runs of whitespace.
_WHITESPACE_REGEX: Pattern[str] = re.compile(r"\s+")


class ComponentType(str, enum.Enum):
    """
    The type of a component of the three-layered architecture.

    - CONTROLLER:
        A unit exposing endpoints.

    - ENTITY:
        A persisted data entity.

    - REPOSITORY:
        A data-access unit.

    - SERVICE:
        A business-logic unit.

    """

    CONTROLLER = "Controller"
    ENTITY = "Entity"
    REPOSITORY = "Repository"
    SERVICE = "Service"


class HttpMethod(str, enum.Enum):
    """The HTTP verbs recognised on endpoints and remote calls."""

    DELETE = "DELETE"
    GET = "GET"
    PATCH = "PATCH"
    POST = "POST"
    PUT = "PUT"


class ChangeKind(str, enum.Enum):
    """
    The label of a component-level change within a delta.

    - ADD:
        The component is new.

    - DELETE:
        The component was removed. `REMOVE` is accepted as an input alias.

    - MODIFY:
        The component exists in both versions with different content.

    """

    ADD = "ADD"
    DELETE = "DELETE"
    MODIFY = "MODIFY"

    @classmethod
    def from_label(cls, label: str) -> "ChangeKind":
        """
        Parse a change label, canonicalising `REMOVE` to `DELETE`.

        :param: label
            The label to parse.

        :return:
            The matching :class:`ChangeKind`.

        """

        if label.upper() == "REMOVE":
            return cls.DELETE
        return cls(label.upper())


class EdgeKind(str, enum.Enum):
    """The kind of a cross-service dependency edge."""

    DATA_OVERLAP = "DataOverlap"
    REMOTE_CALL = "RemoteCall"


@dataclass(frozen=True, order=True)
class ComponentId:
    """
    Identifies a component within one system version.

    Identity is name based, so it is stable across versions when the unit is unchanged
    or modified in place.

    .. attribute:: microservice
        The name of the owning microservice.

    .. attribute:: component_type
        The :class:`ComponentType` of the component.

    .. attribute:: qualified_name
        The package path and unit name, dot separated.

    """

    microservice: str
    component_type: ComponentType
    qualified_name: str

    def __str__(self) -> str:
        return self.key

    @property
    def key(self) -> str:
        """Return a flat string key for the component."""

        return f"{self.microservice}:{self.component_type.value}:{self.qualified_name}"

    @property
    def simple_name(self) -> str:
        """Return the unqualified unit name."""

        return self.qualified_name.rsplit(".", 1)[-1]


def component_id(
    service_name: str, ctype: ComponentType, qualified_name: str
) -> ComponentId:
    """
    Build a :class:`ComponentId`.

    :param: service_name
        The name of the owning microservice.

    :param: ctype
        The component type.

    :param: qualified_name
        The dot-separated qualified name of the unit.

    :return:
        The component id.

    """

    if not service_name:
        raise EmptyInputError("A component id needs a non-empty microservice name.")
    if not qualified_name:
        raise EmptyInputError("A component id needs a non-empty qualified name.")

    return ComponentId(service_name, ComponentType(ctype), qualified_name)


@dataclass(frozen=True, order=True)
class RestCall:
    """
    Represents a remote call made from a component method.

    .. attribute:: http_method
        The HTTP verb of the call.

    .. attribute:: target_service
        The called service name, or :data:`UNRESOLVED`.

    .. attribute:: path
        The normalized path template.

    .. attribute:: site_method
        The qualified name of the enclosing method.

    .. attribute:: owning_component
        The :class:`ComponentId` of the calling component.

    """

    http_method: HttpMethod
    target_service: str
    path: str
    site_method: str
    owning_component: ComponentId

    @property
    def key(self) -> tuple[HttpMethod, str]:
        """Return the (verb, path) key used for matching."""

        return (self.http_method, self.path)

    @property
    def identity(self) -> str:
        """Return a stable identity string for the call."""

        return (
            f"{self.owning_component.key}#{self.site_method}:"
            f"{self.http_method.value} {self.target_service}{self.path}"
        )


@dataclass(frozen=True, order=True)
class Endpoint:
    """
    Represents an endpoint exposed by a controller.

    .. attribute:: http_method
        The HTTP verb of the endpoint.

    .. attribute:: path
        The normalized path template.

    .. attribute:: handler_method
        The name of the handler method.

    .. attribute:: owning_component
        The :class:`ComponentId` of the controller.

    """

    http_method: HttpMethod
    path: str
    handler_method: str
    owning_component: ComponentId

    @property
    def key(self) -> tuple[HttpMethod, str]:
        """Return the (verb, path) key used for matching."""

        return (self.http_method, self.path)

    @property
    def identity(self) -> str:
        """Return a stable identity string for the endpoint."""

        return f"{self.owning_component.key}:{self.http_method.value} {self.path}"


@dataclass(frozen=True)
class Method:
    """
    Represents a method of a component.

    .. attribute:: name
        The method name.

    .. attribute:: parameters
        The ordered (name, declared type) parameters.

    .. attribute:: return_type
        The declared return type.

    .. attribute:: annotations
        The annotation markers on the method, with their arguments.

    .. attribute:: body_call_targets
        Call signatures `<receiverTypeHint>.<method>/<arity>` found in the body.

    .. attribute:: rest_calls
        The remote calls made from the body.

    .. attribute:: return_object_calls
        The `<method>/<arity>` calls made on values of the return type.

    .. attribute:: content_hash
        The digest of the normalized body text.

    """

    name: str
    parameters: tuple[tuple[str, str], ...] = ()
    return_type: str = "void"
    annotations: tuple[str, ...] = ()
    body_call_targets: tuple[str, ...] = ()
    rest_calls: tuple[RestCall, ...] = ()
    return_object_calls: tuple[str, ...] = ()
    content_hash: str = ""

    @property
    def arity(self) -> int:
        """Return the number of parameters."""

        return len(self.parameters)

    @property
    def signature(self) -> str:
        """Return a readable signature."""

        parameter_types = ", ".join(declared for _, declared in self.parameters)
        return f"{self.return_type} {self.name}({parameter_types})"

    @property
    def member_hash(self) -> str:
        """Return the digest of the method as a component member."""

        return _digest(
            [
                "method",
                self.name,
                [list(parameter) for parameter in self.parameters],
                self.return_type,
                sorted(self.annotations),
                sorted(self.body_call_targets),
                sorted(call.identity for call in self.rest_calls),
                sorted(self.return_object_calls),
                self.content_hash,
            ]
        )


@dataclass(frozen=True)
class Entity:
    """
    Represents a data entity.

    .. attribute:: name
        The entity name.

    .. attribute:: fields
        The (field name, declared type) pairs, sorted.

    .. attribute:: annotations
        The annotation markers on the entity type.

    """

    name: str
    fields: tuple[tuple[str, str], ...] = ()
    annotations: tuple[str, ...] = ()

    @property
    def field_names(self) -> frozenset[str]:
        """Return the lower-cased field names."""

        return frozenset(name.lower() for name, _ in self.fields)


@dataclass(frozen=True)
class Component:
    """
    Represents a typed code unit of a microservice.

    .. attribute:: id
        The :class:`ComponentId`.

    .. attribute:: methods
        The methods of the unit, in canonical order.

    .. attribute:: endpoints
        The endpoints exposed (controllers only).

    .. attribute:: entity
        The entity definition (entities only).

    .. attribute:: supertypes
        The raw extends/implements clauses.

    .. attribute:: fields
        The declared instance fields as (name, declared type).

    .. attribute:: content_hash
        The digest over all member hashes.

    .. attribute:: source_path
        The repository-relative path of the defining file; not part of equality.

    """

    id: ComponentId
    methods: tuple[Method, ...] = ()
    endpoints: tuple[Endpoint, ...] = ()
    entity: Entity | None = None
    supertypes: tuple[str, ...] = ()
    fields: tuple[tuple[str, str], ...] = ()
    content_hash: str = ""
    source_path: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.endpoints and self.id.component_type != ComponentType.CONTROLLER:
            raise ValueError(f"Only controllers may own endpoints: {self.id}")
        if (self.entity is not None) != (
            self.id.component_type == ComponentType.ENTITY
        ):
            raise ValueError(f"Entity definition must be present iff entity: {self.id}")

    @classmethod
    def build(
        cls,
        id: ComponentId,
        methods: Iterable[Method] = (),
        endpoints: Iterable[Endpoint] = (),
        entity: Entity | None = None,
        supertypes: Iterable[str] = (),
        fields: Iterable[tuple[str, str]] = (),
        source_path: str = "",
    ) -> "Component":
        """
        Build a component with canonically ordered members and its content hash.

        :return:
            The :class:`Component`.

        """

        component = cls(
            id=id,
            methods=tuple(
                sorted(methods, key=lambda method: (method.name, method.parameters))
            ),
            endpoints=tuple(sorted(endpoints)),
            entity=entity,
            supertypes=tuple(supertypes),
            fields=tuple(fields),
            source_path=source_path,
        )
        return dataclasses.replace(component, content_hash=hash_component(component))

    @property
    def rest_calls(self) -> Iterator[RestCall]:
        """Iterate over the remote calls made by the component."""

        for method in self.methods:
            yield from method.rest_calls

    def method(self, name: str, arity: int) -> Method | None:
        """Return the method with the given name and arity, if any."""

        for method in self.methods:
            if method.name == name and method.arity == arity:
                return method
        return None


@dataclass(frozen=True)
class MicroserviceIR:
    """
    The component call graph of one microservice at one version.

    .. attribute:: name
        The microservice name.

    .. attribute:: version_id
        The opaque version of the source tree (commit hash or directory label).

    .. attribute:: components
        Mapping from :class:`ComponentId` to :class:`Component`.

    .. attribute:: call_graph_edges
        The caller -> callee component pairs.

    .. attribute:: warnings
        Extraction warnings; not serialized and not part of equality.

    """

    name: str
    version_id: str
    components: dict[ComponentId, Component] = field(default_factory=dict)
    call_graph_edges: frozenset[tuple[ComponentId, ComponentId]] = frozenset()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        for source, target in self.call_graph_edges:
            if source not in self.components or target not in self.components:
                raise ValueError(
                    f"Call-graph edge {source} -> {target} references an unknown "
                    "component."
                )

    @property
    def endpoints(self) -> Iterator[Endpoint]:
        """Iterate over all endpoints of the microservice."""

        for component in self.components.values():
            yield from component.endpoints

    @property
    def rest_calls(self) -> Iterator[RestCall]:
        """Iterate over all remote calls of the microservice."""

        for component in self.components.values():
            yield from component.rest_calls


@dataclass(frozen=True)
class DependencyEdge:
    """
    A cross-service dependency edge.

    .. attribute:: kind
        The :class:`EdgeKind`.

    .. attribute:: source
        The source component.

    .. attribute:: target
        The target component.

    .. attribute:: call
        The matched remote call (remote-call edges only).

    .. attribute:: endpoint
        The matched endpoint (remote-call edges only).

    .. attribute:: similarity
        The entity similarity in [0, 1] (data-overlap edges only).

    """

    kind: EdgeKind
    source: ComponentId
    target: ComponentId
    call: RestCall | None = None
    endpoint: Endpoint | None = None
    similarity: float | None = None

    def __post_init__(self) -> None:
        if self.source.microservice == self.target.microservice:
            raise ValueError(f"Dependency edges must cross services: {self.source}")


def render_version_label(services: dict[str, MicroserviceIR]) -> str:
    """
    Render the system version label from the per-service versions.

    :param: services
        The microservices of the system.

    :return:
        The `name@version` pairs joined by commas, in service-name order.

    """

    return ",".join(
        f"{name}@{services[name].version_id}" for name in sorted(services)
    )


@dataclass(frozen=True)
class SystemIR:
    """
    The whole-system intermediate representation.

    .. attribute:: version_label
        The system version label.

    .. attribute:: services
        Mapping from microservice name to :class:`MicroserviceIR`.

    .. attribute:: cross_edges
        The cross-service :class:`DependencyEdge` set.

    """

    version_label: str
    services: dict[str, MicroserviceIR] = field(default_factory=dict)
    cross_edges: frozenset[DependencyEdge] = frozenset()

    def __post_init__(self) -> None:
        for edge in self.cross_edges:
            for endpoint_id in (edge.source, edge.target):
                if self.component(endpoint_id) is None:
                    raise ValueError(
                        f"Cross edge references unknown component {endpoint_id}."
                    )

    def component(self, id: ComponentId) -> Component | None:
        """Return the component with the given id, if present."""

        service = self.services.get(id.microservice)
        if service is None:
            return None
        return service.components.get(id)

    @property
    def components(self) -> Iterator[Component]:
        """Iterate over all components of the system in id order."""

        for name in sorted(self.services):
            service = self.services[name]
            for id in sorted(service.components):
                yield service.components[id]

    @property
    def endpoints(self) -> Iterator[Endpoint]:
        """Iterate over all endpoints of the system."""

        for component in self.components:
            yield from component.endpoints

    @property
    def rest_calls(self) -> Iterator[RestCall]:
        """Iterate over all remote calls of the system."""

        for component in self.components:
            yield from component.rest_calls


@dataclass(frozen=True)
class Change:
    """
    A component-level change within a delta.

    .. attribute:: kind
        The :class:`ChangeKind`.

    .. attribute:: component_id
        The changed component.

    .. attribute:: new_component
        The new component content (ADD and MODIFY).

    .. attribute:: old_content_hash
        The content hash of the replaced component (MODIFY and DELETE).

    """

    kind: ChangeKind
    component_id: ComponentId
    new_component: Component | None = None
    old_content_hash: str | None = None

    def __post_init__(self) -> None:
        if (self.new_component is None) != (self.kind == ChangeKind.DELETE):
            raise ValueError(f"{self.kind.value} change carries wrong content.")
        if (self.old_content_hash is None) != (self.kind == ChangeKind.ADD):
            raise ValueError(f"{self.kind.value} change carries wrong old hash.")
        if (
            self.new_component is not None
            and self.new_component.id != self.component_id
        ):
            raise ValueError(f"Change content does not match {self.component_id}.")


@dataclass(frozen=True)
class Delta:
    """
    The component-level difference between two versions of one microservice.

    .. attribute:: microservice
        The microservice name.

    .. attribute:: old_version_id
        The version the delta applies to.

    .. attribute:: new_version_id
        The version the delta produces.

    .. attribute:: changes
        The changes, ordered by component id.

    """

    microservice: str
    old_version_id: str
    new_version_id: str
    changes: tuple[Change, ...] = ()

    def __post_init__(self) -> None:
        seen: set[ComponentId] = set()
        for change in self.changes:
            if change.component_id in seen:
                raise ValueError(f"Component {change.component_id} changed twice.")
            if change.component_id.microservice != self.microservice:
                raise ValueError(
                    f"Change of {change.component_id} outside {self.microservice}."
                )
            seen.add(change.component_id)

    @property
    def changed_ids(self) -> frozenset[ComponentId]:
        """Return the ids of all changed components."""

        return frozenset(change.component_id for change in self.changes)

    def change_for(self, id: ComponentId) -> Change | None:
        """Return the change of the given component, if any."""

        for change in self.changes:
            if change.component_id == id:
                return change
        return None


def _digest(payload: Any) -> str:
    """Return the SHA-256 hex digest of a JSON-serializable payload."""

    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    ).hexdigest()


def normalize_body(text: str) -> str:
    """
    Normalize method-body text for hashing.

    Comments outside literals are removed and whitespace runs collapse to one space.

    :param: text
        The raw body text.

    :return:
        The normalized text.

    """

    def _keep_literals(match: re.Match) -> str:
        token = match.group(0)
        return " " if token.startswith("/") else token

    stripped = _COMMENT_OR_LITERAL_REGEX.sub(_keep_literals, text)
    return _WHITESPACE_REGEX.sub(" ", stripped).strip()


def body_hash(text: str) -> str:
    """Return the content hash of a method body."""

    return hashlib.sha256(normalize_body(text).encode("utf-8")).hexdigest()


def normalize_path(path: str) -> str:
    """
    Normalize an endpoint or call path template.

    :param: path
        The raw path.

    :return:
        The path with a leading `/`, no repeated or trailing `/` and every variable
        replaced by :data:`WILDCARD`.

    """

    path = _PATH_VARIABLE_REGEX.sub(WILDCARD, path.strip())
    path = path.split("?", 1)[0]
    if not path.startswith("/"):
        path = f"/{path}"
    path = re.sub(r"/{2,}", "/", path)
    if len(path) > 1 and path.endswith("/"):
        path = path[:-1]
    return path


def is_normalized_path(path: str) -> bool:
    """Return whether a path satisfies the normalization invariant."""

    return path.startswith("/") and all(
        variable == WILDCARD for variable in _PATH_VARIABLE_REGEX.findall(path)
    )


def hash_component(component: Component) -> str:
    """
    Compute the content hash of a component.

    The digest is taken over the sorted member hashes, so it does not depend on member
    order but changes with any body, signature, endpoint, field or entity change.

    :param: component
        The component to hash.

    :return:
        The hex digest.

    """

    member_hashes: list[str] = [method.member_hash for method in component.methods]
    member_hashes.extend(
        _digest(
            [
                "endpoint",
                endpoint.http_method.value,
                endpoint.path,
                endpoint.handler_method,
            ]
        )
        for endpoint in component.endpoints
    )
    member_hashes.extend(
        _digest(["field", name, declared]) for name, declared in component.fields
    )
    member_hashes.extend(
        _digest(["supertype", supertype]) for supertype in component.supertypes
    )
    if component.entity is not None:
        member_hashes.append(
            _digest(
                [
                    "entity",
                    component.entity.name,
                    sorted(list(entry) for entry in component.entity.fields),
                    sorted(component.entity.annotations),
                ]
            )
        )

    return _digest(sorted(member_hashes))


########################################################################################
# Document formats                                                                     #
########################################################################################


def _dump(document: dict[str, Any]) -> bytes:
    """Serialize a document deterministically."""

    return (json.dumps(document, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _load(data: bytes | str, schema: str) -> dict[str, Any]:
    """Parse a document and check its schema tag."""

    try:
        document = json.loads(data)
    except json.JSONDecodeError as error:
        raise MalformedDocumentError(
            f"line {error.lineno} column {error.colno}", error.msg
        ) from None
    except UnicodeDecodeError as error:
        raise MalformedDocumentError("$", str(error)) from None

    if not isinstance(document, dict):
        raise MalformedDocumentError("$", "document is not an object")
    if document.get("schema") != schema:
        raise MalformedDocumentError(
            "$.schema", f"expected '{schema}', found {document.get('schema')!r}"
        )

    return document


def _require(document: Any, key: str, kind: type | tuple, location: str) -> Any:
    """
    Return a required value of a document object.

    :param: document
        The JSON object.

    :param: key
        The key to read.

    :param: kind
        The expected Python type(s) of the value.

    :param: location
        The location of the object, used in error messages.

    """

    if not isinstance(document, dict):
        raise MalformedDocumentError(location, "expected an object")
    if key not in document:
        raise MalformedDocumentError(f"{location}.{key}", "missing required key")
    value = document[key]
    if not isinstance(value, kind):
        raise MalformedDocumentError(
            f"{location}.{key}", f"unexpected type {type(value).__name__}"
        )
    return value


def _enum_value(enum_type: type[enum.Enum], value: Any, location: str) -> Any:
    """Parse an enum value or raise a located error."""

    try:
        if enum_type is ChangeKind:
            return ChangeKind.from_label(value)
        return enum_type(value)
    except (ValueError, AttributeError):
        raise MalformedDocumentError(location, f"unknown value {value!r}") from None


def _path_value(document: Any, location: str) -> str:
    """Read a path and check the normalization invariant."""

    path = _require(document, "path", str, location)
    if not is_normalized_path(path):
        raise MalformedDocumentError(f"{location}.path", f"path {path!r} not normalized")
    return path


def _id_document(id: ComponentId) -> dict[str, str]:
    return {
        "componentType": id.component_type.value,
        "microservice": id.microservice,
        "qualifiedName": id.qualified_name,
    }


def _id_from_document(document: Any, location: str) -> ComponentId:
    return ComponentId(
        _require(document, "microservice", str, location),
        _enum_value(
            ComponentType,
            _require(document, "componentType", str, location),
            f"{location}.componentType",
        ),
        _require(document, "qualifiedName", str, location),
    )


def _pairs_document(pairs: Iterable[tuple[str, str]]) -> list[dict[str, str]]:
    return [{"name": name, "type": declared} for name, declared in pairs]


def _pairs_from_document(document: Any, location: str) -> tuple[tuple[str, str], ...]:
    if not isinstance(document, list):
        raise MalformedDocumentError(location, "expected a list")
    return tuple(
        (
            _require(entry, "name", str, f"{location}[{index}]"),
            _require(entry, "type", str, f"{location}[{index}]"),
        )
        for index, entry in enumerate(document)
    )


def _strings_from_document(document: Any, key: str, location: str) -> tuple[str, ...]:
    values = _require(document, key, list, location)
    for index, value in enumerate(values):
        if not isinstance(value, str):
            raise MalformedDocumentError(f"{location}.{key}[{index}]", "expected a string")
    return tuple(values)


def _rest_call_document(call: RestCall) -> dict[str, Any]:
    return {
        "httpMethod": call.http_method.value,
        "owningComponent": _id_document(call.owning_component),
        "path": call.path,
        "siteMethod": call.site_method,
        "targetService": call.target_service,
    }


def _rest_call_from_document(document: Any, location: str) -> RestCall:
    return RestCall(
        _enum_value(
            HttpMethod,
            _require(document, "httpMethod", str, location),
            f"{location}.httpMethod",
        ),
        _require(document, "targetService", str, location),
        _path_value(document, location),
        _require(document, "siteMethod", str, location),
        _id_from_document(
            _require(document, "owningComponent", dict, location),
            f"{location}.owningComponent",
        ),
    )


def _endpoint_document(endpoint: Endpoint) -> dict[str, Any]:
    return {
        "handlerMethod": endpoint.handler_method,
        "httpMethod": endpoint.http_method.value,
        "owningComponent": _id_document(endpoint.owning_component),
        "path": endpoint.path,
    }


def _endpoint_from_document(document: Any, location: str) -> Endpoint:
    return Endpoint(
        _enum_value(
            HttpMethod,
            _require(document, "httpMethod", str, location),
            f"{location}.httpMethod",
        ),
        _path_value(document, location),
        _require(document, "handlerMethod", str, location),
        _id_from_document(
            _require(document, "owningComponent", dict, location),
            f"{location}.owningComponent",
        ),
    )


def _method_document(method: Method) -> dict[str, Any]:
    return {
        "annotations": list(method.annotations),
        "bodyCallTargets": list(method.body_call_targets),
        "contentHash": method.content_hash,
        "name": method.name,
        "parameters": _pairs_document(method.parameters),
        "restCalls": [_rest_call_document(call) for call in method.rest_calls],
        "returnObjectCalls": list(method.return_object_calls),
        "returnType": method.return_type,
    }


def _method_from_document(document: Any, location: str) -> Method:
    return Method(
        name=_require(document, "name", str, location),
        parameters=_pairs_from_document(
            _require(document, "parameters", list, location), f"{location}.parameters"
        ),
        return_type=_require(document, "returnType", str, location),
        annotations=_strings_from_document(document, "annotations", location),
        body_call_targets=_strings_from_document(document, "bodyCallTargets", location),
        rest_calls=tuple(
            _rest_call_from_document(entry, f"{location}.restCalls[{index}]")
            for index, entry in enumerate(
                _require(document, "restCalls", list, location)
            )
        ),
        return_object_calls=_strings_from_document(
            document, "returnObjectCalls", location
        ),
        content_hash=_require(document, "contentHash", str, location),
    )


def _component_document(component: Component) -> dict[str, Any]:
    return {
        "contentHash": component.content_hash,
        "endpoints": [_endpoint_document(endpoint) for endpoint in component.endpoints],
        "entity": (
            None
            if component.entity is None
            else {
                "annotations": list(component.entity.annotations),
                "fields": _pairs_document(component.entity.fields),
                "name": component.entity.name,
            }
        ),
        "fields": _pairs_document(component.fields),
        "id": _id_document(component.id),
        "methods": [_method_document(method) for method in component.methods],
        "sourcePath": component.source_path,
        "supertypes": list(component.supertypes),
    }


def _component_from_document(document: Any, location: str) -> Component:
    entity_document = _require(document, "entity", (dict, type(None)), location)
    entity = (
        None
        if entity_document is None
        else Entity(
            name=_require(entity_document, "name", str, f"{location}.entity"),
            fields=_pairs_from_document(
                _require(entity_document, "fields", list, f"{location}.entity"),
                f"{location}.entity.fields",
            ),
            annotations=_strings_from_document(
                entity_document, "annotations", f"{location}.entity"
            ),
        )
    )
    try:
        component = Component(
            id=_id_from_document(
                _require(document, "id", dict, location), f"{location}.id"
            ),
            methods=tuple(
                _method_from_document(entry, f"{location}.methods[{index}]")
                for index, entry in enumerate(
                    _require(document, "methods", list, location)
                )
            ),
            endpoints=tuple(
                _endpoint_from_document(entry, f"{location}.endpoints[{index}]")
                for index, entry in enumerate(
                    _require(document, "endpoints", list, location)
                )
            ),
            entity=entity,
            supertypes=_strings_from_document(document, "supertypes", location),
            fields=_pairs_from_document(
                _require(document, "fields", list, location), f"{location}.fields"
            ),
            content_hash=_require(document, "contentHash", str, location),
            source_path=_require(document, "sourcePath", str, location),
        )
    except ValueError as error:
        raise MalformedDocumentError(location, str(error)) from None

    if hash_component(component) != component.content_hash:
        raise MalformedDocumentError(
            f"{location}.contentHash", "content hash does not match the members"
        )

    return component


def _service_document(service: MicroserviceIR) -> dict[str, Any]:
    return {
        "callGraphEdges": [
            {"from": _id_document(source), "to": _id_document(target)}
            for source, target in sorted(service.call_graph_edges)
        ],
        "components": [
            _component_document(service.components[id])
            for id in sorted(service.components)
        ],
        "name": service.name,
        "versionId": service.version_id,
    }


def _service_from_document(document: Any, location: str) -> MicroserviceIR:
    name = _require(document, "name", str, location)
    components: dict[ComponentId, Component] = {}
    for index, entry in enumerate(_require(document, "components", list, location)):
        component = _component_from_document(entry, f"{location}.components[{index}]")
        if component.id.microservice != name:
            raise MalformedDocumentError(
                f"{location}.components[{index}].id", f"component outside '{name}'"
            )
        if component.id in components:
            raise MalformedDocumentError(
                f"{location}.components[{index}].id", "duplicate component id"
            )
        components[component.id] = component

    edges: set[tuple[ComponentId, ComponentId]] = set()
    for index, entry in enumerate(
        _require(document, "callGraphEdges", list, location)
    ):
        edge_location = f"{location}.callGraphEdges[{index}]"
        source = _id_from_document(
            _require(entry, "from", dict, edge_location), f"{edge_location}.from"
        )
        target = _id_from_document(
            _require(entry, "to", dict, edge_location), f"{edge_location}.to"
        )
        if source not in components or target not in components:
            raise MalformedDocumentError(edge_location, "edge references unknown component")
        edges.add((source, target))

    return MicroserviceIR(
        name=name,
        version_id=_require(document, "versionId", str, location),
        components=components,
        call_graph_edges=frozenset(edges),
    )


def _edge_document(edge: DependencyEdge) -> dict[str, Any]:
    if edge.kind == EdgeKind.REMOTE_CALL:
        evidence: dict[str, Any] = {
            "call": _rest_call_document(edge.call),
            "endpoint": _endpoint_document(edge.endpoint),
        }
    else:
        evidence = {"similarity": edge.similarity}

    return {
        "evidence": evidence,
        "kind": edge.kind.value,
        "source": _id_document(edge.source),
        "target": _id_document(edge.target),
    }


def _edge_from_document(document: Any, location: str) -> DependencyEdge:
    kind = _enum_value(
        EdgeKind, _require(document, "kind", str, location), f"{location}.kind"
    )
    evidence = _require(document, "evidence", dict, location)
    source = _id_from_document(
        _require(document, "source", dict, location), f"{location}.source"
    )
    target = _id_from_document(
        _require(document, "target", dict, location), f"{location}.target"
    )
    try:
        if kind == EdgeKind.REMOTE_CALL:
            return DependencyEdge(
                kind,
                source,
                target,
                call=_rest_call_from_document(
                    _require(evidence, "call", dict, f"{location}.evidence"),
                    f"{location}.evidence.call",
                ),
                endpoint=_endpoint_from_document(
                    _require(evidence, "endpoint", dict, f"{location}.evidence"),
                    f"{location}.evidence.endpoint",
                ),
            )
        similarity = _require(evidence, "similarity", (int, float), f"{location}.evidence")
        if not 0 <= similarity <= 1:
            raise MalformedDocumentError(
                f"{location}.evidence.similarity", "similarity outside [0, 1]"
            )
        return DependencyEdge(kind, source, target, similarity=float(similarity))
    except ValueError as error:
        raise MalformedDocumentError(location, str(error)) from None


def serialize_microservice(service: MicroserviceIR) -> bytes:
    """
    Serialize a single microservice IR.

    :param: service
        The :class:`MicroserviceIR` to serialize.

    :return:
        The key-sorted JSON document.

    """

    return _dump({"schema": SERVICE_SCHEMA, "service": _service_document(service)})


def deserialize_microservice(data: bytes | str) -> MicroserviceIR:
    """
    Deserialize a single microservice IR.

    :param: data
        The JSON document.

    :return:
        The :class:`MicroserviceIR`.

    """

    document = _load(data, SERVICE_SCHEMA)
    return _service_from_document(_require(document, "service", dict, "$"), "$.service")


def serialize_ir(ir: SystemIR) -> bytes:
    """
    Serialize a system IR into a single JSON document.

    :param: ir
        The :class:`SystemIR` to serialize.

    :return:
        The key-sorted JSON document; equal IRs give byte-equal documents.

    """

    return _dump(
        {
            "crossEdges": [
                _edge_document(edge)
                for edge in sorted(ir.cross_edges, key=_edge_sort_key)
            ],
            "schema": IR_SCHEMA,
            "services": {
                name: _service_document(ir.services[name]) for name in sorted(ir.services)
            },
            "versionLabel": ir.version_label,
        }
    )


def _edge_sort_key(edge: DependencyEdge) -> tuple:
    return (
        edge.kind.value,
        edge.source,
        edge.target,
        edge.call.identity if edge.call is not None else "",
        edge.endpoint.identity if edge.endpoint is not None else "",
    )


def deserialize_ir(data: bytes | str) -> SystemIR:
    """
    Deserialize a system IR document.

    :param: data
        The JSON document.

    :return:
        The :class:`SystemIR`.

    """

    document = _load(data, IR_SCHEMA)
    services: dict[str, MicroserviceIR] = {}
    for name, entry in _require(document, "services", dict, "$").items():
        try:
            service = _service_from_document(entry, f"$.services.{name}")
        except ValueError as error:
            raise MalformedDocumentError(f"$.services.{name}", str(error)) from None
        if service.name != name:
            raise MalformedDocumentError(f"$.services.{name}.name", "name mismatch")
        services[name] = service

    edges: set[DependencyEdge] = set()
    for index, entry in enumerate(_require(document, "crossEdges", list, "$")):
        location = f"$.crossEdges[{index}]"
        edge = _edge_from_document(entry, location)
        for endpoint_id in (edge.source, edge.target):
            service = services.get(endpoint_id.microservice)
            if service is None or endpoint_id not in service.components:
                raise MalformedDocumentError(
                    location, f"edge references missing component {endpoint_id}"
                )
        edges.add(edge)

    return SystemIR(
        version_label=_require(document, "versionLabel", str, "$"),
        services=services,
        cross_edges=frozenset(edges),
    )


def serialize_delta(delta: Delta) -> bytes:
    """
    Serialize a delta.

    :param: delta
        The :class:`Delta` to serialize.

    :return:
        The key-sorted JSON document.

    """

    return _dump(
        {
            "changes": [
                {
                    "changeKind": change.kind.value,
                    "componentId": _id_document(change.component_id),
                    "newComponent": (
                        None
                        if change.new_component is None
                        else _component_document(change.new_component)
                    ),
                    "oldContentHash": change.old_content_hash,
                }
                for change in delta.changes
            ],
            "microservice": delta.microservice,
            "newVersionId": delta.new_version_id,
            "oldVersionId": delta.old_version_id,
            "schema": DELTA_SCHEMA,
        }
    )


def deserialize_delta(data: bytes | str) -> Delta:
    """
    Deserialize a delta document; `REMOVE` is accepted as an alias of `DELETE`.

    :param: data
        The JSON document.

    :return:
        The :class:`Delta`.

    """

    document = _load(data, DELTA_SCHEMA)
    changes: list[Change] = []
    for index, entry in enumerate(_require(document, "changes", list, "$")):
        location = f"$.changes[{index}]"
        new_component_document = _require(
            entry, "newComponent", (dict, type(None)), location
        )
        try:
            changes.append(
                Change(
                    kind=_enum_value(
                        ChangeKind,
                        _require(entry, "changeKind", str, location),
                        f"{location}.changeKind",
                    ),
                    component_id=_id_from_document(
                        _require(entry, "componentId", dict, location),
                        f"{location}.componentId",
                    ),
                    new_component=(
                        None
                        if new_component_document is None
                        else _component_from_document(
                            new_component_document, f"{location}.newComponent"
                        )
                    ),
                    old_content_hash=_require(
                        entry, "oldContentHash", (str, type(None)), location
                    ),
                )
            )
        except ValueError as error:
            raise MalformedDocumentError(location, str(error)) from None

    try:
        return Delta(
            microservice=_require(document, "microservice", str, "$"),
            old_version_id=_require(document, "oldVersionId", str, "$"),
            new_version_id=_require(document, "newVersionId", str, "$"),
            changes=tuple(changes),
        )
    except ValueError as error:
        raise MalformedDocumentError("$.changes", str(error)) from None
