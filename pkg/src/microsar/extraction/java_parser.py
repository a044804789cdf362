#!/usr/bin/python3.10
########################################################################################
# java_parser.py - The structural Java parser for microsar.                            #
#                                                                                      #
# Author: microsar developers                                                          #
# Copyright: microsar developers, 2024                                                 #
# Date created: 15/10/2024                                                             #
# License: MIT, Open-source                                                            #
########################################################################################

"""
A structural parser for Java source files built on the tree-sitter Java grammar.

Only the structure that architecture reconstruction consumes is recovered: the package,
top-level type declarations with their annotations and supertypes, fields, method
signatures and method bodies as token streams. Any syntax error or missing token in
the tree is reported as a :class:`SourceParseError`.

"""

import bisect

from dataclasses import dataclass, field
from typing import Iterator

import tree_sitter_java

from tree_sitter import Language, Node, Parser

from ..__utils__ import SourceParseError

__all__ = (
    "Annotation",
    "CallSite",
    "iter_call_sites",
    "join_tokens",
    "local_declarations",
    "parse_source",
    "ParsedField",
    "ParsedMethod",
    "ParsedSource",
    "ParsedUnit",
    "simple_type",
    "split_arguments",
    "Token",
    "tokenize",
)

# Annotation nodes:
#   Node types of annotations inside a modifier list.
_ANNOTATION_NODES: frozenset[str] = frozenset({"annotation", "marker_annotation"})

# Atomic nodes:
#   Node types kept as a single token although the grammar gives them children.
_ATOMIC_NODES: dict[str, str] = {
    "character_literal": "char",
    "string_literal": "string",
    "text_block": "string",
}

# Closing brackets:
#   Map from opening to closing bracket for balanced skipping.
_CLOSING: dict[str, str] = {"(": ")", "[": "]", "{": "}"}

# Comment nodes:
#   Node types dropped from token streams and member lists.
_COMMENT_NODES: frozenset[str] = frozenset({"block_comment", "comment", "line_comment"})

# Declaration predecessors:
#   Tokens after which a local-variable declaration may start.
_DECLARATION_PREDECESSORS: frozenset[str] = frozenset({";", "{", "}", "(", "final", ")"})

# Field nodes:
#   Node types of field declarations in class and interface bodies.
_FIELD_NODES: frozenset[str] = frozenset({"constant_declaration", "field_declaration"})

# Java language:
#   The tree-sitter grammar shared by every parser instance.
_JAVA_LANGUAGE: Language = Language(tree_sitter_java.language())

# Keywords:
#   Java keywords that never name a type or a called method.
_KEYWORDS: frozenset[str] = frozenset(
    {
        "assert",
        "break",
        "case",
        "catch",
        "continue",
        "default",
        "do",
        "else",
        "finally",
        "for",
        "if",
        "instanceof",
        "new",
        "return",
        "super",
        "switch",
        "synchronized",
        "this",
        "throw",
        "try",
        "while",
        "yield",
    }
)

# Method nodes:
#   Node types of methods and constructors in type bodies.
_METHOD_NODES: frozenset[str] = frozenset(
    {
        "annotation_type_element_declaration",
        "compact_constructor_declaration",
        "constructor_declaration",
        "method_declaration",
    }
)

# Supertype clauses:
#   Node types of the extends and implements clauses of a type declaration.
_SUPERTYPE_CLAUSES: frozenset[str] = frozenset(
    {"extends_interfaces", "super_interfaces", "superclass"}
)

# Unit kinds:
#   Map from top-level declaration node type to the unit kind.
_UNIT_KINDS: dict[str, str] = {
    "annotation_type_declaration": "@interface",
    "class_declaration": "class",
    "enum_declaration": "enum",
    "interface_declaration": "interface",
    "record_declaration": "record",
}


@dataclass(frozen=True)
class Token:
    """
    A lexical token.

    .. attribute:: kind
        One of `ident`, `string`, `char`, `number` or `symbol`.

    .. attribute:: text
        The token text.

    .. attribute:: start
        The byte offset of the first character in the UTF-8 source.

    .. attribute:: end
        The byte offset after the last character.

    .. attribute:: line
        The 1-based line number.

    """

    kind: str
    text: str
    start: int
    end: int
    line: int

    @property
    def literal_value(self) -> str:
        """Return the contents of a string literal."""

        if self.text.startswith('"""'):
            return self.text[3:-3]
        return self.text[1:-1]


@dataclass(frozen=True)
class Annotation:
    """
    An annotation on a declaration.

    .. attribute:: name
        The simple annotation name.

    .. attribute:: arguments
        The raw argument text, empty when there are no arguments.

    .. attribute:: attributes
        Map from attribute name (`value` when unnamed) to the element values; string
        literals are unquoted, other expressions are kept as text.

    """

    name: str
    arguments: str = ""
    attributes: dict[str, tuple[str, ...]] = field(default_factory=dict, compare=False)

    def __str__(self) -> str:
        if self.arguments:
            return f"@{self.name}({self.arguments})"
        return f"@{self.name}"


@dataclass(frozen=True)
class ParsedField:
    """
    A field declaration.

    .. attribute:: name
        The field name.

    .. attribute:: type
        The declared type text.

    .. attribute:: modifiers
        The declaration modifiers.

    .. attribute:: annotations
        The annotations on the declaration.

    .. attribute:: initializer
        The initializer tokens, empty when there is none.

    """

    name: str
    type: str
    modifiers: frozenset[str] = frozenset()
    annotations: tuple[Annotation, ...] = ()
    initializer: tuple[Token, ...] = ()


@dataclass(frozen=True)
class ParsedMethod:
    """
    A method or constructor declaration.

    .. attribute:: name
        The method name; constructors are named `<init>`.

    .. attribute:: parameters
        The (name, declared type) parameters.

    .. attribute:: return_type
        The declared return type.

    .. attribute:: annotations
        The annotations on the declaration.

    .. attribute:: body_text
        The source text of the body including braces, empty when abstract.

    .. attribute:: body_tokens
        The tokens between the body braces.

    """

    name: str
    parameters: tuple[tuple[str, str], ...]
    return_type: str
    annotations: tuple[Annotation, ...] = ()
    body_text: str = ""
    body_tokens: tuple[Token, ...] = ()


@dataclass(frozen=True)
class ParsedUnit:
    """
    A top-level type declaration.

    .. attribute:: package
        The package of the enclosing file.

    .. attribute:: name
        The simple type name.

    .. attribute:: kind
        One of `class`, `interface`, `enum`, `record` or `@interface`.

    .. attribute:: annotations
        The annotations on the type declaration.

    .. attribute:: supertypes
        The raw extends/implements clauses.

    .. attribute:: fields
        The field declarations.

    .. attribute:: methods
        The method and constructor declarations.

    """

    package: str
    name: str
    kind: str
    annotations: tuple[Annotation, ...] = ()
    supertypes: tuple[str, ...] = ()
    fields: tuple[ParsedField, ...] = ()
    methods: tuple[ParsedMethod, ...] = ()

    @property
    def qualified_name(self) -> str:
        """Return the package-qualified name."""

        return f"{self.package}.{self.name}" if self.package else self.name


@dataclass(frozen=True)
class ParsedSource:
    """
    A parsed source file.

    .. attribute:: package
        The declared package, empty for the default package.

    .. attribute:: units
        The top-level type declarations.

    """

    package: str
    units: tuple[ParsedUnit, ...]


@dataclass(frozen=True)
class CallSite:
    """
    A method invocation inside a body.

    .. attribute:: name
        The invoked method name.

    .. attribute:: receiver
        The receiver identifier; empty for unqualified calls, `None` when the receiver
        is an expression (e.g. a chained call).

    .. attribute:: arguments
        The argument token lists.

    """

    name: str
    receiver: str | None
    arguments: tuple[tuple[Token, ...], ...]

    @property
    def arity(self) -> int:
        """Return the number of arguments."""

        return len(self.arguments)



def join_tokens(tokens: tuple[Token, ...] | list[Token]) -> str:
    """Join tokens into compact text, spacing only between adjacent words."""

    pieces: list[str] = []
    previous: Token | None = None
    for token in tokens:
        if (
            previous is not None
            and previous.kind in ("ident", "number")
            and token.kind in ("ident", "number")
        ):
            pieces.append(" ")
        elif previous is not None and previous.text == ",":
            pieces.append(" ")
        pieces.append(token.text)
        previous = token
    return "".join(pieces)


def simple_type(type_text: str) -> str:
    """
    Return the simple name of a declared type.

    :param: type_text
        The declared type, e.g. `java.util.List<Order>`.

    :return:
        The unqualified name without type arguments, e.g. `List`.

    """

    depth = 0
    stripped: list[str] = []
    for character in type_text:
        if character == "<":
            depth += 1
        elif character == ">":
            depth -= 1
        elif depth == 0:
            stripped.append(character)
    return "".join(stripped).strip().rsplit(".", 1)[-1]


def split_arguments(tokens: list[Token] | tuple[Token, ...]) -> list[tuple[Token, ...]]:
    """
    Split tokens at top-level commas.

    :param: tokens
        The tokens between a pair of brackets.

    :return:
        The token groups; empty when there are no tokens.

    """

    if not tokens:
        return []

    groups: list[tuple[Token, ...]] = []
    current: list[Token] = []
    depth = 0
    angle_depth = 0
    for token in tokens:
        if token.text in ("(", "[", "{"):
            depth += 1
        elif token.text in (")", "]", "}"):
            depth -= 1
        elif token.text == "<" and _looks_generic(current):
            angle_depth += 1
        elif token.text == ">" and angle_depth > 0:
            angle_depth -= 1
        elif token.text == "," and depth == 0 and angle_depth == 0:
            groups.append(tuple(current))
            current = []
            continue
        current.append(token)

    groups.append(tuple(current))
    return groups


def _looks_generic(previous: list[Token]) -> bool:
    """Return whether a `<` following these tokens opens type arguments."""

    return bool(previous) and previous[-1].kind == "ident" and previous[-1].text[:1].isupper()


def _children(node: Node) -> list[Node]:
    """Return the named children of a node, without comments."""

    return [child for child in node.named_children if child.type not in _COMMENT_NODES]


def _clause_types(clause: Node) -> Iterator[Node]:
    """Iterate over the type nodes of an extends or implements clause."""

    for child in _children(clause):
        if child.type == "type_list":
            yield from _children(child)
        else:
            yield child


def _first_error(root: Node) -> Node:
    """Return the first erroneous or missing node of a tree holding an error."""

    stack = [root]
    while stack:
        node = stack.pop()
        if node.type == "ERROR" or node.is_missing:
            return node
        stack.extend(
            reversed(
                [child for child in node.children if child.has_error or child.is_missing]
            )
        )
    return root


def _parse_tree(data: bytes, path: str) -> Node:
    """
    Parse UTF-8 source into a syntax tree.

    :param: data
        The encoded source text.

    :param: path
        The file path, used in error messages.

    :return:
        The root node of the tree.

    """

    root = Parser(_JAVA_LANGUAGE).parse(data).root_node
    if not root.has_error:
        return root

    error = _first_error(root)
    if error.is_missing:
        msg = f"missing {error.type!r}"
    else:
        fragment = data[error.start_byte : error.end_byte].decode("utf-8", "replace")
        msg = f"unexpected {fragment.strip()[:20]!r}"
    raise SourceParseError(path, error.start_point[0] + 1, msg)


def _token_kind(node_type: str, text: str) -> str:
    """Return the token kind of a leaf node."""

    if node_type in _ATOMIC_NODES:
        return _ATOMIC_NODES[node_type]
    if "integer_literal" in node_type or "floating_point_literal" in node_type:
        return "number"
    if text[0].isalpha() or text[0] in "_$":
        return "ident"
    return "symbol"


def _leaf_tokens(root: Node, data: bytes) -> list[Token]:
    """Flatten the leaves of a syntax tree into tokens, dropping comments."""

    tokens: list[Token] = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.type in _COMMENT_NODES:
            continue
        if node.type in _ATOMIC_NODES or node.child_count == 0:
            if node.end_byte > node.start_byte:
                text = data[node.start_byte : node.end_byte].decode("utf-8")
                tokens.append(
                    Token(
                        _token_kind(node.type, text),
                        text,
                        node.start_byte,
                        node.end_byte,
                        node.start_point[0] + 1,
                    )
                )
            continue
        stack.extend(reversed(node.children))
    return tokens


def tokenize(text: str, path: str = "<unit>") -> list[Token]:
    """
    Split Java source text into tokens, dropping whitespace and comments.

    Statement sequences such as method bodies parse as well as whole files.

    :param: text
        The source text.

    :param: path
        The file path, used in error messages.

    :return:
        The tokens.

    """

    data = text.encode("utf-8")
    return _leaf_tokens(_parse_tree(data, path), data)


class _SourceReader:
    """
    Reads the declarations of one source file from its syntax tree.

    """

    def __init__(self, data: bytes, root: Node) -> None:
        self.data = data
        self.root = root
        self.tokens = _leaf_tokens(root, data)
        self._starts = [token.start for token in self.tokens]

    def _tokens_of(self, node: Node) -> tuple[Token, ...]:
        start = bisect.bisect_left(self._starts, node.start_byte)
        end = bisect.bisect_left(self._starts, node.end_byte)
        return tuple(self.tokens[start:end])

    def _text_of(self, node: Node) -> str:
        return join_tokens(self._tokens_of(node))

    def read(self) -> ParsedSource:
        package = ""
        units: list[ParsedUnit] = []
        for node in _children(self.root):
            if node.type == "package_declaration":
                package = next(
                    (
                        self._text_of(child)
                        for child in _children(node)
                        if child.type in ("identifier", "scoped_identifier")
                    ),
                    "",
                )
            elif node.type in _UNIT_KINDS:
                units.append(self._unit(node, package))
        return ParsedSource(package, tuple(units))

    def _modifiers(
        self, declaration: Node
    ) -> tuple[tuple[Annotation, ...], frozenset[str]]:
        annotations: list[Annotation] = []
        modifiers: set[str] = set()
        for child in declaration.children:
            if child.type != "modifiers":
                continue
            for modifier in child.children:
                if modifier.type in _ANNOTATION_NODES:
                    annotations.append(self._annotation(modifier))
                elif modifier.type not in _COMMENT_NODES:
                    modifiers.add(self._text_of(modifier))
        return tuple(annotations), frozenset(modifiers)

    def _annotation(self, node: Node) -> Annotation:
        name = self._text_of(node.child_by_field_name("name")).rsplit(".", 1)[-1]
        arguments = node.child_by_field_name("arguments")
        if arguments is None:
            return Annotation(name)

        attributes: dict[str, tuple[str, ...]] = {}
        for element in _children(arguments):
            if element.type == "element_value_pair":
                key = self._text_of(element.child_by_field_name("key"))
                attributes[key] = self._element_values(element.child_by_field_name("value"))
            else:
                attributes["value"] = self._element_values(element)
        return Annotation(name, join_tokens(self._tokens_of(arguments)[1:-1]), attributes)

    def _element_values(self, node: Node) -> tuple[str, ...]:
        """Read an annotation element value, unwrapping array initializers."""

        if node.type == "element_value_array_initializer":
            return tuple(
                value for child in _children(node) for value in self._element_values(child)
            )
        tokens = self._tokens_of(node)
        if tokens and all(token.kind == "string" or token.text == "+" for token in tokens):
            return (
                "".join(token.literal_value for token in tokens if token.kind == "string"),
            )
        return (join_tokens(tokens),)

    def _unit(self, node: Node, package: str) -> ParsedUnit:
        kind = _UNIT_KINDS[node.type]
        annotations, _ = self._modifiers(node)
        supertypes = tuple(
            self._text_of(type_node)
            for clause in node.children
            if clause.type in _SUPERTYPE_CLAUSES
            for type_node in _clause_types(clause)
        )

        record_parameters: tuple[tuple[str, str], ...] = ()
        components = node.child_by_field_name("parameters")
        if kind == "record" and components is not None:
            record_parameters = self._parameters(components)

        fields = [ParsedField(name, type_text) for name, type_text in record_parameters]
        methods: list[ParsedMethod] = []
        body = node.child_by_field_name("body")
        if body is not None:
            self._members(body, record_parameters, fields, methods)

        return ParsedUnit(
            package=package,
            name=self._text_of(node.child_by_field_name("name")),
            kind=kind,
            annotations=annotations,
            supertypes=supertypes,
            fields=tuple(fields),
            methods=tuple(methods),
        )

    def _members(
        self,
        body: Node,
        record_parameters: tuple[tuple[str, str], ...],
        fields: list[ParsedField],
        methods: list[ParsedMethod],
    ) -> None:
        """Collect the fields and methods of a type body; nested types are skipped."""

        for member in _children(body):
            if member.type == "enum_body_declarations":
                self._members(member, record_parameters, fields, methods)
            elif member.type in _FIELD_NODES:
                fields.extend(self._fields(member))
            elif member.type in _METHOD_NODES:
                methods.append(self._method(member, record_parameters))

    def _fields(self, member: Node) -> list[ParsedField]:
        annotations, modifiers = self._modifiers(member)
        type_text = self._text_of(member.child_by_field_name("type"))
        fields: list[ParsedField] = []
        for declarator in member.children_by_field_name("declarator"):
            value = declarator.child_by_field_name("value")
            fields.append(
                ParsedField(
                    self._text_of(declarator.child_by_field_name("name")),
                    type_text,
                    modifiers,
                    annotations,
                    self._tokens_of(value) if value is not None else (),
                )
            )
        return fields

    def _method(
        self, member: Node, record_parameters: tuple[tuple[str, str], ...]
    ) -> ParsedMethod:
        annotations, _ = self._modifiers(member)
        if member.type in ("method_declaration", "annotation_type_element_declaration"):
            name = self._text_of(member.child_by_field_name("name"))
            return_type = self._text_of(member.child_by_field_name("type"))
        else:
            name, return_type = "<init>", "void"

        if member.type == "compact_constructor_declaration":
            parameters = record_parameters
        elif (formal_parameters := member.child_by_field_name("parameters")) is not None:
            parameters = self._parameters(formal_parameters)
        else:
            parameters = ()

        body = member.child_by_field_name("body")
        if body is None:
            return ParsedMethod(name, parameters, return_type, annotations)
        return ParsedMethod(
            name=name,
            parameters=parameters,
            return_type=return_type,
            annotations=annotations,
            body_text=self.data[body.start_byte : body.end_byte].decode("utf-8"),
            body_tokens=self._tokens_of(body)[1:-1],
        )

    def _parameters(self, node: Node) -> tuple[tuple[str, str], ...]:
        """Read a formal-parameter list into (name, type) pairs."""

        parameters: list[tuple[str, str]] = []
        for parameter in _children(node):
            if parameter.type == "formal_parameter":
                parameters.append(
                    (
                        self._text_of(parameter.child_by_field_name("name")),
                        self._text_of(parameter.child_by_field_name("type")),
                    )
                )
            elif parameter.type == "spread_parameter":
                parts = [
                    child for child in _children(parameter) if child.type != "modifiers"
                ]
                name = parts[-1]
                if name.type == "variable_declarator":
                    name = name.child_by_field_name("name")
                parameters.append((self._text_of(name), f"{self._text_of(parts[0])}..."))
        return tuple(parameters)


def parse_source(text: str, path: str = "<unit>") -> ParsedSource:
    """
    Parse a Java source file structurally.

    :param: text
        The source text.

    :param: path
        The file path, used in error messages.

    :return:
        The :class:`ParsedSource`.

    """

    data = text.encode("utf-8")
    return _SourceReader(data, _parse_tree(data, path)).read()


def iter_call_sites(tokens: tuple[Token, ...]) -> Iterator[CallSite]:
    """
    Iterate over the method invocations in a body.

    :param: tokens
        The body tokens.

    """

    for index, token in enumerate(tokens):
        if (
            token.kind != "ident"
            or token.text in _KEYWORDS
            or index + 1 >= len(tokens)
            or tokens[index + 1].text != "("
        ):
            continue

        previous = tokens[index - 1] if index > 0 else None
        if previous is not None and (
            previous.text == "new"
            or (previous.kind == "ident" and previous.text not in _KEYWORDS)
        ):
            # Constructor invocations and declarations inside anonymous classes.
            continue

        if previous is not None and previous.text == ".":
            receiver_token = tokens[index - 2] if index > 1 else None
            if receiver_token is not None and receiver_token.kind == "ident":
                receiver: str | None = receiver_token.text
            else:
                receiver = None
        elif previous is not None and previous.text == "::":
            continue
        else:
            receiver = ""

        depth = 0
        end = index + 1
        while end < len(tokens):
            if tokens[end].text in _CLOSING:
                depth += 1
            elif tokens[end].text in _CLOSING.values():
                depth -= 1
                if depth == 0:
                    break
            end += 1

        yield CallSite(
            token.text,
            receiver,
            tuple(split_arguments(tokens[index + 2 : end])),
        )


def local_declarations(tokens: tuple[Token, ...]) -> dict[str, str]:
    """
    Find local-variable declarations in a body.

    :param: tokens
        The body tokens.

    :return:
        Map from variable name to declared type text; `var` declarations take the
        type of a `new T(...)` initializer when present.

    """

    declarations: dict[str, str] = {}
    for index, token in enumerate(tokens):
        if token.kind != "ident" or token.text in _KEYWORDS:
            continue
        if index > 0 and tokens[index - 1].text not in _DECLARATION_PREDECESSORS:
            continue

        position = index + 1
        while (
            position + 1 < len(tokens)
            and tokens[position].text == "."
            and tokens[position + 1].kind == "ident"
        ):
            position += 2
        if position < len(tokens) and tokens[position].text == "<":
            depth = 0
            while position < len(tokens):
                if tokens[position].text == "<":
                    depth += 1
                elif tokens[position].text == ">":
                    depth -= 1
                    if depth == 0:
                        position += 1
                        break
                elif tokens[position].text in (";", "{", "}", "=", "("):
                    break
                position += 1
            else:
                continue
        while (
            position + 1 < len(tokens)
            and tokens[position].text == "["
            and tokens[position + 1].text == "]"
        ):
            position += 2

        if position + 1 >= len(tokens):
            continue
        name = tokens[position]
        following = tokens[position + 1]
        if (
            name.kind != "ident"
            or name.text in _KEYWORDS
            or following.text not in ("=", ";", ":", ",")
        ):
            continue

        declared = join_tokens(tokens[index:position])
        if (
            declared == "var"
            and following.text == "="
            and position + 3 < len(tokens)
            and tokens[position + 2].text == "new"
        ):
            declared = tokens[position + 3].text
        declarations.setdefault(name.text, declared)

    return declarations
