"""JSON interchange format for ASTs produced by external parsers.

A document is a single node object ``{"kind": "code"|"attribute", "label": str,
"children": [node, ...]}``; code nodes must carry an empty ``children`` list.

Nodes are validated one at a time and documents are read and written with explicit stacks,
so nesting depth is bounded by memory, not by the interpreter's recursion limit.
"""

from __future__ import annotations

import json
import re
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from simast_review.errors import InterchangeSchemaError, ParseError
from simast_review.syntax.tree import Ast, AstNode, NodeKind


class InterchangeNode(BaseModel):
    """Schema of one interchange node; ``children`` are checked when they are visited."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["code", "attribute"]
    label: str = Field(min_length=1)
    children: list[Any]

    @model_validator(mode="after")
    def _code_nodes_are_leaves(self) -> InterchangeNode:
        if self.kind == "code" and self.children:
            raise ValueError("code node with children")
        return self


_RULES = {
    "literal_error": "unknown kind",
    "string_too_short": "empty label",
    "missing": "missing field",
    "extra_forbidden": "unknown field",
}


def _schema_error(exc: ValidationError, path: str) -> InterchangeSchemaError:
    first = exc.errors()[0]
    path += "".join(f"[{part}]" if isinstance(part, int) else f".{part}" for part in first["loc"])
    if first["type"] == "value_error":
        rule = str(first.get("ctx", {}).get("error", first["msg"]))
    else:
        rule = _RULES.get(first["type"], first["msg"])
    return InterchangeSchemaError(rule, path)


def _validate(document: Any, path: str) -> InterchangeNode:
    try:
        return InterchangeNode.model_validate(document)
    except ValidationError as exc:
        raise _schema_error(exc, path) from exc


def ingest_node(document: Any) -> Ast:
    """Validate an already-decoded interchange object and build the Ast."""
    root = _validate(document, "$")
    if root.kind != "attribute":
        raise InterchangeSchemaError("root must be an attribute node")
    # post-order over (node, JSON path, built children) frames
    stack: list[tuple[InterchangeNode, str, list[AstNode]]] = [(root, "$", [])]
    while True:
        node, path, built = stack[-1]
        if len(built) < len(node.children):
            child_path = f"{path}.children[{len(built)}]"
            stack.append((_validate(node.children[len(built)], child_path), child_path, []))
            continue
        stack.pop()
        finished = AstNode(NodeKind(node.kind), node.label, tuple(built))
        if not stack:
            return Ast(finished)
        stack[-1][2].append(finished)


_WHITESPACE = re.compile(r"[ \t\n\r]*")
_SCALARS = json.JSONDecoder()


def _skip(text: str, pos: int) -> int:
    match = _WHITESPACE.match(text, pos)
    return match.end() if match else pos


def _scalar(text: str, pos: int) -> tuple[Any, int]:
    if pos >= len(text):
        raise ParseError(pos, "malformed JSON: Expecting value")
    try:
        return _SCALARS.raw_decode(text, pos)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.pos, f"malformed JSON: {exc.msg}") from exc


def _key(text: str, pos: int) -> tuple[str, int]:
    if not text.startswith('"', pos):
        raise ParseError(pos, "malformed JSON: Expecting property name enclosed in double quotes")
    key, pos = _scalar(text, pos)
    pos = _skip(text, pos)
    if not text.startswith(":", pos):
        raise ParseError(pos, "malformed JSON: Expecting ':' delimiter")
    return key, _skip(text, pos + 1)


def _decode(text: str) -> Any:
    """Decode JSON text; containers are tracked on a stack, scalars go to the stdlib decoder."""
    containers: list[dict[str, Any] | list[Any]] = []
    keys: list[str] = []
    pos = _skip(text, 0)
    while True:
        value: Any
        opener = text[pos : pos + 1]
        if opener in ("{", "["):
            container: dict[str, Any] | list[Any] = {} if opener == "{" else []
            pos = _skip(text, pos + 1)
            if text.startswith("}" if opener == "{" else "]", pos):
                value, pos = container, pos + 1
            else:
                containers.append(container)
                if isinstance(container, dict):
                    key, pos = _key(text, pos)
                    keys.append(key)
                continue
        else:
            value, pos = _scalar(text, pos)

        while True:
            if not containers:
                end = _skip(text, pos)
                if end != len(text):
                    raise ParseError(end, "malformed JSON: Extra data")
                return value
            top = containers[-1]
            if isinstance(top, dict):
                top[keys.pop()] = value
            else:
                top.append(value)
            pos = _skip(text, pos)
            if text.startswith(",", pos):
                pos = _skip(text, pos + 1)
                if isinstance(top, dict):
                    key, pos = _key(text, pos)
                    keys.append(key)
                break
            closer = "}" if isinstance(top, dict) else "]"
            if not text.startswith(closer, pos):
                raise ParseError(pos, f"malformed JSON: Expecting ',' or {closer!r}")
            value, pos = containers.pop(), pos + 1


def ingest_interchange(document: str) -> Ast:
    """Parse interchange JSON text into an Ast."""
    return ingest_node(_decode(document))


def emit_interchange(ast: Ast) -> str:
    """Serialize an Ast to interchange JSON text (``json.dumps`` layout)."""
    parts: list[str] = []
    stack: list[AstNode | str] = [ast.root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
            continue
        label = json.dumps(item.label, ensure_ascii=False)
        parts.append(f'{{"kind": "{item.kind.value}", "label": {label}, "children": [')
        stack.append("]}")
        for index in reversed(range(len(item.children))):
            stack.append(item.children[index])
            if index:
                stack.append(", ")
    return "".join(parts)
