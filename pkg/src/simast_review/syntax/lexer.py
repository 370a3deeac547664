"""Tokenizer for the method-level Java subset."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from simast_review.errors import ParseError


class TokenType(Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    NUMBER = "number"
    STRING = "string"
    CHAR = "char"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"
    END = "end"


KEYWORDS = frozenset(
    {
        "public", "private", "protected", "static", "final", "abstract", "synchronized",
        "void", "int", "long", "short", "byte", "char", "boolean", "float", "double",
        "if", "else", "while", "for", "return", "true", "false", "null",
    }
)  # fmt: skip

# Longest operators first so "<=" wins over "<".
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<char>'(?:[^'\\\n]|\\.)')
  | (?P<number>\d+(?:\.\d+)?[lLfFdD]?)
  | (?P<word>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<operator>==|!=|<=|>=|&&|\|\||[-+*/%<>=])
  | (?P<punctuation>[{}()\[\],;.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    type: TokenType
    value: str
    offset: int

    def is_(self, value: str) -> bool:
        return self.value == value and self.type is not TokenType.STRING


def tokenize(text: str) -> list[Token]:
    """Split source text into tokens, ending with an END token at ``len(text)``."""
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if match is None:
            raise ParseError(position, f"unexpected character {text[position]!r}")
        kind = match.lastgroup
        value = match.group()
        if kind == "word":
            token_type = TokenType.KEYWORD if value in KEYWORDS else TokenType.IDENTIFIER
            tokens.append(Token(token_type, value, position))
        elif kind != "ws":
            tokens.append(Token(TokenType(kind), value, position))
        position = match.end()
    tokens.append(Token(TokenType.END, "", len(text)))
    return tokens
