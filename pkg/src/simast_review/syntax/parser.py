"""Recursive-descent parser for a method-level subset of Java.

Attribute labels follow the javalang naming convention (``MethodDeclaration``,
``LocalVariableDeclaration``, ``IfStatement``, ``MethodInvocation`` ...) because the
simplifier's keep-rule is a substring test on those names.

Punctuation and delimiters (braces, parentheses, brackets, commas, semicolons, dots) never
become nodes. Statement keywords (``if``, ``else``, ``while``, ``for``, ``return``) are carried
by the statement's attribute label rather than by a code leaf, as javalang does.
"""

from __future__ import annotations

from simast_review.errors import ParseError
from simast_review.syntax.lexer import Token, TokenType, tokenize
from simast_review.syntax.tree import Ast, AstNode


MODIFIERS = frozenset(
    {"public", "private", "protected", "static", "final", "abstract", "synchronized"}
)
BASIC_TYPES = frozenset({"void", "int", "long", "short", "byte", "char", "boolean", "float", "double"})
LITERAL_KEYWORDS = frozenset({"true", "false", "null"})
LITERAL_TYPES = frozenset({TokenType.NUMBER, TokenType.STRING, TokenType.CHAR})

BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}

_code = AstNode.code
_attr = AstNode.attribute


class _MethodParser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.index = 0

    # token stream helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.index + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        if token.type is not TokenType.END:
            self.index += 1
        return token

    def at(self, value: str) -> bool:
        return self.peek().is_(value)

    def error(self, token: Token, message: str) -> ParseError:
        if token.type is TokenType.END:
            return ParseError(token.offset, f"{message}, reached end of input")
        return ParseError(token.offset, f"{message}, found {token.value!r}")

    def expect(self, value: str) -> Token:
        token = self.peek()
        if not token.is_(value):
            if value == "}" and token.type is TokenType.END:
                raise ParseError(token.offset, "unbalanced braces")
            raise self.error(token, f"expected {value!r}")
        return self.advance()

    def expect_identifier(self) -> Token:
        token = self.peek()
        if token.type is not TokenType.IDENTIFIER:
            raise self.error(token, "expected identifier")
        return self.advance()

    # declarations

    def parse_method(self) -> AstNode:
        children: list[AstNode] = []
        modifiers = self.parse_modifiers()
        if modifiers is not None:
            children.append(modifiers)
        children.append(self.parse_type())
        children.append(_code(self.expect_identifier().value))
        self.expect("(")
        if not self.at(")"):
            children.append(self.parse_formal_parameter())
            while self.at(","):
                self.advance()
                children.append(self.parse_formal_parameter())
        self.expect(")")
        children.extend(self.parse_block().children)
        token = self.peek()
        if token.type is not TokenType.END:
            raise self.error(token, "unexpected token after method body")
        return _attr("MethodDeclaration", *children)

    def parse_modifiers(self) -> AstNode | None:
        found = []
        while self.peek().type is TokenType.KEYWORD and self.peek().value in MODIFIERS:
            found.append(_code(self.advance().value))
        return _attr("modifiers", *found) if found else None

    def parse_type(self) -> AstNode:
        token = self.peek()
        if token.type is TokenType.KEYWORD and token.value in BASIC_TYPES:
            node = _attr("BasicType", _code(self.advance().value))
        elif token.type is TokenType.IDENTIFIER:
            names = [_code(self.advance().value)]
            while self.at(".") and self.peek(1).type is TokenType.IDENTIFIER:
                self.advance()
                names.append(_code(self.advance().value))
            node = _attr("ReferenceType", *names)
        else:
            raise self.error(token, "expected type")
        # array dimensions are dropped
        while self.at("["):
            self.advance()
            self.expect("]")
        return node

    def parse_formal_parameter(self) -> AstNode:
        children: list[AstNode] = []
        modifiers = self.parse_modifiers()
        if modifiers is not None:
            children.append(modifiers)
        children.append(self.parse_type())
        children.append(_code(self.expect_identifier().value))
        return _attr("FormalParameter", *children)

    def looks_like_declaration(self) -> bool:
        token = self.peek()
        if token.type is TokenType.KEYWORD:
            return token.value in BASIC_TYPES or token.value in MODIFIERS
        if token.type is not TokenType.IDENTIFIER:
            return False
        ahead = 1
        while self.peek(ahead).is_(".") and self.peek(ahead + 1).type is TokenType.IDENTIFIER:
            ahead += 2
        while self.peek(ahead).is_("[") and self.peek(ahead + 1).is_("]"):
            ahead += 2
        return self.peek(ahead).type is TokenType.IDENTIFIER

    def parse_local_variable(self) -> AstNode:
        children: list[AstNode] = []
        modifiers = self.parse_modifiers()
        if modifiers is not None:
            children.append(modifiers)
        children.append(self.parse_type())
        children.append(self.parse_declarator())
        while self.at(","):
            self.advance()
            children.append(self.parse_declarator())
        return _attr("LocalVariableDeclaration", *children)

    def parse_declarator(self) -> AstNode:
        name = _code(self.expect_identifier().value)
        if self.at("="):
            operator = _code(self.advance().value)
            return _attr("VariableDeclarator", name, operator, self.parse_expression())
        return _attr("VariableDeclarator", name)

    # statements

    def parse_block(self) -> AstNode:
        self.expect("{")
        statements = []
        while not self.at("}"):
            if self.peek().type is TokenType.END:
                raise ParseError(self.peek().offset, "unbalanced braces")
            statement = self.parse_statement()
            if statement is not None:
                statements.append(statement)
        self.expect("}")
        return _attr("BlockStatement", *statements)

    def parse_statement(self) -> AstNode | None:
        token = self.peek()
        if token.is_("{"):
            return self.parse_block()
        if token.is_(";"):
            self.advance()
            return None
        if token.type is TokenType.KEYWORD:
            if token.value == "if":
                return self.parse_if()
            if token.value == "while":
                self.advance()
                condition = self.parse_condition()
                return _attr("WhileStatement", condition, self.parse_body())
            if token.value == "for":
                return self.parse_for()
            if token.value == "return":
                self.advance()
                value = None if self.at(";") else self.parse_expression()
                self.expect(";")
                return _attr("ReturnStatement", *([value] if value is not None else []))
        if self.looks_like_declaration():
            declaration = self.parse_local_variable()
            self.expect(";")
            return declaration
        if token.type is TokenType.END:
            raise ParseError(token.offset, "unbalanced braces")
        expression = self.parse_expression()
        self.expect(";")
        return _attr("StatementExpression", expression)

    def parse_body(self) -> AstNode:
        body = self.parse_statement()
        return body if body is not None else _attr("BlockStatement")

    def parse_condition(self) -> AstNode:
        self.expect("(")
        condition = self.parse_expression()
        self.expect(")")
        return condition

    def parse_if(self) -> AstNode:
        self.advance()
        children = [self.parse_condition(), self.parse_body()]
        if self.at("else"):
            self.advance()
            children.append(self.parse_body())
        return _attr("IfStatement", *children)

    def parse_for(self) -> AstNode:
        self.advance()
        self.expect("(")
        control: list[AstNode] = []
        if not self.at(";"):
            if self.looks_like_declaration():
                control.append(self.parse_local_variable())
            else:
                control.extend(self.parse_expression_list())
        self.expect(";")
        if not self.at(";"):
            control.append(self.parse_expression())
        self.expect(";")
        if not self.at(")"):
            control.extend(self.parse_expression_list())
        self.expect(")")
        return _attr("ForStatement", _attr("ForControl", *control), self.parse_body())

    # expressions

    def parse_expression_list(self) -> list[AstNode]:
        expressions = [self.parse_expression()]
        while self.at(","):
            self.advance()
            expressions.append(self.parse_expression())
        return expressions

    def parse_expression(self) -> AstNode:
        left = self.parse_binary(1)
        if self.at("="):
            operator = _code(self.advance().value)
            return _attr("Assignment", left, operator, self.parse_expression())
        return left

    def parse_binary(self, min_precedence: int) -> AstNode:
        left = self.parse_primary()
        while True:
            token = self.peek()
            precedence = BINARY_PRECEDENCE.get(token.value) if token.type is TokenType.OPERATOR else None
            if precedence is None or precedence < min_precedence:
                return left
            self.advance()
            right = self.parse_binary(precedence + 1)
            left = _attr("BinaryOperation", left, _code(token.value), right)

    def parse_arguments(self) -> list[AstNode]:
        self.expect("(")
        arguments = []
        if not self.at(")"):
            arguments = self.parse_expression_list()
        self.expect(")")
        return arguments

    def parse_primary(self) -> AstNode:
        token = self.peek()
        if token.is_("("):
            self.advance()
            node = self.parse_expression()
            self.expect(")")
        elif token.type in LITERAL_TYPES or (
            token.type is TokenType.KEYWORD and token.value in LITERAL_KEYWORDS
        ):
            node = _attr("Literal", _code(self.advance().value))
        elif token.type is TokenType.IDENTIFIER:
            names = [_code(self.advance().value)]
            while self.at(".") and self.peek(1).type is TokenType.IDENTIFIER:
                self.advance()
                names.append(_code(self.advance().value))
            if self.at("("):
                node = _attr("MethodInvocation", *names, *self.parse_arguments())
            else:
                node = _attr("MemberReference", *names)
        else:
            raise self.error(token, "unexpected token in expression")
        return self.parse_selectors(node)

    def parse_selectors(self, node: AstNode) -> AstNode:
        while self.at("."):
            self.advance()
            member = _code(self.expect_identifier().value)
            if self.at("("):
                node = _attr("MethodInvocation", node, member, *self.parse_arguments())
            else:
                node = _attr("MemberReference", node, member)
        return node


def parse_subset(fragment: str) -> Ast:
    """Parse one method-level fragment into an Ast rooted at ``MethodDeclaration``."""
    if not fragment.strip():
        raise ParseError(0, "empty source fragment")
    return Ast(_MethodParser(fragment).parse_method())
