"""Tests for the lexer and the method-level subset parser."""

import pytest

from simast_review.errors import ParseError
from simast_review.syntax.lexer import TokenType, tokenize
from simast_review.syntax.parser import parse_subset
from simast_review.syntax.tree import AstNode, iter_preorder


code = AstNode.code
attr = AstNode.attribute


def shape(node: AstNode) -> tuple:
    """Nested (label, children) tuples for readable structural asserts."""
    return (node.label, tuple(shape(child) for child in node.children))


class TestTokenize:
    """Token stream produced by the lexer."""

    def test_two_character_operators_win(self):
        """``<=`` is one operator, not ``<`` then ``=``."""
        tokens = tokenize("a <= b")
        assert [t.value for t in tokens[:-1]] == ["a", "<=", "b"]
        assert tokens[1].type is TokenType.OPERATOR

    def test_keywords_and_identifiers(self):
        tokens = tokenize("return value")
        assert tokens[0].type is TokenType.KEYWORD
        assert tokens[1].type is TokenType.IDENTIFIER

    def test_end_token_sits_at_text_length(self):
        text = "int x"
        assert tokenize(text)[-1].type is TokenType.END
        assert tokenize(text)[-1].offset == len(text)

    def test_unknown_character_reports_offset(self):
        """Characters outside the subset raise at their offset."""
        with pytest.raises(ParseError) as info:
            tokenize("a ? b")
        assert info.value.position == 2


class TestParseSubset:
    """Trees produced for small methods."""

    def test_return_literal(self):
        tree = parse_subset("int f(){ return 0; }")
        expected = attr(
            "MethodDeclaration",
            attr("BasicType", code("int")),
            code("f"),
            attr("ReturnStatement", attr("Literal", code("0"))),
        )
        assert shape(tree.root) == shape(expected)

    def test_empty_return(self):
        """A bare ``return;`` has no expression child."""
        tree = parse_subset("int f(){ return ; }")
        statement = tree.root.children[-1]
        assert statement.label == "ReturnStatement"
        assert statement.children == ()

    def test_hello_world_shape(self, hello_world):
        """Modifiers and the println invocation spine appear as expected."""
        root = parse_subset(hello_world).root
        assert root.label == "MethodDeclaration"
        modifiers = root.children[0]
        assert shape(modifiers) == shape(attr("modifiers", code("public"), code("static")))
        statement = root.children[-1]
        assert statement.label == "StatementExpression"
        invocation = statement.children[0]
        assert invocation.label == "MethodInvocation"
        leaves = [child.label for child in invocation.children if child.is_code]
        assert leaves == ["System", "out", "println"]
        literal = invocation.children[-1]
        assert literal.label == "Literal"
        assert "Hello World" in literal.children[0].label

    def test_punctuation_never_becomes_a_node(self, hello_world):
        labels = {node.label for node in iter_preorder(parse_subset(hello_world).root)}
        assert not labels & {"{", "}", "(", ")", ";", ".", ",", "[", "]"}

    def test_statement_keywords_live_in_labels(self):
        """``if`` and ``return`` are carried by the statement labels, not by leaves."""
        tree = parse_subset("int f(int x){ if (x == null) { return 0; } return x; }")
        labels = [node.label for node in iter_preorder(tree.root)]
        assert "IfStatement" in labels
        assert "if" not in labels
        assert "return" not in labels

    def test_binary_precedence(self):
        """``a + b * c`` groups the product first."""
        tree = parse_subset("int f(){ return a + b * c; }")
        expression = tree.root.children[-1].children[0]
        assert expression.label == "BinaryOperation"
        assert [child.label for child in expression.children[:2]] == ["MemberReference", "+"]
        assert expression.children[2].label == "BinaryOperation"

    def test_for_loop_with_declaration(self):
        tree = parse_subset("void f(int n){ for (int i = 0; i < n; i = i + 1) { g(i); } }")
        loop = tree.root.children[-1]
        assert loop.label == "ForStatement"
        assert loop.children[0].label == "ForControl"
        assert loop.children[0].children[0].label == "LocalVariableDeclaration"

    def test_if_else(self):
        tree = parse_subset("int f(int x){ if (x > 0) return 1; else return 2; }")
        statement = tree.root.children[-1]
        assert statement.label == "IfStatement"
        assert len(statement.children) == 3


class TestParseErrors:
    """Inputs outside the subset."""

    def test_unbalanced_braces_fail_at_end(self):
        text = "void f(){ int x = 1;"
        with pytest.raises(ParseError, match="unbalanced braces") as info:
            parse_subset(text)
        assert info.value.position == len(text)

    def test_trailing_tokens(self):
        with pytest.raises(ParseError, match="after method body"):
            parse_subset("void f(){ } x")

    def test_empty_fragment(self):
        with pytest.raises(ParseError):
            parse_subset("   ")

    @pytest.mark.parametrize("text", ["void f(){ x = ; }", "void (){ }", "void f({ }"])
    def test_malformed_methods(self, text):
        with pytest.raises(ParseError) as info:
            parse_subset(text)
        assert 0 <= info.value.position <= len(text)
