"""
Hand-written lexer and recursive descent parser.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom [ "^" unary ] ;        (* right operand: integer literal >= 0 *)
    atom     = number | variable | function "(" expr ")" | "(" expr ")" ;
    variable = "x" | "u" digit19 { digit } ;
    function = "exp" | "sin" | "cos" | "tanh" | "sqrt" | "abs" | "log" | "sign" ;
    number   = digits [ "." [ digits ] ] [ exponent ] | "." digits [ exponent ] ;
"""

from collections import namedtuple
import math
import re

from quadie.exceptions import ParseError
from quadie.exprlang.nodes import (
    FUNCTIONS,
    Binary,
    Number,
    Unary,
    Variable,
    is_exponent,
    is_variable_name,
)

Token = namedtuple("Token", ["kind", "text", "pos"])

_WHITESPACE = re.compile(r"\s*")
_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPERATORS = "+-*/^()"


def tokenize(source):
    """
    Split ``source`` into tokens, ending with an ``end`` token

    Raises
    ------
    ParseError
        On a character that cannot start any token.
    """
    pos = 0
    tokens = []
    while True:
        pos = _WHITESPACE.match(source, pos).end()
        if pos >= len(source):
            tokens.append(Token("end", "", len(source)))
            return tokens
        char = source[pos]
        match = _NUMBER.match(source, pos)
        if match:
            tokens.append(Token("number", match.group(), pos))
            pos = match.end()
            continue
        match = _NAME.match(source, pos)
        if match:
            tokens.append(Token("name", match.group(), pos))
            pos = match.end()
            continue
        if char in _OPERATORS:
            tokens.append(Token("op", char, pos))
            pos += 1
            continue
        raise ParseError(f"unexpected character {char!r}", pos)


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0

    @property
    def token(self):
        return self.tokens[self.index]

    def _advance(self):
        tok = self.token
        self.index += 1
        return tok

    def _at(self, text):
        return self.token.kind == "op" and self.token.text == text

    def _expect(self, text):
        if not self._at(text):
            found = self.token.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.token.pos)
        return self._advance()

    def parse(self):
        if self.token.kind == "end":
            raise ParseError("empty expression", 0)
        node = self.expr()
        if self.token.kind != "end":
            if self._at(")"):
                raise ParseError("unbalanced ')'", self.token.pos)
            raise ParseError(f"unexpected token {self.token.text!r}", self.token.pos)
        return node

    def expr(self):
        node = self.term()
        while self._at("+") or self._at("-"):
            op = self._advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self._at("*") or self._at("/"):
            op = self._advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self._at("-"):
            self._advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if not self._at("^"):
            return base
        self._advance()
        pos = self.token.pos
        exponent = self.unary()
        if not is_exponent(exponent):
            raise ParseError("exponent must be a non-negative integer literal", pos)
        return Binary("^", base, exponent)

    def atom(self):
        tok = self.token
        if tok.kind == "number":
            self._advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ParseError(f"number {tok.text!r} out of range", tok.pos)
            return Number(value)
        if tok.kind == "name":
            self._advance()
            if tok.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Unary(tok.text, arg)
            if is_variable_name(tok.text):
                return Variable(tok.text)
            raise ParseError(f"unknown identifier {tok.text!r}", tok.pos)
        if self._at("("):
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.pos)
        raise ParseError(f"unexpected token {tok.text!r}", tok.pos)


def parse(source):
    """
    Parse expression source text into an Expr

    Parameters
    ----------
    source : str
        Expression in the variables ``x`` and ``u1 ... uN``.

    Returns
    -------
    Expr

    Raises
    ------
    ParseError
        On empty input, unknown identifiers, unbalanced parentheses or an
        exponent that is not a non-negative integer literal.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if not isinstance(source, str):
        raise TypeError(f"source must be str, not {type(source).__name__}")
    return _Parser(source).parse()
