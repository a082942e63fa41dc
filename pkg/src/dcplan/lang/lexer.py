"""Tokenizer for .dcl source text."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto
from typing import List


class TokenType(Enum):
    IDENT = auto()      # lowercase-initial identifier
    VARIABLE = auto()   # uppercase or underscore-initial identifier
    INT = auto()
    FLOAT = auto()
    SECTION = auto()    # #clauses / #actions / #control
    LPAREN = auto()
    RPAREN = auto()
    LBRACE = auto()
    RBRACE = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    COMMA = auto()
    DOT = auto()
    SEMI = auto()
    PIPE = auto()
    QUESTION = auto()
    COLON = auto()
    DOUBLECOLON = auto()
    TILDE = auto()
    EVALOP = auto()     # ~=
    ARROW = auto()      # <-
    FATARROW = auto()   # =>
    PLUS = auto()
    MINUS = auto()
    STAR_OP = auto()    # *
    SLASH = auto()
    LT = auto()
    GT = auto()
    LE = auto()
    GE = auto()
    EQEQ = auto()
    NEQ = auto()
    EQ = auto()
    EOF = auto()


@dataclass
class Token:
    type: TokenType
    value: str
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.type.name}, {self.value!r}, {self.line}:{self.col})"


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"at line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


_PUNCT = {
    "(": TokenType.LPAREN,
    ")": TokenType.RPAREN,
    "{": TokenType.LBRACE,
    "}": TokenType.RBRACE,
    "[": TokenType.LBRACKET,
    "]": TokenType.RBRACKET,
    ",": TokenType.COMMA,
    ".": TokenType.DOT,
    ";": TokenType.SEMI,
    "|": TokenType.PIPE,
    "?": TokenType.QUESTION,
    "+": TokenType.PLUS,
    "-": TokenType.MINUS,
    "*": TokenType.STAR_OP,
    "/": TokenType.SLASH,
}


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def skip_ws_and_comments(self):
        while self.pos < len(self.text):
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "%":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            else:
                break

    def read_number(self) -> Token:
        line, col = self.line, self.col
        buf = []
        is_float = False
        while self.peek().isdigit():
            buf.append(self.advance())
        if self.peek() == "." and self.peek(1).isdigit():
            is_float = True
            buf.append(self.advance())
            while self.peek().isdigit():
                buf.append(self.advance())
        if self.peek() in ("e", "E") and (
            self.peek(1).isdigit()
            or (self.peek(1) in "+-" and self.peek(2).isdigit())
        ):
            is_float = True
            buf.append(self.advance())
            if self.peek() in "+-":
                buf.append(self.advance())
            while self.peek().isdigit():
                buf.append(self.advance())
        text = "".join(buf)
        return Token(TokenType.FLOAT if is_float else TokenType.INT, text, line, col)

    def read_ident(self) -> Token:
        line, col = self.line, self.col
        buf = []
        while self.peek().isalnum() or self.peek() == "_":
            buf.append(self.advance())
        text = "".join(buf)
        kind = (
            TokenType.VARIABLE
            if text[0].isupper() or text[0] == "_"
            else TokenType.IDENT
        )
        return Token(kind, text, line, col)

    def read_fraction_float(self) -> Token:
        # A float written without a leading zero, e.g. .6
        line, col = self.line, self.col
        buf = [self.advance()]  # the dot
        while self.peek().isdigit():
            buf.append(self.advance())
        return Token(TokenType.FLOAT, "".join(buf), line, col)

    def next_token(self) -> Token:
        self.skip_ws_and_comments()
        line, col = self.line, self.col
        if self.pos >= len(self.text):
            return Token(TokenType.EOF, "", line, col)
        ch = self.peek()

        if ch == "#":
            self.advance()
            if not (self.peek().isalpha()):
                raise LexError("expected section name after '#'", line, col)
            name = []
            while self.peek().isalnum():
                name.append(self.advance())
            return Token(TokenType.SECTION, "".join(name), line, col)

        if ch.isdigit():
            return self.read_number()
        if ch == "." and self.peek(1).isdigit():
            return self.read_fraction_float()
        if ch.isalpha() or ch == "_":
            return self.read_ident()

        # multi-char operators first
        if ch == "~":
            self.advance()
            if self.peek() == "=":
                self.advance()
                return Token(TokenType.EVALOP, "~=", line, col)
            return Token(TokenType.TILDE, "~", line, col)
        if ch == "<":
            self.advance()
            if self.peek() == "-":
                self.advance()
                return Token(TokenType.ARROW, "<-", line, col)
            if self.peek() == "=":
                self.advance()
                return Token(TokenType.LE, "<=", line, col)
            return Token(TokenType.LT, "<", line, col)
        if ch == ">":
            self.advance()
            if self.peek() == "=":
                self.advance()
                return Token(TokenType.GE, ">=", line, col)
            return Token(TokenType.GT, ">", line, col)
        if ch == "=":
            self.advance()
            if self.peek() == ">":
                self.advance()
                return Token(TokenType.FATARROW, "=>", line, col)
            if self.peek() == "=":
                self.advance()
                return Token(TokenType.EQEQ, "==", line, col)
            return Token(TokenType.EQ, "=", line, col)
        if ch == "!":
            self.advance()
            if self.peek() == "=":
                self.advance()
                return Token(TokenType.NEQ, "!=", line, col)
            raise LexError("unexpected character '!'", line, col)
        if ch == ":":
            self.advance()
            if self.peek() == ":":
                self.advance()
                return Token(TokenType.DOUBLECOLON, "::", line, col)
            return Token(TokenType.COLON, ":", line, col)

        if ch in _PUNCT:
            self.advance()
            return Token(_PUNCT[ch], ch, line, col)

        raise LexError(f"unexpected character {ch!r}", line, col)

    def tokenize(self) -> List[Token]:
        out = []
        while True:
            tok = self.next_token()
            out.append(tok)
            if tok.type == TokenType.EOF:
                return out


def tokenize(text: str) -> List[Token]:
    return Lexer(text).tokenize()
