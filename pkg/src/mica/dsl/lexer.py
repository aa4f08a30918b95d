"""Tokenizer for .mica files.

Newlines are plain whitespace; `#` starts a comment running to end of line.
Strings are double-quoted UTF-8 with \\" \\\\ \\n \\t escapes.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ScriptSyntaxError

_PUNCT = {
    "{": "LBRACE",
    "}": "RBRACE",
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
}

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    type: str  # WORD, INT, STRING, LBRACE, RBRACE, LPAREN, RPAREN, COMMA, DOTDOT, LE, GE, LT, GT, EOF
    value: str | int
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def err(message: str, at_line: int, at_col: int) -> ScriptSyntaxError:
        return ScriptSyntaxError(at_line, at_col, message)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == ".":
            if i + 1 < n and text[i + 1] == ".":
                tokens.append(Token("DOTDOT", "..", start_line, start_col))
                i += 2
                col += 2
                continue
            raise err("unexpected '.'", start_line, start_col)
        if ch == "<":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token("LE", "<=", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(Token("LT", "<", start_line, start_col))
                i += 1
                col += 1
            continue
        if ch == ">":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token("GE", ">=", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(Token("GT", ">", start_line, start_col))
                i += 1
                col += 1
            continue
        if ch == '"':
            i += 1
            col += 1
            parts: list[str] = []
            while True:
                if i >= n:
                    raise err("unterminated string", start_line, start_col)
                c = text[i]
                if c == "\n":
                    raise err("unterminated string (newline in literal)", start_line, start_col)
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in _ESCAPES:
                        raise err("bad escape in string", line, col)
                    parts.append(_ESCAPES[text[i + 1]])
                    i += 2
                    col += 2
                    continue
                parts.append(c)
                i += 1
                col += 1
            tokens.append(Token("STRING", "".join(parts), start_line, start_col))
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", int(text[i:j]), start_line, start_col))
            col += j - i
            i = j
            continue
        if "a" <= ch <= "z":
            j = i
            while j < n and (text[j].isascii() and (text[j].isalnum() or text[j] == "_")):
                j += 1
            word = text[i:j]
            tokens.append(Token("WORD", word, start_line, start_col))
            col += j - i
            i = j
            continue
        raise err(f"unexpected character {ch!r}", start_line, start_col)

    tokens.append(Token("EOF", "", line, col))
    return tokens
