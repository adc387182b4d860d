"""Tokenizer for SimpleDB source text."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

KEYWORDS = frozenset(
    """
    MODEL ENDMODEL TABLE PRIMARY KEY FOREIGN REFERENCES
    IF THEN ELSE ENDIF WHILE DO ENDWHILE TRUE FALSE NIL HEAD TAIL
    READ LOAD SELECT FROM WHERE NEXT CATCH INSERT INTO VALUES UPDATE SET DELETE
    COMMIT ROLLBACK
    """.split()
)

# longest first so '&&' wins over a hypothetical '&'
PUNCT = ("&&", "||", "(", ")", ";", ",", ".", "[", "]", "=", "<", ">", "+", "-", "*", "/", "!")

_WS = " \t\r\n"


class LexError(Exception):
    def __init__(self, line: int, col: int, char: str, message: str = ""):
        self.line = line
        self.col = col
        self.char = char
        super().__init__(message or f"unexpected character {char!r}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'KW', 'IDENT', 'NAT', 'PUNCT'
    value: str
    line: int
    col: int

    def __repr__(self) -> str:
        if self.kind == "KW":
            return f"KW_{self.value}"
        if self.kind == "PUNCT":
            return repr(self.value)
        return f"{self.kind}({self.value!r})"


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    i, n = 0, len(source)
    line, col = 1, 1

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in source[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = source[i]
        if ch in _WS:
            advance(1)
            continue
        if ch.isascii() and ch.isalpha():
            j = i + 1
            while j < n and source[j].isascii() and source[j].isalnum():
                j += 1
            word = source[i:j]
            kind = "KW" if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, line, col))
            advance(j - i)
            continue
        if ch.isascii() and ch.isdigit():
            j = i + 1
            while j < n and source[j].isascii() and source[j].isdigit():
                j += 1
            if j < n and source[j].isascii() and source[j].isalpha():
                raise LexError(line, col + (j - i), source[j],
                               "a natural number must be separated from a following identifier")
            digits = source[i:j]
            if len(digits) > 1 and digits[0] == "0":
                raise LexError(line, col, ch, "naturals other than 0 may not start with 0")
            tokens.append(Token("NAT", digits, line, col))
            advance(j - i)
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                tokens.append(Token("PUNCT", p, line, col))
                advance(len(p))
                break
        else:
            raise LexError(line, col, ch)
    return tokens
