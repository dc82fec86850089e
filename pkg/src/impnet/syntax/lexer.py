from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError


@dataclass(frozen=True)
class Token:
    kind: str  # "ip", "int", "ident", "sym", "eof"
    text: str
    line: int
    column: int
    index: int  # 1-based position in the token stream


_TOKENS = [
    ("ws", r"[ \t\r]+"),
    ("nl", r"\n"),
    ("comment", r"#[^\n]*"),
    ("ip", r"\d+\.\d+\.\d+\.\d+"),
    ("int", r"\d+"),
    ("ident", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("sym", r":=|>>|==|!=|<=|>=|[<>+\-*=;,(){}\[\]\\.]"),
]
_MASTER = re.compile("|".join(f"(?P<{k}>{p})" for k, p in _TOKENS))


def tokenize(text: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _MASTER.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1,
                             len(out) + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, m.start() - line_start + 1, len(out) + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1, len(out) + 1))
    return out
