"""Rule-based sentence segmentation, shared verbatim by generation and
detection (two segmenters drifting apart is the classic way to break
sentence-level detection).

Rule: a boundary follows '.', '!' or '?' plus any run of closing quotes or
brackets, when the next character is whitespace or end of text.  Closers
attach to the sentence on their left.  Segments are the original substrings
with surrounding whitespace trimmed; nothing inside a segment is altered.
"""

from __future__ import annotations

_TERMINALS = frozenset(".!?")
_CLOSERS = frozenset("\"')]}’”»")


def split_sentences(text: str) -> list[str]:
    """Split text into sentences; text with no boundary comes back whole."""
    if not text or not text.strip():
        raise ValueError("cannot split empty text")
    out = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            j = i + 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            if j >= n or text[j].isspace():
                seg = text[start:j].strip()
                if seg:
                    out.append(seg)
                start = j
                i = j
                continue
        i += 1
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out
