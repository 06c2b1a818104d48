"""Minimal PDF text extraction, dependency-free.

Covers the common case this service actually receives: digitally produced
resumes whose page content streams are plain or FlateDecode-compressed and
draw text with Tj / TJ / ' / " operators. Image-only scans and exotic CID
encodings are out of scope; those surface as EmptyDocument rather than
garbage. Encrypted documents are rejected up front.
"""

from __future__ import annotations

import re
import zlib

from .errors import UnreadableDocument

_STREAM_RE = re.compile(rb"<<(.*?)>>\s*stream\r?\n(.*?)endstream", re.DOTALL)

# operators that end a text line; used to approximate reading order
_LINE_BREAK_OPS = {"T*", "Td", "TD", "'", '"'}


def extract_pdf_text(data: bytes) -> str:
    """Extract the text content of a PDF, pages in file order.

    Raises UnreadableDocument when the payload is not a PDF or is
    encrypted. Returns an empty string when the PDF is structurally fine
    but carries no extractable text (caller decides if that is an error).
    """
    if not data.lstrip().startswith(b"%PDF"):
        raise UnreadableDocument("not a PDF document")
    if re.search(rb"/Encrypt\b", data):
        raise UnreadableDocument("encrypted PDF")

    pieces: list[str] = []
    for match in _STREAM_RE.finditer(data):
        header, payload = match.group(1), match.group(2)
        if b"/Image" in header:
            continue
        if b"/FlateDecode" in header:
            try:
                content = zlib.decompress(payload)
            except zlib.error:
                continue
        elif b"/Filter" in header:
            continue  # unsupported filter; skip rather than mis-decode
        else:
            content = payload
        if b"BT" not in content:
            continue
        text = _text_from_content(content.decode("latin-1"))
        if text.strip():
            pieces.append(text)

    if not pieces and b"stream" not in data and b"obj" not in data:
        raise UnreadableDocument("no PDF objects found")
    return "\n".join(pieces)


def _text_from_content(content: str) -> str:
    """Walk a content stream, collecting shown strings in order."""
    out: list[str] = []
    pending: list[str] = []  # strings seen since the last operator
    i, n = 0, len(content)
    while i < n:
        ch = content[i]
        if ch == "(":
            text, i = _literal_string(content, i)
            pending.append(text)
        elif ch == "<" and i + 1 < n and content[i + 1] != "<":
            text, i = _hex_string(content, i)
            pending.append(text)
        elif ch == "[":
            i += 1  # TJ arrays: keep collecting strings, numbers are kerning
        elif ch == "]":
            i += 1
        elif ch.isspace():
            i += 1
        else:
            start = i
            while i < n and not content[i].isspace() and content[i] not in "([<]/%":
                i += 1
            if i == start:
                i += 1
                continue
            op = content[start:i]
            if op in ("Tj", "TJ", "'", '"'):
                out.extend(pending)
                if op in ("'", '"'):
                    out.append("\n")
            elif op in _LINE_BREAK_OPS or op == "ET":
                if out and not out[-1].endswith("\n"):
                    out.append("\n")
            pending.clear()
    return "".join(out)


def _literal_string(content: str, start: int) -> tuple[str, int]:
    """Parse a (...) literal string starting at ``start``; returns the
    decoded text and the index just past the closing paren."""
    assert content[start] == "("
    out: list[str] = []
    depth = 1
    i = start + 1
    n = len(content)
    while i < n and depth > 0:
        ch = content[i]
        if ch == "\\" and i + 1 < n:
            nxt = content[i + 1]
            if nxt in "nrtbf":
                out.append({"n": "\n", "r": "\r", "t": "\t", "b": "\b", "f": "\f"}[nxt])
                i += 2
            elif nxt in "()\\":
                out.append(nxt)
                i += 2
            elif nxt.isdigit():
                digits = content[i + 1:i + 4]
                octal = ""
                for d in digits:
                    if d.isdigit() and len(octal) < 3:
                        octal += d
                    else:
                        break
                out.append(chr(int(octal, 8) & 0xFF))
                i += 1 + len(octal)
            elif nxt in "\r\n":
                i += 2  # line continuation
            else:
                out.append(nxt)
                i += 2
        elif ch == "(":
            depth += 1
            out.append(ch)
            i += 1
        elif ch == ")":
            depth -= 1
            if depth > 0:
                out.append(ch)
            i += 1
        else:
            out.append(ch)
            i += 1
    return "".join(out), i


def _hex_string(content: str, start: int) -> tuple[str, int]:
    end = content.find(">", start)
    if end == -1:
        return "", len(content)
    digits = re.sub(r"\s", "", content[start + 1:end])
    if len(digits) % 2:
        digits += "0"
    try:
        raw = bytes.fromhex(digits)
    except ValueError:
        return "", end + 1
    return raw.decode("latin-1"), end + 1
