"""XSS vector corpus: vector records, test-case expansion, test-page rendering.

A corpus pairs a list of quirk vectors with the web contexts and encodings
they are exercised in.  Each (vector, context, encoding) triple becomes one
test case whose attribute name is the dash-joined id triple, e.g. vector 90
in context 2 with encoding 1 is ``90-2-1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusError

# Every vector template must contain this token exactly once; it is replaced
# by the (already payload_format-encoded) payload at render time.
PLACEHOLDER = "{{PAYLOAD}}"


class VectorSource(enum.Enum):
    RSNAKE = "rsnake"
    HTML5SEC = "html5sec"
    SHAZZER = "shazzer"


class PayloadFormat(enum.Enum):
    IDENTITY = "identity"
    BASE64 = "base64"
    EXTERNAL_JS_URL = "external_js_url"


@dataclass(frozen=True)
class QuirkVector:
    id: int
    source: VectorSource
    template: str
    payload_format: PayloadFormat
    description: str = ""

    def __post_init__(self) -> None:
        if self.id <= 0:
            raise CorpusError(f"vector id must be positive, got {self.id}")
        if self.template.count(PLACEHOLDER) != 1:
            raise CorpusError(
                f"vector {self.id}: template must contain {PLACEHOLDER!r} exactly once "
                f"(found {self.template.count(PLACEHOLDER)})"
            )


@dataclass(frozen=True)
class WebContext:
    id: int
    doctype_preamble: str
    mime_type: str = "text/html"


@dataclass(frozen=True)
class Encoding:
    id: int
    charset_name: str


# Context 1 renders with no doctype at all, which drops legacy browsers into
# quirks mode; context 2 uses the html5 doctype.
DEFAULT_CONTEXTS = (
    WebContext(id=1, doctype_preamble="", mime_type="text/html"),
    WebContext(id=2, doctype_preamble="<!DOCTYPE html>", mime_type="text/html"),
)
DEFAULT_ENCODINGS = (Encoding(id=1, charset_name="utf-8"),)


@dataclass(frozen=True)
class TestCase:
    vector_id: int
    context_id: int
    encoding_id: int

    @property
    def attribute_name(self) -> str:
        return f"{self.vector_id}-{self.context_id}-{self.encoding_id}"


def parse_attribute_name(name: str) -> TestCase:
    """Recover the (vector, context, encoding) triple from an attribute name."""
    parts = name.split("-")
    if len(parts) != 3:
        raise CorpusError(f"attribute name {name!r} is not a V-C-E triple")
    try:
        vector_id, context_id, encoding_id = (int(p) for p in parts)
    except ValueError:
        raise CorpusError(f"attribute name {name!r} has non-integer components") from None
    return TestCase(vector_id=vector_id, context_id=context_id, encoding_id=encoding_id)


@dataclass
class Corpus:
    vectors: list[QuirkVector]
    contexts: list[WebContext] = field(default_factory=lambda: list(DEFAULT_CONTEXTS))
    encodings: list[Encoding] = field(default_factory=lambda: list(DEFAULT_ENCODINGS))

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for v in self.vectors:
            if v.id in seen:
                raise CorpusError(f"duplicate vector id {v.id}")
            seen.add(v.id)

    def vector(self, vector_id: int) -> QuirkVector:
        for v in self.vectors:
            if v.id == vector_id:
                return v
        raise CorpusError(f"unknown vector id {vector_id}")

    def context(self, context_id: int) -> WebContext:
        for c in self.contexts:
            if c.id == context_id:
                return c
        raise CorpusError(f"unknown context id {context_id}")

    def encoding(self, encoding_id: int) -> Encoding:
        for e in self.encodings:
            if e.id == encoding_id:
                return e
        raise CorpusError(f"unknown encoding id {encoding_id}")

    def source_counts(self) -> dict[str, int]:
        """Number of vectors per source plus a ``total`` entry."""
        counts = {s.value: 0 for s in VectorSource}
        for v in self.vectors:
            counts[v.source.value] += 1
        counts["total"] = len(self.vectors)
        return counts


# Corpus file records are tab-separated: id, source, payload_format,
# template, description.  Templates and descriptions use backslash escapes
# so a record never spans lines.
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\"}


def _unescape(text: str, line: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise CorpusError("dangling backslash escape", line=line)
            nxt = text[i + 1]
            if nxt not in _ESCAPES:
                raise CorpusError(f"unknown escape \\{nxt}", line=line)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape_field(text: str) -> str:
    """Inverse of the corpus-file field unescaping (used when writing corpora)."""
    return (
        text.replace("\\", "\\\\")
        .replace("\n", "\\n")
        .replace("\t", "\\t")
        .replace("\r", "\\r")
    )


def _parse_record(raw: str, line: int) -> QuirkVector:
    fields = raw.split("\t")
    if len(fields) != 5:
        raise CorpusError(f"expected 5 tab-separated fields, got {len(fields)}", line=line)
    id_text, source_text, format_text, template_text, description_text = fields
    try:
        vector_id = int(id_text)
    except ValueError:
        raise CorpusError(f"non-integer vector id {id_text!r}", line=line) from None
    try:
        source = VectorSource(source_text)
    except ValueError:
        raise CorpusError(f"unknown source {source_text!r}", line=line) from None
    try:
        payload_format = PayloadFormat(format_text)
    except ValueError:
        raise CorpusError(f"unknown payload format {format_text!r}", line=line) from None
    template = _unescape(template_text, line)
    description = _unescape(description_text, line)
    try:
        return QuirkVector(
            id=vector_id,
            source=source,
            template=template,
            payload_format=payload_format,
            description=description,
        )
    except CorpusError as exc:
        raise CorpusError(str(exc), line=line) from None


def load_corpus(
    path: str | Path,
    contexts: list[WebContext] | None = None,
    encodings: list[Encoding] | None = None,
) -> Corpus:
    """Load a corpus file (one vector record per line, ``#`` comments allowed)."""
    vectors: list[QuirkVector] = []
    seen: dict[int, int] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        vector = _parse_record(raw, line_no)
        if vector.id in seen:
            raise CorpusError(
                f"duplicate vector id {vector.id} (first seen on line {seen[vector.id]})",
                line=line_no,
            )
        seen[vector.id] = line_no
        vectors.append(vector)
    return Corpus(
        vectors=vectors,
        contexts=list(contexts) if contexts is not None else list(DEFAULT_CONTEXTS),
        encodings=list(encodings) if encodings is not None else list(DEFAULT_ENCODINGS),
    )


def dump_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to the line-delimited file format."""
    lines = []
    for v in corpus.vectors:
        lines.append(
            "\t".join(
                [
                    str(v.id),
                    v.source.value,
                    v.payload_format.value,
                    escape_field(v.template),
                    escape_field(v.description),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def expand_test_cases(corpus: Corpus) -> list[TestCase]:
    """Cross product of vectors x contexts x encodings, vector-major order."""
    return [
        TestCase(vector_id=v.id, context_id=c.id, encoding_id=e.id)
        for v in corpus.vectors
        for c in corpus.contexts
        for e in corpus.encodings
    ]


def render_test_page(tc: TestCase, corpus: Corpus, payload: str) -> tuple[str, str, str]:
    """Render the HTML document for one test case.

    ``payload`` must already be encoded per the vector's payload_format.
    Returns (html_document, mime_type, charset).
    """
    vector = corpus.vector(tc.vector_id)
    context = corpus.context(tc.context_id)
    encoding = corpus.encoding(tc.encoding_id)
    body = vector.template.replace(PLACEHOLDER, payload)
    if context.doctype_preamble:
        document = context.doctype_preamble + "\n" + body
    else:
        document = body
    return document, context.mime_type, encoding.charset_name
