"""quirkprint: browser fingerprinting from HTML parser quirks.

The toolkit serves XSS-derived test cases to browsers over HTTP, collects
tri-state outcome signatures (PASS / SENT / NA), and identifies browsers
by nearest-neighbor search under a modified Hamming distance plus a
gain-ratio decision tree for fast family classification.
"""

from .corpus import (
    Corpus,
    Encoding,
    PayloadFormat,
    QuirkVector,
    TestCase,
    VectorSource,
    WebContext,
    expand_test_cases,
    load_corpus,
    parse_attribute_name,
    render_test_page,
)
from .errors import QuirkprintError
from .signatures import (
    BrowserSignature,
    Outcome,
    SignatureDataset,
    confidence,
    fingerprint_efficiency,
    median_dataset_distance,
    median_family_distance,
    mhd,
    nearest_neighbors,
)
from .classifier import (
    ConfusionMatrix,
    InductionConfig,
    LabeledDataset,
    class_entropy,
    classify,
    evaluate,
    gain_ratio,
    induce_tree,
    parse_tree,
    serialize_tree,
)
from .store import export_signatures, import_signatures

__version__ = "0.1.0"

__all__ = [
    "BrowserSignature",
    "ConfusionMatrix",
    "Corpus",
    "Encoding",
    "InductionConfig",
    "LabeledDataset",
    "Outcome",
    "PayloadFormat",
    "QuirkVector",
    "QuirkprintError",
    "SignatureDataset",
    "TestCase",
    "VectorSource",
    "WebContext",
    "class_entropy",
    "classify",
    "confidence",
    "evaluate",
    "expand_test_cases",
    "export_signatures",
    "fingerprint_efficiency",
    "gain_ratio",
    "import_signatures",
    "induce_tree",
    "load_corpus",
    "median_dataset_distance",
    "median_family_distance",
    "mhd",
    "nearest_neighbors",
    "parse_attribute_name",
    "parse_tree",
    "render_test_page",
    "serialize_tree",
]
