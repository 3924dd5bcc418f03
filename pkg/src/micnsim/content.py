"""Content segmentation, naming, and the simulator's packet model.

Coded-content names follow the grammar

    /<prefix>/micn/<g>/<i>[/<coeff>(,<coeff>)*]

where ``g`` is the generation id, ``i`` the leading-index subset of the
encoding vector, and the optional last component serializes the vector's
coefficients from position i to n as decimal integers (positions before i
are zero by construction, so they are never written).  A name without the
coefficient component is an interest; with it, a data packet.

Plain (uncoded) names are ``/<prefix>/<seg>``: everything up to the last
component is the prefix, the last component is a segment number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf import Field
from .milic import sample_uniform, subset_of

CODED_MARKER = "micn"


class NameParseError(ValueError):
    """Malformed packet name; carries the character position of the fault."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Generation:
    """One coding generation: n equal-sized payload segments under a prefix."""

    prefix: str
    generation_id: int
    segments: tuple[bytes, ...]

    def __post_init__(self):
        if len(self.segments) < 1:
            raise ValueError("a generation needs at least one segment")
        sizes = {len(s) for s in self.segments}
        if len(sizes) != 1:
            raise ValueError(f"segments must be equal-sized, got sizes {sorted(sizes)}")

    @property
    def n(self) -> int:
        return len(self.segments)

    @property
    def segment_size(self) -> int:
        return len(self.segments[0])


def make_generation(prefix: str, generation_id: int, n: int, segment_size: int, rng) -> Generation:
    """Generation filled with rng-drawn payload bytes."""
    segs = tuple(bytes(rng.integers(0, 256, size=segment_size, dtype=np.uint8)) for _ in range(n))
    return Generation(prefix, generation_id, segs)


@dataclass(frozen=True)
class CodedSegment:
    """A coded data unit: encoding vector plus the matching payload bytes."""

    prefix: str
    generation_id: int
    index: int
    vector: np.ndarray
    payload: np.ndarray

    def __post_init__(self):
        if subset_of(self.vector) != self.index:
            raise ValueError(
                f"vector has leading index {subset_of(self.vector)}, declared {self.index}"
            )


@dataclass(frozen=True)
class InterestPacket:
    """Request for a coded segment with encoding vector in subset ``index``.

    ``client_id`` and ``state`` are the optional cancellation fields: the
    requesting client's identifier hash and a bitmap of the subset indices
    the client already has available (bit i-1 for index i).
    """

    prefix: str
    generation_id: int
    index: int
    nonce: int
    client_id: int | None = None
    state: int | None = None

    def name(self) -> str:
        return f"{self.prefix}/{CODED_MARKER}/{self.generation_id}/{self.index}"


@dataclass(frozen=True)
class DataPacket:
    """A coded segment in flight; the name carries the full coefficient list."""

    segment: CodedSegment

    def name(self) -> str:
        return encode_name(self.segment)


# Plain-mode packets: exact segment names, no coding.

@dataclass(frozen=True)
class PlainInterest:
    prefix: str
    segment: int
    nonce: int

    def name(self) -> str:
        return f"{self.prefix}/{self.segment}"


@dataclass(frozen=True)
class PlainData:
    prefix: str
    segment: int
    payload: bytes

    def name(self) -> str:
        return f"{self.prefix}/{self.segment}"


def encode_name(seg: CodedSegment) -> str:
    """Canonical name of a coded segment; coefficients from its index onward."""
    coeffs = ",".join(str(int(c)) for c in seg.vector[seg.index - 1:])
    return f"{seg.prefix}/{CODED_MARKER}/{seg.generation_id}/{seg.index}/{coeffs}"


@dataclass(frozen=True)
class ParsedName:
    """Header decoded from a name: interest (no vector) or data (with vector)."""

    coded: bool
    prefix: str
    generation_id: int | None = None
    index: int | None = None
    vector: np.ndarray | None = None
    segment: int | None = None

    @property
    def is_data(self) -> bool:
        return self.vector is not None


def _component_position(name: str, comp_index: int) -> int:
    """Character offset where the comp_index-th slash component starts."""
    parts = name.split("/")
    return sum(len(p) + 1 for p in parts[:comp_index])


def parse_name(name: str) -> ParsedName:
    """Parse a coded or plain name; raises NameParseError on malformed input."""
    if not name.startswith("/"):
        raise NameParseError("name must start with '/'", 0)
    parts = name.split("/")
    # Rightmost coded marker wins; a marker needs 2 (interest) or 3 (data)
    # components after it.
    marker = None
    for idx in range(len(parts) - 1, 0, -1):
        if parts[idx] == CODED_MARKER:
            marker = idx
            break
    if marker is not None:
        tail = parts[marker + 1:]
        if len(tail) not in (2, 3):
            raise NameParseError(
                f"coded name needs generation and index after '{CODED_MARKER}'",
                _component_position(name, marker),
            )
        prefix = "/".join(parts[:marker])
        try:
            gid = int(tail[0])
        except ValueError:
            raise NameParseError("generation id is not an integer",
                                 _component_position(name, marker + 1))
        try:
            index = int(tail[1])
        except ValueError:
            raise NameParseError("subset index is not an integer",
                                 _component_position(name, marker + 2))
        if index < 1:
            raise NameParseError("subset index must be positive",
                                 _component_position(name, marker + 2))
        if len(tail) == 2:
            return ParsedName(coded=True, prefix=prefix, generation_id=gid, index=index)
        coeff_pos = _component_position(name, marker + 3)
        try:
            coeffs = [int(c) for c in tail[2].split(",")]
        except ValueError:
            raise NameParseError("coefficient list is not comma-separated integers", coeff_pos)
        if not coeffs or coeffs[0] == 0:
            raise NameParseError("first serialized coefficient must be nonzero", coeff_pos)
        if any(c < 0 or c > 255 for c in coeffs):
            raise NameParseError("coefficient outside field range", coeff_pos)
        n = index - 1 + len(coeffs)
        vector = np.zeros(n, dtype=np.uint8)
        vector[index - 1:] = coeffs
        return ParsedName(coded=True, prefix=prefix, generation_id=gid,
                          index=index, vector=vector)
    # Plain name: /<prefix>/<seg>
    if len(parts) < 3 or parts[1] == "":
        raise NameParseError("plain name needs a prefix and a segment number", 0)
    try:
        seg = int(parts[-1])
    except ValueError:
        raise NameParseError("segment number is not an integer",
                             _component_position(name, len(parts) - 1))
    return ParsedName(coded=False, prefix="/".join(parts[:-1]), segment=seg)


def segment_payload(seg: CodedSegment, name: str) -> bool:
    """Check that a data name's coefficient list matches the carried vector."""
    parsed = parse_name(name)
    return parsed.is_data and bool(np.array_equal(parsed.vector, seg.vector))


def source_reply(gen: Generation, index: int, field: Field, rng) -> CodedSegment:
    """Coded segment for subset ``index`` drawn uniformly at a source.

    Samples the encoding vector uniformly from the subset and combines the
    stored plaintext segments accordingly.
    """
    vec = sample_uniform(index, gen.n, field.order, rng)
    payload = np.zeros(gen.segment_size, dtype=np.uint8)
    for j in range(index - 1, gen.n):
        coef = int(vec[j])
        if coef:
            field.addmul_into(payload, np.frombuffer(gen.segments[j], dtype=np.uint8), coef)
    return CodedSegment(gen.prefix, gen.generation_id, index, vec, payload)
