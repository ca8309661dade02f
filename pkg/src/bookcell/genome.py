"""Interpreter for the Book / Bookmarker / Advance genome language.

A genome is three strings over a fixed 64-symbol alphabet. The Book is the
program tape, the Bookmarker locates the read position (the symbol right
after its first occurrence), and the Advance is a base-64 integer that shifts
where the next Bookmarker is extracted, which is what makes finite loops
expressible.

The symbol read at the marker position selects one of four actions, sixteen
symbols per action:

    index  0..15   EXPANSION      divide: the following payload describes the child
    index 16..31   CONNECTION     enter the waiting-for-connection state
    index 32..47   DISCONNECTION  enter the waiting-for-disconnection state
    index 48..63   TRANSITION     move the read head only

After the action (and after the payload, for EXPANSION) the next Bookmarker
is read every-other-character starting at the Advance offset, and the next
Advance is the run of symbols immediately following the last character so
extracted. The Book is treated as a circular tape everywhere, so reading
never runs off the end.

All operations here are pure; a missing or absent Bookmarker is a valid
"dormant" outcome, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+-"
SYMBOL_INDEX = {c: i for i, c in enumerate(ALPHABET)}
ALPHABET_SIZE = 64


class GenomeError(ValueError):
    pass


class InvalidSymbolError(GenomeError):
    pass


class MalformedGenomeError(GenomeError):
    pass


class EncodingError(GenomeError):
    pass


class ActionKind(Enum):
    EXPANSION = 0
    CONNECTION = 1
    DISCONNECTION = 2
    TRANSITION = 3


def symbol_index(ch: str) -> int:
    try:
        return SYMBOL_INDEX[ch]
    except KeyError:
        raise InvalidSymbolError(f"character {ch!r} is not in the 64-symbol alphabet") from None


def is_valid_text(s: str) -> bool:
    return all(c in SYMBOL_INDEX for c in s)


def classify_action(ch: str) -> ActionKind:
    """Map a symbol to its action class (16 consecutive symbols per class)."""
    return ActionKind(symbol_index(ch) // 16)


def find_read_position(book: str, bookmarker: str) -> int | None:
    """Index of the symbol right after the leftmost occurrence of the marker.

    The successor index wraps circularly. Returns None (dormant) when the
    marker is empty or does not occur.
    """
    if not bookmarker or not book:
        return None
    i = book.find(bookmarker)
    if i < 0:
        return None
    return (i + len(bookmarker)) % len(book)


def extract_every_other(tail: str, count: int, advance_value: int) -> str:
    """Characters at tail offsets advance, advance+2, ..., circularly."""
    if count == 0:
        return ""
    n = len(tail)
    if n == 0:
        raise MalformedGenomeError("cannot extract from an empty tail")
    return "".join(tail[(advance_value + 2 * k) % n] for k in range(count))


def decode_advance(advance: str) -> int:
    """Positional base-64 value of the Advance string, most significant first."""
    if not advance:
        raise MalformedGenomeError("advance string is empty")
    value = 0
    for ch in advance:
        value = value * ALPHABET_SIZE + symbol_index(ch)
    return value


@dataclass(frozen=True)
class NetDims:
    """Network dimensions needed to size the weight block of a payload."""

    n_slots: int = 6
    n_hidden: int = 8

    @property
    def n_in(self) -> int:
        return 3 * self.n_slots + 4

    @property
    def n_out(self) -> int:
        return 3 * self.n_slots + 4

    @property
    def n_weights(self) -> int:
        return (self.n_in + 1) * self.n_hidden + (self.n_hidden + 1) * self.n_out


@dataclass(frozen=True)
class PayloadRanges:
    """Value ranges the fixed-width payload fields are mapped onto."""

    mass_min: float = 0.1
    mass_max: float = 1.0
    radius_min: float = 0.02
    radius_max: float = 0.16
    marker_max: int = 8


@dataclass(frozen=True)
class ExpansionPayload:
    """Decoded description of a child cell."""

    absorption: tuple[float, float, float]
    luminosity: float
    mass: float
    radius: float
    copy_start: int
    copy_end: int
    child_bookmarker: str
    weights: tuple[float, ...]


@dataclass(frozen=True)
class Genome:
    book: str
    bookmarker: str
    advance: str

    def validate(self) -> None:
        for name, s in (("book", self.book), ("bookmarker", self.bookmarker),
                        ("advance", self.advance)):
            if not is_valid_text(s):
                raise InvalidSymbolError(f"{name} contains non-alphabet characters")
        if not self.advance:
            raise MalformedGenomeError("advance must be non-empty")


@dataclass(frozen=True)
class ReadOutcome:
    action: ActionKind
    payload: ExpansionPayload | None
    next_bookmarker: str
    next_advance: str
    consumed: int  # symbols between action position and the tail start


# Payload layout, in symbols. Single digits map to v/63, double digits to
# v/4095; mass and radius are then scaled into their configured ranges,
# weights into [-1, 1]. The copy range is reduced modulo book length at
# decode time; copy_start == copy_end means "the whole book".
_ABSORPTION_W = 3
_LUMINOSITY_W = 2
_MASS_W = 2
_RADIUS_W = 2
_COPY_W = 3
FIXED_HEAD_W = _ABSORPTION_W + _LUMINOSITY_W + _MASS_W + _RADIUS_W + 2 * _COPY_W + 1


def _digits(book: str, start: int, n: int) -> list[int]:
    size = len(book)
    return [symbol_index(book[(start + k) % size]) for k in range(n)]


def _base64_value(digs: list[int]) -> int:
    v = 0
    for d in digs:
        v = v * ALPHABET_SIZE + d
    return v


def decode_expansion(book: str, start: int, dims: NetDims,
                     ranges: PayloadRanges = PayloadRanges()) -> tuple[ExpansionPayload, int]:
    """Decode the fixed-width child payload starting at `start` (circular).

    Returns the payload and the total number of symbols consumed.
    """
    if len(book) < 1:
        raise MalformedGenomeError("book is empty")
    pos = start
    ar, ag, ab = (d / 63.0 for d in _digits(book, pos, 3))
    pos += 3
    lum = _base64_value(_digits(book, pos, 2)) / 4095.0
    pos += 2
    mass = ranges.mass_min + _base64_value(_digits(book, pos, 2)) / 4095.0 * (
        ranges.mass_max - ranges.mass_min)
    pos += 2
    radius = ranges.radius_min + _base64_value(_digits(book, pos, 2)) / 4095.0 * (
        ranges.radius_max - ranges.radius_min)
    pos += 2
    copy_start = _base64_value(_digits(book, pos, 3)) % len(book)
    pos += 3
    copy_end = _base64_value(_digits(book, pos, 3)) % len(book)
    pos += 3
    marker_len = min(_digits(book, pos, 1)[0], ranges.marker_max)
    pos += 1
    size = len(book)
    child_marker = "".join(book[(pos + k) % size] for k in range(marker_len))
    pos += marker_len
    weights = tuple(2.0 * (d / 63.0) - 1.0 for d in _digits(book, pos, dims.n_weights))
    pos += dims.n_weights
    payload = ExpansionPayload(
        absorption=(ar, ag, ab), luminosity=lum, mass=mass, radius=radius,
        copy_start=copy_start, copy_end=copy_end,
        child_bookmarker=child_marker, weights=weights)
    return payload, pos - start


def _quantize(value: float, lo: float, hi: float, levels: int) -> int:
    if not (lo <= value <= hi) and not abs(value - lo) < 1e-12 and not abs(value - hi) < 1e-12:
        raise EncodingError(f"value {value} outside encodable range [{lo}, {hi}]")
    frac = 0.0 if hi == lo else (min(max(value, lo), hi) - lo) / (hi - lo)
    return round(frac * (levels - 1))


def _to_digits(v: int, width: int) -> list[int]:
    out = []
    for _ in range(width):
        out.append(v % ALPHABET_SIZE)
        v //= ALPHABET_SIZE
    return out[::-1]


def encode_payload(payload: ExpansionPayload, dims: NetDims,
                   ranges: PayloadRanges = PayloadRanges()) -> str:
    """Inverse of decode_expansion up to one quantization step per field."""
    if len(payload.weights) != dims.n_weights:
        raise EncodingError(f"expected {dims.n_weights} weights, got {len(payload.weights)}")
    if len(payload.child_bookmarker) > ranges.marker_max:
        raise EncodingError("child bookmarker longer than the marker cap")
    digs: list[int] = []
    for a in payload.absorption:
        digs.append(_quantize(a, 0.0, 1.0, 64))
    digs += _to_digits(_quantize(payload.luminosity, 0.0, 1.0, 4096), 2)
    digs += _to_digits(_quantize(payload.mass, ranges.mass_min, ranges.mass_max, 4096), 2)
    digs += _to_digits(_quantize(payload.radius, ranges.radius_min, ranges.radius_max, 4096), 2)
    digs += _to_digits(payload.copy_start % (64 ** 3), 3)
    digs += _to_digits(payload.copy_end % (64 ** 3), 3)
    digs.append(len(payload.child_bookmarker))
    head = "".join(ALPHABET[d] for d in digs)
    tail = "".join(ALPHABET[_quantize(w, -1.0, 1.0, 64)] for w in payload.weights)
    return head + payload.child_bookmarker + tail


def read_step(genome: Genome, dims: NetDims,
              ranges: PayloadRanges = PayloadRanges()) -> ReadOutcome | None:
    """One read of the genome: locate, classify, decode, and derive successors.

    Returns None when the cell is dormant (marker empty or absent). The next
    Bookmarker keeps the current marker's length; the next Advance keeps the
    advance width.
    """
    book = genome.book
    pos = find_read_position(book, genome.bookmarker)
    if pos is None:
        return None
    size = len(book)
    action = classify_action(book[pos])
    payload = None
    tail_start = pos + 1
    if action is ActionKind.EXPANSION:
        payload, consumed = decode_expansion(book, (pos + 1) % size, dims, ranges)
        tail_start = pos + 1 + consumed
    shift = decode_advance(genome.advance)
    m = len(genome.bookmarker)
    next_marker = "".join(book[(tail_start + shift + 2 * k) % size] for k in range(m))
    last = tail_start + shift + 2 * (m - 1)
    next_advance = "".join(book[(last + 1 + k) % size] for k in range(len(genome.advance)))
    return ReadOutcome(action=action, payload=payload,
                       next_bookmarker=next_marker, next_advance=next_advance,
                       consumed=tail_start - pos - 1)


def advance_genome(genome: Genome, outcome: ReadOutcome) -> Genome:
    return replace(genome, bookmarker=outcome.next_bookmarker,
                   advance=outcome.next_advance)


def copy_range(book: str, start: int, end: int) -> str:
    """Circular copy slice [start, end); start == end means the whole book."""
    size = len(book)
    if size == 0:
        return ""
    start %= size
    end %= size
    if start == end:
        return book
    if start < end:
        return book[start:end]
    return book[start:] + book[:end]


def to_text(genome: Genome) -> str:
    """Three-line on-disk form: book / marker / advance."""
    return f"book:{genome.book}\nmarker:{genome.bookmarker}\nadvance:{genome.advance}\n"


def from_text(text: str) -> Genome:
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()
    missing = {"book", "marker", "advance"} - set(fields)
    if missing:
        raise MalformedGenomeError(f"genome text missing fields: {sorted(missing)}")
    genome = Genome(book=fields["book"], bookmarker=fields["marker"],
                    advance=fields["advance"])
    genome.validate()
    return genome
