"""Seed-genome assembler and disassembler.

A program is an ordered list of labeled directives (one per genome action).
The assembler lays each directive out as one block of the Book:

    [marker][action symbol][payload if EXPANSION][next-marker region]

The next-marker region interleaves the target label's marker with filler
symbols, because the interpreter extracts the next Bookmarker every other
character; the symbols after the last extraction offset hold the next
Advance, always encoded as zero here. Block order in the Book follows
program order, so a label used as a child entry point must be laid out
before the EXPANSION block that references it (otherwise the verbatim
marker stored inside that payload would shadow the real block).

Marker strings are generated pseudo-randomly per attempt and the assembled
book is verified by walking read_step over every directive; if any marker
happens to collide with payload bytes the assembler retries with a fresh
marker set, and gives up with an EncodingError only after many attempts.

A dormant child is requested with an empty child label: the child is born
with an empty Bookmarker and never acts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .genome import (ALPHABET, ActionKind, EncodingError, Genome, NetDims,
                     PayloadRanges, ExpansionPayload, encode_payload,
                     find_read_position, read_step)
from .rng import mix64

_ACTION_SYMBOL = {
    ActionKind.EXPANSION: "A",
    ActionKind.CONNECTION: "Q",
    ActionKind.DISCONNECTION: "g",
    ActionKind.TRANSITION: "w",
}
_FILLER = "A"


@dataclass(frozen=True)
class Directive:
    """One genome action plus the label of the directive that follows it."""

    label: str
    action: ActionKind
    next_label: str
    child_label: str = ""  # EXPANSION only; "" births a dormant child
    absorption: tuple[float, float, float] = (0.5, 0.5, 0.5)
    luminosity: float = 0.0
    mass: float = 0.2
    radius: float = 0.08
    copy: tuple[int, int] | None = None  # None copies the whole book
    weights: tuple[float, ...] | None = None  # None encodes all-zero weights


@dataclass
class Program:
    directives: list[Directive]
    entry: str = ""
    marker_len: int = 3
    advance_len: int = 1

    def __post_init__(self) -> None:
        if not self.entry and self.directives:
            self.entry = self.directives[0].label


def _gen_marker(attempt: int, index: int, length: int) -> str:
    word = mix64((attempt << 20) ^ (index + 1))
    chars = []
    for _ in range(length):
        chars.append(ALPHABET[word & 63])
        word >>= 6
    return "".join(chars)


def _directive_payload(d: Directive, markers: dict[str, str], dims: NetDims,
                       ranges: PayloadRanges) -> str:
    if d.child_label:
        if d.child_label not in markers:
            raise EncodingError(f"{d.label}: unknown child label {d.child_label!r}")
        child_marker = markers[d.child_label]
    else:
        child_marker = ""
    weights = d.weights if d.weights is not None else (0.0,) * dims.n_weights
    copy_start, copy_end = d.copy if d.copy is not None else (0, 0)
    payload = ExpansionPayload(
        absorption=d.absorption, luminosity=d.luminosity, mass=d.mass,
        radius=d.radius, copy_start=copy_start, copy_end=copy_end,
        child_bookmarker=child_marker, weights=weights)
    return encode_payload(payload, dims, ranges)


def _next_region(target_marker: str, advance_len: int) -> str:
    # target chars at even offsets, filler at odd, then the zero Advance.
    out = []
    for i, ch in enumerate(target_marker):
        out.append(ch)
        if i < len(target_marker) - 1:
            out.append(_FILLER)
    out.append("A" * advance_len)
    return "".join(out)


def _try_assemble(program: Program, dims: NetDims, ranges: PayloadRanges,
                  attempt: int) -> tuple[Genome, dict[str, str]]:
    labels = [d.label for d in program.directives]
    if len(set(labels)) != len(labels):
        raise EncodingError("duplicate labels in program")
    markers: dict[str, str] = {}
    for i, lab in enumerate(labels):
        m = _gen_marker(attempt, i, program.marker_len)
        if m in markers.values():
            raise _Collision()
        markers[lab] = m

    blocks: list[str] = []
    header_pos: dict[str, int] = {}
    pos = 0
    for d in program.directives:
        if d.next_label not in markers:
            raise EncodingError(f"{d.label}: unknown next label {d.next_label!r}")
        body = _ACTION_SYMBOL[d.action]
        if d.action is ActionKind.EXPANSION:
            body += _directive_payload(d, markers, dims, ranges)
        elif d.child_label:
            raise EncodingError(f"{d.label}: only EXPANSION takes a child label")
        body += _next_region(markers[d.next_label], program.advance_len)
        block = markers[d.label] + body
        header_pos[d.label] = pos
        blocks.append(block)
        pos += len(block)

    book = "".join(blocks)
    genome = Genome(book=book, bookmarker=markers[program.entry],
                    advance="A" * program.advance_len)

    # Every marker's leftmost occurrence must be its own block header.
    for lab, m in markers.items():
        if book.find(m) != header_pos[lab]:
            raise _Collision()
    # Walk each directive once and check the decoded trace.
    by_label = {d.label: d for d in program.directives}
    for d in program.directives:
        g = Genome(book=book, bookmarker=markers[d.label],
                   advance="A" * program.advance_len)
        outcome = read_step(g, dims, ranges)
        if outcome is None or outcome.action is not d.action:
            raise _Collision()
        if outcome.next_bookmarker != markers[d.next_label]:
            raise _Collision()
        if outcome.next_advance != "A" * program.advance_len:
            raise _Collision()
        if d.action is ActionKind.EXPANSION:
            expect = markers[d.child_label] if d.child_label else ""
            if outcome.payload.child_bookmarker != expect:
                raise _Collision()
            if d.child_label:
                entry = find_read_position(book, markers[d.child_label])
                if entry != header_pos[d.child_label] + program.marker_len:
                    raise _Collision()
    return genome, markers


class _Collision(Exception):
    pass


def assemble_genome(program: Program, dims: NetDims = NetDims(),
                    ranges: PayloadRanges = PayloadRanges(),
                    max_attempts: int = 256) -> tuple[Genome, dict[str, str]]:
    """Assemble a program into a verified Genome.

    Returns the genome and the label -> marker mapping used. Raises
    EncodingError when the program is empty, malformed, or no collision-free
    marker assignment was found.
    """
    if not program.directives:
        raise EncodingError("empty program")
    for attempt in range(max_attempts):
        try:
            return _try_assemble(program, dims, ranges, attempt)
        except _Collision:
            continue
    raise EncodingError(f"no collision-free marker assignment in {max_attempts} attempts")


def disassemble(genome: Genome, dims: NetDims = NetDims(),
                ranges: PayloadRanges = PayloadRanges(),
                max_steps: int = 64) -> list[dict]:
    """Walk the read trace from the genome's current state.

    Returns one row per visited instruction with the marker, action, and the
    successor marker; stops on dormancy or when a (marker, advance) state
    repeats.
    """
    rows: list[dict] = []
    seen: set[tuple[str, str]] = set()
    g = genome
    for _ in range(max_steps):
        key = (g.bookmarker, g.advance)
        if key in seen:
            break
        seen.add(key)
        outcome = read_step(g, dims, ranges)
        if outcome is None:
            rows.append({"marker": g.bookmarker, "action": "DORMANT"})
            break
        row = {"marker": g.bookmarker, "action": outcome.action.name,
               "next": outcome.next_bookmarker, "advance": g.advance}
        if outcome.payload is not None:
            row["child_marker"] = outcome.payload.child_bookmarker
            row["radius"] = outcome.payload.radius
            row["mass"] = outcome.payload.mass
        rows.append(row)
        g = Genome(book=g.book, bookmarker=outcome.next_bookmarker,
                   advance=outcome.next_advance)
    return rows


# ---------------------------------------------------------------------------
# Line-oriented directive files (`bookcell asm`)
# ---------------------------------------------------------------------------

_ACTION_NAMES = {
    "expand": ActionKind.EXPANSION,
    "connect": ActionKind.CONNECTION,
    "disconnect": ActionKind.DISCONNECTION,
    "transition": ActionKind.TRANSITION,
}


def parse_program(text: str) -> Program:
    """Parse the directive file format.

    Header lines: `marker_len N`, `advance_len N`, `entry LABEL`.
    Blocks: a `label NAME` line followed by one action line
    (`expand|connect|disconnect|transition key=value ...`).
    """
    marker_len, advance_len, entry = 3, 1, ""
    directives: list[Directive] = []
    pending_label = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "marker_len":
            marker_len = int(parts[1])
        elif head == "advance_len":
            advance_len = int(parts[1])
        elif head == "entry":
            entry = parts[1]
        elif head == "label":
            pending_label = parts[1]
        elif head in _ACTION_NAMES:
            if not pending_label:
                raise EncodingError(f"line {lineno}: action without a label")
            kv = {}
            for tok in parts[1:]:
                k, _, v = tok.partition("=")
                kv[k] = v
            d = _directive_from_kv(pending_label, _ACTION_NAMES[head], kv, lineno)
            directives.append(d)
            pending_label = ""
        else:
            raise EncodingError(f"line {lineno}: unknown directive {head!r}")
    return Program(directives=directives, entry=entry or (directives[0].label if directives else ""),
                   marker_len=marker_len, advance_len=advance_len)


def _directive_from_kv(label: str, action: ActionKind, kv: dict[str, str],
                       lineno: int) -> Directive:
    if "next" not in kv:
        raise EncodingError(f"line {lineno}: missing next=")
    kwargs: dict = {"label": label, "action": action, "next_label": kv.pop("next")}
    if action is ActionKind.EXPANSION:
        child = kv.pop("child", "none")
        kwargs["child_label"] = "" if child == "none" else child
        if "absorption" in kv:
            kwargs["absorption"] = tuple(float(x) for x in kv.pop("absorption").split(","))
        if "luminosity" in kv:
            kwargs["luminosity"] = float(kv.pop("luminosity"))
        if "mass" in kv:
            kwargs["mass"] = float(kv.pop("mass"))
        if "radius" in kv:
            kwargs["radius"] = float(kv.pop("radius"))
        copy = kv.pop("copy", "full")
        if copy != "full":
            a, _, b = copy.partition(":")
            kwargs["copy"] = (int(a), int(b))
        w = kv.pop("weights", "zeros")
        if w != "zeros":
            kwargs["weights"] = tuple(float(x) for x in w.split(","))
    if kv:
        raise EncodingError(f"line {lineno}: unknown keys {sorted(kv)}")
    return Directive(**kwargs)
