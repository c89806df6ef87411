"""XOR coding schemes for relay-based body-area sensor networks.

``n`` sensors each emit one packet.  Relay ``j`` (0-based) hears the ``t = s*r``
consecutive packets starting at ``j*s + 1`` (wrapping mod ``n``) and forwards
``t`` encodings, each either a plain packet or the XOR of two packets.

Slot indices are 0-based in this module: slot ``b`` of relay ``j`` is the
``(b + 1)``-th output of that relay.  Packet ids are 1-based throughout.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Union

from .multigraph import Edge, MultiGraph, components

__all__ = [
    "CodingScheme",
    "Encoding",
    "IntegrityError",
    "Pair",
    "SchemeError",
    "Single",
    "UndecodableError",
    "WbanParams",
    "decode",
    "derive_params",
    "encode",
    "format_grid",
    "generate_interleaved",
    "generate_plain",
    "gf2_rank",
    "rank_oracle",
    "relay_window",
    "to_graph",
    "validate",
]

Slot = tuple[int, int]


class SchemeError(ValueError):
    pass


class UndecodableError(Exception):
    """The received packets do not determine every source packet.

    ``components`` lists the vertex sets of the surviving graph that carry no
    plain packet.
    """

    def __init__(self, components: list[frozenset[int]]):
        self.components = components
        shown = ", ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in components)
        super().__init__(f"no plain packet reaches component(s) {shown}")


class IntegrityError(Exception):
    """Two derivations of the same packet disagree."""


@dataclass(frozen=True)
class WbanParams:
    n: int
    k: int
    r: int

    @property
    def s(self) -> int:
        return self.n // self.k

    @property
    def t(self) -> int:
        return self.s * self.r


def derive_params(n: int, k: int, r: int) -> WbanParams:
    if min(n, k, r) < 1:
        raise SchemeError(f"n, k, r must be positive, got n={n}, k={k}, r={r}")
    if n % k:
        raise SchemeError(f"relay count k={k} does not divide sensor count n={n}")
    if n // k < 2:
        raise SchemeError(f"requires n > k with s >= 2 (got s = {n // k})")
    return WbanParams(n, k, r)


def _wrap(x: int, n: int) -> int:
    return (x - 1) % n + 1


def relay_window(params: WbanParams, j: int) -> list[int]:
    """Packet ids received by relay ``j``, in slot order."""
    if not 0 <= j < params.k:
        raise SchemeError(f"relay index {j} outside 0..{params.k - 1}")
    return [_wrap(j * params.s + b, params.n) for b in range(1, params.t + 1)]


@dataclass(frozen=True)
class Single:
    i: int

    @property
    def packets(self) -> tuple[int, ...]:
        return (self.i,)

    def __str__(self) -> str:
        return f"P{self.i}"


@dataclass(frozen=True, eq=False)
class Pair:
    """XOR of two distinct packets; ``Pair(1, 6) == Pair(6, 1)``."""

    i: int
    i2: int

    def __post_init__(self):
        if self.i == self.i2:
            raise SchemeError(f"a pair needs two distinct packets, got ({self.i}, {self.i2})")

    @property
    def packets(self) -> tuple[int, ...]:
        return (self.i, self.i2)

    def __eq__(self, other):
        if not isinstance(other, Pair):
            return NotImplemented
        return {self.i, self.i2} == {other.i, other.i2}

    def __hash__(self):
        return hash(frozenset((self.i, self.i2)))

    def __str__(self) -> str:
        return f"P{self.i}⊕P{self.i2}"


Encoding = Union[Single, Pair]


@dataclass(frozen=True)
class CodingScheme:
    params: WbanParams
    relays: tuple[tuple[Encoding, ...], ...]

    def slots(self) -> Iterable[tuple[Slot, Encoding]]:
        for j, row in enumerate(self.relays):
            for b, enc in enumerate(row):
                yield (j, b), enc

    def to_dict(self) -> dict:
        p = self.params
        return {
            "n": p.n,
            "k": p.k,
            "r": p.r,
            "relays": [
                {"j": j, "slots": [list(enc.packets) for enc in row]}
                for j, row in enumerate(self.relays)
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CodingScheme":
        try:
            params = derive_params(int(data["n"]), int(data["k"]), int(data["r"]))
            rows: dict[int, tuple[Encoding, ...]] = {}
            for relay in data["relays"]:
                encs = []
                for slot in relay["slots"]:
                    if len(slot) == 1:
                        encs.append(Single(int(slot[0])))
                    elif len(slot) == 2:
                        encs.append(Pair(int(slot[0]), int(slot[1])))
                    else:
                        raise SchemeError(f"slot {slot!r} must list one or two packets")
                rows[int(relay["j"])] = tuple(encs)
        except (KeyError, TypeError) as exc:
            raise SchemeError(f"malformed scheme document: {exc}") from exc
        if sorted(rows) != list(range(params.k)):
            raise SchemeError(f"expected relays 0..{params.k - 1}, got {sorted(rows)}")
        return cls(params, tuple(rows[j] for j in range(params.k)))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "CodingScheme":
        return cls.from_dict(json.loads(Path(path).read_text()))


def generate_plain(params: WbanParams) -> CodingScheme:
    """Every relay forwards its window unchanged."""
    return CodingScheme(
        params,
        tuple(tuple(Single(i) for i in relay_window(params, j)) for j in range(params.k)),
    )


def generate_interleaved(params: WbanParams, loops: int) -> CodingScheme:
    """Inter-encoded scheme whose graph has exactly ``loops`` loops.

    Writing ``loops = y*k + z`` with ``0 <= z < k``, every relay forwards its
    first ``y`` received packets in the clear, and relays ``j < z`` also
    forward packet ``y + 1`` in the clear.  All other outputs are XOR pairs:
    the first ``s - 1`` slots pair each packet with its counterpart one block
    later, the rest pair consecutive packets, and the last closes the window.
    """
    n, k, s, t = params.n, params.k, params.s, params.t
    if k < 2 or params.r < 2:
        raise SchemeError(f"interleaved schemes need k, r >= 2 (got k={k}, r={params.r})")
    if not 1 <= loops <= n:
        raise SchemeError(f"loop count {loops} outside 1..{n}")
    y, z = divmod(loops, k)
    relays = []
    for j in range(k):
        base = j * s

        def pk(offset: int) -> int:
            return _wrap(base + offset, n)

        row: list[Encoding] = []
        for b in range(1, t + 1):
            if b <= s - 1:
                row.append(Pair(pk(b), pk(s + b)))
            elif b <= t - 1:
                row.append(Pair(pk(b), pk(b + 1)))
            else:
                row.append(Pair(pk(t), pk(1)))
        for b in range(1, y + 1):
            row[b - 1] = Single(pk(b))
        if j + 1 <= z:
            row[y] = Single(pk(y + 1))
        relays.append(tuple(row))
    return CodingScheme(params, tuple(relays))


def validate(scheme: CodingScheme) -> list[str]:
    """Describe every structural violation; an empty list means the scheme is valid."""
    p = scheme.params
    problems = []
    if len(scheme.relays) != p.k:
        problems.append(f"expected {p.k} relays, found {len(scheme.relays)}")
    for j, row in enumerate(scheme.relays):
        if len(row) != p.t:
            problems.append(f"relay {j} has {len(row)} slots, expected {p.t}")
        window = set(relay_window(p, j)) if j < p.k else set()
        for b, enc in enumerate(row):
            outside = [i for i in enc.packets if i not in window]
            if outside:
                problems.append(
                    f"relay {j} slot {b} ({enc}) uses packet(s) {outside} outside its window"
                )
    return problems


def to_graph(scheme: CodingScheme) -> MultiGraph:
    problems = validate(scheme)
    if problems:
        raise SchemeError("invalid scheme: " + "; ".join(problems))
    edges = []
    for slot, enc in scheme.slots():
        a, b = (enc.i, enc.i) if isinstance(enc, Single) else (enc.i, enc.i2)
        edges.append(Edge(a, b, provenance=slot))
    return MultiGraph(scheme.params.n, tuple(edges))


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of row vectors packed into integers."""
    basis: dict[int, int] = {}  # leading bit -> row
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            if lead not in basis:
                basis[lead] = row
                break
            row ^= basis[lead]
    return len(basis)


def rank_oracle(scheme: CodingScheme, received: Iterable[Slot]) -> bool:
    """True iff the received encodings span all ``n`` packets over GF(2)."""
    rows = []
    for j, b in received:
        mask = 0
        for i in scheme.relays[j][b].packets:
            mask ^= 1 << (i - 1)
        rows.append(mask)
    return gf2_rank(rows) == scheme.params.n


def _xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def encode(scheme: CodingScheme, payloads: Mapping[int, bytes]) -> dict[Slot, bytes]:
    """What each relay forwards, given the sensor payloads."""
    out = {}
    for slot, enc in scheme.slots():
        if isinstance(enc, Single):
            out[slot] = payloads[enc.i]
        else:
            out[slot] = _xor(payloads[enc.i], payloads[enc.i2])
    return out


def decode(scheme: CodingScheme, received: Mapping[Slot, bytes]) -> dict[int, bytes]:
    """Recover all sensor payloads from the surviving relay outputs.

    Plain packets seed their vertex; XOR packets then propagate values
    breadth-first through each component.  Raises UndecodableError when some
    component receives no plain packet, and IntegrityError when redundant
    derivations of a packet disagree.
    """
    lengths = {len(v) for v in received.values()}
    if len(lengths) > 1:
        raise SchemeError(f"received payloads have mixed lengths {sorted(lengths)}")

    n = scheme.params.n
    edges = []
    for slot in received:
        j, b = slot
        enc = scheme.relays[j][b]
        a, c = (enc.i, enc.i) if isinstance(enc, Single) else (enc.i, enc.i2)
        edges.append(Edge(a, c, provenance=slot))
    survived = MultiGraph(n, tuple(edges))

    looped = {e.u for e in survived.edges if e.is_loop}
    missing = [c for c in components(survived) if not (c & looped)]
    if missing:
        raise UndecodableError(missing)

    values: dict[int, bytes] = {}
    adjacency: dict[int, list[tuple[int, bytes]]] = {v: [] for v in range(1, n + 1)}
    for e in survived.edges:
        data = received[e.provenance]
        if e.is_loop:
            known = values.setdefault(e.u, data)
            if known != data:
                raise IntegrityError(f"plain copies of packet {e.u} disagree")
        else:
            adjacency[e.u].append((e.v, data))
            adjacency[e.v].append((e.u, data))

    queue = deque(sorted(values))
    while queue:
        u = queue.popleft()
        for v, data in adjacency[u]:
            derived = _xor(values[u], data)
            if v not in values:
                values[v] = derived
                queue.append(v)
            elif values[v] != derived:
                raise IntegrityError(f"derivations of packet {v} disagree (via packet {u})")
    return {i: values[i] for i in range(1, n + 1)}


def format_grid(scheme: CodingScheme) -> str:
    """Plain-text relay-by-slot table."""
    cells = [[f"R{j}"] + [str(enc) for enc in row] for j, row in enumerate(scheme.relays)]
    width = max(len(c) for row in cells for c in row)
    return "\n".join(" | ".join(c.ljust(width) for c in row).rstrip() for row in cells)
