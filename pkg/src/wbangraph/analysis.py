"""Exact erasure census, decoding probability, and the analytic bounds on it.

The census enumerates every subset of surviving edges.  Subsets are handled in
numpy batches: component labels are propagated along the surviving pair edges
until they settle, then each component is checked for a surviving loop.  All
counts are exact Python integers; floating point only appears when the
decoding polynomial is evaluated.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .multigraph import Edge, GraphStats, MultiGraph, components, is_decodable, min_loop_cut, stats

__all__ = [
    "BoundError",
    "BoundsReport",
    "CensusResult",
    "DecodingPolynomial",
    "EnumerationCapError",
    "Lemma5Report",
    "bound_lemma3",
    "bound_lemma4",
    "bound_lemma6",
    "bound_lemma7",
    "census",
    "census_from_json",
    "census_to_csv",
    "census_to_json",
    "classify_batch",
    "compute_Dx",
    "decodable_table",
    "decoding_probability",
    "probability_by_components",
    "verify_lemma5",
]

DEFAULT_CAP = 24
_CHUNK_BITS = 16


class EnumerationCapError(RuntimeError):
    pass


class BoundError(ValueError):
    pass


def _label_dtype(n: int):
    return np.int8 if n < 127 else (np.int16 if n < 32767 else np.int32)


def classify_batch(g: MultiGraph, present: np.ndarray) -> np.ndarray:
    """Decodability of many edge subsets at once.

    Args:
        g: the full graph.
        present: boolean array of shape ``(N, g.m)``; row ``i`` marks which
            edges survive in subset ``i``.

    Returns:
        Boolean array of shape ``(N,)``.
    """
    present = np.asarray(present, dtype=bool)
    count = present.shape[0]
    if g.n == 0:
        return np.ones(count, dtype=bool)
    labels = np.tile(np.arange(g.n, dtype=_label_dtype(g.n)), (count, 1))
    pairs = [(i, e.u - 1, e.v - 1) for i, e in enumerate(g.edges) if not e.is_loop]
    while pairs:
        before = labels.copy()
        for col, a, b in pairs:
            alive = present[:, col]
            la, lb = labels[:, a], labels[:, b]
            low = np.minimum(la, lb)
            labels[:, a] = np.where(alive, low, la)
            labels[:, b] = np.where(alive, low, lb)
        if np.array_equal(before, labels):
            break
    rows = np.arange(count)
    looped = np.zeros((count, g.n), dtype=bool)
    for col in g.loop_ids:
        v = g.edges[col].u - 1
        looped[rows, labels[:, v]] |= present[:, col]
    ok = np.ones(count, dtype=bool)
    for v in range(g.n):
        ok &= looped[rows, labels[:, v]]
    return ok


def _mask_bits(masks: np.ndarray, m: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(m, dtype=np.int64)) & 1).astype(bool)


def _check_cap(m: int, cap: int, force: bool) -> None:
    if m > cap and not force:
        raise EnumerationCapError(
            f"exact census over m={m} edges needs 2^{m} = {2 ** m:,} subset checks; "
            f"the cap is {cap} edges (pass force=True to run anyway)"
        )


def _chunks(m: int):
    total = 1 << m
    step = min(total, 1 << _CHUNK_BITS)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def decodable_table(g: MultiGraph, cap: int = DEFAULT_CAP, force: bool = False) -> np.ndarray:
    """Entry ``mask`` is True iff keeping exactly the edges in ``mask`` decodes."""
    _check_cap(g.m, cap, force)
    out = np.empty(1 << g.m, dtype=bool)
    for lo, hi in _chunks(g.m):
        masks = np.arange(lo, hi, dtype=np.int64)
        out[lo:hi] = classify_batch(g, _mask_bits(masks, g.m))
    return out


@dataclass(frozen=True)
class CensusResult:
    """Decodable (``c``) and undecodable (``kk``) counts by deletion size.

    Index ``x`` of each tuple counts the ``x``-edge deletion sets.
    ``loop_cut`` is ``None`` for an undecodable graph.
    """

    n: int
    m: int
    c: tuple[int, ...]
    kk: tuple[int, ...]
    loop_cut: Optional[int]

    def binomials(self) -> list[int]:
        return [math.comb(self.m, x) for x in range(self.m + 1)]


def _census_chunk(g: MultiGraph, lo: int, hi: int) -> np.ndarray:
    masks = np.arange(lo, hi, dtype=np.int64)
    present = _mask_bits(masks, g.m)
    ok = classify_batch(g, present)
    deleted = g.m - present.sum(axis=1)
    return np.bincount(deleted[ok], minlength=g.m + 1)


def census(
    g: MultiGraph, cap: int = DEFAULT_CAP, force: bool = False, workers: int = 1
) -> CensusResult:
    """Exact counts of decodable subgraphs for every deletion size.

    Enumerates all ``2^m`` edge subsets.  Work is split into fixed chunks that
    may run on ``workers`` threads; the integer sums do not depend on it.
    """
    _check_cap(g.m, cap, force)
    parts = _chunks(g.m)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda span: _census_chunk(g, *span), parts))
    else:
        partials = [_census_chunk(g, lo, hi) for lo, hi in parts]
    total = [0] * (g.m + 1)
    for part in partials:
        for x, v in enumerate(part.tolist()):
            total[x] += v
    c = tuple(total)
    kk = tuple(math.comb(g.m, x) - cx for x, cx in enumerate(c))

    loop_cut = None
    if c[0] == 1:
        loop_cut = next(x for x in range(g.m + 1) if kk[x] > 0) if g.n else None
        if g.n and loop_cut != min_loop_cut(g):
            raise AssertionError(
                f"census loop cut {loop_cut} disagrees with direct search {min_loop_cut(g)}"
            )
    return CensusResult(g.n, g.m, c, kk, loop_cut)


class DecodingPolynomial:
    """``p -> sum_x c_x p^(m-x) (1-p)^x`` with exact integer coefficients."""

    def __init__(self, m: int, coefficients: Sequence[int]):
        if len(coefficients) > m + 1:
            raise ValueError(f"{len(coefficients)} coefficients for degree {m}")
        self.m = m
        self.coefficients = tuple(int(c) for c in coefficients)

    @classmethod
    def from_census(cls, result: CensusResult) -> "DecodingPolynomial":
        # a decodable graph needs m >= n surviving edges, so c_x vanishes past m - n
        top = max(result.m - result.n, -1) + 1
        return cls(result.m, result.c[:top])

    def __call__(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        q = 1.0 - p
        return math.fsum(
            c * p ** (self.m - x) * q**x for x, c in enumerate(self.coefficients) if c
        )

    def exact(self, p: Fraction) -> Fraction:
        p = Fraction(p)
        q = 1 - p
        return sum(
            (c * p ** (self.m - x) * q**x for x, c in enumerate(self.coefficients)),
            Fraction(0),
        )


def decoding_probability(result: CensusResult, p: float) -> float:
    return DecodingPolynomial.from_census(result)(p)


def _induced(g: MultiGraph, block: frozenset[int]) -> MultiGraph:
    relabel = {v: i for i, v in enumerate(sorted(block), start=1)}
    edges = [
        Edge(relabel[e.u], relabel[e.v], e.provenance)
        for e in g.edges
        if e.u in block
    ]
    return MultiGraph(len(block), tuple(edges))


def probability_by_components(g: MultiGraph, p: float, cap: int = DEFAULT_CAP) -> float:
    """Decoding probability as the product of per-component polynomials."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    value = 1.0
    for block in components(g):
        value *= decoding_probability(census(_induced(g, block), cap=cap), p)
    return value


# -- analytic bounds ---------------------------------------------------------


class Bound(NamedTuple):
    """A bound after clamping into its meaningful range, with the raw formula value."""

    value: int
    raw: int

    @property
    def clamped(self) -> bool:
        return self.value != self.raw


def theta(n: int, m: int, mg: int) -> int:
    return mg * (n + 1) + n - 2 * m


def bound_lemma3(n: int, m: int) -> tuple[int, int]:
    """Caps on minimum incidence degree and loop-cut size for a decodable graph."""
    if n < 1:
        raise BoundError(f"need at least one vertex, got n={n}")
    if m < n:
        raise BoundError(f"no decodable graph has fewer edges than vertices (m={m} < n={n})")
    return (2 * m - n) // n, (2 * m) // (n + 1)


def bound_lemma4(n: int, m: int, mg: int) -> Bound:
    """Cap on the number of decodable ``mg``-edge deletions."""
    total = math.comb(m, mg)
    raw = total - (theta(n, m, mg) + 1)
    return Bound(min(max(raw, 0), total), raw)


def bound_lemma6(n: int, m: int, mg: int, delta_l: int, x: int) -> int:
    """Floor on undecodable ``(mg + x)``-edge deletions.

    Valid for ``1 <= x <= mg - delta_l`` when the ``mg``-deletion count is
    extremal; the caller is responsible for that hypothesis.
    """
    if not 1 <= x <= mg - delta_l:
        raise BoundError(f"offset x={x} outside 1..{mg - delta_l}")
    th = theta(n, m, mg)
    return (th + 1) * math.comb(m - mg, x) + (n - th) * math.comb(m - mg - 1, x - 1)


def bound_lemma7(kx: int, m: int, x: int, z: int) -> int:
    """Floor on undecodable ``(x + z)``-deletions from the count at size ``x``."""
    if z < 0 or x + z > m:
        raise BoundError(f"need z >= 0 and x + z <= m (x={x}, z={z}, m={m})")
    return math.ceil(Fraction(kx * math.comb(m - x, z), math.comb(x + z, z)))


@dataclass(frozen=True)
class BoundsReport:
    n: int
    m: int
    loop_cut: int
    delta_l: int
    theta: int
    lemma3_delta_cap: int
    lemma3_loop_cut_cap: int
    lemma4_cap: Bound
    lemma6_floors: dict[int, int]
    lemma7_floors: dict[int, int]
    D: tuple[int, ...]
    flags: tuple[str, ...] = field(default=())

    def cap(self, x: int) -> int:
        """Upper bound on ``c_x`` for any deletion size."""
        if x < len(self.D):
            return self.D[x]
        return 0


def compute_Dx(n: int, m: int, mg: int, delta_l: int) -> BoundsReport:
    """Upper bounds ``D_x`` on decodable ``x``-deletions, ``x = 0..m-n``.

    Sizes below the loop cut are unconstrained.  The loop cut itself takes the
    :func:`bound_lemma4` cap and the next ``mg - delta_l`` sizes take
    :func:`bound_lemma6` floors.  From ``x0 = 2*mg - delta_l`` on,
    :func:`bound_lemma7` grows the floor found at ``x0``.
    """
    delta_cap, mg_cap = bound_lemma3(n, m)
    if m <= 2:
        raise BoundError(f"the bound pipeline needs m > 2, got m={m}")
    if not 1 <= mg <= mg_cap:
        raise BoundError(f"loop cut {mg} infeasible: must lie in 1..{mg_cap} for n={n}, m={m}")
    if not 1 <= delta_l <= mg - 1:
        raise BoundError(f"max loops per vertex {delta_l} must lie in 1..{mg - 1}")

    top = m - n
    th = theta(n, m, mg)
    flags: list[str] = []
    caps: list[int] = []
    floors6: dict[int, int] = {}
    floors7: dict[int, int] = {}
    lemma4 = bound_lemma4(n, m, mg)
    if lemma4.clamped:
        flags.append(f"loop-cut cap {lemma4.raw} clamped to {lemma4.value}")

    def to_cap(x: int, floor: int) -> int:
        total = math.comb(m, x)
        value = min(max(total - floor, 0), total)
        if value != total - floor:
            flags.append(f"x={x}: floor {floor} clamped into 0..{total}")
        return value

    x0 = 2 * mg - delta_l
    for x in range(top + 1):
        if x < mg:
            caps.append(math.comb(m, x))
        elif x == mg:
            caps.append(lemma4.value)
        elif x <= x0:
            floors6[x] = bound_lemma6(n, m, mg, delta_l, x - mg)
            caps.append(to_cap(x, floors6[x]))
        else:
            floors7[x] = bound_lemma7(floors6[x0], m, x0, x - x0)
            caps.append(to_cap(x, floors7[x]))
    return BoundsReport(
        n=n,
        m=m,
        loop_cut=mg,
        delta_l=delta_l,
        theta=th,
        lemma3_delta_cap=delta_cap,
        lemma3_loop_cut_cap=mg_cap,
        lemma4_cap=lemma4,
        lemma6_floors=floors6,
        lemma7_floors=floors7,
        D=tuple(caps),
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class Lemma5Report:
    status: str  # "hypothesis not met" | "branch 1" | "branch 2" | "violated"
    theta: int
    k_at_loop_cut: int
    alpha: int
    beta: int
    loop_count: int


def verify_lemma5(
    g: MultiGraph, result: CensusResult, st: Optional[GraphStats] = None
) -> Lemma5Report:
    """Check the structure forced by an extremal loop-cut count.

    When ``k_{m(G)} = theta + 1`` the graph must have no vertex of incidence
    degree ``m(G) + 2`` or more, and either ``theta`` minimum-degree vertices
    with ``m(G)`` loops, or ``theta + 1`` such vertices with ``m(G) + 1`` loops.
    """
    if result.loop_cut is None:
        raise BoundError("graph is not decodable")
    mg = result.loop_cut
    if st is None or st.target != mg:
        st = stats(g, target=mg)
    th = theta(g.n, g.m, mg)
    k_mg = result.kk[mg]
    if k_mg != th + 1:
        status = "hypothesis not met"
    elif st.beta == 0 and (st.alpha, st.loop_count) == (th, mg):
        status = "branch 1"
    elif st.beta == 0 and (st.alpha, st.loop_count) == (th + 1, mg + 1):
        status = "branch 2"
    else:
        status = "violated"
    return Lemma5Report(status, th, k_mg, st.alpha, st.beta, st.loop_count)


# -- serialisation -----------------------------------------------------------

CSV_FIELDS = ("x", "C(m,x)", "c_x", "k_x", "D_x")


def census_rows(result: CensusResult, bounds: Optional[BoundsReport] = None) -> list[dict]:
    rows = []
    for x, total in enumerate(result.binomials()):
        rows.append(
            {
                "x": x,
                "C(m,x)": total,
                "c_x": result.c[x],
                "k_x": result.kk[x],
                "D_x": bounds.cap(x) if bounds is not None else "",
            }
        )
    return rows


def census_to_csv(result: CensusResult, bounds: Optional[BoundsReport] = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(census_rows(result, bounds))
    return buf.getvalue()


def census_to_json(result: CensusResult, bounds: Optional[BoundsReport] = None) -> dict:
    """JSON-ready mirror of the census; every count is a decimal string."""
    doc = {
        "n": result.n,
        "m": result.m,
        "loop_cut": result.loop_cut,
        "binomial": [str(v) for v in result.binomials()],
        "c": [str(v) for v in result.c],
        "k": [str(v) for v in result.kk],
    }
    if bounds is not None:
        doc["D"] = [str(v) for v in bounds.D]
    return doc


def census_from_json(doc: dict) -> CensusResult:
    m = int(doc["m"])
    c = tuple(int(v) for v in doc["c"])
    c = c + (0,) * (m + 1 - len(c))
    kk = tuple(math.comb(m, x) - cx for x, cx in enumerate(c))
    loop_cut = doc.get("loop_cut")
    return CensusResult(int(doc["n"]), m, c, kk, None if loop_cut is None else int(loop_cut))


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
