"""End-to-end reports: every scheme of a network shape, analysed and simulated."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .analysis import (
    BoundError,
    BoundsReport,
    CensusResult,
    DecodingPolynomial,
    bound_lemma3,
    census,
    census_to_json,
    compute_Dx,
    decoding_probability,
)
from .montecarlo import MonteCarloResult, TrialConfig, compare_exact, simulate
from .scheme import CodingScheme, derive_params, generate_interleaved, generate_plain, to_graph

PROBABILITY_TOL = 1e-9


def load_presets() -> dict:
    text = resources.files("wbangraph").joinpath("presets.json").read_text()
    return json.loads(text)


def find_preset(n: int, k: int, r: int) -> dict:
    return load_presets().get(f"{n}-{k}-{r}", {})


@dataclass
class SchemeReport:
    label: str
    scheme: CodingScheme
    census: CensusResult
    probabilities: dict[float, float]
    simulation: Optional[MonteCarloResult] = None
    z_score: Optional[float] = None


@dataclass
class ReportBundle:
    n: int
    k: int
    r: int
    entries: list[SchemeReport]
    bounds: Optional[BoundsReport]
    bounds_note: str = ""
    bound_gaps: dict[float, float] = field(default_factory=dict)
    discrepancies: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "params": {"n": self.n, "k": self.k, "r": self.r},
            "schemes": [],
            "bounds": None,
            "discrepancies": self.discrepancies,
        }
        for e in self.entries:
            item = {
                "label": e.label,
                "scheme": e.scheme.to_dict(),
                "census": census_to_json(e.census),
                "probability": {f"{p:g}": f"{v:.10f}" for p, v in e.probabilities.items()},
                "simulation": None,
            }
            if e.simulation is not None:
                item["simulation"] = e.simulation.to_dict()
                item["simulation"]["z_score"] = e.z_score
            out["schemes"].append(item)
        if self.bounds is not None:
            b = self.bounds
            out["bounds"] = {
                "loop_cut": b.loop_cut,
                "delta_l": b.delta_l,
                "theta": b.theta,
                "D": [str(v) for v in b.D],
                "gap_vs_best": {f"{p:g}": f"{v:.10f}" for p, v in self.bound_gaps.items()},
            }
        else:
            out["bounds_note"] = self.bounds_note
        return out


def _schemes(n: int, k: int, r: int):
    params = derive_params(n, k, r)
    if k >= 2 and r >= 2:
        for loops in range(1, n + 1):
            yield f"L={loops}", generate_interleaved(params, loops)
    yield "plain", generate_plain(params)


def _compare_reference(bundle: ReportBundle, reference: dict) -> None:
    by_label = {e.label: e for e in bundle.entries}
    ref_census = reference.get("census", {})
    for label, row in ref_census.items():
        entry = by_label.get(label)
        if entry is None:
            continue
        for x, ref in enumerate(row, start=1):
            got = entry.census.c[x]
            if got != ref:
                bundle.discrepancies.append(
                    {"table": "census", "scheme": label, "x": x, "computed": got, "reference": ref}
                )
    for p_text, row in reference.get("probability", {}).items():
        p = float(p_text)
        for label, ref in row.items():
            entry = by_label.get(label)
            if entry is None:
                continue
            got = decoding_probability(entry.census, p)
            if abs(got - ref) <= PROBABILITY_TOL:
                continue
            item = {"table": "probability", "scheme": label, "p": p, "computed": got, "reference": ref}
            if label in ref_census:
                alt = DecodingPolynomial(entry.census.m, [1] + list(ref_census[label]))(p)
                item["reference_matches_reference_census"] = abs(alt - ref) <= PROBABILITY_TOL
                item["explained_by"] = [
                    {"x": x, "delta_c": ref_c - entry.census.c[x],
                     "term": (ref_c - entry.census.c[x]) * p ** (entry.census.m - x) * (1 - p) ** x}
                    for x, ref_c in enumerate(ref_census[label], start=1)
                    if ref_c != entry.census.c[x]
                ]
            bundle.discrepancies.append(item)
    if bundle.bounds is not None and "D" in reference:
        for x, ref in enumerate(reference["D"], start=1):
            if x < len(bundle.bounds.D) and bundle.bounds.D[x] != ref:
                bundle.discrepancies.append(
                    {"table": "D", "x": x, "computed": bundle.bounds.D[x], "reference": ref}
                )
    for p_text, ref in reference.get("bound_gap", {}).items():
        got = bundle.bound_gaps.get(float(p_text))
        if got is not None and abs(got - ref) > PROBABILITY_TOL:
            bundle.discrepancies.append(
                {"table": "bound_gap", "p": float(p_text), "computed": got, "reference": ref}
            )


def build_report(
    n: int,
    k: int,
    r: int,
    p_values: Optional[list[float]] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    delta_l: Optional[int] = None,
    workers: int = 1,
    simulate_p: Optional[float] = None,
) -> ReportBundle:
    """Analyse every interleaved loop count plus the plain scheme for ``(n, k, r)``.

    Defaults come from the shipped preset for the shape when one exists.
    ``trials=0`` skips the Monte Carlo runs.
    """
    preset = find_preset(n, k, r)
    p_values = p_values or preset.get("p_values", [0.8, 0.9])
    trials = preset.get("trials", 100_000) if trials is None else trials
    seed = preset.get("seed", 0) if seed is None else seed
    delta_l = preset.get("delta_l", 1) if delta_l is None else delta_l
    simulate_p = p_values[0] if simulate_p is None else simulate_p

    entries = []
    for label, scheme in _schemes(n, k, r):
        g = to_graph(scheme)
        result = census(g, workers=workers)
        probs = {p: decoding_probability(result, p) for p in p_values}
        entry = SchemeReport(label, scheme, result, probs)
        if trials:
            sim = simulate(g, TrialConfig(simulate_p, trials, seed, workers))
            entry.simulation = sim
            entry.z_score = compare_exact(sim, decoding_probability(result, simulate_p))
        entries.append(entry)

    m = entries[0].census.m
    bounds, note = None, ""
    try:
        _, mg_cap = bound_lemma3(n, m)
        bounds = compute_Dx(n, m, mg_cap, delta_l)
    except BoundError as exc:
        note = f"bounds unavailable: {exc}"
    bundle = ReportBundle(n, k, r, entries, bounds, note)
    if bounds is not None:
        best = max(
            (e for e in entries if e.census.loop_cut is not None),
            key=lambda e: decoding_probability(e.census, p_values[0]),
        )
        hypothetical = DecodingPolynomial(m, bounds.D)
        bundle.bound_gaps = {
            p: hypothetical(p) - decoding_probability(best.census, p) for p in p_values
        }
    _compare_reference(bundle, preset.get("reference", {}))
    return bundle


def render_table(bundle: ReportBundle) -> str:
    """Human-readable census and probability tables."""
    lines = [f"n={bundle.n} k={bundle.k} r={bundle.r}"]
    m = bundle.entries[0].census.m
    top = m - bundle.n
    xs = range(1, top + 1)
    head = ["x"] + [str(x) for x in xs]
    rows = [head, ["C(m,x)"] + [str(math.comb(m, x)) for x in xs]]
    if bundle.bounds is not None:
        rows.append(["D_x"] + [str(bundle.bounds.cap(x)) for x in xs])
    for e in bundle.entries:
        rows.append([f"c_x {e.label}"] + [str(e.census.c[x]) for x in xs])
    width = max(len(c) for row in rows for c in row)
    lines += [" ".join(c.rjust(width) for c in row) for row in rows]
    lines.append("")
    ps = list(bundle.entries[0].probabilities)
    lines.append("scheme  " + "  ".join(f"P(p={p:g})".rjust(14) for p in ps) + "     simulated")
    for e in bundle.entries:
        sim = f"{e.simulation.estimate:.5f}" if e.simulation is not None else "-"
        vals = "  ".join(f"{e.probabilities[p]:.10f}".rjust(14) for p in ps)
        lines.append(f"{e.label:<7} {vals}  {sim:>12}")
    if bundle.bound_gaps:
        lines.append("")
        for p, gap in bundle.bound_gaps.items():
            lines.append(f"gap to D_x bound at p={p:g}: {gap:.10f}")
    if bundle.discrepancies:
        lines.append("")
        lines.append("differences from reference values:")
        for d in bundle.discrepancies:
            lines.append("  " + json.dumps(d))
    return "\n".join(lines) + "\n"
