"""Machine-readable and LaTeX report emission.

A Report is a flat list of entries {id, status, expected, actual,
provenance}; JSON output round-trips losslessly and is byte-deterministic
(sorted ids, sorted keys, no timestamps).  The LaTeX emitter produces a
standalone document: one table per bundle listing each identity with its
provenance anchor and quote, followed by the minimal-eigenvalue table in
the (k, a, b) layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .qfield import RationalFn
from .spectra import BoundRow


@dataclass
class ReportEntry:
    id: str
    status: str
    expected: str
    actual: str
    provenance: str
    bundle: str = ""

    def as_dict(self) -> dict:
        return {"id": self.id, "status": self.status, "expected": self.expected,
                "actual": self.actual, "provenance": self.provenance,
                "bundle": self.bundle}


@dataclass
class Report:
    entries: list[ReportEntry]
    bounds: list[BoundRow] = field(default_factory=list)
    n_range: tuple[int, int] | None = None

    @property
    def all_pass(self) -> bool:
        return all(e.status == "pass" for e in self.entries)

    def sorted_entries(self) -> list[ReportEntry]:
        return sorted(self.entries, key=lambda e: e.id)

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "all_pass": self.all_pass,
            "n_range": list(self.n_range) if self.n_range else None,
            "entries": [e.as_dict() for e in self.sorted_entries()],
            "bounds": [{"k": r.k, "a": r.a, "b": r.b,
                        "bound": r.bound.factored_str(),
                        "value_at_n": str(r.value_at_n) if r.value_at_n is not None else None,
                        "note": r.note}
                       for r in self.bounds],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "Report":
        payload = json.loads(text)
        entries = [ReportEntry(d["id"], d["status"], d["expected"], d["actual"],
                               d["provenance"], d.get("bundle", ""))
                   for d in payload["entries"]]
        bounds = []
        for d in payload.get("bounds", []):
            from fractions import Fraction
            value = Fraction(d["value_at_n"]) if d["value_at_n"] is not None else None
            bounds.append(BoundRow(d["k"], d["a"], d["b"],
                                   RationalFn.parse(d["bound"]), value, d["note"]))
        n_range = tuple(payload["n_range"]) if payload.get("n_range") else None
        return Report(entries, bounds, n_range)

    # -- markdown -------------------------------------------------------------

    def to_markdown(self) -> str:
        lines = ["# Identity verification report", ""]
        if self.n_range:
            lines.append(f"Sweep range: n = {self.n_range[0]}..{self.n_range[1]}")
            lines.append("")
        lines.append("| id | status | provenance |")
        lines.append("|---|---|---|")
        for e in self.sorted_entries():
            lines.append(f"| {e.id} | {e.status} | {_md_escape(e.provenance)} |")
        if self.bounds:
            lines += ["", "## Minimal eigenvalues", "",
                      "| k | a | b | bound (x scal) | at n | note |",
                      "|---|---|---|---|---|---|"]
            for r in self.bounds:
                at_n = str(r.value_at_n) if r.value_at_n is not None else ""
                lines.append(f"| {r.k} | {r.a} | {r.b} | {r.bound.factored_str()} "
                             f"| {at_n} | {r.note} |")
        lines.append("")
        lines.append("overall: " + ("pass" if self.all_pass else "FAIL"))
        return "\n".join(lines) + "\n"

    # -- LaTeX ------------------------------------------------------------------

    def to_latex(self) -> str:
        out = [
            r"\documentclass{article}",
            r"\usepackage[margin=2cm]{geometry}",
            r"\usepackage{longtable}",
            r"\begin{document}",
            r"\section*{Identity verification report}",
        ]
        if self.n_range:
            out.append(rf"Sweep range: $n = {self.n_range[0]}, \dots, {self.n_range[1]}$.")
        by_bundle: dict[str, list[ReportEntry]] = {}
        for e in self.sorted_entries():
            by_bundle.setdefault(e.bundle or "(general)", []).append(e)
        for bundle_name in sorted(by_bundle):
            out.append(rf"\subsection*{{Bundle {_tex_escape(bundle_name)}}}")
            out.append(r"\begin{longtable}{lll}")
            out.append(r"identity & status & provenance \\ \hline")
            for e in by_bundle[bundle_name]:
                out.append(rf"{_tex_escape(e.id)} & {_tex_escape(e.status)} & "
                           rf"{_tex_escape(e.provenance)} \\")
            out.append(r"\end{longtable}")
        if self.bounds:
            out.append(r"\subsection*{Minimal eigenvalues}")
            out.append(r"\begin{longtable}{rrrll}")
            out.append(r"$k$ & $a$ & $b$ & bound & note \\ \hline")
            for r in self.bounds:
                bound = _tex_math(r.bound.factored_str()) + r" \; \mathrm{scal}"
                out.append(rf"{r.k} & {r.a} & {r.b} & ${bound}$ & {_tex_escape(r.note)} \\")
            out.append(r"\end{longtable}")
        out.append("overall: " + ("pass" if self.all_pass else "FAIL"))
        out.append(r"\end{document}")
        return "\n".join(out) + "\n"


def _md_escape(text: str) -> str:
    return text.replace("|", r"\|")


_TEX_MAP = {"\\": r"\textbackslash{}", "&": r"\&", "%": r"\%", "#": r"\#",
            "_": r"\_", "^": r"\^{}", "~": r"\~{}", "{": r"\{", "}": r"\}",
            "$": r"\$"}

_TEX_MATH_MAP = {"&": r"\&", "%": r"\%", "#": r"\#", "_": r"\_", "*": r"\cdot "}


def _tex_escape(text: str) -> str:
    return "".join(_TEX_MAP.get(ch, ch) for ch in text)


def _tex_math(text: str) -> str:
    return "".join(_TEX_MATH_MAP.get(ch, ch) for ch in text)
