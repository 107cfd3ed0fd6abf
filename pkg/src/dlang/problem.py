"""Problem files: a line-oriented format with bracketed sections.

    # comment
    [field]
    p = 2
    k = 1                      # optional, default 1
    conductor = g^2 + g + 1    # optional, extension fields only

    [module.1]
    phi_t = t + tau

    [point]
    x1 = t^2

    [variety]
    f1 = X1 - X2

    [bounds]                   # all optional
    degree = 6
    modulus_cap = 3
    precision = 40
    place = t + 1
    samples = 5
    torsion_bound = 8

    [torsion]                  # optional, switches intersect to rank one
    gen1 = 0, t

Module blocks are numbered 1..g; the point has coordinates x1..xg and the
variety lists f1, f2, ... in any order.  Every value is checked when the
file is read, and errors carry the line and column of the offending text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .algebra import GF, RatFunc, get_field
from .mordell import CyclicModule, MPoly, RankOneModule, Variety
from .places import Place
from .syntax import KRing, ParseError, parse_conductor, parse_list, parse_mpoly, parse_poly, parse_ratfunc, parse_twisted
from .twisted import DrinfeldModule, ProductAction

BOUND_DEFAULTS = {
    "degree": 6,
    "modulus_cap": 3,
    "precision": 40,
    "place": "t + 1",
    "samples": 5,
    "torsion_bound": 8,
}
INT_BOUNDS = ("degree", "modulus_cap", "precision", "samples", "torsion_bound")
SECTIONS = ("field", "module", "point", "variety", "bounds", "torsion")

_SECTION = re.compile(r"\[\s*([a-z_]+)(?:\.(\d+))?\s*\]$")
_ENTRY = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)\s*=")


@dataclass
class _Line:
    key: str
    value: str
    line: int
    col: int


@dataclass
class ProblemSpec:
    F: GF
    modules: list[DrinfeldModule]
    point: list[RatFunc] | None = None
    variety: list[MPoly] | None = None
    bounds: dict = field(default_factory=dict)
    torsion: list[tuple[RatFunc, ...]] | None = None

    @property
    def g(self) -> int:
        return len(self.modules)

    @property
    def action(self) -> ProductAction:
        return ProductAction(self.modules)

    def cyclic(self) -> CyclicModule:
        if self.point is None:
            raise ValueError("the problem has no [point] section")
        return CyclicModule(self.action, tuple(self.point))

    def variety_obj(self) -> Variety:
        if not self.variety:
            raise ValueError("the problem has no [variety] section")
        return Variety(self.g, tuple(self.variety))

    def rank_one(self) -> RankOneModule:
        return RankOneModule(tuple(self.torsion or ()), self.cyclic())

    def place(self, text: str | None = None) -> Place:
        return parse_place(self.F, self.bounds["place"] if text is None else text)

    def serialize(self) -> str:
        """Canonical text; parse(serialize(spec)) reproduces the spec."""
        F = self.F
        out = ["[field]", f"p = {F.p}", f"k = {F.k}"]
        if not F.prime:
            out.append(f"conductor = {_format_conductor(F)}")
        for i, m in enumerate(self.modules, 1):
            out += ["", f"[module.{i}]", f"phi_t = {m.phi_t}"]
        if self.point is not None:
            out += ["", "[point]"] + [f"x{i} = {x}" for i, x in enumerate(self.point, 1)]
        if self.variety:
            out += ["", "[variety]"] + [f"f{j} = {f}" for j, f in enumerate(self.variety, 1)]
        out += ["", "[bounds]"] + [f"{k} = {self.bounds[k]}" for k in BOUND_DEFAULTS]
        if self.torsion:
            out += ["", "[torsion]"] + [f"gen{j} = " + ", ".join(str(x) for x in gen) for j, gen in enumerate(self.torsion, 1)]
        return "\n".join(out) + "\n"


def _format_conductor(F: GF) -> str:
    terms = []
    for i in range(len(F.conductor) - 1, -1, -1):
        c = F.conductor[i]
        if not c:
            continue
        mono = "" if i == 0 else ("g" if i == 1 else f"g^{i}")
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        else:
            terms.append(f"{c}*{mono}")
    return " + ".join(terms)


def parse_place(F: GF, text: str, line: int = 1, col: int = 1) -> Place:
    """'inf' or a monic irreducible polynomial in t."""
    if text.strip() == "inf":
        return Place.infinite(F)
    pi = parse_poly(F, text, line, col)
    if pi.degree < 1 or not pi.is_monic() or not pi.is_irreducible():
        raise ParseError(f"place {pi} is not a monic irreducible polynomial", line, col)
    return Place(F, pi)


def _split_sections(text: str) -> dict[tuple[str, int | None], tuple[int, list[_Line]]]:
    sections: dict[tuple[str, int | None], tuple[int, list[_Line]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip())
        stripped = body.strip()
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                raise ParseError(f"malformed section header {stripped!r}", lineno, indent + 1)
            name, idx = m.group(1), m.group(2)
            if name not in SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno, indent + 1)
            if (name == "module") != (idx is not None):
                raise ParseError("use [module.i] for module blocks" if name == "module" else f"[{name}] takes no index", lineno, indent + 1)
            key = (name, int(idx) if idx is not None else None)
            if key in sections:
                raise ParseError(f"duplicate section {stripped}", lineno, indent + 1)
            sections[key] = (lineno, [])
            current = key
            continue
        if current is None:
            raise ParseError("entry outside of any section", lineno, indent + 1)
        m = _ENTRY.match(stripped)
        if not m:
            raise ParseError("expected 'name = value'", lineno, indent + 1)
        vcol = indent + m.end() + 1
        value = stripped[m.end():]
        lead = len(value) - len(value.lstrip())
        entries = sections[current][1]
        if any(e.key == m.group(1) for e in entries):
            raise ParseError(f"duplicate key {m.group(1)!r}", lineno, indent + 1)
        entries.append(_Line(m.group(1), value.strip(), lineno, vcol + lead))
    return sections


def _keyed(entries: list[_Line], prefix: str, what: str, header_line: int) -> list[_Line]:
    """Entries prefix1..prefixn in numeric order, all present."""
    found = {}
    for e in entries:
        m = re.fullmatch(rf"{prefix}(\d+)", e.key)
        if not m:
            raise ParseError(f"unexpected key {e.key!r} in {what}", e.line, e.col)
        found[int(m.group(1))] = e
    n = len(found)
    if sorted(found) != list(range(1, n + 1)):
        raise ParseError(f"{what} keys must be {prefix}1..{prefix}{n}", header_line, 1)
    return [found[i] for i in range(1, n + 1)]


def _int_value(e: _Line, lo: int = 0) -> int:
    if not re.fullmatch(r"\d+", e.value):
        raise ParseError(f"{e.key} must be a non-negative integer", e.line, e.col)
    n = int(e.value)
    if n < lo:
        raise ParseError(f"{e.key} must be >= {lo}", e.line, e.col)
    return n


def _parse_field(sections) -> GF:
    if ("field", None) not in sections:
        raise ParseError("missing [field] section", 1, 1)
    header, entries = sections[("field", None)]
    vals = {e.key: e for e in entries}
    for e in entries:
        if e.key not in ("p", "k", "conductor"):
            raise ParseError(f"unexpected key {e.key!r} in [field]", e.line, e.col)
    if "p" not in vals:
        raise ParseError("[field] needs p", header, 1)
    p = _int_value(vals["p"], 2)
    k = _int_value(vals["k"], 1) if "k" in vals else 1
    conductor = None
    if "conductor" in vals:
        e = vals["conductor"]
        if k == 1:
            raise ParseError("a prime field takes no conductor", e.line, e.col)
        conductor = parse_conductor(p, e.value, e.line, e.col)
    try:
        return get_field(p, k, conductor)
    except ValueError as exc:
        raise ParseError(str(exc), vals["p"].line, vals["p"].col) from None


def parse_problem(text: str) -> ProblemSpec:
    sections = _split_sections(text)
    F = _parse_field(sections)

    idxs = sorted(i for name, i in sections if name == "module")
    if not idxs:
        raise ParseError("at least one [module.i] section is required", 1, 1)
    if idxs != list(range(1, len(idxs) + 1)):
        raise ParseError("module blocks must be numbered 1..g", sections[("module", idxs[-1])][0], 1)
    modules = []
    for i in idxs:
        header, entries = sections[("module", i)]
        phi = [e for e in entries if e.key == "phi_t"]
        for e in entries:
            if e.key != "phi_t":
                raise ParseError(f"unexpected key {e.key!r} in [module.{i}]", e.line, e.col)
        if not phi:
            raise ParseError(f"[module.{i}] needs phi_t", header, 1)
        e = phi[0]
        try:
            modules.append(DrinfeldModule(parse_twisted(F, e.value, e.line, e.col)))
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), e.line, e.col) from None
    g = len(modules)

    point = None
    if ("point", None) in sections:
        header, entries = sections[("point", None)]
        rows = _keyed(entries, "x", "[point]", header)
        if len(rows) != g:
            raise ParseError(f"[point] needs {g} coordinates x1..x{g}", header, 1)
        point = [parse_ratfunc(F, e.value, e.line, e.col) for e in rows]

    variety = None
    if ("variety", None) in sections:
        header, entries = sections[("variety", None)]
        rows = _keyed(entries, "f", "[variety]", header)
        if not rows:
            raise ParseError("[variety] needs at least one polynomial", header, 1)
        variety = [parse_mpoly(F, g, e.value, e.line, e.col) for e in rows]

    bounds = dict(BOUND_DEFAULTS)
    if ("bounds", None) in sections:
        for e in sections[("bounds", None)][1]:
            if e.key not in BOUND_DEFAULTS:
                raise ParseError(f"unknown bound {e.key!r}", e.line, e.col)
            if e.key in INT_BOUNDS:
                bounds[e.key] = _int_value(e, 1 if e.key in ("precision", "torsion_bound") else 0)
            else:
                bounds[e.key] = str(parse_place(F, e.value, e.line, e.col))

    torsion = None
    if ("torsion", None) in sections:
        header, entries = sections[("torsion", None)]
        torsion = []
        for e in _keyed(entries, "gen", "[torsion]", header):
            vec = parse_list(KRing(F), e.value, e.line, e.col)
            if len(vec) != g:
                raise ParseError(f"torsion generator needs {g} coordinates", e.line, e.col)
            torsion.append(tuple(vec))

    return ProblemSpec(F, modules, point, variety, bounds, torsion)


def read_problem(path: str) -> tuple[ProblemSpec, str]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_problem(text), text

