"""Command-line front end.

    dlang check     FILE [--place v] [--json]
    dlang intersect FILE [--degree D] [--modulus-cap M] [--verify] [--place v]
                         [--precision N] [--samples n] [--jobs j] [--json]
    dlang explog    FILE [--module i] [--terms N] [--place v] [--at x] [--json]
    dlang places    FILE [--at x] [--json]
    dlang orbit     FILE [--degree D] [--json]

Exit codes: 0 success, 1 mathematical error, 2 unstable coset structure
(increase D), 3 analytic verification failed, 64 usage error, 65 malformed
problem file, 66 unreadable problem file.

Reports are deterministic: the same file and flags give the same bytes.
--jobs only changes scheduling, so it is left out of the report.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Any, Sequence

from . import __version__
from .algebra import FqPoly, RatFunc
from .analytic import (
    BallError,
    ball,
    common_ball,
    eval_exp,
    eval_log,
    exp_coeffs,
    log_coeffs,
    terms_for,
)
from .mordell import (
    VerificationError,
    effective_mod_deg,
    intersect_and_infer,
    intersect_rank_one,
    orbit,
    translate_by,
    verify_coset_analytic,
)
from .places import INF, LocalElem, Place, PrecisionError, embed, product_formula_terms, support, valuation
from .problem import ProblemSpec, parse_place, read_problem
from .syntax import ParseError, parse_ratfunc
from .twisted import NON_TORSION, TORSION, DrinfeldModule, act, canonical_height_estimate, good_reduction, torsion_status

EXIT_OK = 0
EXIT_MATH = 1
EXIT_UNSTABLE = 2
EXIT_VERIFY = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_NOINPUT = 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _val(x) -> Any:
    return "inf" if x == INF else int(x)


def _local(x: LocalElem) -> dict:
    return {
        "digits": x.digit_string(),
        "valuation": _val(x.val),
        "absprec": _val(x.absprec),
        "provenance": "exact" if x.absprec == INF else f"precision-{_val(x.absprec)}",
    }


class Report:
    """Structured report plus its human-readable rendering."""

    def __init__(self, command: str, config: dict, path: str, text: str, spec: ProblemSpec):
        self.data: dict[str, Any] = {
            "tool": "dlang",
            "version": __version__,
            "command": command,
            "config": config,
            "input": {
                "file": os.path.basename(path),
                "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
                "problem": spec.serialize(),
            },
            "results": {},
            "warnings": [],
            "status": "ok",
            "exit_code": EXIT_OK,
        }
        self.lines: list[str] = [f"dlang {__version__} {command} {os.path.basename(path)}"]
        self.lines.append("config: " + ", ".join(f"{k}={v}" for k, v in config.items()))

    @property
    def results(self) -> dict:
        return self.data["results"]

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def warn(self, message: str) -> None:
        self.data["warnings"].append(message)
        self.lines.append(f"warning: {message}")

    def finish(self, status: str, code: int) -> int:
        self.data["status"] = status
        self.data["exit_code"] = code
        self.lines.append(f"status: {status} (exit {code})")
        return code

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.data, indent=2, ensure_ascii=False) + "\n"
        return "\n".join(self.lines) + "\n"


# ---------------------------------------------------------------------------
# check


def _bad_places(m: DrinfeldModule) -> list[Place]:
    """Finite places where phi_t has a pole or a non-unit leading coefficient."""
    out = set()
    for c in m.phi_t.coeffs[1:]:
        if c.is_zero():
            continue
        for v, e in support(c).items():
            if not v.is_infinite and e < 0:
                out.add(v)
    lead = m.phi_t.coeffs[-1]
    for v, e in support(lead).items():
        if not v.is_infinite and e > 0:
            out.add(v)
    return sorted(out, key=lambda v: v.pi.sort_key())


def cmd_check(spec: ProblemSpec, rep: Report, v: Place, precision: int, torsion_bound: int) -> int:
    mods = []
    for i, m in enumerate(spec.modules, 1):
        good = good_reduction(m, v)
        entry = {
            "index": i,
            "phi_t": str(m.phi_t),
            "rank": m.rank,
            "well_formed": True,
            "reduction": "good" if good else "bad",
            "bad_finite_places": [str(w) for w in _bad_places(m)],
        }
        rep.say(f"module {i}: phi_t = {m.phi_t}, rank {m.rank}")
        rep.say(f"  reduction at {v}: {entry['reduction']}; bad finite places: {', '.join(entry['bad_finite_places']) or 'none'}")
        if v.is_infinite:
            rep.warn(f"module {i} has bad reduction at inf")
        if good or v.is_infinite:
            N = terms_for(m, v, precision)
            b = ball(m, v, N)
            entry["ball"] = {"min_valuation": b.min_valuation, "order": b.order, "tail_increasing": b.tail_increasing, "caveat": b.caveat, "provenance": "exact"}
            rep.say(f"  certified ball: v(x) >= {b.min_valuation} (series order {b.order})")
            if b.caveat:
                rep.warn(b.caveat)
        else:
            entry["ball"] = None
            rep.say("  certified ball: none (bad reduction)")
        mods.append(entry)
    rep.results["modules"] = mods
    if spec.point is not None:
        coords = []
        for i, (m, x) in enumerate(zip(spec.modules, spec.point), 1):
            status, Q, steps = torsion_status(m, x, torsion_bound)
            h = canonical_height_estimate(m, x, max(1, steps))
            integral = x.is_zero() or valuation(v, x) >= 0
            coords.append({
                "index": i,
                "value": str(x),
                "torsion": status,
                "annihilator": None if Q is None else str(Q),
                "height_estimate": {"n": max(1, steps), "value": str(h)},
                "integral_at_place": integral,
                "provenance": "exact",
            })
            if status == TORSION:
                desc = f"torsion, annihilator {Q}"
            elif status == NON_TORSION:
                desc = f"non-torsion (orbit escapes after {steps} steps)"
            else:
                desc = f"torsion status unknown after {steps} steps"
            rep.say(f"x{i} = {x}: {desc}; height estimate {h} at n = {max(1, steps)}; {'integral' if integral else 'not integral'} at {v}")
        rep.results["point"] = coords
    return rep.finish("ok", EXIT_OK)


# ---------------------------------------------------------------------------
# intersect


def _coset(d: FqPoly, Q: FqPoly) -> dict:
    return {"d": str(d), "Q": str(Q)}


def _structure(st) -> dict:
    return {
        "cosets": [_coset(d, Q) for d, Q in st.cosets],
        "isolated": [str(P) for P in st.isolated],
        "search_bound": st.search_bound,
        "modulus_cap": st.max_mod_deg,
        "provenance": "exact",
    }


def _say_structure(rep: Report, st, indent: str = "") -> None:
    cos = ", ".join(f"{d} + ({Q})" for d, Q in st.cosets) or "none"
    iso = ", ".join(str(P) for P in st.isolated) or "none"
    rep.say(f"{indent}cosets: {cos}")
    rep.say(f"{indent}isolated: {iso}")


def _verify(rep: Report, V, cm, st, v: Place, N: int, samples: int, D: int, seed: int, indent: str = "") -> tuple[list, bool]:
    out, all_ok = [], True
    for d, Q in st.cosets:
        r = verify_coset_analytic(V, cm, (d, Q), v, N, samples, D=D, seed=seed)
        perm = r.lead_order
        lambdas = {f"lambda_{perm[k + 1] + 1}": _local(lam) for k, lam in enumerate(r.lambdas)}
        entry = {
            "coset": _coset(d, Q),
            "place": str(v),
            "ball_min_valuation": r.ball_m,
            "precision": r.precision,
            "floor": r.floor,
            "lead_coordinate": perm[0] + 1,
            "witness": str(r.witness),
            "lambdas": lambdas,
            "translated": [str(f) for f in r.translated],
            "tail_heuristic": r.tail_heuristic,
            "samples": [
                {"kind": s.kind, "at": s.label, "residual_valuations": [_val(w) for w in s.valuations], "provenance": f"precision-{N}"}
                for s in r.samples
            ],
            "ok": r.ok,
        }
        out.append(entry)
        all_ok &= r.ok
        rep.say(f"{indent}verify {d} + ({Q}) at {v}: ball v >= {r.ball_m}, witness {r.witness}, lead x{perm[0] + 1}, floor {r.floor}")
        for name, lam in lambdas.items():
            rep.say(f"{indent}  {name} = {lam['digits']}")
        for s in r.samples:
            mark = "ok" if s.min_valuation() >= r.floor else "FAIL"
            vals = " ".join(str(_val(w)) for w in s.valuations)
            rep.say(f"{indent}  {s.kind:6s} residual v = {vals:>4s}  {mark}  u from {s.label}")
        rep.say(f"{indent}  result: {'verified' if r.ok else 'residual failure'}")
    return out, all_ok


def cmd_intersect(spec: ProblemSpec, rep: Report, cfg: dict, jobs: int) -> int:
    D = cfg["degree"]
    M = cfg["modulus_cap"]
    V = spec.variety_obj()
    cm = spec.cyclic()
    v = parse_place(spec.F, cfg["place"]) if cfg["verify"] else None
    if D < 1:
        raise ValueError("--degree must be >= 1")
    if spec.torsion:
        return _intersect_rank_one(spec, rep, cfg, V, cm, v, jobs)
    res = intersect_and_infer(V, cm, D, M, jobs=jobs)
    rep.results["S"] = {"size": len(res.S), "elements": [str(P) for P in res.S], "provenance": "exact"}
    rep.results["structure"] = _structure(res.structure)
    rep.results["next_structure"] = _structure(res.next_structure)
    rep.results["stable"] = res.stable
    rep.say(f"|S| = {len(res.S)} for deg P < {D}")
    _say_structure(rep, res.structure)
    rep.say(f"stability at D + 1 = {D + 1}: {'stable' if res.stable else 'unstable'}")
    if not res.structure.cosets and len(res.S) >= 8 and D >= 4:
        rep.warn(f"|S| = {len(res.S)} but no coset: counterexample candidate")
    if not res.stable:
        rep.warn("unstable — increase D")
        return rep.finish("unstable", EXIT_UNSTABLE)
    if cfg["verify"]:
        entries, ok = _verify(rep, V, cm, res.structure, v, cfg["precision"], cfg["samples"], D, cfg["seed"])
        rep.results["verification"] = entries
        if not ok:
            return rep.finish("verification_failed", EXIT_VERIFY)
    return rep.finish("ok", EXIT_OK)


def _intersect_rank_one(spec, rep, cfg, V, cm, v, jobs) -> int:
    D, M, tb = cfg["degree"], cfg["modulus_cap"], cfg["torsion_bound"]
    M1 = spec.rank_one()
    now = intersect_rank_one(V, M1, D, M, tb, jobs)
    nxt = intersect_rank_one(V, M1, D + 1, M, tb, jobs)
    entries, stable, all_ok = [], True, True
    for (gamma, st), (_, st2) in zip(now, nxt):
        same = st.same_cosets(st2)
        stable &= same
        label = "(" + ", ".join(str(x) for x in gamma) + ")"
        rep.say(f"gamma = {label}:")
        _say_structure(rep, st, "  ")
        entry = {"gamma": [str(x) for x in gamma], "structure": _structure(st), "stable": same}
        if cfg["verify"] and same and st.cosets:
            ventries, ok = _verify(rep, translate_by(V, gamma), cm, st, v, cfg["precision"], cfg["samples"], D, cfg["seed"], "  ")
            entry["verification"] = ventries
            all_ok &= ok
        entries.append(entry)
    rep.results["torsion_translates"] = entries
    rep.results["stable"] = stable
    if not stable:
        rep.warn("unstable — increase D")
        return rep.finish("unstable", EXIT_UNSTABLE)
    if not all_ok:
        return rep.finish("verification_failed", EXIT_VERIFY)
    return rep.finish("ok", EXIT_OK)


# ---------------------------------------------------------------------------
# explog


def cmd_explog(spec: ProblemSpec, rep: Report, cfg: dict) -> int:
    i = cfg["module"]
    if not 1 <= i <= spec.g:
        raise ValueError(f"--module must be between 1 and {spec.g}")
    m = spec.modules[i - 1]
    N = cfg["terms"]
    es, ls = exp_coeffs(m, N), log_coeffs(m, N)
    v = parse_place(spec.F, cfg["place"])
    rows = []
    rep.say(f"module {i}: phi_t = {m.phi_t}")
    for n in range(N + 1):
        e, l = es.coeffs[n], ls.coeffs[n]
        rows.append({"n": n, "e": str(e), "l": str(l), "v_e": _val(valuation(v, e)), "v_l": _val(valuation(v, l))})
        rep.say(f"e_{n} = {e}")
        rep.say(f"l_{n} = {l}")
    rep.results["coefficients"] = {"rows": rows, "place": str(v), "provenance": "exact"}
    if not v.is_infinite and not good_reduction(m, v):
        rep.warn(f"module {i} has bad reduction at {v}; no ball")
        if cfg["at"] is not None:
            raise BallError(f"module has bad reduction at {v}")
        return rep.finish("ok", EXIT_OK)
    prec = cfg["precision"]
    series, b = common_ball([m], v, prec)
    rep.results["ball"] = {"min_valuation": b.min_valuation, "order": b.order, "caveat": b.caveat, "provenance": "exact"}
    rep.say(f"ball at {v}: v(x) >= {b.min_valuation} (series order {b.order})")
    if b.caveat:
        rep.warn(b.caveat)
    if cfg["at"] is None:
        return rep.finish("ok", EXIT_OK)
    x = parse_ratfunc(spec.F, cfg["at"])
    s = series[0]
    floor = prec - 5
    if x.is_zero():
        xl = LocalElem.exact_zero(v)
    else:
        xl = embed(v, x, prec)
        if xl.val < b.min_valuation:
            raise BallError(f"outside convergence ball: v({x}) = {xl.val} < {b.min_valuation}")
    ex = eval_exp(s.exp, b, xl)
    lg = eval_log(s.log, b, xl)
    t = RatFunc.t(spec.F)
    tx = act(m, spec.F.t, x)
    checks = {
        "exp(log x) - x": lambda: eval_exp(s.exp, b, lg) - xl,
        "log(exp x) - x": lambda: eval_log(s.log, b, ex) - xl,
        "log(phi_t x) - t log x": lambda: (eval_log(s.log, b, embed(v, tx, prec)) if not tx.is_zero() else LocalElem.exact_zero(v)) - lg * t,
        "phi_t(exp x) - exp(t x)": lambda: ex.apply_twisted(m.phi_t) - eval_exp(s.exp, b, xl * t),
    }
    residuals = []
    for name, fn in checks.items():
        try:
            r = fn()
        except BallError:
            residuals.append({"identity": name, "residual_valuation": None, "ok": None, "note": "argument outside ball", "provenance": f"precision-{prec}"})
            continue
        w = r.absprec if r.is_zero() else r.val
        residuals.append({"identity": name, "residual_valuation": _val(w), "ok": w >= floor, "provenance": f"precision-{prec}"})
    rep.results["evaluation"] = {"x": str(x), "exp": _local(ex), "log": _local(lg), "floor": floor, "residuals": residuals}
    rep.say(f"x = {x}")
    rep.say(f"exp(x) = {ex.digit_string()}")
    rep.say(f"log(x) = {lg.digit_string()}")
    for row in residuals:
        if row["ok"] is None:
            rep.say(f"  {row['identity']:24s} skipped: {row['note']}")
        else:
            rep.say(f"  {row['identity']:24s} v = {row['residual_valuation']}  {'ok' if row['ok'] else 'FAIL'}")
    if any(row["ok"] is False for row in residuals):
        return rep.finish("verification_failed", EXIT_VERIFY)
    return rep.finish("ok", EXIT_OK)


# ---------------------------------------------------------------------------
# places, orbit


def _place_entry(x: RatFunc) -> dict:
    terms = product_formula_terms(x)
    ordered = sorted(terms.items(), key=lambda kv: (kv[0].is_infinite, kv[0].degree, kv[0].pi.sort_key() if kv[0].pi is not None else ()))
    return {
        "value": str(x),
        "support": [{"place": str(v), "degree": v.degree, "valuation": terms[v] // v.degree} for v, _ in ordered],
        "sum_deg_times_valuation": sum(terms.values()),
        "provenance": "exact",
    }


def cmd_places(spec: ProblemSpec, rep: Report, cfg: dict) -> int:
    values: list[tuple[str, RatFunc]] = []
    if cfg["at"] is not None:
        values.append(("at", parse_ratfunc(spec.F, cfg["at"])))
    elif spec.point is not None:
        values = [(f"x{i}", x) for i, x in enumerate(spec.point, 1)]
    out = []
    for name, x in values:
        if x.is_zero():
            out.append({"name": name, "value": "0", "support": None})
            rep.say(f"{name} = 0: zero has valuation inf everywhere")
            continue
        entry = {"name": name, **_place_entry(x)}
        out.append(entry)
        rep.say(f"{name} = {x}")
        for s in entry["support"]:
            rep.say(f"  v = {s['place']:12s} deg {s['degree']}  valuation {s['valuation']}")
        rep.say(f"  sum deg(v) v(x) = {entry['sum_deg_times_valuation']}")
    rep.results["values"] = out
    rep.results["modules"] = [{"index": i, "bad_finite_places": [str(w) for w in _bad_places(m)]} for i, m in enumerate(spec.modules, 1)]
    for entry in rep.results["modules"]:
        rep.say(f"module {entry['index']}: bad reduction at inf" + "".join(f", {w}" for w in entry["bad_finite_places"]))
    return rep.finish("ok", EXIT_OK)


def cmd_orbit(spec: ProblemSpec, rep: Report, cfg: dict) -> int:
    cm = spec.cyclic()
    V = spec.variety_obj() if spec.variety else None
    rows = []
    for P, pt in orbit(cm, cfg["degree"]):
        inside = None if V is None else V.contains(pt)
        rows.append({"P": str(P), "point": [str(x) for x in pt], "in_variety": inside})
        mark = "" if inside is None else ("  in V" if inside else "")
        rep.say(f"P = {P}: (" + ", ".join(str(x) for x in pt) + ")" + mark)
    rep.results["orbit"] = {"rows": rows, "provenance": "exact"}
    return rep.finish("ok", EXIT_OK)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dlang", description="Drinfeld module arithmetic and orbit intersections over F_q(t).")
    p.add_argument("--version", action="version", version=f"dlang {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("file")
        sp.add_argument("--json", action="store_true", help="machine-readable report")

    c = sub.add_parser("check", help="validate modules, reduction, torsion and balls")
    common(c)
    c.add_argument("--place")
    c.add_argument("--precision", type=int)
    c.add_argument("--torsion-bound", type=int)

    i = sub.add_parser("intersect", help="compute V meet Gamma and its coset structure")
    common(i)
    i.add_argument("--degree", type=int)
    i.add_argument("--modulus-cap", type=int)
    i.add_argument("--verify", action="store_true")
    i.add_argument("--place")
    i.add_argument("--precision", type=int)
    i.add_argument("--samples", type=int)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--torsion-bound", type=int)
    i.add_argument("--jobs", type=int, default=1)

    e = sub.add_parser("explog", help="exp and log coefficients, balls and evaluation")
    common(e)
    e.add_argument("--module", type=int, default=1)
    e.add_argument("--terms", type=int, default=6)
    e.add_argument("--place")
    e.add_argument("--precision", type=int)
    e.add_argument("--at")

    pl = sub.add_parser("places", help="valuations and the product formula")
    common(pl)
    pl.add_argument("--at")

    o = sub.add_parser("orbit", help="list phi_P(x) for deg P < D")
    common(o)
    o.add_argument("--degree", type=int)
    return p


def _resolve(args, spec: ProblemSpec) -> dict:
    b = spec.bounds

    def pick(name, key=None):
        val = getattr(args, name, None)
        return b[key or name] if val is None else val

    cmd = args.command
    if cmd == "check":
        cfg = {"place": pick("place"), "precision": pick("precision"), "torsion_bound": pick("torsion_bound")}
    elif cmd == "intersect":
        D = pick("degree")
        cfg = {
            "degree": D,
            "modulus_cap": pick("modulus_cap"),
            "effective_modulus_cap": effective_mod_deg(pick("modulus_cap"), D),
            "verify": args.verify,
            "place": pick("place"),
            "precision": pick("precision"),
            "samples": pick("samples"),
            "seed": args.seed,
            "torsion_bound": pick("torsion_bound"),
            "mode": "rank_one" if spec.torsion else "cyclic",
        }
    elif cmd == "explog":
        cfg = {"module": args.module, "terms": args.terms, "place": pick("place"), "precision": pick("precision"), "at": args.at}
    elif cmd == "places":
        cfg = {"at": args.at}
    else:
        cfg = {"degree": pick("degree")}
    for key in ("degree", "precision", "samples", "terms", "torsion_bound", "modulus_cap"):
        if key in cfg and cfg[key] < 0:
            raise UsageError(f"dlang {cmd}: --{key.replace('_', '-')} must be non-negative")
    if "precision" in cfg and cfg["precision"] < 1:
        raise UsageError(f"dlang {cmd}: --precision must be >= 1")
    if cmd == "explog" and cfg["terms"] > 12:
        raise UsageError("dlang explog: --terms must be <= 12")
    if cmd == "explog" and not 1 <= cfg["module"] <= spec.g:
        raise UsageError(f"dlang explog: --module must be between 1 and {spec.g}")
    if getattr(args, "jobs", 1) < 1:
        raise UsageError(f"dlang {cmd}: --jobs must be >= 1")
    if "place" in cfg:
        cfg["place"] = str(parse_place(spec.F, cfg["place"]))
    return cfg


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=err)
        print("usage: dlang {check,intersect,explog,places,orbit} FILE [flags]", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    try:
        spec, text = read_problem(args.file)
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc.strerror}", file=err)
        return EXIT_NOINPUT
    except ParseError as exc:
        print(f"error: {args.file}: {exc}", file=err)
        return EXIT_DATAERR
    try:
        cfg = _resolve(args, spec)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    rep = Report(args.command, cfg, args.file, text, spec)
    try:
        if args.command == "check":
            code = cmd_check(spec, rep, parse_place(spec.F, cfg["place"]), cfg["precision"], cfg["torsion_bound"])
        elif args.command == "intersect":
            code = cmd_intersect(spec, rep, cfg, args.jobs)
        elif args.command == "explog":
            code = cmd_explog(spec, rep, cfg)
        elif args.command == "places":
            code = cmd_places(spec, rep, cfg)
        else:
            code = cmd_orbit(spec, rep, cfg)
    except ParseError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except (BallError, VerificationError, PrecisionError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_MATH
    out.write(rep.render(args.json))
    return code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
