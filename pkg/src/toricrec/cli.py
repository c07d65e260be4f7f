"""Command-line front end: describe, verify, scan, orbit, render.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .canonical import CanonicalError, CanonicalType, InvalidType, canonical_from_json, g, g_pieces
from .chart import ChartError, NodalChart, chart_from_json, natural_chart, wedge_level_length
from .dynamics import distinct_gaps, orbit_gaps, scan, scan_heights, verdict
from .exactnum import ExactNumError, QuadraticNumber, format_literal, parse_literal
from .polygon import PolygonError, delzant_check, level_length, polygon_from_json, ridge
from .tau import TauError, build_tau, verify_iso

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Path
    out: Path | None = None
    resolution: int = 20
    horizon: int = 10_000
    qmax: int = 24
    levels: int = 8
    samples: int = 1000
    stroke_width: float = 1.5
    # orbit length from the command line, overriding the config's n
    orbit_n: int | None = None

    def __post_init__(self):
        for name in ("resolution", "horizon", "qmax", "samples"):
            if getattr(self, name) < 1:
                raise InputError(f"--{name} must be >= 1")
        if self.levels < 0:
            raise InputError("--levels must be >= 0")
        if not self.stroke_width > 0:
            raise InputError("--stroke-width must be positive")


# -----------------------------------------------------------------------------
# input handling


def _line_of(text: str, key: str | None) -> int | None:
    if not key:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_input(path: Path):
    """Parse a config file into ('type', T), ('chart', C), ('polygon', P) or ('orbit', ...)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read input ({exc.strerror})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise InputError(f"{path}:1: expected a JSON object")
    try:
        if "vertices" in obj:
            return "polygon", polygon_from_json(obj)
        if "nodes" in obj:
            return "chart", chart_from_json(obj)
        if "rho" in obj:
            rho = parse_literal(str(obj["rho"]))
            n = obj.get("n", 100)
            if not isinstance(n, int) or n < 1:
                raise InvalidType("n must be a positive integer", field="n")
            return "orbit", (rho, n)
        return "type", canonical_from_json(obj)
    except InvalidType as exc:
        line = _line_of(text, exc.field)
        where = f"{path}:{line}" if line else str(path)
        field = f" field {exc.field!r}:" if exc.field else ""
        raise InputError(f"{where}:{field} {exc}") from None
    except (CanonicalError, ChartError, PolygonError, ExactNumError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {type(exc).__name__}: {exc}") from None


def _type_of(kind, obj) -> tuple[CanonicalType, NodalChart]:
    if kind == "type":
        return obj, natural_chart(obj)
    if kind == "chart":
        return obj.type, obj
    raise InputError(f"expected a canonical type or nodal chart, got a {kind} config")


def _fmt(x) -> str:
    return format_literal(QuadraticNumber.coerce(x))


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        Path(cfg.out).write_text(text)


def _sample_heights(T: CanonicalType) -> list[QuadraticNumber]:
    hs = [QuadraticNumber(0)] + list(reversed(T.alphas)) + [T.M - T.epsilon]
    hs += [a + (b - a) / 2 for a, b in T.excluded.admissible()]
    return sorted(set(hs))


# -----------------------------------------------------------------------------
# commands


def cmd_describe(cfg: RunConfig) -> int:
    kind, obj = load_input(cfg.input)
    out = []
    if kind == "polygon":
        R = ridge(obj)
        rep = delzant_check(obj)
        out.append(f"polygon with {len(obj.vertices)} vertices, area {_fmt(obj.area())}")
        out.append(f"Delzant: {'yes' if rep.passed else 'no'} (corner determinants {list(rep.determinants)})")
        out.append(f"M = {_fmt(R.M)}")
        out.append(f"ridge: width {_fmt(R.width)} from ({_fmt(R.endpoints[0][0])}, {_fmt(R.endpoints[0][1])})"
                   f" to ({_fmt(R.endpoints[1][0])}, {_fmt(R.endpoints[1][1])})")
        for j in range(5):
            h = R.M * j / 5
            out.append(f"  level length at h = {_fmt(h)}: {_fmt(level_length(obj, h))}")
        print("\n".join(out))
        return EXIT_OK
    if kind == "orbit":
        raise InputError("describe needs a canonical type, chart or polygon")
    T, C = _type_of(kind, obj)
    out.append(f"hat class {T.hat.value}, k = {T.k}")
    out.append(f"M = {_fmt(T.M)}")
    out.append(f"w = {_fmt(T.w)}")
    out.append(f"ridge: width {_fmt(T.w)}" + (" (a single point)" if not T.w else ""))
    out.append(f"parked nodes: n = {T.n}" + (f", alpha = {', '.join(_fmt(a) for a in T.alphas)}" if T.n else ""))
    out.append(f"epsilon = {_fmt(T.epsilon)}")
    ex = ", ".join(f"({_fmt(lo)}, {_fmt(hi)}]" if hi == T.M else f"({_fmt(lo)}, {_fmt(hi)})"
                   for lo, hi in T.excluded.intervals())
    out.append(f"excluded set U: {ex}")
    out.append("g(h) pieces:")
    for pc in g_pieces(T):
        out.append(f"  [{_fmt(pc.lo)}, {_fmt(pc.hi)}]: g = {_fmt(pc.c0)} + {pc.c1}*(M - h)")
    for h in _sample_heights(T):
        out.append(f"  g({_fmt(h)}) = {_fmt(g(T, h))}")
    out.append(f"nodes ({len(C.nodes)}):")
    for n in C.nodes:
        out.append(f"  {n.tag}: u = {_fmt(n.u)}, h = {_fmt(n.h)}, eigen ({n.eigen.x}, {n.eigen.y})")
    print("\n".join(out))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    kind, obj = load_input(cfg.input)
    if kind == "polygon":
        rep = delzant_check(obj)
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} delzant: corner determinants {list(rep.determinants)}")
        return EXIT_OK if rep.passed else EXIT_FAIL
    if kind == "orbit":
        raise InputError("verify needs a canonical type or chart")
    T, C = _type_of(kind, obj)
    ok = True
    try:
        tau = build_tau(T)
        report = verify_iso(tau, C, cfg.samples)
    except TauError as exc:
        print(f"FAIL tau: {exc}")
        return EXIT_FAIL
    for check in report.checks:
        line = f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}"
        if check.counterexample is not None:
            line += f" at ({', '.join(_fmt(c) for c in check.counterexample)})"
        print(line)
        ok = ok and check.passed
    print(f"  tau has {len(tau.pieces)} pieces; checked on {report.points_checked} points")

    bad = None
    hs = [h for h in _sample_heights(T) + list(scan_heights(T, cfg.resolution))
          if h <= T.M - T.epsilon]
    for h in hs:
        if wedge_level_length(C, h) != g(T, h):
            bad = h
            break
    if bad is None:
        print(f"PASS wedge_oracle: chart level length equals g(h) at {len(hs)} heights")
    else:
        print(f"FAIL wedge_oracle: at h = {_fmt(bad)} chart gives {_fmt(wedge_level_length(C, bad))}, "
              f"g gives {_fmt(g(T, bad))}")
        ok = False

    verdicts = [verdict(T, h, cfg.horizon, C) for h in scan_heights(T, cfg.resolution)]
    periods = {v.outcome.period for v in verdicts if v.recurrent}
    nonrec = sum(1 for v in verdicts if not v.recurrent)
    for v in verdicts:
        wit = v.outcome.witness()
        extra = (f"min ||n rho|| over n <= {cfg.horizon} at n = {wit['n_star']}: {wit['dist']}"
                 if not v.recurrent else f"{wit['method']} return")
        print(f"  h = {_fmt(v.h)}: rho = {_fmt(v.rho)}, {v}, {extra}")
    if not verdicts:
        print("no admissible sample heights")
    elif nonrec == len(verdicts):
        print("NonRecurrent at all sampled heights")
    elif not nonrec and len(periods) == 1:
        print(f"advisory: Periodic({periods.pop()}) everywhere; no non-recurrent fibres at the sampled heights")
    else:
        print(f"{nonrec} NonRecurrent, {len(verdicts) - nonrec} Periodic among {len(verdicts)} sampled heights")
    print("verification " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_scan(cfg: RunConfig) -> int:
    kind, obj = load_input(cfg.input)
    T, _ = _type_of(kind, obj)
    rep = scan(T, cfg.resolution, cfg.horizon, cfg.qmax)
    data = rep.to_json()
    _write(cfg, json.dumps(data, indent=2) + "\n")
    if cfg.out is not None:
        print(f"non_recurrent_count = {rep.non_recurrent_count}, periodic_count = {rep.periodic_count}")
    return EXIT_OK


def cmd_orbit(cfg: RunConfig) -> int:
    kind, obj = load_input(cfg.input)
    if kind != "orbit":
        raise InputError("orbit needs a config with a 'rho' field")
    rho, n = obj
    n = n if cfg.orbit_n is None else cfg.orbit_n
    rho = rho.frac()
    if not rho:
        raise InputError("rho must not be an integer")
    gaps = orbit_gaps(rho, n)
    values = distinct_gaps(gaps)
    data = {
        "rho": _fmt(rho),
        "n": n,
        "distinct_gap_count": len(values),
        "gaps": [{"length": _fmt(v), "count": sum(1 for x in gaps if x == v)} for v in values],
    }
    _write(cfg, json.dumps(data, indent=2) + "\n")
    if cfg.out is not None:
        print(f"{len(values)} distinct gap lengths among {len(gaps)} gaps")
    return EXIT_OK


# -----------------------------------------------------------------------------
# rendering


def _num(x) -> str:
    v = float(x)
    s = f"{v:.12g}"
    return "0" if s == "-0" else s


def render_svg(C: NodalChart, levels: int = 8, stroke_width: float = 1.5, size: int = 480) -> str:
    T = C.type
    g0 = g(T, 0)
    extent = max(float(g0), float(T.M))
    scale = size / extent
    pad = 20

    def X(u):
        return _num(pad + float(u) * scale)

    def Y(h):
        return _num(pad + float(T.M - h) * scale)

    width = _num(2 * pad + float(g0) * scale)
    height = _num(2 * pad + float(T.M) * scale)
    sw = _num(stroke_width)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    # outline: u = 0 on the left, u = g(h) on the right
    right = [QuadraticNumber(0)] + sorted(set(T.alphas)) + [T.M]
    pts = [(0, 0)] + [(g(T, h), h) for h in right] + [(0, T.M)]
    out.append(f'<polygon class="domain" fill="none" stroke="black" stroke-width="{sw}" points="'
               + " ".join(f"{X(u)},{Y(h)}" for u, h in pts) + '"/>')
    for j in range(1, levels + 1):
        h = T.M * j / (levels + 1)
        out.append(f'<line class="level" x1="{X(0)}" y1="{Y(h)}" x2="{X(g(T, h))}" y2="{Y(h)}" '
                   f'stroke="grey" stroke-width="{_num(stroke_width / 2)}"/>')
    for p, q in C.cuts():
        out.append(f'<line class="cut" x1="{X(p[0])}" y1="{Y(p[1])}" x2="{X(q[0])}" y2="{Y(q[1])}" '
                   f'stroke="black" stroke-width="{_num(stroke_width / 2)}" stroke-dasharray="4 3"/>')
    out.append(f'<line class="ridge" x1="{X(0)}" y1="{Y(T.M)}" x2="{X(2 * T.w)}" y2="{Y(T.M)}" '
               f'stroke="crimson" stroke-width="{_num(stroke_width * 2)}"/>')
    r = 4
    for n in C.nodes:
        cx, cy = float(X(n.u)), float(Y(n.h))
        kind = "parked" if n.is_parked else "hat"
        out.append(f'<g class="node {kind}" data-tag="{n.tag}">'
                   f'<line x1="{_num(cx - r)}" y1="{_num(cy - r)}" x2="{_num(cx + r)}" y2="{_num(cy + r)}" stroke="black" stroke-width="{sw}"/>'
                   f'<line x1="{_num(cx - r)}" y1="{_num(cy + r)}" x2="{_num(cx + r)}" y2="{_num(cy - r)}" stroke="black" stroke-width="{sw}"/>'
                   '</g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_render(cfg: RunConfig) -> int:
    kind, obj = load_input(cfg.input)
    _, C = _type_of(kind, obj)
    _write(cfg, render_svg(C, cfg.levels, cfg.stroke_width))
    return EXIT_OK


COMMANDS = {
    "describe": cmd_describe,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "orbit": cmd_orbit,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toricrec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--input", type=Path, required=True)
        s.add_argument("--out", type=Path)
        s.add_argument("--resolution", type=int, default=20)
        s.add_argument("--horizon", type=int, help="witness horizon N (orbit: number of points)")
        s.add_argument("--qmax", type=int, default=24)
        s.add_argument("--levels", type=int, default=8)
        s.add_argument("--samples", type=int, default=1000, help="sample points for verify")
        s.add_argument("--stroke-width", type=float, default=1.5)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        horizon = 10_000 if args.horizon is None else args.horizon
        cfg = RunConfig(args.command, args.input, args.out, args.resolution, horizon,
                        args.qmax, args.levels, args.samples, args.stroke_width, args.horizon)
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
