"""Batch command line tying the package together.

Five subcommands: ``gaps`` (strip slopes and their differences), ``orbit``
(transversal return orbits), ``mc-tail`` (seeded Monte Carlo survival
curves), ``closed-form`` (exact tail/cdf/density/bounds tables), and
``difftest`` (formula-vs-enumeration comparison reports).

Outputs are CSV (UTF-8, header row, LF) or a JSON report; JSON reports
follow the shipped ``report-schema.json``.  Exit codes: 0 success or a
known-discrepancy report, 2 usage or parse failure, 3 invalid state
(off-transversal starts, out-of-regime thresholds), 4 counterexamples in a
region whose formula is checked as ground truth.
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, closedform
from .errors import (
    AmbiguityError,
    DegenerateInputError,
    InvalidInputError,
    NotOnTransversalError,
    OutOfRegimeError,
    SlitgapsError,
)
from .geometry import AffineLattice, Mat2, SurfaceMode, Vec2, enumerate_strip, slopes_and_gaps
from .measures import ENGINES, FORMULA, MeasureSpec, mc_tail, orbit
from .oracle import REGIONS, diff_test
from .transversal import OmegaCoords, VLCoords, WPointSA, WPointSL, omega_to_surface

SPEC_VERSION = "1.0"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STATE = 3
EXIT_REGRESSION = 4

# regions whose counterexamples are findings to report, not regressions
KNOWN_DISCREPANCY_REGIONS = ("WslRho", "WReturn")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation: what ran, with which knobs."""

    command: str
    params: dict

    def to_dict(self) -> dict:
        out = {"command": self.command}
        out.update({k: v for k, v in sorted(self.params.items())})
        return out


def _parse_config_file(path: str) -> dict:
    """key = value lines; # starts a comment; keys match long flag names."""
    text = Path(path).read_text(encoding="utf-8")
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_CONVERTERS = {
    "seed": int,
    "workers": int,
    "samples": int,
    "iters": int,
    "slope_max": float,
    "count": int,
    "engine": str,
    "mode": str,
    "out": str,
    "format": str,
    "plot": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "t_grid": str,
    "measure": str,
    "component": str,
    "start": str,
    "omega": str,
    "surface": str,
    "region": str,
    "v_domain": str,
    "h": float,
}

_DEFAULTS = {
    "gaps": {"mode": "affine", "out": None, "format": "csv", "plot": False},
    "orbit": {
        "engine": FORMULA,
        "iters": 100,
        "out": None,
        "format": "csv",
        "plot": False,
    },
    "mc-tail": {
        "engine": FORMULA,
        "samples": 100_000,
        "seed": 0,
        "workers": 1,
        "out": None,
        "format": "csv",
        "plot": False,
    },
    "closed-form": {
        "component": "tail",
        "h": 1e-5,
        "out": None,
        "format": "csv",
        "plot": False,
    },
    "difftest": {
        "samples": 10_000,
        "seed": 0,
        "workers": 1,
        "mode": "affine",
        "v_domain": "fundamental",
        "out": None,
    },
}


def _merge_config(command: str, args: argparse.Namespace) -> RunConfig:
    """File values fill flags the user left out; explicit flags win."""
    explicit = {k: v for k, v in vars(args).items() if k not in ("command", "func")}
    config_path = explicit.pop("config", None)
    params = dict(_DEFAULTS[command])
    if config_path is not None:
        for key, raw in _parse_config_file(config_path).items():
            if key not in _CONVERTERS:
                raise InvalidInputError(f"unknown config key {key!r}")
            try:
                params[key] = _CONVERTERS[key](raw)
            except ValueError as exc:
                raise InvalidInputError(f"bad config value for {key}: {raw!r}") from exc
    params.update(explicit)
    return RunConfig(command=command, params=params)


def _parse_floats(text: str, n: int, what: str) -> tuple:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise InvalidInputError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise InvalidInputError(f"{what}: {exc}") from exc


def parse_t_grid(text: str):
    """`a:b:step` inclusive grid, or an explicit comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidInputError(f"grid must be a:b:step, got {text!r}")
        try:
            a, b, step = (float(p) for p in parts)
        except ValueError as exc:
            raise InvalidInputError(f"grid {text!r}: {exc}") from exc
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(step)):
            raise InvalidInputError(f"grid {text!r} has non-finite entries")
        if step <= 0.0:
            raise InvalidInputError(f"grid step must be positive, got {step!r}")
        if b < a:
            raise InvalidInputError(f"grid end {b!r} is below start {a!r}")
        vals = []
        k = 0
        while True:
            t = a + k * step
            if t > b + 1e-12 * max(1.0, abs(b)):
                break
            vals.append(min(t, b))
            k += 1
        return vals
    vals = list(_parse_floats(text, len([p for p in text.split(",") if p.strip()]), "grid"))
    if not vals:
        raise InvalidInputError("empty t grid")
    return vals


def _load_surface(path: str) -> AffineLattice:
    """{"g": [[.,.],[.,.]], "v": [.,.]} with unimodular g."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise InvalidInputError(f"surface file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"surface file {path}: {exc}") from exc
    try:
        (g11, g12), (g21, g22) = data["g"]
        v1, v2 = data["v"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"surface file {path} needs keys g (2x2) and v (2)") from exc
    return AffineLattice(Mat2(float(g11), float(g12), float(g21), float(g22)), Vec2(float(v1), float(v2))).check()


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(out, header, rows):
    """UTF-8, header row, `.` decimal, LF endings."""
    if out is None:
        _emit_csv(sys.stdout, header, rows)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        _emit_csv(fh, header, rows)


def _emit_csv(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(c) for c in row])


def _write_json(out, payload):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _report(config: RunConfig, results, counterexamples=()) -> dict:
    return {
        "config": config.to_dict(),
        "results": results,
        "counterexamples": list(counterexamples),
        "versions": {"spec": SPEC_VERSION, "build": __version__},
    }


def _sidecar_path(out: str) -> str:
    return out + ".json"


def _write_plot_script(out: str, columns, with_errors=False):
    """Gnuplot companion that renders the CSV next to it."""
    gp = Path(out + ".gp")
    csv_name = Path(out).name
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set grid",
        f"set output '{Path(out).stem}.png'",
        "set terminal pngcairo size 900,600",
    ]
    if with_errors:
        lines.append(f"plot '{csv_name}' using 1:2:3 with yerrorlines")
    else:
        using = ", ".join(f"'{csv_name}' using 1:{i} with lines" for i in range(2, 2 + len(columns)))
        lines.append(f"plot {using}")
    gp.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _point_row(kind: str, point) -> tuple:
    if isinstance(point, OmegaCoords):
        return (kind or "omega", point.a, point.b, point.s, point.alpha)
    if isinstance(point, VLCoords):
        return (kind or "vertical", point.a, "", point.s, point.alpha)
    if isinstance(point, WPointSL):
        return (kind or "sl", point.a, point.b, point.v1, point.v2)
    if isinstance(point, WPointSA):
        return (kind or "sa", point.a, point.b, point.s, point.alpha)
    raise InvalidInputError(f"unknown section point {point!r}")


def cmd_gaps(config: RunConfig) -> int:
    p = config.params
    if p.get("omega") is not None and p.get("surface") is not None:
        raise InvalidInputError("pass either --omega or --surface, not both")
    if p.get("omega") is not None:
        a, b, s, alpha = _parse_floats(p["omega"], 4, "--omega")
        surface = omega_to_surface(OmegaCoords(a, b, s, alpha))
    elif p.get("surface") is not None:
        surface = _load_surface(p["surface"])
    else:
        raise InvalidInputError("gaps needs --omega coords or a --surface file")
    mode = SurfaceMode(p["mode"])

    if p.get("slope_max") is None and p.get("count") is None:
        raise InvalidInputError("gaps needs --slope-max or --count")
    if p.get("slope_max") is not None:
        pts = enumerate_strip(surface, mode, float(p["slope_max"]))
        series = slopes_and_gaps(pts)
        slopes, gaps = list(series.slopes), list(series.gaps)
    else:
        want = int(p["count"])
        if want < 1:
            raise InvalidInputError("--count must be >= 1")
        cap = 8.0
        while True:
            series = slopes_and_gaps(enumerate_strip(surface, mode, cap))
            if len(series.slopes) >= want or cap > 1e15:
                break
            cap *= 2.0
        slopes = list(series.slopes)[:want]
        gaps = list(series.gaps)[: max(0, want - 1)]

    rows = [(i, s, gaps[i] if i < len(gaps) else "") for i, s in enumerate(slopes)]
    if p["format"] == "json":
        _write_json(p["out"], _report(config, {"slopes": slopes, "gaps": gaps}))
    else:
        _write_csv(p["out"], ("index", "slope", "gap"), rows)
        if p["out"] is not None:
            _write_json(_sidecar_path(p["out"]), _report(config, {"n_slopes": len(slopes)}))
    if p["plot"]:
        if p["out"] is None:
            raise InvalidInputError("--plot needs --out")
        _write_plot_script(p["out"], ("slope", "gap"))
    return EXIT_OK


def cmd_orbit(config: RunConfig) -> int:
    p = config.params
    if p.get("start") is None:
        raise InvalidInputError("orbit needs --start a,b,s,alpha")
    a, b, s, alpha = _parse_floats(p["start"], 4, "--start")
    try:
        start = OmegaCoords(a, b, s, alpha)
    except SlitgapsError as exc:
        raise NotOnTransversalError(f"start is not on the transversal: {exc}") from exc
    engine = p["engine"]
    if engine not in ENGINES:
        raise InvalidInputError(f"unknown engine {engine!r}")
    iters = int(p["iters"])
    if iters < 0:
        raise InvalidInputError("--iters must be >= 0")

    rows = []
    current = start
    for step, u, nxt in orbit(start, engine, iters):
        kind, ca, cb, cs, calpha = _point_row("", current)
        rows.append((step, u, kind, ca, cb, cs, calpha))
        current = nxt
    header = ("step", "return_time", "kind", "a", "b", "s", "alpha")
    if p["format"] == "json":
        results = [dict(zip(header, row)) for row in rows]
        _write_json(p["out"], _report(config, results))
    else:
        _write_csv(p["out"], header, rows)
        if p["out"] is not None:
            _write_json(_sidecar_path(p["out"]), _report(config, {"steps": len(rows)}))
    if p["plot"]:
        if p["out"] is None:
            raise InvalidInputError("--plot needs --out")
        _write_plot_script(p["out"], ("return_time",))
    return EXIT_OK


def cmd_mc_tail(config: RunConfig) -> int:
    p = config.params
    if p.get("measure") is None or p.get("t_grid") is None:
        raise InvalidInputError("mc-tail needs --measure and --t-grid")
    measure = MeasureSpec.parse(p["measure"])
    grid = parse_t_grid(p["t_grid"])
    est = mc_tail(measure, p["engine"], grid, int(p["samples"]), int(p["seed"]), int(p["workers"]))
    rows = list(est.rows())
    if p["format"] == "json":
        _write_json(p["out"], _report(config, est.to_dict()))
    else:
        _write_csv(p["out"], ("t", "survival", "ci_halfwidth", "n_eff"), rows)
        if p["out"] is not None:
            _write_json(_sidecar_path(p["out"]), _report(config, est.to_dict()))
    if p["plot"]:
        if p["out"] is None:
            raise InvalidInputError("--plot needs --out")
        _write_plot_script(p["out"], ("survival",), with_errors=True)
    return EXIT_OK


def _closed_form_rows(component: str, grid, h: float):
    law = closedform.DOUBLED_TAIL
    if component == "tail":
        return ("t", "tail"), [(t, closedform.w_tail_closed_form(t)) for t in grid]
    if component == "cdf":
        return ("t", "cdf"), [(t, law.cdf(t)) for t in grid]
    if component == "density":
        rows = []
        for t in grid:
            try:
                d = law.density(t, h)
            except AmbiguityError:
                d = law.density(t, h, one_sided=True)
            lo, hi = d if isinstance(d, tuple) else (d, d)
            rows.append((t, lo, hi))
        return ("t", "density_left", "density_right"), rows
    if component == "bounds":
        rows = []
        for t in grid:
            lo, hi = closedform.omega_tail_bounds(t)
            rows.append((t, lo, hi))
        return ("t", "lower", "upper"), rows
    if component.startswith("torsion:"):
        try:
            q = int(component.split(":", 1)[1])
        except ValueError as exc:
            raise InvalidInputError(f"bad torsion order in {component!r}") from exc
        return ("t", "tail"), [(t, closedform.torsion_tail(q, t)) for t in grid]
    raise InvalidInputError(f"unknown component {component!r}")


def cmd_closed_form(config: RunConfig) -> int:
    p = config.params
    if p.get("t_grid") is None:
        raise InvalidInputError("closed-form needs --t-grid")
    grid = parse_t_grid(p["t_grid"])
    header, rows = _closed_form_rows(p["component"], grid, float(p["h"]))
    if p["format"] == "json":
        results = [dict(zip(header, row)) for row in rows]
        _write_json(p["out"], _report(config, results))
    else:
        _write_csv(p["out"], header, rows)
        if p["out"] is not None:
            _write_json(_sidecar_path(p["out"]), _report(config, {"rows": len(rows)}))
    if p["plot"]:
        if p["out"] is None:
            raise InvalidInputError("--plot needs --out")
        _write_plot_script(p["out"], header[1:])
    return EXIT_OK


def cmd_difftest(config: RunConfig) -> int:
    p = config.params
    region = p.get("region")
    if region not in REGIONS:
        raise InvalidInputError(f"unknown region {region!r}; choose from {', '.join(REGIONS)}")
    report = diff_test(
        region,
        int(p["samples"]),
        int(p["seed"]),
        p["mode"],
        int(p["workers"]),
        v_domain=p["v_domain"],
    )
    payload = _report(config, report.to_dict(), report.to_dict()["counterexamples"])
    _write_json(p["out"], payload)
    if region in KNOWN_DISCREPANCY_REGIONS:
        return EXIT_OK
    return EXIT_REGRESSION if report.n_discrepant > 0 else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slitgaps",
        description="gap statistics of strip slopes on marked tori and slit covers",
    )
    parser.add_argument("--version", action="version", version=f"slitgaps {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(sp, plot=True):
        sp.add_argument("--config", default=S, help="key = value defaults file; flags win")
        sp.add_argument("--out", default=S, help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=S)
        if plot:
            sp.add_argument("--plot", action="store_true", default=S, help="emit a gnuplot script next to --out")

    g = sub.add_parser("gaps", help="strip slopes and consecutive gaps")
    g.add_argument("--omega", default=S, help="a,b,s,alpha section coordinates")
    g.add_argument("--surface", default=S, help="JSON file with g (2x2) and v (2)")
    g.add_argument("--mode", choices=("affine", "doubled"), default=S)
    g.add_argument("--slope-max", dest="slope_max", type=float, default=S)
    g.add_argument("--count", type=int, default=S, help="emit the first N slopes instead")
    common(g)
    g.set_defaults(func=cmd_gaps)

    o = sub.add_parser("orbit", help="iterate the section return map")
    o.add_argument("--start", default=S, help="a,b,s,alpha start point")
    o.add_argument("--engine", choices=ENGINES, default=S)
    o.add_argument("--iters", type=int, default=S)
    common(o)
    o.set_defaults(func=cmd_orbit)

    m = sub.add_parser("mc-tail", help="Monte Carlo survival curve")
    m.add_argument("--measure", default=S, help="haar-omega | haar-w | torsion:q | periodic-omega:a,alpha | periodic-point")
    m.add_argument("--engine", choices=ENGINES, default=S)
    m.add_argument("--t-grid", dest="t_grid", default=S, help="a:b:step or comma list")
    m.add_argument("--samples", type=int, default=S)
    m.add_argument("--seed", type=int, default=S)
    m.add_argument("--workers", type=int, default=S)
    common(m)
    m.set_defaults(func=cmd_mc_tail)

    c = sub.add_parser("closed-form", help="exact tail law tables")
    c.add_argument("--t-grid", dest="t_grid", default=S, help="a:b:step or comma list")
    c.add_argument("--component", default=S, help="tail | cdf | density | bounds | torsion:q")
    c.add_argument("--h", type=float, default=S, help="finite-difference step for density")
    common(c)
    c.set_defaults(func=cmd_closed_form)

    d = sub.add_parser("difftest", help="formula vs enumeration over sampled inputs")
    d.add_argument("region", nargs="?", default=None, help=" | ".join(REGIONS))
    d.add_argument("--samples", type=int, default=S)
    d.add_argument("--seed", type=int, default=S)
    d.add_argument("--workers", type=int, default=S)
    d.add_argument("--mode", choices=("affine", "doubled"), default=S)
    d.add_argument("--v-domain", dest="v_domain", choices=("fundamental", "restricted"), default=S)
    d.add_argument("--config", default=S)
    d.add_argument("--out", default=S)
    d.set_defaults(func=cmd_difftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    func = args.func
    try:
        config = _merge_config(command, args)
        return func(config)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotOnTransversalError, DegenerateInputError, OutOfRegimeError, AmbiguityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATE


if __name__ == "__main__":
    sys.exit(main())
