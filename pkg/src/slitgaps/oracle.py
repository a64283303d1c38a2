"""Brute-force return-time oracles and a formula-vs-oracle differential
tester.

The oracle never touches the piecewise return formulas: it enumerates the
holonomy set inside the vertical strip and reads the return time off the
smallest positive slope.  The differential tester samples a region, runs both
engines on every point, and reports any relative disagreement above 1e-6 as a
counterexample.  Two regions are expected to disagree (the short-lattice
travel-time formula, and the slit-cover return when the mirrored coset is
switched on); disagreement there is a finding to report, not a failure.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidInputError, NotOnTransversalError
from .geometry import (
    AffineLattice,
    SurfaceMode,
    Vec2,
    enumerate_strip,
    horocycle_apply,
)
from .measures import MeasureSpec, _batch_measure, _batch_omega, _triangle_uniform
from .transversal import (
    DeltaCoords,
    OmegaCoords,
    VLCoords,
    WPointSA,
    WPointSL,
    bcz_return_time,
    delta_basis,
    omega_return_time,
    omega_to_surface,
    rho_sl_to_sa,
    w_return_time,
    w_to_surface,
)

REL_ERR_THRESHOLD = 1e-6
DEFAULT_CAP = 8.0
CAP_LIMIT = 1e18
REGIONS = ("DeltaR", "OmegaR", "WslRho", "WReturn")


class Engine(enum.Enum):
    FORMULA = "formula"
    ORACLE_AFFINE = "oracle-affine"
    ORACLE_DOUBLED = "oracle-doubled"


@dataclass(frozen=True)
class ReturnObservation:
    point: object
    engine: Engine
    return_time: float

    def __post_init__(self):
        if not self.return_time > 0:
            raise InvalidInputError("return time must be positive")


@dataclass(frozen=True)
class DiffReport:
    region: str
    samples: int
    seed: int
    mode: str
    workers: int
    max_abs_err: float
    max_rel_err: float
    n_discrepant: int
    threshold: float
    counterexamples: tuple

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "samples": self.samples,
            "seed": self.seed,
            "mode": self.mode,
            "workers": self.workers,
            "max_abs_err": self.max_abs_err,
            "max_rel_err": self.max_rel_err,
            "n_discrepant": self.n_discrepant,
            "threshold": self.threshold,
            "counterexamples": [
                {"input": inp, "formula": f, "oracle": o}
                for (inp, f, o) in self.counterexamples
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def oracle_first_return(
    surface: AffineLattice,
    mode: SurfaceMode,
    *,
    cap_hint: Optional[float] = None,
    min_slope: float = 0.0,
) -> float:
    """Smallest positive holonomy slope in the strip: the ground-truth
    return time.

    The slope cap starts at twice the hint (the caller's formula prediction
    when it has one) and doubles until the strip window is nonempty, so the
    work stays proportional to the answer.  Vectors with |y| <= 1e-12 never
    count: they are the section's own horizontals.
    """
    cap = 2.0 * cap_hint if cap_hint is not None and cap_hint > 0 else DEFAULT_CAP
    if not math.isfinite(cap) or cap <= 0:
        cap = DEFAULT_CAP
    while cap <= CAP_LIMIT:
        pts = enumerate_strip(surface, mode, cap)
        if len(pts):
            slopes = pts[:, 1] / pts[:, 0]
            slopes = slopes[slopes > min_slope]
            if len(slopes):
                return float(slopes[0])
        cap *= 2.0
    raise NotOnTransversalError(
        "no positive-slope holonomy vector found below the cap limit"
    )


def w_oracle_return(
    surface: AffineLattice,
    *,
    doubled: bool,
    cap_hint: Optional[float] = None,
) -> float:
    """Ground-truth slit-cover return.  With ``doubled`` the full holonomy
    set (lattice and both marked cosets) competes; without it only the
    lattice and the forward coset do, which is exactly the candidate set the
    closed-form return claims to minimize over."""
    if doubled:
        return oracle_first_return(
            surface, SurfaceMode.DOUBLED_SLIT, cap_hint=cap_hint
        )
    lattice_min = oracle_first_return(
        AffineLattice(surface.g, Vec2(0.0, 0.0)),
        SurfaceMode.DOUBLED_SLIT,
        cap_hint=cap_hint,
    )
    coset_min = oracle_first_return(
        surface, SurfaceMode.AFFINE_ONLY, cap_hint=cap_hint
    )
    return min(lattice_min, coset_min)


def oracle_gap_sequence(
    surface: AffineLattice, mode: SurfaceMode, count: int
) -> np.ndarray:
    """Return times of ``count`` successive section visits, by flowing to the
    next enumerated return each time.

    Cumulative sums reproduce the start surface's strip slopes (offset by the
    first).  Slopes below 1e-9 are skipped: after flowing by a return time
    the just-crossed vector sits within rounding of horizontal, and 1e-9
    dominates the drift of a few thousand accumulated flows.
    """
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    out = np.empty(count)
    cur = surface
    hint = None
    for k in range(count):
        u = oracle_first_return(cur, mode, cap_hint=hint, min_slope=1e-9)
        out[k] = u
        cur = horocycle_apply(u, cur)
        hint = u
    return out


# ---------------------------------------------------------------------------
# differential tester


def _point_dict(region: str, point) -> dict:
    if region == "DeltaR":
        a, b = point
        return {"a": a, "b": b}
    if region == "OmegaR":
        a, b, s, alpha = point
        return {"a": a, "b": b, "s": s, "alpha": alpha}
    if region == "WslRho":
        a, b, v1, v2 = point
        return {"a": a, "b": b, "v1": v1, "v2": v2}
    if isinstance(point, WPointSL):
        return {
            "kind": "sl",
            "a": point.a,
            "b": point.b,
            "v1": point.v1,
            "v2": point.v2,
        }
    p = point.coords
    if isinstance(p, VLCoords):
        return {"kind": "sa-vl", "a": p.a, "s": p.s, "alpha": p.alpha}
    return {"kind": "sa", "a": p.a, "b": p.b, "s": p.s, "alpha": p.alpha}


def _eval_pair(region: str, point, mode: SurfaceMode):
    """(formula, oracle) for one sampled input."""
    if region == "DeltaR":
        a, b = point
        d = DeltaCoords(a, b)
        f = bcz_return_time(d)
        surf = AffineLattice(delta_basis(a, b), Vec2(0.0, 0.0))
        o = oracle_first_return(surf, SurfaceMode.DOUBLED_SLIT, cap_hint=f)
        return f, o
    if region == "OmegaR":
        a, b, s, alpha = point
        p = OmegaCoords(a, b, s, alpha)
        f = omega_return_time(p)
        o = oracle_first_return(
            omega_to_surface(p), SurfaceMode.AFFINE_ONLY, cap_hint=f
        )
        return f, o
    if region == "WslRho":
        a, b, v1, v2 = point
        f = rho_sl_to_sa(a, b, v1, v2)
        surf = AffineLattice(delta_basis(a, b), Vec2(v1, v2))
        if mode is SurfaceMode.DOUBLED_SLIT:
            o = oracle_first_return(surf, SurfaceMode.DOUBLED_SLIT, cap_hint=f)
        else:
            o = oracle_first_return(surf, SurfaceMode.AFFINE_ONLY, cap_hint=f)
        return f, o
    f = w_return_time(point)
    o = w_oracle_return(
        w_to_surface(point),
        doubled=mode is SurfaceMode.DOUBLED_SLIT,
        cap_hint=f,
    )
    return f, o


_PROBES = {
    # worked counterexamples and spot checks, always evaluated first
    "DeltaR": [(1.0, 1.0), (0.5, 0.75)],
    "OmegaR": [
        (0.5, 1.0, 0.2, 0.75),
        (0.8, 0.5, 1.0, 0.3),
        (0.5, 0.6, 2.0, 0.9),
    ],
    "WslRho": [
        (0.6, 0.5, 0.3, 0.5),
        (0.6, 0.9, 0.3, 0.5),
        (0.6, 0.5, 0.5, 0.8),
    ],
}


def _w_return_probes():
    return [
        WPointSA(OmegaCoords(0.5, 0.6, 2.0, 0.9)),
        WPointSL(0.6, 0.5, 0.5, 0.8),
        WPointSL(0.6, 0.5, 0.3, 0.5),
    ]


def _sample_region(region: str, rng, n: int, v_domain: str):
    """n inputs of the region, as a list of eval-ready points."""
    if region == "DeltaR":
        a, b = _triangle_uniform(rng, n)
        return list(zip(a.tolist(), b.tolist()))
    if region == "OmegaR":
        batch = _batch_omega(rng, n)
        return list(
            zip(
                batch["a"].tolist(),
                batch["b"].tolist(),
                batch["s"].tolist(),
                batch["alpha"].tolist(),
            )
        )
    if region == "WslRho":
        a, b = _triangle_uniform(rng, n)
        out = []
        for i in range(n):
            while True:
                cx, cy = rng.random(), rng.random()
                v1 = a[i] * cx + b[i] * cy
                v2 = cy / a[i]
                if v1 > 0 and (v_domain == "fundamental" or v1 < a[i]):
                    break
            out.append((float(a[i]), float(b[i]), v1, v2))
        return out
    batch = _batch_measure(MeasureSpec.haar_w(), rng, n)
    sl, sa = batch["sl"], batch["sa"]
    out = [
        WPointSL(sl["a"][i], sl["b"][i], sl["v1"][i], sl["v2"][i])
        for i in range(len(sl["a"]))
    ]
    out.extend(
        WPointSA(OmegaCoords(sa["a"][i], sa["b"][i], sa["s"][i], sa["alpha"][i]))
        for i in range(len(sa["a"]))
    )
    return out


def diff_test(
    region: str,
    n: int,
    seed: int,
    mode: Union[SurfaceMode, str] = SurfaceMode.AFFINE_ONLY,
    workers: int = 1,
    *,
    v_domain: str = "fundamental",
    max_counterexamples: int = 100,
) -> DiffReport:
    """Formula vs oracle over n sampled inputs plus the canonical probes.

    DeltaR and OmegaR compare against their sections' own ground truth and
    ignore ``mode``.  WslRho compares the travel-time formula against the
    marked-coset minimum (or the doubled minimum under doubled mode).
    WReturn compares the slit-cover return against its claimed candidate set,
    or against the full doubled holonomy under doubled mode.  ``v_domain``
    ("fundamental" or "restricted") selects whether short-lattice markings
    range over the whole period parallelogram or only 0 < v1 < a.

    Sampling splits across workers (worker i draws from default_rng([seed,
    i])), so reports are byte-identical for fixed (seed, n, workers).
    """
    if region not in REGIONS:
        raise InvalidInputError(f"unknown region {region!r}")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if workers < 1:
        raise InvalidInputError("workers must be >= 1")
    if v_domain not in ("fundamental", "restricted"):
        raise InvalidInputError(f"unknown v_domain {v_domain!r}")
    if isinstance(mode, str):
        mode = SurfaceMode(mode)

    points = list(_PROBES.get(region, [])) if region != "WReturn" else _w_return_probes()
    for i in range(workers):
        ni = n // workers + (1 if i < n % workers else 0)
        if ni:
            rng = np.random.default_rng([seed, i])
            points.extend(_sample_region(region, rng, ni, v_domain))

    max_abs = 0.0
    max_rel = 0.0
    bad = []
    n_bad = 0
    for point in points:
        f, o = _eval_pair(region, point, mode)
        abs_err = abs(f - o)
        rel_err = abs_err / max(abs(o), 1e-12)
        max_abs = max(max_abs, abs_err)
        max_rel = max(max_rel, rel_err)
        if rel_err > REL_ERR_THRESHOLD:
            n_bad += 1
            if len(bad) < max_counterexamples:
                bad.append((_point_dict(region, point), float(f), float(o)))

    return DiffReport(
        region=region,
        samples=len(points),
        seed=seed,
        mode=mode.value,
        workers=workers,
        max_abs_err=float(max_abs),
        max_rel_err=float(max_rel),
        n_discrepant=n_bad,
        threshold=REL_ERR_THRESHOLD,
        counterexamples=tuple(bad),
    )
