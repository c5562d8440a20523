"""Fast-escaping orbits that track the iterated maximum modulus.

The orbit runs through thin sector shells ``E_n = Q_{j_n, k_n}(M^n(R))``.  At
each step the shell is refined (``k -> k + 1``) when the next radius has
passed the certification radius ``r_{k+1}``; otherwise ``k`` is kept.  Each
covering ``f(E_n) ⊃ E_{n+1}`` is certified while the scales fit a double;
later steps are carried symbolically in level-index form.
"""

from __future__ import annotations

import math

import mpmath

from ..covering import certify_covering
from ..errors import CapacityError, PlannerError, ScaleMismatchError, UnsupportedDepthError
from ..maps import MapDescriptor, iter_maxmod
from ..numeric_tower import LevelIndex, Ordering, compare, from_real
from ..regions import DEFAULT_CONES, ConeParams, RefinedSectorShell
from .orbit import CoveringChain, OrbitPlan, StepReport, backward_orbit

RADIUS_LADDER = (2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256)

# First ladder radius at which every sector j certifies both the same-k and the
# refined (k+1) covering, measured with certification_radius(grid=32).
RECORDED_RADII = {
    "exp": (32.0, 48.0, 64.0),
    "lambda_exp:0.5": (32.0, 48.0, 64.0),
    "zexp": (32.0, 64.0, 96.0),
    "sin": (24.0, 32.0, 48.0),
    "stretch_exp:K=2.0": (16.0, 24.0, 32.0),
}

MEASURED_DEPTH = 3
_cache: dict = {}


def _shell(j, k, r, cones):
    return RefinedSectorShell(j, k, r, cones)


def _first_sector(f, U, k, Mr, cones, grid):
    for i in range(1, cones.sector_count + 1):
        c = certify_covering(f, U, _shell(i, k, Mr, cones), grid=grid)
        if c.covered:
            return i, c
    return None, None


def certification_radius(f: MapDescriptor, k: int, ladder=RADIUS_LADDER,
                         cones: ConeParams = DEFAULT_CONES, grid: int = 32,
                         start: float = 0.0) -> float:
    """Least ladder radius ``r >= start`` at which, for every sector ``j``,
    ``f(Q_{j,k}(r))`` certifiably covers some ``Q_{i,k}(M(r))`` and some ``Q_{i',k+1}(M(r))``.
    """
    key = (f.spec, k, tuple(ladder), cones, grid, start)
    if key in _cache:
        return _cache[key]
    for r in ladder:
        if r < start:
            continue
        Mr = iter_maxmod(f, float(r), 1)
        if compare(Mr, from_real(float(r))) != Ordering.GREATER:
            continue
        ok = True
        try:
            for j in range(1, cones.sector_count + 1):
                U = _shell(j, k, float(r), cones)
                if _first_sector(f, U, k, Mr, cones, grid)[0] is None or \
                        _first_sector(f, U, k + 1, Mr, cones, grid)[0] is None:
                    ok = False
                    break
        except (CapacityError, ScaleMismatchError):
            break
        if ok:
            _cache[key] = float(r)
            return float(r)
    raise PlannerError(f"no certification radius for k={k} on the ladder", radius=float(ladder[-1]))


def certification_radii(f: MapDescriptor, kmax: int, **kw) -> list[float]:
    """``r_1 <= ... <= r_kmax``; recorded values are used when available."""
    rec = RECORDED_RADII.get(f.spec, ())
    out = []
    for k in range(1, kmax + 1):
        if k <= len(rec) and not kw:
            r = rec[k - 1]
        else:
            r = certification_radius(f, k, start=out[-1] if out else 0.0, **kw)
        out.append(max(r, out[-1]) if out else r)
    return out


def _mp_radii(f, R, radii):
    """``M^n(R)`` as mpf while the previous radius fits a double, ``None`` after.

    A relative error ``e`` in ``r`` becomes roughly ``r e`` in ``M(r)``, so the
    working precision carries ``log2 r`` extra bits for every step taken.
    """
    small = [r.to_real() for r in radii[:-1] if r.fits_double() and r.to_real() < 1e300]
    bits = 128 + sum(int(math.log2(max(x, 2.0))) + 1 for x in small)
    out = [mpmath.mpf(R)]
    with mpmath.workprec(bits):
        for _ in radii[1:]:
            r = out[-1]
            if r is None or not r < 1e300:
                out.append(None)
                continue
            try:
                out.append(f.mp_maxmod(r))
            except NotImplementedError:
                out.append(None)
    return out


def _ge(a: LevelIndex, r: float) -> bool:
    if r == math.inf:
        return False
    return compare(a, from_real(r)) in (Ordering.GREATER, Ordering.EQUAL, Ordering.INDISTINGUISHABLE)


def plan_fast_orbit(f: MapDescriptor, R: float, N: int, thresholds=None,
                    cones: ConeParams = DEFAULT_CONES, grid: int = 32) -> OrbitPlan:
    """Orbit with ``(1 - 1/(k_n+1)) M^n(R) <= |f^n(zeta)| <= (1 + 1/k_n) M^n(R)``."""
    if N < 0:
        raise ValueError("depth must be non-negative")
    if thresholds is None:
        # beyond the measured radii the planner keeps k (Case 2), which stays valid
        thresholds = certification_radii(f, min(N + 1, MEASURED_DEPTH))
    thresholds = [float(t) for t in thresholds]
    if not thresholds or R < thresholds[0]:
        raise PlannerError(f"R = {R} is below the first certification radius "
                           f"{thresholds[0] if thresholds else 'n/a'}", radius=R)
    radii = [from_real(R)]
    for n in range(N):
        try:
            radii.append(iter_maxmod(f, radii[-1], 1))
        except UnsupportedDepthError:
            break
    N = len(radii) - 1
    exact = _mp_radii(f, R, radii)

    regions, certs, ks, cases = [_shell(1, 1, float(R), cones)], [], [1], []
    symbolic_from = None
    k = 1
    for n in range(N):
        nxt = radii[n + 1]
        case1 = k < len(thresholds) and _ge(nxt, thresholds[k])
        knew = k + 1 if case1 else k
        if exact[n + 1] is not None:
            scale = float(exact[n + 1]) if exact[n + 1] < 1e300 else exact[n + 1]
        else:
            scale = nxt.to_real() if nxt.fits_double() else nxt
        E = regions[-1]
        if symbolic_from is None:
            try:
                i, cert = _first_sector(f, E, knew, scale, cones, grid)
            except (CapacityError, ScaleMismatchError):
                i, cert = None, "capacity"
            if cert == "capacity" or (cert is None and E.symbolic):
                symbolic_from = n
            elif i is None:
                r = radii[n].to_real() if radii[n].fits_double() else math.inf
                raise PlannerError(f"covering from {E.literal()} not certified for any sector",
                                   radius=r)
            else:
                certs.append(cert)
        if symbolic_from is not None:
            i = cones.sector_count  # nominal; this step is not certified
        regions.append(_shell(i, knew, scale, cones))
        ks.append(knew)
        cases.append(1 if case1 else 2)
        k = knew

    depth = len(certs)
    chain = CoveringChain(regions[: depth + 1], certs)
    plan = backward_orbit(f, chain)
    with mpmath.workprec(plan.precision * 2):
        for step in plan.report:
            M = exact[step.n] if exact[step.n] is not None else radii[step.n].to_mpf()
            step.ratio = float(abs(step.value) / M)
    for n in range(depth + 1, N + 1):
        plan.report.append(StepReport(n, None, None, radii[n], "symbolic", regions[n].literal()))
    plan.extras.update({
        "map": f.spec, "R": R, "k": ks, "cases": cases, "thresholds": thresholds,
        "certified_steps": depth,
        "envelope": [[1 - 1 / (kk + 1), 1 + 1 / kk] for kk in ks],
        "ratios": [getattr(s, "ratio", None) for s in plan.report],
        "symbolic_regions": [r.to_dict() for r in regions[depth + 1:]],
    })
    return plan
