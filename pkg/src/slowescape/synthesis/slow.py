"""Slowly escaping orbits by holding up in self-covering regions.

A family ``A_1, A_2, ...`` with ``f(A_nu) ⊃ A_{nu+1}`` and pause indices
``nu_k`` with ``f(A_{nu_k}) ⊃ A_{nu_k}`` is built, a holding-up schedule is
computed for the target rate, and the orbit is pulled back along
``A_{mu(N_1)}, A_{mu(N_1 + 1)}, ...``.

Two constructions are available:

* pits: pause balls ``V_k = B(x_k, delta R_k)`` around zeros, certified by
  boundary expansion, joined by annuli ``A(s_k, 2^j R_k)`` with ``M(s_k) = R_k``.
* no pits: pause balls centred on the curve ``|f(z)| = |z|`` that cover
  themselves, each one covering the next directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..covering import ball_expansion_check, region_covered, shell_expansion_check
from ..errors import InfeasibleError, PipelineError
from ..maps import MapDescriptor, max_modulus
from ..regions import Annulus, Ball
from ..schedule import RateSequence, build_schedule, parse_rate, verify_schedule
from .orbit import CoveringChain, OrbitPlan, backward_orbit

GROWTH = (4.0, 3.0, 2.0, 1.5, 1.25)
PAUSE_RADII = (4.0, 5.0, 6.0, 8.0)
MAX_REGIONS = 64
DELTA_STEPS = 8          # delta scanned over l / (4 * DELTA_STEPS), l = 1..DELTA_STEPS + 1
FIRST_PIT = 3


@dataclass
class RegionFamily:
    """Regions ``A_nu`` (stored from ``nu = 1``) with their covering certificates."""

    regions: list = field(default_factory=list)
    pauses: list = field(default_factory=list)
    edge: dict = field(default_factory=dict)      # nu -> cert of f(A_nu) ⊃ A_{nu+1}
    hold: dict = field(default_factory=dict)      # nu -> cert of f(A_nu) ⊃ A_nu
    branch: str = ""
    notes: list = field(default_factory=list)

    def add(self, region, pause: bool = False) -> int:
        self.regions.append(region)
        nu = len(self.regions)
        if pause:
            self.pauses.append(nu)
        return nu

    def region(self, nu: int):
        return self.regions[nu - 1]

    def sup_moduli(self) -> list[float]:
        """``rho_nu``: running maximum of the outer moduli."""
        out, top = [], 0.0
        for r in self.regions:
            top = max(top, float(r.modulus_bounds()[1]))
            out.append(top)
        return out

    def lower_moduli(self) -> list[float]:
        return [float(r.modulus_bounds()[0]) for r in self.regions]


# -- no-pits construction ------------------------------------------------------

def _balance_points(f: MapDescriptor, Y: float, samples: int = 2048) -> list[complex]:
    """Points on ``|z| = Y`` where ``|f(z)| = Y``."""
    th = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    with np.errstate(all="ignore"):
        g = np.log(np.abs(f(Y * np.exp(1j * th)))) - math.log(Y)
    out = []
    for i in np.flatnonzero(np.isfinite(g) & np.isfinite(np.roll(g, -1)) &
                            (np.sign(g) != np.sign(np.roll(g, -1)))):
        a, b = th[i], th[i] + 2 * np.pi / samples

        def h(t):
            return math.log(abs(complex(f(np.array([Y * np.exp(1j * t)]))[0]))) - math.log(Y)
        try:
            t = brentq(h, a, b, xtol=1e-12)
        except ValueError:
            continue
        out.append(Y * complex(math.cos(t), math.sin(t)))
    return out


def _pause_ball(f: MapDescriptor, Y: float, grid: int):
    """A ball near modulus ``Y`` with ``f(B) ⊃ B`` certified, or ``None``."""
    for bump in range(12):
        y = Y * (1 + 0.02 * bump)
        for c in _balance_points(f, y):
            for rad in PAUSE_RADII:
                if rad >= 0.5 * abs(c):
                    continue
                B = Ball(c, rad)
                cert = region_covered(f, B, B, grid=grid)
                if cert.covered:
                    return B, cert
    return None, None


def no_pits_family(f: MapDescriptor, start: float, top: float, grid: int = 32) -> RegionFamily:
    """Self-covering pause balls with growing modulus, each covering the next."""
    fam = RegionFamily(branch="no_pits")
    B, cert = _pause_ball(f, start, grid)
    if B is None:
        raise PipelineError(f"no self-covering pause ball found near modulus {start:g}")
    nu = fam.add(B, pause=True)
    fam.hold[nu] = cert
    while float(B.modulus_bounds()[0]) <= top and len(fam.regions) < MAX_REGIONS:
        Y = abs(B.center)
        for g in GROWTH:
            B2, c2 = _pause_ball(f, g * Y, grid)
            if B2 is None:
                continue
            edge = region_covered(f, B, B2, grid=grid)
            if edge.covered:
                break
        else:
            fam.notes.append(f"no certified advance beyond modulus {Y:g}")
            break
        fam.edge[nu] = edge
        nu = fam.add(B2, pause=True)
        fam.hold[nu] = c2
        B = B2
    return fam


# -- pits construction ---------------------------------------------------------

def _pit_ball(f: MapDescriptor, x: complex):
    R = abs(x)
    for l in range(1, DELTA_STEPS + 2):
        d = l / (4 * DELTA_STEPS)
        cert = ball_expansion_check(f, x, d)
        if cert.covered:
            return Ball(x, d * R), cert
    return None, None


def _inverse_maxmod(f: MapDescriptor, R: float) -> float:
    """``s`` with ``M(s) = R``, by bisection in log scale."""
    lo, hi = -20.0, math.log(R)
    if math.log(max_modulus(f, math.exp(lo))) > math.log(R):
        raise PipelineError(f"M(r) exceeds {R:g} for all tested r")
    return math.exp(brentq(lambda u: math.log(max_modulus(f, math.exp(u))) - math.log(R),
                           lo, hi, xtol=1e-12))


def pits_family(f: MapDescriptor, top: float, first: int = FIRST_PIT) -> RegionFamily:
    """Pause balls around zeros joined by annuli ``A(s_k, 2^j R_k)``."""
    zero = getattr(f, "zero", None)
    if zero is None:
        raise PipelineError(f"{f.spec} exposes no zero sequence for pit balls")
    fam = RegionFamily(branch="pits")
    k = first
    V, vc = _pit_ball(f, complex(zero(k)))
    if V is None:
        raise PipelineError(f"no delta certifies the ball around zero {k}")
    while len(fam.regions) < MAX_REGIONS:
        nu = fam.add(V, pause=True)
        fam.hold[nu] = vc
        R = abs(V.center)
        if R - V.radius > top:
            break
        Vn, vn = _pit_ball(f, complex(zero(k + 1)))
        if Vn is None:
            fam.notes.append(f"no delta certifies the ball around zero {k + 1}")
            break
        s = _inverse_maxmod(f, R)
        if not max_modulus(f, s) > 2 * s:
            raise PipelineError(f"M(s) <= 2s at s = {s:g}; start from a later zero")
        Rn = abs(Vn.center)
        L = 2
        while 1.5 * Rn > 2 ** L * R:
            L += 1
        # f(V_k) ⊃ B(0, 2R_k) ⊃ A(s_k, 2R_k)
        fam.edge[nu] = vc
        for j in range(1, L):
            t = 2 ** j * R
            A = Annulus(s, t)
            cert = shell_expansion_check(f, s, t, hold=V)
            if not cert.covered:
                raise PipelineError(f"shell covering f(A({s:g},{t:g})) ⊃ A({s:g},{2 * t:g}) "
                                    f"not certified: {cert.diagnostic}")
            nu = fam.add(A)
            fam.edge[nu] = cert
        # A(s_k, 2^L R_k) ⊃ V_{k+1}
        if not (s < Rn - Vn.radius and Rn + Vn.radius < 2 ** L * R):
            raise PipelineError(f"pause ball {k + 1} is not inside A(s_k, 2^L R_k)")
        V, vc = Vn, vn
        k += 1
    return fam


# -- assembly ------------------------------------------------------------------

def _as_rate(a) -> RateSequence:
    if isinstance(a, RateSequence):
        return a
    return parse_rate(str(a))


def _chain(fam: RegionFamily, mu: dict, n1: int, horizon: int) -> CoveringChain:
    regions, certs = [], []
    for n in range(n1, horizon + 1):
        regions.append(fam.region(mu[n]))
        if n < horizon:
            m, m2 = mu[n], mu[n + 1]
            certs.append(fam.hold[m] if m2 == m else fam.edge[m])
    return CoveringChain(regions, certs)


def plan_slow_orbit(f: MapDescriptor, a, horizon: int, pits: bool | None = None,
                    grid: int = 32) -> OrbitPlan:
    """Orbit with ``|f^n(zeta)| <= a_n`` on ``[N_1, horizon]`` whose regions tend to infinity."""
    rate = _as_rate(a)
    if rate.tail is not None and not rate.monotone_tail:
        raise InfeasibleError(f"rate {rate.label} does not tend to infinity")
    if rate.tail is None and len(rate.prefix) < 2:
        raise InfeasibleError("a finite rate prefix cannot tend to infinity")
    if pits is None:
        from ..analysis import detect_pits
        pits = detect_pits(f).has_pits
    H = horizon if rate.tail is not None else min(horizon, len(rate.prefix))
    top = max(rate.values(H))
    if pits:
        fam = pits_family(f, top)
    else:
        fam = no_pits_family(f, max(16.0, 0.5 * rate(1)), top, grid=grid)
    rho_vals = fam.sup_moduli()
    rho = RateSequence.of(rho_vals, "rho")
    sched = build_schedule(rate, rho, fam.pauses, horizon)
    if not verify_schedule(sched):
        raise PipelineError("holding-up schedule failed its own verification")
    n1, H = sched.N[0], sched.horizon
    chain = _chain(fam, sched.mu, n1, H)
    plan = backward_orbit(f, chain, offset=n1)

    lower = fam.lower_moduli()
    visited = sorted({sched.mu[n] for n in range(n1, H + 1)})
    bounds = []
    for nu in visited:
        if not bounds or lower[nu - 1] > bounds[-1]:
            bounds.append(lower[nu - 1])
    sandwich = []
    for step in plan.report:
        m = float(abs(step.value))
        sandwich.append({"n": step.n, "modulus": m, "rho_mu": rho_vals[sched.mu[step.n] - 1],
                         "a_n": rate(step.n), "ok": m <= rate(step.n)})
    plan.extras.update({
        "map": f.spec, "rate": rate.label, "horizon": H, "branch": fam.branch,
        "N": sched.N, "nu": fam.pauses, "mu": [sched.mu[n] for n in range(n1, H + 1)],
        "rho": rho_vals, "lower_bounds": bounds,
        "lower_growth": bounds[-1] / bounds[0] if bounds and bounds[0] > 0 else math.inf,
        "sandwich": sandwich, "sandwich_ok": all(s["ok"] for s in sandwich),
        "notes": fam.notes + sched.notes,
        "regions": [r.to_dict() for r in fam.regions],
    })
    return plan
