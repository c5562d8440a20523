"""Covering chains and backward pull-back of a target point.

Given regions ``E_0, ..., E_N`` with ``f(E_n) ⊃ E_{n+1}``, a point of ``E_N``
is pulled back one step at a time: each ``z_n`` solves ``f(z_n) = z_{n+1}``
inside ``E_n``.  The start point ``zeta = z_0`` is then re-iterated forward at
twice the working precision and every containment is checked again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ..covering import CoveringCertificate
from ..errors import DomainError, InconsistencyError, SynthesisError
from ..maps import QUASIREGULAR, MapDescriptor
from ..numeric_tower import LevelIndex, PrecisionPolicy, from_real
from ..regions import Region

GUARD_BITS = 32
NEWTON_STEPS = 120
SEED_GRID = 24
MAX_SEEDS = 48
DRIFT_LIMIT = 0.01


@dataclass
class CoveringChain:
    regions: list
    certificates: list

    def __post_init__(self):
        if not self.regions:
            raise DomainError("a chain needs at least one region")
        if len(self.certificates) != len(self.regions) - 1:
            raise DomainError("need one certificate per covering edge")
        for n, c in enumerate(self.certificates):
            if not c.covered:
                raise DomainError(f"edge {n} is not certified ({c.verdict})")

    def __len__(self):
        return len(self.regions)

    def to_dict(self):
        return {"regions": [r.to_dict() for r in self.regions],
                "certificates": [c.to_dict() for c in self.certificates]}


@dataclass
class StepReport:
    n: int
    value: mpmath.mpc | None
    margin: float | None
    modulus: LevelIndex
    status: str = "verified"
    region: str = ""
    drift: float | None = None

    def to_dict(self, digits: int = 30):
        out = {"n": self.n, "modulus": str(self.modulus), "status": self.status,
               "region": self.region}
        if self.value is not None:
            out["value"] = [mpmath.nstr(mpmath.re(self.value), digits),
                            mpmath.nstr(mpmath.im(self.value), digits)]
        if self.margin is not None:
            out["margin"] = self.margin
        if self.drift is not None:
            out["drift"] = self.drift
        return out


@dataclass
class OrbitPlan:
    chain: CoveringChain
    zeta: mpmath.mpc
    verify_depth: int
    report: list
    precision: int
    offset: int = 0
    extras: dict = field(default_factory=dict)

    def zeta_string(self) -> str:
        digits = int(self.precision * math.log10(2)) + 2
        return mpmath.nstr(self.zeta, digits, strip_zeros=False)

    def max_drift(self) -> float:
        return max((s.drift for s in self.report if s.drift is not None), default=0.0)

    def to_dict(self) -> dict:
        digits = int(self.precision * math.log10(2)) + 2
        return {
            "zeta": [mpmath.nstr(mpmath.re(self.zeta), digits, strip_zeros=False),
                     mpmath.nstr(mpmath.im(self.zeta), digits, strip_zeros=False)],
            "precision_bits": self.precision,
            "offset": self.offset,
            "verify_depth": self.verify_depth,
            "chain": self.chain.to_dict(),
            "report": [s.to_dict() for s in self.report],
            **self.extras,
        }


def _mp_modulus(z) -> LevelIndex:
    a = abs(z)
    if a == 0:
        return LevelIndex(0, 1e-300)
    return from_real(a)


def _residual(f, z, t):
    return abs(f.mp_eval(z) - t) / max(abs(t), mpmath.mpf(1))


def _condition(f, z, t):
    """Relative condition number ``|z| |Df(z)| / |f(z)|`` of evaluating ``f`` at ``z`` (at least 1)."""
    try:
        e = f.mp_expansion(z)
    except NotImplementedError:
        return mpmath.mpf(1)
    return max(mpmath.mpf(1), max(abs(z), 1) * e / max(abs(t), mpmath.mpf(2) ** -64))


def _newton(f, z, t, tol, bound=None):
    """Damped Newton for ``f(z) = t``; derivative-free descent for non-holomorphic maps.

    Trial points with ``|z| > bound`` are treated as failed steps; evaluating a
    transcendental map far outside the target region can cost arbitrary precision.
    """
    if f.kind == QUASIREGULAR or f.mp_derivative(z) is None:
        def F(x, y):
            v = f.mp_eval(mpmath.mpc(x, y)) - t
            return [mpmath.re(v), mpmath.im(v)]
        try:
            x, y = mpmath.findroot(F, (mpmath.re(z), mpmath.im(z)), tol=tol ** 2,
                                   maxsteps=NEWTON_STEPS)
            return mpmath.mpc(x, y)
        except (ValueError, ZeroDivisionError):
            return z
    r = _residual(f, z, t)
    for _ in range(NEWTON_STEPS):
        if r <= tol:
            break
        d = f.mp_derivative(z)
        if d == 0:
            break
        step = (f.mp_eval(z) - t) / d
        lam = mpmath.mpf(1)
        while lam > mpmath.mpf(2) ** -30:
            zn = z - lam * step
            if bound is not None and abs(zn) > bound:
                lam /= 2
                continue
            rn = _residual(f, zn, t)
            if rn < r:
                z, r = zn, rn
                break
            lam /= 2
        else:
            break
    return z


def _seeds(f, E, t):
    """Starting points for the root search: closed-form branches first, then a grid of ``E``."""
    out = list(f.inverse_candidates(t, E.anchor_mp(), count=4))
    if E.symbolic:
        return out
    try:
        g = E.grid(SEED_GRID)
        tc = complex(t)
    except (OverflowError, ValueError):
        return out
    if not (math.isfinite(tc.real) and math.isfinite(tc.imag)) or len(g) == 0:
        return out
    with np.errstate(all="ignore"):
        res = np.abs(f(g) - tc)
    res = np.where(np.isfinite(res), res, np.inf)
    order = np.argsort(res)[:MAX_SEEDS]
    return out + [mpmath.mpc(complex(g[i])) for i in order if np.isfinite(res[i])]


def _pull(f, E, t, prev, prec, hints=()):
    """A preimage of ``t`` inside ``E`` with the deepest containment margin."""
    tol = mpmath.mpf(2) ** (-prec + 8)
    best, best_m = None, -math.inf
    seeds = [prev] if prev is not None else []
    hints = [mpmath.mpc(h) for h in hints]
    # closed-form branches next to the hints, then the hints themselves
    for h in hints[:: max(1, len(hints) // 8)]:
        seeds += f.inverse_candidates(t, h, count=1)
    seeds += hints + _seeds(f, E, t)
    reach = 8 * max(abs(E.anchor_mp()), 1)
    for s in seeds:
        z = _newton(f, mpmath.mpc(s), t, tol, bound=max(reach, 8 * abs(s)))
        if _residual(f, z, t) > tol * _condition(f, z, t):
            continue
        if not E.contains_mp(z):
            continue
        m = E.margin_mp(z)
        if m > best_m:
            best, best_m = z, m
        if prev is not None and s is prev:
            break  # the previous solution polished cleanly; keep the branch
    return best, best_m


def _solve_chain(f, regions, prec, previous=None, target=None, hints=None):
    N = len(regions) - 1
    hints = hints or [()] * N
    with mpmath.workprec(prec):
        zs = [None] * (N + 1)
        margins = [0.0] * (N + 1)
        if target is not None:
            zs[N] = mpmath.mpc(target)
        else:
            zs[N] = previous[N] if previous else regions[N].anchor_mp()
        if not regions[N].contains_mp(zs[N]):
            raise SynthesisError("target lies outside the last region", step=N)
        margins[N] = regions[N].margin_mp(zs[N])
        for n in range(N - 1, -1, -1):
            z, m = _pull(f, regions[n], zs[n + 1], previous[n] if previous else None, prec,
                         hints[n])
            if z is None:
                raise SynthesisError(f"no preimage of z_{n + 1} found in E_{n}", step=n)
            zs[n], margins[n] = z, m
    return zs, margins


def _expansion_bits(f, zs):
    """Bits of relative accuracy lost per step: ``|z| |Df(z)| / |f(z)|`` summed in log2."""
    total = 0.0
    with mpmath.workprec(96):
        for z, w in zip(zs[:-1], zs[1:]):
            try:
                e = f.mp_expansion(z)
            except NotImplementedError:
                e = abs(w) + 1
            gain = max(abs(z), 1) * e / max(abs(w), mpmath.mpf(2) ** -64)
            if gain > 1:
                total += float(mpmath.log(gain, 2))
    return total


def _hints(chain):
    """Seeds from sub-domains recorded by covering certificates."""
    out = []
    for c in chain.certificates:
        sub = getattr(c, "subdomain", None)
        out.append(tuple(sub.points()) if sub is not None else ())
    return out


def forward_verify(f, regions, zeta, prec, reference_margins=None, offset=0):
    """Iterate ``zeta`` at ``prec`` bits and check ``f^n(zeta) ∈ E_n``."""
    report = []
    with mpmath.workprec(prec):
        w = mpmath.mpc(zeta)
        for n, E in enumerate(regions):
            if n:
                w = f.mp_eval(w)
            if not E.contains_mp(w):
                raise InconsistencyError(f"forward iterate {n} left its region {E.literal()}")
            m = E.margin_mp(w)
            drift = None
            if reference_margins is not None:
                ref = reference_margins[n]
                drift = abs(m - ref) / max(abs(ref), 1e-300)
            report.append(StepReport(n + offset, +w, m, _mp_modulus(w), "verified",
                                     E.literal(), drift))
    return report


def backward_orbit(f: MapDescriptor, chain: CoveringChain, offset: int = 0,
                   max_bits: int = 1 << 16, target=None, base_bits: int | None = None) -> OrbitPlan:
    """Pull a point of the last region back through the chain and verify forward.

    The point is the region's anchor unless ``target`` is given.  ``base_bits``
    defaults to ``$SLOWESCAPE_BITS`` (64 when unset).
    """
    base = base_bits or PrecisionPolicy.from_env().base_bits
    regions = chain.regions
    if len(regions) == 1:
        z = mpmath.mpc(target) if target is not None else regions[0].anchor_mp()
        rep = [StepReport(offset, z, regions[0].margin_mp(z), _mp_modulus(z), "verified",
                          regions[0].literal(), 0.0)]
        return OrbitPlan(chain, z, 0, rep, base, offset)
    hints = _hints(chain)
    with mpmath.workprec(base):
        # first pass: enough bits to resolve each point at its own magnitude
        first = base + sum(int(mpmath.log(abs(E.anchor_mp()) + 2, 2)) for E in regions[:-1])
    if first > max_bits:
        raise SynthesisError(f"pull-back needs {first} bits, above the {max_bits}-bit cap", step=0)
    zs, _ = _solve_chain(f, regions, first, target=target, hints=hints)
    prec = max(first, base + GUARD_BITS + int(math.ceil(_expansion_bits(f, zs))))
    if prec > max_bits:
        raise SynthesisError(f"pull-back needs {prec} bits, above the {max_bits}-bit cap",
                             step=0)
    zs, margins = _solve_chain(f, regions, prec, previous=zs, target=target, hints=hints)
    report = forward_verify(f, regions, zs[0], 2 * prec, margins, offset)
    return OrbitPlan(chain, zs[0], len(regions) - 1, report, prec, offset)


def certify_chain(f: MapDescriptor, regions: list, grid: int = 32) -> CoveringChain:
    """Run the grid/winding covering check on every consecutive pair."""
    from ..covering import region_covered

    certs = []
    for n, (U, V) in enumerate(zip(regions, regions[1:])):
        c = region_covered(f, U, V, grid=grid)
        if not c.covered:
            raise SynthesisError(f"edge {n} not certified: {c.verdict}", step=n)
        certs.append(c)
    return CoveringChain(list(regions), certs)


def unchecked_chain(regions: list, method: str = "winding_degree") -> CoveringChain:
    """A chain whose edges the caller has certified by other means (tests, closed forms)."""
    certs = [CoveringCertificate("covered", method, math.inf) for _ in regions[1:]]
    return CoveringChain(list(regions), certs)
