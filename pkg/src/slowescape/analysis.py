"""Empirical classifiers: pits effect, growth of the maximum modulus, and
bounded-gap small-value sequences.

All verdicts are finite-scale findings from sampling, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import CapacityError, DomainError, UnsupportedDepthError
from .maps import MapDescriptor, iter_maxmod, max_modulus
from .numeric_tower import apply_log

DEFAULT_SCALES = (1e2, 10 ** 2.5, 1e3, 10 ** 3.5, 1e4)
ANGULAR, RADIAL, REFINE = 512, 128, 4
MAX_POLISH = 32


def _log_abs(f: MapDescriptor, z: np.ndarray) -> np.ndarray:
    """``log|f(z)|``, falling back to the map's log evaluation where ``f`` overflows."""
    with np.errstate(all="ignore"):
        out = np.log(np.abs(f(z)))
    bad = np.isnan(out) | (np.isinf(out) & (out > 0))
    if np.any(bad):
        with np.errstate(all="ignore"):
            out[bad] = np.real(f.log_eval(z[bad]))
    return out


# -- pits ------------------------------------------------------------------------

@dataclass
class PitsReport:
    has_pits: bool
    per_scale: list
    N_used: int
    epsilon: float
    c: float
    N_max: int
    scales: list
    covers: list
    counts: list
    skipped: list = field(default_factory=list)
    note: str = ("finite-scale verdict; greedy covers can only over-count, "
                 "so errors lean towards 'no pits'")

    def to_dict(self):
        return asdict(self)


def _sublevel_samples(f, R, c, rng, angular=ANGULAR, radial=RADIAL, refine=REFINE):
    r = np.linspace(R, c * R, radial)
    th = np.linspace(0, 2 * np.pi, angular, endpoint=False)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    z = rr * np.exp(1j * tt)
    la = _log_abs(f, z)
    if np.any(np.isnan(la)):
        raise CapacityError(f"{f.spec} cannot be evaluated at scale {R:g}")
    pts = [z[la <= 0]]
    # refine cells whose corner minimum is within a factor 10 of the threshold
    cmin = np.minimum.reduce([la[:-1, :], la[1:, :], np.roll(la, -1, 1)[:-1, :],
                              np.roll(la, -1, 1)[1:, :]])
    i, j = np.nonzero(cmin <= math.log(10))
    if len(i):
        dr, dt = r[1] - r[0], th[1] - th[0]
        u = (np.arange(refine) + rng.uniform(0, 1, refine)) / refine
        ur, ut = np.meshgrid(u, u, indexing="ij")
        fr = r[i][:, None] + dr * ur.ravel()[None, :]
        ft = th[j][:, None] + dt * ut.ravel()[None, :]
        zf = (fr * np.exp(1j * ft)).ravel()
        pts.append(zf[_log_abs(f, zf) <= 0])
    # pits narrower than the grid: polish discrete local minima
    nb = [np.roll(la, 1, 1), np.roll(la, -1, 1), np.roll(la, 1, 0), np.roll(la, -1, 0)]
    loc = np.all([la <= v for v in nb], axis=0)
    loc[0, :] = loc[-1, :] = False
    cand = np.flatnonzero(loc.ravel() & (la.ravel() > 0))
    cand = cand[np.argsort(la.ravel()[cand])][:MAX_POLISH]
    h = (r[1] - r[0])
    for k in cand:
        z0 = z.ravel()[k]
        res = minimize(lambda p: float(_log_abs(f, np.array([complex(p[0], p[1])]))[0]),
                       [z0.real, z0.imag], method="Nelder-Mead",
                       options={"xatol": 1e-9 * R, "fatol": 1e-9})
        zm = complex(res.x[0], res.x[1])
        if res.fun <= 0 and R <= abs(zm) <= c * R:
            d = zm + h * 0.05 * (rng.uniform(-1, 1, 64) + 1j * rng.uniform(-1, 1, 64))
            d = d[(np.abs(d) >= R) & (np.abs(d) <= c * R)]
            pts.append(np.concatenate([[zm], d[_log_abs(f, d) <= 0]]))
    return np.concatenate(pts)


def greedy_cover(points: np.ndarray, radius: float, limit: int | None = None) -> list:
    """Farthest-point ball cover: centres from ``points`` until all are within ``radius``.

    Stops after ``limit`` centres if given (the caller then knows more are needed).
    """
    points = np.asarray(points, complex)
    if len(points) == 0:
        return []
    centres = [points[0]]
    d = np.abs(points - points[0])
    while d.max() > radius:
        if limit is not None and len(centres) >= limit:
            break
        k = int(np.argmax(d))
        centres.append(points[k])
        d = np.minimum(d, np.abs(points - points[k]))
    return centres


def detect_pits(f: MapDescriptor, c: float = 3.0, eps: float = 0.05, N_max: int = 8,
                scales=DEFAULT_SCALES, seed: int = 0) -> PitsReport:
    """Whether ``{R <= |x| <= cR : |f(x)| <= 1}`` fits in ``N_max`` balls of radius ``eps R``."""
    if not c > 1 or not eps > 0 or N_max < 1:
        raise DomainError("need c > 1, eps > 0 and N_max >= 1")
    scales = [float(s) for s in scales]
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise DomainError("scales must increase")
    rng = np.random.default_rng(seed)
    verdicts, covers, counts, skipped, used = [], [], [], [], []
    for R in scales:
        try:
            pts = _sublevel_samples(f, R, c, rng)
        except CapacityError:
            skipped.append(R)
            continue
        cen = greedy_cover(pts, eps * R, limit=N_max + 1)
        ok = len(cen) <= N_max and (len(pts) == 0 or
                                    np.max(np.min(np.abs(pts[:, None] - np.array(cen)[None, :]),
                                                  axis=1)) <= eps * R)
        verdicts.append(bool(ok))
        used.append(R)
        counts.append(len(cen))
        covers.append([[float(z.real), float(z.imag), eps * R] for z in cen])
    return PitsReport(bool(verdicts) and all(verdicts), verdicts, max(counts, default=0), eps,
                      c, N_max, used, covers, counts, skipped)


# -- growth ----------------------------------------------------------------------

def log_maxmod(f: MapDescriptor, r: float) -> float:
    """``log M(r)``, through the level-index tower when ``M(r)`` overflows."""
    try:
        m = max_modulus(f, r)
        if math.isfinite(m) and m > 0:
            return math.log(m)
    except CapacityError:
        pass
    try:
        return apply_log(iter_maxmod(f, float(r), 1)).to_real()
    except (UnsupportedDepthError, OverflowError) as e:
        raise CapacityError(f"log M({r:g}) is out of reach for {f.spec}") from e


def _knee(v) -> int:
    k = len(v) - 1
    while k > 0 and v[k] > v[k - 1]:
        k -= 1
    return k


@dataclass
class GrowthReport:
    map: str
    A: float
    r: list
    log_ratio: list        # log(M(Ar) / M(r))
    log_over_log: list     # log M(r) / log r
    knee_ratio: int
    knee_log: int
    factor_ratio: float    # final / initial of M(Ar)/M(r), as a log when huge
    factor_log: float

    @property
    def ratio(self):
        return [math.exp(v) if v < 700 else math.inf for v in self.log_ratio]

    @property
    def passes(self) -> bool:
        """Both sequences increase over the whole grid with final/initial above 10."""
        return (self.knee_ratio == 0 and self.knee_log == 0
                and self.log_factor_ratio > math.log(10) and self.factor_log > 10)

    @property
    def log_factor_ratio(self) -> float:
        return self.log_ratio[-1] - self.log_ratio[0]

    def rows(self):
        for i, r in enumerate(self.r):
            yield r, self.ratio[i], self.log_ratio[i], self.log_over_log[i]

    def to_dict(self):
        d = asdict(self)
        d.update(passes=self.passes, ratio=self.ratio)
        return d


def growth_check(f: MapDescriptor, A: float = 2.0, r_grid=(10.0, 1e2, 1e3, 1e4)) -> GrowthReport:
    """Tabulate ``M(Ar)/M(r)`` and ``log M(r)/log r`` over ``r_grid``."""
    if not A > 1:
        raise DomainError("need A > 1")
    r_grid = [float(r) for r in r_grid]
    if any(b <= a for a, b in zip(r_grid, r_grid[1:])) or r_grid[0] <= 1:
        raise DomainError("grid must increase and start above 1")
    lr = [log_maxmod(f, A * r) - log_maxmod(f, r) for r in r_grid]
    ll = [log_maxmod(f, r) / math.log(r) for r in r_grid]
    fr = lr[-1] - lr[0]
    return GrowthReport(f.spec, A, r_grid, lr, ll, _knee(lr), _knee(ll),
                        math.exp(fr) if fr < 700 else math.inf, ll[-1] / ll[0])


# -- small values on annuli ------------------------------------------------------

@dataclass
class Thm3ConditionReport:
    condition: str
    param: float
    witnesses: list          # [n, x, log|f(x)|] per annulus with a witness
    missing: list            # annulus indices without a witness
    ratio_check: float       # max |x_{n+1}| / |x_n| over consecutive witnesses
    ratios: list
    L_max: float
    slack: list = field(default_factory=list)      # condition c: s log M - log|f|
    slack_ratio: list = field(default_factory=list)  # condition c: log|f| / (s log M)

    @property
    def holds(self) -> bool:
        """Witnesses in every annulus, consecutive ratios at most ``L_max``."""
        ok = not self.missing and bool(self.witnesses) and self.ratio_check <= self.L_max
        if self.condition == "c":
            ok = ok and all(s > 0 for s in self.slack)
        return ok

    def to_dict(self):
        d = asdict(self)
        d["witnesses"] = [[n, [x.real, x.imag], v] for n, x, v in self.witnesses]
        d["holds"] = self.holds
        return d


def _annulus_min(f, lo, hi, radial=16, angular=256):
    r = np.linspace(lo, hi, radial)
    th = np.linspace(0, 2 * np.pi, angular, endpoint=False)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    z = (rr * np.exp(1j * tt)).ravel()
    la = _log_abs(f, z)
    best_v, best_z = math.inf, None
    for k in np.argsort(la)[:4]:
        if la[k] == -np.inf:
            return complex(z[k]), -math.inf

        def obj(p):
            v = _log_abs(f, np.array([p[0] * np.exp(1j * p[1])]))[0]
            return v if np.isfinite(v) else (-1e300 if v < 0 else 1e300)
        res = minimize(obj, [abs(z[k]), np.angle(z[k])], method="L-BFGS-B",
                       bounds=[(lo, hi), (None, None)])
        v, zz = float(res.fun), complex(res.x[0] * np.exp(1j * res.x[1]))
        if la[k] < v:
            v, zz = float(la[k]), complex(z[k])
        if v < best_v:
            best_v, best_z = v, zz
    return best_z, best_v


def scan_thm3_conditions(f: MapDescriptor, which: str = "b", param: float | None = None,
                         annuli=None, L_max: float = 2.0) -> Thm3ConditionReport:
    """Minimise ``|f|`` on each annulus and test ``|f(x)| <= c`` (b) or
    ``|f(x)| <= M(|x|)^s`` (c); report witnesses and the realized gap ratio ``L``.
    """
    if which not in ("b", "c"):
        raise DomainError("condition must be 'b' or 'c'")
    if param is None:
        param = 1.0 if which == "b" else 0.5
    if which == "b" and not param > 0:
        raise DomainError("need c > 0")
    if which == "c" and not 0 < param < 1:
        raise DomainError("need 0 < s < 1")
    if annuli is None:
        annuli = [(n - 0.5, n + 0.5) for n in range(1, 21)]
    wit, missing, slack, sratio = [], [], [], []
    for n, (lo, hi) in enumerate(annuli, start=1):
        x, v = _annulus_min(f, float(lo), float(hi))
        if which == "b":
            ok = v <= math.log(param)
        else:
            bound = param * log_maxmod(f, abs(x))
            ok = v <= bound
            if ok:
                slack.append(bound - v)
                sratio.append(v / bound if bound else math.inf)
        if ok:
            wit.append((n, x, v))
        else:
            missing.append(n)
    ratios = [abs(b[1]) / abs(a[1]) for a, b in zip(wit, wit[1:])]
    return Thm3ConditionReport(which, float(param), wit, missing, max(ratios, default=math.inf),
                               ratios, L_max, slack, sratio)
