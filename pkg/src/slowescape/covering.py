"""Certificates for covering relations ``f(U) ⊃ V``.

Coverage of a target ``w`` is decided by the winding number of the image
curve ``f(∂U)`` around ``w``: for a sense-preserving discrete open map the
winding number counts preimages in ``U`` with positive multiplicity, so it is
non-zero exactly when ``w`` has a preimage.  The image curve is refined
adaptively until every chord is short compared with its distance to the
targets.

For whole regions the targets are the nodes of a grid over ``V``.  A grid
cell whose centre is farther from the image curve than the cell's radius has
constant winding, so one node decides it; cells crowded by the curve are
quartered a few times, and nodes that remain within sampling distance of the
curve are counted as lying on ``f(∂U)`` rather than tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.spatial import cKDTree

from .errors import CapacityError, DomainError, ScaleMismatchError
from .maps import MapDescriptor, circle_minimum, max_modulus
from .regions import Ball, Polygon, Region

COVERED, NOT_COVERED, UNDECIDED = "covered", "not_covered", "undecided"
WINDING, BALL_EXPANSION, SHELL_EXPANSION = "winding_degree", "ball_expansion", "shell_expansion"

MARGIN_FLOOR = 1e-9          # relative to the scale of the target
BOUNDARY_BUDGET = 400_000    # image-curve vertices before giving up
START_DENSITY = 256
DEFAULT_GRID = 32
MAX_DEPTH = 2
MODULUS_BAND = 1e-3          # relative band around modulus thresholds
_CLIP = 1e100                # image points are clipped radially (scaled units)
LOCAL_MAX_BITS = 4096         # precision cap for local charts around huge centres


@dataclass
class CoveringCertificate:
    verdict: str
    method: str
    margin: float
    witness: complex | None = None
    winding: int | None = None
    samples: int = 0
    targets: int = 0
    on_curve: int = 0
    diagnostic: str = ""
    details: dict = field(default_factory=dict)

    @property
    def covered(self) -> bool:
        return self.verdict == COVERED

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "method": self.method, "margin": self.margin,
               "samples": self.samples, "targets": self.targets}
        if self.witness is not None:
            out["witness"] = [self.witness.real, self.witness.imag]
        if self.winding is not None:
            out["winding"] = self.winding
        if self.on_curve:
            out["on_curve"] = self.on_curve
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        if self.details:
            out["details"] = self.details
        return out


class _BudgetExceeded(Exception):
    pass


_LOG_CLIP = math.log(_CLIP)


def _image(f, z, scale, log_scale=None):
    """``f(z) / scale`` with far-out values clipped radially to ``_CLIP``.

    When ``scale`` is None, or ``f`` overflows, the map's log branch is used:
    ``exp(log f(z) - log_scale)``.
    """
    w = None
    if scale is not None:
        with np.errstate(all="ignore"):
            w = np.asarray(f(z), complex) / scale
        bad = ~np.isfinite(w)
        if not bad.any():
            m = np.abs(w)
            big = m > _CLIP
            return np.where(big, _CLIP * w / np.where(big, m, 1.0), w)
    else:
        bad = np.ones(np.shape(z), bool)
    if log_scale is None:
        log_scale = math.log(scale)
    L = np.asarray(f.log_eval(np.asarray(z)[bad]), complex) - log_scale
    if not np.all(np.isfinite(L.imag)) or np.any(np.isnan(L.real)):
        raise CapacityError(f"{f.spec} cannot be evaluated on the boundary")
    wl = np.exp(np.minimum(L.real, _LOG_CLIP)) * np.exp(1j * L.imag)
    if w is None:
        return wl
    w = w.copy()
    w[bad] = wl
    m = np.abs(w)
    big = m > _CLIP
    return np.where(big, _CLIP * w / np.where(big, m, 1.0), w)


class _Curve:
    """Closed image polyline of one boundary component, refined on demand."""

    def __init__(self, f, comp, scale, log_scale=None):
        self.f, self.scale, self.log_scale = f, scale, log_scale
        self.z = np.asarray(comp, complex)
        self.w = _image(f, self.z, scale, log_scale)
        self.ok = np.zeros(len(self.z), bool)

    def refine(self, tol_of, budget):
        """Split edges until chord and midpoint deviation meet ``tol_of(endpoints)``."""
        tv = tol_of(self.w)
        while True:
            z, w = self.z, self.w
            zb, wb = np.roll(z, -1), np.roll(w, -1)
            tol = np.minimum(tv, np.roll(tv, -1))
            chord = np.abs(wb - w)
            todo = np.flatnonzero(~self.ok | (chord > tol))
            if len(todo) == 0:
                return
            zm = 0.5 * (z[todo] + zb[todo])
            wm = _image(self.f, zm, self.scale, self.log_scale)
            dev = np.abs(wm - 0.5 * (w[todo] + wb[todo]))
            good = (chord[todo] <= tol[todo]) & (dev <= 0.5 * tol[todo])
            self.ok[todo[good]] = True
            split = todo[~good]
            if len(split) == 0:
                return
            if len(self.z) + len(split) > budget:
                raise _BudgetExceeded
            pos = split + 1
            self.z = np.insert(z, pos, zm[~good])
            self.w = np.insert(w, pos, wm[~good])
            tv = np.insert(tv, pos, tol_of(wm[~good]))
            self.ok = np.insert(self.ok, pos, False)
            self.ok[split + np.arange(len(split))] = False


def _winding(curves, pts):
    """Winding numbers of the closed polylines around each point (crossing rule)."""
    out = np.zeros(len(pts), int)
    if len(pts) == 0:
        return out
    for c in curves:
        a = c.w
        b = np.roll(a, -1)
        ax, ay, bx, by = a.real, a.imag, b.real, b.imag
        step = max(1, 4_000_000 // max(len(a), 1))
        for i in range(0, len(pts), step):
            p = pts[i:i + step]
            px, py = p.real[:, None], p.imag[:, None]
            left = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
            up = (ay <= py) & (by > py) & (left > 0)
            down = (ay > py) & (by <= py) & (left < 0)
            out[i:i + step] += up.sum(axis=1) - down.sum(axis=1)
    return out


def _curves_for(f, U, scale, density=START_DENSITY, log_scale=None):
    return [_Curve(f, comp, scale, log_scale) for comp in U.boundary_samples(density)]


def point_covered(f: MapDescriptor, U: Region, w: complex,
                  budget: int = BOUNDARY_BUDGET) -> CoveringCertificate:
    """Is ``w`` in ``f(U)``?  Decided by the winding number of ``f(∂U)`` around ``w``."""
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise DomainError("target must be finite")
    scale = max(abs(w), 1.0)
    floor = MARGIN_FLOOR
    t = w / scale
    curves = _curves_for(f, U, scale)
    try:
        for c in curves:
            c.refine(lambda p: np.maximum(floor, 0.5 * np.abs(p - t)), budget)
    except _BudgetExceeded:
        return CoveringCertificate(UNDECIDED, WINDING, 0.0, samples=budget, targets=1,
                                   diagnostic="boundary refinement budget exhausted")
    n = sum(len(c.w) for c in curves)
    dist = min(float(np.min(np.abs(c.w - t))) for c in curves) * scale
    if dist < floor * scale:
        return CoveringCertificate(UNDECIDED, WINDING, dist, samples=n, targets=1,
                                   diagnostic="image of the boundary passes through the target")
    wind = int(_winding(curves, np.array([t]))[0])
    if wind != 0:
        return CoveringCertificate(COVERED, WINDING, dist, winding=wind, samples=n, targets=1)
    return CoveringCertificate(NOT_COVERED, WINDING, dist, witness=w, winding=0,
                               samples=n, targets=1)


def _cells(V, grid):
    """Initial parameter cells (patch index, u-centre, v-centre) of the target region."""
    c = (np.arange(grid) + 0.5) / grid
    U, W = np.meshgrid(c, c, indexing="ij")
    out = []
    for k in range(len(V.unit_patches())):
        out.append(np.column_stack([np.full(U.size, k), U.ravel(), W.ravel()]))
    return np.concatenate(out)


def region_covered(f: MapDescriptor, U: Region, V: Region, grid: int = DEFAULT_GRID,
                   max_depth: int = MAX_DEPTH,
                   budget: int = BOUNDARY_BUDGET) -> CoveringCertificate:
    """Certify ``f(U) ⊃ V`` on a ``grid x grid`` lattice per component of ``V``."""
    if grid < 2:
        raise DomainError("grid must be at least 2")
    log_scale = V.log_scale
    try:
        scale = V.scale
    except ScaleMismatchError:
        scale = None
    absolute = scale if scale is not None else 1.0
    patches = V.unit_patches()
    floor = MARGIN_FLOOR
    curves = _curves_for(f, U, scale, log_scale=log_scale)
    cells = _cells(V, grid)
    size = 1.0 / grid
    margin = math.inf
    on_curve = tested = 0
    for depth in range(max_depth + 1):
        kidx = cells[:, 0].astype(int)
        centers = np.empty(len(cells), complex)
        radius = np.empty(len(cells))
        for k, patch in enumerate(patches):
            m = kidx == k
            u, v = cells[m, 1], cells[m, 2]
            centers[m] = patch(u, v)
            corners = [patch(np.clip(u + du * size / 2, 0, 1), np.clip(v + dv * size / 2, 0, 1))
                       for du in (-1, 1) for dv in (-1, 1)]
            radius[m] = np.max([np.abs(cz - centers[m]) for cz in corners], axis=0)
        # keep cells that meet V
        sd = V.unit_signed_distance(centers)
        meets = sd > -radius
        cells, centers, radius, sd = cells[meets], centers[meets], radius[meets], sd[meets]
        inside = sd > 0
        h = 0.25 * float(np.median(radius)) if len(radius) else floor
        tree = cKDTree(np.column_stack([centers.real, centers.imag]))

        def tol_of(p, tree=tree, h=h):
            d, _ = tree.query(np.column_stack([p.real, p.imag]))
            return np.maximum(h, 0.5 * d)

        try:
            for c in curves:
                c.refine(tol_of, budget)
        except _BudgetExceeded:
            return CoveringCertificate(UNDECIDED, WINDING, 0.0, samples=budget,
                                       targets=tested,
                                       diagnostic="boundary refinement budget exhausted")
        verts = np.concatenate([c.w for c in curves])
        dv = cKDTree(np.column_stack([verts.real, verts.imag])).query(
            np.column_stack([centers.real, centers.imag]))[0]
        d_lower = np.minimum(0.5 * dv, dv - h)
        trusted = inside & (d_lower > floor)
        wind = np.zeros(len(cells), int)
        wind[trusted] = _winding(curves, centers[trusted])
        tested += int(trusted.sum())
        bad = np.flatnonzero(trusted & (wind == 0))
        if len(bad):
            i = bad[np.argmax(d_lower[bad])]
            return CoveringCertificate(
                NOT_COVERED, WINDING, float(d_lower[i] * absolute),
                witness=complex(centers[i] * absolute), winding=0,
                samples=len(verts), targets=tested,
                details={} if scale is not None else {"units": "scale of V"})
        if trusted.any():
            margin = min(margin, float(np.min(d_lower[trusted])) * absolute)
        done = trusted & (d_lower > radius)
        rest = ~done
        if depth == max_depth or not rest.any():
            on_curve += int((inside & ~trusted).sum())
            if not math.isfinite(margin):
                return CoveringCertificate(UNDECIDED, WINDING, 0.0, samples=len(verts),
                                           targets=tested, on_curve=on_curve,
                                           diagnostic="no grid node clear of the image curve")
            # nodes left undecided at depth are on the image curve to sampling accuracy
            return CoveringCertificate(COVERED, WINDING, margin, samples=len(verts),
                                       targets=tested, on_curve=on_curve,
                                       details={} if scale is not None else {"units": "scale of V"})
        size /= 2
        sub = cells[rest]
        kids = []
        for du in (-0.5, 0.5):
            for dvv in (-0.5, 0.5):
                kk = sub.copy()
                kk[:, 1] += du * size
                kk[:, 2] += dvv * size
                kids.append(kk)
        cells = np.concatenate(kids)
    raise AssertionError("unreachable")


def ball_expansion_check(f: MapDescriptor, center: complex, delta: float,
                         small_bound: float = 1.0,
                         band: float = MODULUS_BAND) -> CoveringCertificate:
    """Certify ``f(B(c, δR)) ⊃ B(0, 2R)`` with ``R = |c|``.

    Holds when ``|f(c)| <= small_bound`` (so the image meets the small disc)
    and ``|f| >= 2R`` on the whole boundary circle: the boundary of the image
    lies in the image of the boundary, so it cannot enter ``B(0, 2R)``.
    """
    center = complex(center)
    R = abs(center)
    if R == 0:
        raise DomainError("centre must be non-zero")
    if not 0 < delta <= 0.5:
        raise DomainError("delta must lie in (0, 1/2]")
    fc = abs(complex(f(np.array([center]))[0]))
    det = {"R": R, "delta": delta, "f_center": fc}
    if not fc <= small_bound:
        return CoveringCertificate(NOT_COVERED, BALL_EXPANSION, small_bound - fc,
                                   witness=center, diagnostic="|f(center)| exceeds small_bound",
                                   details=det)
    m, where = circle_minimum(f, center, delta * R)
    det["boundary_min"] = m
    slack = m - 2 * R
    if slack > band * 2 * R:
        return CoveringCertificate(COVERED, BALL_EXPANSION, slack, samples=4096, details=det)
    if slack < -band * 2 * R:
        return CoveringCertificate(NOT_COVERED, BALL_EXPANSION, slack, witness=where,
                                   samples=4096, details=det,
                                   diagnostic="boundary modulus drops below 2R")
    return CoveringCertificate(UNDECIDED, BALL_EXPANSION, slack, samples=4096, details=det,
                               diagnostic="boundary minimum inside the modulus band")


def shell_expansion_check(f: MapDescriptor, s: float, t: float, hold: Ball | None = None,
                          scan: int = 16, band: float = MODULUS_BAND) -> CoveringCertificate:
    """Certify ``f(A(s, t)) ⊃ A(s, 2t)``.

    A circle ``|z| = t'`` with ``t' in [0.9t, t]`` on which ``|f| >= 2t`` gives
    ``B(0, 2t) ⊂ f(B(0, t))``.  Targets whose preimage falls in ``|z| <= s`` have
    modulus at most ``M(s)``; these are absorbed by the holding ball ``hold``
    (which must sit inside ``A(s, t)`` and expand over ``B(0, 2|centre|)``), or
    cannot occur when ``M(s) <= s``.
    """
    if not 0 < s < t:
        raise DomainError("need 0 < s < t")
    best, best_r = -math.inf, None
    for r in np.linspace(t, 0.9 * t, scan):
        m, _ = circle_minimum(f, 0j, float(r))
        if m > best:
            best, best_r = m, float(r)
    det = {"t_prime": best_r, "circle_min": best}
    slack = best / (2 * t) - 1
    if slack < -band:
        return CoveringCertificate(NOT_COVERED if hold is None else UNDECIDED, SHELL_EXPANSION,
                                   slack, details=det,
                                   diagnostic="no circle in [0.9t, t] clears modulus 2t")
    if slack <= band:
        return CoveringCertificate(UNDECIDED, SHELL_EXPANSION, slack, details=det,
                                   diagnostic="circle minimum inside the modulus band")
    Ms = max_modulus(f, s)
    det["M_s"] = Ms
    margins = [slack]
    if Ms > s:
        if hold is None:
            return CoveringCertificate(UNDECIDED, SHELL_EXPANSION, s / Ms - 1, details=det,
                                       diagnostic="M(s) > s and no holding ball supplied")
        R = abs(hold.center)
        inner = (R - hold.radius) / s - 1
        outer = 1 - (R + hold.radius) / t
        reach = 1 - Ms / (2 * R)
        ball = ball_expansion_check(f, hold.center, hold.radius / R)
        det.update(hold_margin=ball.margin, hold_verdict=ball.verdict)
        margins += [inner, outer, reach]
        if not ball.covered or min(inner, outer, reach) <= 0:
            return CoveringCertificate(UNDECIDED, SHELL_EXPANSION, min(margins), details=det,
                                       diagnostic="holding ball does not absorb |z| <= s")
    return CoveringCertificate(COVERED, SHELL_EXPANSION, min(margins), details=det)


class LocalScaledMap(MapDescriptor):
    """``delta -> f(c + delta) / S`` evaluated in mpmath around a high-precision centre.

    Lets coverings be checked at scales where neither ``c`` nor ``f(c)`` fits
    a double: everything the winding test sees is of order one.
    """

    def __init__(self, f: MapDescriptor, center, log_scale, prec: int):
        self.f, self.prec = f, prec
        self.kind, self.name = f.kind, f"local[{f.spec}]"
        with mpmath.workprec(prec):
            self.center = mpmath.mpc(center)
            self.log_s = mpmath.mpf(log_scale)
            self.inv_s = mpmath.exp(-self.log_s)

    def _each(self, d, fn):
        d = np.asarray(d, complex)
        out = np.empty(d.shape, complex)
        with mpmath.workprec(self.prec):
            for idx, x in np.ndenumerate(d):
                out[idx] = fn(self.center + mpmath.mpc(x))
        return out

    def __call__(self, d):
        def one(z):
            w = self.f.mp_eval(z) * self.inv_s
            return complex(w) if abs(w) < 1e300 else complex(mpmath.inf)
        return self._each(d, one)

    def log_eval(self, d):
        return self._each(d, lambda z: complex(mpmath.log(self.f.mp_eval(z)) - self.log_s))

    def mp_log(self, z):
        return mpmath.log(self.f.mp_eval(z)) - self.log_s


def _mp_log_jacobian(f, c, h):
    """Real 2x2 Jacobian of ``log f`` at the mpc point ``c`` (central differences)."""
    vals = [mpmath.log(f.mp_eval(c + d)) for d in (h, -h, 1j * h, -1j * h)]
    dx = (vals[0] - vals[1]) / (2 * h)
    dy = vals[2] - vals[3]
    # the two vertical samples may sit on different log branches
    dy = (dy - 2j * mpmath.pi * mpmath.nint(mpmath.im(dy) / (2 * mpmath.pi))) / (2 * h)
    dx = dx - 2j * mpmath.pi * mpmath.nint(mpmath.im(dx) * h / mpmath.pi) / (2 * h)
    return np.array([[float(mpmath.re(dx)), float(mpmath.re(dy))],
                     [float(mpmath.im(dx)), float(mpmath.im(dy))]])


def _slide(f, c, target, h, steps: int = 60):
    """Gradient steps onto the level set ``Re log f = target``."""
    for _ in range(steps):
        g = _mp_log_jacobian(f, c, h)[0]
        n2 = float(g @ g)
        if not n2 > 0:
            return None
        err = target - mpmath.re(mpmath.log(f.mp_eval(c)))
        c = c + err / n2 * mpmath.mpc(g[0], g[1])
        if abs(err) < 1e-12:
            return c
    return None


@dataclass
class Subdomain:
    """A polygon ``P`` in local coordinates around ``center``: the region ``center + P``."""

    center: object
    polygon: Polygon
    prec: int

    def points(self, density: int = 6):
        pts = list(self.polygon.grid(density)) + [self.polygon.anchor()]
        with mpmath.workprec(self.prec):
            return [self.center + mpmath.mpc(complex(p)) for p in pts]

    def to_dict(self):
        return {"center": [mpmath.nstr(mpmath.re(self.center), 40),
                           mpmath.nstr(mpmath.im(self.center), 40)],
                "polygon": self.polygon.to_dict(), "prec": self.prec}


def _mp_inside(sub: Subdomain, U: Region, density: int = 256) -> bool:
    pts = np.concatenate(sub.polygon.boundary_samples(density))
    spacing = float(np.max(np.abs(np.diff(np.append(pts, pts[:1])))))
    with mpmath.workprec(sub.prec):
        try:
            rel = spacing / float(U.r_mp()) if hasattr(U, "r_mp") else spacing / U.scale
        except (OverflowError, CapacityError):
            rel = 0.0
        for p in pts:
            z = sub.center + mpmath.mpc(complex(p))
            if not U.contains_mp(z) or U.margin_mp(z) <= rel:
                return False
    return True


def _unit_band(V):
    if hasattr(V, "_unit_geometry"):
        return V._unit_geometry()[2:4]
    lo, hi = V.modulus_bounds()
    return float(lo) / V.scale, float(hi) / V.scale


def find_subdomain(f: MapDescriptor, U: Region, V: Region, pad: float = 0.3,
                   grid: int = 16, tries: int = 6) -> Subdomain | None:
    """A small parallelogram inside ``U`` whose image should sweep ``V``.

    In the coordinates ``log f`` the modulus band ``{a S < |w| < b S}`` of ``V`` is
    a vertical strip.  One full turn of argument by the strip width, padded by
    ``pad``, is pulled back through the local Jacobian of ``log f`` at a point
    of ``U`` slid onto the middle of the band.
    """
    a, b = _unit_band(V)
    a = max(a, 1e-300)
    half_w = 0.5 * (math.log(b) - math.log(a)) + pad
    half_h = math.pi + pad
    log_s = V.log_scale_mp()
    u_scale = U.r_mp() if hasattr(U, "r_mp") else mpmath.mpf(U.scale)
    prec = 64 + max(0, int(mpmath.log(abs(u_scale) + 1, 2)))
    if prec > LOCAL_MAX_BITS:
        raise CapacityError(f"a local chart of U needs {prec} bits", log_magnitude=float(
            mpmath.log(abs(u_scale))))
    with mpmath.workprec(prec):
        target = log_s + (mpmath.log(a) + mpmath.log(b)) / 2
        cand = []
        u = (np.arange(grid) + 0.5) / grid
        UU, VV = np.meshgrid(u, u, indexing="ij")
        for patch in U.unit_patches():
            for w in patch(UU.ravel(), VV.ravel()):
                z = u_scale * mpmath.mpc(complex(w))
                if not U.contains_mp(z):
                    continue
                try:
                    L = mpmath.re(mpmath.log(f.mp_eval(z)))
                    g = _mp_log_jacobian(f, z, mpmath.mpf(2) ** -20)[0]
                except (ValueError, ZeroDivisionError):
                    continue
                gn = float(np.hypot(*g))
                if not gn > 0:
                    continue
                # slide length against the room left inside U
                room = float(U.margin_mp(z) * u_scale)
                cand.append((float(abs(L - target)) / gn - room, z))
        cand.sort(key=lambda t: t[0])
        h = mpmath.mpf(2) ** -20
        checked = 0
        for _, c0 in cand[: 6 * tries]:
            c = _slide(f, c0, target, h)
            if c is None:
                continue
            # walk along the level set towards the deepest point of U
            g = _mp_log_jacobian(f, c, h)[0]
            tang = mpmath.mpc(-g[1], g[0]) / float(np.hypot(*g))
            span = 2 * abs(c - c0) + 4 * (half_w + half_h) / float(np.hypot(*g))
            best, best_m = None, -math.inf
            for t in np.linspace(-1.0, 1.0, 21):
                z = _slide(f, c + t * span * tang, target, h)
                if z is not None and U.contains_mp(z):
                    m = U.margin_mp(z)
                    if m > best_m:
                        best, best_m = z, m
            if best is None:
                continue
            c = best
            J = _mp_log_jacobian(f, c, h)
            try:
                Jinv = np.linalg.inv(J)
            except np.linalg.LinAlgError:
                continue
            corners = []
            for du, dv in ((-half_w, -half_h), (half_w, -half_h), (half_w, half_h), (-half_w, half_h)):
                d = Jinv @ np.array([du, dv])
                corners.append(complex(d[0], d[1]))
            sub = Subdomain(c, Polygon(tuple(corners)), prec)
            if _mp_inside(sub, U):
                return sub
            checked += 1
            if checked >= tries:
                break
    return None


def cover_with_subdomain(f: MapDescriptor, U: Region, V: Region, grid: int = DEFAULT_GRID,
                         subdomain: Subdomain | None = None) -> CoveringCertificate:
    """Certify ``f(U) ⊃ V`` through a sub-region ``c + P ⊂ U`` with ``f(c + P) ⊃ V``.

    ``P`` defaults to :func:`find_subdomain`; the certificate records it.
    """
    if subdomain is None:
        subdomain = find_subdomain(f, U, V)
    if subdomain is None:
        return CoveringCertificate(UNDECIDED, WINDING, 0.0,
                                   diagnostic="no sub-domain of U found for V")
    if not _mp_inside(subdomain, U):
        return CoveringCertificate(UNDECIDED, WINDING, 0.0,
                                   diagnostic="sub-domain is not inside U")
    g = LocalScaledMap(f, subdomain.center, V.log_scale_mp(), subdomain.prec)
    cert = region_covered(g, subdomain.polygon, V.unit_copy(), grid=grid)
    cert.details["subdomain"] = subdomain.to_dict()
    cert.details["units"] = "scale of V"
    cert.subdomain = subdomain
    if cert.verdict == NOT_COVERED:
        # one sub-domain missing part of V says nothing about U
        cert.verdict = UNDECIDED
        cert.diagnostic = "sub-domain image misses part of V"
    return cert


def certify_covering(f: MapDescriptor, U: Region, V: Region,
                     grid: int = DEFAULT_GRID) -> CoveringCertificate:
    """Whole-boundary check first; a sub-domain when that runs out of budget or range."""
    try:
        cert = region_covered(f, U, V, grid=grid)
        if cert.verdict != UNDECIDED:
            return cert
    except (CapacityError, ScaleMismatchError):
        pass
    try:
        return cover_with_subdomain(f, U, V, grid=grid)
    except (CapacityError, ScaleMismatchError) as exc:
        return CoveringCertificate(UNDECIDED, WINDING, 0.0, diagnostic=str(exc))
