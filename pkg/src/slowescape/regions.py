"""Plane regions used as covering templates.

Balls, annuli ``A(s, t) = {s < |z| < t}``, polygons, and the sector-shell
templates: ``Q_j(r)`` (an annulus ``A(jr, (j+1/2)r)`` joined with the scaled
truncated cone ``r C_j``) and the thin refinement ``Q_{j,k}(r)`` confined to
``A((1 - 1/(k+1)) r, (1 + 1/k) r)``.

All predicates are vectorised over numpy complex arrays.  Sector shells may
carry a :class:`LevelIndex` scale, or an ``mpmath.mpf`` scale when the value
must be exact beyond double range (written ``e^<log r>`` in literals); such
regions still answer membership for ``mpmath.mpc`` points by normalising with
an arbitrary-exponent scale.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import DomainError, ScaleMismatchError
from .numeric_tower import LevelIndex, from_real, mul_real

TWO_PI = 2.0 * math.pi
_LOG_DIGITS = 40


def _is_mp(r) -> bool:
    return isinstance(r, mpmath.mpf)


def scale_text(r) -> str:
    """Literal form of a shell scale; mpf scales are written as ``e^<log r>``."""
    if _is_mp(r):
        with mpmath.workprec(256):
            return "e^" + mpmath.nstr(mpmath.log(r), _LOG_DIGITS)
    return str(r)


def parse_scale(text):
    """Inverse of :func:`scale_text` (floats pass through)."""
    if not isinstance(text, str):
        return float(text)
    text = text.strip()
    if text.startswith("L"):
        return LevelIndex.parse(text)
    if text.startswith("e^"):
        x = mpmath.mpf(text[2:])
        with mpmath.workprec(128 + max(0, int(mpmath.log(abs(x) + 1, 2)))):
            return mpmath.exp(mpmath.mpf(text[2:]))
    return float(text)


def _wrap(a):
    """Angle(s) reduced to (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(a, dtype=float)))


def _seg_dist(z, p, q):
    """Distance from points z to the segment [p, q]."""
    d = q - p
    L2 = abs(d) ** 2
    if L2 == 0:
        return np.abs(z - p)
    t = np.clip(((z - p) * np.conj(d)).real / L2, 0.0, 1.0)
    return np.abs(z - (p + t * d))


def _arc(radius, a0, a1, n):
    t = np.linspace(a0, a1, max(int(n), 1), endpoint=False)
    return radius * np.exp(1j * t)


def _radial(angle, r0, r1, n):
    t = np.linspace(r0, r1, max(int(n), 1), endpoint=False)
    return t * np.exp(1j * angle)


@dataclass(frozen=True)
class ConeParams:
    """Directions (angles) and half-angle of the ``2q`` truncated cones."""

    sector_count: int = 4
    directions: tuple = ()
    half_angle: float = math.pi / 12

    def __post_init__(self):
        if self.sector_count < 2 or self.sector_count % 2:
            raise DomainError("sector_count (2q) must be a positive even integer")
        if not self.directions:
            q = self.sector_count // 2
            dirs = tuple(j * math.pi / q for j in range(1, self.sector_count + 1))
            object.__setattr__(self, "directions", dirs)
        if len(self.directions) != self.sector_count:
            raise DomainError("need one direction per sector")
        if self.half_angle <= 0:
            raise DomainError("half-angle must be positive")
        if self.min_separation() <= 2 * self.half_angle:
            raise DomainError("cone closures overlap: separation <= 2 * half_angle")

    @property
    def q(self) -> int:
        return self.sector_count // 2

    def min_separation(self) -> float:
        d = self.directions
        return min(abs(float(_wrap(d[i] - d[j])))
                   for i in range(len(d)) for j in range(i + 1, len(d)))

    def direction(self, j: int) -> float:
        if not 1 <= j <= self.sector_count:
            raise DomainError(f"sector index {j} outside 1..{self.sector_count}")
        return float(self.directions[j - 1])


DEFAULT_CONES = ConeParams()


class Region:
    kind = "region"

    # -- overridable geometry on real-scale points --------------------
    def contains(self, z):
        raise NotImplementedError

    def signed_distance(self, z):
        """Distance to the boundary, positive inside and negative outside."""
        raise NotImplementedError

    def modulus_bounds(self):
        raise NotImplementedError

    def boundary_samples(self, density: int = 64) -> list[np.ndarray]:
        raise NotImplementedError

    def patches(self):
        """Parametrisations ``(u, v) in (0,1)^2 -> z`` covering the region."""
        raise NotImplementedError

    def anchor(self) -> complex:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        raise NotImplementedError

    @property
    def symbolic(self) -> bool:
        return False

    @property
    def log_scale(self) -> float:
        return math.log(self.scale)

    def unit_patches(self):
        """Patches in units of the scale (``z / scale``)."""
        s = self.scale
        return [lambda u, v, p=p: p(u, v) / s for p in self.patches()]

    def unit_signed_distance(self, w):
        s = self.scale
        return self.signed_distance(np.asarray(w, complex) * s) / s

    def log_scale_mp(self):
        return mpmath.log(self.scale)

    def unit_copy(self) -> "Region":
        """The same shape divided by its scale."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- shared helpers -----------------------------------------------
    def grid(self, density: int = 32):
        """Interior grid nodes: ``density x density`` per component."""
        u = (np.arange(density) + 0.5) / density
        U, V = np.meshgrid(u, u, indexing="ij")
        pts = []
        for patch in self.patches():
            z = patch(U.ravel(), V.ravel())
            pts.append(z[self.contains(z)])
        return np.concatenate(pts) if pts else np.zeros(0, complex)

    def bbox(self):
        lo, hi = self.modulus_bounds()
        hi = float(hi)
        return (-hi, hi, -hi, hi)

    def contains_mp(self, z) -> bool:
        return bool(self.contains(np.array([complex(z)]))[0])

    def margin_mp(self, z) -> float:
        """Signed boundary distance of an mpc point, relative to the scale."""
        return float(self.signed_distance(np.array([complex(z)]))[0]) / self.scale

    def anchor_mp(self):
        return mpmath.mpc(self.anchor())

    def __str__(self):
        return self.literal()

    def literal(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(Region):
    center: complex
    radius: float
    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")

    def contains(self, z):
        return np.abs(np.asarray(z, complex) - self.center) < self.radius

    def signed_distance(self, z):
        return self.radius - np.abs(np.asarray(z, complex) - self.center)

    def modulus_bounds(self):
        m = abs(self.center)
        return max(0.0, m - self.radius), m + self.radius

    def bbox(self):
        c, r = self.center, self.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    def boundary_samples(self, density=64):
        t = np.arange(density) * TWO_PI / density
        return [self.center + self.radius * np.exp(1j * t)]

    def patches(self):
        c, rho = self.center, self.radius
        return [lambda u, v: c + rho * np.sqrt(u) * np.exp(1j * TWO_PI * v)]

    def anchor(self):
        return self.center

    @property
    def scale(self):
        return max(self.radius, abs(self.center))

    def unit_copy(self):
        s = self.scale
        return Ball(self.center / s, self.radius / s)

    def to_dict(self):
        return {"type": "ball", "center": [self.center.real, self.center.imag],
                "radius": self.radius}

    def literal(self):
        return f"ball:{self.center.real!r},{self.center.imag!r},{self.radius!r}"


@dataclass(frozen=True)
class Annulus(Region):
    s: float
    t: float
    kind = "annulus"

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "t", float(self.t))
        if not 0 <= self.s < self.t:
            raise DomainError("annulus needs 0 <= s < t")

    def contains(self, z):
        m = np.abs(np.asarray(z, complex))
        return (m > self.s) & (m < self.t)

    def signed_distance(self, z):
        m = np.abs(np.asarray(z, complex))
        return np.minimum(m - self.s, self.t - m)

    def modulus_bounds(self):
        return self.s, self.t

    def boundary_samples(self, density=64):
        t = np.arange(density) * TWO_PI / density
        out = [self.t * np.exp(1j * t)]
        if self.s > 0:
            out.append(self.s * np.exp(-1j * t))
        return out

    def patches(self):
        s, t = self.s, self.t
        return [lambda u, v: (s + (t - s) * u) * np.exp(1j * TWO_PI * v)]

    def anchor(self):
        return complex(0.5 * (self.s + self.t), 0.0)

    @property
    def scale(self):
        return self.t

    def unit_copy(self):
        return Annulus(self.s / self.t, 1.0)

    def to_dict(self):
        return {"type": "annulus", "s": self.s, "t": self.t}

    def literal(self):
        return f"ann:{self.s!r},{self.t!r}"


@dataclass(frozen=True)
class Polygon(Region):
    """Simple polygon; vertices are reordered counter-clockwise."""

    vertices: tuple
    kind = "polygon"

    def __post_init__(self):
        v = np.asarray(self.vertices, complex)
        if len(v) < 3:
            raise DomainError("polygon needs at least three vertices")
        area = 0.5 * np.sum((np.conj(v) * np.roll(v, -1)).imag)
        if area < 0:
            v = v[::-1]
        object.__setattr__(self, "vertices", tuple(complex(x) for x in v))

    @classmethod
    def box(cls, x0, x1, y0, y1):
        return cls(((x0 + 1j * y0), (x1 + 1j * y0), (x1 + 1j * y1), (x0 + 1j * y1)))

    def _v(self):
        return np.asarray(self.vertices, complex)

    def contains(self, z):
        z = np.asarray(z, complex)
        v = self._v()
        x, y = z.real, z.imag
        inside = np.zeros(z.shape, bool)
        for p, q in zip(v, np.roll(v, -1)):
            cond = (p.imag > y) != (q.imag > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = p.real + (y - p.imag) * (q.real - p.real) / (q.imag - p.imag)
            inside ^= cond & (x < xc)
        return inside

    def _edge_dist(self, z):
        v = self._v()
        return np.min([_seg_dist(z, p, q) for p, q in zip(v, np.roll(v, -1))], axis=0)

    def signed_distance(self, z):
        z = np.asarray(z, complex)
        d = self._edge_dist(z)
        return np.where(self.contains(z), d, -d)

    def modulus_bounds(self):
        v = self._v()
        inf = 0.0 if self.contains(np.array([0j]))[0] else float(self._edge_dist(np.array([0j]))[0])
        return inf, float(np.max(np.abs(v)))

    def bbox(self):
        v = self._v()
        return (v.real.min(), v.real.max(), v.imag.min(), v.imag.max())

    def boundary_samples(self, density=64):
        v = self._v()
        edges = list(zip(v, np.roll(v, -1)))
        per = sum(abs(q - p) for p, q in edges)
        out = []
        for p, q in edges:
            n = max(1, math.ceil(density * abs(q - p) / per))
            out.append(p + (q - p) * np.arange(n) / n)
        return [np.concatenate(out)]

    def patches(self):
        x0, x1, y0, y1 = self.bbox()
        return [lambda u, v: (x0 + (x1 - x0) * u) + 1j * (y0 + (y1 - y0) * v)]

    def anchor(self):
        v = self._v()
        c = complex(np.mean(v))
        if self.contains(np.array([c]))[0]:
            return c
        g = self.grid(16)
        return complex(g[np.argmax(self.signed_distance(g))])

    @property
    def scale(self):
        x0, x1, y0, y1 = self.bbox()
        return max(math.hypot(x1 - x0, y1 - y0), float(np.max(np.abs(self._v()))))

    def unit_copy(self):
        s = self.scale
        return Polygon(tuple(z / s for z in self.vertices))

    def to_dict(self):
        return {"type": "polygon", "vertices": [[z.real, z.imag] for z in self.vertices]}

    def literal(self):
        return "poly:" + ",".join(f"{z.real!r},{z.imag!r}" for z in self.vertices)


class _SpikedShell(Region):
    """Annulus ``A(s r, t r)`` united with the sector ``{a r < |z| < b r, |arg z - phi| < theta}``.

    ``a <= s < t <= b`` in units of the scale ``r``.
    """

    def _unit_geometry(self):
        raise NotImplementedError

    @property
    def r_level(self) -> LevelIndex:
        return self.r if isinstance(self.r, LevelIndex) else from_real(self.r)

    def r_mp(self):
        """The scale as an mpf (arbitrary exponent)."""
        return self.r.to_mpf() if isinstance(self.r, LevelIndex) else mpmath.mpf(self.r)

    @property
    def symbolic(self) -> bool:
        if _is_mp(self.r):
            return not self.r < 1e300
        return isinstance(self.r, LevelIndex) and not (self.r.fits_double() and self.r.to_real() < 1e300)

    @property
    def scale(self) -> float:
        if self.symbolic:
            raise ScaleMismatchError(f"scale {scale_text(self.r)} is symbolic")
        if isinstance(self.r, LevelIndex):
            return self.r.to_real()
        return float(self.r)

    @property
    def log_scale(self) -> float:
        if _is_mp(self.r):
            return float(mpmath.log(self.r))
        if isinstance(self.r, LevelIndex):
            if self.r.level == 0:
                return math.log(self.r.index)
            return LevelIndex(self.r.level - 1, self.r.index).to_real()
        return math.log(self.r)

    def log_scale_mp(self):
        if isinstance(self.r, LevelIndex):
            if self.r.level == 0:
                return mpmath.log(self.r.index)
            return LevelIndex(self.r.level - 1, self.r.index).to_mpf()
        return mpmath.log(self.r)

    def unit_copy(self):
        return dataclasses.replace(self, r=1.0)

    def unit_patches(self):
        s, t, a, b, phi, th = self._unit_geometry()
        return [
            lambda u, v: (s + (t - s) * u) * np.exp(1j * TWO_PI * v),
            lambda u, v: (a + (b - a) * u) * np.exp(1j * (phi - th + 2 * th * v)),
        ]

    def unit_signed_distance(self, w):
        return self._u_signed(np.asarray(w, complex))

    def _unit(self, z):
        if self.symbolic:
            raise ScaleMismatchError("symbolic-scale region tested against a concrete point")
        return np.asarray(z, complex) / self.scale

    # unit-scale predicates
    def _u_contains(self, w):
        s, t, a, b, phi, th = self._unit_geometry()
        m = np.abs(w)
        d = np.abs(_wrap(np.angle(w) - phi))
        return ((m > s) & (m < t)) | ((m > a) & (m < b) & (d < th))

    def _u_signed(self, w):
        s, t, a, b, phi, th = self._unit_geometry()
        m = np.abs(w)
        d = _wrap(np.angle(w) - phi)
        ann = np.minimum(m - s, t - m)
        ad = np.abs(d)
        inside_w = np.minimum(np.minimum(m - a, b - m), m * np.sin(np.clip(th - ad, 0.0, math.pi / 2)))
        e0, e1 = np.exp(1j * (phi - th)), np.exp(1j * (phi + th))
        out_w = np.where(
            ad <= th,
            np.maximum(a - m, m - b),
            np.minimum(_seg_dist(w, a * e0, b * e0), _seg_dist(w, a * e1, b * e1)),
        )
        in_wedge = (m > a) & (m < b) & (ad < th)
        wedge = np.where(in_wedge, inside_w, -np.abs(out_w))
        return np.maximum(ann, wedge)

    def contains(self, z):
        return self._u_contains(self._unit(z))

    def signed_distance(self, z):
        return self._u_signed(self._unit(z)) * self.scale

    def contains_mp(self, z) -> bool:
        w = complex(mpmath.mpc(z) / self.r_mp())
        return bool(self._u_contains(np.array([w]))[0])

    def margin_mp(self, z) -> float:
        w = complex(mpmath.mpc(z) / self.r_mp())
        return float(self._u_signed(np.array([w]))[0])

    def modulus_bounds(self):
        a, b = self._unit_geometry()[2:4]
        if isinstance(self.r, LevelIndex) or self.symbolic:
            return mul_real(self.r_level, a), mul_real(self.r_level, b)
        return a * float(self.r), b * float(self.r)

    def bbox(self):
        R = self._unit_geometry()[3] * self.scale
        return (-R, R, -R, R)

    def _unit_boundary(self, density):
        s, t, a, b, phi, th = self._unit_geometry()
        lo, hi = phi + th, phi - th + TWO_PI
        outer_len = t * (hi - lo) + (2 * (b - t) + b * 2 * th if b > t else t * 2 * th)
        step = outer_len / density
        outer = [_arc(t, lo, hi, math.ceil(t * (hi - lo) / step))]
        if b > t:
            outer.append(_radial(hi, t, b, math.ceil((b - t) / step)))
            outer.append(_arc(b, hi, hi + 2 * th, math.ceil(2 * th * b / step)))
            outer.append(_radial(lo, b, t, math.ceil((b - t) / step)))
        else:
            outer.append(_arc(t, hi, hi + 2 * th, math.ceil(2 * th * t / step)))
        comps = [np.concatenate(outer)]
        if s > 0:
            inner_len = s * (hi - lo) + (2 * (s - a) + 2 * th * a if a < s else 2 * th * s)
            step_i = inner_len / density
            # clockwise: decreasing angle, region kept on the left
            inner = [_arc(s, hi, lo, math.ceil(s * (hi - lo) / step_i))]
            if a < s:
                inner.append(_radial(lo, s, a, math.ceil((s - a) / step_i)))
                inner.append(_arc(a, lo, lo - 2 * th, math.ceil(2 * th * a / step_i)))
                inner.append(_radial(hi, a, s, math.ceil((s - a) / step_i)))
            else:
                inner.append(_arc(s, lo, lo - 2 * th, math.ceil(2 * th * s / step_i)))
            comps.append(np.concatenate(inner))
        return comps

    def boundary_samples(self, density=64):
        r = self.scale
        return [r * c for c in self._unit_boundary(density)]

    def patches(self):
        r = self.scale
        return [lambda u, v, p=p: r * p(u, v) for p in self.unit_patches()]

    def unit_anchor(self) -> complex:
        s, t, a, b, phi, th = self._unit_geometry()
        return 0.5 * (s + t) * complex(math.cos(phi), math.sin(phi))

    def anchor(self):
        return self.scale * self.unit_anchor()

    def anchor_mp(self):
        return mpmath.mpc(self.unit_anchor()) * self.r_mp()

    def _scale_json(self):
        return scale_text(self.r) if isinstance(self.r, (LevelIndex, mpmath.mpf)) else self.r


@dataclass(frozen=True)
class SectorShell(_SpikedShell):
    """``Q_j(r) = A(jr, (j + 1/2) r) U r C_j`` with ``C_j`` cut to ``1/4 < |x| < 2q + 1``."""

    j: int
    r: float | LevelIndex
    cones: ConeParams = field(default=DEFAULT_CONES)
    kind = "Q"

    def __post_init__(self):
        self.cones.direction(self.j)
        if isinstance(self.r, LevelIndex):
            return
        if not self.r > 0:
            raise DomainError("scale must be positive")

    def _unit_geometry(self):
        q = self.cones.q
        return (float(self.j), self.j + 0.5, 0.25, 2.0 * q + 1.0,
                self.cones.direction(self.j), self.cones.half_angle)

    def to_dict(self):
        return {"type": "Q", "j": self.j, "r": self._scale_json(), "q": self.cones.q,
                "theta": self.cones.half_angle}

    def literal(self):
        return f"Q:{self.j},{scale_text(self.r)}"


@dataclass(frozen=True)
class RefinedSectorShell(_SpikedShell):
    """``Q_{j,k}(r)``: annulus ``A((1 + (j-1/2)/(2qk)) r, (1 + j/(2qk)) r)`` with the thin cone ``r C_{j,k}``."""

    j: int
    k: int
    r: float | LevelIndex
    cones: ConeParams = field(default=DEFAULT_CONES)
    kind = "Qk"

    def __post_init__(self):
        self.cones.direction(self.j)
        if self.k < 1:
            raise DomainError("refinement level k must be >= 1")
        if not isinstance(self.r, LevelIndex) and not self.r > 0:
            raise DomainError("scale must be positive")

    def _unit_geometry(self):
        q, k, j = self.cones.q, self.k, self.j
        return (1 + (j - 0.5) / (2 * q * k), 1 + j / (2 * q * k),
                1 - 1 / (k + 1), 1 + 1 / k,
                self.cones.direction(j), self.cones.half_angle)

    def envelope(self):
        """The containing annulus bounds ``(1 - 1/(k+1), 1 + 1/k)`` in units of r."""
        return 1 - 1 / (self.k + 1), 1 + 1 / self.k

    def to_dict(self):
        return {"type": "Qk", "j": self.j, "k": self.k, "r": self._scale_json(),
                "q": self.cones.q, "theta": self.cones.half_angle}

    def literal(self):
        return f"Qk:{self.j},{self.k},{scale_text(self.r)}"


def parse_region(text: str, cones: ConeParams = DEFAULT_CONES) -> Region:
    """Parse ``ball:cx,cy,r``, ``ann:s,t``, ``Q:j,r``, ``Qk:j,k,r``, ``box:x0,x1,y0,y1`` or ``poly:x,y,...``."""
    kind, _, rest = text.strip().partition(":")
    parts = [p.strip() for p in rest.split(",") if p.strip()]

    scale = parse_scale

    try:
        if kind == "ball":
            cx, cy, r = map(float, parts)
            return Ball(complex(cx, cy), r)
        if kind == "ann":
            s, t = map(float, parts)
            return Annulus(s, t)
        if kind == "Q":
            return SectorShell(int(parts[0]), scale(parts[1]), cones)
        if kind == "Qk":
            return RefinedSectorShell(int(parts[0]), int(parts[1]), scale(parts[2]), cones)
        if kind == "box":
            return Polygon.box(*map(float, parts))
        if kind == "poly":
            xs = list(map(float, parts))
            return Polygon(tuple(complex(xs[i], xs[i + 1]) for i in range(0, len(xs), 2)))
    except (ValueError, IndexError, TypeError) as exc:
        raise DomainError(f"malformed region literal {text!r}: {exc}") from None
    raise DomainError(f"unknown region kind in {text!r}")


def region_from_dict(d: dict) -> Region:
    t = d["type"]
    if t == "ball":
        return Ball(complex(*d["center"]), d["radius"])
    if t == "annulus":
        return Annulus(d["s"], d["t"])
    if t == "polygon":
        return Polygon(tuple(complex(*v) for v in d["vertices"]))
    r = parse_scale(d["r"])
    cones = ConeParams(2 * d.get("q", 2), (), d.get("theta", math.pi / 12))
    if t == "Q":
        return SectorShell(d["j"], r, cones)
    return RefinedSectorShell(d["j"], d["k"], r, cones)
