"""Catalog of transcendental-type plane maps.

Every entry offers vectorised double evaluation (``f(z)`` on numpy arrays),
adaptive-precision scalar evaluation through :func:`evaluate`, maximum modulus
on circles, and a log-scale maximum-modulus rule used by :func:`iter_maxmod`
once radii leave the double range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CapacityError, DomainError, UnsupportedDepthError
from .numeric_tower import (
    DEFAULT_POLICY,
    LevelIndex,
    PrecisionPolicy,
    add_real,
    apply_exp,
    apply_log,
    from_real,
)

HOLOMORPHIC = "holomorphic"
QUASIREGULAR = "quasiregular"
EXACT = "exact_formula"
NUMERIC = "numeric"

CIRCLE_SAMPLES = 2 ** 12


def _np_complex(z):
    return np.asarray(z, dtype=complex)


class MapDescriptor:
    """Base class; subclasses fill in the evaluation hooks."""

    name: str = "map"
    kind: str = HOLOMORPHIC
    dilatation_K: float = 1.0
    maxmod_mode: str = EXACT
    transcendental: bool = True
    # log M(r) is an exact closed form in log r: iterate in log scale always
    exact_log_rule: bool = False

    @property
    def parameters(self) -> tuple:
        return ()

    @property
    def spec(self) -> str:
        return self.name

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec}>"

    # vectorised double evaluation; overflow yields inf
    def __call__(self, z):
        raise NotImplementedError

    def derivative(self, z):
        """Complex derivative on arrays, or None for non-holomorphic maps."""
        return None

    def log_eval(self, z):
        """A branch of ``log f(z)`` on arrays, finite where ``f(z)`` would overflow."""
        with np.errstate(all="ignore"):
            return np.log(_np_complex(self(z)))

    def mp_eval(self, z: mpmath.mpc) -> mpmath.mpc:
        raise NotImplementedError

    def mp_derivative(self, z: mpmath.mpc):
        return None

    def mp_expansion(self, z: mpmath.mpc) -> mpmath.mpf:
        """Largest directional derivative of ``f`` at ``z``."""
        d = self.mp_derivative(z)
        if d is None:
            raise NotImplementedError
        return abs(d)

    def inverse_candidates(self, w: mpmath.mpc, near: mpmath.mpc, count: int = 3) -> list:
        """Closed-form preimages of ``w`` near ``near``; empty when none are known."""
        return []

    def exact_maxmod(self, r: mpmath.mpf) -> mpmath.mpf:
        raise NotImplementedError

    def mp_maxmod(self, r: mpmath.mpf) -> mpmath.mpf:
        """``M(r, f)`` at the working precision, for radii beyond double range."""
        if self.maxmod_mode == EXACT:
            return self.exact_maxmod(r)
        raise NotImplementedError

    def log_maxmod(self, r: LevelIndex) -> tuple[LevelIndex, LevelIndex]:
        """Bracket ``(lo, hi)`` for ``log M(r, f)``."""
        raise NotImplementedError

    def log_abs_estimate(self, z: complex) -> float:
        return math.inf

    def mp_log_abs(self, z: mpmath.mpc) -> mpmath.mpf:
        v = self.mp_eval(z)
        return mpmath.log(abs(v)) if v != 0 else mpmath.mpf("-inf")

    def _exact_bracket(self, r: LevelIndex):
        with mpmath.workprec(128):
            m = self.exact_maxmod(r.to_mpf())
            lm = from_real(m)
        if lm.level == 0 and lm.index <= 1.0:
            raise DomainError("maximum modulus below 1 has no log-scale form")
        out = apply_log(lm)
        return out, out


class ExpMap(MapDescriptor):
    """``lam * exp(z)``; ``lam = 1`` is the plain exponential."""

    def __init__(self, lam: complex = 1.0):
        if lam == 0:
            raise DomainError("lambda must be non-zero")
        self.lam = complex(lam)
        self.name = "exp" if self.lam == 1 else "lambda_exp"

    @property
    def parameters(self):
        return () if self.lam == 1 else (self.lam,)

    @property
    def spec(self):
        if self.lam == 1:
            return "exp"
        lam = self.lam.real if self.lam.imag == 0 else self.lam
        return f"lambda_exp:{lam!r}"

    def __call__(self, z):
        with np.errstate(over="ignore", invalid="ignore"):
            return self.lam * np.exp(_np_complex(z))

    def derivative(self, z):
        return self(z)

    def log_eval(self, z):
        return _np_complex(z) + np.log(self.lam)

    def mp_eval(self, z):
        return mpmath.mpc(self.lam) * mpmath.exp(z)

    def mp_derivative(self, z):
        return self.mp_eval(z)

    def mp_log_abs(self, z):
        return mpmath.re(z) + mpmath.log(abs(mpmath.mpc(self.lam)))

    def exact_maxmod(self, r):
        return abs(mpmath.mpc(self.lam)) * mpmath.exp(r)

    @property
    def exact_log_rule(self):
        return abs(self.lam) == 1

    def log_maxmod(self, r):
        if abs(self.lam) == 1:
            return r, r
        out = add_real(r, math.log(abs(self.lam)))
        return out, out

    def log_abs_estimate(self, z):
        return complex(z).real + math.log(abs(self.lam))

    def inverse_candidates(self, w, near, count=3):
        base = mpmath.log(w / mpmath.mpc(self.lam))
        m0 = int(mpmath.nint((mpmath.im(near) - mpmath.im(base)) / (2 * mpmath.pi)))
        return [base + 2j * mpmath.pi * m for m in range(m0 - count, m0 + count + 1)]


class SinMap(MapDescriptor):
    name = "sin"
    maxmod_mode = NUMERIC

    def __call__(self, z):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.sin(_np_complex(z))

    def derivative(self, z):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.cos(_np_complex(z))

    def log_eval(self, z):
        z = _np_complex(z)
        y = z.imag
        log2i = np.log(2j)
        with np.errstate(all="ignore"):
            small = np.log(np.sin(np.where(np.abs(y) < 300, z, 0)))
            up = -1j * z + 1j * np.pi + np.log1p(-np.exp(np.where(y >= 300, 2j * z, 0))) - log2i
            down = 1j * z + np.log1p(-np.exp(np.where(y <= -300, -2j * z, 0))) - log2i
        return np.where(np.abs(y) < 300, small, np.where(y > 0, up, down))

    def mp_eval(self, z):
        return mpmath.sin(z)

    def mp_derivative(self, z):
        return mpmath.cos(z)

    def mp_maxmod(self, r):
        # |sin(x+iy)|^2 = (cosh 2y - cos 2x)/2 peaks on the circle at z = ±ir
        return mpmath.sinh(r)

    def log_maxmod(self, r):
        # sinh r <= M(r, sin) <= cosh r
        if r.fits_double() and r.to_real() < 700:
            x = r.to_real()
            if x <= math.asinh(1.0):
                raise DomainError("maximum modulus below 1 has no log-scale form")
            return from_real(math.log(math.sinh(x))), from_real(math.log(math.cosh(x)))
        if r.fits_double() and r.to_real() < 1e6:
            with mpmath.workprec(128):
                x = r.to_mpf()
                lo = from_real(x - mpmath.log(2) + mpmath.log1p(-mpmath.exp(-2 * x)))
                hi = from_real(x - mpmath.log(2) + mpmath.log1p(mpmath.exp(-2 * x)))
            return lo, hi
        out = add_real(r, -math.log(2.0))
        return out, out

    def log_abs_estimate(self, z):
        return abs(complex(z).imag) - math.log(2.0)

    def inverse_candidates(self, w, near, count=3):
        a = mpmath.asin(w)
        m0 = int(mpmath.nint(mpmath.re(near) / (2 * mpmath.pi)))
        out = []
        for m in range(m0 - count, m0 + count + 1):
            out += [a + 2 * mpmath.pi * m, mpmath.pi - a + 2 * mpmath.pi * m]
        return out


class ZExpMap(MapDescriptor):
    name = "zexp"

    def __call__(self, z):
        z = _np_complex(z)
        with np.errstate(over="ignore", invalid="ignore"):
            return z * np.exp(z)

    def derivative(self, z):
        z = _np_complex(z)
        with np.errstate(over="ignore", invalid="ignore"):
            return (1 + z) * np.exp(z)

    def log_eval(self, z):
        z = _np_complex(z)
        with np.errstate(divide="ignore"):
            return np.log(z) + z

    def mp_eval(self, z):
        return z * mpmath.exp(z)

    def mp_derivative(self, z):
        return (1 + z) * mpmath.exp(z)

    def exact_maxmod(self, r):
        return r * mpmath.exp(r)

    def log_maxmod(self, r):
        if r.fits_mpf() and r.level <= 2:
            return self._exact_bracket(r) if r.fits_double() else self._mp_log(r)
        try:
            out = add_real(r, apply_log(r).to_real())
        except Exception:
            out = r
        return out, out

    def _mp_log(self, r):
        with mpmath.workprec(128):
            x = r.to_mpf()
            out = from_real(x + mpmath.log(x))
        return out, out

    def log_abs_estimate(self, z):
        z = complex(z)
        return z.real + math.log(abs(z)) if z != 0 else -math.inf

    def inverse_candidates(self, w, near, count=3):
        # z e^z = w  <=>  z = W_k(w); branch k winds Im z by about 2 pi k
        k0 = int(mpmath.nint(mpmath.im(near) / (2 * mpmath.pi)))
        out = []
        for k in range(k0 - count, k0 + count + 1):
            try:
                out.append(mpmath.lambertw(w, k))
            except (ValueError, ZeroDivisionError):
                pass
        return out


class SparseProductMap(MapDescriptor):
    """``prod_{k>=1} (1 - z / 2**(k*k))``, truncated adaptively.

    All zeros are positive reals, so ``M(r) = prod (1 + r / a_k)`` is attained
    at ``z = -r``.  Factors are included until ``|z| / a_k`` drops below the
    requested relative tolerance; the tail then changes the value by a
    relative amount below twice that tolerance.
    """

    name = "sparse_product"

    def zero(self, k: int) -> float:
        return float(2 ** (k * k))

    def n_terms(self, radius: float, tol: float) -> int:
        radius = max(float(radius), 1.0)
        k = 1
        while radius / 2.0 ** (k * k) > tol / 2.0:
            k += 1
        return k

    def __call__(self, z):
        z = _np_complex(z)
        radius = float(np.nanmax(np.abs(z))) if z.size else 1.0
        if not math.isfinite(radius):
            radius = 1e300
        out = np.ones_like(z)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, self.n_terms(radius, 1e-17) + 1):
                out = out * (1 - z / self.zero(k))
        return out

    def derivative(self, z):
        z = _np_complex(z)
        radius = float(np.nanmax(np.abs(z))) if z.size else 1.0
        K = self.n_terms(radius, 1e-17)
        factors = [1 - z / self.zero(k) for k in range(1, K + 1)]
        out = np.zeros_like(z)
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(K):
                term = np.full_like(z, -1.0 / self.zero(i + 1))
                for m in range(K):
                    if m != i:
                        term = term * factors[m]
                out = out + term
        return out

    def log_eval(self, z):
        z = _np_complex(z)
        radius = float(np.nanmax(np.abs(z))) if z.size else 1.0
        out = np.zeros_like(z)
        with np.errstate(divide="ignore"):
            for k in range(1, self.n_terms(radius, 1e-17) + 1):
                out = out + np.log(1 - z / self.zero(k))
        return out

    def _mp_terms(self, z):
        tol = mpmath.mpf(2) ** (-mpmath.mp.prec)
        radius = max(abs(z), mpmath.mpf(1))
        k = 1
        while radius / mpmath.mpf(2) ** (k * k) > tol / 2:
            k += 1
        return k

    def mp_eval(self, z):
        out = mpmath.mpc(1)
        for k in range(1, self._mp_terms(z) + 1):
            out *= 1 - z / mpmath.mpf(2) ** (k * k)
        return out

    def mp_derivative(self, z):
        K = self._mp_terms(z)
        a = [mpmath.mpf(2) ** (k * k) for k in range(1, K + 1)]
        factors = [1 - z / ak for ak in a]
        if all(factors):
            # f' = f * sum 1 / (z - a_k)
            return mpmath.fprod(factors) * mpmath.fsum(1 / (z - ak) for ak in a)
        total = mpmath.mpc(0)
        for i in range(K):
            term = mpmath.mpc(-1) / a[i]
            for m in range(K):
                if m != i:
                    term *= factors[m]
            total += term
        return total

    def exact_maxmod(self, r):
        out = mpmath.mpf(1)
        for k in range(1, self._mp_terms(mpmath.mpc(r)) + 1):
            out *= 1 + r / mpmath.mpf(2) ** (k * k)
        return out

    def log_maxmod(self, r):
        if r.fits_double():
            return self._exact_bracket(r)
        # log M = sum log(1 + r / a_k): needs about sqrt(log2 r) terms
        try:
            ln_r = apply_log(r).to_real()
        except Exception:
            ln_r = math.inf
        if not ln_r < 1e6:
            raise UnsupportedDepthError(f"no log-scale rule for sparse_product at {r}")
        with mpmath.workprec(128):
            x = mpmath.mpf(ln_r)
            total = mpmath.mpf(0)
            k = 1
            while True:
                lk = k * k * mpmath.log(2)
                if lk > x + 200:
                    break
                total += mpmath.log1p(mpmath.exp(x - lk)) if x - lk < 50 else (x - lk) + mpmath.log1p(mpmath.exp(lk - x))
                k += 1
            out = from_real(total)
        return out, out

    def log_abs_estimate(self, z):
        z = complex(z)
        return float(sum(math.log(abs(1 - z / self.zero(k)) or 1e-300)
                         for k in range(1, self.n_terms(abs(z), 1e-17) + 1)))


class StretchExpMap(MapDescriptor):
    """``f(x + iy) = exp(x + iKy)``: exp composed with an affine stretch.

    Quasiregular with dilatation ``K`` (the stretch's), not holomorphic.
    """

    kind = QUASIREGULAR
    name = "stretch_exp"
    exact_log_rule = True

    def __init__(self, K: float = 2.0):
        if K < 1:
            raise DomainError("stretch factor K must be >= 1")
        self.K = float(K)
        self.dilatation_K = self.K

    @property
    def parameters(self):
        return (self.K,)

    @property
    def spec(self):
        return f"stretch_exp:K={self.K!r}"

    def stretch(self, z):
        z = _np_complex(z)
        return z.real + 1j * self.K * z.imag

    def log_eval(self, z):
        return self.stretch(z)

    def __call__(self, z):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.stretch(z))

    def mp_eval(self, z):
        return mpmath.exp(mpmath.mpc(mpmath.re(z), self.K * mpmath.im(z)))

    def mp_log_abs(self, z):
        return mpmath.re(z)

    def exact_maxmod(self, r):
        return mpmath.exp(r)

    def mp_expansion(self, z):
        return self.K * abs(self.mp_eval(z))

    def inverse_candidates(self, w, near, count=3):
        base = mpmath.log(w)
        m0 = int(mpmath.nint((self.K * mpmath.im(near) - mpmath.im(base)) / (2 * mpmath.pi)))
        out = []
        for m in range(m0 - count, m0 + count + 1):
            u = base + 2j * mpmath.pi * m
            out.append(mpmath.mpc(mpmath.re(u), mpmath.im(u) / self.K))
        return out

    def log_maxmod(self, r):
        return r, r

    def log_abs_estimate(self, z):
        return complex(z).real


class Polynomial(MapDescriptor):
    """Polynomial ``sum c_k z^k`` (coefficients low to high); test fixture only."""

    name = "poly"
    transcendental = False

    def __init__(self, coeffs):
        self.coeffs = tuple(complex(c) for c in coeffs)

    @property
    def parameters(self):
        return self.coeffs

    @property
    def spec(self):
        return "poly:" + ",".join(repr(c.real) if c.imag == 0 else repr(c) for c in self.coeffs)

    def __call__(self, z):
        return np.polyval(self.coeffs[::-1], _np_complex(z))

    def derivative(self, z):
        d = np.polyder(np.array(self.coeffs[::-1]))
        return np.polyval(d, _np_complex(z))

    def mp_eval(self, z):
        return mpmath.polyval([mpmath.mpc(c) for c in self.coeffs[::-1]], z)

    def mp_derivative(self, z):
        n = len(self.coeffs)
        d = [mpmath.mpc(self.coeffs[k]) * k for k in range(n - 1, 0, -1)]
        return mpmath.polyval(d, z) if d else mpmath.mpc(0)

    def inverse_candidates(self, w, near, count=3):
        c = [mpmath.mpc(x) for x in self.coeffs]
        c[0] -= w
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if len(c) < 2:
            return []
        return list(mpmath.polyroots(c[::-1], maxsteps=200, extraprec=64))

    def exact_maxmod(self, r):
        raise NotImplementedError

    @property
    def maxmod_mode(self):
        return NUMERIC


CATALOG_NAMES = ("exp", "lambda_exp", "sin", "zexp", "sparse_product", "stretch_exp")


def parse_map(text: str) -> MapDescriptor:
    """Build a catalog map from ``name[:params]`` (e.g. ``stretch_exp:K=3``)."""
    name, _, arg = text.strip().partition(":")
    arg = arg.strip()
    if name == "exp":
        return ExpMap()
    if name == "lambda_exp":
        return ExpMap(complex(arg.replace("lambda=", "").replace("lam=", "")) if arg else 0.5)
    if name == "sin":
        return SinMap()
    if name == "zexp":
        return ZExpMap()
    if name == "sparse_product":
        return SparseProductMap()
    if name == "stretch_exp":
        return StretchExpMap(float(arg.replace("K=", "")) if arg else 2.0)
    if name == "poly":
        return Polynomial([complex(c) for c in arg.split(",")])
    raise DomainError(f"unknown map {text!r}; catalog: {', '.join(CATALOG_NAMES)}")


def catalog() -> list[MapDescriptor]:
    return [ExpMap(), ExpMap(0.5), SinMap(), ZExpMap(), SparseProductMap(), StretchExpMap(3.0)]


# ---------------------------------------------------------------------------
# evaluation

def evaluate(f: MapDescriptor, z, policy: PrecisionPolicy = DEFAULT_POLICY) -> mpmath.mpc:
    """Evaluate ``f(z)`` to ``policy.target_rel_err`` by precision doubling."""
    prev = None
    for bits in policy.ladder():
        with mpmath.workprec(bits):
            zz = mpmath.mpc(z)
            if not (mpmath.isfinite(zz.real) and mpmath.isfinite(zz.imag)):
                raise DomainError("z must be finite")
            val = f.mp_eval(zz)
        if prev is not None:
            with mpmath.workprec(bits):
                err = abs(val - prev)
                scale = abs(val)
                if err <= policy.target_rel_err * scale or (scale == 0 and err == 0):
                    return val
        prev = val
    est = f.log_abs_estimate(complex(z)) if abs(complex(z)) < 1e300 else math.inf
    raise CapacityError(f"{f.spec} at {z}: precision exhausted at {policy.max_bits} bits",
                        log_magnitude=est)


@dataclass(frozen=True)
class CircleMax:
    lower: float
    estimate: float
    argument: float


def circle_maximum(f: MapDescriptor, r: float, samples: int = CIRCLE_SAMPLES) -> CircleMax:
    """Sampled maximum of ``|f|`` on ``|z| = r`` refined by golden section."""
    t = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    vals = np.abs(f(r * np.exp(1j * t)))
    if not np.all(np.isfinite(vals)):
        raise CapacityError(f"|{f.spec}| overflows on |z|={r}",
                            log_magnitude=f.log_abs_estimate(r))
    i = int(np.argmax(vals))
    lower = float(vals[i])
    h = 2 * np.pi / samples
    res = minimize_scalar(lambda s: -abs(complex(f(np.array([r * np.exp(1j * s)]))[0])),
                          bounds=(t[i] - h, t[i] + h), method="bounded",
                          options={"xatol": 1e-12})
    best = max(lower, -float(res.fun))
    arg = float(res.x) if -res.fun >= lower else float(t[i])
    return CircleMax(lower, best, arg % (2 * np.pi))


def max_modulus(f: MapDescriptor, r: float) -> float:
    """``M(r, f) = max_{|z|=r} |f(z)|`` as a double."""
    if r <= 0:
        raise DomainError("radius must be positive")
    if f.maxmod_mode == EXACT:
        with mpmath.workprec(80):
            m = f.exact_maxmod(mpmath.mpf(r))
        out = float(m)
        if math.isinf(out):
            with mpmath.workprec(80):
                raise CapacityError(f"M({r}, {f.spec}) overflows",
                                    log_magnitude=float(mpmath.log(m)))
        return out
    return circle_maximum(f, r).estimate


def max_modulus_mp(f: MapDescriptor, r) -> mpmath.mpf:
    """Maximum modulus at the current mpmath precision (exact entries only)."""
    if f.maxmod_mode == EXACT:
        return f.exact_maxmod(mpmath.mpf(r))
    return mpmath.mpf(circle_maximum(f, float(r)).estimate)


def iter_maxmod_bracket(f: MapDescriptor, R, n: int) -> tuple[LevelIndex, LevelIndex]:
    """Lower/upper level-index bounds for ``M^n(R, f)``."""
    if n < 0:
        raise DomainError("depth must be non-negative")
    lo = hi = from_real(R) if not isinstance(R, LevelIndex) else R
    if lo.level == 0 and lo.index <= 0:
        raise DomainError("R must be positive")
    for step in range(n):
        if f.maxmod_mode == EXACT:
            lo = hi = _next_maxmod(f, lo, step, upper=False)
        else:
            lo, hi = _next_maxmod(f, lo, step, upper=False), _next_maxmod(f, hi, step, upper=True)
    return lo, hi


def _next_maxmod(f, r: LevelIndex, step: int, upper: bool) -> LevelIndex:
    small = r.fits_double() and r.to_real() < 700
    if small and not f.exact_log_rule:
        x = r.to_real()
        if f.maxmod_mode == EXACT:
            with mpmath.workprec(128):
                return from_real(f.exact_maxmod(mpmath.mpf(x)))
        if upper:
            try:
                return apply_exp(f.log_maxmod(r)[1])
            except (NotImplementedError, DomainError):
                pass
        return from_real(max_modulus(f, x))
    try:
        lo, hi = f.log_maxmod(r)
    except NotImplementedError:
        raise UnsupportedDepthError(f"{f.spec} has no log-scale rule (step {step + 1})") from None
    return apply_exp(hi if upper else lo)


def iter_maxmod(f: MapDescriptor, R, n: int) -> LevelIndex:
    """``M^n(R, f)`` as a level-index number (``M^0 = R``)."""
    return iter_maxmod_bracket(f, R, n)[0]


def circle_minimum(f: MapDescriptor, center: complex, radius: float,
                   samples: int = CIRCLE_SAMPLES, refine: int = 4) -> tuple[float, complex]:
    """Minimum of ``|f|`` on the circle ``|z - center| = radius`` and where it occurs.

    The sampled minimum is polished around the ``refine`` smallest discrete
    local minima, since a pit can sit between samples.
    """
    t = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    vals = np.abs(f(center + radius * np.exp(1j * t)))
    if np.any(np.isnan(vals)):
        raise CapacityError(f"|{f.spec}| is undefined on the sampled circle")
    local = np.flatnonzero((vals <= np.roll(vals, 1)) & (vals <= np.roll(vals, -1)))
    local = local[np.argsort(vals[local])][:refine]
    h = 2 * np.pi / samples
    best, where = float(vals[local[0]]), float(t[local[0]])
    for i in local:
        res = minimize_scalar(
            lambda s: abs(complex(f(np.array([center + radius * np.exp(1j * s)]))[0])),
            bounds=(t[i] - h, t[i] + h), method="bounded", options={"xatol": 1e-13})
        if res.fun < best:
            best, where = float(res.fun), float(res.x)
    return best, complex(center + radius * np.exp(1j * where))
