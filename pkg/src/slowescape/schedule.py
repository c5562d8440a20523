"""Holding-up schedules.

Given a target rate ``a_n``, region magnitudes ``rho_nu`` and pause indices
``nu_1 < nu_2 < ...``, an orbit that visits region ``mu(n)`` at time ``n``
advances one region per step except while parked at a pause index, where it
waits until the rate has caught up with the next pause.  The result keeps
``rho_{mu(n)} <= a_n`` from the first pause time ``N_1`` on.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence as Seq

from .errors import DomainError, HorizonError, InfeasibleError


@dataclass(frozen=True)
class RateSequence:
    """A positive sequence indexed from 1: explicit prefix, then an optional tail rule.

    ``monotone_tail`` promises that the tail is nondecreasing and unbounded,
    which lets "for all m >= n" questions be answered beyond any horizon.
    """

    prefix: tuple = ()
    tail: Callable[[int], float] | None = None
    monotone_tail: bool = False
    label: str = ""

    def __call__(self, n: int) -> float:
        if n < 1:
            raise DomainError("sequences are indexed from 1")
        if n <= len(self.prefix):
            return float(self.prefix[n - 1])
        if self.tail is None:
            raise DomainError(f"sequence {self.label or '<prefix>'} undefined at n={n}")
        return float(self.tail(n))

    def values(self, horizon: int) -> list[float]:
        return [self(n) for n in range(1, horizon + 1)]

    @property
    def unbounded(self) -> bool:
        return self.tail is not None and self.monotone_tail

    @classmethod
    def of(cls, values: Seq[float], label: str = "") -> "RateSequence":
        return cls(tuple(float(v) for v in values), None, False, label)


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_rate(text: str) -> RateSequence:
    """Parse ``c*n``, ``c*n^p``, ``c*log(n)+d``, or a comma-separated prefix."""
    s = text.replace(" ", "")
    m = re.fullmatch(rf"({_NUM})\*n", s)
    if m:
        c = float(m[1])
        return RateSequence((), lambda n: c * n, c > 0, s)
    m = re.fullmatch(rf"({_NUM})\*n\^({_NUM})", s)
    if m:
        c, p = float(m[1]), float(m[2])
        return RateSequence((), lambda n: c * n ** p, c > 0 and p > 0, s)
    m = re.fullmatch(rf"({_NUM})\*log\(n\)({_NUM})?", s)
    if m:
        c, d = float(m[1]), float(m[2] or 0.0)
        return RateSequence((), lambda n: c * math.log(n) + d, c > 0, s)
    if "," in s or re.fullmatch(_NUM, s):
        try:
            vals = [float(v) for v in s.split(",") if v]
        except ValueError:
            raise DomainError(f"unrecognised rate {text!r}") from None
        return RateSequence.of(vals, s)
    raise DomainError(f"unrecognised rate {text!r}")


@dataclass
class HoldupSchedule:
    N: list[int]
    mu: dict[int, int]
    nu: list[int]
    rho: RateSequence
    a: RateSequence
    horizon: int
    horizon_limited: bool = False
    notes: list[str] = field(default_factory=list)

    def pause_block(self, n: int) -> int:
        """The k (1-based) with ``N_k <= n < N_{k+1}``."""
        k = 0
        while k < len(self.N) and self.N[k] <= n:
            k += 1
        return k

    def rows(self):
        for n in sorted(self.mu):
            m = self.mu[n]
            yield n, m, self.rho(m), self.a(n)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "mu", "rho_mu", "a_n"])
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()


def _pause_times(a_vals, rho_needed):
    """Least n (1-based) with a_m >= rho for all m >= n within the horizon."""
    horizon = len(a_vals)
    suffix = [0.0] * (horizon + 2)
    suffix[horizon + 1] = math.inf
    for n in range(horizon, 0, -1):
        suffix[n] = min(a_vals[n - 1], suffix[n + 1])
    out = []
    for r in rho_needed:
        n = next((n for n in range(1, horizon + 1) if suffix[n] >= r), None)
        out.append(n)
    return out


def build_schedule(a: RateSequence, rho: RateSequence, nu: Seq[int],
                   horizon: int) -> HoldupSchedule:
    """``N_k`` and ``mu(n)`` on ``[N_1, horizon]`` by the holding-up recurrence."""
    nu = [int(v) for v in nu]
    if not nu:
        raise DomainError("need at least one pause index")
    if any(v < 1 for v in nu) or any(y <= x for x, y in zip(nu, nu[1:])):
        raise DomainError("pause indices must be positive and strictly increasing")
    if horizon < 1:
        raise DomainError("horizon must be positive")
    rho_vals = [rho(v) for v in range(1, nu[-1] + 1)]
    if any(y < x for x, y in zip(rho_vals, rho_vals[1:])):
        raise DomainError("region magnitudes must be nondecreasing")
    if a.tail is not None and not a.monotone_tail:
        raise InfeasibleError(f"rate {a.label} does not tend to infinity")
    if a.tail is None:
        horizon = min(horizon, len(a.prefix))
    a_vals = a.values(horizon)
    if any(v <= 0 for v in a_vals):
        raise DomainError("rate must be positive")
    need = [rho(v) for v in nu]
    if not a.unbounded and max(a_vals) < need[0]:
        raise InfeasibleError(f"rate never reaches rho_nu1 = {need[0]:g}")
    least = _pause_times(a_vals, need)
    if least[0] is None:
        raise HorizonError(f"horizon {horizon} ends before the first pause time")
    N, notes = [], []
    for k, n in enumerate(least):
        if n is None:
            break
        if N and n <= N[-1]:
            notes.append(f"N_{k + 1} raised from {n} to {N[-1] + 1} to keep N strictly increasing")
            n = N[-1] + 1
        if n > horizon:
            break
        N.append(n)
    mu = {N[0]: nu[0]}
    k = 1
    for n in range(N[0], horizon):
        while k < len(N) and N[k] <= n:
            k += 1
        m = mu[n]
        mu[n + 1] = m + 1 if m < nu[k - 1] else m
    return HoldupSchedule(N, mu, nu, rho, a, horizon,
                          horizon_limited=not a.unbounded, notes=notes)


def verify_schedule(s: HoldupSchedule, horizon: int | None = None) -> bool:
    """Check the recurrence, the step sizes and ``rho_{mu(n)} <= a_n`` up to ``horizon``."""
    horizon = s.horizon if horizon is None else min(horizon, s.horizon)
    if not s.N or any(y <= x for x, y in zip(s.N, s.N[1:])):
        return False
    n1 = s.N[0]
    if s.mu.get(n1) != s.nu[0]:
        return False
    for n in range(n1, horizon + 1):
        if n not in s.mu:
            return False
        m = s.mu[n]
        if s.rho(m) > s.a(n):
            return False
        if n == horizon:
            break
        step = s.mu.get(n + 1, m) - m
        if step not in (0, 1):
            return False
        k = s.pause_block(n)
        if k > len(s.nu):
            return False
        held = m == s.nu[k - 1]
        if held != (step == 0):
            return False
    return True
