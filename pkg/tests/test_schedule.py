import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from slowescape.errors import DomainError, HorizonError, InfeasibleError
from slowescape.schedule import RateSequence, build_schedule, parse_rate, verify_schedule


def _naive(a_vals, rho, nu):
    """Direct transcription: N_k = least n with a_m >= rho(nu_k) for every m >= n, then walk."""
    H = len(a_vals)
    N = []
    for v in nu:
        n = next((n for n in range(1, H + 1) if all(x >= rho(v) for x in a_vals[n - 1:])), None)
        if n is None:
            break
        n = max(n, N[-1] + 1) if N else n
        if n > H:
            break
        N.append(n)
    # the block containing n decides the step from n to n + 1
    mu = {N[0]: nu[0]}
    for n in range(N[0], H):
        k = max(i for i in range(len(N)) if N[i] <= n)
        mu[n + 1] = mu[n] + 1 if mu[n] < nu[k] else mu[n]
    return N, mu


@st.composite
def instances(draw):
    H = draw(st.integers(5, 60))
    steps = draw(st.lists(st.floats(0, 5), min_size=H, max_size=H))
    a_vals = [1.0 + sum(steps[: i + 1]) for i in range(H)]
    n_nu = draw(st.integers(1, 6))
    gaps = draw(st.lists(st.integers(1, 4), min_size=n_nu, max_size=n_nu))
    nu = [sum(gaps[: i + 1]) for i in range(n_nu)]
    growth = draw(st.lists(st.floats(0, 3), min_size=nu[-1], max_size=nu[-1]))
    rho_vals = [0.5 + sum(growth[: i + 1]) for i in range(nu[-1])]
    return a_vals, rho_vals, nu


@settings(max_examples=150, deadline=None)
@given(instances())
def test_schedule_matches_naive_walk(inst):
    a_vals, rho_vals, nu = inst
    a, rho = RateSequence.of(a_vals), RateSequence.of(rho_vals)
    try:
        s = build_schedule(a, rho, nu, len(a_vals))
    except (InfeasibleError, HorizonError):
        assume(False)
    N, mu = _naive(a_vals, rho, nu)
    assert s.N == N
    assert s.mu == mu
    assert verify_schedule(s)


@settings(max_examples=100, deadline=None)
@given(instances())
def test_schedule_invariants(inst):
    a_vals, rho_vals, nu = inst
    a, rho = RateSequence.of(a_vals), RateSequence.of(rho_vals)
    try:
        s = build_schedule(a, rho, nu, len(a_vals))
    except (InfeasibleError, HorizonError):
        assume(False)
    ns = sorted(s.mu)
    for n, n2 in zip(ns, ns[1:]):
        step = s.mu[n2] - s.mu[n]
        assert step in (0, 1)
        if step == 0:
            assert s.mu[n] in nu
    for n in ns:
        assert rho(s.mu[n]) <= a(n)


def test_linear_rate_example():
    a = parse_rate("100*n")
    rho = RateSequence.of([40, 150, 200, 300, 800, 900])
    s = build_schedule(a, rho, [1, 3, 5], 12)
    assert s.N == [1, 2, 8]
    assert [s.mu[n] for n in range(1, 13)] == [1, 1, 2, 3, 3, 3, 3, 3, 4, 5, 5, 5]
    assert verify_schedule(s)
    assert s.to_csv().splitlines()[0] == "n,mu,rho_mu,a_n"


def test_tampered_schedule_fails_verification():
    s = build_schedule(parse_rate("10*n"), RateSequence.of([5, 15, 25, 35]), [1, 2, 4], 10)
    assert verify_schedule(s)
    n = max(s.mu)
    s.mu[n] = s.mu[n] + 2
    assert not verify_schedule(s)


def test_parse_rate_forms():
    assert parse_rate("2.5*n")(4) == 10.0
    assert parse_rate("3*n^2")(2) == 12.0
    assert parse_rate("2*log(n)+1")(math.e) == pytest.approx(3.0)
    assert parse_rate("1,2,3").values(3) == [1.0, 2.0, 3.0]
    assert parse_rate("5*n").unbounded
    assert not parse_rate("1,2,3").unbounded
    with pytest.raises(DomainError):
        parse_rate("n!")
    with pytest.raises(DomainError):
        parse_rate("1*n")(0)


def test_infeasible_and_horizon():
    rho = RateSequence.of([10, 20, 30])
    with pytest.raises(InfeasibleError):
        build_schedule(RateSequence.of([1, 2, 3]), rho, [1, 2], 3)
    with pytest.raises(InfeasibleError):
        build_schedule(parse_rate("-1*n"), rho, [1, 2], 10)
    with pytest.raises(HorizonError):
        build_schedule(parse_rate("1*n"), rho, [2, 3], 5)
    with pytest.raises(DomainError):
        build_schedule(parse_rate("1*n"), rho, [2, 2], 5)
