import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slowescape.errors import DomainError, ScaleMismatchError
from slowescape.numeric_tower import LevelIndex
from slowescape.regions import (
    DEFAULT_CONES, Annulus, Ball, ConeParams, Polygon, RefinedSectorShell, SectorShell,
    parse_region, region_from_dict,
)

LITERALS = ["ball:1,-2,0.5", "ann:2,5", "box:-1,2,0,3", "poly:0,0,4,0,0,3",
            "Q:1,10", "Q:3,7.5", "Qk:2,1,20", "Qk:4,3,100"]


def _shell_oracle(z, s, t, a, b, phi, th):
    """Membership written straight from the definition: annulus or truncated cone."""
    m = np.abs(z)
    d = np.abs(np.angle(z * np.exp(-1j * phi)))
    return ((s < m) & (m < t)) | ((a < m) & (m < b) & (d < th))


def _cloud(radius, n=20000, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-radius, radius, n) + 1j * rng.uniform(-radius, radius, n)


def test_default_cones():
    c = DEFAULT_CONES
    assert c.q == 2 and c.sector_count == 4
    assert c.direction(2) == pytest.approx(math.pi)
    assert c.half_angle == pytest.approx(math.pi / 12)
    with pytest.raises(DomainError):
        ConeParams(4, (), math.pi / 2)
    with pytest.raises(DomainError):
        c.direction(5)


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_sector_shell_matches_definition(j):
    r = 10.0
    E = SectorShell(j, r)
    z = _cloud(6 * r, seed=j)
    want = _shell_oracle(z / r, j, j + 0.5, 0.25, 5.0, j * math.pi / 2, math.pi / 12)
    np.testing.assert_array_equal(E.contains(z), want)


@pytest.mark.parametrize("j,k", [(1, 1), (2, 2), (4, 5)])
def test_refined_shell_matches_definition(j, k):
    r = 3.0
    E = RefinedSectorShell(j, k, r)
    z = _cloud(2.5 * r, seed=10 * j + k)
    s, t = 1 + (j - 0.5) / (4 * k), 1 + j / (4 * k)
    want = _shell_oracle(z / r, s, t, 1 - 1 / (k + 1), 1 + 1 / k, j * math.pi / 2, math.pi / 12)
    np.testing.assert_array_equal(E.contains(z), want)


@pytest.mark.parametrize("k", [1, 2, 3, 8])
def test_refined_shell_inside_envelope(k):
    for j in range(1, 5):
        E = RefinedSectorShell(j, k, 1.0)
        lo, hi = E.envelope()
        m = np.abs(E.grid(40))
        assert m.min() > lo and m.max() < hi


def test_sector_cones_are_disjoint():
    z = _cloud(5.0, seed=3)
    inside = np.array([RefinedSectorShell(j, 2, 1.0).contains(z) for j in range(1, 5)])
    # annuli are nested disjointly and cones are separated, so overlaps stay in one cone
    annulus = [(1 + (j - 0.5) / 8, 1 + j / 8) for j in range(1, 5)]
    for i in range(4):
        for j in range(i + 1, 4):
            both = inside[i] & inside[j]
            if both.any():
                m = np.abs(z[both])
                in_ann = [(m > s) & (m < t) for s, t in (annulus[i], annulus[j])]
                assert np.all(in_ann[0] | in_ann[1])


@pytest.mark.parametrize("lit", LITERALS)
def test_signed_distance_sign_and_size(lit):
    E = parse_region(lit)
    lo, hi, _, _ = E.bbox()
    z = _cloud(1.2 * max(abs(lo), abs(hi)), n=4000, seed=7)
    d = E.signed_distance(z)
    inside = E.contains(z)
    assert np.all(d[inside] >= 0)
    assert np.all(d[~inside] <= 1e-12 * E.scale)
    bnd = np.concatenate(E.boundary_samples(4096))
    near = np.min(np.abs(z[:, None] - bnd[None, :]), axis=1)
    spacing = np.max(np.abs(np.diff(bnd)))
    # the sampled boundary overestimates the exact distance by at most one spacing
    assert np.all(np.abs(d) <= near + 1e-9)
    assert np.all(near - np.abs(d) <= spacing)


@pytest.mark.parametrize("lit", LITERALS)
def test_literal_and_dict_round_trip(lit):
    E = parse_region(lit)
    assert parse_region(E.literal()) == E
    assert region_from_dict(E.to_dict()) == E


@pytest.mark.parametrize("lit", LITERALS)
def test_grid_and_anchor_inside(lit):
    E = parse_region(lit)
    g = E.grid(24)
    assert len(g) > 0 and np.all(E.contains(g))
    assert E.contains(np.array([E.anchor()]))[0]
    lo, hi = E.modulus_bounds()
    assert np.all(np.abs(g) >= float(lo) - 1e-12) and np.all(np.abs(g) <= float(hi) + 1e-12)


@pytest.mark.parametrize("lit", LITERALS)
def test_boundary_orientation(lit):
    # outer components run counter-clockwise: positive signed area via shoelace
    E = parse_region(lit)
    outer = E.boundary_samples(512)[0]
    area = 0.5 * np.sum(outer.real * np.roll(outer.imag, -1) - np.roll(outer.real, -1) * outer.imag)
    assert area > 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 10), st.floats(1.01, 5))
def test_annulus_margin(s, ratio):
    A = Annulus(s, s * ratio)
    z = np.array([s * (1 + ratio) / 2])
    assert A.signed_distance(z)[0] == pytest.approx(s * (ratio - 1) / 2)
    u = A.unit_copy()
    assert u.t == 1.0 and u.s == pytest.approx(1 / ratio)


def test_symbolic_scale():
    E = RefinedSectorShell(1, 3, LevelIndex(3, 2.0))
    assert E.symbolic
    with pytest.raises(ScaleMismatchError):
        E.contains(np.array([1.0]))
    lo, hi = E.modulus_bounds()
    assert lo < E.r < hi
    assert E.log_scale_mp() == pytest.approx(math.exp(math.exp(2.0)), rel=1e-12)
    # far beyond double range the envelope factors fall below index resolution
    lo, hi = RefinedSectorShell(1, 3, LevelIndex(6, 1.5)).modulus_bounds()
    assert lo <= hi


def test_mp_margin_at_large_scale():
    E = RefinedSectorShell(1, 2, LevelIndex(2, 2.5))
    with mpmath.workprec(200):
        z = E.anchor_mp()
        assert E.contains_mp(z)
        assert E.margin_mp(z) > 0
        assert not E.contains_mp(z * 3)


def test_bad_literals():
    for bad in ["ball:1,2", "ann:a,b", "hex:1,2", "Qk:1,0,5", "Q:9,5"]:
        with pytest.raises(DomainError):
            parse_region(bad)
    with pytest.raises(DomainError):
        Ball(0j, -1.0)
    with pytest.raises(DomainError):
        Polygon((0j, 1 + 0j))


def test_exact_scale_round_trip():
    with mpmath.workprec(200):
        r = mpmath.exp(mpmath.exp(32))
        E = RefinedSectorShell(1, 3, r)
        assert E.symbolic
        F = parse_region(E.literal())
        assert region_from_dict(E.to_dict()).literal() == E.literal()
        assert abs(F.log_scale_mp() - mpmath.exp(32)) < 1e-20
        z = E.anchor_mp()
        assert F.contains_mp(z) and F.margin_mp(z) == pytest.approx(E.margin_mp(z), abs=1e-12)
