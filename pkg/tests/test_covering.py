import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import image_boundary, region_has_preimages, target_has_preimage
from slowescape.covering import (
    COVERED, NOT_COVERED, UNDECIDED, ball_expansion_check, certify_covering,
    cover_with_subdomain, find_subdomain, point_covered, region_covered, shell_expansion_check,
)
from slowescape.errors import DomainError
from slowescape.maps import Polynomial, parse_map
from slowescape.numeric_tower import LevelIndex
from slowescape.regions import Annulus, Ball, Polygon, RefinedSectorShell, parse_region

EXP = parse_map("exp")


def test_point_covered_exp_box():
    U = Polygon.box(0, 2, -4, 4)
    c = point_covered(EXP, U, cmath.exp(1 + 1j))
    assert c.verdict == COVERED and c.winding == 1
    c = point_covered(EXP, U, cmath.exp(3 + 1j))
    assert c.verdict == NOT_COVERED and c.winding == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2), min_size=1, max_size=4),
       st.floats(0.3, 2.5))
def test_winding_counts_roots(roots, rho):
    # f(z) = prod (z - r_i); winding of f(|z| = rho) around 0 = roots inside
    inside = sum(abs(r) < rho for r in roots)
    if any(abs(abs(r) - rho) < 0.05 for r in roots):
        return
    f = Polynomial(np.poly(roots)[::-1])
    c = point_covered(f, Ball(0j, rho), 0j)
    if c.verdict == UNDECIDED:
        return
    assert c.winding == inside


def test_square_map_covers_annulus():
    f = Polynomial([0, 0, 1])
    assert region_covered(f, Annulus(1, 2), Annulus(1.5, 3.5)).verdict == COVERED
    c = region_covered(f, Annulus(1, 2), Annulus(0.5, 4.5))
    assert c.verdict == NOT_COVERED
    assert not target_has_preimage(f, Annulus(1, 2), c.witness)


def test_exp_box_against_oracle():
    U = Polygon.box(-1, 1, -4, 4)
    V = Annulus(math.exp(-0.8), math.exp(0.8))
    c = region_covered(EXP, U, V)
    ok, _ = region_has_preimages(EXP, U, V, density=6, n_starts=300)
    assert c.verdict == COVERED and ok
    assert 0 < c.margin < math.exp(0.8)


def test_exp_narrow_box_leaves_wedge():
    # height 6 < 2 pi: the image misses a wedge around the negative axis
    U = Polygon.box(-1, 1, -3, 3)
    c = region_covered(EXP, U, Annulus(math.exp(-0.5), math.exp(0.5)))
    assert c.verdict == NOT_COVERED
    assert abs(cmath.phase(c.witness)) > 3.0
    assert not target_has_preimage(EXP, U, c.witness)


def test_margin_is_distance_to_image_curve():
    f = Polynomial([0, 0, 1])
    U, V = Ball(0j, 2.0), Ball(0j, 1.0)
    c = region_covered(f, U, V)
    assert c.verdict == COVERED
    d = float(np.min(np.abs(image_boundary(f, U)[:, None] - V.grid(16)[None, :])))
    assert c.margin <= d + 1e-9


def test_grid_validation():
    with pytest.raises(DomainError):
        region_covered(EXP, Ball(0j, 1.0), Ball(1 + 0j, 0.1), grid=1)


@pytest.mark.parametrize("zero,delta,want", [(512.0, 1 / 32, NOT_COVERED), (512.0, 7 / 32, COVERED),
                                              (65536.0, 1 / 32, COVERED)])
def test_ball_expansion_around_sparse_zeros(zero, delta, want):
    f = parse_map("sparse_product")
    c = ball_expansion_check(f, zero, delta)
    assert c.verdict == want
    t = np.linspace(0, 2 * np.pi, 1 << 15, endpoint=False)
    dense = float(np.min(np.abs(f(zero + delta * zero * np.exp(1j * t)))))
    assert c.details["boundary_min"] == pytest.approx(dense, rel=1e-6)
    assert (dense > 2 * zero) == (want == COVERED)


def test_ball_expansion_needs_small_centre():
    assert ball_expansion_check(parse_map("sparse_product"), 600.0, 1 / 32).verdict == NOT_COVERED


def test_ball_expansion_bad_delta():
    with pytest.raises(DomainError):
        ball_expansion_check(EXP, 1 + 0j, 0.9)


def test_shell_expansion():
    # exp is small on the left half-plane: no circle clears modulus 2t
    assert shell_expansion_check(EXP, 2.0, 8.0).verdict == NOT_COVERED
    f = parse_map("sparse_product")
    c = shell_expansion_check(f, 40.0, 200.0, hold=Ball(100 + 0j, 20))
    assert c.verdict in (COVERED, UNDECIDED)


def test_refined_shells_cover_next_scale():
    # the first step of the fast construction at R = 32
    R = 32.0
    U = RefinedSectorShell(1, 1, R)
    V = RefinedSectorShell(1, 2, math.exp(R))
    c = certify_covering(EXP, U, V, grid=16)
    assert c.verdict == COVERED and c.margin > 0


def test_subdomain_lies_in_u_and_covers_v():
    # second step of the fast construction: scale e^32 onto scale exp(e^32)
    U = RefinedSectorShell(1, 2, math.exp(32.0))
    V = RefinedSectorShell(1, 3, LevelIndex(4, math.log(math.log(32.0))))
    sub = find_subdomain(EXP, U, V)
    with mpmath.workprec(sub.prec):
        for p in sub.points(4):
            assert U.contains_mp(p)
    c = cover_with_subdomain(EXP, U, V, grid=16, subdomain=sub)
    assert c.verdict == COVERED and c.subdomain is sub


def test_literal_parse_cover_cli_example():
    U, V = parse_region("ann:3,10"), parse_region("ann:1,10")
    assert certify_covering(EXP, U, V).verdict == COVERED
    U = parse_region("ann:1,5")
    c = certify_covering(EXP, U, V)
    assert c.verdict == NOT_COVERED
    assert not target_has_preimage(EXP, U, c.witness)
