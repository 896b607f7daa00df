from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from parafrac.dynamics import (
    AttractingDirection,
    Orbit,
    StopRule,
    attracting_directions,
    continue_orbit,
    default_initial_point,
    iterate_orbit,
    select_sector,
    zn_leading_check,
)
from parafrac.errors import AmbiguousSector, IterationCap, LeftSector
from parafrac.powerseries import Germ, TruncatedSeries, conjugate

ZZ2 = Germ.from_coeffs([1, 1], order=8)
ZZ3 = Germ.from_coeffs([1, 0, 1], order=10)


def test_directions_k1():
    (d,) = attracting_directions(ZZ2)
    assert d.nu_A == -1
    (d,) = attracting_directions(Germ.from_coeffs([1, -1], order=8))
    assert abs(d.nu_A - 1) < 1e-15


def test_directions_k2():
    dirs = attracting_directions(ZZ3)
    assert [round(d.angle, 12) for d in dirs] == [round(math.pi / 2, 12), round(3 * math.pi / 2, 12)]
    for d in dirs:
        assert abs(abs(d.A) - 2**-0.5) < 1e-15
        assert abs(d.A**2 * -2 - 1) < 1e-14


@pytest.mark.parametrize("k,a1", [(1, 2 - 1j), (3, 0.5j), (5, -1 + 2j)])
def test_directions_solve_defining_equation(k, a1):
    f = Germ.normal_form(k, a1, 0)
    dirs = attracting_directions(f)
    assert len(dirs) == k
    for d in dirs:
        assert abs(-k * a1 * d.A**k - 1) < 1e-12
    angles = [d.angle for d in dirs]
    assert angles == sorted(angles)


def test_select_sector():
    assert select_sector(ZZ2, -0.5).nu_A == -1
    assert abs(select_sector(ZZ3, 0.1j).nu_A - 1j) < 1e-15
    with pytest.raises(AmbiguousSector):
        select_sector(ZZ2, 0.5)
    with pytest.raises(LeftSector):
        iterate_orbit(ZZ2, 0.5 + 0.01j, StopRule(r_floor=1e-3))


def test_hand_iteration():
    orbit = iterate_orbit(ZZ2, -0.5, StopRule(r_floor=0.14))
    assert orbit.points[1] == -0.25
    assert orbit.points[2] == -0.1875
    assert orbit.points[3] == -0.15234375
    assert orbit.gaps[0] == 0.25 and orbit.gaps[1] == 0.0625
    assert abs(orbit.gaps[2] - 0.03515625) < 1e-17


def test_stop_rules():
    orbit = iterate_orbit(ZZ2, -0.5, StopRule(r_floor=1e-3))
    assert abs(orbit.points[-1]) < 1e-3 <= abs(orbit.points[-2])
    with pytest.raises(IterationCap):
        iterate_orbit(ZZ2, -0.5, StopRule(r_floor=1e-9, cap=100))
    with pytest.raises(ValueError):
        iterate_orbit(ZZ2, -0.5, StopRule())


@pytest.mark.parametrize("f,z0", [(ZZ2, -0.5), (ZZ3, 0.1j), (Germ.normal_form(2, 1, 1 + 1j), 0.3j),
                                  (Germ.normal_form(3, 1, 0), None)])
def test_orbit_leading_term(f, z0):
    if z0 is None:
        z0 = default_initial_point(f)
    n = 1_000_000
    z = continue_orbit(f, z0, n)
    A = select_sector(f, z0).A
    assert abs(z * n ** (1 / f.k) / A - 1) < 0.05
    assert abs(cmath.phase(z / A)) < 0.05


def test_zn_leading_check_on_orbit():
    orbit = iterate_orbit(ZZ2, -0.5, StopRule(r_floor=0.99e-6))
    assert len(orbit) >= 1_000_000
    assert zn_leading_check(orbit) < 0.05
    orbit = iterate_orbit(ZZ3, 0.1j, StopRule(r_floor=7.0e-4))
    assert len(orbit) >= 1_000_000
    assert zn_leading_check(orbit) < 0.05


def test_zn_leading_check_synthetic():
    A = 1j * 2**-0.5
    n = np.arange(1, 20_001)
    orbit = Orbit.from_points(A * n**-0.5, direction=AttractingDirection(A, 1j, 0), index_offset=1)
    orbit.meta["k"] = 2
    assert zn_leading_check(orbit) < 1e-12


@pytest.mark.parametrize("f,z0", [(ZZ2, -0.5), (ZZ3, 0.2j), (Germ.normal_form(3, 1, 1 + 1j), None)])
def test_gaps_eventually_monotone(f, z0):
    if z0 is None:
        z0 = default_initial_point(f)
    orbit = iterate_orbit(f, z0, StopRule(r_floor=abs(z0) / 50))
    m = orbit.monotone_from
    assert m < len(orbit.gaps)
    assert np.all(np.diff(orbit.gaps[m:]) < 0)


def test_conjugated_orbit_is_pulled_back_orbit():
    # high truncation so the truncated conjugate equals phi^-1 o f o phi to round-off
    f = Germ.from_coeffs([1, 1, 0.5], order=40)
    phi = TruncatedSeries.from_terms({1: 1, 2: 0.5, 3: -0.2j}, 40)
    g = conjugate(f, phi)
    z0 = -0.05
    w = z0
    for _ in range(60):
        w = w - (complex(phi(w)) - z0) / complex(1 + 2 * 0.5 * w - 3 * 0.2j * w * w)
    orbit_f = iterate_orbit(f, z0, StopRule(r_floor=1e-3))
    orbit_g = iterate_orbit(g, w, StopRule(r_floor=1e-3))
    n = min(len(orbit_f), len(orbit_g))
    mapped = phi(orbit_g.points[:n])
    assert np.max(np.abs(mapped - orbit_f.points[:n])) < 1e-9
