from __future__ import annotations

import math

import numpy as np
import pytest

from parafrac.asymptotics import closed_form_K1, closed_form_Kk1
from parafrac.dynamics import attracting_directions
from parafrac.errors import AmbiguousK, DegenerateImaginaryPart
from parafrac.powerseries import Germ, TruncatedSeries, conjugate
from parafrac.recovery import (
    EpsGrid,
    analyze,
    default_grid,
    has_intermediate_terms,
    pull_back,
    recover_a,
    recover_a1,
    recover_a1_modulus,
    recover_k,
    verify_invariance,
)


def test_recover_k():
    assert recover_k(0.5) == 1
    assert recover_k(2 / 3) == 2
    assert recover_k(0.8) == 4
    for bad in (0.58, 0.2, 0.995):
        with pytest.raises(AmbiguousK):
            recover_k(bad)


def test_recover_a1_example():
    M_c = closed_form_K1(1, 1, -1)
    assert abs(recover_a1(1, M_c, abs(M_c)) - 1) < 1e-10


@pytest.mark.parametrize("k", range(1, 7))
def test_recover_a1_round_trip(k, rng):
    for _ in range(20):
        a1 = complex(*rng.normal(size=2)) * 2
        for d in attracting_directions(Germ.normal_form(k, a1, 0)):
            M_c = closed_form_K1(k, a1, d.nu_A)
            assert abs(recover_a1(k, M_c, abs(M_c)) / a1 - 1) < 1e-10
            assert math.isclose(recover_a1_modulus(k, abs(M_c)), abs(a1), rel_tol=1e-10)


def test_recover_a_examples():
    for k in (1, 2, 4):
        nu = attracting_directions(Germ.normal_form(k, 1, 0))[0].nu_A
        M_c = closed_form_K1(k, 1, nu)
        got = recover_a(k, M_c, abs(M_c), 0j, imag_fallback=0.0)
        assert abs(got - (k + 1) / 2) < 1e-14
    nu = attracting_directions(Germ.normal_form(2, 1, 0))[0].nu_A
    M_c = closed_form_K1(2, 1, nu)
    R_c = closed_form_Kk1(2, 1, 3 + 4j, nu)
    assert abs(recover_a(2, M_c, abs(M_c), R_c) - (3 + 4j)) < 1e-8
    with pytest.raises(DegenerateImaginaryPart):
        recover_a(1, M_c, abs(M_c), R_c)
    M_c = closed_form_K1(1, 1, -1)
    assert recover_a(1, M_c, abs(M_c), closed_form_Kk1(1, 1, 0.7, -1), imag_fallback=0.3) == pytest.approx(0.7 + 0.3j)


def test_intermediate_terms():
    assert not has_intermediate_terms(Germ.normal_form(3, 1, 1))
    assert has_intermediate_terms(Germ.from_coeffs([1, 0, 1, 1, 0.5], order=10))
    assert not has_intermediate_terms(Germ.from_coeffs([1, 1, 1]))


def test_grids():
    g = default_grid(3)
    v = g.values()
    assert len(v) == 64 and math.isclose(v[0], 1e-8) and math.isclose(v[-1], 1e-6)
    with pytest.raises(ValueError):
        default_grid(0)
    with pytest.raises(ValueError):
        EpsGrid(1e-3, 1e-4).values()
    with pytest.raises(ValueError):
        EpsGrid(1e-4, 1e-3, 5).values()


def test_pull_back():
    phi = TruncatedSeries.from_terms({1: 1, 2: 0.5, 3: 0.25j}, 8)
    w = pull_back(phi, 0.01 - 0.02j)
    assert abs(complex(phi(w)) - (0.01 - 0.02j)) < 1e-17


@pytest.mark.parametrize("coeffs,z0,a1,re_a", [([1, 1, 1], -0.4, 1, 1), ([1, 2], -0.3, 2, 0)])
def test_analyze_examples(coeffs, z0, a1, re_a):
    f = Germ.from_coeffs(coeffs, order=8)
    rep = analyze(f, z0)
    inv = rep.fractal_invariants
    assert rep.k == 1 and not rep.degraded
    assert abs(inv.a1 - a1) < 0.02 * abs(a1)
    assert abs(inv.a.real - re_a) < 0.1
    assert abs(rep.dim_B - 0.5) < 0.02
    assert len(rep.measurements) == 64
    d = rep.to_dict()
    assert d["invariants"]["series_oracle"]["a1"] == [a1, 0.0]


def test_germ_with_intermediate_terms_is_flagged():
    # the eps^2 log eps coefficient picks up z0-dependent cross terms here
    f = Germ.from_coeffs([1, 0, 1, 1, 0.5 + 0.5j], order=10)
    rep = analyze(f, 0.3j)
    assert rep.k == 2 and rep.degraded
    assert any("order k+2..2k" in w for w in rep.warnings)
    assert abs(rep.fractal_invariants.a1 - 1) < 0.02
    assert not rep.fit.reduced


def test_conjugator_with_z_k_term_moves_residual_content():
    # z + c z^2 adds c A^2 / n to z_n for k = 2; its tail sum is logarithmic
    g0 = Germ.normal_form(2, 1, 1 + 1j)
    base = analyze(g0, 0.3j, basis="full")
    phi = TruncatedSeries.from_terms({1: 1, 2: 0.5}, g0.order)
    g = conjugate(g0, phi)
    rep = analyze(g, pull_back(phi, 0.3j), basis="full")
    assert abs(rep.fractal.M_c / base.fractal.M_c - 1) < 0.02
    assert abs(rep.fractal.R_c - base.fractal.R_c) > 0.5


def test_identity_conjugator_agrees_exactly():
    f = Germ.from_coeffs([1, 1], order=8)
    rep = verify_invariance(f, [TruncatedSeries.identity(8)], z0=-0.3, scale=None)
    dev = rep.entries[0]["deviations"]
    assert dev["dim_B"] == 0 and dev["M_c_relative"] == 0 and dev["R_c_relative"] == 0
    assert rep.passed
    with pytest.raises(ValueError):
        verify_invariance(f, [TruncatedSeries.from_terms({1: 2}, 8)], z0=-0.3)
