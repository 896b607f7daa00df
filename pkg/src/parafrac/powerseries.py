"""Truncated complex power series without constant term.

Series are stored as numpy arrays ``c`` where ``c[j]`` is the coefficient of
``z**(j + 1)``.  All operations are exact through the truncation order and
discard everything beyond it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientOrder, NotInvertible, NotParabolic

REL_TOL = 1e-12


def _as_coeffs(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128).ravel()
    if arr.size == 0:
        raise ValueError("a truncated series needs at least one coefficient")
    return arr.copy()


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """c_1 z + c_2 z^2 + ... + c_N z^N."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        self.coeffs.setflags(write=False)

    @property
    def order(self) -> int:
        return int(self.coeffs.size)

    def __getitem__(self, power: int) -> complex:
        """Coefficient of z**power (zero outside 1..N)."""
        if 1 <= power <= self.order:
            return complex(self.coeffs[power - 1])
        return 0j

    @classmethod
    def identity(cls, order: int) -> "TruncatedSeries":
        c = np.zeros(order, np.complex128)
        c[0] = 1.0
        return cls(c)

    @classmethod
    def from_terms(cls, terms: dict[int, complex], order: int) -> "TruncatedSeries":
        """Build from a {power: coefficient} mapping; powers above order are dropped."""
        c = np.zeros(order, np.complex128)
        for p, v in terms.items():
            if p < 1:
                raise ValueError("series carry no constant or negative powers")
            if p <= order:
                c[p - 1] += v
        return cls(c)

    def truncate(self, order: int) -> "TruncatedSeries":
        c = np.zeros(order, np.complex128)
        m = min(order, self.order)
        c[:m] = self.coeffs[:m]
        return TruncatedSeries(c)

    def __call__(self, z):
        acc = np.zeros_like(np.asarray(z, dtype=np.complex128))
        for c in self.coeffs[::-1]:
            acc = (acc + c) * z
        return acc

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order, other.order)
        return TruncatedSeries(self.coeffs[:n] + other.coeffs[:n])

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order, other.order)
        return TruncatedSeries(self.coeffs[:n] - other.coeffs[:n])

    def scale(self, s: complex) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs * s)

    def allclose(self, other: "TruncatedSeries", rtol: float = REL_TOL) -> bool:
        n = min(self.order, other.order)
        a, b = self.coeffs[:n], other.coeffs[:n]
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return bool(np.all(np.abs(a - b) <= rtol * scale))

    def __repr__(self) -> str:
        terms = [f"({c:.6g})z^{j + 1}" for j, c in enumerate(self.coeffs) if c != 0]
        return f"TruncatedSeries({' + '.join(terms) or '0'}; N={self.order})"


def _common_order(*series: TruncatedSeries) -> int:
    orders = {s.order for s in series}
    if len(orders) != 1:
        raise ValueError(f"series truncated at different orders: {sorted(orders)}")
    return orders.pop()


def mul(s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    n = _common_order(s, t)
    full = np.convolve(s.coeffs, t.coeffs)
    # index j of full is the coefficient of z^(j+2)
    out = np.zeros(n, np.complex128)
    m = min(n - 1, full.size)
    out[1 : 1 + m] = full[:m]
    return TruncatedSeries(out)


def compose(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """f(g(z)) through the common truncation order."""
    n = _common_order(f, g)
    acc = f.coeffs[0] * g.coeffs
    power = g
    for j in range(2, n + 1):
        power = mul(power, g)
        if f.coeffs[j - 1] != 0:
            acc = acc + f.coeffs[j - 1] * power.coeffs
    return TruncatedSeries(acc)


def comp_inverse(phi: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse, solved one order at a time."""
    c1 = phi[1]
    if abs(c1) == 0.0:
        raise NotInvertible("linear coefficient vanishes")
    n = phi.order
    r = np.zeros(n, np.complex128)
    r[0] = 1.0 / c1
    for m in range(2, n + 1):
        # with r_m = 0 the z^m coefficient of phi(r) is c1*r_m + (known part)
        known = compose(phi, TruncatedSeries(r))[m]
        r[m - 1] = -known / c1
    return TruncatedSeries(r)


def reciprocal_unit(u: np.ndarray, order: int) -> np.ndarray:
    """Coefficients b_0..b_order of 1/(1 + u_1 x + u_2 x^2 + ...)."""
    b = np.zeros(order + 1, np.complex128)
    b[0] = 1.0
    for m in range(1, order + 1):
        s = 0j
        for j in range(1, min(m, u.size) + 1):
            s += u[j - 1] * b[m - j]
        b[m] = -s
    return b


@dataclass(frozen=True, eq=False)
class Germ:
    """Parabolic germ z + a1 z^(k+1) + ... given by its truncated series."""

    series: TruncatedSeries
    k: int = field(init=False)
    a1: complex = field(init=False)

    def __post_init__(self):
        s = self.series
        if abs(s[1] - 1.0) > REL_TOL:
            raise NotParabolic(f"multiplier {s[1]} is not 1")
        scale = max(1.0, float(np.max(np.abs(s.coeffs))))
        k = None
        for p in range(2, s.order + 1):
            if abs(s[p]) > REL_TOL * scale:
                k = p - 1
                break
        if k is None:
            raise NotParabolic("germ is the identity up to its truncation order")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "a1", s[k + 1])

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[complex], order: int | None = None) -> "Germ":
        """From c_1..c_m (c_1 must be 1); zero-padded to ``order`` if given."""
        c = _as_coeffs(coeffs)
        if order is not None:
            c = TruncatedSeries(c).truncate(order).coeffs
        return cls(TruncatedSeries(c))

    @classmethod
    def normal_form(cls, k: int, a1: complex, a: complex, order: int | None = None) -> "Germ":
        """z + a1 z^(k+1) + a1^2 a z^(2k+1), truncated at 2k+6 by default."""
        n = order if order is not None else 2 * k + 6
        return cls(TruncatedSeries.from_terms({1: 1.0, k + 1: a1, 2 * k + 1: a1 * a1 * a}, n))

    @property
    def order(self) -> int:
        return self.series.order

    def increment_coeffs(self) -> np.ndarray:
        """Coefficients of f(z) - z, same indexing as the series."""
        c = self.series.coeffs.copy()
        c[0] -= 1.0
        return c

    def __call__(self, z):
        return self.series(z)

    def __repr__(self) -> str:
        return f"Germ(k={self.k}, a1={self.a1:.6g}, {self.series!r})"


@dataclass(frozen=True)
class FormalInvariants:
    """Extended formal type (k, a1, a) plus where it came from."""

    k: int
    a1: complex
    a: complex
    source: str = "series_oracle"
    uncertainty: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "k": self.k,
            "a1": [self.a1.real, self.a1.imag],
            "a": [self.a.real, self.a.imag],
            "source": self.source,
        }
        if self.uncertainty is not None:
            out["uncertainty"] = dict(self.uncertainty)
        return out


def _clean_low_orders(series: TruncatedSeries) -> TruncatedSeries:
    # rounding noise in c_2.. below the leading term must not shift k
    c = series.coeffs.copy()
    scale = max(1.0, float(np.max(np.abs(c))))
    for j in range(1, c.size):
        if abs(c[j]) > 1e-9 * scale:
            break
        c[j] = 0.0
    return TruncatedSeries(c)


def conjugate(f: Germ, phi: TruncatedSeries) -> Germ:
    """phi^{-1} o f o phi; a shorter phi is read as a polynomial and padded."""
    n = f.order
    if phi.order > n:
        raise ValueError(f"conjugator order {phi.order} exceeds germ order {n}")
    phi = phi.truncate(n)
    if phi[1] == 0:
        raise NotInvertible("linear coefficient of the conjugator vanishes")
    # solve phi o g = f o phi order by order; forming phi^-1 first loses
    # digits to its fast-growing coefficients
    rhs = compose(f.series, phi).coeffs
    c = np.zeros(n, np.complex128)
    for m in range(1, n + 1):
        known = compose(phi, TruncatedSeries(c))[m]
        c[m - 1] = (rhs[m - 1] - known) / phi[1]
    c[0] = 1.0 if abs(c[0] - 1.0) < 1e-9 else c[0]
    return Germ(_clean_low_orders(TruncatedSeries(c)).truncate(n))


def residual_index(f: Germ) -> complex:
    """Residue at 0 of 1/(f(z) - z).

    Note the sign: for z + z^2 + a z^3 this is -a.
    """
    k, a1 = f.k, f.a1
    if f.order < 2 * k + 1:
        raise InsufficientOrder(f"need order >= {2 * k + 1}, have {f.order}")
    if a1 == 0:
        raise NotParabolic("leading coefficient vanishes")
    # f - z = a1 z^(k+1) (1 + u), u_j = c_{k+1+j}/a1
    u = np.array([f.series[k + 1 + j] / a1 for j in range(1, k + 1)], np.complex128)
    b = reciprocal_unit(u, k)
    return complex(b[k] / a1)


def extended_normal_form(f: Germ) -> FormalInvariants:
    """Kill orders k+2..2k by z + c z^l conjugations, then read off a."""
    k, a1 = f.k, f.a1
    if f.order < 2 * k + 1:
        raise InsufficientOrder(f"need order >= {2 * k + 1}, have {f.order}")
    g = f
    n = f.order
    for l in range(2, k + 1):
        target = k + l
        v0 = g.series[target]
        if v0 == 0:
            continue
        # z + c z^l shifts the order-(k+l) coefficient by a1*c*(k+1-l)
        c = -v0 / (a1 * (k + 1 - l))
        phi = TruncatedSeries.from_terms({1: 1.0, l: c}, n)
        g = conjugate(g, phi)
        left = g.series[target]
        if abs(left) > 1e-9 * max(1.0, abs(v0)):
            raise ArithmeticError(f"order {target} not eliminated: {left}")
    a = g.series[2 * k + 1] / (a1 * a1)
    return FormalInvariants(k=k, a1=complex(a1), a=complex(a), source="series_oracle")
