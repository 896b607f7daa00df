"""Asymptotic scale of the directed area, least-squares fits and closed forms."""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    Degenerate,
    IllConditioned,
    InsufficientSamples,
    OutOfRange,
    RequiresNormalForm,
)

SQRT_PI = math.sqrt(math.pi)
CONDITION_LIMIT = 1e10


def gamma(x: float) -> float:
    if not x > 0:
        raise OutOfRange(f"gamma is only provided for x > 0, got {x}")
    return math.gamma(x)


@dataclass(frozen=True)
class ScaleBasis:
    """Gauge functions eps^p (log eps)^l in order of decreasing size.

    The first k+3 terms are the development up to eps^2 log eps plus an eps^2
    nuisance term.  ``corrections`` appends pairs eps^(2+j/(k+1)) log eps,
    eps^(2+j/(k+1)) for j = 1..corrections to absorb the next orders.

    ``reduced`` drops K2..Kk and the log partner of the eps^(1+k/(k+1)) term.
    Those coefficients vanish identically when the germ has no terms of order
    k+2..2k, and fitting them anyway costs most of the accuracy of K_{k+1}.
    """

    k: int
    corrections: int = 0
    reduced: bool = False
    terms: tuple = field(init=False)
    names: tuple = field(init=False)

    def __post_init__(self):
        k = self.k
        if k < 1:
            raise ValueError("k must be a positive integer")
        p_s = 1 + k / (k + 1)
        if self.reduced:
            t = [(1 + 1 / (k + 1), 0)] if k > 1 else []
            n = ["K1"] if k > 1 else []
            t += [(p_s, 0)]
            # for k = 1 the start-point term shares the power 3/2 with K1
            n += ["K1" if k == 1 else "S"]
        else:
            t = [(1 + i / (k + 1), 0) for i in range(1, k)] + [(p_s, 1), (p_s, 0)]
            n = [f"K{i}" for i in range(1, k)] + [f"K{k}", "S"]
            if k == 1:
                n = ["K1_log", "K1"]
        t += [(2.0, 1), (2.0, 0)]
        n += [f"K{k + 1}", "N2"]
        for j in range(1, self.corrections + 1):
            t += [(2 + j / (k + 1), 1), (2 + j / (k + 1), 0)]
            n += [f"C{j}_log", f"C{j}"]
        object.__setattr__(self, "terms", tuple(t))
        object.__setattr__(self, "names", tuple(n))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def leading_index(self) -> int:
        return self.names.index("K1")

    @property
    def residual_index(self) -> int:
        return self.names.index(f"K{self.k + 1}")

    def evaluate(self, eps) -> np.ndarray:
        e = np.asarray(eps, dtype=float)
        if np.any(e <= 0) or np.any(e >= 1):
            raise OutOfRange("the scale is defined for 0 < eps < 1")
        le = np.log(e)
        return np.stack([e**p * (le if l else 1.0) for p, l in self.terms], axis=-1)


def scale_basis(k: int, eps: float, corrections: int = 0, reduced: bool = False) -> np.ndarray:
    return ScaleBasis(k, corrections, reduced).evaluate(eps)


def estimate_box_dimension(samples: Iterable[tuple[float, float]]) -> float:
    """2 minus the OLS slope of log(area) against log(eps)."""
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 8:
        raise InsufficientSamples("need at least 8 (eps, area) samples")
    eps, area = arr[:, 0], arr[:, 1]
    if np.any(eps <= 0) or np.any(area <= 0):
        raise OutOfRange("eps and area must be positive")
    if math.log10(eps.max() / eps.min()) < 1.0 - 1e-9:
        raise InsufficientSamples("samples must span at least one decade of eps")
    slope = np.polyfit(np.log(eps), np.log(area), 1)[0]
    return float(2.0 - slope)


@dataclass(frozen=True)
class AsymptoticFit:
    k: int
    coefficients: np.ndarray
    names: tuple
    residual_norm: float
    condition_number: float
    eps_range: tuple
    sample_count: int
    corrections: int = 0
    spread: np.ndarray | None = None
    reduced: bool = False

    def __getitem__(self, name: str) -> complex:
        return complex(self.coefficients[self.names.index(name)])

    @property
    def K1(self) -> complex:
        return self["K1"]

    @property
    def Kk1(self) -> complex:
        """Coefficient of eps^2 log eps."""
        return self[f"K{self.k + 1}"]

    @property
    def S(self) -> complex:
        """Start-point coefficient; shares its power with K1 when k = 1."""
        if "S" not in self.names:
            return complex("nan")
        return self["S"]

    def uncertainty(self, name: str) -> float:
        if self.spread is None:
            return float("nan")
        return float(self.spread[self.names.index(name)])

    def to_dict(self) -> dict:
        out = {
            "k": self.k,
            "coefficients": {n: [c.real, c.imag] for n, c in zip(self.names, self.coefficients)},
            "residual_norm": self.residual_norm,
            "condition_number": self.condition_number,
            "eps_range": list(self.eps_range),
            "sample_count": self.sample_count,
            "corrections": self.corrections,
            "reduced": self.reduced,
        }
        if self.spread is not None:
            out["spread"] = dict(zip(self.names, map(float, self.spread)))
        return out


def _solve(eps: np.ndarray, values: np.ndarray, basis: ScaleBasis):
    X = basis.evaluate(eps)
    w = eps ** (1 + 1 / (basis.k + 1))
    Xs = X / w[:, None]
    ys = values / w
    norms = np.linalg.norm(Xs, axis=0)
    A = Xs / norms
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ coef
    return coef / norms, float(np.linalg.norm(resid)), cond


def fit_directed_area(samples: Iterable[tuple[float, complex]], k: int, corrections: int = 0,
                      subrange: float | None = 0.75, reduced: bool = False) -> AsymptoticFit:
    """Complex least squares on the scale, in variables scaled by eps^(1+1/(k+1)).

    With ``subrange`` set, the fit is repeated on that fraction of the samples
    with the smallest eps and the coefficient change is kept as ``spread``.
    """
    data = sorted(samples, key=lambda s: s[0])
    basis = ScaleBasis(k, corrections, reduced)
    if len(data) < 2 * len(basis):
        raise InsufficientSamples(f"need at least {2 * len(basis)} samples for {len(basis)} terms")
    eps = np.array([s[0] for s in data], dtype=float)
    vals = np.array([complex(s[1]) for s in data], dtype=np.complex128)
    coef, resid, cond = _solve(eps, vals, basis)
    if cond > CONDITION_LIMIT:
        raise IllConditioned(f"condition number {cond:.3g} above {CONDITION_LIMIT:.0e}")
    spread = None
    if subrange is not None:
        m = int(round(subrange * len(data)))
        if m >= 2 * len(basis):
            sub, _, _ = _solve(eps[:m], vals[:m], basis)
            spread = np.abs(sub - coef)
    return AsymptoticFit(
        k=k,
        coefficients=coef,
        names=tuple(basis.names),
        residual_norm=resid,
        condition_number=cond,
        eps_range=(float(eps[0]), float(eps[-1])),
        sample_count=len(data),
        corrections=corrections,
        spread=spread,
        reduced=reduced,
    )


# closed forms

def _x(k: int) -> float:
    return 1.0 / (2 * k + 2)


def minkowski_constant(k: int) -> float:
    """(k+1)/k sqrt(pi) Gamma(1+x)/Gamma(3/2+x), x = 1/(2k+2)."""
    x = _x(k)
    return (k + 1) / k * SQRT_PI * gamma(1 + x) / gamma(1.5 + x)


def phi_k(k: int) -> float:
    """The Im(a) conversion factor in its stated form (pole at k = 1)."""
    if k == 1:
        raise Degenerate("phi(k) has a pole at k = 1")
    if k < 1:
        raise ValueError("k must be a positive integer")
    x = _x(k)
    y = 1.0 / (k + 1)
    num = gamma(y) / gamma(1.5 + y) + SQRT_PI
    den = gamma(0.5 + x) / gamma(2 + x) - SQRT_PI
    return k * (k + 1) / (k - 1) / SQRT_PI * num / den * gamma(1 + x) / gamma(1.5 + x)


def stated_imaginary_factor(k: int, a1: complex) -> float:
    """Factor of i*Im(w) in the coefficient of eps^2 log eps, as stated with phi(k)."""
    x = _x(k)
    y = 1.0 / (k + 1)
    q = (gamma(0.5 + x) / gamma(2 + x) - SQRT_PI) / (gamma(y) / gamma(1.5 + y) + SQRT_PI)
    return 2 * (k - 1) / (k + 1) * (abs(a1) / 2) ** y * q


def imaginary_residual_factor(k: int) -> float:
    """Factor rho(k) with Im(K_{k+1}/nu_A) = rho(k) Im(a) for normal-form germs.

    rho(k) = 8 sqrt(pi) (k-1) Gamma(3/2 + 1/(k+1)) / (k (k+1) Gamma(3 + 1/(k+1))).
    Independent of a1, vanishes at k = 1.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    y = 1.0 / (k + 1)
    return 8 * SQRT_PI * (k - 1) * gamma(1.5 + y) / (k * (k + 1) * gamma(3 + y))


def closed_form_K1(k: int, a1: complex, nu_A: complex) -> complex:
    if a1 == 0:
        raise ValueError("a1 must be nonzero")
    if abs(abs(nu_A) - 1) > 1e-9:
        raise ValueError("nu_A must have unit modulus")
    return minkowski_constant(k) * (2 / abs(a1)) ** (1 / (k + 1)) * nu_A


def closed_form_Kk1(k: int, a1: complex, a_k1: complex, nu_A: complex,
                    intermediate: Sequence[complex] = (), convention: str = "derived") -> complex:
    """Coefficient of eps^2 log eps for z + a1 z^(k+1) + a_k1 z^(2k+1).

    ``intermediate`` holds the coefficients of z^(k+2)..z^(2k); they must vanish.
    ``convention="stated"`` uses the a1-dependent imaginary factor as stated
    alongside phi(k) instead of rho(k); kept for comparison only.
    """
    if any(abs(c) > 0 for c in intermediate):
        raise RequiresNormalForm("closed form needs vanishing coefficients between orders k+2 and 2k")
    if a1 == 0:
        raise ValueError("a1 must be nonzero")
    w = a_k1 / a1**2 - (k + 1) / 2
    if convention == "derived":
        im_factor = imaginary_residual_factor(k)
    elif convention == "stated":
        im_factor = stated_imaginary_factor(k, a1)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return nu_A * (-math.pi / (k + 1) * w.real + 1j * im_factor * w.imag)


def unit(z: complex) -> complex:
    r = abs(z)
    if r == 0:
        raise ValueError("zero has no direction")
    return z / r


def phase_difference(a: complex, b: complex) -> float:
    return abs(cmath.phase(a / b))


def warn_if_poor(fit: AsymptoticFit, limit: float = 1e8) -> bool:
    if fit.condition_number > limit:
        warnings.warn(f"fit condition number {fit.condition_number:.3g}", RuntimeWarning, stacklevel=2)
        return True
    return False
