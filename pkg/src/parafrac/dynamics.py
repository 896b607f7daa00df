"""Orbits of parabolic germs inside an attracting petal."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import AmbiguousSector, IterationCap, LeftSector
from .powerseries import Germ

TWO_PI = 2.0 * math.pi
SECTOR_TIE_TOL = 1e-12


@dataclass(frozen=True)
class AttractingDirection:
    A: complex
    nu_A: complex
    branch_index: int

    @property
    def angle(self) -> float:
        return cmath.phase(self.A) % TWO_PI


@dataclass(frozen=True)
class StopRule:
    """Stop once |z_n| < r_floor or a gap drops below gap_floor.

    Hitting ``cap`` first is an error (``IterationCap``).
    """

    r_floor: float = 0.0
    gap_floor: float = 0.0
    cap: int = 100_000_000
    escape_factor: float = 2.0


@dataclass(frozen=True, eq=False)
class Orbit:
    points: np.ndarray
    gaps: np.ndarray
    direction: AttractingDirection
    germ_ref: Germ | None
    monotone_from: int
    index_offset: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points.setflags(write=False)
        self.gaps.setflags(write=False)

    def __len__(self) -> int:
        return int(self.points.size)

    @classmethod
    def from_points(
        cls,
        points,
        direction: AttractingDirection | None = None,
        germ: Germ | None = None,
        index_offset: int = 0,
    ) -> "Orbit":
        """Wrap an explicit point sequence (synthetic orbits, tests)."""
        pts = np.array(points, dtype=np.complex128).ravel()
        gaps = np.abs(np.diff(pts))
        if direction is None:
            last = pts[-1] if pts[-1] != 0 else 1.0
            nu = last / abs(last)
            direction = AttractingDirection(complex(nu), complex(nu), 0)
        return cls(pts, gaps, direction, germ, monotone_start(gaps), index_offset)


def monotone_start(gaps: np.ndarray) -> int:
    """First index from which the gaps strictly decrease."""
    if gaps.size < 2:
        return 0
    bad = np.nonzero(np.diff(gaps) >= 0)[0]
    return int(bad[-1] + 1) if bad.size else 0


@njit(cache=True, nogil=True)
def increment(c, z):
    """f(z) - z by Horner, with c[j] the coefficient of z^(j+1)."""
    acc = 0j
    for j in range(c.shape[0] - 1, -1, -1):
        acc = acc * z + c[j]
    return acc * z


@njit(cache=True, nogil=True)
def _iterate(c, z0, r_floor, gap_floor, cap, escape):
    # status: 0 stop rule met, 1 left sector, 2 cap reached
    size = 1024
    out = np.empty(size, np.complex128)
    out[0] = z0
    n = 0
    z = z0
    r0 = abs(z0)
    while True:
        if n + 1 >= cap:
            return out[: n + 1], 2
        zn = z + increment(c, z)
        n += 1
        if n >= size:
            size *= 2
            grown = np.empty(size, np.complex128)
            grown[:n] = out[:n]
            out = grown
        out[n] = zn
        if not (abs(zn) <= escape * r0):
            return out[: n + 1], 1
        if abs(zn) < r_floor or abs(zn - z) < gap_floor:
            return out[: n + 1], 0
        z = zn


def attracting_directions(f: Germ) -> list[AttractingDirection]:
    """All k roots A of A^k = -1/(k a1), sorted by argument in [0, 2pi)."""
    k = f.k
    principal = (-k * f.a1) ** (-1.0 / k)
    roots = [principal * cmath.exp(1j * TWO_PI * j / k) for j in range(k)]
    roots.sort(key=lambda a: cmath.phase(a) % TWO_PI)
    return [AttractingDirection(complex(a), complex(a / abs(a)), i) for i, a in enumerate(roots)]


def _angular_distance(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def select_sector(f: Germ, z0: complex) -> AttractingDirection:
    """Branch closest in argument to z0; a start on a repelling ray is refused."""
    if z0 == 0:
        raise ValueError("z0 must be nonzero")
    arg0 = cmath.phase(z0) % TWO_PI
    dirs = attracting_directions(f)
    dists = [_angular_distance(arg0, d.angle) for d in dirs]
    best = min(range(len(dirs)), key=dists.__getitem__)
    # the repelling rays sit halfway between neighbouring attracting ones
    if abs(dists[best] - math.pi / f.k) < SECTOR_TIE_TOL:
        raise AmbiguousSector(f"z0={z0} lies on a repelling direction")
    return dirs[best]


def iterate_orbit(f: Germ, z0: complex, stop: StopRule) -> Orbit:
    if stop.r_floor <= 0 and stop.gap_floor <= 0:
        raise ValueError("stop rule needs a positive r_floor or gap_floor")
    direction = select_sector(f, z0)
    c = np.ascontiguousarray(f.increment_coeffs())
    pts, status = _iterate(c, complex(z0), stop.r_floor, stop.gap_floor, stop.cap, stop.escape_factor)
    if status == 1:
        raise LeftSector(f"orbit from {z0} left radius {stop.escape_factor * abs(z0):.3g} at n={pts.size - 1}")
    if status == 2:
        raise IterationCap(f"stop rule not met within {stop.cap} iterations")
    pts = pts.copy()
    gaps = np.abs(np.diff(pts))
    return Orbit(pts, gaps, direction, f, monotone_start(gaps))


def continue_orbit(f: Germ, z: complex, steps: int) -> complex:
    """Point reached after ``steps`` further iterations, nothing stored."""
    c = np.ascontiguousarray(f.increment_coeffs())
    return complex(_advance(c, complex(z), int(steps)))


@njit(cache=True, nogil=True)
def _advance(c, z, steps):
    for _ in range(steps):
        z = z + increment(c, z)
    return z


def default_initial_point(f: Germ, branch: int = 0, start: float = 0.3, probe: int = 10_000) -> complex:
    """0.3 along the chosen attracting direction, halved until the orbit is attracted."""
    direction = attracting_directions(f)[branch]
    c = np.ascontiguousarray(f.increment_coeffs())
    r = start
    for _ in range(60):
        z0 = r * direction.nu_A
        pts, status = _iterate(c, z0, 0.5 * r, 0.0, probe, 2.0)
        if status == 0:
            return complex(z0)
        r *= 0.5
    raise LeftSector("no attracted starting point found along the attracting direction")


def zn_leading_check(orbit: Orbit) -> float:
    """|z_n n^(1/k) / A - 1| at the last stored index."""
    if len(orbit) < 10_000:
        raise ValueError("leading-term check needs at least 1e4 points")
    k = orbit.germ_ref.k if orbit.germ_ref is not None else None
    if k is None:
        k = orbit.meta.get("k")
    if k is None:
        raise ValueError("orbit carries neither a germ nor k in its metadata")
    n = len(orbit) - 1 + orbit.index_offset
    return abs(orbit.points[-1] * n ** (1.0 / k) / orbit.direction.A - 1.0)
