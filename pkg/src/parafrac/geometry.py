"""Area, centroid and directed area of the epsilon-neighborhood of an orbit.

The neighborhood splits at the critical index n_eps into a tail of disjoint
discs (points z_0..z_{n_eps-1}) and a nucleus: the full disc at z_{n_eps}
followed by one crescent per later point, each relative to its predecessor.

Stored orbit points are summed exactly.  Past the last stored point the orbit
is streamed: only power sums of the gaps are kept and the crescent area is
replaced by its odd Taylor series.  Once the streamed orbit is close enough to
0 the remainder is closed along the trajectory of the germ's vector field
through the last point, written as the chord to 0 plus a bending correction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp

from .dynamics import Orbit, increment
from .errors import BudgetUnreachable, OrbitTooShort, OutOfRange

DEFAULT_THETA = 0.05
DEFAULT_BUDGET = 1e-3
HALF_PI = 0.5 * math.pi


# crescent primitives

def _h(t: float) -> float:
    return t * math.sqrt(max(0.0, 1.0 - t * t)) + math.asin(min(1.0, t))


def crescent_area(d: float, eps: float) -> float:
    """Area of D(z, eps) minus D(w, eps) for |z - w| = d."""
    if eps <= 0:
        raise OutOfRange("eps must be positive")
    if d < 0 or d > 2 * eps:
        raise OutOfRange(f"gap {d} outside [0, 2 eps] for eps={eps}")
    return 2.0 * eps * eps * _h(d / (2.0 * eps))


def crescent_moment(z: complex, w: complex, eps: float) -> complex:
    """First moment (area times centroid) of D(z, eps) minus D(w, eps)."""
    d = abs(z - w)
    if eps <= 0 or d > 2 * eps:
        raise OutOfRange(f"gap {d} outside [0, 2 eps] for eps={eps}")
    h = _h(d / (2.0 * eps))
    return eps * eps * (h * (z + w) - HALF_PI * (w - z))


def crescent_centroid(z: complex, w: complex, eps: float) -> complex:
    d = abs(z - w)
    if eps <= 0 or d <= 0 or d > 2 * eps:
        raise OutOfRange(f"gap {d} outside (0, 2 eps] for eps={eps}")
    t = d / (2.0 * eps)
    bracket = t * math.sqrt(max(0.0, 1.0 - t * t)) - math.asin(math.sqrt(max(0.0, 1.0 - t * t)))
    return z + eps * eps * (w - z) * bracket / crescent_area(d, eps)


def critical_index(orbit: Orbit, eps: float) -> int:
    """Unique n with d_n < 2 eps <= d_{n-1}, searched in the monotone range."""
    gaps = orbit.gaps
    if gaps.size == 0:
        raise OrbitTooShort("orbit has a single point")
    if eps >= gaps[0] / 2:
        return 0
    m = orbit.monotone_from
    tail = gaps[m:]
    # tail is strictly decreasing; count entries >= 2 eps
    n = m + int(np.searchsorted(-tail, -2.0 * eps, side="right"))
    if n >= gaps.size and orbit.germ_ref is not None:
        raise OrbitTooShort(f"no gap below 2*eps={2 * eps:.3g} among {gaps.size} gaps")
    # a finite point set with no small gap is all tail except its last disc
    return n


def tail_area(n_eps: int, eps: float) -> float:
    return n_eps * math.pi * eps * eps


# compensated kernels

@njit(cache=True, nogil=True)
def _compensated_cumsum(z):
    out = np.empty(z.shape[0] + 1, np.complex128)
    sr = 0.0
    cr = 0.0
    si = 0.0
    ci = 0.0
    out[0] = 0j
    for i in range(z.shape[0]):
        x = z[i].real
        t = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - t) + x
        else:
            cr += (x - t) + sr
        sr = t
        y = z[i].imag
        t = si + y
        if abs(si) >= abs(y):
            ci += (si - t) + y
        else:
            ci += (y - t) + si
        si = t
        out[i + 1] = complex(sr + cr, si + ci)
    return out


@njit(cache=True, nogil=True)
def _crescent_chain(points, start, eps):
    """Exact crescent sums for points[start+1:], each against its predecessor.

    Returns (sum of h, sum of h*(z+w)); Neumaier compensation on each real sum.
    """
    q = 0.5 / eps
    sh = 0.0
    ch = 0.0
    sr = 0.0
    cr = 0.0
    si = 0.0
    ci = 0.0
    for n in range(start + 1, points.shape[0]):
        z = points[n]
        w = points[n - 1]
        t = abs(z - w) * q
        if t > 1.0:
            t = 1.0
        h = t * math.sqrt(1.0 - t * t) + math.asin(t)
        s = h * (z + w)
        tt = sh + h
        if abs(sh) >= h:
            ch += (sh - tt) + h
        else:
            ch += (h - tt) + sh
        sh = tt
        x = s.real
        tt = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - tt) + x
        else:
            cr += (x - tt) + sr
        sr = tt
        y = s.imag
        tt = si + y
        if abs(si) >= abs(y):
            ci += (si - tt) + y
        else:
            ci += (y - tt) + si
        si = tt
    return sh + ch, complex(sr + cr, si + ci)


@njit(cache=True, nogil=True)
def _stream(c, z, r_stop, cap):
    """Iterate from z without storing; accumulate odd gap power sums.

    Returns P1, P3, P5, P7 = sum d^j and S1, S3, S5 = sum d^j (z_n + z_{n-1}),
    the last two points, the step count and the largest gap.  The two leading
    sums carry the signal and are compensated.
    """
    p1 = 0.0
    cp1 = 0.0
    p3 = 0.0
    p5 = 0.0
    p7 = 0.0
    s1r = 0.0
    cs1r = 0.0
    s1i = 0.0
    cs1i = 0.0
    s3 = 0j
    s5 = 0j
    w = z
    zprev = z
    steps = 0
    dmax = 0.0
    while abs(w) > r_stop and steps < cap:
        zn = w + increment(c, w)
        d = abs(zn - w)
        s = zn + w
        t = p1 + d
        if abs(p1) >= d:
            cp1 += (p1 - t) + d
        else:
            cp1 += (d - t) + p1
        p1 = t
        x = d * s.real
        t = s1r + x
        if abs(s1r) >= abs(x):
            cs1r += (s1r - t) + x
        else:
            cs1r += (x - t) + s1r
        s1r = t
        y = d * s.imag
        t = s1i + y
        if abs(s1i) >= abs(y):
            cs1i += (s1i - t) + y
        else:
            cs1i += (y - t) + s1i
        s1i = t
        d2 = d * d
        d3 = d2 * d
        p3 += d3
        s3 += d3 * s
        p5 += d3 * d2
        s5 += d3 * d2 * s
        p7 += d3 * d2 * d2
        if d > dmax:
            dmax = d
        zprev = w
        w = zn
        steps += 1
    return (p1 + cp1, p3, p5, p7, complex(s1r + cs1r, s1i + cs1i), s3, s5,
            w, zprev, steps, dmax)


@dataclass(frozen=True)
class Continuation:
    """Streamed part of the orbit beyond the last stored point.

    ``k``, ``a1_abs`` and ``rel_bound`` describe the germ near 0:
    |f(z) - z| lies within a factor (1 +- rel_bound(|z|)) of |a1| |z|^(k+1).
    """

    p1: float
    p3: float
    p5: float
    p7: float
    s1: complex
    s3: complex
    s5: complex
    z_start: complex
    z_end: complex
    z_before_end: complex
    steps: int
    max_gap: float
    k: int = 1
    a1_abs: float = 1.0
    higher: tuple = ()
    inc: tuple = ()
    bend: "PathBend | None" = None

    def rel_bound(self, r: float) -> float:
        return sum(abs(c) * r ** (j + 1) for j, c in enumerate(self.higher)) / self.a1_abs

    @property
    def end_angle(self) -> float:
        """Angle between the last step and the chord from z_end to 0."""
        step = self.z_end - self.z_before_end
        if step == 0 or self.z_end == 0:
            return 0.0
        ratio = step / (-self.z_end)
        return abs(math.atan2(ratio.imag, ratio.real))

    def extend(self, out) -> "Continuation":
        p1, p3, p5, p7, s1, s3, s5, zl, zp, steps, dmax = out
        if steps == 0:
            return self
        out = replace(
            self,
            p1=self.p1 + p1, p3=self.p3 + p3, p5=self.p5 + p5, p7=self.p7 + p7,
            s1=self.s1 + complex(s1), s3=self.s3 + complex(s3), s5=self.s5 + complex(s5),
            z_end=complex(zl), z_before_end=complex(zp), steps=self.steps + int(steps),
            max_gap=max(self.max_gap, float(dmax)),
        )
        return replace(out, bend=path_bend(self.inc, out.z_end, self.a1_abs, self.k))


def vector_field_coeffs(inc) -> np.ndarray:
    """X = D - D D'/2 for the increment D = f - id, same indexing as the series.

    The time-one map of X agrees with f up to an error of order 3k+1.
    """
    c = np.asarray(inc, dtype=np.complex128)
    n = c.size
    prod = np.convolve(c, np.arange(1, n + 1) * c)
    return c - 0.5 * prod[:n]


@dataclass(frozen=True)
class PathBend:
    """Trajectory of the vector field from z_L into 0 compared with the chord [z_L, 0].

    ``length`` and ``moment`` are the excess of the path length and of the path
    integral of z ds over the chord values |z_L| and z_L |z_L| / 2.  ``turning``
    is the total change of direction.  The error entries estimate the order
    dropped in the vector field by the size of the last correction it carries.
    """

    length: float
    moment: complex
    turning: float
    length_err: float
    moment_err: float


def _bend_integrals(x: np.ndarray, z_end: complex, span: float = 20.0):
    # log radius ell and angle theta, both relative to z_end; lengths in units of r
    r = abs(z_end)
    base = z_end / r
    xr = x[::-1]

    def rhs(ell, y):
        rho = r * math.exp(ell)
        z = rho * base * complex(math.cos(y[0]), math.sin(y[0]))
        g = 0j
        for c in xr:
            g = g * z + c
        dtheta = g.imag / g.real
        ds = math.exp(ell) * math.sqrt(1.0 + dtheta * dtheta)
        dj = (z / r) * ds - math.exp(2 * ell) * base
        return [dtheta, ds - math.exp(ell), dj.real, dj.imag]

    sol = solve_ivp(rhs, (0.0, -span), [0.0, 0.0, 0.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-16)
    if not sol.success:
        raise RuntimeError(f"path integration failed: {sol.message}")
    y = sol.y[:, -1]
    # integration ran downward in log radius
    return -r * y[1], -r * r * complex(y[2], y[3]), abs(y[0])


def path_bend(inc: tuple, z_end: complex, a1_abs: float, k: int) -> PathBend | None:
    if not inc or z_end == 0:
        return None
    d = np.array(inc, dtype=np.complex128)
    length, moment, turning = _bend_integrals(vector_field_coeffs(d), z_end)
    # the same path under D alone sizes the correction; the dropped order is
    # smaller by a factor of order |a1| r^k
    l0, m0, _ = _bend_integrals(d, z_end)
    r = abs(z_end)
    scale = 4.0 * a1_abs * r**k
    return PathBend(length, moment, turning,
                    abs(length - l0) * scale + 1e-14 * r,
                    abs(moment - m0) * scale + 1e-14 * r * r)


def _start_continuation(orbit: Orbit) -> Continuation:
    z = complex(orbit.points[-1])
    zp = complex(orbit.points[-2]) if len(orbit) > 1 else z
    germ = orbit.germ_ref
    if germ is None:
        return Continuation(0.0, 0.0, 0.0, 0.0, 0j, 0j, 0j, z, z, zp, 0, 0.0)
    inc = germ.increment_coeffs()
    higher = tuple(complex(c) for c in inc[germ.k + 1:])
    inc_t = tuple(complex(c) for c in inc)
    return Continuation(0.0, 0.0, 0.0, 0.0, 0j, 0j, 0j, z, z, zp, 0, 0.0,
                        germ.k, abs(germ.a1), higher, inc_t, path_bend(inc_t, z, abs(germ.a1), germ.k))


def empty_continuation(orbit: Orbit) -> Continuation:
    """No streaming: the orbit is taken as its stored points."""
    return _start_continuation(orbit)


def closure_terms(cont: Continuation, eps: float, close_chord: bool = True):
    """Area and moment past the last stored point, with absolute error bounds.

    Streamed gaps enter through the odd Taylor series of the crescent area.
    Beyond the streamed end z_L (r = |z_L|) the orbit is replaced by the chord
    [z_L, 0]: linear term exact for a straight path, cubic term integrated with
    d(s) = |a1| s^(k+1), and likewise the quintic term.  The bounds cover path
    bending (angle phi), the germ's higher coefficients, the Riemann-sum step
    and the dropped seventh-order term.
    """
    if cont.steps == 0 and not close_chord:
        return 0.0, 0j, 0.0, 0.0
    q = 0.5 / eps
    e2 = eps * eps
    area = 2 * e2 * (2 * q * cont.p1 - q**3 * cont.p3 / 3 - q**5 * cont.p5 / 20)
    moment = e2 * (2 * q * cont.s1 - q**3 * cont.s3 / 3 - q**5 * cont.s5 / 20)
    moment -= HALF_PI * e2 * (cont.z_start - cont.z_end)
    area_err = 0.0
    if cont.steps:
        tmax = min(cont.max_gap * q, 0.99)
        # h(t) = 2t - t^3/3 - t^5/20 - t^7/56 - ..., later coefficients smaller
        area_err = 2 * e2 * q**7 * cont.p7 / 56 / (1 - tmax * tmax)
    mom_err = 2 * (abs(cont.z_start) + eps) * area_err
    r = abs(cont.z_end)
    if close_chord and r > 0:
        k = cont.k
        u = cont.z_end / r
        dl = abs(cont.z_end - cont.z_before_end)
        bend = cont.bend
        if bend is not None:
            turn = min(bend.turning, 0.5)
            extra_len, extra_mom = bend.length, bend.moment
            len_err, bend_err = bend.length_err, bend.moment_err
        else:
            # no germ: straight chord, bending sized by the last step
            turn = min(2.0 * cont.end_angle, 0.5)
            extra_len, extra_mom = 0.0, 0j
            len_err = r * (1.0 / math.cos(turn) - 1)
            bend_err = r * r * math.sin(turn)
        sec = 1.0 / math.cos(turn)
        delta = cont.rel_bound(r)
        c3 = cont.a1_abs**2 * r ** (2 * k + 3) / (2 * k + 3)
        m3 = cont.a1_abs**2 * r ** (2 * k + 4) / (2 * k + 4)
        c5 = cont.a1_abs**4 * r ** (4 * k + 5) / (4 * k + 5)
        m5 = cont.a1_abs**4 * r ** (4 * k + 6) / (4 * k + 6)
        w3 = 1 / (12 * eps)
        w5 = 1 / (320 * eps**3)
        area += 2 * eps * (r + extra_len) - c3 * w3 - c5 * w5
        moment += (eps * cont.z_end * r + 2 * eps * extra_mom - HALF_PI * e2 * cont.z_end
                   - u * (m3 * w3 + m5 * w5))
        cubic_err = (c3 * ((1 + delta) ** 2 * sec - 1 + 2 * delta) + dl**3 * sec) * w3
        quintic_err = (c5 * ((1 + delta) ** 4 * sec - 1 + 4 * delta) + dl**5 * sec) * w5
        tl = min(dl * q, 0.99)
        septic_err = dl**6 * r * sec / (3584 * eps**5) / (1 - tl * tl)
        tail_err = 2 * eps * len_err + cubic_err + quintic_err + septic_err
        area_err += tail_err
        # curvature of the band edge moves its moment by at most 2 eps^3/3 per radian
        mom_err += (2 * r * (cubic_err + quintic_err + septic_err) + 2 * eps * bend_err
                    + (m3 * w3 + m5 * w5) * math.sin(turn) + 2 * eps**3 * turn / 3
                    + 2 * eps * r * len_err)
    return area, moment, area_err, mom_err


def build_continuation(orbit: Orbit, eps_min: float, budget: float = DEFAULT_BUDGET,
                       cap: int = 2_000_000_000, shrink: float = 0.7) -> Continuation:
    """Stream the orbit past its last stored point until the closure meets the budget at eps_min.

    Half the budget is given to the closure, both for the area and for the
    directed area; a moment error moves the latter by about area/|moment| times
    as much.  The stream moves inward in steps of ``shrink`` in radius.
    """
    germ = orbit.germ_ref
    if germ is None:
        raise ValueError("streaming needs the generating germ")
    c = np.ascontiguousarray(germ.increment_coeffs())
    cont = _start_continuation(orbit)
    target = 0.5 * budget * eps_min * eps_min * abs(math.log(eps_min))
    probe = OrbitMeasurer(orbit, cont, True).measure(eps_min, budget=None, check=False)
    lever = 2.0 * probe.area / abs(probe.area * probe.centroid)
    while True:
        _, _, err, merr = closure_terms(cont, eps_min)
        if err <= target and err + lever * merr <= target:
            return cont
        left = cap - cont.steps
        if left <= 0:
            raise BudgetUnreachable(f"closure error {err:.3g} above {target:.3g} after {cont.steps} steps")
        cont = cont.extend(_stream(c, cont.z_end, shrink * abs(cont.z_end), left))


@dataclass(frozen=True)
class NeighborhoodMeasurement:
    eps: float
    n_eps: int
    area: float
    centroid: complex
    directed_area: complex
    tail_area: float
    nucleus_area: float
    closure_error_bound: float
    points_used: int
    moment_error_bound: float = 0.0
    directed_error_bound: float = 0.0
    chain_ok: bool = True
    monotone_ok: bool = True

    @property
    def centroid_error_bound(self) -> float:
        return (self.moment_error_bound + abs(self.centroid) * self.closure_error_bound) / self.area


def _nucleus(orbit: Orbit, eps: float, n_eps: int, cont: Continuation, close_chord: bool):
    pts = orbit.points
    e2 = eps * eps
    z_first = complex(pts[n_eps])
    sh, shz = _crescent_chain(pts, n_eps, eps)
    area = math.pi * e2 + 2 * e2 * sh
    moment = math.pi * e2 * z_first + e2 * shz - HALF_PI * e2 * (z_first - complex(pts[-1]))
    ca, cm, aerr, merr = closure_terms(cont, eps, close_chord)
    return area + ca, moment + cm, aerr, merr


def nucleus_area(orbit: Orbit, eps: float, budget: float = DEFAULT_BUDGET,
                 continuation: Continuation | None = None) -> tuple[float, float]:
    """(nucleus area, absolute error bound)."""
    n_eps = critical_index(orbit, eps)
    cont = continuation if continuation is not None else build_continuation(orbit, eps, budget)
    area, _, err, _ = _nucleus(orbit, eps, n_eps, cont, True)
    _check_budget(err, eps, budget)
    return area, err


def _check_budget(err: float, eps: float, budget: float):
    limit = budget * eps * eps * abs(math.log(eps))
    if err > limit:
        raise BudgetUnreachable(f"closure error {err:.3g} exceeds budget {limit:.3g} at eps={eps:.3g}")


def _lens_inside(zi: complex, zj: complex, p: complex, eps: float, tol: float) -> bool:
    """Is D(zi) n D(zj) contained in D(p)?  All radii eps."""
    d = abs(zi - zj)
    if d >= 2 * eps:
        return True
    mid = 0.5 * (zi + zj)
    if d == 0:
        return abs(zi - p) <= tol * eps
    half = math.sqrt(eps * eps - 0.25 * d * d)
    perp = 1j * (zj - zi) / d
    for corner in (mid + half * perp, mid - half * perp):
        if abs(corner - p) > eps * (1 + tol):
            return False
    # an arc whose point farthest from p lies inside the other disc escapes D(p)
    for c, other in ((zi, zj), (zj, zi)):
        v = c - p
        if abs(v) > tol * eps:
            far = c + eps * v / abs(v)
            if abs(far - other) < eps * (1 - tol):
                return False
    return True


def check_chain_structure(orbit: Orbit, eps: float, n_eps: int, dense: int = 64, sparse: int = 64,
                          tol: float = 1e-9) -> bool:
    """Spot-check that every nucleus disc meets the earlier ones only through its predecessor.

    Checks all earlier intersecting discs for the first ``dense`` nucleus points and
    for ``sparse`` log-spaced points deeper in, with at most 64 partners each.
    """
    pts = orbit.points
    m = len(orbit)
    first = n_eps + 1
    if first >= m:
        return True
    idx = list(range(first, min(m, first + dense)))
    if m - first > dense:
        idx += sorted(set(np.unique(np.geomspace(first + dense, m - 1, sparse).astype(int)).tolist()))
    for i in idx:
        zi = complex(pts[i])
        p = complex(pts[i - 1])
        j = i - 2
        partners = 0
        # discs farther back than the last intersecting one cannot matter
        while j >= 0 and partners < 64:
            zj = complex(pts[j])
            if abs(zi - zj) >= 2 * eps:
                break
            if not _lens_inside(zi, zj, p, eps, tol):
                return False
            j -= 1
            partners += 1
        if partners == 64 and j >= 0:
            # jump to the farthest intersecting disc along the monotone chain
            lo, hi = 0, j
            while lo < hi:
                mid = (lo + hi) // 2
                if abs(zi - complex(pts[mid])) < 2 * eps:
                    hi = mid
                else:
                    lo = mid + 1
            if not _lens_inside(zi, complex(pts[lo]), p, eps, tol):
                return False
    return True


class OrbitMeasurer:
    """Measures one orbit on many eps values; prefix sums are shared."""

    def __init__(self, orbit: Orbit, continuation: Continuation | None = None, close_chord: bool = True):
        self.orbit = orbit
        self.continuation = continuation if continuation is not None else empty_continuation(orbit)
        self.close_chord = close_chord
        self.prefix = _compensated_cumsum(np.ascontiguousarray(orbit.points))

    @classmethod
    def for_grid(cls, orbit: Orbit, eps_min: float, budget: float = DEFAULT_BUDGET) -> "OrbitMeasurer":
        return cls(orbit, build_continuation(orbit, eps_min, budget), True)

    def measure(self, eps: float, budget: float | None = DEFAULT_BUDGET, check: bool = True) -> NeighborhoodMeasurement:
        orbit = self.orbit
        if eps <= 0:
            raise OutOfRange("eps must be positive")
        e2 = eps * eps
        if len(orbit) == 1:
            z = complex(orbit.points[0])
            area = math.pi * e2
            return NeighborhoodMeasurement(eps, 0, area, z, area * _unit(z), 0.0, area, 0.0, 1)
        n_eps = critical_index(orbit, eps)
        t_area = tail_area(n_eps, eps)
        t_moment = math.pi * e2 * complex(self.prefix[n_eps])
        n_area, n_moment, err, merr = _nucleus(orbit, eps, n_eps, self.continuation, self.close_chord)
        if budget is not None and (self.close_chord or self.continuation.steps):
            _check_budget(err, eps, budget)
        area = t_area + n_area
        moment = t_moment + n_moment
        centroid = moment / area
        derr = err + 2.0 * area * merr / abs(moment) if moment != 0 else math.inf
        monotone_ok = n_eps >= orbit.monotone_from
        chain_ok = check_chain_structure(orbit, eps, n_eps) if check else True
        return NeighborhoodMeasurement(
            eps=eps,
            n_eps=n_eps,
            area=area,
            centroid=centroid,
            directed_area=area * _unit(centroid),
            tail_area=t_area,
            nucleus_area=n_area,
            closure_error_bound=err,
            points_used=len(orbit) + self.continuation.steps,
            moment_error_bound=merr,
            directed_error_bound=derr,
            chain_ok=chain_ok,
            monotone_ok=monotone_ok,
        )


def _unit(z: complex) -> complex:
    r = abs(z)
    return z / r if r > 0 else 1.0 + 0j


def directed_area(orbit: Orbit, eps: float, budget: float = DEFAULT_BUDGET,
                  continuation: Continuation | None = None) -> NeighborhoodMeasurement:
    """Measurement of the whole orbit's eps-neighborhood, closure included.

    Orbits without a germ (explicit point sets) are measured as finite sets.
    """
    if orbit.germ_ref is None and continuation is None:
        return OrbitMeasurer(orbit, close_chord=False).measure(eps, budget=None)
    if continuation is None:
        continuation = build_continuation(orbit, eps, budget)
    return OrbitMeasurer(orbit, continuation, True).measure(eps, budget)


def finite_set_measurement(points, eps: float) -> NeighborhoodMeasurement:
    """Measurement of a finite chain of points (no continuation, no chord)."""
    return OrbitMeasurer(Orbit.from_points(points), close_chord=False).measure(eps, budget=None)
