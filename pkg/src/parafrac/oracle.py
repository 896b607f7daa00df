"""Monte-Carlo estimate of the area and centroid of a union of equal discs.

Independent of the crescent decomposition: it only tests whether sample points
lie within eps of some center.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_CELLS = 4_000_000
BLOCK = 1 << 20


@dataclass(frozen=True)
class OracleEstimate:
    area: float
    area_stderr: float
    centroid: complex
    centroid_stderr: float
    samples: int
    seed: int

    def area_agrees(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(value - self.area) <= sigmas * self.area_stderr

    def centroid_agrees(self, value: complex, sigmas: float = 3.0) -> bool:
        tol = sigmas * self.centroid_stderr
        return abs(value.real - self.centroid.real) <= tol and abs(value.imag - self.centroid.imag) <= tol


class _Grid:
    """Uniform bucket grid over the centers; cells are at least eps wide."""

    def __init__(self, pts: np.ndarray, eps: float, lo: complex, hi: complex):
        span = max(hi.real - lo.real, hi.imag - lo.imag)
        cell = max(eps, span / math.sqrt(MAX_CELLS))
        nx = int((hi.real - lo.real) / cell) + 1
        ny = int((hi.imag - lo.imag) / cell) + 1
        ix = np.minimum(((pts.real - lo.real) / cell).astype(np.int64), nx - 1)
        iy = np.minimum(((pts.imag - lo.imag) / cell).astype(np.int64), ny - 1)
        key = iy * nx + ix
        order = np.argsort(key, kind="stable")
        self.points = np.ascontiguousarray(pts[order])
        counts = np.bincount(key, minlength=nx * ny)
        self.start = np.zeros(nx * ny + 1, np.int64)
        np.cumsum(counts, out=self.start[1:])
        self.cell, self.nx, self.ny, self.lo = cell, nx, ny, lo


@njit(cache=True, nogil=True)
def _count_hits(xs, ys, pts, start, lo_re, lo_im, cell, nx, ny, eps, seg_re, seg_im, use_seg):
    e2 = eps * eps
    hits = 0
    sx = 0.0
    sy = 0.0
    sxx = 0.0
    syy = 0.0
    seg_len2 = seg_re * seg_re + seg_im * seg_im
    for s in range(xs.shape[0]):
        x = xs[s]
        y = ys[s]
        hit = False
        if use_seg:
            # capsule around the segment from (seg_re, seg_im) to 0
            tpar = (x * seg_re + y * seg_im) / seg_len2
            if tpar < 0.0:
                tpar = 0.0
            elif tpar > 1.0:
                tpar = 1.0
            dx = x - tpar * seg_re
            dy = y - tpar * seg_im
            hit = dx * dx + dy * dy <= e2
        if not hit:
            cx = int((x - lo_re) / cell)
            cy = int((y - lo_im) / cell)
            for gy in range(max(cy - 1, 0), min(cy + 2, ny)):
                if hit:
                    break
                for gx in range(max(cx - 1, 0), min(cx + 2, nx)):
                    c = gy * nx + gx
                    for p in range(start[c], start[c + 1]):
                        dx = x - pts[p].real
                        dy = y - pts[p].imag
                        if dx * dx + dy * dy <= e2:
                            hit = True
                            break
                    if hit:
                        break
        if hit:
            hits += 1
            sx += x
            sy += y
            sxx += x * x
            syy += y * y
    return hits, sx, sy, sxx, syy


def mc_union_measure(points, eps: float, samples: int, seed: int, closure_segment: complex | None = None,
                     workers: int = 1) -> OracleEstimate:
    """Area and centroid of the union of eps-discs by uniform sampling of its bounding box.

    ``closure_segment`` adds the eps-capsule around the segment from that point to 0,
    standing in for the orbit's continuation to the fixed point.
    """
    pts = np.asarray(points, dtype=np.complex128).ravel()
    if pts.size == 0:
        raise ValueError("need at least one center")
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    ext = pts if closure_segment is None else np.concatenate([pts, [complex(closure_segment), 0j]])
    lo = complex(ext.real.min() - eps, ext.imag.min() - eps)
    hi = complex(ext.real.max() + eps, ext.imag.max() + eps)
    width, height = hi.real - lo.real, hi.imag - lo.imag
    box = width * height
    grid = _Grid(pts, eps, lo, hi)
    seg = complex(closure_segment) if closure_segment is not None else 0j
    use_seg = closure_segment is not None and closure_segment != 0

    nblocks = -(-samples // BLOCK)
    seqs = np.random.SeedSequence(seed).spawn(nblocks)

    def run(b: int):
        n = min(BLOCK, samples - b * BLOCK)
        rng = np.random.Generator(np.random.Philox(seqs[b]))
        xs = lo.real + width * rng.random(n)
        ys = lo.imag + height * rng.random(n)
        return _count_hits(xs, ys, grid.points, grid.start, lo.real, lo.imag, grid.cell,
                           grid.nx, grid.ny, eps, seg.real, seg.imag, use_seg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(nblocks)))
    else:
        parts = [run(b) for b in range(nblocks)]
    hits = sum(p[0] for p in parts)
    sx, sy, sxx, syy = (math.fsum(p[i] for p in parts) for i in range(1, 5))

    frac = hits / samples
    area = box * frac
    area_stderr = box * math.sqrt(frac * (1 - frac) / samples)
    if hits == 0:
        return OracleEstimate(0.0, area_stderr, complex("nan"), math.inf, samples, seed)
    mx, my = sx / hits, sy / hits
    vx = max(sxx / hits - mx * mx, 0.0)
    vy = max(syy / hits - my * my, 0.0)
    c_stderr = math.sqrt(max(vx, vy) / hits)
    return OracleEstimate(area, area_stderr, complex(mx, my), c_stderr, samples, seed)
