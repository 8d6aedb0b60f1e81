"""Per-pixel depth filters and the vectorized window engine.

Four filters share one structure: a weighted average of neighbor
depths inside a square window, with weights that are products of a
spatial (or directional) Gaussian, a color range Gaussian on the guide
image, and optionally a depth range Gaussian. Hole neighbors always
get weight zero; a sentinel is not a measurement.

Each filter exists in two forms. The *_pixel functions are the plain
per-pixel reference: explicit loops over the window, composing the
scalar kernels. `window_sums` is the production path: it accumulates
the same sums for every pixel at once by iterating window offsets and
shifting whole arrays. Both walk offsets in identical order and build
weights with identical expression trees, so their outputs agree bit
for bit, not just approximately. Keep the arithmetic shapes in sync
when editing either side.

Two accumulation details are deliberate and load-bearing:

* Within each window row, the two contributions at columns -dx and +dx
  are multiplied out separately and added to each other before joining
  the running sums. A horizontal mirror of all inputs swaps the two
  addends of that pair, and float addition of two terms is exactly
  commutative, so mirrored inputs produce exactly mirrored outputs
  instead of drifting by rounding.

* The raw quotient num/den can overshoot the contributor range by an
  ulp, so each evaluation tracks the min and max contributing depth
  and clamps the quotient. That makes the convex-combination guarantee
  exact rather than approximate, and it compounds through the fill
  stage: every filled value stays inside the range of the depths it
  was grown from.

Window offsets falling outside the image are skipped (clamped window),
matching the border policy of the preprocessing stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .image_model import HOLE, ColorImage, DepthMap
from .edge_analysis import EdgeMap, NONHOLE_EDGE, NONHOLE_NONEDGE
from .kernels import (
    SIGMA_DEPTH_INFINITE,
    KernelParams,
    color_range_weight,
    depth_range_weight,
    dgf_weight,
    spatial_weight,
)


@dataclass(frozen=True)
class FilterOutcome:
    """Result of one per-pixel filter evaluation.

    value is the normalized weighted average (0.0 when nothing
    contributed); weight_sum the unnormalized denominator; contributors
    the number of neighbors with nonzero weight. weight_sum == 0 and
    contributors == 0 happen together and mean the window held no
    usable depth.
    """

    value: float
    weight_sum: float
    contributors: int


def _guide_triple(guide: ColorImage, y: int, x: int) -> np.ndarray:
    return guide.samples[y, x].astype(np.float64)


def _check_non_hole(depth: DepthMap, y: int, x: int, op: str) -> None:
    if depth.samples[y, x] == HOLE:
        raise ContractViolation(f"{op} requires a non-hole center, pixel ({y}, {x}) is a hole")


def _scalar_filter(y, x, shape, radius, contribution) -> FilterOutcome:
    """Shared accumulation loop for the per-pixel reference filters.

    contribution(dy, dx, qy, qx) returns (weight, depth) with the
    weight already zeroed for unusable neighbors. The pairing of the
    -dx / +dx terms mirrors the vectorized engine; see module doc.
    """
    h, w = shape
    num = 0.0
    den = 0.0
    cnt = 0
    mn = math.inf
    mx = -math.inf
    for dy in range(-radius, radius + 1):
        qy = y + dy
        if qy < 0 or qy >= h:
            continue
        for adx in range(0, radius + 1):
            pnum = 0.0
            pden = 0.0
            if adx == 0:
                wgt, dq = contribution(dy, 0, qy, x)
                pnum = wgt * dq
                pden = wgt
                if wgt > 0:
                    cnt += 1
                    mn = min(mn, dq)
                    mx = max(mx, dq)
            else:
                qx = x - adx
                if qx >= 0:
                    wgt, dq = contribution(dy, -adx, qy, qx)
                    pnum = pnum + wgt * dq
                    pden = pden + wgt
                    if wgt > 0:
                        cnt += 1
                        mn = min(mn, dq)
                        mx = max(mx, dq)
                qx = x + adx
                if qx < w:
                    wgt, dq = contribution(dy, adx, qy, qx)
                    pnum = pnum + wgt * dq
                    pden = pden + wgt
                    if wgt > 0:
                        cnt += 1
                        mn = min(mn, dq)
                        mx = max(mx, dq)
            num = num + pnum
            den = den + pden
    if den > 0:
        value = min(mx, max(mn, num / den))
    else:
        value = 0.0
    return FilterOutcome(float(value), float(den), cnt)


def jbf_pixel(p, depth: DepthMap, guide: ColorImage, params: KernelParams) -> FilterOutcome:
    """Joint bilateral filter at p = (row, col): spatial x color range."""
    y, x = p
    _check_non_hole(depth, y, x, "jbf_pixel")
    d = depth.samples
    ip = _guide_triple(guide, y, x)

    def contribution(dy, dx, qy, qx):
        ws = spatial_weight(dx, dy, params.sigma_s)
        wc = color_range_weight(ip, _guide_triple(guide, qy, qx), params.sigma_r_color)
        wgt = ws * wc
        wgt = wgt * (1.0 if d[qy, qx] != HOLE else 0.0)
        return wgt, d[qy, qx]

    return _scalar_filter(y, x, d.shape, params.window_radius, contribution)


def tjbf_pixel(p, depth: DepthMap, guide: ColorImage, params: KernelParams) -> FilterOutcome:
    """JBF with an extra depth range term (trilateral).

    The depth term compares the center depth with each neighbor, so
    neighbors across a depth discontinuity lose influence even when the
    guide colors agree.
    """
    y, x = p
    _check_non_hole(depth, y, x, "tjbf_pixel")
    d = depth.samples
    ip = _guide_triple(guide, y, x)
    dp = d[y, x]

    def contribution(dy, dx, qy, qx):
        ws = spatial_weight(dx, dy, params.sigma_s)
        wc = color_range_weight(ip, _guide_triple(guide, qy, qx), params.sigma_r_color)
        wgt = ws * wc
        wgt = wgt * depth_range_weight(dp, d[qy, qx], params.sigma_r_depth)
        wgt = wgt * (1.0 if d[qy, qx] != HOLE else 0.0)
        return wgt, d[qy, qx]

    return _scalar_filter(y, x, d.shape, params.window_radius, contribution)


def djbf_pixel(p, depth: DepthMap, guide: ColorImage, theta: float,
               params: KernelParams) -> FilterOutcome:
    """JBF whose spatial term is the directional Gaussian at angle theta.

    theta comes from the edge map; the long axis (sigma_x) runs along
    the edge contour, so smoothing follows the edge instead of crossing
    it.
    """
    y, x = p
    _check_non_hole(depth, y, x, "djbf_pixel")
    d = depth.samples
    ip = _guide_triple(guide, y, x)

    def contribution(dy, dx, qy, qx):
        ws = dgf_weight(dx, dy, theta, params.sigma_x, params.sigma_y)
        wc = color_range_weight(ip, _guide_triple(guide, qy, qx), params.sigma_r_color)
        wgt = ws * wc
        wgt = wgt * (1.0 if d[qy, qx] != HOLE else 0.0)
        return wgt, d[qy, qx]

    return _scalar_filter(y, x, d.shape, params.window_radius, contribution)


def pdjbf_pixel(p, depth: DepthMap, valid: np.ndarray, guide: ColorImage,
                theta: float, params: KernelParams) -> FilterOutcome:
    """Directional filter for a hole pixel, summing over valid pixels only.

    There is no depth range term: the center has no depth to compare
    against. `valid` marks pixels currently holding trustworthy depth
    (filtered originals plus holes filled on earlier passes). A window
    with no valid pixel returns weight_sum 0 and contributors 0; the
    caller retries the pixel on a later pass rather than treating this
    as an error.
    """
    y, x = p
    if depth.samples[y, x] != HOLE and valid[y, x]:
        raise ContractViolation(f"pdjbf_pixel fills holes, pixel ({y}, {x}) is valid")
    d = depth.samples
    ip = _guide_triple(guide, y, x)

    def contribution(dy, dx, qy, qx):
        ws = dgf_weight(dx, dy, theta, params.sigma_x, params.sigma_y)
        wc = color_range_weight(ip, _guide_triple(guide, qy, qx), params.sigma_r_color)
        wgt = ws * wc
        wgt = wgt * (1.0 if valid[qy, qx] else 0.0)
        return wgt, d[qy, qx]

    return _scalar_filter(y, x, d.shape, params.window_radius, contribution)


class WindowSums:
    """Accumulator grids for one engine run: num, den, cnt, cmin, cmax."""

    def __init__(self, shape):
        self.num = np.zeros(shape)
        self.den = np.zeros(shape)
        self.cnt = np.zeros(shape, dtype=np.int32)
        self.cmin = np.full(shape, np.inf)
        self.cmax = np.full(shape, -np.inf)

    def normalized(self) -> np.ndarray:
        """Clamped weighted averages; 0.0 where nothing contributed."""
        vals = np.zeros_like(self.num)
        np.divide(self.num, self.den, out=vals, where=self.den > 0)
        clamped = np.minimum(self.cmax, np.maximum(self.cmin, vals))
        return np.where(self.den > 0, clamped, 0.0)


def window_sums(depth: np.ndarray, validf: np.ndarray, planes, params: KernelParams,
                acc: WindowSums, row0: int, row1: int, *, iso_sigma=None,
                cos_t=None, sin_t=None, depth_sigma=None) -> None:
    """Accumulate filter sums for output rows [row0, row1).

    One call covers one kernel flavor:
      iso_sigma set           isotropic spatial term
      cos_t/sin_t set         directional term with per-pixel angle,
                              widths params.sigma_x / params.sigma_y
      depth_sigma set         additional depth range term
    Weights are gated by validf (1.0 where the source is usable, else
    0.0). The accumulator is written in place, only inside the row
    band, so concurrent calls on disjoint bands are safe. Sources are
    read from the whole image; banding never changes a single output
    bit.
    """
    h, w = depth.shape
    gr, gg, gb = planes
    r = params.window_radius
    sc = params.sigma_r_color
    sx = params.sigma_x
    sy = params.sigma_y
    use_depth = depth_sigma is not None and depth_sigma < SIGMA_DEPTH_INFINITE

    def side_terms(dy, dx, a0, a1):
        """Weight and source-depth arrays for one offset, on its dst."""
        xs0 = max(0, -dx)
        xs1 = w - max(0, dx)
        dst = (slice(a0, a1), slice(xs0, xs1))
        src = (slice(a0 + dy, a1 + dy), slice(xs0 + dx, xs1 + dx))
        if iso_sigma is not None:
            ws = np.exp(-0.5 * (dx * dx + dy * dy) / (iso_sigma * iso_sigma))
        else:
            ct = cos_t[dst]
            st = sin_t[dst]
            xt = dx * ct + dy * st
            yt = -dx * st + dy * ct
            ws = np.exp(-0.5 * (xt * xt / (sx * sx) + yt * yt / (sy * sy)))
        dr = gr[dst] - gr[src]
        dg = gg[dst] - gg[src]
        db = gb[dst] - gb[src]
        dist2 = dr * dr + dg * dg + db * db
        wc = np.exp(-0.5 * dist2 / (sc * sc))
        wgt = ws * wc
        if use_depth:
            t = (depth[dst] - depth[src]) / depth_sigma
            wgt = wgt * np.exp(-0.5 * (t * t))
        wgt = wgt * validf[src]
        return dst, wgt, depth[src]

    bw = row1 - row0
    for dy in range(-r, r + 1):
        a0 = max(max(0, -dy), row0)
        a1 = min(h - max(0, dy), row1)
        if a0 >= a1:
            continue
        for adx in range(0, r + 1):
            if adx == 0:
                dst, wgt, dq = side_terms(dy, 0, a0, a1)
                acc.num[dst] += wgt * dq
                acc.den[dst] += wgt
                acc.cnt[dst] += wgt > 0
                contrib = wgt > 0
                np.minimum(acc.cmin[dst], np.where(contrib, dq, np.inf),
                           out=acc.cmin[dst])
                np.maximum(acc.cmax[dst], np.where(contrib, dq, -np.inf),
                           out=acc.cmax[dst])
                continue
            if adx >= w:
                continue
            pnum = np.zeros((bw, w))
            pden = np.zeros((bw, w))
            for dx in (-adx, adx):
                dst, wgt, dq = side_terms(dy, dx, a0, a1)
                local = (slice(a0 - row0, a1 - row0), dst[1])
                pnum[local] = wgt * dq
                pden[local] = wgt
                acc.cnt[dst] += wgt > 0
                contrib = wgt > 0
                np.minimum(acc.cmin[dst], np.where(contrib, dq, np.inf),
                           out=acc.cmin[dst])
                np.maximum(acc.cmax[dst], np.where(contrib, dq, -np.inf),
                           out=acc.cmax[dst])
                if dx < 0:
                    lnum = pnum
                    lden = pden
                    pnum = np.zeros((bw, w))
                    pden = np.zeros((bw, w))
            rows = slice(a0 - row0, a1 - row0)
            acc.num[(slice(a0, a1), slice(0, w))] += (lnum + pnum)[rows]
            acc.den[(slice(a0, a1), slice(0, w))] += (lden + pden)[rows]


def guide_planes(guide: ColorImage):
    """Split the guide into float64 channel planes for window_sums."""
    rgb = guide.samples
    return (rgb[..., 0].astype(np.float64),
            rgb[..., 1].astype(np.float64),
            rgb[..., 2].astype(np.float64))


def row_bands(height: int, workers: int):
    """Split [0, height) into `workers` contiguous, near-equal bands."""
    n = max(1, min(workers, height))
    base = height // n
    rem = height % n
    bands = []
    r0 = 0
    for i in range(n):
        r1 = r0 + base + (1 if i < rem else 0)
        bands.append((r0, r1))
        r0 = r1
    return bands


def run_banded(height: int, threads: int, job) -> None:
    """Run job(row0, row1) over row bands, threaded when threads > 1."""
    bands = row_bands(height, threads)
    if len(bands) == 1:
        job(*bands[0])
        return
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=len(bands)) as pool:
        list(pool.map(lambda b: job(*b), bands))


def filter_non_hole(depth: DepthMap, guide: ColorImage, labels: np.ndarray,
                    edges: EdgeMap, params: KernelParams, *, threads: int = 1,
                    isotropic_only: bool = False) -> DepthMap:
    """Denoise every non-hole pixel with its region's filter.

    Non-edge region pixels get the trilateral filter; edge region
    pixels get the directional filter steered by their own edge-map
    theta. Hole pixels pass through as sentinel 0. Every output is
    computed from the original input map, never from freshly filtered
    neighbors, so results are independent of evaluation order and of
    the thread count.

    With isotropic_only the region split is ignored and every non-hole
    pixel gets the plain isotropic JBF (no depth term); this is the
    ablation arm for measuring what the directional kernel buys.
    """
    if depth.samples.shape != labels.shape:
        raise ContractViolation(
            f"depth {depth.samples.shape} and labels {labels.shape} differ in shape"
        )
    d = depth.samples
    h, w = d.shape
    planes = guide_planes(guide)
    validf = (d != HOLE).astype(np.float64)

    if isotropic_only:
        acc = WindowSums(d.shape)
        run_banded(h, threads, lambda r0, r1: window_sums(
            d, validf, planes, params, acc, r0, r1, iso_sigma=params.sigma_s))
        return DepthMap(np.where(labels <= NONHOLE_EDGE, acc.normalized(), d))

    tri = WindowSums(d.shape)
    dire = WindowSums(d.shape)
    cos_t = np.cos(edges.theta)
    sin_t = np.sin(edges.theta)

    def band(r0, r1):
        window_sums(d, validf, planes, params, tri, r0, r1,
                    iso_sigma=params.sigma_s, depth_sigma=params.sigma_r_depth)
        window_sums(d, validf, planes, params, dire, r0, r1,
                    cos_t=cos_t, sin_t=sin_t)

    run_banded(h, threads, band)
    out = np.where(labels == NONHOLE_NONEDGE, tri.normalized(),
                   np.where(labels == NONHOLE_EDGE, dire.normalized(), d))
    return DepthMap(out)
