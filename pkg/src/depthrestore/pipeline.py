"""Full restoration pipeline: preprocess, classify, filter, fill, blend.

Stage order: close small holes, take the hole mask, compute guide
gradients and edges, expand holes across edge pixels, classify regions,
denoise non-hole pixels, then fill the remaining holes from the
outside in.

Hole filling runs in two phases. Non-edge holes go first, using the
isotropic specialization of the partial filter (theta 0, both
directional widths equal to sigma_s); edge holes follow, steered by
the orientation of the nearest edge pixel. Within a phase, every pass
evaluates all still-unfilled target pixels against the validity state
left by the previous pass, then admits those that found at least one
contributor. That makes a pass an onion-peel step: each pass fills the
next ring of a hole, and nothing depends on pixel traversal order or
on how rows are distributed across threads.

The final map needs no separate blend step: filtered values sit on
non-hole pixels and fill values on hole pixels, which are disjoint by
construction. Unfillable pixels (no valid support within reach before
the pass cap) keep the sentinel and are counted in the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .image_model import ColorImage, DepthMap, to_grayscale
from .preprocess import StructuringElement, close_depth, expand_holes, hole_mask
from .edge_analysis import (
    HOLE_EDGE,
    HOLE_NONEDGE,
    EdgeMap,
    classify_regions,
    detect_edges,
    label_counts,
    nearest_edge_theta,
    sobel_gradients,
)
from .filters import WindowSums, filter_non_hole, guide_planes, run_banded, window_sums
from .kernels import KernelParams

DEFAULT_EDGE_THRESHOLD = 100.0
DEFAULT_HOLE_EXPAND_RADIUS = 1
DEFAULT_MAX_FILL_PASSES = 64


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the restoration pipeline can be tuned with.

    r_edge of None means "use the kernel window radius", so the edge
    region is exactly the set of pixels whose filter window straddles
    an edge. threads 0 picks the machine's CPU count; any thread count
    produces bit-identical output. isotropic_only switches every filter
    to the plain isotropic JBF (the ablation arm).
    """

    kernel: KernelParams = field(default_factory=KernelParams)
    se: StructuringElement = field(default_factory=StructuringElement)
    edge_threshold: float = DEFAULT_EDGE_THRESHOLD
    r_edge: int | None = None
    hole_expand_radius: int = DEFAULT_HOLE_EXPAND_RADIUS
    max_fill_passes: int = DEFAULT_MAX_FILL_PASSES
    threads: int = 1
    isotropic_only: bool = False

    def effective_r_edge(self) -> int:
        return self.kernel.window_radius if self.r_edge is None else self.r_edge

    def validate(self) -> None:
        self.kernel.validate()
        self.se.validate()
        if not self.edge_threshold > 0:
            raise ContractViolation(
                f"edge_threshold must be > 0, got {self.edge_threshold}"
            )
        if self.effective_r_edge() < 0:
            raise ContractViolation(f"r_edge must be >= 0, got {self.r_edge}")
        if self.hole_expand_radius < 0:
            raise ContractViolation(
                f"hole_expand_radius must be >= 0, got {self.hole_expand_radius}"
            )
        if self.max_fill_passes < 1:
            raise ContractViolation(
                f"max_fill_passes must be >= 1, got {self.max_fill_passes}"
            )
        if self.threads < 0:
            raise ContractViolation(f"threads must be >= 0, got {self.threads}")


@dataclass(frozen=True)
class RestorationReport:
    """Counts describing one restoration run."""

    holes_initial: int
    holes_filled: int
    holes_unfilled: int
    fill_passes_used: int
    region_counts: dict

    def lines(self) -> list[str]:
        """Flat key: value rendering in stable order."""
        out = [
            f"holes_initial: {self.holes_initial}",
            f"holes_filled: {self.holes_filled}",
            f"holes_unfilled: {self.holes_unfilled}",
            f"fill_passes_used: {self.fill_passes_used}",
        ]
        for name in ("nonhole_nonedge", "nonhole_edge", "hole_nonedge", "hole_edge"):
            out.append(f"{name}: {self.region_counts[name]}")
        return out


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        import os

        return os.cpu_count() or 1
    return threads


def fill_holes(filtered: DepthMap, guide: ColorImage, labels: np.ndarray,
               edges: EdgeMap, cfg: PipelineConfig) -> tuple[DepthMap, RestorationReport]:
    """Fill hole pixels by iterated partial filtering; see module doc.

    `filtered` must already have its non-hole pixels denoised; they are
    the seed values the fill grows from. Returns the completed map and
    the run report. Passes are counted across both phases against
    cfg.max_fill_passes.
    """
    if filtered.samples.shape != labels.shape:
        raise ContractViolation(
            f"depth {filtered.samples.shape} and labels {labels.shape} differ in shape"
        )
    work = filtered.samples.copy()
    h, w = work.shape
    valid = labels <= 1  # non-hole labels
    planes = guide_planes(guide)
    params = cfg.kernel
    threads = _resolve_threads(cfg.threads)

    iso_params = KernelParams(
        sigma_s=params.sigma_s,
        sigma_r_color=params.sigma_r_color,
        sigma_r_depth=params.sigma_r_depth,
        sigma_x=params.sigma_s,
        sigma_y=params.sigma_s,
        window_radius=params.window_radius,
    )
    zeros = np.zeros((h, w))
    iso_cos = np.cos(zeros)
    iso_sin = np.sin(zeros)
    fill_theta = nearest_edge_theta(edges, cfg.effective_r_edge())
    edge_cos = np.cos(fill_theta)
    edge_sin = np.sin(fill_theta)
    if cfg.isotropic_only:
        phases = [
            (HOLE_NONEDGE, iso_params, iso_cos, iso_sin),
            (HOLE_EDGE, iso_params, iso_cos, iso_sin),
        ]
    else:
        phases = [
            (HOLE_NONEDGE, iso_params, iso_cos, iso_sin),
            (HOLE_EDGE, params, edge_cos, edge_sin),
        ]

    holes_initial = int(np.count_nonzero(labels >= 2))
    passes = 0
    filled = 0
    for label, p_params, cos_t, sin_t in phases:
        remaining = (labels == label) & ~valid
        while remaining.any() and passes < cfg.max_fill_passes:
            passes += 1
            acc = WindowSums((h, w))
            validf = valid.astype(np.float64)
            run_banded(h, threads, lambda r0, r1: window_sums(
                work, validf, planes, p_params, acc, r0, r1,
                cos_t=cos_t, sin_t=sin_t))
            fillable = remaining & (acc.cnt > 0)
            if not fillable.any():
                break
            vals = acc.normalized()
            work[fillable] = vals[fillable]
            valid |= fillable
            remaining &= ~fillable
            filled += int(np.count_nonzero(fillable))

    report = RestorationReport(
        holes_initial=holes_initial,
        holes_filled=filled,
        holes_unfilled=holes_initial - filled,
        fill_passes_used=passes,
        region_counts=label_counts(labels),
    )
    return DepthMap(work), report


def restore(depth: DepthMap, guide: ColorImage,
            cfg: PipelineConfig = PipelineConfig()
            ) -> tuple[DepthMap, np.ndarray, RestorationReport]:
    """Run the whole restoration; returns (map, labels, report)."""
    cfg.validate()
    if (depth.height, depth.width) != (guide.height, guide.width):
        raise ContractViolation(
            f"depth {depth.width}x{depth.height} and guide "
            f"{guide.width}x{guide.height} dimensions differ"
        )
    closed = close_depth(depth, cfg.se)
    holes0 = hole_mask(closed)
    gray = to_grayscale(guide)
    grad = sobel_gradients(gray)
    edges = detect_edges(grad, cfg.edge_threshold)
    holes = expand_holes(holes0, edges.edge, cfg.hole_expand_radius)
    labels = classify_regions(holes, edges, cfg.effective_r_edge())
    work = DepthMap(np.where(holes, 0.0, closed.samples))
    threads = _resolve_threads(cfg.threads)
    filtered = filter_non_hole(work, guide, labels, edges, cfg.kernel,
                               threads=threads, isotropic_only=cfg.isotropic_only)
    final, report = fill_holes(filtered, guide, labels, edges, cfg)
    return final, labels, report
