"""Scalar weight kernels for the depth filters.

Four weights: an isotropic spatial Gaussian, a color range Gaussian on
RGB distance, a depth range Gaussian, and a rotated anisotropic
(directional) Gaussian. All return values in (0, 1] and are exactly 1
at zero argument.

The expressions here are written with numpy ufuncs and kept in the
exact shape the vectorized filter engine uses, so a per-pixel
composition of these functions reproduces the engine output bit for
bit. Do not "simplify" the arithmetic; reassociating it changes
low-order bits and breaks the equivalence tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

DEFAULT_SIGMA_S = 3.0
DEFAULT_SIGMA_R_COLOR = 25.0
DEFAULT_SIGMA_R_DEPTH = 30.0
DEFAULT_SIGMA_X = 5.0
DEFAULT_SIGMA_Y = 1.5
DEFAULT_WINDOW_RADIUS = 5

# A depth range sigma at or above this is treated as the "no depth
# term" limit and yields weight exactly 1.0.
SIGMA_DEPTH_INFINITE = 1e9


@dataclass(frozen=True)
class KernelParams:
    """Widths and window size for all filter kernels.

    sigma_s      isotropic spatial width, pixels
    sigma_r_color  color range width, intensity units
    sigma_r_depth  depth range width, millimeters
    sigma_x      directional width along the edge, pixels
    sigma_y      directional width across the edge, pixels
    window_radius  half-size of the square filter window, pixels
    """

    sigma_s: float = DEFAULT_SIGMA_S
    sigma_r_color: float = DEFAULT_SIGMA_R_COLOR
    sigma_r_depth: float = DEFAULT_SIGMA_R_DEPTH
    sigma_x: float = DEFAULT_SIGMA_X
    sigma_y: float = DEFAULT_SIGMA_Y
    window_radius: int = DEFAULT_WINDOW_RADIUS

    def validate(self) -> None:
        for name in ("sigma_s", "sigma_r_color", "sigma_r_depth", "sigma_x", "sigma_y"):
            v = getattr(self, name)
            if not v > 0:
                raise ContractViolation(f"{name} must be > 0, got {v}")
        if self.window_radius < 1:
            raise ContractViolation(
                f"window_radius must be >= 1, got {self.window_radius}"
            )
        if self.sigma_x < self.sigma_y:
            raise ContractViolation(
                f"sigma_x ({self.sigma_x}) must be >= sigma_y ({self.sigma_y}); "
                "the long axis runs along the edge"
            )


def spatial_weight(dx, dy, sigma_s):
    """Isotropic Gaussian of the pixel offset (dx, dy)."""
    return np.exp(-0.5 * (dx * dx + dy * dy) / (sigma_s * sigma_s))


def color_range_weight(ip, iq, sigma_r):
    """Gaussian of the guide-color difference between two pixels.

    ip and iq are either scalar intensities or RGB triples; for triples
    the difference is the Euclidean distance between the two colors.
    """
    ip = np.asarray(ip, dtype=np.float64)
    iq = np.asarray(iq, dtype=np.float64)
    if ip.ndim == 0:
        d = ip - iq
        dist2 = d * d
    else:
        dr = ip[0] - iq[0]
        dg = ip[1] - iq[1]
        db = ip[2] - iq[2]
        dist2 = dr * dr + dg * dg + db * db
    return np.exp(-0.5 * dist2 / (sigma_r * sigma_r))


def depth_range_weight(dp, dq, sigma_r):
    """Gaussian of the depth difference between two valid pixels.

    A sigma_r of 1e9 or more means "no depth preference" and returns
    exactly 1.0 rather than evaluating an exponential that would only
    approximate it.
    """
    if sigma_r >= SIGMA_DEPTH_INFINITE:
        return 1.0
    t = (dp - dq) / sigma_r
    return np.exp(-0.5 * (t * t))


def dgf_weight(dx, dy, theta, sigma_x, sigma_y):
    """Anisotropic Gaussian of (dx, dy) in a frame rotated by theta.

    The frame's x axis (width sigma_x, the long axis) points along the
    edge contour; its y axis (sigma_y) crosses it. Rotation is the
    proper orthonormal one: x' = dx cos t + dy sin t,
    y' = -dx sin t + dy cos t.
    """
    ct = np.cos(theta)
    st = np.sin(theta)
    xt = dx * ct + dy * st
    yt = -dx * st + dy * ct
    return np.exp(-0.5 * (xt * xt / (sigma_x * sigma_x) + yt * yt / (sigma_y * sigma_y)))
