"""Wavenumber-domain (spectral support) analysis of sensing acquisitions.

A single monochromatic Tx-Rx measurement excites exactly one spatial
frequency of the scene reflectivity: the composite wavevector
k* = k_Tx - k_Rx. Sweeping frequency turns the point into a radial
segment; sweeping element positions sweeps the segment in angle. The
extent of the union of all excited wavenumbers sets the achievable image
resolution (rho = 2*pi / extent per axis), which is what this module
predicts without running any simulation.

Angle convention: a wavevector at angle psi (measured from the +x axis)
is (2*pi*f/c) * [cos(psi), sin(psi)], with psi the direction from the
sensor element toward the target. Note this is the [cos, sin] component
order everywhere; the alternative (k_x = k*sin(psi)) swaps axes and is
not used in this codebase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import SPEED_OF_LIGHT, Scenario, Vec2

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WavenumberTile:
    """Sampled coverage of one (tx terminal, rx terminal, tx element,
    rx element) channel: points of the segment swept by the composite
    wavevector over the signal band.

    ``samples`` is an (n, 2) array in rad/m; ``freqs`` holds the sampled
    frequencies in Hz. Base-band tiles are shifted so the center-frequency
    composite wavevector sits at the origin (magnitude-only imaging).
    """

    pair: tuple[int, int, int, int]
    samples: np.ndarray
    freqs: np.ndarray
    baseband: bool = False


@dataclass(frozen=True)
class WavenumberRegion:
    """Union of coverage tiles for a full acquisition."""

    tiles: tuple[WavenumberTile, ...]
    label: str  # "monostatic" | "bistatic" | "fused"

    def all_samples(self) -> np.ndarray:
        return np.concatenate([t.samples for t in self.tiles], axis=0)


@dataclass(frozen=True)
class ResolutionEstimate:
    """Axis-aligned spectral extents and the resolution they support.

    ``rho_x``/``rho_y`` are math.inf when the corresponding extent is
    exactly zero (no coverage means no resolution); serialized output
    uses null instead of infinities.
    """

    rho_x: float
    rho_y: float
    dk_x: float
    dk_y: float
    hull: tuple[Vec2, ...]

    def to_dict(self) -> dict:
        return {
            "rho_x_m": None if math.isinf(self.rho_x) else self.rho_x,
            "rho_y_m": None if math.isinf(self.rho_y) else self.rho_y,
            "dk_x_rad_per_m": self.dk_x,
            "dk_y_rad_per_m": self.dk_y,
            "hull_area_rad2_per_m2": polygon_area(self.hull),
            "hull_vertices": [[v.x, v.y] for v in self.hull],
        }


def _unit_toward(frm: Vec2, to: Vec2, what: str) -> np.ndarray:
    d = np.asarray(to) - np.asarray(frm)
    r = math.hypot(d[0], d[1])
    if r == 0.0:
        raise ValueError(f"degenerate geometry: {what} coincides with the target")
    return d / r


def unit_wavevectors(tx_pos: Vec2, rx_pos: Vec2, target: Vec2, f: float) -> tuple[Vec2, Vec2]:
    """Plane wavevectors of the illuminating and scattered waves at ``f``.

    k_Tx points from the Tx element toward the target and k_Rx from the
    target toward the Rx element (both derive from the gradients of the
    respective range functions); each has magnitude 2*pi*f/c. Raises
    ValueError when a sensor sits exactly on the target.
    """
    k = TWO_PI * f / SPEED_OF_LIGHT
    u_tx = _unit_toward(tx_pos, target, "tx element")
    u_rx = _unit_toward(rx_pos, target, "rx element")
    # scattered wave travels target -> Rx, i.e. opposite to u_rx
    return (
        Vec2(float(k * u_tx[0]), float(k * u_tx[1])),
        Vec2(float(-k * u_rx[0]), float(-k * u_rx[1])),
    )


def composite_wavenumber(k_tx: Vec2, k_rx: Vec2) -> Vec2:
    """Spatial frequency of the scene excited by one monochromatic
    measurement: k* = k_Tx - k_Rx. Monostatic magnitude is 4*pi*f/c."""
    return k_tx - k_rx


def coverage_segment(
    tx_pos: Vec2,
    rx_pos: Vec2,
    target: Vec2,
    f0: float,
    bandwidth: float,
    n_freq: int = 64,
    baseband: bool = False,
    pair: tuple[int, int, int, int] = (0, 0, 0, 0),
) -> WavenumberTile:
    """Sample the wavenumber segment covered by one channel over its band.

    Frequencies are uniform over [f0 - B/2, f0 + B/2]. ``bandwidth`` may
    be zero, collapsing the segment to the single monochromatic point.
    The segment lies along the bisector of the two sensor directions and
    has length (4*pi*B/c) * cos(delta_psi / 2).
    """
    if n_freq < 2:
        raise ValueError("n_freq must be at least 2")
    if bandwidth < 0:
        raise ValueError("bandwidth must be non-negative")
    u_tx = _unit_toward(tx_pos, target, "tx element")
    u_rx = _unit_toward(rx_pos, target, "rx element")
    direction = u_tx + u_rx  # k* = (2 pi f / c) * (u_tx + u_rx)
    freqs = np.linspace(f0 - bandwidth / 2.0, f0 + bandwidth / 2.0, n_freq)
    scale = (TWO_PI / SPEED_OF_LIGHT) * (freqs - (f0 if baseband else 0.0))
    samples = scale[:, None] * direction[None, :]
    return WavenumberTile(pair=pair, samples=samples, freqs=freqs, baseband=baseband)


def coverage_region(
    scenario: Scenario,
    target: Vec2,
    n_freq: int = 64,
    baseband: bool = False,
) -> WavenumberRegion:
    """Coverage of every active measurement channel of a scenario.

    One tile per (tx terminal, rx terminal, tx element, rx element)
    channel admitted by the association matrix. With ``baseband=True``
    each tile is shifted by its own center-frequency composite wavevector,
    modeling magnitude-only (incoherent) image combination.
    """
    tiles: list[WavenumberTile] = []
    mono = bist = False
    for l, k in scenario.pairing.active_pairs():
        mono |= l == k
        bist |= l != k
        term_tx, term_rx = scenario.terminals[l], scenario.terminals[k]
        for n, tx_el in enumerate(term_tx.tx_elements):
            for m, rx_el in enumerate(term_rx.rx_elements):
                try:
                    tiles.append(
                        coverage_segment(
                            tx_el, rx_el, target, scenario.f0, scenario.bandwidth,
                            n_freq=n_freq, baseband=baseband, pair=(l, k, n, m),
                        )
                    )
                except ValueError as err:
                    raise ValueError(f"channel ({l},{k},{n},{m}): {err}") from err
    if not tiles:
        raise ValueError("no active channels: association matrix selects no pairs")
    label = "fused" if (mono and bist) else ("bistatic" if bist else "monostatic")
    return WavenumberRegion(tiles=tuple(tiles), label=label)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Planar convex hull by Andrew's monotone chain, O(n log n).

    Returns hull vertices in counter-clockwise order. Degenerate inputs
    are handled: collinear clouds reduce to their two extreme points and
    a single point to itself.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    # lexicographic sort by (x, y)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def polygon_area(vertices) -> float:
    """Shoelace area of a simple polygon (0 for degenerate hulls)."""
    pts = np.asarray(vertices, dtype=float)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def predicted_resolution(region: WavenumberRegion) -> ResolutionEstimate:
    """Resolution supported by a coverage region.

    The axis-aligned extents of the convex hull of all tile samples give
    rho = 2*pi / extent per axis; a zero extent is reported as an
    unbounded (infinite) resolution. Slicing the coverage along x and y
    implicitly treats the covered region as a rectangle, which is the
    usual approximation; no non-separable resolution figure is reported.
    """
    samples = region.all_samples()
    dk_x = float(samples[:, 0].max() - samples[:, 0].min())
    dk_y = float(samples[:, 1].max() - samples[:, 1].min())
    hull = convex_hull(samples)
    return ResolutionEstimate(
        rho_x=(TWO_PI / dk_x) if dk_x > 0.0 else math.inf,
        rho_y=(TWO_PI / dk_y) if dk_y > 0.0 else math.inf,
        dk_x=dk_x,
        dk_y=dk_y,
        hull=tuple(Vec2(p[0], p[1]) for p in hull),
    )


def aperture_for_cross_range(stand_off: float, f0: float, psi: float, rho_xr: float) -> float:
    """Monostatic aperture length achieving cross-range resolution
    ``rho_xr`` at distance ``stand_off``: A = c*R / (2*f0*rho_xr*sin(psi)).

    ``psi`` is the observation angle; endfire (sin(psi) = 0) is rejected.
    """
    if stand_off <= 0 or f0 <= 0 or rho_xr <= 0:
        raise ValueError("stand_off, f0 and rho_xr must be positive")
    s = math.sin(psi)
    if s == 0.0:
        raise ValueError("endfire geometry: sin(psi) = 0 gives no cross-range resolution")
    return SPEED_OF_LIGHT * stand_off / (2.0 * f0 * rho_xr * s)


def bistatic_loss(alpha: float) -> float:
    """Resolution loss factor of a bistatic pair with bistatic angle
    ``alpha``: rho(alpha) / rho(0) = 1 / cos(alpha / 2).

    The loss is commonly considered tolerable up to alpha = 120 deg
    (factor 2). Raises for alpha outside [0, pi).
    """
    if not 0.0 <= alpha < math.pi:
        raise ValueError("bistatic angle must lie in [0, pi)")
    return 1.0 / math.cos(alpha / 2.0)


# --- exports ----------------------------------------------------------------

def export_coverage_csv(region: WavenumberRegion, path) -> None:
    """Write tile samples as (pair_id, k_x, k_y, f_hz) rows."""
    with open(path, "w") as fh:
        fh.write("pair_id,k_x,k_y,f_hz\n")
        for tile in region.tiles:
            pid = "-".join(str(i) for i in tile.pair)
            for (kx, ky), f in zip(tile.samples, tile.freqs):
                fh.write(f"{pid},{kx:.9g},{ky:.9g},{f:.9g}\n")


def export_hull_csv(estimate: ResolutionEstimate, path) -> None:
    """Write hull polygon vertices as (k_x, k_y) rows."""
    with open(path, "w") as fh:
        fh.write("k_x,k_y\n")
        for v in estimate.hull:
            fh.write(f"{v.x:.9g},{v.y:.9g}\n")
