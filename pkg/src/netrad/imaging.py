"""Image formation by time-domain back-projection.

For each pixel x and each measurement channel, the record is interpolated
at the pixel's bistatic delay tau(x), rotated by exp(+j*2*pi*f0*tau(x))
to undo the carrier phase, and accumulated:

    I(x) = sum_n sum_m y_nm(t = tau_nm(x)) * exp(j*2*pi*f0*tau_nm(x))

At the true position of a noiseless target all channel contributions add
in phase. The formulation is valid for any geometry (near field or far
field, monostatic or bistatic); the spectral ramp filter is omitted,
which is the usual approximation when f0 >> B.

Accumulation runs over channels in the given record order for every
pixel, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .scene import SPEED_OF_LIGHT, ImageGrid, PointTarget, Scenario, Vec2
from .synth import SignalRecord, default_sample_rate, suggest_window, synthesize
from .wavenumber import coverage_region, predicted_resolution

_SINC_TAPS = 16


@dataclass(frozen=True)
class ComplexImage:
    """Complex reflectivity estimate on a pixel grid.

    ``pixels`` is shaped (nx, ny) and indexed [ix, iy]. ``provenance``
    is the (tx terminal, rx terminal) pair that produced the image, or a
    fusion label such as "fused:coh".
    """

    grid: ImageGrid
    pixels: np.ndarray
    provenance: tuple[int, int] | str

    def __post_init__(self):
        object.__setattr__(self, "pixels", np.asarray(self.pixels, dtype=complex))
        if self.pixels.shape != self.grid.size:
            raise ValueError(
                f"pixel array {self.pixels.shape} does not match grid {self.grid.size}"
            )

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.pixels)


def _interp_linear(rec: SignalRecord, tau: np.ndarray) -> np.ndarray:
    pos = (tau - rec.t0) * rec.fs
    i0 = np.clip(np.floor(pos).astype(int), 0, len(rec.samples) - 2)
    frac = pos - i0
    s = rec.samples
    return s[i0] * (1.0 - frac) + s[i0 + 1] * frac


def _interp_sinc(rec: SignalRecord, tau: np.ndarray) -> np.ndarray:
    pos = (tau - rec.t0) * rec.fs
    n = len(rec.samples)
    base = np.clip(np.round(pos).astype(int) - _SINC_TAPS // 2, 0, n - _SINC_TAPS)
    idx = base[:, None] + np.arange(_SINC_TAPS)[None, :]
    weights = np.sinc(pos[:, None] - idx)
    return (rec.samples[idx] * weights).sum(axis=1)


_INTERPOLATORS = {"linear": _interp_linear, "sinc": _interp_sinc}


def _check_window(rec: SignalRecord, tau: np.ndarray, shape, row0: int) -> None:
    lo, hi = float(tau.min()), float(tau.max())
    if lo < rec.t0 or hi > rec.t_end:
        flat = int(np.argmin(tau) if lo < rec.t0 else np.argmax(tau))
        i, j = np.unravel_index(flat, shape)
        bad = lo if lo < rec.t0 else hi
        raise ValueError(
            f"pixel ({int(i) + row0},{int(j)}) delay {bad:g} s outside record window "
            f"[{rec.t0:g}, {rec.t_end:g}] s of channel {rec.channel}"
        )


def backproject(
    records: list[SignalRecord],
    scenario: Scenario,
    grid: ImageGrid,
    workers: int = 1,
    interp: str = "linear",
) -> ComplexImage:
    """Form the complex image of one Tx-Rx pair from its channel records.

    All records must belong to a single active pair and every pixel's
    bistatic delay must fall inside every record's time window. Linear
    interpolation is the default; ``interp="sinc"`` selects a windowed
    sinc kernel for higher amplitude fidelity at off-sample delays.
    Parallelism is over pixel blocks and does not change the result.
    """
    if not records:
        raise ValueError("no records to back-project")
    pair = records[0].channel[:2]
    for rec in records:
        if rec.channel[:2] != pair:
            raise ValueError(
                f"records mix pairs {pair} and {rec.channel[:2]}; back-project one pair at a time"
            )
    l, k = pair
    if not scenario.pairing.is_active(l, k):
        raise ValueError(f"pair {pair} is not active in the association matrix")
    try:
        interpolate = _INTERPOLATORS[interp]
    except KeyError:
        raise ValueError(f"unknown interpolation {interp!r}; use 'linear' or 'sinc'") from None

    x, y = grid.pixel_coords()
    term_tx, term_rx = scenario.terminals[l], scenario.terminals[k]
    omega = 2.0 * math.pi * scenario.f0

    def fill(row0: int, row1: int) -> np.ndarray:
        xs, ys = x[row0:row1], y[row0:row1]
        out = np.zeros(xs.shape, dtype=complex)
        for rec in records:
            tx_el = term_tx.tx_elements[rec.channel[2]]
            rx_el = term_rx.rx_elements[rec.channel[3]]
            tau = (
                np.hypot(xs - tx_el.x, ys - tx_el.y)
                + np.hypot(rx_el.x - xs, rx_el.y - ys)
            ) / SPEED_OF_LIGHT
            _check_window(rec, tau, xs.shape, row0)
            vals = interpolate(rec, tau.ravel()).reshape(tau.shape)
            out += vals * np.exp(1j * omega * tau)
        return out

    nx = grid.size[0]
    if workers <= 1 or nx == 1:
        pixels = fill(0, nx)
    else:
        n_chunks = min(workers, nx)
        bounds = np.linspace(0, nx, n_chunks + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: fill(b[0], b[1]), zip(bounds[:-1], bounds[1:])))
        pixels = np.concatenate(parts, axis=0)
    return ComplexImage(grid=grid, pixels=pixels, provenance=(l, k))


def pair_images(
    records: list[SignalRecord],
    scenario: Scenario,
    grid: ImageGrid,
    workers: int = 1,
    interp: str = "linear",
) -> list[ComplexImage]:
    """Back-project each Tx-Rx pair present in ``records`` separately,
    preserving first-appearance pair order."""
    groups: dict[tuple[int, int], list[SignalRecord]] = {}
    for rec in records:
        groups.setdefault(rec.channel[:2], []).append(rec)
    return [
        backproject(recs, scenario, grid, workers=workers, interp=interp)
        for recs in groups.values()
    ]


def point_spread(
    scenario: Scenario,
    target: Vec2,
    grid: ImageGrid,
    workers: int = 1,
    interp: str = "linear",
) -> ComplexImage:
    """Point-spread response of the full acquisition: the fused image of
    a unit probe target at ``target``.

    The scenario's own targets and noise are replaced by the single
    noiseless probe; synthesis, per-pair back-projection and coherent
    multistatic fusion then run end to end.
    """
    from .fusion import fuse_coherent

    probe = replace(
        scenario,
        targets=(PointTarget(position=target, reflectivity=1.0 + 0.0j),),
        noise_power=0.0,
    )
    window = suggest_window(probe, grid)
    records = synthesize(probe, window, fs=default_sample_rate(probe.bandwidth))
    images = pair_images(records, probe, grid, workers=workers, interp=interp)
    return fuse_coherent(images)


def default_grid(
    scenario: Scenario,
    center: Vec2 | None = None,
    cells_per_rho: int = 4,
    margin_cells: int = 24,
) -> ImageGrid:
    """Grid sized from the predicted resolution: spacing is the finest
    finite predicted rho divided by ``cells_per_rho``, centered on the
    target bounding box padded by ``margin_cells`` pixels per side."""
    if not scenario.targets:
        raise ValueError("cannot size a default grid without targets")
    if center is None:
        xs = [t.position.x for t in scenario.targets]
        ys = [t.position.y for t in scenario.targets]
        lo = Vec2(min(xs), min(ys))
        hi = Vec2(max(xs), max(ys))
    else:
        lo = hi = center
    ref = Vec2((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0)
    est = predicted_resolution(coverage_region(scenario, ref, n_freq=16))
    rho = min(est.rho_x, est.rho_y)
    if math.isinf(rho):
        raise ValueError("acquisition has no finite predicted resolution; pass an explicit grid")
    s = rho / cells_per_rho
    nx = int(math.ceil((hi.x - lo.x) / s)) + 2 * margin_cells + 1
    ny = int(math.ceil((hi.y - lo.y) / s)) + 2 * margin_cells + 1
    origin = Vec2(ref.x - s * (nx - 1) / 2.0, ref.y - s * (ny - 1) / 2.0)
    return ImageGrid(origin=origin, spacing=(s, s), size=(nx, ny))


# --- exports ----------------------------------------------------------------

def export_image_csv(image: ComplexImage, path) -> None:
    """Write pixels as (x, y, re, im) rows, x-major."""
    xs, ys = image.grid.x_coords, image.grid.y_coords
    with open(path, "w") as fh:
        fh.write("x_m,y_m,re,im\n")
        for i, xv in enumerate(xs):
            for j, yv in enumerate(ys):
                v = image.pixels[i, j]
                fh.write(f"{xv:.9g},{yv:.9g},{v.real:.9g},{v.imag:.9g}\n")


def export_image_pgm(image: ComplexImage, path, dynamic_range_db: float = 40.0) -> None:
    """8-bit PGM raster of 20*log10|I| relative to the image peak,
    clipped to the given dynamic range. A derived view only; numeric
    consumers should read the CSV export instead."""
    mag = image.magnitude
    peak = mag.max()
    if peak == 0.0:
        db = np.full(mag.shape, -dynamic_range_db)
    else:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(mag / peak)
    scaled = np.clip((db + dynamic_range_db) / dynamic_range_db, 0.0, 1.0)
    byte = np.round(255.0 * scaled).astype(np.uint8)
    # PGM rows scan top-to-bottom: emit decreasing y, x left-to-right
    raster = byte.T[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{raster.shape[1]} {raster.shape[0]}\n255\n".encode())
        fh.write(raster.tobytes())
