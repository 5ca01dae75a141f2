import math
from dataclasses import replace

import numpy as np
import pytest

from netrad.scene import ImageGrid, Vec2
from netrad.imaging import ComplexImage, pair_images
from netrad.fusion import fuse_incoherent
from netrad.metrics import (
    compute_metrics,
    islr,
    measure_resolution,
    peak_snr,
    pslr,
)
from netrad.synth import suggest_window, synthesize
from helpers import TARGET, column_grid, lane_scenario


def sinc2d_image(width, spacing, half_pixels, center_offset=(0.0, 0.0)):
    """Separable |sinc| test image with known Rayleigh width per axis."""
    n = 2 * half_pixels + 1
    grid = ImageGrid(
        Vec2(-half_pixels * spacing + center_offset[0], -half_pixels * spacing + center_offset[1]),
        (spacing, spacing),
        (n, n),
    )
    x, y = grid.pixel_coords()
    pixels = np.sinc((x - center_offset[0]) / width) * np.sinc((y - center_offset[1]) / width)
    return ComplexImage(grid=grid, pixels=pixels.astype(complex), provenance=(0, 0))


class TestMeasureResolution:
    def test_exact_sinc_width(self):
        w = 0.30
        image = sinc2d_image(w, w / 10, 40)
        assert measure_resolution(image, "x") == pytest.approx(w, rel=0.02)
        assert measure_resolution(image, "y") == pytest.approx(w, rel=0.02)

    def test_converges_with_grid_refinement(self):
        w = 0.30
        errors = []
        for divider in (4, 8, 16):
            image = sinc2d_image(w, w / divider, 4 * divider)
            errors.append(abs(measure_resolution(image, "x") - w))
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] < 0.01 * w

    def test_off_grid_peak_is_refined(self):
        w = 0.30
        image = sinc2d_image(w, w / 8, 32, center_offset=(0.013, -0.007))
        assert measure_resolution(image, "x") == pytest.approx(w, rel=0.03)

    def test_boundary_peak_rejected(self):
        grid = ImageGrid(Vec2(0, 0), (0.1, 0.1), (5, 5))
        pixels = np.zeros((5, 5), dtype=complex)
        pixels[0, 2] = 1.0
        with pytest.raises(ValueError, match="boundary"):
            measure_resolution(ComplexImage(grid=grid, pixels=pixels, provenance=(0, 0)), "x")

    def test_unresolved_mainlobe_rejected(self):
        grid = ImageGrid(Vec2(0, 0), (0.1, 0.1), (5, 5))
        pixels = np.zeros((5, 5), dtype=complex)
        pixels[2, 2] = 1.0
        with pytest.raises(ValueError, match="unresolved|outside the grid"):
            measure_resolution(ComplexImage(grid=grid, pixels=pixels, provenance=(0, 0)), "x")


class TestPslr:
    def test_sinc_first_sidelobe(self):
        # first sidelobe of a sinc: 20*log10(0.21723) = -13.26 dB
        image = sinc2d_image(0.30, 0.30 / 16, 16 * 5)
        assert pslr(image) == pytest.approx(-13.26, abs=0.2)

    def test_single_pixel_no_sidelobes(self):
        grid = ImageGrid(Vec2(0, 0), (0.1, 0.1), (7, 7))
        pixels = np.zeros((7, 7), dtype=complex)
        pixels[3, 3] = 2.0
        assert pslr(ComplexImage(grid=grid, pixels=pixels, provenance=(0, 0))) == -math.inf

    def test_injected_sidelobe_sets_level_exactly(self):
        image = sinc2d_image(0.30, 0.30 / 16, 16 * 5)
        pixels = image.pixels.copy()
        spike = 10 ** (-8.0 / 20.0)
        replaced = abs(pixels[10, 10]) ** 2
        pixels[10, 10] = spike  # far from the mainlobe
        spiked = ComplexImage(grid=image.grid, pixels=pixels, provenance=(0, 0))
        assert pslr(spiked) == pytest.approx(-8.0, abs=1e-9)
        # and ISLR rises by exactly the injected energy:
        # islr = 10 log10(E_out / E_in) with E_out gaining spike^2 - replaced
        ratio = 10 ** (islr(image) / 10)
        mag2 = np.abs(image.pixels) ** 2
        e_in = mag2.sum() / (1 + ratio)
        e_out = mag2.sum() - e_in
        expect = 10 * math.log10((e_out + spike ** 2 - replaced) / e_in)
        assert islr(spiked) == pytest.approx(expect, abs=1e-9)

    def test_mainlobe_covering_whole_image_rejected(self):
        image = sinc2d_image(0.30, 0.30 / 10, 4)  # grid ends inside the mainlobe
        with pytest.raises(ValueError):
            pslr(image)


class TestIslr:
    def test_single_pixel_sentinel(self):
        grid = ImageGrid(Vec2(0, 0), (0.1, 0.1), (7, 7))
        pixels = np.zeros((7, 7), dtype=complex)
        pixels[3, 3] = 2.0
        assert islr(ComplexImage(grid=grid, pixels=pixels, provenance=(0, 0))) == -math.inf

    def test_uniform_background_grows_with_area(self):
        # near-uniform magnitude: the out-of-lobe energy scales with area
        values = []
        for half in (20, 40):
            grid = ImageGrid(Vec2(-half * 0.1, -half * 0.1), (0.1, 0.1), (2 * half + 1,) * 2)
            pixels = np.full(grid.size, 1.0, dtype=complex)
            x, y = grid.pixel_coords()
            pixels += np.exp(-(x ** 2 + y ** 2) / (2 * 0.2 ** 2))  # resolved peak
            values.append(islr(ComplexImage(grid=grid, pixels=pixels, provenance=(0, 0))))
        assert values[0] > 0
        assert values[1] > values[0]

    def test_sinc_islr_is_negative(self):
        # most energy of a 2D sinc sits in the mainlobe
        image = sinc2d_image(0.30, 0.30 / 16, 16 * 5)
        assert islr(image) < -5.0


class TestScaleInvariance:
    @pytest.mark.parametrize("scale", [3.0, 1e-6 * (2.0 - 1.0j), 1e6j])
    def test_metrics_unchanged_by_complex_scaling(self, scale):
        image = sinc2d_image(0.30, 0.30 / 12, 12 * 4)
        scaled = ComplexImage(
            grid=image.grid, pixels=scale * image.pixels, provenance=(0, 0)
        )
        assert measure_resolution(scaled, "x") == pytest.approx(
            measure_resolution(image, "x"), rel=1e-9
        )
        assert pslr(scaled) == pytest.approx(pslr(image), abs=1e-9)
        assert islr(scaled) == pytest.approx(islr(image), abs=1e-9)


class TestPeakSnr:
    def test_noiseless_sentinel(self):
        # compactly supported lobe: background is exactly zero
        grid = ImageGrid(Vec2(-2.0, -2.0), (0.1, 0.1), (41, 41))
        pixels = np.zeros((41, 41), dtype=complex)
        pixels[18:23, 18:23] = np.outer(
            [0.3, 0.8, 1.0, 0.8, 0.3], [0.3, 0.8, 1.0, 0.8, 0.3]
        )
        image = ComplexImage(grid=grid, pixels=pixels, provenance=(0, 0))
        assert peak_snr(image, Vec2(0, 0), cell=0.05) == math.inf

    def test_doubling_noise_drops_3db(self):
        sc = lane_scenario(n_terminals=1, m_rx=1, noise_power=0.2)
        grid = column_grid(0.0, 12.0, 28.0, 0.075)
        window = suggest_window(sc, grid)
        drops = []
        for trial in range(100):
            a = replace(sc, rng_seed=trial)
            b = replace(sc, noise_power=0.4, rng_seed=trial)
            im_a = fuse_incoherent(pair_images(synthesize(a, window), a, grid))
            im_b = fuse_incoherent(pair_images(synthesize(b, window), b, grid))
            drops.append(
                peak_snr(im_a, TARGET, cell=0.3) - peak_snr(im_b, TARGET, cell=0.3)
            )
        assert np.mean(drops) == pytest.approx(3.0, abs=0.5)

    def test_truth_outside_grid_rejected(self):
        image = sinc2d_image(0.30, 0.30 / 8, 32)
        with pytest.raises(ValueError, match="outside"):
            peak_snr(image, Vec2(100.0, 0.0), cell=0.3)

    def test_too_few_background_pixels_rejected(self):
        image = sinc2d_image(0.30, 0.30 / 8, 32)
        with pytest.raises(ValueError, match="background"):
            peak_snr(image, Vec2(0, 0), cell=10.0)


class TestComputeMetrics:
    def test_aggregates_all_figures(self):
        image = sinc2d_image(0.30, 0.30 / 16, 16 * 5)
        m = compute_metrics(image)
        assert m.rho_x_meas == pytest.approx(0.30, rel=0.02)
        assert m.rho_y_meas == pytest.approx(0.30, rel=0.02)
        assert m.pslr_db == pytest.approx(-13.26, abs=0.2)
        assert m.peak_snr_db is None
        assert m.peak_pos.x == pytest.approx(0.0, abs=1e-3)
        assert abs(m.peak_val) == pytest.approx(1.0, rel=1e-6)

    def test_serialization_maps_infinities_to_null(self):
        grid = ImageGrid(Vec2(-0.3, -0.3), (0.1, 0.1), (7, 7))
        pixels = np.zeros((7, 7), dtype=complex)
        pixels[3, 3] = 1.0
        pixels[3, 2] = pixels[3, 4] = 0.9
        pixels[2, 3] = pixels[4, 3] = 0.9
        pixels[2, 2] = pixels[4, 4] = 0.5
        image = ComplexImage(grid=grid, pixels=pixels, provenance=(0, 0))
        m = compute_metrics(image)
        doc = m.to_dict()
        assert doc["pslr_db"] is not None or m.pslr_db == -math.inf
        if math.isinf(m.islr_db):
            assert doc["islr_db"] is None
