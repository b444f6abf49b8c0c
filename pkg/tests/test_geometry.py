"""Grid construction, steering vectors, and the near-field transmission vector."""

import cmath
import math

import numpy as np
import pytest

from trisradar.geometry import (SPEED_OF_LIGHT, TWO_PI, UpaSpec, make_grid, make_tris,
                                nearfield_w, steering_matrix, steering_vector,
                                upa_positions)


class TestMakeGrid:
    def test_default_scan_grid(self):
        grid = make_grid(20, 20, -0.5, 0.05)
        assert grid.n_bins == 400
        assert grid.nu_x[0] == -0.5
        assert grid.nu_x[-1] == pytest.approx(0.45)
        assert grid.nu_y[-1] == pytest.approx(0.45)

    def test_single_broadside_bin(self):
        grid = make_grid(1, 1, 0.0, 0.05)
        assert grid.n_bins == 1
        assert grid.bin_freqs(0) == (0.0, 0.0)

    @pytest.mark.parametrize("args", [
        (2, 2, -0.5, 1.0),   # second value hits +0.5
        (3, 3, 0.4, 0.2),    # runs past +0.5
        (2, 2, -0.6, 0.05),  # starts below -0.5
    ])
    def test_rejects_values_outside_halfopen_interval(self, args):
        with pytest.raises(ValueError, match="outside"):
            make_grid(*args)

    def test_rejects_degenerate_axes(self):
        with pytest.raises(ValueError):
            make_grid(0, 5, 0.0, 0.05)
        with pytest.raises(ValueError):
            make_grid(5, 5, 0.0, -0.01)

    def test_values_strictly_increasing(self):
        grid = make_grid(7, 4, -0.3, 0.1)
        assert np.all(np.diff(grid.nu_x) > 0)
        assert np.all(np.diff(grid.nu_y) > 0)

    def test_bin_roundtrip_is_identity(self):
        grid = make_grid(5, 7, -0.25, 0.07)
        for m in range(grid.n_bins):
            i, j = grid.bin_coords(m)
            assert grid.bin_index(i, j) == m
        seen = {grid.bin_index(i, j) for i in range(5) for j in range(7)}
        assert seen == set(range(35))

    def test_bin_bounds_checked(self):
        grid = make_grid(3, 3, -0.1, 0.05)
        with pytest.raises(ValueError):
            grid.bin_coords(9)
        with pytest.raises(ValueError):
            grid.bin_index(3, 0)

    def test_freq_pairs_match_bin_freqs(self):
        grid = make_grid(4, 6, -0.2, 0.05)
        gx, gy = grid.freq_pairs()
        for m in range(grid.n_bins):
            assert (gx[m], gy[m]) == grid.bin_freqs(m)


class TestSteeringVector:
    def test_broadside_all_ones(self):
        a = steering_vector(UpaSpec(4, 4), 0.0, 0.0)
        assert a.shape == (16,)
        np.testing.assert_allclose(a, np.ones(16), atol=1e-15)

    def test_endfire_two_element(self):
        a = steering_vector(UpaSpec(2, 1), 0.5, 0.0)
        np.testing.assert_allclose(a, [1.0, -1.0], atol=1e-12)

    def test_norm_squared_equals_element_count(self):
        a = steering_vector(UpaSpec(3, 3), 0.25, -0.25)
        assert np.vdot(a, a).real == pytest.approx(9.0, rel=1e-12)

    def test_unit_modulus_and_first_element(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            nu = rng.uniform(-0.5, 0.5, size=2)
            a = steering_vector(UpaSpec(5, 3), nu[0], nu[1])
            np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)
            assert a[0] == pytest.approx(1.0)

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            nu = rng.uniform(-0.5, 0.5, size=2)
            a_pos = steering_vector(UpaSpec(4, 6), nu[0], nu[1])
            a_neg = steering_vector(UpaSpec(4, 6), -nu[0], -nu[1])
            np.testing.assert_allclose(a_pos.conj(), a_neg, atol=1e-12)

    def test_rejects_out_of_range_frequency(self):
        with pytest.raises(ValueError):
            steering_vector(UpaSpec(2, 2), 0.51, 0.0)

    def test_matrix_matches_vector_rows(self):
        spec = UpaSpec(3, 4)
        nus = np.array([[-0.4, 0.2], [0.0, 0.0], [0.25, -0.3]])
        mat = steering_matrix(spec, nus[:, 0], nus[:, 1])
        for row, (nx, ny) in zip(mat, nus):
            np.testing.assert_allclose(row, steering_vector(spec, nx, ny), atol=1e-12)

    def test_element_ordering_is_y_major(self):
        # n = q * n_x + p: moving one step in x changes phase by 2*pi*nu_x
        a = steering_vector(UpaSpec(3, 2), 0.1, 0.3)
        assert a[1] == pytest.approx(cmath.exp(1j * TWO_PI * 0.1))
        assert a[3] == pytest.approx(cmath.exp(1j * TWO_PI * 0.3))


class TestUpaSpec:
    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            UpaSpec(0, 4)
        with pytest.raises(ValueError):
            UpaSpec(4, 4, spacing=0.0)

    def test_positions_centered_lattice(self):
        pos = upa_positions(UpaSpec(3, 2), pitch=0.5)
        assert pos.shape == (6, 2)
        np.testing.assert_allclose(pos.mean(axis=0), [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(sorted(set(pos[:, 0])), [-0.5, 0.0, 0.5])


class TestNearfieldW:
    def test_on_axis_element_closed_form(self):
        # single element at the surface center, feed at 20 wavelengths
        tris = make_tris(UpaSpec(1, 1))
        lam = tris.wavelength
        d = 20.0 * lam
        expected = ((lam / 2) ** 2 / d**2) * (1 / (TWO_PI * d) - 1j / lam) * cmath.exp(1j * TWO_PI * d / lam)
        np.testing.assert_allclose(tris.w[0], expected, rtol=1e-12)
        expected_mag = (1 / 1600.0) * (1 / lam) * math.sqrt(1 / (40 * math.pi) ** 2 + 1)
        assert abs(tris.w[0]) == pytest.approx(expected_mag, rel=1e-12)

    def test_equidistant_elements_identical(self):
        tris = make_tris(UpaSpec(4, 4))
        radii = np.hypot(tris.positions[:, 0], tris.positions[:, 1])
        # the four corner elements share a radius
        corners = np.flatnonzero(np.isclose(radii, radii.max()))
        assert corners.size == 4
        vals = tris.w[corners]
        np.testing.assert_allclose(np.abs(vals), np.abs(vals[0]), rtol=1e-12)
        np.testing.assert_allclose(np.angle(vals), np.angle(vals[0]), rtol=1e-12)

    def test_full_vector_against_scalar_transcription(self):
        # independent elementwise evaluation of the diffraction formula
        tris = make_tris(UpaSpec(8, 8))
        lam = tris.wavelength
        for n in range(tris.n_elements):
            x, y = tris.positions[n]
            d = math.sqrt(tris.d_l**2 + x * x + y * y)
            cos_a = tris.d_l / d
            w_ref = (tris.d_x * tris.d_y * cos_a / d**2) \
                * complex(1.0 / (2.0 * math.pi * d), -1.0 / lam) \
                * cmath.exp(1j * 2.0 * math.pi * d / lam)
            assert abs(tris.w[n] - w_ref) <= 1e-12 * abs(w_ref)

    def test_magnitude_decays_with_radius(self):
        tris = make_tris(UpaSpec(9, 9))
        radii = np.hypot(tris.positions[:, 0], tris.positions[:, 1])
        order = np.argsort(radii)
        mags = np.abs(tris.w[order])
        assert np.all(np.diff(mags) <= 1e-15)
        assert np.argmax(np.abs(tris.w)) == order[0]

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            make_tris(UpaSpec(2, 2), d_l_wavelengths=0.0)
        tris = make_tris(UpaSpec(2, 2))
        bad = type(tris)(spec=tris.spec, wavelength=tris.wavelength, d_x=tris.d_x,
                         d_y=tris.d_y, d_l=-1.0, positions=tris.positions, w=tris.w)
        with pytest.raises(ValueError):
            nearfield_w(bad)

    def test_wavelength_from_carrier(self):
        tris = make_tris(UpaSpec(2, 2), frequency_hz=28e9)
        assert tris.wavelength == pytest.approx(SPEED_OF_LIGHT / 28e9)
        # lattice pitch equals half a wavelength
        assert tris.positions[1, 0] - tris.positions[0, 0] == pytest.approx(tris.wavelength / 2)

    def test_nearfield_w_matches_stored_vector(self):
        tris = make_tris(UpaSpec(5, 3))
        np.testing.assert_allclose(nearfield_w(tris), tris.w, rtol=1e-15)
