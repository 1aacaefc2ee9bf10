import math

import numpy as np
import pytest

from gapdiamond.core import GeometryError, Layer, LayerStack, Polarization, UnguidedError
from gapdiamond.modes2d import (
    CrossSection,
    IndexRect,
    effective_area,
    effective_index_method,
    effective_permittivity,
    field_ratio_at_point,
    ridge_cross_section,
    ring_mode_volume,
    solve_fundamental_2d,
    write_field_csv,
)
from gapdiamond.slab import find_guided_modes

LAMBDA = 637.0


def uniform_section(n, size_nm, pitch_nm):
    return CrossSection(
        rectangles=(),
        background_n=n,
        x_min_nm=-size_nm / 2,
        x_max_nm=size_nm / 2,
        y_min_nm=-size_nm / 2,
        y_max_nm=size_nm / 2,
        pitch_nm=pitch_nm,
    )


class TestCrossSection:
    def test_rectangle_outside_domain_rejected(self):
        with pytest.raises(GeometryError):
            CrossSection(
                rectangles=(IndexRect("big", 2.0, -600, 600, 0, 100),),
                background_n=1.0,
                x_min_nm=-500,
                x_max_nm=500,
                y_min_nm=-500,
                y_max_nm=500,
                pitch_nm=10.0,
            )

    def test_extent_must_be_pitch_multiple(self):
        with pytest.raises(GeometryError):
            CrossSection(
                rectangles=(),
                background_n=1.0,
                x_min_nm=0,
                x_max_nm=505,
                y_min_nm=0,
                y_max_nm=500,
                pitch_nm=10.0,
            )

    def test_later_rectangle_overrides(self):
        cs = CrossSection(
            rectangles=(
                IndexRect("lower", 2.0, -100, 100, -100, 100),
                IndexRect("upper", 3.0, -50, 50, -50, 50),
            ),
            background_n=1.0,
            x_min_nm=-200,
            x_max_nm=200,
            y_min_nm=-200,
            y_max_nm=200,
            pitch_nm=10.0,
        )
        assert cs.index_at(0, 0) == 3.0
        assert cs.index_at(80, 0) == 2.0
        assert cs.index_at(150, 150) == 1.0

    def test_ridge_builder_geometry(self):
        cs = ridge_cross_section(
            core_width_nm=300, core_height_nm=120, gap_nm=4.7, substrate_etch_nm=120, pitch_nm=5
        )
        assert cs.index_at(0.0, -60.0) == 2.4  # pedestal
        assert cs.index_at(400.0, -60.0) == 1.0  # etched away
        assert cs.index_at(0.0, 2.0) == 1.0  # inside the air gap
        assert cs.index_at(0.0, 60.0) == 3.3  # core
        assert cs.cladding_bound() == 2.4


class TestEffectivePermittivity:
    def test_uniform_region_untouched(self):
        cs = uniform_section(2.0, 400.0, 10.0)
        for pol in (Polarization.TE, Polarization.TM):
            eps = effective_permittivity(cs, pol)
            assert np.allclose(eps, 4.0)

    def test_interface_cell_averages_by_polarization(self):
        # Vertical interface at x = 0 between n=1 and n=3; pitch 10 with a
        # cell boundary at 0, so every cell is pure and away from edges the
        # two polarizations agree; shift the interface by half a cell and
        # TE (harmonic across x) must dip below TM (arithmetic across x).
        cs = CrossSection(
            rectangles=(IndexRect("right", 3.0, 5.0, 200.0, -200.0, 200.0),),
            background_n=1.0,
            x_min_nm=-200,
            x_max_nm=200,
            y_min_nm=-200,
            y_max_nm=200,
            pitch_nm=10.0,
        )
        te = effective_permittivity(cs, Polarization.TE)
        tm = effective_permittivity(cs, Polarization.TM)
        j = te.shape[0] // 2
        i = np.argmax(np.abs(np.diff(tm[j])) > 0)  # first mixed cell
        mixed_te = te[j, i + 1]
        mixed_tm = tm[j, i + 1]
        assert mixed_tm == pytest.approx(0.5 * (1.0 + 9.0))
        assert mixed_te == pytest.approx(2.0 / (1.0 + 1.0 / 9.0))
        assert mixed_te < mixed_tm


class TestSolveFundamental2D:
    def test_box_mode_approaches_background_from_below(self):
        values = []
        for size in (600.0, 1200.0):
            cs = uniform_section(2.0, size, 10.0)
            mode = solve_fundamental_2d(cs, LAMBDA, Polarization.TE, require_guided=False)
            assert mode.n_eff < 2.0
            values.append(mode.n_eff)
        assert values[1] > values[0]

    def test_uniform_section_is_reported_unguided(self):
        cs = uniform_section(2.0, 600.0, 10.0)
        with pytest.raises(UnguidedError):
            solve_fundamental_2d(cs, LAMBDA, Polarization.TE)

    @pytest.mark.parametrize("pol", (Polarization.TE, Polarization.TM))
    def test_wide_ridge_bracketed_by_slab_indices(self, pol, wide_ridge_section, request):
        mode = request.getfixturevalue("wide_ridge_te" if pol is Polarization.TE else "wide_ridge_tm")
        slab = LayerStack((Layer("air", 1.0), Layer("GaP", 3.3, 120.0), Layer("diamond", 2.4)))
        upper = find_guided_modes(slab, LAMBDA, pol)[0].n_eff
        assert 2.4 < mode.n_eff < upper

    def test_normalization_and_boundary_decay(self, wide_ridge_te):
        mode = wide_ridge_te
        total = float(np.sum(mode.field**2)) * mode.pitch_nm**2
        assert total == pytest.approx(1.0, rel=1e-12)
        edge = np.concatenate([mode.field[0], mode.field[-1], mode.field[:, 0], mode.field[:, -1]])
        assert np.max(np.abs(edge)) < 1e-6 * np.max(np.abs(mode.field))

    def test_eigen_residual_dimensionless(self, wide_ridge_te):
        # residual was tracked against |theta|; in units of k0^2 it is tiny
        k0 = 2 * math.pi / LAMBDA
        assert wide_ridge_te.residual / k0**2 < 1e-6

    def test_mirror_symmetry(self, wide_ridge_te):
        intensity = wide_ridge_te.intensity
        asymmetry = np.max(np.abs(intensity - intensity[:, ::-1]))
        assert asymmetry < 1e-6 * np.max(intensity)

    def test_determinism_bit_identical(self):
        cs = ridge_cross_section(core_width_nm=300, core_height_nm=120, pitch_nm=20, padding_nm=600)
        a = solve_fundamental_2d(cs, LAMBDA, Polarization.TE)
        b = solve_fundamental_2d(cs, LAMBDA, Polarization.TE)
        assert a.n_eff == b.n_eff
        assert np.array_equal(a.field, b.field)

    def test_second_order_convergence(self):
        values = {}
        for pitch in (20.0, 10.0, 5.0):
            cs = ridge_cross_section(core_width_nm=1000, core_height_nm=120, pitch_nm=pitch, padding_nm=1000)
            values[pitch] = solve_fundamental_2d(cs, LAMBDA, Polarization.TE).n_eff
        ratio = (values[20.0] - values[10.0]) / (values[10.0] - values[5.0])
        assert 3.0 <= ratio <= 5.0


class TestEffectiveIndexMethod:
    def test_horizontally_uniform_structure_equals_slab(self):
        cs = CrossSection(
            rectangles=(
                IndexRect("GaP", 3.3, -500, 500, 0, 120),
                IndexRect("diamond", 2.4, -500, 500, -1000, 0),
            ),
            background_n=1.0,
            x_min_nm=-500,
            x_max_nm=500,
            y_min_nm=-1000,
            y_max_nm=1120,
            pitch_nm=10.0,
        )
        slab = LayerStack((Layer("air", 1.0), Layer("GaP", 3.3, 120.0), Layer("diamond", 2.4)))
        for pol in (Polarization.TE, Polarization.TM):
            expected = find_guided_modes(slab, LAMBDA, pol)[0].n_eff
            assert effective_index_method(cs, LAMBDA, pol) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("pol", (Polarization.TE, Polarization.TM))
    def test_wide_ridge_within_five_percent(self, pol, wide_ridge_section, request):
        mode = request.getfixturevalue("wide_ridge_te" if pol is Polarization.TE else "wide_ridge_tm")
        estimate = effective_index_method(wide_ridge_section, LAMBDA, pol)
        assert abs(estimate - mode.n_eff) / mode.n_eff < 0.05

    def test_joint_unguided_classification_near_cutoff(self):
        # A 30 nm membrane is below the asymmetric slab cutoff: both the
        # reduction and the direct solve must call it unguided.
        cs = ridge_cross_section(core_width_nm=100, core_height_nm=30, pitch_nm=10, padding_nm=600)
        with pytest.raises(UnguidedError):
            effective_index_method(cs, LAMBDA, Polarization.TE)
        with pytest.raises(UnguidedError):
            solve_fundamental_2d(cs, LAMBDA, Polarization.TE)

    def test_joint_guided_classification(self, wide_ridge_section, wide_ridge_te):
        estimate = effective_index_method(wide_ridge_section, LAMBDA, Polarization.TE)
        assert estimate > 2.4 and wide_ridge_te.n_eff > 2.4


class TestEffectiveArea:
    def test_uniform_field_gives_geometric_area(self):
        cs = uniform_section(2.0, 400.0, 10.0)
        mode = solve_fundamental_2d(cs, LAMBDA, Polarization.TE, require_guided=False)
        flat = np.ones_like(mode.field)
        area = float(np.sum(mode.eps_eff * flat**2) * mode.pitch_nm**2 / (mode.eps_eff * flat**2).max())
        assert area == pytest.approx(400.0**2, rel=1e-12)

    def test_refinement_changes_area_less_than_two_percent(self):
        areas = {}
        for pitch in (10.0, 5.0):
            cs = ridge_cross_section(
                core_width_nm=300, core_height_nm=120, substrate_etch_nm=120, pitch_nm=pitch, padding_nm=1000
            )
            areas[pitch] = effective_area(solve_fundamental_2d(cs, LAMBDA, Polarization.TM))
        assert abs(areas[5.0] - areas[10.0]) / areas[5.0] < 0.02


class TestRingModeVolume:
    def test_volume_linear_in_diameter(self, ring_mode_tm_coarse):
        v1 = ring_mode_volume(ring_mode_tm_coarse, 2.5)
        v2 = ring_mode_volume(ring_mode_tm_coarse, 5.0)
        assert v2.v_nm3 == pytest.approx(2.0 * v1.v_nm3, rel=1e-12)
        assert v2.v_norm == pytest.approx(2.0 * v1.v_norm, rel=1e-12)

    def test_normalized_volume_invariant_under_field_rescaling(self, ring_mode_tm_coarse):
        # the definition is a ratio of quadratic forms: scale-free
        mode = ring_mode_tm_coarse
        scaled_area = effective_area(mode)  # uses the stored normalized field
        weighted = mode.eps_eff * (3.0 * mode.field) ** 2
        manual = float(np.sum(weighted) * mode.pitch_nm**2 / weighted.max())
        assert manual == pytest.approx(scaled_area, rel=1e-12)

    def test_reference_index_is_gap(self, ring_mode_tm_coarse):
        assert ring_mode_volume(ring_mode_tm_coarse, 2.5).n_reference == 3.3


class TestFieldRatioAtPoint:
    def test_identity_at_peak(self, ring_mode_tm_coarse):
        assert field_ratio_at_point(ring_mode_tm_coarse, ring_mode_tm_coarse.peak_point_nm) == pytest.approx(1.0)

    def test_te_nv_point_in_unit_interval(self, wide_ridge_te):
        x_nv, _ = wide_ridge_te.max_intensity_at_y(-20.0)
        ratio = field_ratio_at_point(wide_ridge_te, (x_nv, -20.0))
        assert 0.0 < ratio < 1.0

    def test_tm_couples_more_strongly_than_te(self, wide_ridge_te, wide_ridge_tm):
        ratios = {}
        for mode in (wide_ridge_te, wide_ridge_tm):
            x_nv, _ = mode.max_intensity_at_y(-20.0)
            ratios[mode.polarization] = field_ratio_at_point(mode, (x_nv, -20.0))
        assert ratios[Polarization.TM] > ratios[Polarization.TE]

    def test_far_cladding_ratio_negligible(self, wide_ridge_te):
        mode = wide_ridge_te
        assert field_ratio_at_point(mode, (0.0, mode.y_nm[-1] - mode.pitch_nm)) < 1e-4

    def test_point_outside_grid_rejected(self, wide_ridge_te):
        with pytest.raises(GeometryError):
            field_ratio_at_point(wide_ridge_te, (1e6, 0.0))


class TestFieldCsv:
    def test_rows_cover_grid(self, tmp_path, ring_mode_tm_coarse):
        path = tmp_path / "field.csv"
        write_field_csv(ring_mode_tm_coarse, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x_nm,y_nm,intensity"
        assert len(lines) == 1 + ring_mode_tm_coarse.field.size
