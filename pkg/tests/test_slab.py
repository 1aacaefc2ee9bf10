import math

import numpy as np
import pytest

from gapdiamond.core import Layer, LayerStack, Polarization, StackError, UnguidedError
from gapdiamond.slab import (
    MembraneStackTemplate,
    dispersion_mismatch,
    field_profile,
    find_guided_modes,
    mode_overlap,
    penetration_ratio,
    ratio_curve,
    region_intensity,
)
from conftest import symmetric_mode_count_oracle, symmetric_slab_neff_oracle

LAMBDA = 637.0
POLS = (Polarization.TE, Polarization.TM)


def symmetric_stack(n_core, n_clad, d_nm):
    return LayerStack((Layer("clad", n_clad), Layer("core", n_core, d_nm), Layer("clad", n_clad)))


class TestFindGuidedModes:
    @pytest.mark.parametrize("pol", POLS)
    def test_symmetric_120nm_gap_slab_has_two_modes(self, pol):
        # V = k0 d sqrt(n1^2 - n2^2) is about 3.72, so ceil(V/pi) = 2.
        modes = find_guided_modes(symmetric_stack(3.3, 1.0, 120.0), LAMBDA, pol)
        assert len(modes) == 2
        assert symmetric_mode_count_oracle(3.3, 1.0, 120.0, LAMBDA) == 2
        for mode in modes:
            oracle = symmetric_slab_neff_oracle(3.3, 1.0, 120.0, LAMBDA, pol, mode.mode_order)
            assert mode.n_eff == pytest.approx(oracle, abs=1e-9)

    def test_interior_equal_to_cladding_gives_empty_list(self):
        stack = LayerStack((Layer("clad", 2.4), Layer("core", 2.4, 200.0), Layer("clad", 2.4)))
        assert find_guided_modes(stack, LAMBDA, Polarization.TE) == []

    def test_fundamental_bounded_by_claddings(self):
        stack = LayerStack((Layer("air", 1.0), Layer("GaP", 3.3, 250.0), Layer("diamond", 2.4)))
        modes = find_guided_modes(stack, LAMBDA, Polarization.TE)
        assert modes
        for mode in modes:
            assert 2.4 < mode.n_eff < 3.3

    def test_modes_ordered_by_decreasing_n_eff_and_node_count(self):
        modes = find_guided_modes(symmetric_stack(3.3, 1.0, 400.0), LAMBDA, Polarization.TE)
        n_effs = [m.n_eff for m in modes]
        assert n_effs == sorted(n_effs, reverse=True)
        assert [m.mode_order for m in modes] == list(range(len(modes)))

    @pytest.mark.parametrize("pol", POLS)
    def test_dispersion_residual_small_at_roots(self, pol, gap_on_diamond_120):
        for mode in find_guided_modes(gap_on_diamond_120, LAMBDA, pol):
            residual = abs(float(dispersion_mismatch(mode.n_eff, mode.stack, LAMBDA, pol)[0]))
            assert residual < 1e-9

    @pytest.mark.parametrize("pol", POLS)
    def test_randomized_symmetric_stacks_match_analytic_oracle(self, pol):
        rng = np.random.default_rng(20127)
        checked = 0
        while checked < 25:
            n_clad = rng.uniform(1.0, 2.5)
            n_core = n_clad + rng.uniform(0.3, 4.0 - n_clad) if n_clad < 3.7 else n_clad + 0.3
            d = rng.uniform(50.0, 500.0)
            v = (2 * math.pi / (LAMBDA * 1e-9)) * d * 1e-9 * math.sqrt(n_core**2 - n_clad**2)
            if min(v / math.pi - math.floor(v / math.pi), math.ceil(v / math.pi) - v / math.pi) < 0.05:
                continue  # keep clear of cutoff degeneracies
            modes = find_guided_modes(symmetric_stack(n_core, n_clad, d), LAMBDA, pol)
            assert len(modes) == symmetric_mode_count_oracle(n_core, n_clad, d, LAMBDA)
            for mode in modes:
                oracle = symmetric_slab_neff_oracle(n_core, n_clad, d, LAMBDA, pol, mode.mode_order)
                assert mode.n_eff == pytest.approx(oracle, abs=1e-9)
            checked += 1


class TestFieldProfile:
    @pytest.mark.parametrize("pol", POLS)
    def test_cladding_tail_decays_ten_lengths(self, pol, gap_on_diamond_120):
        mode = find_guided_modes(gap_on_diamond_120, LAMBDA, pol)[0]
        decay_nm = 1e9 / mode.decay_bottom_per_m
        z_bottom = 120.0
        reference = math.sqrt(mode.intensity(np.array([z_bottom + 0.5]))[0])
        far = math.sqrt(mode.intensity(np.array([z_bottom + 10.0 * decay_nm]))[0])
        assert far < reference * math.e ** (-9.0)

    def test_tm_interface_conditions(self):
        template = MembraneStackTemplate()
        stack = template.stack(128.0, 4.7)
        mode = find_guided_modes(stack, LAMBDA, Polarization.TM)[0]
        n = [layer.n for layer in stack.layers]
        for k, z_if in enumerate(stack.interfaces_nm()):
            above, below = k, k + 1
            z = np.array([z_if * 1e-9])
            psi_a, dpsi_a = mode._eval_region(above, z)
            psi_b, dpsi_b = mode._eval_region(below, z)
            # tangential Ex = psi'/(k0 n^2) continuous; normal D = n^2 Ez continuous
            ex_a, ex_b = dpsi_a[0] / n[above] ** 2, dpsi_b[0] / n[below] ** 2
            assert ex_b == pytest.approx(ex_a, rel=1e-8)
            dz_a, dz_b = psi_a[0] * mode.n_eff, psi_b[0] * mode.n_eff
            assert dz_b == pytest.approx(dz_a, rel=1e-8)
            # Ez itself jumps by the permittivity ratio
            ez_a = mode.n_eff * psi_a[0] / n[above] ** 2
            ez_b = mode.n_eff * psi_b[0] / n[below] ** 2
            assert ez_b / ez_a == pytest.approx(n[above] ** 2 / n[below] ** 2, rel=1e-8)

    @pytest.mark.parametrize("pol", POLS)
    def test_continuity_at_every_interface(self, pol):
        stack = MembraneStackTemplate().stack(128.0, 4.7)
        mode = find_guided_modes(stack, LAMBDA, pol)[0]
        n = [layer.n for layer in stack.layers]
        eta = [1.0 if pol is Polarization.TE else 1.0 / ni**2 for ni in n]
        for k, z_if in enumerate(stack.interfaces_nm()):
            z = np.array([z_if * 1e-9])
            psi_a, dpsi_a = mode._eval_region(k, z)
            psi_b, dpsi_b = mode._eval_region(k + 1, z)
            assert abs(psi_a[0] - psi_b[0]) < 1e-8 * max(abs(psi_a[0]), abs(psi_b[0]), 1e-300)
            phi_a, phi_b = eta[k] * dpsi_a[0], eta[k + 1] * dpsi_b[0]
            assert abs(phi_a - phi_b) < 1e-8 * max(abs(phi_a), abs(phi_b), 1e-300)

    def test_te0_symmetric_profile_is_even_with_no_nodes(self):
        mode = find_guided_modes(symmetric_stack(3.3, 1.0, 120.0), LAMBDA, Polarization.TE)[0]
        assert mode.mode_order == 0
        profile = field_profile(mode, (-200.0, 320.0), 521)
        ey = profile.components["Ey"]
        assert np.all(ey > 0) or np.all(ey < 0)
        assert np.allclose(ey, ey[::-1], rtol=1e-6)

    def test_profile_window_validation(self, gap_on_diamond_120):
        mode = find_guided_modes(gap_on_diamond_120, LAMBDA, Polarization.TE)[0]
        with pytest.raises(Exception):
            field_profile(mode, (100.0, 100.0), 10)
        with pytest.raises(Exception):
            field_profile(mode, (0.0, 100.0), 1)


class TestRegionIntensity:
    @pytest.mark.parametrize("pol", POLS)
    def test_full_axis_integral_is_one(self, pol, gap_on_diamond_120):
        mode = find_guided_modes(gap_on_diamond_120, LAMBDA, pol)[0]
        decay_top_nm = 1e9 / mode.decay_top_per_m
        decay_bottom_nm = 1e9 / mode.decay_bottom_per_m
        total = region_intensity(mode, -12 * decay_top_nm, 120.0 + 12 * decay_bottom_nm)
        assert total == pytest.approx(1.0, abs=1e-7)

    def test_disjoint_regions_sum_to_union(self, gap_on_diamond_120):
        mode = find_guided_modes(gap_on_diamond_120, LAMBDA, Polarization.TM)[0]
        a = region_intensity(mode, -50.0, 60.0)
        b = region_intensity(mode, 60.0, 300.0)
        union = region_intensity(mode, -50.0, 300.0)
        assert a + b == pytest.approx(union, rel=1e-10)

    @pytest.mark.parametrize("pol", POLS)
    def test_thinner_membrane_leaks_more_into_diamond(self, pol):
        template = MembraneStackTemplate()
        values = {}
        for t in (128.0, 256.0):
            stack = template.stack(t)
            mode = find_guided_modes(stack, LAMBDA, pol)[0]
            z_bottom = stack.interfaces_nm()[-1]
            values[t] = region_intensity(mode, z_bottom, z_bottom + 100.0)
        assert values[128.0] > values[256.0]


class TestModeOverlap:
    @pytest.mark.parametrize("pol", POLS)
    def test_distinct_modes_are_orthogonal(self, pol):
        modes = find_guided_modes(symmetric_stack(3.3, 1.0, 400.0), LAMBDA, pol)
        assert len(modes) >= 2
        for i in range(len(modes)):
            for j in range(i + 1, len(modes)):
                assert abs(mode_overlap(modes[i], modes[j])) < 1e-6


class TestPenetrationRatio:
    @pytest.mark.parametrize("pol", POLS)
    def test_thinner_membrane_has_larger_ratio(self, pol):
        template = MembraneStackTemplate()
        r_thin = penetration_ratio(template.stack(128.0), LAMBDA, pol)
        r_thick = penetration_ratio(template.stack(256.0), LAMBDA, pol)
        assert r_thin > r_thick

    @pytest.mark.parametrize("pol", POLS)
    def test_gap_reduces_ratio(self, pol):
        template = MembraneStackTemplate()
        for t in (128.0, 256.0):
            gapless = penetration_ratio(template.stack(t, 0.0), LAMBDA, pol)
            gapped = penetration_ratio(template.stack(t, 4.7), LAMBDA, pol)
            assert gapped < gapless

    def test_tm_suffers_more_from_gap_than_te(self):
        template = MembraneStackTemplate()
        for t in (128.0, 200.0, 256.0):
            drop = {}
            for pol in POLS:
                gapless = penetration_ratio(template.stack(t, 0.0), LAMBDA, pol)
                gapped = penetration_ratio(template.stack(t, 4.7), LAMBDA, pol)
                drop[pol] = 1.0 - gapped / gapless
            assert drop[Polarization.TM] > drop[Polarization.TE]

    def test_zero_window_gives_zero(self):
        template = MembraneStackTemplate()
        assert penetration_ratio(template.stack(128.0), LAMBDA, Polarization.TE, window_nm=0.0) == 0.0

    def test_unguided_stack_raises(self):
        template = MembraneStackTemplate()
        with pytest.raises(UnguidedError):
            penetration_ratio(template.stack(5.0), LAMBDA, Polarization.TE)

    def test_requires_named_layers(self):
        stack = LayerStack((Layer("air", 1.0), Layer("GaP", 3.3, 120.0), Layer("substrate", 2.4)))
        with pytest.raises(StackError):
            penetration_ratio(stack, LAMBDA, Polarization.TE)

    def test_ratio_invariant_under_field_rescaling(self, gap_on_diamond_120):
        mode = find_guided_modes(gap_on_diamond_120, LAMBDA, Polarization.TE)[0]
        z_bottom = gap_on_diamond_120.interfaces_nm()[-1]

        def ratio_of(m):
            num = region_intensity(m, z_bottom, z_bottom + 100.0)
            den = region_intensity(m, 0.0, z_bottom)
            return math.sqrt(num / den)

        assert ratio_of(mode.scaled(37.5)) == pytest.approx(ratio_of(mode), rel=1e-12)


class TestRatioCurve:
    def test_single_point_curve_matches_direct_ratio(self):
        template = MembraneStackTemplate()
        curve = ratio_curve([150.0], 4.7, LAMBDA, Polarization.TE, template=template)
        direct = penetration_ratio(template.stack(150.0, 4.7), LAMBDA, Polarization.TE)
        assert curve.ratios == (pytest.approx(direct, rel=1e-12),)

    @pytest.mark.parametrize("pol", POLS)
    def test_strictly_decreasing_over_sweep_range(self, pol):
        thicknesses = np.arange(120.0, 261.0, 10.0)
        curve = ratio_curve(thicknesses, 0.0, LAMBDA, pol)
        assert not curve.failures
        ratios = np.array(curve.ratios)
        assert np.all(np.diff(ratios) < 0)
        # Oracle: re-evaluation at half step finds no interior extremum.
        dense = ratio_curve(np.arange(120.0, 261.0, 5.0), 0.0, LAMBDA, pol)
        assert np.all(np.diff(np.array(dense.ratios)) < 0)

    def test_gapless_curve_pointwise_above_gapped(self):
        thicknesses = np.arange(120.0, 261.0, 20.0)
        for pol in POLS:
            gapless = np.array(ratio_curve(thicknesses, 0.0, LAMBDA, pol).ratios)
            gapped = np.array(ratio_curve(thicknesses, 4.7, LAMBDA, pol).ratios)
            assert np.all(gapless > gapped)

    def test_failures_collected_not_fatal(self):
        curve = ratio_curve([5.0, 150.0], 0.0, LAMBDA, Polarization.TE)
        assert curve.thicknesses_nm == (150.0,)
        assert len(curve.failures) == 1
        assert curve.failures[0][0] == 5.0

    def test_jobs_do_not_change_values(self):
        thicknesses = np.arange(120.0, 201.0, 20.0)
        serial = ratio_curve(thicknesses, 4.7, LAMBDA, Polarization.TM, jobs=1)
        threaded = ratio_curve(thicknesses, 4.7, LAMBDA, Polarization.TM, jobs=4)
        assert serial.ratios == threaded.ratios
