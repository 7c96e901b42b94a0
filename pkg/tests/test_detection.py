"""Energy detection, occupancy decisions, and gain-ratio metrics."""

import numpy as np
import pytest

from cwss import BandPlan, detect_holes, edper, normalize_total, subband_energies


class TestNormalize:
    def test_unit_norm(self):
        r = np.array([2.0, 0.0, 0.0], dtype=np.complex128)
        out, degenerate = normalize_total(r)
        assert not degenerate
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-15)

    def test_zero_flagged(self):
        out, degenerate = normalize_total(np.zeros(4, dtype=np.complex128))
        assert degenerate
        assert np.all(out == 0)

    def test_argmax_preserved(self):
        rng = np.random.default_rng(0)
        plan = BandPlan.uniform(32, 4)
        r = rng.normal(size=32) + 1j * rng.normal(size=32)
        before = subband_energies(r, plan)
        after = subband_energies(normalize_total(r)[0], plan)
        assert np.argmax(before) == np.argmax(after)
        np.testing.assert_allclose(before, after, rtol=1e-12)


class TestSubbandEnergies:
    def test_single_section_support(self):
        plan = BandPlan.uniform(16, 4)
        r = np.zeros(16, dtype=np.complex128)
        r[4:8] = 3.0
        e = subband_energies(r, plan)
        np.testing.assert_allclose(e, [0, 1, 0, 0], atol=1e-15)

    def test_uniform_magnitude_symmetry(self):
        plan = BandPlan.uniform(64, 4)
        r = np.ones(64, dtype=np.complex128)
        np.testing.assert_allclose(subband_energies(r, plan), 0.5, atol=1e-13)

    def test_energies_sum_to_one(self):
        rng = np.random.default_rng(1)
        plan = BandPlan(n=64, boundaries=(5, 20, 33, 50))
        r = rng.normal(size=64) + 1j * rng.normal(size=64)
        e = subband_energies(r, plan)
        assert np.sum(e**2) == pytest.approx(1.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="plan"):
            subband_energies(np.zeros(8, complex), BandPlan.uniform(16, 2))


class TestDetectHoles:
    def test_all_below_threshold(self):
        rep = detect_holes(np.array([0.01, 0.02, 0.03]), 0.1)
        assert not rep.occupied.any()
        assert rep.holes().all()
        assert not rep.degenerate

    def test_strictly_above_threshold_only(self):
        rep = detect_holes(np.array([0.1, 0.2]), 0.1)
        assert rep.occupied.tolist() == [False, True]

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(2)
        e = rng.uniform(0, 1, size=9)
        lo = detect_holes(e, 0.2).occupied
        hi = detect_holes(e, 0.5).occupied
        assert np.all(hi <= lo)

    def test_degenerate_flag(self):
        assert detect_holes(np.zeros(4), 0.1).degenerate

    def test_threshold_validation(self):
        with pytest.raises(ValueError, match="threshold"):
            detect_holes(np.ones(3), 0.0)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        e = rng.uniform(0, 1, size=9)
        perm = rng.permutation(9)
        rep = detect_holes(e, 0.4)
        rep_p = detect_holes(e[perm], 0.4)
        assert np.array_equal(rep_p.occupied, rep.occupied[perm])


class TestEdper:
    def plan(self):
        return BandPlan(n=1024, boundaries=(61, 123, 246, 348, 614, 717, 860, 922))

    def mask(self):
        m = np.zeros(9, dtype=bool)
        m[[1, 3, 5, 7]] = True
        return m

    def test_identical_methods_score_zero(self):
        rng = np.random.default_rng(5)
        plan = self.plan()
        r = rng.normal(size=1024) + 1j * rng.normal(size=1024)
        res = edper(r, r, r, plan, self.mask())
        np.testing.assert_allclose(res.r1, 0.0, atol=1e-12)
        np.testing.assert_allclose(res.r2, 0.0, atol=1e-12)

    def test_empty_inactive_section_scores_one(self):
        plan = self.plan()
        base = np.ones(1024, dtype=np.complex128)
        other = np.ones(1024, dtype=np.complex128)
        other[0:61] = 0.0  # section 1 emptied by the compared method
        res = edper(base, other, other, plan, self.mask())
        assert res.r1[0] == pytest.approx(1.0, abs=1e-12)
        assert res.r2[0] == pytest.approx(1.0, abs=1e-12)

    def test_reference_table_spot_values(self):
        # published spot values, with the published table cells read as the
        # section energies E that enter the ratio:
        # R2(4) = (0.5396-0.4734)/0.4734 = 13.98 %
        # R1(2) = (0.2447-0.3820)/0.3820 = -35.94 %
        from cwss.detection import _gain_ratio

        bpdn_e = np.array([0.1149, 0.3820, 0.1752, 0.4734, 0.3184, 0.4780, 0.2333, 0.4026, 0.1994])
        vlbs_e = np.array([0.0, 0.2447, 0.0, 0.5101, 0.4220, 0.5833, 0.0005, 0.4020, 0.0])
        evlbs_e = np.array([0.0, 0.2681, 0.0, 0.5396, 0.1897, 0.6361, 0.0, 0.4431, 0.0])
        r1 = _gain_ratio(bpdn_e, vlbs_e, self.mask())
        r2 = _gain_ratio(bpdn_e, evlbs_e, self.mask())
        assert r2[3] == pytest.approx(0.1398, abs=5e-4)
        assert r1[1] == pytest.approx(-0.3594, abs=5e-4)
        # fully emptied inactive sections score exactly 100 %
        np.testing.assert_allclose(r2[[0, 2, 6, 8]], 1.0, atol=1e-12)
        np.testing.assert_allclose(r1[[0, 2, 8]], 1.0, atol=1e-12)

    def test_inactive_ratios_bounded_by_one(self):
        rng = np.random.default_rng(8)
        plan = BandPlan.uniform(32, 4)
        mask = np.array([True, False, True, False])
        for _ in range(20):
            vecs = [rng.normal(size=32) + 1j * rng.normal(size=32) for _ in range(3)]
            res = edper(*vecs, plan, mask)
            assert np.all(res.r1[~mask] <= 1.0 + 1e-12)
            assert np.all(res.r2[~mask] <= 1.0 + 1e-12)

    def test_zero_baseline_yields_nan_sentinel(self):
        plan = BandPlan.uniform(16, 4)
        mask = np.array([False, True, False, False])
        base = np.zeros(16, dtype=np.complex128)
        base[4:8] = 1.0  # sections 1, 3, 4 have zero baseline energy
        other = np.ones(16, dtype=np.complex128)
        res = edper(base, other, other, plan, mask)
        assert np.isnan(res.r1[0]) and np.isnan(res.r1[2]) and np.isnan(res.r1[3])
        assert np.isfinite(res.r1[1])

    def test_mask_length_validated(self):
        plan = BandPlan.uniform(16, 4)
        r = np.ones(16, dtype=np.complex128)
        with pytest.raises(ValueError, match="mask"):
            edper(r, r, r, plan, np.array([True, False]))
