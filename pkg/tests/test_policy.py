from fractions import Fraction

import numpy as np
import pytest

from evaug import (
    Cutout,
    Flip,
    FrameTensor,
    Intensity,
    LabeledSample,
    Policy,
    Roll,
    Rotate,
    ShearX,
    apply_plan,
    augment_sample,
    lookup_intensity,
    make_contrastive_pair,
    one_hot,
    sample_plan,
)


class TestIntensityTable:
    def test_level_1(self):
        assert lookup_intensity(1) == Intensity(3, 15.0, 8, 0.15)

    def test_level_2(self):
        assert lookup_intensity(2) == Intensity(5, 30.0, 16, 0.30)

    def test_level_3(self):
        assert lookup_intensity(3) == Intensity(7, 45.0, 24, 0.45)

    @pytest.mark.parametrize("level", [0, 4, -1])
    def test_out_of_range(self, level):
        with pytest.raises(ValueError):
            lookup_intensity(level)


class TestPolicyConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            Policy(num_transforms=5)
        with pytest.raises(ValueError):
            Policy(level=4)
        with pytest.raises(ValueError):
            Policy(flip_prob=1.5)

    def test_round_trip(self):
        p = Policy(num_transforms=3, level=1, flip_prob=0.25, cutmix_enabled=False, seed=9)
        assert Policy.from_config(p.to_config()) == p

    def test_from_config_text(self):
        p = Policy.from_config("m=2, n=3, flip_prob=0.1, cutmix=off, seed=4")
        assert p.num_transforms == 2 and p.level == 3
        assert p.flip_prob == 0.1 and not p.cutmix_enabled and p.seed == 4

    def test_bad_keys(self):
        with pytest.raises(ValueError):
            Policy.from_config("q=1")
        with pytest.raises(ValueError):
            Policy.from_config("cutmix=maybe")


class TestSamplePlan:
    def test_deterministic(self):
        policy = Policy(num_transforms=1, level=2, seed=123)
        a = sample_plan(policy, 7, 48, 48)
        b = sample_plan(policy, 7, 48, 48)
        assert a == b

    def test_independent_of_other_draws(self):
        policy = Policy(seed=5)
        expect = sample_plan(policy, 3, 48, 48)
        for idx in (0, 9, 1, 3):
            sample_plan(policy, idx, 48, 48)
        assert sample_plan(policy, 3, 48, 48) == expect

    def test_m1_plan_shape(self):
        policy = Policy(num_transforms=1, level=2, seed=0)
        for idx in range(50):
            plan = sample_plan(policy, idx, 48, 48)
            non_flip = [p for p in plan if not isinstance(p, Flip)]
            assert len(non_flip) == 1
            assert len(plan) - len(non_flip) in (0, 1)

    def test_m4_uses_all_kinds(self):
        policy = Policy(num_transforms=4, level=2, flip_prob=0.0, seed=1)
        for idx in range(20):
            kinds = {type(p) for p in sample_plan(policy, idx, 48, 48)}
            assert kinds == {Roll, Rotate, Cutout, ShearX}

    @pytest.mark.parametrize("level", [1, 2, 3])
    def test_parameters_within_bounds(self, level):
        bounds = lookup_intensity(level)
        policy = Policy(num_transforms=4, level=level, seed=77)
        for idx in range(250):
            for params in sample_plan(policy, idx, 40, 30):
                if isinstance(params, Roll):
                    assert abs(params.dx) <= bounds.max_shift
                    assert abs(params.dy) <= bounds.max_shift
                elif isinstance(params, Rotate):
                    assert abs(params.degrees) <= bounds.max_degrees
                elif isinstance(params, Cutout):
                    assert 1 <= params.side <= bounds.max_cutout
                    assert 0 <= params.cx < 30 and 0 <= params.cy < 40
                elif isinstance(params, ShearX):
                    assert abs(params.factor) <= bounds.max_shear


class TestApplyPlan:
    def test_identity_plan(self):
        rng = np.random.default_rng(0)
        t = FrameTensor(rng.integers(0, 4, (3, 2, 8, 8)).astype(np.int32))
        out = apply_plan(t, [Roll(0, 0)])
        assert np.array_equal(out.data, t.data)

    def test_order_matters(self):
        data = np.zeros((1, 2, 8, 8), np.int32)
        data[0, 0, 1, 1] = 1
        t = FrameTensor(data)
        ab = apply_plan(t, [Roll(3, 0), Cutout(3, 4, 1)])
        ba = apply_plan(t, [Cutout(3, 4, 1), Roll(3, 0)])
        assert not np.array_equal(ab.data, ba.data)


class TestAugmentSample:
    @staticmethod
    def sample(fill, label_index, h=32, w=32, binarized=False):
        dtype = np.uint8 if binarized else np.int32
        data = np.full((4, 2, h, w), fill, dtype)
        return LabeledSample(FrameTensor(data, binarized=binarized), one_hot(label_index, 4))

    def test_partner_required(self):
        policy = Policy(cutmix_enabled=True, seed=0)
        with pytest.raises(ValueError, match="partner"):
            augment_sample(self.sample(1, 0), None, policy, 0)

    def test_deterministic(self):
        policy = Policy(seed=11)
        a, b = self.sample(1, 0), self.sample(2, 1)
        first = augment_sample(a, b, policy, 5)
        second = augment_sample(a, b, policy, 5)
        assert np.array_equal(first.frames.data, second.frames.data)
        assert np.array_equal(first.label, second.label)

    def test_binarized_closure(self):
        policy = Policy(seed=3)
        for idx in range(25):
            a = self.sample(1, 0, binarized=True)
            b = self.sample(1, 1, binarized=True)
            out = augment_sample(a, b, policy, idx)
            assert out.frames.binarized
            assert set(np.unique(out.frames.data)) <= {0, 1}

    def test_label_matches_realized_mask(self):
        # Oracle: recover the pasted-rectangle area from the output tensor
        # (partner cells hold a distinct value) and recompute the label mix.
        policy = Policy(seed=21, flip_prob=0.0, num_transforms=1)
        for idx in range(40):
            a, b = self.sample(1, 0), self.sample(2, 1)
            out = augment_sample(a, b, policy, idx)
            pasted = int(np.sum(out.frames.data[0, 0] == 2))
            keep = Fraction(32 * 32 - pasted, 32 * 32)
            expected = float(keep) * a.label + float(1 - keep) * b.label
            assert np.allclose(out.label, expected, atol=1e-12)
            assert abs(out.label.sum() - 1.0) <= 1e-6

    def test_no_cutmix_keeps_label(self):
        policy = Policy(cutmix_enabled=False, seed=2)
        a = self.sample(1, 3)
        out = augment_sample(a, None, policy, 0)
        assert np.array_equal(out.label, a.label)


class TestContrastivePair:
    @staticmethod
    def frames():
        rng = np.random.default_rng(17)
        return FrameTensor(rng.integers(0, 2, (10, 2, 48, 48)).astype(np.uint8), binarized=True)

    def test_deterministic(self):
        policy = Policy(num_transforms=3, level=2, cutmix_enabled=False, seed=8)
        t = self.frames()
        v1a, v2a = make_contrastive_pair(t, policy, 4)
        v1b, v2b = make_contrastive_pair(t, policy, 4)
        assert np.array_equal(v1a.data, v1b.data)
        assert np.array_equal(v2a.data, v2b.data)

    def test_views_generally_differ(self):
        policy = Policy(num_transforms=3, level=2, cutmix_enabled=False, seed=8)
        t = self.frames()
        equal = sum(
            np.array_equal(*map(lambda v: v.data, make_contrastive_pair(t, policy, idx)))
            for idx in range(200)
        )
        assert equal < 2  # under 1 percent

    def test_binarized_closure(self):
        policy = Policy(num_transforms=2, seed=1)
        v1, v2 = make_contrastive_pair(self.frames(), policy, 0)
        assert v1.binarized and v2.binarized
