import numpy as np
import pytest

from proxnmf.datagen import Regime, classify_regime, generate_instance
from proxnmf.errors import NoRegime, RegimeMismatch
from proxnmf.matrix import dedupe_columns
from proxnmf.oracle import brute_force_extreme_rays, nnls


class TestClassify:
    @pytest.mark.parametrize("dims, regime", [
        ((100, 75, 25), Regime.C1),
        ((25, 100, 15), Regime.C2),
        ((25, 100, 45), Regime.C3),
        ((10, 10, 10), Regime.AMBIGUOUS),
        ((20, 60, 20), Regime.AMBIGUOUS),
    ])
    def test_examples(self, dims, regime):
        assert classify_regime(*dims) is regime

    def test_no_regime(self):
        # r > n with m < n
        with pytest.raises(NoRegime):
            classify_regime(5, 10, 12)

    def test_parse(self):
        assert Regime.parse("C3") is Regime.C3
        assert Regime.parse(Regime.C1) is Regime.C1
        with pytest.raises(ValueError):
            Regime.parse("c4")


class TestGenerate:
    def test_regime_mismatch(self):
        with pytest.raises(RegimeMismatch):
            generate_instance(25, 100, 45, "c2", 0)
        with pytest.raises(RegimeMismatch):
            generate_instance(10, 20, 10, Regime.AMBIGUOUS, 0)

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            generate_instance(5, 4, 4, "c1", 0)
        with pytest.raises(ValueError):
            generate_instance(5, 10, 1, "c2", 0)

    def test_shapes_and_normalization(self):
        inst = generate_instance(25, 100, 15, "c2", 1)
        assert inst.X_orig.shape == inst.Xn.shape == (25, 100)
        np.testing.assert_allclose(inst.Xn.sum(axis=0), 1.0, atol=1e-12)
        np.testing.assert_allclose(inst.Xn * inst.scales, inst.X_orig, rtol=1e-12)
        assert inst.X_orig.min() >= 0
        assert inst.true_anchors.tolist() == list(range(15))

    def test_deterministic(self):
        a = generate_instance(25, 100, 45, "c3", 7)
        b = generate_instance(25, 100, 45, "c3", 7)
        assert np.array_equal(a.X_orig, b.X_orig)
        assert not np.array_equal(a.X_orig, generate_instance(25, 100, 45, "c3", 8).X_orig)

    def test_shuffle_tracks_anchors(self):
        plain = generate_instance(20, 40, 8, "c2", 5)
        mixed = generate_instance(20, 40, 8, "c2", 5, shuffle=True)
        assert mixed.shuffled and mixed.meta()["shuffled"]
        # the planted ray columns move with the permutation
        for j in mixed.true_anchors:
            assert any(np.array_equal(mixed.X_orig[:, j], plain.X_orig[:, i]) for i in range(8))
        assert sorted(map(tuple, mixed.X_orig.T)) == sorted(map(tuple, plain.X_orig.T))

    def test_meta_one_based(self):
        inst = generate_instance(100, 75, 25, "c1", 0)
        meta = inst.meta()
        assert meta["true_anchors"][0] == 1 and meta["true_anchors"][-1] == 25
        assert meta["regime"] == "c1"

    def test_non_anchors_representable(self):
        inst = generate_instance(25, 100, 15, "c2", 2)
        F = inst.X_orig[:, :15]
        for j in range(15, 100):
            _, res = nnls(F, inst.X_orig[:, j])
            assert res <= 1e-12 * max(1.0, np.linalg.norm(inst.X_orig[:, j]))

    def test_no_duplicates(self):
        inst = generate_instance(25, 100, 45, "c3", 3)
        _, keep, dup = dedupe_columns(inst.Xn)
        assert keep.size == 100 and dup == {}

    @pytest.mark.parametrize("seed", range(3))
    def test_oracle_agrees_with_planted_rays(self, seed):
        # r > m: the certification step has to redraw interior rays
        inst = generate_instance(25, 100, 45, "c3", seed)
        assert brute_force_extreme_rays(inst.Xn).tolist() == inst.true_anchors.tolist()
