"""ABX error: trivial cases, null/signal calibration, invariances."""

from __future__ import annotations

import numpy as np
import pytest

from mp3s_eval.errors import TrialError
from mp3s_eval.headless.abx import abx_error
from mp3s_eval.headless.mining import MiningConfig, SegmentRef, Triplet, TripletSet
from mp3s_eval.headless.mining import mine_triplets
from mp3s_eval.layers import decay_weights
from mp3s_eval.store import UttRecord, from_records, write_archive, load_archive


def segs(utt_id: str, label: str, t: int = 6) -> SegmentRef:
    return SegmentRef(utt_id=utt_id, start=0, end=t, label=label)


def triplet(a, b, x) -> Triplet:
    return Triplet(a=a, b=b, x=x, label_ax=a.label, label_b=b.label)


def archive_from_stacks(stacks: dict[str, np.ndarray]):
    records = [UttRecord(utt_id=u, stack=s.astype(np.float32))
               for u, s in stacks.items()]
    return from_records(records)


def gaussian_cluster_archive(separation: float, *, n_per_class: int = 25,
                             seed: int = 0, num_layers: int = 2, t: int = 6,
                             dim: int = 8):
    """Two Gaussian classes with centre distance `separation` × unit σ."""
    rng = np.random.default_rng(seed)
    direction = np.zeros(dim)
    direction[0] = 1.0
    records = []
    for cls, sign in (("p", 0.5), ("q", -0.5)):
        center = sign * separation * direction
        for k in range(n_per_class):
            stack = rng.normal(size=(num_layers, t, dim)) + center
            records.append(
                UttRecord(
                    utt_id=f"{cls}{k:03d}", stack=stack.astype(np.float32),
                    speaker="s", class_label=cls,
                    segments=[(0, t, cls)],
                )
            )
    return from_records(records)


def uniform(L: int) -> np.ndarray:
    return np.full(L, 1.0 / L)


class TestTrivialCases:
    def test_identical_a_and_x_scores_zero(self):
        rng = np.random.default_rng(0)
        shared = rng.normal(size=(1, 6, 4))
        other = rng.normal(size=(1, 6, 4))
        archive = archive_from_stacks({"ax": shared, "b": other})
        ts = TripletSet(
            triplets=(triplet(segs("ax", "p"), segs("b", "q"), segs("ax", "p")),),
            mining_seed=0,
        )
        # S(X, A) == 1 exactly (bit-identical segments), strictly maximal.
        assert abx_error(archive, ts, uniform(1)) == 0.0

    def test_identical_a_and_b_ties_at_half(self):
        rng = np.random.default_rng(1)
        same = rng.normal(size=(1, 6, 4))
        x = rng.normal(size=(1, 6, 4))
        archive = archive_from_stacks({"a": same, "b": same.copy(), "x": x})
        ts = TripletSet(
            triplets=(triplet(segs("a", "p"), segs("b", "q"), segs("x", "p")),),
            mining_seed=0,
        )
        assert abx_error(archive, ts, uniform(1)) == 0.5

    def test_x_matching_b_scores_one(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(1, 6, 4))
        b = rng.normal(size=(1, 6, 4))
        archive = archive_from_stacks({"a": a, "b": b, "x": b.copy()})
        ts = TripletSet(
            triplets=(triplet(segs("a", "p"), segs("b", "q"), segs("x", "p")),),
            mining_seed=0,
        )
        assert abx_error(archive, ts, uniform(1)) == 1.0

    def test_mean_over_mixed_triplets(self):
        rng = np.random.default_rng(3)
        shared = rng.normal(size=(1, 6, 4))
        other = rng.normal(size=(1, 6, 4))
        archive = archive_from_stacks({"ax": shared, "b": other, "x2": other.copy()})
        good = triplet(segs("ax", "p"), segs("b", "q"), segs("ax", "p"))
        bad = triplet(segs("ax", "p"), segs("b", "q"), segs("x2", "p"))
        ts = TripletSet(triplets=(good, bad), mining_seed=0)
        assert abx_error(archive, ts, uniform(1)) == 0.5  # (0 + 1) / 2


class TestNullAndSignal:
    def test_null_error_near_half(self):
        # i.i.d. Gaussian representations carry no class structure, so
        # either outcome is equally likely: expected error exactly 0.5.
        archive = gaussian_cluster_archive(0.0, n_per_class=25, seed=11)
        manifest_like = {
            "records": [
                {"utt_id": rec.utt_id, "speaker": rec.speaker,
                 "segments": [[s, e, lab] for s, e, lab in rec.segments]}
                for rec in archive.records.values()
            ]
        }
        ts = mine_triplets(manifest_like, MiningConfig(per_label_cap=1200), seed=1)
        assert len(ts) >= 2000
        err = abx_error(archive, ts, uniform(2), workers=4)
        assert err == pytest.approx(0.5, abs=0.05)

    def test_strong_signal_near_zero(self):
        archive = gaussian_cluster_archive(4.0, n_per_class=12, seed=12)
        ts = self._mine(archive, cap=300)
        assert abx_error(archive, ts, uniform(2)) <= 0.05

    def test_error_non_increasing_with_separation(self):
        errors = []
        for sep in (0.0, 1.0, 2.0, 4.0):
            archive = gaussian_cluster_archive(sep, n_per_class=10, seed=21)
            ts = self._mine(archive, cap=200)
            errors.append(abx_error(archive, ts, uniform(2)))
        assert all(e1 >= e2 for e1, e2 in zip(errors, errors[1:]))

    @staticmethod
    def _mine(archive, cap):
        manifest_like = {
            "records": [
                {"utt_id": rec.utt_id, "speaker": rec.speaker,
                 "segments": [[s, e, lab] for s, e, lab in rec.segments]}
                for rec in archive.records.values()
            ]
        }
        return mine_triplets(manifest_like, MiningConfig(per_label_cap=cap), seed=2)


class TestInvariances:
    def _setup(self, seed=4):
        archive = gaussian_cluster_archive(1.0, n_per_class=6, seed=seed)
        ts = TestNullAndSignal._mine(archive, cap=40)
        return archive, ts

    def test_orthogonal_transform_invariance(self):
        archive, ts = self._setup()
        rng = np.random.default_rng(8)
        q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
        rotated = from_records(
            [UttRecord(utt_id=rec.utt_id, stack=(rec.stack @ q).astype(np.float32),
                       speaker=rec.speaker, class_label=rec.class_label,
                       segments=rec.segments)
             for rec in archive.records.values()]
        )
        base = abx_error(archive, ts, uniform(2))
        assert abx_error(rotated, ts, uniform(2)) == pytest.approx(base, abs=1e-6)

    def test_triplet_order_invariance(self):
        archive, ts = self._setup()
        shuffled = list(ts.triplets)
        np.random.default_rng(3).shuffle(shuffled)
        reordered = TripletSet(triplets=tuple(shuffled), mining_seed=0)
        assert abx_error(archive, ts, uniform(2)) == \
            abx_error(archive, reordered, uniform(2))

    def test_worker_count_invariance(self):
        archive, ts = self._setup()
        w1 = abx_error(archive, ts, uniform(2), workers=1)
        w4 = abx_error(archive, ts, uniform(2), workers=4)
        assert w1 == w4

    def test_backend_invariance(self):
        archive, ts = self._setup()
        assert abx_error(archive, ts, uniform(2), backend="pure") == \
            abx_error(archive, ts, uniform(2))

    def test_round_trip_through_disk(self, tmp_path):
        archive, ts = self._setup()
        write_archive(archive, tmp_path / "arch")
        reloaded = load_archive(tmp_path / "arch")
        assert abx_error(reloaded, ts, uniform(2)) == \
            abx_error(archive, ts, uniform(2))


class TestWeights:
    def test_one_hot_weight_selects_layer(self):
        # Layer 0 carries the class signal, layer 1 is pure noise: scoring
        # with weight on layer 0 must beat weight on layer 1.
        rng = np.random.default_rng(14)
        records = []
        for cls, sign in (("p", 1.0), ("q", -1.0)):
            for k in range(8):
                signal = rng.normal(size=(6, 8)) + sign * 2.0
                noise = rng.normal(size=(6, 8))
                stack = np.stack([signal, noise])
                records.append(
                    UttRecord(utt_id=f"{cls}{k}", stack=stack.astype(np.float32),
                              class_label=cls, segments=[(0, 6, cls)]))
        archive = from_records(records)
        ts = TestNullAndSignal._mine(archive, cap=100)
        err_signal = abx_error(archive, ts, np.array([1.0, 0.0]))
        err_noise = abx_error(archive, ts, np.array([0.0, 1.0]))
        assert err_signal < err_noise
        assert err_signal <= 0.1
        assert err_noise == pytest.approx(0.5, abs=0.15)

    def test_decay_weights_accepted(self):
        archive = gaussian_cluster_archive(1.0, n_per_class=4, seed=5)
        ts = TestNullAndSignal._mine(archive, cap=20)
        err = abx_error(archive, ts, decay_weights(2, 0.2))
        assert 0.0 <= err <= 1.0

    def test_wrong_weight_length(self):
        archive = gaussian_cluster_archive(1.0, n_per_class=4, seed=6)
        ts = TestNullAndSignal._mine(archive, cap=20)
        with pytest.raises(ValueError, match="expected 2 weights"):
            abx_error(archive, ts, np.array([1.0]))


class TestErrors:
    def test_empty_set(self):
        archive = gaussian_cluster_archive(1.0, n_per_class=4, seed=7)
        with pytest.raises(TrialError, match="empty"):
            abx_error(archive, TripletSet(triplets=(), mining_seed=0), uniform(2))

    def test_unknown_utterance_names_triplet_number(self):
        archive = gaussian_cluster_archive(1.0, n_per_class=4, seed=8)
        ts = TestNullAndSignal._mine(archive, cap=5)
        bad = triplet(segs("p000", "p"), segs("NOPE", "q"), segs("p001", "p"))
        broken = TripletSet(triplets=ts.triplets + (bad,), mining_seed=0)
        with pytest.raises(TrialError,
                           match=f"triplet {len(broken)}: .*'NOPE'"):
            abx_error(archive, broken, uniform(2))

    def test_out_of_range_segment_names_triplet_number(self):
        archive = gaussian_cluster_archive(1.0, n_per_class=4, seed=9)
        bad = triplet(
            SegmentRef("p000", 0, 99, "p"), segs("q000", "q"), segs("p001", "p")
        )
        ts = TripletSet(triplets=(bad,), mining_seed=0)
        with pytest.raises(TrialError, match="triplet 1: .*out of range"):
            abx_error(archive, ts, uniform(2))
