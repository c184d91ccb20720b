"""Metric tests: record schema, log IO, and every metric against hand fixtures
and the naive oracles."""

import json
import math
import random as pyrandom

import numpy as np
import pytest

import layermix as lm
from layermix import metrics as mx

import oracles
from helpers import make_record, random_log, sequence_records


class TestPredictionRecord:
    def test_top1_and_correct(self):
        rec = make_record(0, 3, (3, 1, 2), 0.8)
        assert rec.top1 == 3
        assert rec.correct
        assert not make_record(1, 0, (3, 1, 2), 0.8).correct

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"ranked": ()},
            {"ranked": (1, 1, 2)},
            {"confidence": 1.5},
            {"confidence": -0.1},
            {"optional": {"severity": 0, "corruption": "x"}},
            {"optional": {"severity": 6, "corruption": "x"}},
            {"optional": {"sequence_id": "a"}},
            {"optional": {"frame": 0}},
            {"optional": {"sequence_id": "a", "frame": -1}},
        ],
    )
    def test_validation(self, kwargs):
        ranked = kwargs.get("ranked", (0, 1, 2))
        confidence = kwargs.get("confidence", 0.5)
        optional = kwargs.get("optional", {})
        with pytest.raises(lm.ParameterError):
            make_record(0, 0, ranked, confidence, **optional)


class TestRankClasses:
    def test_descending_scores(self):
        assert lm.rank_classes([0.1, 0.7, 0.2]) == (1, 2, 0)

    def test_ties_broken_by_index(self):
        assert lm.rank_classes([0.5, 0.5, 0.9, 0.5]) == (2, 0, 1, 3)

    def test_all_equal(self):
        assert lm.rank_classes([0.25] * 4) == (0, 1, 2, 3)


class TestLogIO:
    def _records(self):
        return [
            make_record(0, 1, (1, 0, 2), 0.9, corruption="blur", severity=2),
            make_record(1, 0, (2, 0, 1), 0.4, sequence_id="s0", frame=0),
            make_record(2, 0, (0, 1, 2), 0.6, sequence_id="s0", frame=1),
            make_record(3, 2, (2, 1, 0), 1.0),
        ]

    def test_roundtrip(self, tmp_path):
        path = tmp_path / "log.jsonl"
        recs = self._records()
        lm.write_log(path, recs)
        assert lm.read_log(path) == recs

    def test_optional_fields_omitted_not_null(self):
        d = mx.record_to_dict(make_record(0, 1, (1, 0), 0.5))
        assert set(d) == {"sample_id", "label", "ranked_classes", "confidence"}

    def test_blank_lines_skipped(self):
        line = json.dumps(mx.record_to_dict(self._records()[0]))
        recs = mx.parse_log_lines(["", line, "   ", line])
        assert len(recs) == 2

    def test_null_optional_rejected_with_line(self):
        obj = mx.record_to_dict(self._records()[0])
        obj["severity"] = None
        with pytest.raises(lm.LogSchemaError) as ei:
            mx.parse_log_lines(["", json.dumps(obj)])
        assert ei.value.line == 2
        assert "line 2" in str(ei.value)

    def test_unknown_field_rejected(self):
        obj = mx.record_to_dict(self._records()[0])
        obj["extra"] = 1
        with pytest.raises(lm.LogSchemaError, match="unknown fields"):
            mx.record_from_dict(obj)

    def test_missing_required_rejected(self):
        obj = mx.record_to_dict(self._records()[0])
        del obj["label"]
        with pytest.raises(lm.LogSchemaError, match="missing required"):
            mx.record_from_dict(obj)

    def test_bad_types_rejected(self):
        base = mx.record_to_dict(self._records()[0])
        for field, bad in [
            ("sample_id", 5),
            ("label", "x"),
            ("label", True),
            ("ranked_classes", [0, "1"]),
            ("ranked_classes", []),
            ("confidence", "high"),
            ("severity", 2.5),
            ("frame", 1.0),
        ]:
            obj = dict(base)
            if field == "frame":
                obj["sequence_id"] = "s"
            obj[field] = bad
            with pytest.raises(lm.LogSchemaError):
                mx.record_from_dict(obj)

    def test_invalid_json_carries_line_number(self):
        with pytest.raises(lm.LogSchemaError) as ei:
            mx.parse_log_lines(['{"sample_id": "a"', ])
        assert ei.value.line == 1

    def test_semantic_error_carries_line_number(self, tmp_path):
        good = json.dumps(mx.record_to_dict(self._records()[0]))
        bad = json.dumps({**mx.record_to_dict(self._records()[0]), "confidence": 7})
        path = tmp_path / "log.jsonl"
        path.write_text(good + "\n" + good + "\n" + bad + "\n")
        with pytest.raises(lm.LogSchemaError) as ei:
            lm.read_log(path)
        assert ei.value.line == 3


def grid_records(error_by_cell, per_cell=4, start=0):
    """Records with a given top-1 error fraction per (corruption, severity)."""
    records = []
    i = start
    for (corruption, severity), err in error_by_cell.items():
        wrong = round(err * per_cell)
        for k in range(per_cell):
            correct = k >= wrong
            records.append(
                make_record(
                    i,
                    0,
                    (0, 1, 2) if correct else (1, 0, 2),
                    0.5,
                    corruption=corruption,
                    severity=severity,
                )
            )
            i += 1
    return records


class TestMeanCorruptionError:
    def test_hand_grid(self):
        recs = grid_records(
            {
                ("a", 1): 0.25,
                ("a", 2): 0.75,
                ("b", 1): 0.0,
                ("b", 2): 0.0,
            }
        )
        assert lm.mean_corruption_error(recs) == pytest.approx(0.25)

    def test_all_correct_is_zero(self):
        recs = grid_records({("a", 1): 0.0, ("a", 2): 0.0})
        assert lm.mean_corruption_error(recs) == 0.0

    def test_self_baseline_is_one(self):
        recs = grid_records({("a", 1): 0.25, ("a", 2): 0.5, ("b", 1): 0.5, ("b", 2): 0.75})
        assert lm.mean_corruption_error(recs, baseline=recs) == pytest.approx(1.0)

    def test_baseline_ratio_of_sums(self):
        method = grid_records({("a", 1): 0.25, ("a", 2): 0.25})
        base = grid_records({("a", 1): 0.5, ("a", 2): 0.5}, start=100)
        assert lm.mean_corruption_error(method, baseline=base) == pytest.approx(0.5)

    def test_incomplete_grid_rejected(self):
        recs = grid_records({("a", 1): 0.0, ("a", 2): 0.0, ("b", 1): 0.0})
        with pytest.raises(lm.IncompleteGridError):
            lm.mean_corruption_error(recs)

    def test_untagged_records_rejected(self):
        with pytest.raises(lm.ParameterError):
            lm.mean_corruption_error([make_record(0, 0, (0, 1), 0.5)])

    def test_empty_rejected(self):
        with pytest.raises(lm.ParameterError):
            lm.mean_corruption_error([])

    def test_baseline_grid_mismatch(self):
        method = grid_records({("a", 1): 0.5, ("a", 2): 0.5})
        base = grid_records({("a", 1): 0.5, ("b", 1): 0.5}, start=100)
        with pytest.raises(lm.IncompleteGridError):
            lm.mean_corruption_error(method, baseline=base)

    def test_zero_baseline_denominator(self):
        method = grid_records({("a", 1): 0.5})
        base = grid_records({("a", 1): 0.0}, start=100)
        with pytest.raises(lm.ParameterError):
            lm.mean_corruption_error(method, baseline=base)

    def test_record_order_irrelevant(self):
        py = pyrandom.Random(3)
        recs = grid_records({("a", 1): 0.25, ("a", 2): 0.5, ("b", 1): 0.75, ("b", 2): 0.25})
        shuffled = recs[:]
        py.shuffle(shuffled)
        assert lm.mean_corruption_error(shuffled) == lm.mean_corruption_error(recs)


class TestMeanFlipProbability:
    def test_temporal_fixture(self):
        # tops A,A,B,B,B encoded as ints: one flip over four adjacent pairs
        recs = sequence_records("q", [0, 0, 1, 1, 1])
        assert lm.mean_flip_probability(recs, lm.FlipMode.TEMPORAL) == pytest.approx(0.25)

    def test_noise_fixture(self):
        recs = sequence_records("q", [0, 1, 1, 0])
        assert lm.mean_flip_probability(recs, lm.FlipMode.NOISE_SEQUENCE) == pytest.approx(2 / 3)

    def test_modes_accept_strings(self):
        recs = sequence_records("q", [0, 0, 1, 1, 1])
        assert lm.mean_flip_probability(recs, "temporal") == pytest.approx(0.25)
        # noise mode references frame 0: frames 2,3,4 flipped -> 3/4
        assert lm.mean_flip_probability(recs, "noise") == pytest.approx(0.75)

    def test_constant_sequence_is_zero(self):
        recs = sequence_records("q", [2, 2, 2, 2])
        for mode in lm.FlipMode:
            assert lm.mean_flip_probability(recs, mode) == 0.0

    def test_length_two_sequences(self):
        recs = sequence_records("a", [0, 1]) + sequence_records("b", [1, 1], start_index=10)
        assert lm.mean_flip_probability(recs) == pytest.approx(0.5)

    def test_pooled_not_averaged_per_sequence(self):
        # seq a: 1 flip / 1 pair; seq b: 0 flips / 3 pairs -> pooled 1/4
        recs = sequence_records("a", [0, 1]) + sequence_records("b", [2, 2, 2, 2], start_index=10)
        assert lm.mean_flip_probability(recs) == pytest.approx(0.25)

    def test_non_contiguous_frames_rejected(self):
        recs = [
            make_record(0, 0, (0, 1), 0.5, sequence_id="s", frame=0),
            make_record(1, 0, (0, 1), 0.5, sequence_id="s", frame=2),
        ]
        with pytest.raises(lm.ParameterError):
            lm.mean_flip_probability(recs)

    def test_short_sequence_rejected(self):
        recs = [make_record(0, 0, (0, 1), 0.5, sequence_id="s", frame=0)]
        with pytest.raises(lm.ParameterError):
            lm.mean_flip_probability(recs)

    def test_unsequenced_record_rejected(self):
        with pytest.raises(lm.ParameterError):
            lm.mean_flip_probability([make_record(0, 0, (0, 1), 0.5)])

    def test_empty_rejected(self):
        with pytest.raises(lm.ParameterError):
            lm.mean_flip_probability([])


class TestTop5Displacement:
    def test_identical_rankings(self):
        assert lm.top5_displacement((0, 1, 2, 3, 4, 5), (0, 1, 2, 3, 4, 5)) == 0

    def test_adjacent_swap_of_top_two(self):
        assert lm.top5_displacement((0, 1, 2, 3, 4, 5), (1, 0, 2, 3, 4, 5)) == 2

    def test_swap_within_window(self):
        # swapping ranks 3 and 4 crosses boundary j=4 twice
        assert lm.top5_displacement((0, 1, 2, 3, 4, 5), (0, 1, 3, 2, 4, 5)) == 2

    def test_deep_promotion_counts_window_crossings_only(self):
        # class promoted from rank 8 to rank 1 crosses all of j in {2..6}: 5;
        # each of the four classes pushed down one rank crosses one boundary
        prev = (0, 1, 2, 3, 4, 5, 6, 7)
        curr = (7, 0, 1, 2, 3, 4, 5, 6)
        assert lm.top5_displacement(prev, curr) == 5 + 4

    def test_matches_naive_on_random_permutations(self):
        py = pyrandom.Random(41)
        for _ in range(300):
            n = py.randint(5, 12)
            prev = list(range(n))
            curr = prev[:]
            py.shuffle(prev)
            py.shuffle(curr)
            assert lm.top5_displacement(prev, curr) == oracles.naive_t5d(prev, curr)

    def test_short_rankings_rejected(self):
        with pytest.raises(lm.ParameterError):
            lm.top5_displacement((0, 1, 2, 3), (0, 1, 2, 3))

    def test_different_universes_rejected(self):
        with pytest.raises(lm.ParameterError):
            lm.top5_displacement((0, 1, 2, 3, 4), (9, 1, 2, 3, 4))


class TestMeanTop5Distance:
    def _seq(self, sid, rankings, start=0):
        return [
            make_record(start + f, 0, r, 0.5, sequence_id=sid, frame=f)
            for f, r in enumerate(rankings)
        ]

    def test_identical_frames_zero(self):
        recs = self._seq("s", [(0, 1, 2, 3, 4)] * 3)
        assert lm.mean_top5_distance(recs) == 0.0

    def test_single_swap_pair(self):
        recs = self._seq("s", [(0, 1, 2, 3, 4), (1, 0, 2, 3, 4)])
        assert lm.mean_top5_distance(recs) == pytest.approx(2.0)

    def test_per_sequence_then_across(self):
        a = self._seq("a", [(0, 1, 2, 3, 4), (1, 0, 2, 3, 4)])  # mean d = 2
        b = self._seq("b", [(0, 1, 2, 3, 4)] * 3, start=10)  # mean d = 0
        # per-sequence averaging: (2 + 0) / 2, not pooled 2/3
        assert lm.mean_top5_distance(a + b) == pytest.approx(1.0)

    def test_matches_naive(self):
        py = pyrandom.Random(42)
        recs = []
        for s in range(4):
            rankings = []
            for _ in range(py.randint(2, 6)):
                r = list(range(7))
                py.shuffle(r)
                rankings.append(tuple(r))
            recs += self._seq(f"s{s}", rankings, start=100 * s)
        assert lm.mean_top5_distance(recs) == pytest.approx(oracles.naive_mt5d(recs), abs=1e-12)

    def test_short_ranking_rejected(self):
        recs = self._seq("s", [(0, 1, 2), (0, 1, 2)])
        with pytest.raises(lm.ParameterError):
            lm.mean_top5_distance(recs)


class TestRmsCalibrationError:
    def test_perfectly_calibrated_bins(self):
        # three bins of five records, each with conf 0.8 and 4/5 correct
        recs = []
        for b in range(3):
            for k in range(5):
                correct = k > 0
                recs.append(
                    make_record(5 * b + k, 0, (0, 1) if correct else (1, 0), 0.8)
                )
        assert lm.rms_calibration_error(recs, bins=3) == pytest.approx(0.0)

    def test_overconfident_fixture(self):
        # confidence 1.0 everywhere, half correct -> RMS gap 0.5
        recs = [
            make_record(i, 0, (0, 1) if i % 2 == 0 else (1, 0), 1.0) for i in range(30)
        ]
        assert lm.rms_calibration_error(recs, bins=15) == pytest.approx(0.5)

    def test_bin_sizes_differ_by_at_most_one(self):
        py = pyrandom.Random(43)
        recs = [
            make_record(i, 0, (0, 1) if py.random() < 0.5 else (1, 0), py.random())
            for i in range(17)
        ]
        # 17 records, 5 bins -> sizes (3,4,3,4,3) via the k*n//bins edges
        n, bins = 17, 5
        sizes = [((k + 1) * n) // bins - (k * n) // bins for k in range(bins)]
        assert sorted(sizes) == [3, 3, 3, 4, 4]
        lm.rms_calibration_error(recs, bins=bins)  # smoke: no error

    def test_matches_naive(self):
        py = pyrandom.Random(44)
        for bins in (1, 3, 7, 15):
            recs = [
                make_record(i, 0, (0, 1) if py.random() < 0.6 else (1, 0), py.random())
                for i in range(60)
            ]
            assert lm.rms_calibration_error(recs, bins=bins) == pytest.approx(
                oracles.naive_rms(recs, bins), abs=1e-12
            )

    def test_duplicated_confidences_stay_deterministic(self):
        """Ties in confidence: stable order by input position decides bins."""
        recs = [
            make_record(i, 0, (0, 1) if i < 3 else (1, 0), 0.5) for i in range(6)
        ]
        v1 = lm.rms_calibration_error(recs, bins=2)
        v2 = lm.rms_calibration_error(list(recs), bins=2)
        assert v1 == v2
        # first bin all-correct, second all-wrong: sqrt(mean((0.5)^2)) = 0.5
        assert v1 == pytest.approx(0.5)

    def test_validation(self):
        recs = [make_record(i, 0, (0, 1), 0.5) for i in range(4)]
        with pytest.raises(lm.ParameterError):
            lm.rms_calibration_error(recs, bins=0)
        with pytest.raises(lm.ParameterError):
            lm.rms_calibration_error(recs, bins=5)


class TestJsdConsistency:
    def test_identical_distributions_zero(self):
        p = [0.25, 0.25, 0.5]
        assert lm.jsd_consistency(p, p, p) == 0.0

    def test_reference_value(self):
        val = lm.jsd_consistency([1.0, 0.0], [0.0, 1.0], [0.5, 0.5])
        assert val == pytest.approx(2.0 * math.log(2.0) / 3.0, abs=1e-12)

    def test_disjoint_supports_hit_upper_bound(self):
        val = lm.jsd_consistency([1, 0, 0], [0, 1, 0], [0, 0, 1])
        assert val == pytest.approx(math.log(3.0), abs=1e-12)

    def test_bounded_by_log3(self):
        py = pyrandom.Random(45)
        for _ in range(10_000):
            k = py.randint(2, 6)

            def draw():
                raw = [py.uniform(0.01, 1.0) for _ in range(k)]
                total = sum(raw)
                return [x / total for x in raw]

            val = lm.jsd_consistency(draw(), draw(), draw())
            assert 0.0 <= val <= math.log(3.0) + 1e-12

    def test_matches_naive(self):
        py = pyrandom.Random(46)
        for _ in range(20):
            k = py.randint(2, 8)
            vecs = []
            for _ in range(3):
                raw = [py.uniform(0.0, 1.0) for _ in range(k)]
                raw[py.randrange(k)] = 0.0  # exercise the 0 log 0 = 0 branch
                total = sum(raw)
                vecs.append([x / total for x in raw])
            assert lm.jsd_consistency(*vecs) == pytest.approx(
                oracles.naive_jsd(*vecs), abs=1e-12
            )

    def test_validation(self):
        ok = [0.5, 0.5]
        with pytest.raises(lm.ParameterError):
            lm.jsd_consistency([0.5, 0.6], ok, ok)  # doesn't sum to 1
        with pytest.raises(lm.ParameterError):
            lm.jsd_consistency([-0.5, 1.5], ok, ok)
        with pytest.raises(lm.ParameterError):
            lm.jsd_consistency([0.2, 0.3, 0.5], ok, ok)  # length mismatch
        with pytest.raises(lm.ParameterError):
            lm.jsd_consistency([], ok, ok)


class TestAgainstOraclesOnRandomLogs:
    """Cross-validation of every metric on generated logs."""

    def test_all_metrics_match(self):
        for trial in range(12):
            py = pyrandom.Random(7000 + trial)
            records = random_log(py, trial)
            corr = [r for r in records if r.corruption is not None]
            seq = [r for r in records if r.sequence_id is not None]

            assert lm.mean_corruption_error(corr) == pytest.approx(
                oracles.naive_mce(corr), abs=1e-12
            )
            for mode in ("temporal", "noise"):
                assert lm.mean_flip_probability(seq, mode) == pytest.approx(
                    oracles.naive_mfp(seq, mode), abs=1e-12
                )
            assert lm.mean_top5_distance(seq) == pytest.approx(
                oracles.naive_mt5d(seq), abs=1e-12
            )
            for bins in (1, 5, 10):
                assert lm.rms_calibration_error(records, bins) == pytest.approx(
                    oracles.naive_rms(records, bins), abs=1e-12
                )
