"""Contract tests for the dataloader bindings."""

import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

import layermix as lm

lmb = pytest.importorskip("layermix_bindings")


@pytest.fixture()
def augmenter(bank_dir):
    return lmb.make_augmenter(bank_dir)


@pytest.fixture()
def img():
    return np.random.default_rng(5).random((18, 22, 3))


class TestMakeAugmenter:
    def test_defaults(self, augmenter):
        assert augmenter.magnitude == 8
        assert augmenter.beta == 3.0
        assert augmenter.seed == 0
        assert augmenter.grayscale is True
        assert augmenter.bank_size == 5

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            lmb.make_augmenter(str(tmp_path / "nope"))

    def test_empty_bank(self, tmp_path):
        (tmp_path / "junk.txt").write_text("not an image")
        with pytest.raises(lm.EmptyBankError):
            lmb.make_augmenter(str(tmp_path))

    def test_invalid_config_rejected_before_io(self, bank_dir):
        with pytest.raises(lm.ParameterError):
            lmb.make_augmenter(bank_dir, magnitude=11)
        with pytest.raises(lm.ParameterError):
            lmb.make_augmenter(bank_dir, beta=0.0)

    def test_two_augmenters_same_seed_agree(self, bank_dir, img):
        a1 = lmb.make_augmenter(bank_dir, seed=404)
        a2 = lmb.make_augmenter(bank_dir, seed=404)
        for sid in range(4):
            assert np.array_equal(a1.augment_array(img, sid), a2.augment_array(img, sid))

    def test_seed_changes_outputs(self, bank_dir, img):
        a1 = lmb.make_augmenter(bank_dir, seed=1)
        a2 = lmb.make_augmenter(bank_dir, seed=2)
        assert any(
            not np.array_equal(a1.augment_array(img, sid), a2.augment_array(img, sid))
            for sid in range(6)
        )

    def test_repr_mentions_settings(self, augmenter):
        assert "magnitude=8" in repr(augmenter) and "beta=3.0" in repr(augmenter)


class TestInputContract:
    @pytest.mark.parametrize(
        "bad",
        [
            np.zeros((8, 8, 3), dtype=np.uint8),  # integer dtype
            np.zeros((8, 8)),  # missing channel axis
            np.zeros((8, 8, 4)),  # unsupported channel count
            np.zeros((0, 8, 3)),  # empty
            np.full((8, 8, 3), 1.5),  # above range
            np.full((8, 8, 3), -0.1),  # below range
            np.full((8, 8, 3), np.nan),  # non-finite
            [[0.0, 0.5]],  # not an array
        ],
        ids=["uint8", "2d", "c4", "empty", "hi", "lo", "nan", "list"],
    )
    def test_bad_image_rejected(self, augmenter, bad):
        with pytest.raises(lmb.AugmentInputError):
            augmenter.augment_array(bad, 0)

    def test_non_contiguous_rejected(self, augmenter):
        strided = np.ones((16, 8, 3))[::2]
        assert not strided.flags.c_contiguous
        with pytest.raises(lmb.AugmentInputError, match="contiguous"):
            augmenter.augment_array(strided, 0)
        with pytest.raises(lmb.AugmentInputError, match="contiguous"):
            augmenter.augment_array(np.asfortranarray(np.ones((8, 8, 3))), 0)

    @pytest.mark.parametrize("sid", ["0", 1.5, True, None], ids=["str", "float", "bool", "none"])
    def test_bad_stream_id_rejected(self, augmenter, img, sid):
        with pytest.raises(lmb.AugmentInputError, match="stream_id"):
            augmenter.augment_array(img, sid)

    def test_numpy_integer_stream_id_ok(self, augmenter, img):
        out = augmenter.augment_array(img, np.int64(3))
        assert np.array_equal(out, augmenter.augment_array(img, 3))

    def test_float32_input_matches_float64(self, augmenter, img):
        f32 = img.astype(np.float32)
        assert np.array_equal(
            augmenter.augment_array(f32, 7),
            augmenter.augment_array(f32.astype(np.float64), 7),
        )

    def test_module_level_wrapper_checks_handle(self, img):
        with pytest.raises(lmb.AugmentInputError, match="BoundAugmenter"):
            lmb.augment_array(object(), img, 0)


class TestOutputContract:
    def test_shape_dtype_range(self, augmenter, img):
        out = augmenter.augment_array(img, 0)
        assert out.shape == img.shape
        assert out.dtype == np.float64
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_single_channel_input(self, augmenter):
        gray = np.random.default_rng(6).random((14, 14, 1))
        assert augmenter.augment_array(gray, 2).shape == (14, 14, 1)

    def test_output_is_a_fresh_buffer(self, augmenter, img):
        out = augmenter.augment_array(img, 1)
        assert not np.shares_memory(out, img)

    def test_input_never_mutated(self, augmenter, img):
        before = img.copy()
        augmenter.augment_array(img, 5)
        assert np.array_equal(img, before)

    def test_no_state_retained_across_calls(self, augmenter, img):
        first = augmenter.augment_array(img, 9)
        ref = first.copy()
        first[:] = 0.0  # clobbering the returned buffer must not leak back
        assert np.array_equal(augmenter.augment_array(img, 9), ref)

    def test_deterministic_per_stream(self, augmenter, img):
        a = augmenter.augment_array(img, 11)
        b = augmenter.augment_array(img, 11)
        assert np.array_equal(a, b)

    def test_streams_differ(self, augmenter, img):
        outs = [augmenter.augment_array(img, sid) for sid in range(5)]
        assert any(not np.array_equal(outs[0], o) for o in outs[1:])

    def test_threaded_equals_serial(self, augmenter):
        rng = np.random.default_rng(8)
        imgs = [rng.random((16, 12, 3)) for _ in range(16)]
        serial = [augmenter.augment_array(im, sid) for sid, im in enumerate(imgs)]
        with ThreadPoolExecutor(max_workers=8) as pool:
            threaded = list(pool.map(lambda t: augmenter.augment_array(t[1], t[0]), enumerate(imgs)))
        assert all(np.array_equal(s, t) for s, t in zip(serial, threaded))


class TestParityWithCore:
    def test_magnitude_zero_identity_path(self, bank_dir, img):
        # A stream whose draws land on (first exit, parameterized kind) must
        # return the input untouched when magnitude is 0.
        aug = lmb.make_augmenter(bank_dir, magnitude=0, seed=31)
        for sid in range(128):
            rng = lm.RngStream(31, sid)
            if lm.choose_layer_exit(rng) != 0:
                continue
            if lm.sample_transform(rng).parameterized:
                assert np.array_equal(aug.augment_array(img, sid), img)
                return
        pytest.fail("no (exit 0, parameterized) stream in 128 tries")

    def test_matches_cli_output_after_quantization(self, bank_dir, tmp_path):
        src = tmp_path / "in"
        dst = tmp_path / "out"
        src.mkdir()
        lm.save_image(str(src / "probe.png"), np.random.default_rng(12).random((20, 24, 3)))
        proc = subprocess.run(
            [sys.executable, "-m", "layermix", "augment",
             "--input", str(src), "--output", str(dst), "--fractals", bank_dir,
             "--seed", "77", "--count-per-image", "1"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        aug = lmb.make_augmenter(bank_dir, seed=77)
        ours = aug.augment_array(lm.load_image(str(src / "probe.png")), 0)
        theirs = lm.load_image(str(dst / "probe__aug0.png"))
        assert np.array_equal(lm.to_uint8(ours), lm.to_uint8(theirs))
