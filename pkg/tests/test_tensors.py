import struct

import numpy as np
import pytest

from pdloss import DomainError, FeatureMap, FormatError, Image, fmap_read, fmap_write, image_read, image_write


def write_bytes(path, data):
    path.write_bytes(data)
    return path


def test_pgm_single_white_pixel(tmp_path):
    img = image_read(write_bytes(tmp_path / "a.pgm", b"P5\n1 1\n255\n\xff"))
    assert img.shape == (1, 1, 1)
    assert img.data[0, 0, 0] == 1.0


def test_ppm_linear_scaling(tmp_path):
    img = image_read(write_bytes(tmp_path / "a.ppm", b"P6 1 1 255\n\x00\x80\xff"))
    assert img.channels == 3
    np.testing.assert_array_equal(img.data.ravel(), [0.0, 128 / 255, 1.0])


def test_header_comments_are_skipped(tmp_path):
    img = image_read(write_bytes(tmp_path / "a.pgm", b"P5\n# made by hand\n2 1\n255\n\x00\xff"))
    np.testing.assert_array_equal(img.data.ravel(), [0.0, 1.0])


@pytest.mark.parametrize(
    "blob, field",
    [
        (b"P5\n2 2\n255\n\x01\x02\x03", "payload"),
        (b"P5\n2 2\n65535\n" + b"\x00" * 8, "maxval"),
        (b"P3\n1 1\n255\n1", "magic"),
        (b"P5\nx 1\n255\n\x00", "width"),
        (b"P5\n1 0\n255\n", "height"),
        (b"P5\n1 1\n", "maxval"),
    ],
)
def test_malformed_files_name_the_field(tmp_path, blob, field):
    path = write_bytes(tmp_path / "bad.pgm", blob)
    with pytest.raises(FormatError) as info:
        image_read(path)
    assert info.value.field == field
    assert field in str(info.value) or field == "payload" and "truncated" in str(info.value)


def test_write_known_bytes(tmp_path):
    image_write(Image(np.array([[[1.0]]])), tmp_path / "one.pgm")
    assert (tmp_path / "one.pgm").read_bytes().endswith(b"\n\xff")
    image_write(Image(np.array([[[0.5]]])), tmp_path / "half.pgm")
    # 127.5 rounds half-up
    assert (tmp_path / "half.pgm").read_bytes()[-1] == 128


def test_every_byte_value_round_trips(tmp_path):
    levels = np.arange(256, dtype=np.float64) / 255.0
    img = Image(levels.reshape(1, 16, 16))
    image_write(img, tmp_path / "all.pgm")
    assert image_read(tmp_path / "all.pgm") == img


def test_quantization_error_bound(tmp_path, rng):
    # exhaustive: the worst case over all 256 bins is half a step
    x = np.linspace(0, 1, 255 * 64 + 1)
    err = np.abs(np.floor(x * 255 + 0.5) / 255 - x)
    assert err.max() <= 1 / 510 + 1e-15

    img = Image(rng.uniform(size=(3, 8, 8)))
    image_write(img, tmp_path / "rgb.ppm")
    back = image_read(tmp_path / "rgb.ppm")
    assert back.shape == img.shape
    assert np.max(np.abs(back.data - img.data)) <= 1 / 510 + 1e-15


def test_image_rejects_bad_values():
    with pytest.raises(DomainError):
        Image(np.full((1, 2, 2), np.nan))
    with pytest.raises(DomainError):
        Image(np.full((1, 2, 2), 1.5))
    with pytest.raises(DomainError):
        Image(np.zeros((2, 2, 2)))


def test_image_is_immutable():
    img = Image(np.zeros((1, 2, 2)))
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 1.0


def test_fmap_single_value(tmp_path):
    fm = FeatureMap(np.array([[2.5]], dtype=np.float32))
    fmap_write(fm, tmp_path / "x.fmap")
    raw = (tmp_path / "x.fmap").read_bytes()
    # 16-byte header (magic + three u32 fields) and one float32
    assert len(raw) == 20
    assert raw[:4] == b"FMAP"
    assert struct.unpack("<III", raw[4:16]) == (1, 1, 1)
    assert struct.unpack("<f", raw[16:])[0] == 2.5
    assert fmap_read(tmp_path / "x.fmap") == fm


def test_fmap_bit_exact_round_trip(tmp_path, rng):
    data = rng.normal(size=(16, 8)).astype(np.float32)
    fmap_write(FeatureMap(data), tmp_path / "r.fmap")
    back = fmap_read(tmp_path / "r.fmap")
    assert back.data.tobytes() == data.tobytes()


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda raw: raw[:-1], "payload"),
        (lambda raw: raw + b"\x00", "payload"),
        (lambda raw: b"FMAQ" + raw[4:], "magic"),
        (lambda raw: raw[:4] + struct.pack("<I", 2) + raw[8:], "version"),
        (lambda raw: raw[:10], "header"),
    ],
)
def test_fmap_format_errors(tmp_path, mutate, field):
    fmap_write(FeatureMap(np.ones((2, 3), dtype=np.float32)), tmp_path / "ok.fmap")
    raw = (tmp_path / "ok.fmap").read_bytes()
    (tmp_path / "bad.fmap").write_bytes(mutate(raw))
    with pytest.raises(FormatError) as info:
        fmap_read(tmp_path / "bad.fmap")
    assert info.value.field == field


def test_feature_map_rejects_inf():
    with pytest.raises(DomainError):
        FeatureMap(np.array([[1.0, np.inf]]))
