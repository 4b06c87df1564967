import struct

import numpy as np
import pytest

from linearvc import lvcf


def header(rows, cols, magic=b"LVCF", version=1, dtype=1, reserved=0):
    return struct.pack("<4sBBHQQ", magic, version, dtype, reserved, rows, cols)


class TestDecode:
    def test_direct_decode_2x3(self):
        payload = np.arange(1, 7, dtype="<f4").tobytes()
        m = lvcf.decode_matrix(header(2, 3) + payload)
        assert m.shape == (2, 3)
        assert m.dtype == np.float64
        np.testing.assert_array_equal(m, [[1, 2, 3], [4, 5, 6]])

    def test_bad_magic_offset_0(self):
        raw = header(1, 1, magic=b"NOPE") + b"\x00" * 4
        with pytest.raises(lvcf.LvcfFormatError) as exc:
            lvcf.decode_matrix(raw)
        assert exc.value.offset == 0

    def test_bad_version_offset_4(self):
        raw = header(1, 1, version=9) + b"\x00" * 4
        with pytest.raises(lvcf.LvcfFormatError) as exc:
            lvcf.decode_matrix(raw)
        assert exc.value.offset == 4

    def test_bad_dtype_offset_5(self):
        raw = header(1, 1, dtype=2) + b"\x00" * 4
        with pytest.raises(lvcf.LvcfFormatError) as exc:
            lvcf.decode_matrix(raw)
        assert exc.value.offset == 5

    def test_nonzero_reserved_offset_6(self):
        raw = header(1, 1, reserved=7) + b"\x00" * 4
        with pytest.raises(lvcf.LvcfFormatError) as exc:
            lvcf.decode_matrix(raw)
        assert exc.value.offset == 6

    def test_truncated_payload_names_expected_bytes(self):
        # 2x3 f32 matrix needs 24 payload bytes; hand it 23
        raw = header(2, 3) + b"\x00" * 23
        with pytest.raises(lvcf.LvcfLengthError) as exc:
            lvcf.decode_matrix(raw)
        assert exc.value.expected == 24
        assert exc.value.actual == 23
        assert "24" in str(exc.value)

    def test_overlong_payload_rejected(self):
        raw = header(1, 1) + b"\x00" * 8
        with pytest.raises(lvcf.LvcfLengthError):
            lvcf.decode_matrix(raw)

    def test_nan_payload_rejected_with_offset(self):
        values = np.array([1.0, np.nan, 3.0], dtype="<f4")
        raw = header(1, 3) + values.tobytes()
        with pytest.raises(lvcf.LvcfFormatError) as exc:
            lvcf.decode_matrix(raw)
        assert exc.value.offset == 24 + 4 * 1

    def test_inf_payload_rejected(self):
        values = np.array([np.inf], dtype="<f4")
        with pytest.raises(lvcf.LvcfFormatError):
            lvcf.decode_matrix(header(1, 1) + values.tobytes())

    def test_zero_rows_rejected(self):
        with pytest.raises(lvcf.LvcfFormatError) as exc:
            lvcf.decode_matrix(header(0, 3))
        assert exc.value.offset == 8


class TestRoundTrip:
    def test_write_is_24_plus_payload_bytes(self, tmp_path):
        path = tmp_path / "one.lvcf"
        lvcf.write_matrix([[0.0]], path)
        assert path.stat().st_size == 28  # 24-byte header + one float32

    def test_roundtrip_random_100x64(self, tmp_path, rng):
        m = rng.standard_normal((100, 64))
        path = tmp_path / "m.lvcf"
        lvcf.write_matrix(m, path)
        back = lvcf.read_matrix(path)
        np.testing.assert_array_equal(back, m.astype(np.float32).astype(np.float64))

    def test_second_write_bitwise_identical(self, tmp_path, rng):
        m = rng.standard_normal((17, 5)) * 1e3
        first = tmp_path / "a.lvcf"
        second = tmp_path / "b.lvcf"
        lvcf.write_matrix(m, first)
        lvcf.write_matrix(lvcf.read_matrix(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_extreme_but_finite_values_survive(self, tmp_path):
        m = np.array([[3.4e38, -3.4e38, 1.4e-45, 0.0]])
        path = tmp_path / "x.lvcf"
        lvcf.write_matrix(m, path)
        np.testing.assert_array_equal(
            lvcf.read_matrix(path), m.astype(np.float32).astype(np.float64)
        )

    def test_write_rejects_nonfinite(self, tmp_path):
        with pytest.raises(ValueError):
            lvcf.write_matrix([[np.nan]], tmp_path / "bad.lvcf")
        with pytest.raises(ValueError):
            lvcf.write_matrix([[np.inf, 1.0]], tmp_path / "bad.lvcf")

    def test_write_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            lvcf.write_matrix(np.zeros((0, 3)), tmp_path / "bad.lvcf")

    def test_unwritable_path_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            lvcf.write_matrix([[1.0]], tmp_path / "no" / "such" / "dir" / "f.lvcf")

    def test_read_error_names_path(self, tmp_path):
        path = tmp_path / "corrupt.lvcf"
        path.write_bytes(b"garbage!" + b"\x00" * 32)
        with pytest.raises(lvcf.LvcfFormatError) as exc:
            lvcf.read_matrix(path)
        assert "corrupt.lvcf" in str(exc.value)
