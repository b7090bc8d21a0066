import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asvkit.rigid_body import Pose, VehicleState
from asvkit.telemetry import (FRAME_LEN, BadChecksum, BadField, BadLength, BadStart,
                              FrameDecoder, FrameError, Incomplete, SensorModel, WaterField,
                              WaterSample, checksum, compensate_ec, decode_frame,
                              decode_stream, ec_at_temperature, encode_frame, sample_sensors,
                              write_log)

samples = st.builds(
    WaterSample,
    t=st.integers(0, 2**32 - 1),
    x=st.floats(-2e6, 2e6),
    y=st.floats(-2e6, 2e6),
    heading=st.floats(-math.pi, math.pi),
    ph=st.floats(0, 14),
    ec=st.floats(0, 4e6),
    temp=st.floats(-5, 60),
)


def angle_gap(a, b):
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def assert_round_trip(s, back):
    assert back.t == s.t
    assert abs(back.x - s.x) <= 0.5e-3 + 1e-9
    assert abs(back.y - s.y) <= 0.5e-3 + 1e-9
    assert angle_gap(back.heading, s.heading) <= math.radians(0.005) + 1e-12
    assert abs(back.ph - s.ph) <= 0.5e-3 + 1e-12
    assert abs(back.ec - s.ec) <= 0.5e-3 + 1e-9
    assert abs(back.temp - s.temp) <= 0.5e-2 + 1e-12


# --- frame layout -------------------------------------------------------------

def test_zero_sample_frame():
    f = encode_frame(WaterSample(0, 0, 0, 0, 0, 0, 0))
    assert len(f) == FRAME_LEN == 26
    assert f[:3] == b"\x7e\x00\x16"
    assert f[3:25] == bytes(22)
    assert f[25] == 0xFF


def test_ph_encoding_big_endian():
    f = encode_frame(WaterSample(0, 0, 0, 0, 7.0, 0, 0))
    # payload offsets: t 0-3, x 4-7, y 8-11, heading 12-13, pH 14-15
    assert f[3 + 14:3 + 16] == b"\x1b\x58"


def test_full_layout():
    s = WaterSample(0x01020304, -0.001, 2.0, math.radians(90), 6.5, 13.5, -1.25)
    f = encode_frame(s)
    p = f[3:25]
    assert p[0:4] == b"\x01\x02\x03\x04"
    assert p[4:8] == (-1).to_bytes(4, "big", signed=True)
    assert p[8:12] == (2000).to_bytes(4, "big")
    assert p[12:14] == (9000).to_bytes(2, "big")
    assert p[14:16] == (6500).to_bytes(2, "big")
    assert p[16:20] == (13500).to_bytes(4, "big")
    assert p[20:22] == (-125).to_bytes(2, "big", signed=True)
    assert f[25] == 0xFF - sum(p) % 256


def test_heading_quantization():
    s = WaterSample(0, 0, 0, math.radians(359.99), 7, 1, 20)
    p = encode_frame(s)[3:25]
    assert int.from_bytes(p[12:14], "big") == 35999
    assert decode_frame(encode_frame(s)).heading_deg == pytest.approx(359.99)


def test_heading_near_full_turn_wraps_to_zero():
    s = WaterSample(0, 0, 0, math.radians(-0.001), 7, 1, 20)
    assert int.from_bytes(encode_frame(s)[15:17], "big") == 0


def test_checksum_definition():
    assert checksum(b"") == 0xFF
    assert checksum(bytes([0xFF, 0x01])) == 0xFF
    assert checksum(bytes([1, 2, 3])) == 0xF9


@pytest.mark.parametrize("kwargs", [{"x": 2.2e6}, {"y": -2.2e6}, {"ec": 4.3e6}, {"t": 2**32}])
def test_field_overflow_rejected(kwargs):
    base = dict(t=0, x=0.0, y=0.0, heading=0.0, ph=7.0, ec=1.0, temp=20.0)
    with pytest.raises(OverflowError):
        encode_frame(WaterSample(**{**base, **kwargs}))


@pytest.mark.parametrize("kwargs", [{"ph": -0.1}, {"ph": 14.1}, {"ec": -1}, {"temp": 61}, {"temp": -6}])
def test_sample_invariants(kwargs):
    base = dict(t=0, x=0.0, y=0.0, heading=0.0, ph=7.0, ec=1.0, temp=20.0)
    with pytest.raises(ValueError):
        WaterSample(**{**base, **kwargs})


# --- decoding -----------------------------------------------------------------

@settings(max_examples=300)
@given(samples)
def test_round_trip(s):
    assert_round_trip(s, decode_frame(encode_frame(s)))


def test_round_trip_seeded_batch():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        s = WaterSample(int(rng.integers(0, 2**32)), *rng.uniform(-1e4, 1e4, 2),
                        rng.uniform(-math.pi, math.pi), rng.uniform(0, 14), rng.uniform(0, 50),
                        rng.uniform(-5, 60))
        assert_round_trip(s, decode_frame(encode_frame(s)))


def test_decode_errors_are_distinct():
    f = encode_frame(WaterSample(1234, 1, 2, 0.3, 7, 13, 30))
    with pytest.raises(Incomplete):
        decode_frame(b"")
    with pytest.raises(Incomplete):
        decode_frame(f[:10])
    with pytest.raises(BadStart):
        decode_frame(b"\x7f" + f[1:])
    with pytest.raises(BadLength):
        decode_frame(f[:1] + b"\x00\x15" + f[3:])
    with pytest.raises(BadLength):
        decode_frame(f + b"\x00")
    flipped = bytearray(f)
    flipped[10] ^= 0x01
    with pytest.raises(BadChecksum):
        decode_frame(bytes(flipped))
    for cls in (Incomplete, BadStart, BadLength, BadChecksum, BadField):
        assert issubclass(cls, FrameError)


def test_bad_field_reported():
    payload = bytearray(22)
    payload[12:14] = (36000).to_bytes(2, "big")
    frame = b"\x7e\x00\x16" + bytes(payload) + bytes([checksum(payload)])
    with pytest.raises(BadField):
        decode_frame(frame)


@given(samples, st.integers(0, 21), st.integers(1, 255))
def test_single_payload_byte_corruption_detected(s, pos, delta):
    f = bytearray(encode_frame(s))
    f[3 + pos] = (f[3 + pos] + delta) % 256
    with pytest.raises(BadChecksum):
        decode_frame(bytes(f))


# --- stream decoder -----------------------------------------------------------

def _frames(n):
    return [WaterSample(i * 1000, i, -i, 0.1 * i, 7.0, 12.0 + i, 30.0) for i in range(n)]


def test_stream_decodes_in_chunks():
    data = b"".join(encode_frame(s) for s in _frames(5))
    dec = FrameDecoder()
    out = []
    for i in range(0, len(data), 7):
        out += dec.feed(data[i:i + 7])
    assert [s.t for s in out] == [0, 1000, 2000, 3000, 4000]
    assert dec.close() == 0


def test_stream_drops_one_corrupt_frame():
    frames = [bytearray(encode_frame(s)) for s in _frames(4)]
    frames[2][12] ^= 0x40
    out, dropped = decode_stream(b"".join(frames))
    assert [s.t for s in out] == [0, 1000, 3000]
    assert dropped == 1


def test_stream_resyncs_after_garbage_and_bad_length():
    good = [encode_frame(s) for s in _frames(2)]
    junk = b"\x01\x02\x7e\xff\xff\x03"
    out, dropped = decode_stream(junk + good[0] + good[1])
    assert [s.t for s in out] == [0, 1000]
    assert dropped == 1


def test_stream_truncated_tail_counts_as_dropped():
    data = b"".join(encode_frame(s) for s in _frames(3))
    out, dropped = decode_stream(data[:-5])
    assert len(out) == 2 and dropped == 1


def test_stream_empty():
    assert decode_stream(b"") == ([], 0)


def test_write_log(tmp_path):
    p = write_log(tmp_path / "log.csv", _frames(2))
    lines = p.read_bytes().split(b"\n")
    assert lines[0] == b"t_ms,x_m,y_m,heading_deg,ph,ec_mScm,temp_C"
    assert lines[2].startswith(b"1000,1,-1,5.72957795,7,13,30")
    assert b"\r" not in p.read_bytes()


# --- sensing ------------------------------------------------------------------

def test_ec_temperature_law():
    assert ec_at_temperature(11.0, 31.0, 0.025, 21.0) == pytest.approx(13.75)
    assert ec_at_temperature(11.0, 25.0, 0.025, 25.0) == 11.0


def test_compensate_examples():
    assert compensate_ec(13.5, 31.0, 0.025, 21.0) == pytest.approx(10.8)
    assert compensate_ec(13.5, 21.0, 0.025, 21.0) == 13.5
    with pytest.raises(ValueError):
        compensate_ec(1.0, -100.0, 0.025, 25.0)


@given(st.floats(0.01, 100), st.floats(-5, 60), st.floats(0.02, 0.03), st.floats(15, 30))
def test_compensation_inverts_sensor_law(ec_ref, temp, kappa, t_ref):
    raw = ec_at_temperature(ec_ref, temp, kappa, t_ref)
    assert compensate_ec(raw, temp, kappa, t_ref) == pytest.approx(ec_ref, rel=1e-12)


def test_sensor_model_validation():
    with pytest.raises(ValueError):
        SensorModel(noise_ph=-0.1)
    with pytest.raises(ValueError):
        SensorModel(ec_temp_coeff=0.5)


def _state(x=0.0, y=0.0):
    return VehicleState(Pose(x, y, 0.2))


def test_noiseless_flat_field_is_deterministic():
    field = WaterField.uniform(7.0, 11.0, 31.0)
    m = SensorModel(t_ref=21.0)
    rng = np.random.default_rng(0)
    a = sample_sensors(m, _state(), field, 0, rng)
    b = sample_sensors(m, _state(), field, 0, rng)
    assert a == b
    assert a.ec == pytest.approx(13.75)


def test_reference_temperature_returns_reference_ec():
    s = sample_sensors(SensorModel(), _state(), WaterField.uniform(7.0, 11.0, 25.0), 0,
                       np.random.default_rng(0))
    assert s.ec == 11.0


def test_sampling_seeded():
    m = SensorModel(noise_ph=0.05, noise_ec=0.1, noise_temp=0.2)
    field = WaterField.uniform(7.0, 11.0, 31.0)
    a = [sample_sensors(m, _state(), field, 0, np.random.default_rng(5)) for _ in range(2)]
    assert a[0] == a[1]


def test_noise_mean_converges():
    sigma, n = 0.2, 4000
    m = SensorModel(noise_ec=sigma)
    field = WaterField.uniform(7.0, 11.0, 31.0)
    rng = np.random.default_rng(123)
    ec = np.array([sample_sensors(m, _state(), field, 0, rng).ec for _ in range(n)])
    mean = ec_at_temperature(11.0, 31.0, 0.025, 25.0)
    assert abs(ec.mean() - mean) < 4 * sigma / math.sqrt(n)


def test_field_bilinear_and_clamped(tmp_path):
    f = tmp_path / "field.csv"
    f.write_text("x,y,ph,ec_ref,temp\n0,0,6,10,20\n10,0,8,10,20\n0,10,6,12,30\n10,10,8,12,30\n")
    field = WaterField.from_csv(f)
    assert field(5, 5) == pytest.approx((7.0, 11.0, 25.0))
    assert field(2.5, 0) == pytest.approx((6.5, 10.0, 20.0))
    # outside the grid the nearest edge is used
    assert field(-50, 100) == pytest.approx((6.0, 12.0, 30.0))


def test_field_csv_errors(tmp_path):
    f = tmp_path / "field.csv"
    f.write_text("x,y,ph\n0,0,7\n")
    with pytest.raises(ValueError, match="columns"):
        WaterField.from_csv(f)
    f.write_text("x,y,ph,ec_ref,temp\n0,0,6,10,20\n10,0,8,10,20\n0,10,6,12,30\n")
    with pytest.raises(ValueError, match="grid"):
        WaterField.from_csv(f)
    f.write_text("x,y,ph,ec_ref,temp\n")
    with pytest.raises(ValueError, match="no rows"):
        WaterField.from_csv(f)
