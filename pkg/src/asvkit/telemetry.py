"""Simulated water-quality sensors and the boat-to-shore telemetry frame.

Frame layout (big-endian, 26 bytes)::

    0x7E | len:u16 (=22) | t_ms:u32 x_mm:i32 y_mm:i32 hdg_cdeg:u16
         | ph_milli:u16 ec_uScm:u32 temp_centi:i16 | checksum:u8

checksum = 0xFF - (sum(payload) mod 256).
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .io import write_csv
from .rigid_body import VehicleState, wrap_angle

START = 0x7E
PAYLOAD = struct.Struct(">IiiHHIh")
HEADER = struct.Struct(">BH")
PAYLOAD_LEN = PAYLOAD.size
FRAME_LEN = HEADER.size + PAYLOAD_LEN + 1

LOG_COLUMNS = ("t_ms", "x_m", "y_m", "heading_deg", "ph", "ec_mScm", "temp_C")
FIELD_COLUMNS = ("x", "y", "ph", "ec_ref", "temp")


@dataclass(frozen=True)
class WaterSample:
    t: int
    x: float
    y: float
    heading: float
    ph: float
    ec: float
    temp: float

    def __post_init__(self):
        if not 0.0 <= self.ph <= 14.0:
            raise ValueError(f"pH {self.ph} outside [0, 14]")
        if not self.ec >= 0.0:
            raise ValueError(f"EC {self.ec} must be >= 0")
        if not -5.0 <= self.temp <= 60.0:
            raise ValueError(f"temperature {self.temp} outside [-5, 60] C")

    @property
    def heading_deg(self) -> float:
        """Compass reading in [0, 360) degrees from north."""
        return math.degrees(self.heading) % 360.0

    def log_row(self) -> tuple:
        return (self.t, self.x, self.y, self.heading_deg, self.ph, self.ec, self.temp)


class FrameError(ValueError):
    pass


class BadStart(FrameError):
    pass


class BadLength(FrameError):
    pass


class BadChecksum(FrameError):
    pass


class BadField(FrameError):
    pass


class Incomplete(FrameError):
    pass


def checksum(payload: bytes) -> int:
    return 0xFF - (sum(payload) & 0xFF)


def _quantize(s: WaterSample) -> tuple[int, ...]:
    cdeg = round(s.heading_deg * 100.0) % 36000
    fields = (int(s.t), round(s.x * 1000.0), round(s.y * 1000.0), cdeg,
              round(s.ph * 1000.0), round(s.ec * 1000.0), round(s.temp * 100.0))
    limits = ((0, 2**32 - 1), (-2**31, 2**31 - 1), (-2**31, 2**31 - 1), (0, 35999),
              (0, 2**16 - 1), (0, 2**32 - 1), (-2**15, 2**15 - 1))
    names = ("t", "x", "y", "heading", "ph", "ec", "temp")
    for name, v, (lo, hi) in zip(names, fields, limits):
        if not lo <= v <= hi:
            raise OverflowError(f"field {name}={v} does not fit the frame ({lo}..{hi})")
    return fields


def encode_frame(s: WaterSample) -> bytes:
    payload = PAYLOAD.pack(*_quantize(s))
    return HEADER.pack(START, PAYLOAD_LEN) + payload + bytes([checksum(payload)])


def _unpack(payload: bytes) -> WaterSample:
    t, x, y, cdeg, ph, ec, temp = PAYLOAD.unpack(payload)
    if cdeg >= 36000:
        raise BadField(f"heading {cdeg} centidegrees out of range")
    try:
        return WaterSample(t, x / 1000.0, y / 1000.0, wrap_angle(math.radians(cdeg / 100.0)),
                           ph / 1000.0, ec / 1000.0, temp / 100.0)
    except ValueError as exc:
        raise BadField(str(exc)) from None


def decode_frame(data: bytes) -> WaterSample:
    """Decode exactly one frame, raising the specific FrameError subclass on failure."""
    data = bytes(data)
    if not data:
        raise Incomplete("empty input")
    if data[0] != START:
        raise BadStart(f"start byte 0x{data[0]:02X}, expected 0x{START:02X}")
    if len(data) < HEADER.size:
        raise Incomplete(f"{len(data)} bytes, header needs {HEADER.size}")
    _, length = HEADER.unpack_from(data)
    if length != PAYLOAD_LEN:
        raise BadLength(f"payload length {length}, expected {PAYLOAD_LEN}")
    if len(data) < FRAME_LEN:
        raise Incomplete(f"{len(data)} of {FRAME_LEN} bytes")
    if len(data) > FRAME_LEN:
        raise BadLength(f"{len(data) - FRAME_LEN} trailing bytes after frame")
    payload = data[HEADER.size:HEADER.size + PAYLOAD_LEN]
    if checksum(payload) != data[-1]:
        raise BadChecksum(f"checksum 0x{data[-1]:02X}, computed 0x{checksum(payload):02X}")
    return _unpack(payload)


class FrameDecoder:
    """Reassembles frames from an arbitrary byte stream.

    Bytes before a start delimiter are skipped. A frame with a bad length is
    dropped by resyncing one byte later; a frame failing its checksum is
    dropped whole.
    """

    def __init__(self):
        self.buf = bytearray()
        self.dropped = 0
        self.skipped_bytes = 0

    def feed(self, chunk: bytes) -> list[WaterSample]:
        self.buf.extend(chunk)
        out = []
        while True:
            i = self.buf.find(START)
            if i < 0:
                self.skipped_bytes += len(self.buf)
                self.buf.clear()
                break
            if i:
                self.skipped_bytes += i
                del self.buf[:i]
            if len(self.buf) < HEADER.size:
                break
            if HEADER.unpack_from(self.buf)[1] != PAYLOAD_LEN:
                self.dropped += 1
                del self.buf[:1]
                continue
            if len(self.buf) < FRAME_LEN:
                break
            frame = bytes(self.buf[:FRAME_LEN])
            del self.buf[:FRAME_LEN]
            try:
                out.append(decode_frame(frame))
            except FrameError:
                self.dropped += 1
        return out

    def close(self) -> int:
        """Flush; a trailing partial frame counts as dropped. Returns the drop count."""
        if self.buf:
            self.dropped += 1
            self.buf.clear()
        return self.dropped


def decode_stream(data: bytes) -> tuple[list[WaterSample], int]:
    dec = FrameDecoder()
    samples = dec.feed(data)
    return samples, dec.close()


def write_log(path, samples) -> Path:
    return write_csv(path, LOG_COLUMNS, (s.log_row() for s in samples))


# --- sensing -----------------------------------------------------------------

@dataclass(frozen=True)
class SensorModel:
    """Per-channel Gaussian noise (std devs) and the linear EC temperature law."""

    noise_ph: float = 0.0
    noise_ec: float = 0.0
    noise_temp: float = 0.0
    ec_temp_coeff: float = 0.025
    t_ref: float = 25.0

    def __post_init__(self):
        for name in ("noise_ph", "noise_ec", "noise_temp"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.ec_temp_coeff < 0.1:
            raise ValueError(f"ec_temp_coeff {self.ec_temp_coeff} outside [0, 0.1)")


class WaterField:
    """Spatial pH / reference-EC / temperature field on a regular grid.

    Bilinear inside the grid; queries outside are clamped to the nearest
    edge cell.
    """

    def __init__(self, xs, ys, ph, ec_ref, temp):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.values = np.stack([np.asarray(a, dtype=float) for a in (ph, ec_ref, temp)], axis=-1)
        if self.values.shape[:2] != (len(self.xs), len(self.ys)):
            raise ValueError("field arrays must have shape (len(xs), len(ys))")
        # a single grid line is widened so the interpolator has two nodes
        gx, gy, vals = self.xs, self.ys, self.values
        if len(gx) == 1:
            gx, vals = np.array([gx[0], gx[0] + 1.0]), np.concatenate([vals, vals], axis=0)
        if len(gy) == 1:
            gy, vals = np.array([gy[0], gy[0] + 1.0]), np.concatenate([vals, vals], axis=1)
        self._interp = RegularGridInterpolator((gx, gy), vals)
        self._lo = (gx[0], gy[0])
        self._hi = (gx[-1], gy[-1])

    @classmethod
    def uniform(cls, ph: float, ec_ref: float, temp: float) -> "WaterField":
        return cls([0.0], [0.0], [[ph]], [[ec_ref]], [[temp]])

    @classmethod
    def from_csv(cls, path) -> "WaterField":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(FIELD_COLUMNS) - set(reader.fieldnames):
                raise ValueError(f"{path}: field CSV needs columns {','.join(FIELD_COLUMNS)}")
            rows = [{k: float(r[k]) for k in FIELD_COLUMNS} for r in reader]
        if not rows:
            raise ValueError(f"{path}: field CSV has no rows")
        xs = sorted({r["x"] for r in rows})
        ys = sorted({r["y"] for r in rows})
        grid = np.full((len(xs), len(ys), 3), np.nan)
        ix = {v: i for i, v in enumerate(xs)}
        iy = {v: i for i, v in enumerate(ys)}
        for r in rows:
            grid[ix[r["x"]], iy[r["y"]]] = (r["ph"], r["ec_ref"], r["temp"])
        if np.isnan(grid).any():
            raise ValueError(f"{path}: field points do not form a complete x/y grid")
        return cls(xs, ys, grid[..., 0], grid[..., 1], grid[..., 2])

    def __call__(self, x: float, y: float) -> tuple[float, float, float]:
        q = [[min(max(x, self._lo[0]), self._hi[0]), min(max(y, self._lo[1]), self._hi[1])]]
        ph, ec, temp = self._interp(q)[0]
        return float(ph), float(ec), float(temp)


def ec_at_temperature(ec_ref: float, temp: float, kappa: float, t_ref: float) -> float:
    return ec_ref * (1.0 + kappa * (temp - t_ref))


def compensate_ec(ec_t: float, temp: float, kappa: float = 0.025, t_ref: float = 25.0) -> float:
    """Normalize an EC reading taken at ``temp`` to the reference temperature."""
    denom = 1.0 + kappa * (temp - t_ref)
    if not denom > 0:
        raise ValueError(f"non-positive compensation factor {denom} at {temp} C")
    return ec_t / denom


def sample_sensors(model: SensorModel, state: VehicleState, field: WaterField, t_ms: int,
                   rng: np.random.Generator) -> WaterSample:
    x, y = state.pose.x, state.pose.y
    ph, ec_ref, temp = field(x, y)
    ec = ec_at_temperature(ec_ref, temp, model.ec_temp_coeff, model.t_ref)
    # always draw three normals so the stream position does not depend on the noise settings
    n_ph, n_ec, n_temp = rng.standard_normal(3)
    ph = min(max(ph + model.noise_ph * n_ph, 0.0), 14.0)
    ec = max(ec + model.noise_ec * n_ec, 0.0)
    temp = min(max(temp + model.noise_temp * n_temp, -5.0), 60.0)
    return WaterSample(int(t_ms), x, y, state.pose.psi, ph, ec, temp)
