"""Measurement algebra: ADC quantization, overvoltage clamp, unit maps.

The converter reads 0 to 5 V in 1023 steps, so one code step (LSB) is
5/1023 V = 4.888 mV.  The divisor is deliberately 1023, not the
conventional 1024: the design this models derives its quoted 4.88 mV
accuracy from 1023 steps, and the rest of the stack follows that choice
so endpoint codes land exactly on 0 V and 5 V.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from enum import Enum

VREF = 5.0
FULL_SCALE = 1023
ZENER_VOLTS = 5.1


class QualityFlag(str, Enum):
    OK = "ok"
    UNDER_RANGE = "under-range"
    OVER_RANGE = "over-range"
    SATURATED = "saturated"


def counts_to_volts(counts: int) -> float:
    """ADC code to input volts: counts * 5 / 1023, strictly increasing."""
    c = operator.index(counts)
    if not 0 <= c <= FULL_SCALE:
        raise ValueError(f"count {c} outside 0..{FULL_SCALE}")
    return c * VREF / FULL_SCALE


def volts_to_counts(volts: float) -> int:
    """Quantize volts to the nearest ADC code, ties rounded away from zero.

    Inputs outside 0..5 V clamp to the end codes, mirroring the converter
    rails.  Rounding half away from zero is what makes
    volts_to_counts(counts_to_volts(c)) == c hold for every code.
    """
    v = float(volts)
    if not math.isfinite(v):
        raise ValueError("voltage must be finite")
    v = min(max(v, 0.0), VREF)
    # non-negative after clamping, so floor(x + 0.5) is ties-away-from-zero
    return int(math.floor(v * FULL_SCALE / VREF + 0.5))


def zener_clamp(volts: float) -> float:
    """Protection diode model: limits the conditioned signal to 0..5.1 V."""
    v = float(volts)
    if not math.isfinite(v):
        raise ValueError("voltage must be finite")
    return min(max(v, 0.0), ZENER_VOLTS)


def lsb_volts() -> float:
    """One quantization step: 5/1023 V, about 4.888 mV."""
    return VREF / FULL_SCALE


@dataclass(frozen=True)
class LinearMap:
    """Affine volts-to-engineering-units calibration.

    q(v) = q_lo + (v - v_lo) * (q_hi - q_lo) / (v_hi - v_lo)

    Out-of-range voltages clamp to the endpoint value and are flagged
    rather than extrapolated (see apply_map).
    """

    v_lo: float
    v_hi: float
    q_lo: float
    q_hi: float
    unit: str

    def __post_init__(self):
        for name in ("v_lo", "v_hi", "q_lo", "q_hi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.v_lo < self.v_hi:
            raise ValueError(f"require v_lo < v_hi, got {self.v_lo} >= {self.v_hi}")

    @property
    def slope(self) -> float:
        return (self.q_hi - self.q_lo) / (self.v_hi - self.v_lo)

    def value_at(self, volts: float) -> float:
        """Unclamped affine evaluation (extrapolates beyond the domain)."""
        if volts == self.v_lo:
            return self.q_lo
        if volts == self.v_hi:
            return self.q_hi
        return self.q_lo + (volts - self.v_lo) * self.slope

    def volts_at(self, value: float) -> float:
        """Unclamped affine inverse, the forward model of the conditioning
        circuit (which extrapolates physically until the supply rails)."""
        if value == self.q_lo:
            return self.v_lo
        if value == self.q_hi:
            return self.v_hi
        return self.v_lo + (value - self.q_lo) / self.slope


def apply_map(m: LinearMap, volts: float) -> tuple[float, QualityFlag]:
    """Convert volts to engineering units, clamping and flagging out-of-range.

    Endpoints map exactly: q(v_lo) == q_lo and q(v_hi) == q_hi.
    """
    v = float(volts)
    if not math.isfinite(v):
        raise ValueError("voltage must be finite")
    if v < m.v_lo:
        return m.q_lo, QualityFlag.UNDER_RANGE
    if v > m.v_hi:
        return m.q_hi, QualityFlag.OVER_RANGE
    return m.value_at(v), QualityFlag.OK


def invert_map(m: LinearMap, value: float) -> float:
    """Engineering units back to volts; rejects values outside the map span."""
    q = float(value)
    if not math.isfinite(q):
        raise ValueError("value must be finite")
    lo, hi = min(m.q_lo, m.q_hi), max(m.q_lo, m.q_hi)
    if not lo <= q <= hi:
        raise ValueError(f"value {q} outside map span [{lo}, {hi}] {m.unit}")
    return m.volts_at(q)


def lsb_in_units(m: LinearMap) -> float:
    """One ADC step expressed in the map's engineering units."""
    return lsb_volts() * abs(m.slope)


# Calibration presets for the two conditioned inputs this design ships
# with: temperature spans the full converter range, humidity is offset
# so 1 V reads 10 %RH.
TEMPERATURE = LinearMap(v_lo=0.0, v_hi=5.0, q_lo=0.0, q_hi=50.0, unit="degC")
HUMIDITY = LinearMap(v_lo=1.0, v_hi=5.0, q_lo=10.0, q_hi=90.0, unit="%RH")

PRESETS: dict[str, LinearMap] = {
    "temperature": TEMPERATURE,
    "humidity": HUMIDITY,
}
