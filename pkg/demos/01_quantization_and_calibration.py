"""
Quantization and calibration basics
===================================

The converter reads 0 to 5 V in 1023 steps, so one code step (LSB) is
about 4.888 mV.  Calibration maps turn volts into engineering units:
0-5 V spans 0-50 degC, 1-5 V spans 10-90 %RH.
"""

from octodaq import (
    HUMIDITY,
    TEMPERATURE,
    apply_map,
    counts_to_volts,
    invert_map,
    lsb_in_units,
    lsb_volts,
    volts_to_counts,
    zener_clamp,
)

# one ADC step, in volts and in each channel's units
print(f"LSB: {lsb_volts() * 1000:.4f} mV")
print(f"     {lsb_in_units(TEMPERATURE):.4f} degC per code")
print(f"     {lsb_in_units(HUMIDITY):.4f} %RH per code")

# a few codes through the chain
for counts in (0, 512, 1023):
    volts = counts_to_volts(counts)
    temp, flag = apply_map(TEMPERATURE, volts)
    print(f"counts {counts:4d} -> {volts:.4f} V -> {temp:6.3f} degC ({flag.value})")

# and back: engineering units -> volts -> the code the device would report
print(f"25.0 degC -> {invert_map(TEMPERATURE, 25.0):.3f} V "
      f"-> counts {volts_to_counts(invert_map(TEMPERATURE, 25.0))}")

# the protection diode clips overvoltage before the converter sees it
print(f"7.3 V after the clamp: {zener_clamp(7.3):.1f} V "
      f"-> counts {volts_to_counts(zener_clamp(7.3))}")

# quantization never costs more than half a step
worst = max(
    abs(v - counts_to_volts(volts_to_counts(v)))
    for v in (i * 5.0 / 9999 for i in range(10000))
)
print(f"worst reconstruction error on a dense grid: {worst * 1000:.4f} mV "
      f"(half LSB is {lsb_volts() / 2 * 1000:.4f} mV)")
