"""
Polling a simulated device
==========================

A DeviceSimulator behaves like the firmware: it waits for poll requests
on a byte stream and answers each with one frame.  The host-side Session
issues the polls, decodes, timestamps, converts, and keeps the books.
"""

from octodaq import (
    AcquisitionConfig,
    DeviceSimulator,
    HUMIDITY,
    Session,
    SimConfig,
    SineSource,
    TEMPERATURE,
)
from octodaq.simulator import ConstantSource

sim = DeviceSimulator(SimConfig(
    sources={
        0: ConstantSource(25.0, TEMPERATURE, noise_sigma=0.2),
        3: SineSource(offset=50.0, amplitude=20.0, period_s=60.0, m=HUMIDITY),
    },
    rng_seed=1,
))
host_end, _ = sim.attach_pipe()

cfg = AcquisitionConfig(
    poll_period_ms=50,
    response_timeout_ms=20,
    channel_maps={0: TEMPERATURE, 3: HUMIDITY},
    paced=False,
)
session = Session(host_end, cfg)
subscription = session.subscribe()

summary = session.run(max_polls=10)
host_end.close()

print("seq  ch0 (degC)   ch3 (%RH)   flags")
for record in subscription.drain():
    t = record.values[0]
    h = record.values[3]
    print(f"{record.seq:3d}  {t.value:7.3f}     {h.value:7.3f}    "
          f"{t.flag.value}/{h.flag.value}")

print(f"\nsummary: {summary.polls} polls = {summary.records} records "
      f"+ {summary.timeouts} timeouts + {summary.decode_errors} decode errors")
