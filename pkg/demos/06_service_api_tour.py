"""
Tour of the control/streaming HTTP API
======================================

The service wraps one acquisition in a small HTTP+JSON surface: status,
config, start/stop, an NDJSON live stream, and a CSV download.  The
browser dashboard is just another client of these endpoints.
"""

import json
import tempfile
import threading

import requests

from octodaq.acquisition import AcquisitionConfig
from octodaq.config import ServiceSettings
from octodaq.conversion import HUMIDITY, TEMPERATURE
from octodaq.csvlog import LogPolicy
from octodaq.service import DasService
from octodaq.simulator import ConstantSource, DeviceSimulator, SimConfig, SineSource
from octodaq.transport import listen_tcp

# a simulated device on an ephemeral TCP port, like a plugged-in unit
sim = DeviceSimulator(SimConfig(
    sources={0: ConstantSource(25.0, TEMPERATURE, noise_sigma=0.1),
             3: SineSource(50.0, 20.0, 20.0, HUMIDITY)},
    clock="real-time",
))
server_sock = listen_tcp("127.0.0.1:0")
threading.Thread(target=sim.serve_tcp, args=(server_sock,), daemon=True).start()
device_addr = "%s:%d" % server_sock.getsockname()[:2]

service = DasService(ServiceSettings(
    listen="127.0.0.1:0",
    device=device_addr,
    acquisition=AcquisitionConfig(
        poll_period_ms=50, response_timeout_ms=20,
        channel_maps={0: TEMPERATURE, 3: HUMIDITY},
    ),
    log=LogPolicy(directory=tempfile.mkdtemp(prefix="octodaq_logs_")),
))
service.start()
base = f"http://{service.address}"
print(f"service listening on {base}")

print("\nGET /status ->", json.dumps(requests.get(f"{base}/status").json()))
print("GET /config ->", json.dumps(requests.get(f"{base}/config").json())[:120], "...")

requests.post(f"{base}/acquisition/start")
print("\nstarted; streaming 5 records:")
with requests.get(f"{base}/stream", stream=True) as stream:
    got = 0
    for line in stream.iter_lines():
        if not line:
            continue
        record = json.loads(line)
        values = {v["channel"]: round(v["value"], 2) for v in record["values"]}
        print(f"  seq={record['seq']:3d} {values}")
        got += 1
        if got >= 5:
            break

# channel selection is live: restrict the stream to channel 0
requests.put(f"{base}/config", json={"enabled_channels": [0]})
print("\nafter PUT enabled_channels=[0], the next record carries:")
with requests.get(f"{base}/stream", stream=True) as stream:
    for line in stream.iter_lines():
        if line:
            print("  values:", json.loads(line)["values"])
            break

requests.post(f"{base}/acquisition/stop")
status = requests.get(f"{base}/status").json()
print(f"\nstopped: {status['records']} records, {status['gaps']} gaps, "
      f"phase={status['phase']}")

log = requests.get(f"{base}/log/latest")
print(f"GET /log/latest -> {len(log.text.splitlines())} CSV lines")

service.stop()
server_sock.close()
