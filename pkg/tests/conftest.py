import threading

import pytest

from octodaq.conversion import HUMIDITY, TEMPERATURE
from octodaq.simulator import ConstantSource, DeviceSimulator, SimConfig, SineSource
from octodaq.transport import listen_tcp


@pytest.fixture
def sim_server():
    """A TCP device simulator on an ephemeral localhost port.

    Yields (sim, "host:port"); accepts sequential reconnections the way
    a physical device survives the host app restarting.
    """
    cfg = SimConfig(
        sources={
            0: ConstantSource(25.0, TEMPERATURE),
            3: SineSource(50.0, 20.0, 120.0, HUMIDITY),
        },
        rng_seed=11,
    )
    sim = DeviceSimulator(cfg)
    server = listen_tcp("127.0.0.1:0")
    stop = threading.Event()
    thread = threading.Thread(
        target=sim.serve_tcp, args=(server,), kwargs={"stop": stop}, daemon=True
    )
    thread.start()
    host, port = server.getsockname()[:2]
    try:
        yield sim, f"{host}:{port}"
    finally:
        stop.set()
        server.close()
        thread.join(timeout=2.0)
