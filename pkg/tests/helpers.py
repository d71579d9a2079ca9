"""Shared test utilities: canned measurements, key material, live server."""
from __future__ import annotations

import random
import socket
import threading
import time
from datetime import datetime, timedelta, timezone

from firewatch.controller import Measurement

DEVICE = "356938035643809"
AREA = "ridge-07"
BASE_TS = datetime(2026, 8, 1, 6, 0, 0, tzinfo=timezone.utc)

#: A quiet forest morning; every variable rests inside its calm band.
CALM = {
    "temperature_c": 25.0,
    "humidity_pct": 50.0,
    "wind_kmh": 10.0,
    "rainfall_mm": 40.0,
    "co2_ppm": 300.0,
    "co_ppm": 0.5,
    "o2_pct": 21.0,
}


def make_measurement(seconds: float = 0, device_id: str = DEVICE,
                     area_id: str = AREA, **overrides) -> Measurement:
    fields = dict(CALM)
    for key, value in overrides.items():
        if key not in fields:
            raise TypeError(f"unknown override {key!r}")
        fields[key] = value
    return Measurement(
        device_id=device_id,
        area_id=area_id,
        timestamp=BASE_TS + timedelta(seconds=seconds),
        lat=39.0521,
        lon=-120.7214,
        battery_pct=87.0,
        **fields,
    )


def seeded_registry(device_ids=None, pool_size: int = 16, seed: int = 77):
    from firewatch.crypto import predistribute_keys

    return predistribute_keys(list(device_ids or [DEVICE]),
                              rng=random.Random(seed), pool_size=pool_size)


class Sealer:
    """Node-side sealing helper bound to one registry."""

    def __init__(self, registry, seed: int = 2000):
        from firewatch.crypto import NodeKeyState

        self.registry = registry
        self.rng = random.Random(seed)
        self.keys = {device_id: NodeKeyState(registry.get(device_id))
                     for device_id in registry.devices}

    def seal(self, measurement):
        from firewatch.crypto import seal_measurement

        record = self.registry.get(measurement.device_id)
        return seal_measurement(self.keys[measurement.device_id],
                                record.aes_key, measurement, rng=self.rng)


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveService:
    """A real uvicorn server on a background thread, for streaming tests."""

    def __init__(self, app, port: int | None = None):
        import uvicorn

        self.port = port or free_port()
        self.base_url = f"http://127.0.0.1:{self.port}"
        config = uvicorn.Config(app, host="127.0.0.1", port=self.port,
                                log_level="warning")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self) -> "LiveService":
        self.thread.start()
        deadline = time.monotonic() + 15
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("service did not start in time")
            time.sleep(0.02)
        return self

    def __exit__(self, *exc) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10)
