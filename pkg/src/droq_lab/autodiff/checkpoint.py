"""Binary checkpoint container.

Layout: one line of UTF-8 JSON (the header, terminated by ``\\n``) followed by
raw little-endian float64 data. The header lists named sections; each section
stores a network's layer specs and the shapes of its parameters and buffers.
Section data is written in declaration order: parameters, then buffers.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .network import Network

FORMAT_VERSION = 1
MAGIC = "droq-lab-checkpoint"


def _section_header(name: str, net: Network) -> dict:
    return {
        "name": name,
        "layers": net.spec(),
        "param_shapes": [list(t.shape) for t in net.parameters],
        "n_params": int(net.flat.size),
        "n_buffers": int(net.flat_buffers.size),
    }


def save_networks(path, sections: list[tuple[str, Network]], extra: dict | None = None) -> None:
    header = {
        "magic": MAGIC,
        "format_version": FORMAT_VERSION,
        "sections": [_section_header(name, net) for name, net in sections],
        "extra": extra or {},
    }
    line = json.dumps(header, separators=(",", ":"), sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(line.encode("utf-8") + b"\n")
        for _, net in sections:
            fh.write(net.flat.astype("<f8").tobytes())
            fh.write(net.flat_buffers.astype("<f8").tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
    if header.get("magic") != MAGIC:
        raise ConfigError(f"{path} is not a droq-lab checkpoint")
    if header.get("format_version") != FORMAT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {header.get('format_version')}")
    return header


def load_networks(path) -> tuple[list[tuple[str, Network]], dict]:
    path = Path(path)
    header = read_header(path)
    with open(path, "rb") as fh:
        fh.readline()
        data = np.frombuffer(fh.read(), dtype="<f8")
    out = []
    offset = 0
    for sec in header["sections"]:
        net = Network.from_spec(sec["layers"])
        shapes = [tuple(t.shape) for t in net.parameters]
        if shapes != [tuple(s) for s in sec["param_shapes"]]:
            raise ConfigError(f"section {sec['name']!r}: parameter shapes do not match layers")
        n, nb = sec["n_params"], sec["n_buffers"]
        if offset + n + nb > data.size:
            raise ConfigError(f"{path} is truncated")
        net.flat[...] = data[offset : offset + n]
        net.flat_buffers[...] = data[offset + n : offset + n + nb]
        offset += n + nb
        out.append((sec["name"], net))
    if offset != data.size:
        raise ConfigError(f"{path} has {data.size - offset} trailing values")
    return out, header.get("extra", {})
