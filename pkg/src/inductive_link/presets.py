"""Reference link parameters (13.56 MHz transcutaneous link)."""

from __future__ import annotations

from .link import LinkDesign, Topology, make_design
from .tuning import parallel_tank_cap, series_resonance_cap

TABLE1 = {
    "freq_hz": 13.56e6,
    "l1": 5.48e-6,
    "l2": 1.0e-6,
    "r_l1": 2.12,
    "r_l2": 1.63,
    "r_load": 320.0,
}

DEFAULT_K = 0.4


def table1_design(topology="sp", k: float = DEFAULT_K, rs: float = 0.0, vs: float = 1.0,
                  tune: bool = True, c1s: float | None = None, c2p: float | None = None,
                  **overrides) -> LinkDesign:
    """Reference design, with resonant capacitors unless ``tune`` is false.

    Capacitors are tuned against the final (overridden) frequency, coils and
    load. With ``tune=False`` the caller supplies ``c1s`` (and ``c2p`` for sp).
    """
    topology = Topology.parse(topology)
    p = dict(TABLE1)
    p.update(overrides)
    if tune:
        c1s = series_resonance_cap(p["freq_hz"], p["l1"]) if c1s is None else c1s
        if topology is Topology.SERIES_PARALLEL and c2p is None:
            c2p = parallel_tank_cap(p["freq_hz"], p["l2"], p["r_load"])
    if topology is Topology.SERIES:
        c2p = None
    return make_design(topology=topology, k=k, rs=rs, vs=vs, c1s=c1s, c2p=c2p, **p)
