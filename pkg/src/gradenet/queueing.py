"""M/M/1 steady state, the network delay sum and the congestion indicator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from gradenet.topology import NodeAttributes, Topology


class UnstableQueueError(ValueError):
    """Arrival rate at or above the effective service rate mu * C."""

    def __init__(self, arrival: float, service: float, channel=None):
        self.arrival = arrival
        self.service = service
        self.channel = channel
        where = f"channel {channel}: " if channel is not None else ""
        super().__init__(f"{where}unstable queue, lambda={arrival!r} >= mu*C={service!r}")


@dataclass(frozen=True)
class QueueState:
    rho: float
    mean_jobs: float
    mean_delay_s: float


@dataclass(frozen=True)
class ChannelTerm:
    channel: object
    arrival: float
    service: float
    value: float


@dataclass(frozen=True)
class DelayBreakdown:
    total_delay_s: float
    per_channel: tuple[ChannelTerm, ...]
    gamma_total: float


def mm1_state(lam: float, mu: float, capacity: float) -> QueueState:
    """Steady state of an M/M/1 queue served at rate ``mu * capacity``.

    rho = lam / (mu C), E[n] = rho / (1 - rho), sojourn time 1 / (mu C - lam).
    """
    if lam < 0:
        raise ValueError(f"arrival rate must be nonnegative, got {lam}")
    if mu <= 0 or capacity <= 0:
        raise ValueError("service rate and capacity must be positive")
    service = mu * capacity
    if lam >= service:
        raise UnstableQueueError(lam, service)
    rho = lam / service
    return QueueState(rho=rho, mean_jobs=rho / (1.0 - rho), mean_delay_s=1.0 / (service - lam))


def node_state(attrs: NodeAttributes) -> QueueState:
    return mm1_state(attrs.arrival_rate_lambda, attrs.service_rate_mu, attrs.capacity)


def channel_delay(
    flows: Sequence[float],
    service_rates: Sequence[float],
    gamma_total: float,
    channels: Sequence[object] | None = None,
) -> DelayBreakdown:
    """T = sum_i (lambda_i / gamma) / (muC_i - lambda_i) over the given channels."""
    if len(flows) != len(service_rates):
        raise ValueError("flows and service rates differ in length")
    if not gamma_total > 0:
        raise ValueError("total external traffic gamma must be positive")
    labels = list(channels) if channels is not None else list(range(len(flows)))
    terms = []
    for label, lam, service in zip(labels, flows, service_rates):
        if lam < 0:
            raise ValueError(f"channel {label}: negative flow {lam}")
        if lam >= service:
            raise UnstableQueueError(lam, service, channel=label)
        terms.append(ChannelTerm(label, lam, service, (lam / gamma_total) / (service - lam)))
    return DelayBreakdown(
        total_delay_s=math.fsum(t.value for t in terms),
        per_channel=tuple(terms),
        gamma_total=gamma_total,
    )


def network_delay(
    topology: Topology, flows: Mapping[tuple[int, int], float] | Sequence[float]
) -> DelayBreakdown:
    """Network delay over every directed edge of ``topology``.

    ``flows`` is either a mapping edge -> lambda_i (missing edges carry no
    flow) or a sequence aligned with the edges in sorted order. A channel
    (u, v) is served at the sending node's mu * C.
    """
    channels = sorted(topology.edges)
    if isinstance(flows, Mapping):
        unknown = sorted(set(flows) - set(topology.edges))
        if unknown:
            raise KeyError(f"flow on unknown channel {unknown[0]}")
        lams = [float(flows.get(ch, 0.0)) for ch in channels]
    else:
        lams = [float(x) for x in flows]
        if len(lams) != len(channels):
            raise ValueError(f"expected {len(channels)} channel flows, got {len(lams)}")
    service = [topology.nodes[u].service_capacity for u, _ in channels]
    return channel_delay(lams, service, topology.gamma_total, channels)


def route_flows(
    routes: Mapping[tuple[int, int], Sequence[int]], gamma: Mapping[tuple[int, int], float]
) -> dict[tuple[int, int], float]:
    """Per-channel flow: sum of gamma_jk over the routes that cross each channel."""
    flows: dict[tuple[int, int], float] = {}
    for (j, k), path in routes.items():
        rate = gamma.get((j, k), 0.0)
        for hop in zip(path, path[1:]):
            flows[hop] = flows.get(hop, 0.0) + rate
    return flows


def congestion_score(attrs: NodeAttributes) -> float:
    """current_traffic / bandwidth, clamped to [0, 1]; 1 means saturated."""
    return min(1.0, max(0.0, attrs.current_traffic / attrs.bandwidth_mbps))
