import math

import pytest
from hypothesis import assume, given, strategies as st

from gradenet.queueing import (
    UnstableQueueError,
    channel_delay,
    congestion_score,
    mm1_state,
    network_delay,
    route_flows,
)
from gradenet.topology import NodeAttributes, generate_topology, load_topology


def node(bandwidth=100.0, traffic=0.0):
    return NodeAttributes(bandwidth, 0.5, 0.5, 1.0, 100.0, 1.0, traffic)


def test_empty_system():
    s = mm1_state(0.0, 1.0, 1.0)
    assert (s.rho, s.mean_jobs, s.mean_delay_s) == (0.0, 0.0, 1.0)


def test_half_load():
    s = mm1_state(0.5, 1.0, 1.0)
    assert s.rho == 0.5 and s.mean_jobs == 1.0


def test_hand_evaluated_state():
    # rho = 0.6 -> 0.6 / 0.4 = 1.5 jobs, 1 / (100 - 60) = 0.025 s
    s = mm1_state(60.0, 100.0, 1.0)
    assert s.mean_jobs == pytest.approx(1.5, rel=1e-12)
    assert s.mean_delay_s == pytest.approx(0.025, rel=1e-12)


def test_capacity_scales_service():
    assert mm1_state(60.0, 50.0, 2.0) == mm1_state(60.0, 100.0, 1.0)


@pytest.mark.parametrize("lam", [100.0, 150.0])
def test_unstable_queue(lam):
    with pytest.raises(UnstableQueueError) as info:
        mm1_state(lam, 100.0, 1.0)
    assert info.value.arrival == lam and info.value.service == 100.0


stable = st.tuples(
    st.floats(0.01, 1000.0), st.floats(0.01, 100.0), st.floats(0.0, 0.999)
).map(lambda t: (t[2] * t[0] * t[1], t[0], t[1]))


@given(stable, st.floats(0.0, 0.999))
def test_delay_increases_with_load(triple, other):
    lam, mu, c = triple
    lam2 = other * mu * c
    assume(lam != lam2)
    lo, hi = sorted((lam, lam2))
    assert mm1_state(lo, mu, c).mean_delay_s < mm1_state(hi, mu, c).mean_delay_s


@given(stable)
def test_little_consistency(triple):
    lam, mu, c = triple
    s = mm1_state(lam, mu, c)
    assert s.mean_jobs == pytest.approx(lam * s.mean_delay_s, rel=1e-12, abs=1e-300)
    assert s.mean_jobs == pytest.approx(s.rho / (1 - s.rho), rel=1e-12, abs=1e-300)


def test_single_channel_delay():
    assert channel_delay([1.0], [2.0], 1.0).total_delay_s == 1.0


def test_two_identical_channels():
    # 2 * (1/2) * 1/(3 - 1)
    assert channel_delay([1.0, 1.0], [3.0, 3.0], 2.0).total_delay_s == pytest.approx(0.5, rel=1e-12)


def test_saturated_channel_named():
    with pytest.raises(UnstableQueueError, match="channel b"):
        channel_delay([1.0, 2.0], [3.0, 2.0], 1.0, channels=["a", "b"])


def test_zero_gamma_rejected():
    with pytest.raises(ValueError, match="gamma"):
        channel_delay([1.0], [2.0], 0.0)


@given(st.lists(st.tuples(st.floats(1.0, 100.0), st.floats(0.0, 0.99)), min_size=2, max_size=12),
       st.floats(0.1, 100.0), st.data())
def test_removing_channel_removes_its_term(chans, gamma, data):
    service = [c for c, _ in chans]
    flows = [c * load for c, load in chans]
    full = channel_delay(flows, service, gamma)
    i = data.draw(st.integers(0, len(flows) - 1))
    reduced = channel_delay(flows[:i] + flows[i + 1:], service[:i] + service[i + 1:], gamma)
    assert full.total_delay_s - reduced.total_delay_s == pytest.approx(
        full.per_channel[i].value, rel=1e-9, abs=1e-12)


def test_network_delay_uses_sender_capacity(sample_path):
    t = load_topology(sample_path)
    flows = {(0, 1): 2.0, (1, 2): 2.0}
    d = network_delay(t, flows)
    gamma = 2.0
    expected = (2.0 / gamma) / (200.0 - 2.0) + (2.0 / gamma) / (90.0 - 2.0)
    assert d.gamma_total == gamma
    assert d.total_delay_s == pytest.approx(expected, rel=1e-12)
    assert len(d.per_channel) == len(t.edges)


def test_network_delay_sequence_form(sample_path):
    t = load_topology(sample_path)
    by_map = network_delay(t, {(0, 1): 1.0})
    seq = [1.0 if ch == (0, 1) else 0.0 for ch in sorted(t.edges)]
    assert network_delay(t, seq) == by_map
    with pytest.raises(ValueError):
        network_delay(t, [0.0])


def test_network_delay_unstable_channel(sample_path):
    t = load_topology(sample_path)
    with pytest.raises(UnstableQueueError, match=r"\(1, 2\)"):
        network_delay(t, {(1, 2): 90.0})


def test_route_flows_accumulate():
    flows = route_flows({(0, 3): (0, 1, 3), (1, 3): (1, 3)}, {(0, 3): 2.0, (1, 3): 0.5})
    assert flows == {(0, 1): 2.0, (1, 3): 2.5}


def test_generated_topology_delay_finite():
    t = generate_topology(16, 4, 0.3, seed=7)
    flows = route_flows({(0, 12): (0,)}, t.gamma)
    assert math.isfinite(network_delay(t, flows).total_delay_s)


@pytest.mark.parametrize("traffic,bandwidth,expected", [
    (0.0, 100.0, 0.0),
    (100.0, 100.0, 1.0),
    (30.0, 100.0, 0.3),
    (150.0, 100.0, 1.0),
])
def test_congestion_score(traffic, bandwidth, expected):
    assert congestion_score(node(bandwidth, traffic)) == pytest.approx(expected)
