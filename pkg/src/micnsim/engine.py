"""Deterministic discrete-event engine: scheduler, links, face queues.

Events execute in nondecreasing time, ties broken by insertion order, so a
run is a pure function of its seed and configuration.  Each link endpoint
is a Face; a face transmits at most one data packet at a time and notifies
its node when the transmission finishes (the queue-drain hook protocols use
for just-in-time replying).  Interests bypass the data slot entirely.

Link timing (all in simulation time units): propagation 0.1, data
transmission 1, interest transmission 2^-14, per-transmission jitter drawn
uniformly from [0, 2^-18] and added to the delivery time.  Losses hit
interest and data packets independently with the configured probability; a
lost data packet still occupies the link for its transmission time.

Interests are pure latency: each one reaches the peer after its (tiny)
transmission time plus propagation and jitter, independent of other
traffic.  Serializing relayed interests per link would skew the nonce
races that decide where duplicate interests get dropped: a router that
relays two clients' interests onto one link would lose every race by a
margin far larger than the jitter, which starves entire paths.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass


class RunawayError(RuntimeError):
    """The event count ceiling was hit; the simulation is likely divergent."""


class Event:
    __slots__ = ("time", "seq", "fn", "cancelled")

    def __init__(self, time: float, seq: int, fn):
        self.time = time
        self.seq = seq
        self.fn = fn
        self.cancelled = False

    def cancel(self):
        self.cancelled = True

    def __lt__(self, other):
        return (self.time, self.seq) < (other.time, other.seq)


class Scheduler:
    def __init__(self):
        self.now = 0.0
        self._heap: list[Event] = []
        self._seq = 0
        self.executed = 0

    def schedule_at(self, time: float, fn) -> Event:
        if time < self.now:
            raise ValueError(f"cannot schedule at {time}, clock is already at {self.now}")
        ev = Event(time, self._seq, fn)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def schedule_in(self, delay: float, fn) -> Event:
        return self.schedule_at(self.now + delay, fn)

    def run(self, max_events: int = 5_000_000) -> float:
        """Process events until none remain; returns the final clock value.

        Cancelled events are skipped without advancing the clock, so a run
        ends as soon as the last live event has executed.
        """
        end = self.now
        while self._heap:
            ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            self.now = ev.time
            end = ev.time
            self.executed += 1
            if self.executed > max_events:
                raise RunawayError(
                    f"exceeded {max_events} events at t={self.now}; aborting"
                )
            ev.fn()
        return end


@dataclass(frozen=True)
class LinkParams:
    propagation: float = 0.1
    data_tx: float = 1.0
    interest_tx: float = 2.0 ** -14
    jitter_max: float = 2.0 ** -18
    loss: float = 0.0


class Face:
    """One endpoint of a bidirectional link, owned by a node.

    ``data_busy`` is True while a data packet is being transmitted out of
    this face; protocols only hand over a new data packet when it is False,
    which realizes the single-slot outgoing queue.
    """

    def __init__(self, node, link: "Link", params: LinkParams, sim):
        self.node = node
        self.link = link
        self.params = params
        self.sim = sim
        self.peer_face: Face | None = None
        self.data_busy = False

    @property
    def peer_node(self):
        return self.peer_face.node

    def __repr__(self):
        return f"Face({self.node.name}->{self.peer_node.name})"

    def _lost(self) -> bool:
        p = self.params.loss
        return p > 0.0 and self.sim.rng.random() < p

    def _jitter(self) -> float:
        j = self.params.jitter_max
        return float(self.sim.rng.random() * j) if j > 0.0 else 0.0

    def send_data(self, packet) -> None:
        """Start transmitting a data packet; requires an idle data slot."""
        if self.data_busy:
            raise AssertionError(f"{self!r}: data slot already occupied")
        sched = self.sim.scheduler
        self.data_busy = True
        self.sim.trace("data-tx", self.node.name, index=_packet_index(packet),
                       peer=self.peer_node.name)
        tx_end = sched.now + self.params.data_tx
        if self._lost():
            self.sim.trace("drop", self.node.name, index=_packet_index(packet),
                           peer=self.peer_node.name)
        else:
            peer_face = self.peer_face
            sched.schedule_at(tx_end + self.params.propagation + self._jitter(),
                              lambda: peer_face.node.on_data(packet, peer_face))
        sched.schedule_at(tx_end, self._drain)

    def _drain(self):
        self.data_busy = False
        self.node.on_queue_drain(self)

    def send_interest(self, packet) -> None:
        """Transmit an interest; independent of the data slot and of other
        interests (see module docstring)."""
        sched = self.sim.scheduler
        self.sim.trace("interest-tx", self.node.name, index=_packet_index(packet),
                       peer=self.peer_node.name)
        if self._lost():
            self.sim.trace("drop", self.node.name, index=_packet_index(packet),
                           peer=self.peer_node.name)
            return
        peer_face = self.peer_face
        sched.schedule_at(sched.now + self.params.interest_tx + self.params.propagation
                          + self._jitter(),
                          lambda: peer_face.node.on_interest(packet, peer_face))


def _packet_index(packet):
    for attr in ("index", "segment"):
        value = getattr(packet, attr, None)
        if isinstance(value, int):
            return value
        if value is not None and hasattr(value, "index"):
            return value.index
    return None


class Link:
    """A bidirectional link as two cross-wired faces."""

    def __init__(self, node_a, node_b, params: LinkParams, sim):
        self.params = params
        self.face_a = Face(node_a, self, params, sim)
        self.face_b = Face(node_b, self, params, sim)
        self.face_a.peer_face = self.face_b
        self.face_b.peer_face = self.face_a

    def __repr__(self):
        return f"Link({self.face_a.node.name}<->{self.face_b.node.name})"
