"""Per-node protocol state machines.

Four behaviors share the node/face machinery:

* ``micn`` - coded interests with per-subset indices, loop detection by
  nonce, cache hits answered by just-in-time re-encoding (replies are
  generated only when the outgoing face is free, from the cache state at
  that moment), multicast forwarding over the FIB, and content redirection
  when the same nonce shows up on a second face.
* ``micn-ic`` - micn plus interest cancellation: client interests carry the
  client's identifier hash and a bitmap of already-available subset
  indices; routers demote matching pending entries to low priority and
  delete them once a higher-index reply has been sent to that client.
* ``netcodccn`` - undifferentiated coded interests per generation; a node
  replies only while its cache rank exceeds the number of coded segments
  already sent on that face.
* ``ndn`` - exact-match segment names, PIT aggregation by name, multicast
  forwarding.

All protocols answer pending interests through the same discipline: at
most one data packet per face is in flight, and whenever a face finishes a
transmission the oldest satisfiable pending entry for that face is served
from the current cache.
"""

from __future__ import annotations

import hashlib
from collections import deque

import numpy as np

from .content import (CodedSegment, DataPacket, Generation, InterestPacket,
                      PlainData, PlainInterest)
from .gf import Field, RrefBasis
from .milic import subset_of

NORMAL = 0
LOW = 1

PROTOCOLS = ("ndn", "netcodccn", "micn", "micn-ic")


def client_hash(name: str) -> int:
    """Stable 64-bit hash of a node name (client identifier field)."""
    return int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "big")


class PitEntry:
    __slots__ = ("index", "nonce", "in_faces", "arrival", "volatile",
                 "priority", "client", "out_faces", "alive")

    def __init__(self, index, nonce, in_face, arrival, volatile, client):
        self.index = index
        self.nonce = nonce
        self.in_faces = [in_face]   # first element is the original arrival
        self.arrival = arrival
        self.volatile = volatile
        self.priority = NORMAL
        self.client = client
        self.out_faces = []
        self.alive = True

    @property
    def in_face(self):
        return self.in_faces[0]


class PitSubtable:
    """Entries for one (prefix, generation), sorted by arrival."""

    def __init__(self):
        self.entries: list[PitEntry] = []
        self.by_nonce: dict[int, PitEntry] = {}
        self.seen: set[int] = set()
        self._arrival = 0

    def add(self, index, nonce, in_face, volatile, client) -> PitEntry:
        e = PitEntry(index, nonce, in_face, self._arrival, volatile, client)
        self._arrival += 1
        self.entries.append(e)
        self.by_nonce[nonce] = e
        return e

    def remove(self, entry: PitEntry):
        entry.alive = False
        self.by_nonce.pop(entry.nonce, None)

    def compact(self):
        if len(self.entries) > 64 and sum(e.alive for e in self.entries) * 2 < len(self.entries):
            self.entries = [e for e in self.entries if e.alive]

    def live(self):
        return (e for e in self.entries if e.alive)


class Node:
    """Shared node state: faces, FIB, roles, per-client bookkeeping."""

    def __init__(self, name: str, role: str, sim, *, field: Field,
                 generation: Generation, pipeline: int, timeout: float):
        self.name = name
        self.role = role
        self.sim = sim
        self.field = field
        self.generation = generation
        self.pipeline = pipeline
        self.timeout = timeout
        self.faces = []
        self.fib = []
        # diagnostics
        self.loop_drops = 0
        self.redirects = 0
        self.inconsistent_drops = 0
        self.cancelled_entries = 0
        # client-side stats
        self.interests_sent = 0
        self.timeouts = 0
        self.data_rx = 0
        self.data_rx_innovative = 0
        self.done = False
        self.done_time = None
        self.first_data_time = None
        self.max_outstanding = 0
        self._timers = {}

    @property
    def key(self):
        return (self.generation.prefix, self.generation.generation_id)

    def start(self):
        pass

    def on_interest(self, pkt, face):
        raise NotImplementedError

    def on_data(self, pkt, face):
        raise NotImplementedError

    def on_queue_drain(self, face):
        self._serve_face(face)

    def _serve_face(self, face):
        raise NotImplementedError

    def _serve_all_faces(self):
        for f in self.faces:
            self._serve_face(f)

    def rank(self) -> int:
        raise NotImplementedError

    def pit_live_entries(self) -> int:
        raise NotImplementedError

    def _fresh_nonce(self) -> int:
        return int(self.sim.rng.integers(0, 2 ** 63, dtype=np.int64))

    def _arm_timer(self, token, fn):
        ev = self.sim.scheduler.schedule_in(self.timeout, fn)
        self._timers[token] = ev
        self.max_outstanding = max(self.max_outstanding, len(self._timers))

    def _cancel_all_timers(self):
        for ev in self._timers.values():
            ev.cancel()
        self._timers.clear()

    def _complete(self):
        self.done = True
        self.done_time = self.sim.scheduler.now
        self._cancel_all_timers()
        self.sim.trace("decode-complete", self.name, index=self.rank())


class CodedNode(Node):
    """Base for the coded protocols: cache is an RREF basis with payloads."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._cs: dict[tuple, RrefBasis] = {}
        self._pit: dict[tuple, PitSubtable] = {}
        if self.role == "source":
            self._preload_source()

    def _preload_source(self):
        gen = self.generation
        basis = self.basis(self.key)
        for j, seg in enumerate(gen.segments):
            vec = np.zeros(gen.n, dtype=np.uint8)
            vec[j] = 1
            basis.insert(vec, seg)

    def basis(self, key) -> RrefBasis:
        b = self._cs.get(key)
        if b is None:
            b = RrefBasis(self.field, self.generation.n, self.generation.segment_size)
            self._cs[key] = b
        return b

    def sub(self, key) -> PitSubtable:
        s = self._pit.get(key)
        if s is None:
            s = PitSubtable()
            self._pit[key] = s
        return s

    def rank(self) -> int:
        return self.basis(self.key).rank

    def pit_live_entries(self) -> int:
        return sum(1 for s in self._pit.values() for _ in s.live())


class MicnNode(CodedNode):
    def __init__(self, *args, ic: bool = False, **kwargs):
        super().__init__(*args, **kwargs)
        self.ic = ic
        self._next_index = 1
        self._known_state: dict[int, int] = {}   # client hash -> state bitmap
        self._max_sent: dict[tuple, int] = {}    # (key, client hash) -> highest index sent
        if self.role == "client":
            self._client_id = client_hash(self.name)

    # -- interest path -----------------------------------------------------

    def on_interest(self, pkt: InterestPacket, face):
        key = (pkt.prefix, pkt.generation_id)
        sub = self.sub(key)
        cs = self.basis(key)
        if self.ic and pkt.client_id is not None and pkt.state:
            self._apply_state(sub, key, pkt.client_id, pkt.state)
        if pkt.nonce in sub.seen:
            live = sub.by_nonce.get(pkt.nonce)
            if live is not None and face not in live.in_faces:
                # The duplicate proves an alternate reverse path to the
                # client.  With matching content and an idle alternate face
                # the reply is redirected right away; otherwise the face is
                # remembered so the eventual reply can use whichever path
                # drains first.
                if (live.in_face.data_busy and not face.data_busy
                        and cs.contains_index(pkt.index)):
                    sub.remove(live)
                    self.redirects += 1
                    self._reply(face, key, pkt.index, live.client)
                    return
                live.in_faces.append(face)
                return
            self.loop_drops += 1
            return
        sub.seen.add(pkt.nonce)
        if cs.contains_index(pkt.index):
            if not face.data_busy:
                self._reply(face, key, pkt.index, pkt.client_id)
            else:
                entry = sub.add(pkt.index, pkt.nonce, face, True, pkt.client_id)
                self._demote_if_known(sub, key, entry)
        else:
            entry = sub.add(pkt.index, pkt.nonce, face, False, pkt.client_id)
            if self._demote_if_known(sub, key, entry):
                entry.out_faces = [f for f in self.fib if f is not face]
                for f in entry.out_faces:
                    f.send_interest(pkt)

    def _apply_state(self, sub: PitSubtable, key, client, state: int):
        # State bitmaps only ever grow, so merge what each interest carries.
        self._known_state[client] = self._known_state.get(client, 0) | state
        already_sent = self._max_sent.get((key, client), 0)
        for e in sub.live():
            if e.client == client and e.priority == NORMAL and (state >> (e.index - 1)) & 1:
                # Content for a higher index already went out to this client:
                # the obsolete entry is deleted outright, otherwise it is kept
                # at low priority until that happens.
                if e.index < already_sent:
                    sub.remove(e)
                    self.cancelled_entries += 1
                else:
                    e.priority = LOW

    def _demote_if_known(self, sub: PitSubtable, key, entry: PitEntry) -> bool:
        """Apply the last state a client reported to its fresh entry; returns
        False when the entry was cancelled outright (relayed copies can trail
        both the state and the replies)."""
        if not self.ic or entry.client is None:
            return True
        known = self._known_state.get(entry.client, 0)
        if (known >> (entry.index - 1)) & 1:
            if entry.index < self._max_sent.get((key, entry.client), 0):
                sub.remove(entry)
                self.cancelled_entries += 1
                return False
            entry.priority = LOW
        return True

    # -- reply path ----------------------------------------------------------

    def _reply(self, face, key, index, client):
        cs = self.basis(key)
        vec, pay = cs.reencode(index, self.sim.rng)
        seg = CodedSegment(key[0], key[1], index, vec, pay)
        face.send_data(DataPacket(seg))
        if self.ic and client is not None:
            sent_key = (key, client)
            if index > self._max_sent.get(sent_key, 0):
                self._max_sent[sent_key] = index
            self._delete_cancelled(self.sub(key), client, self._max_sent[sent_key])

    def _delete_cancelled(self, sub: PitSubtable, client, served_index):
        for e in sub.live():
            if e.client == client and e.priority == LOW and e.index < served_index:
                sub.remove(e)
                self.cancelled_entries += 1
        sub.compact()

    def _serve_face(self, face):
        if face.data_busy:
            return
        for key, sub in self._pit.items():
            cs = self._cs.get(key)
            if cs is None or cs.rank == 0:
                continue
            best = None
            for priority in (NORMAL, LOW):
                for e in sub.entries:
                    if not (e.alive and e.priority == priority and face in e.in_faces):
                        continue
                    if priority == LOW and e.index < self._max_sent.get((key, e.client), 0):
                        # Deletion condition already holds: content for a
                        # higher index went to this client after the demotion.
                        sub.remove(e)
                        self.cancelled_entries += 1
                        continue
                    if cs.contains_index(e.index):
                        best = e
                        break
                if best is not None:
                    break
            if best is not None:
                sub.remove(best)
                sub.compact()
                self._reply(face, key, best.index, best.client)
                return

    # -- data path -----------------------------------------------------------

    def on_data(self, pkt: DataPacket, face):
        seg = pkt.segment
        if subset_of(seg.vector) != seg.index:
            self.inconsistent_drops += 1
            return
        key = (seg.prefix, seg.generation_id)
        cs = self.basis(key)
        innovative = cs.insert(seg.vector, seg.payload)
        self.sim.trace("data-rx", self.name, index=seg.index, innovative=innovative,
                       peer=face.peer_node.name)
        if innovative:
            self.sim.trace("rank-change", self.name, index=cs.rank)
        if self.role == "client":
            self._client_receive(seg, innovative)
        self._serve_all_faces()

    # -- client behavior -----------------------------------------------------

    def start(self):
        if self.role != "client":
            return
        for _ in range(min(self.pipeline, self.generation.n)):
            self._issue_next()

    def _issue_next(self, skip=frozenset()) -> bool:
        """Request the next index the client still needs; False when exhausted."""
        while self._next_index <= self.generation.n and self._next_index in skip:
            self._next_index += 1
        i = self._next_index
        if i > self.generation.n:
            return False
        self._next_index += 1
        self._request_index(i)
        return True

    def _request_index(self, i):
        pkt = InterestPacket(
            self.generation.prefix, self.generation.generation_id, i,
            self._fresh_nonce(),
            client_id=self._client_id if self.ic else None,
            state=self._state_bitmap() if self.ic else None,
        )
        self.interests_sent += 1
        for f in self.fib:
            f.send_interest(pkt)
        self._arm_timer(i, lambda: self._on_timeout(i))

    def _state_bitmap(self) -> int:
        state = 0
        for i in self.basis(self.key).pivots:
            state |= 1 << (i - 1)
        return state

    def _on_timeout(self, i):
        self._timers.pop(i, None)
        if self.done:
            return
        self.timeouts += 1
        self._request_index(i)

    def _client_receive(self, seg: CodedSegment, innovative: bool):
        self.data_rx += 1
        if self.first_data_time is None:
            self.first_data_time = self.sim.scheduler.now
        if innovative:
            self.data_rx_innovative += 1
        if self.done or not innovative:
            return
        basis = self.basis(self.key)
        # An outstanding request is moot once its index shows up as a pivot:
        # the client can then derive content from that subset itself, whether
        # the packet answered this index directly or the pivot fell out of
        # elimination.
        pivots = basis.pivots
        for i in [i for i in self._timers if i in pivots]:
            self._timers.pop(i).cancel()
        if basis.rank >= self.generation.n:
            self._complete()
            return
        # Keep the pipeline full, but never hold more interests outstanding
        # than dimensions still missing: each interest pulls one segment, so
        # anything beyond the remaining need could only fetch redundancy.
        window = min(self.pipeline, self.generation.n - basis.rank)
        while len(self._timers) < window and self._next_index <= self.generation.n:
            if not self._issue_next(skip=pivots):
                break


class NcInterest:
    """Undifferentiated coded interest: any new combination will do."""

    __slots__ = ("prefix", "generation_id", "nonce", "index")

    def __init__(self, prefix, generation_id, nonce):
        self.prefix = prefix
        self.generation_id = generation_id
        self.nonce = nonce
        self.index = None


class NcData:
    __slots__ = ("prefix", "generation_id", "vector", "payload", "index")

    def __init__(self, prefix, generation_id, vector, payload):
        self.prefix = prefix
        self.generation_id = generation_id
        self.vector = vector
        self.payload = payload
        self.index = None


class NetCodCcnNode(CodedNode):
    """Rank-versus-sent-count replying, per the undifferentiated scheme."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._sent: dict[tuple, int] = {}       # (key, face) -> data sent
        self._fwd_pending: dict[tuple, int] = {}  # key -> forwarded, not yet answered
        self._outstanding: deque = deque()      # client: FIFO timer tokens
        self._token = 0

    def _sent_count(self, key, face) -> int:
        return self._sent.get((key, id(face)), 0)

    def _bump_sent(self, key, face):
        self._sent[(key, id(face))] = self._sent_count(key, face) + 1

    def on_interest(self, pkt: NcInterest, face):
        key = (pkt.prefix, pkt.generation_id)
        sub = self.sub(key)
        if pkt.nonce in sub.seen:
            self.loop_drops += 1
            return
        sub.seen.add(pkt.nonce)
        cs = self.basis(key)
        # Reply while the cache rank exceeds what was already sent on the
        # arrival face; a sent packet counts whether or not it survives the
        # wire.  The interest is relayed upstream while the node's unanswered
        # relays lag behind its pending demand.  Because a relay lost on the
        # wire (or answered by a data packet that got dropped) still counts
        # as answered-in-flight, losses leave phantom bookkeeping behind and
        # throttle how eagerly the scheme re-asks upstream.
        if cs.rank > self._sent_count(key, face):
            if not face.data_busy:
                self._reply(face, key)
            else:
                sub.add(None, pkt.nonce, face, True, None)
        else:
            sub.add(None, pkt.nonce, face, False, None)
        live = sum(1 for _ in sub.live())
        if self.fib and self._fwd_pending.get(key, 0) <= live:
            self._fwd_pending[key] = self._fwd_pending.get(key, 0) + 1
            for f in self.fib:
                if f is not face:
                    f.send_interest(pkt)

    def _reply(self, face, key):
        cs = self.basis(key)
        rng = self.sim.rng
        vec = np.zeros(cs.n, dtype=np.uint8)
        pay = np.zeros(cs.payload_size, dtype=np.uint8)
        while not vec.any():
            for _, row, payload in cs.rows():
                w = int(rng.integers(0, self.field.order))
                if w:
                    self.field.addmul_into(vec, row, w)
                    self.field.addmul_into(pay, payload, w)
        self._bump_sent(key, face)
        face.send_data(NcData(key[0], key[1], vec, pay))

    def _serve_face(self, face):
        if face.data_busy:
            return
        for key, sub in self._pit.items():
            cs = self._cs.get(key)
            if cs is None or cs.rank <= self._sent_count(key, face):
                continue
            for e in sub.entries:
                if e.alive and e.in_face is face:
                    sub.remove(e)
                    sub.compact()
                    self._reply(face, key)
                    return

    def on_data(self, pkt: NcData, face):
        if not pkt.vector.any():
            self.inconsistent_drops += 1
            return
        key = (pkt.prefix, pkt.generation_id)
        pending = self._fwd_pending.get(key, 0)
        if pending:
            self._fwd_pending[key] = pending - 1
        cs = self.basis(key)
        innovative = cs.insert(pkt.vector, pkt.payload)
        self.sim.trace("data-rx", self.name, innovative=innovative,
                       peer=face.peer_node.name)
        if innovative:
            self.sim.trace("rank-change", self.name, index=cs.rank)
        if self.role == "client":
            self._client_receive(innovative)
        self._serve_all_faces()

    # -- client behavior ---------------------------------------------------

    def start(self):
        if self.role != "client":
            return
        for _ in range(self.pipeline):
            self._send_interest()

    def _send_interest(self):
        pkt = NcInterest(self.generation.prefix, self.generation.generation_id,
                         self._fresh_nonce())
        self.interests_sent += 1
        for f in self.fib:
            f.send_interest(pkt)
        token = self._token
        self._token += 1
        self._outstanding.append(token)
        self._arm_timer(token, lambda: self._nc_timeout(token))

    def _nc_timeout(self, token):
        self._timers.pop(token, None)
        if self.done:
            return
        try:
            self._outstanding.remove(token)
        except ValueError:
            pass
        self.timeouts += 1
        self._send_interest()

    def _client_receive(self, innovative):
        self.data_rx += 1
        if self.first_data_time is None:
            self.first_data_time = self.sim.scheduler.now
        if innovative:
            self.data_rx_innovative += 1
        if self.done:
            return
        # Interests are undifferentiated, so replies attribute to the oldest
        # outstanding one; only innovative content counts as an answer, a
        # redundant packet leaves the timer running.
        if innovative and self._outstanding:
            token = self._outstanding.popleft()
            ev = self._timers.pop(token, None)
            if ev is not None:
                ev.cancel()
        if self.basis(self.key).rank >= self.generation.n:
            self._complete()
            return
        if len(self._outstanding) < self.pipeline:
            self._send_interest()


class NdnEntry:
    __slots__ = ("name", "in_faces", "arrival", "alive", "expires")

    def __init__(self, name, in_face, arrival, expires):
        self.name = name
        self.in_faces = [in_face]
        self.arrival = arrival
        self.alive = True
        self.expires = expires


class NdnNode(Node):
    """Plain per-segment names with PIT aggregation and exact-match cache."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.store: dict[tuple, bytes] = {}
        self._entries: list[NdnEntry] = []
        self._by_name: dict[tuple, NdnEntry] = {}
        self._seen: set[int] = set()
        self._arrival = 0
        self._have: set[int] = set()
        self._next_seg = 1
        if self.role == "source":
            gen = self.generation
            for s in range(1, gen.n + 1):
                self.store[(gen.prefix, s)] = gen.segments[s - 1]

    def rank(self) -> int:
        if self.role == "client":
            return len(self._have)
        return len(self.store)

    def pit_live_entries(self) -> int:
        return sum(1 for e in self._entries if e.alive)

    def on_interest(self, pkt: PlainInterest, face):
        if pkt.nonce in self._seen:
            self.loop_drops += 1
            return
        self._seen.add(pkt.nonce)
        name = (pkt.prefix, pkt.segment)
        entry = self._by_name.get(name)
        if entry is not None and entry.alive:
            # Aggregate into the pending entry only while it is fresh; once
            # the interest lifetime has lapsed the upstream ask is presumed
            # lost, and the retransmission must propagate again.
            if self.sim.scheduler.now < entry.expires:
                if face not in entry.in_faces:
                    entry.in_faces.append(face)
                return
            entry.alive = False
            self._by_name.pop(name, None)
        if name in self.store:
            if not face.data_busy:
                face.send_data(PlainData(pkt.prefix, pkt.segment, self.store[name]))
            else:
                self._add_entry(name, face)
            return
        self._add_entry(name, face)
        for f in self.fib:
            if f is not face:
                f.send_interest(pkt)

    def _add_entry(self, name, face):
        e = NdnEntry(name, face, self._arrival, self.sim.scheduler.now + self.timeout)
        self._arrival += 1
        self._entries.append(e)
        self._by_name[name] = e

    def on_data(self, pkt: PlainData, face):
        name = (pkt.prefix, pkt.segment)
        innovative = name not in self.store
        self.store[name] = pkt.payload
        self.sim.trace("data-rx", self.name, index=pkt.segment, innovative=innovative,
                       peer=face.peer_node.name)
        if innovative:
            self.sim.trace("rank-change", self.name, index=len(self.store))
        if self.role == "client":
            self._client_receive(pkt, innovative)
        self._serve_all_faces()

    def _serve_face(self, face):
        if face.data_busy:
            return
        for e in self._entries:
            if e.alive and face in e.in_faces and e.name in self.store:
                e.in_faces.remove(face)
                if not e.in_faces:
                    e.alive = False
                    self._by_name.pop(e.name, None)
                face.send_data(PlainData(e.name[0], e.name[1], self.store[e.name]))
                return

    # -- client behavior ---------------------------------------------------

    def start(self):
        if self.role != "client":
            return
        for _ in range(min(self.pipeline, self.generation.n)):
            self._issue_next()

    def _issue_next(self):
        s = self._next_seg
        if s > self.generation.n:
            return
        self._next_seg += 1
        self._request_segment(s)

    def _request_segment(self, s):
        pkt = PlainInterest(self.generation.prefix, s, self._fresh_nonce())
        self.interests_sent += 1
        for f in self.fib:
            f.send_interest(pkt)
        self._arm_timer(s, lambda: self._on_timeout(s))

    def _on_timeout(self, s):
        self._timers.pop(s, None)
        if self.done:
            return
        self.timeouts += 1
        self._request_segment(s)

    def _client_receive(self, pkt: PlainData, innovative: bool):
        self.data_rx += 1
        if self.first_data_time is None:
            self.first_data_time = self.sim.scheduler.now
        if innovative:
            self.data_rx_innovative += 1
            self._have.add(pkt.segment)
            timer = self._timers.pop(pkt.segment, None)
            if timer is not None:
                timer.cancel()
            if self.done:
                return
            if len(self._have) >= self.generation.n:
                self._complete()
                return
            while len(self._timers) < self.pipeline and self._next_seg <= self.generation.n:
                self._issue_next()


def make_node(protocol: str, name: str, role: str, sim, *, field, generation,
              pipeline, timeout) -> Node:
    kwargs = dict(field=field, generation=generation, pipeline=pipeline, timeout=timeout)
    if protocol == "micn":
        return MicnNode(name, role, sim, **kwargs)
    if protocol == "micn-ic":
        return MicnNode(name, role, sim, ic=True, **kwargs)
    if protocol == "netcodccn":
        return NetCodCcnNode(name, role, sim, **kwargs)
    if protocol == "ndn":
        return NdnNode(name, role, sim, **kwargs)
    raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
