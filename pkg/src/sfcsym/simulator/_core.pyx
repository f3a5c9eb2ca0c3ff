# cython: language_level=3
# distutils: language = c++
"""Compiled event-loop core for the data-plane simulator.

Mirrors `_core_py.EngineCore` field for field; both operate on integers only
and produce bit-identical results. Keep the two in lockstep when changing
semantics.
"""

from libcpp.vector cimport vector

BACKEND_NAME = "cython"

cdef long long GIGA = 1_000_000_000

# wiring kinds
cdef enum:
    W_NONE = 0
    W_LINK = 1
    W_SF = 2
    W_EP = 3

# event kinds
cdef enum:
    EV_INJECT = 0
    EV_ARRIVE = 1
    EV_RETRY = 2
    EV_SF_DONE = 3
    EV_INSTALL = 4

# packet kinds
PK_DATA = 0
PK_PROBE = 1

# trace event codes / node kinds (match _core_py)
cdef enum:
    T_INJECT = 0
    T_SFF_RX = 1
    T_PACKET_IN = 2
    T_INSTALL = 3
    T_SF_RX = 4
    T_SF_TX = 5
    T_DELIVER = 6
    T_DROP = 7

cdef enum:
    N_SFF = 0
    N_SF = 1
    N_EP = 2


cdef struct Rule:
    long long m_in_port
    long long m_eth
    long long m_src
    long long m_dst
    long long m_sport
    long long m_dport
    long long m_proto
    long long prio
    long long set_eth
    long long out


cdef struct Event:
    long long t
    long long seq
    int kind
    long long a
    long long b


cdef struct Header:
    long long src
    long long dst
    long long sport
    long long dport
    long long proto


cdef inline bint _ev_less(Event* x, Event* y) noexcept:
    if x.t != y.t:
        return x.t < y.t
    return x.seq < y.seq


cdef void _heap_push(vector[Event]& heap, Event e) noexcept:
    cdef size_t i = heap.size()
    cdef size_t parent
    heap.push_back(e)
    while i > 0:
        parent = (i - 1) >> 1
        if _ev_less(&heap[i], &heap[parent]):
            heap[i], heap[parent] = heap[parent], heap[i]
            i = parent
        else:
            break


cdef Event _heap_pop(vector[Event]& heap) noexcept:
    cdef Event top = heap[0]
    cdef size_t n = heap.size() - 1
    cdef size_t i = 0
    cdef size_t left, right, smallest
    heap[0] = heap[n]
    heap.pop_back()
    n = heap.size()
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < n and _ev_less(&heap[left], &heap[smallest]):
            smallest = left
        if right < n and _ev_less(&heap[right], &heap[smallest]):
            smallest = right
        if smallest == i:
            break
        heap[i], heap[smallest] = heap[smallest], heap[i]
        i = smallest
    return top


cdef int _best_match(
    vector[Rule]& rows,
    long long in_port,
    long long eth,
    long long src,
    long long dst,
    long long sport,
    long long dport,
    long long proto,
) noexcept:
    cdef long long best_prio = -1
    cdef int best_spec = -1
    cdef int best_i = -1
    cdef int spec
    cdef size_t i
    cdef Rule* row
    for i in range(rows.size()):
        row = &rows[i]
        if row.m_in_port != -1 and row.m_in_port != in_port:
            continue
        if row.m_eth != -1 and row.m_eth != eth:
            continue
        if row.m_src != -1 and row.m_src != src:
            continue
        if row.m_dst != -1 and row.m_dst != dst:
            continue
        if row.m_sport != -1 and row.m_sport != sport:
            continue
        if row.m_dport != -1 and row.m_dport != dport:
            continue
        if row.m_proto != -1 and row.m_proto != proto:
            continue
        spec = 0
        if row.m_in_port != -1:
            spec += 1
        if row.m_eth != -1:
            spec += 1
        if row.m_src != -1:
            spec += 1
        if row.m_dst != -1:
            spec += 1
        if row.m_sport != -1:
            spec += 1
        if row.m_dport != -1:
            spec += 1
        if row.m_proto != -1:
            spec += 1
        if row.prio > best_prio or (row.prio == best_prio and spec > best_spec):
            best_prio = row.prio
            best_spec = spec
            best_i = <int>i
    return best_i


cdef Rule _rule_from_row(row):
    cdef Rule r
    r.m_in_port = row[0]
    r.m_eth = row[1]
    r.m_src = row[2]
    r.m_dst = row[3]
    r.m_sport = row[4]
    r.m_dport = row[5]
    r.m_proto = row[6]
    r.prio = row[7]
    r.set_eth = row[8]
    r.out = row[9]
    return r


def match_rows(rows, in_port, eth, src, dst, sport, dport, proto):
    """Best-matching rule index in `rows` (install order), -1 on miss."""
    cdef vector[Rule] packed
    for row in rows:
        packed.push_back(_rule_from_row(row))
    return _best_match(packed, in_port, eth, src, dst, sport, dport, proto)


cdef class EngineCore:
    cdef int n_sff
    cdef long long port_span
    cdef vector[long long] wiring_kind
    cdef vector[long long] wiring_node
    cdef vector[long long] wiring_port
    cdef vector[long long] wiring_chan
    cdef vector[long long] link_delay
    cdef vector[long long] link_cap
    cdef vector[long long] link_busy
    cdef vector[long long] sf_delay_v
    cdef vector[long long] sf_sff_v
    cdef vector[long long] sf_in_v
    cdef vector[long long] sf_out_v
    cdef vector[long long] sf_busy
    cdef vector[long long] sf_count_v
    cdef vector[long long] ep_mac_v
    cdef vector[long long] ep_sff_v
    cdef vector[long long] ep_port_v
    cdef long long jitter_ns
    cdef unsigned long long rng_state
    cdef bint trace_enabled
    cdef public list trace

    cdef vector[Event] heap
    cdef public long long event_seq
    cdef vector[vector[Rule]] rules
    cdef public list parked
    cdef public list staged

    cdef vector[Header] headers
    cdef vector[long long] p_eth
    cdef vector[long long] p_size
    cdef vector[long long] p_created
    cdef vector[long long] p_kind
    cdef vector[long long] p_hdr

    cdef bint have_bulk
    cdef long long bulk_first, bulk_gap, bulk_count, bulk_src_ep, bulk_hdr, bulk_size, bulk_eth

    cdef public long long injected
    cdef public long long delivered
    cdef public long long dropped
    cdef public long long mac_mismatches
    cdef public long long delivered_bytes
    cdef public long long completion_ns
    cdef public dict bins

    def __init__(
        self,
        n_sff,
        port_span,
        wiring_kind,
        wiring_node,
        wiring_port,
        wiring_chan,
        link_delay,
        link_cap,
        sf_delay,
        sf_sff,
        sf_in_port,
        sf_out_port,
        ep_mac,
        ep_sff,
        ep_port,
        jitter_ns,
        seed,
        trace_enabled,
    ):
        self.n_sff = n_sff
        self.port_span = port_span
        for v in wiring_kind:
            self.wiring_kind.push_back(v)
        for v in wiring_node:
            self.wiring_node.push_back(v)
        for v in wiring_port:
            self.wiring_port.push_back(v)
        for v in wiring_chan:
            self.wiring_chan.push_back(v)
        for v in link_delay:
            self.link_delay.push_back(v)
        for v in link_cap:
            self.link_cap.push_back(v)
        self.link_busy.resize(2 * self.link_delay.size(), 0)
        for v in sf_delay:
            self.sf_delay_v.push_back(v)
        for v in sf_sff:
            self.sf_sff_v.push_back(v)
        for v in sf_in_port:
            self.sf_in_v.push_back(v)
        for v in sf_out_port:
            self.sf_out_v.push_back(v)
        self.sf_busy.resize(self.sf_delay_v.size(), 0)
        self.sf_count_v.resize(self.sf_delay_v.size(), 0)
        for v in ep_mac:
            self.ep_mac_v.push_back(v)
        for v in ep_sff:
            self.ep_sff_v.push_back(v)
        for v in ep_port:
            self.ep_port_v.push_back(v)
        self.jitter_ns = jitter_ns
        self.rng_state = <unsigned long long>seed
        self.trace_enabled = trace_enabled
        self.trace = []
        self.event_seq = 0
        self.rules.resize(n_sff)
        self.parked = [[] for _ in range(n_sff)]
        self.staged = []
        self.have_bulk = False
        self.injected = 0
        self.delivered = 0
        self.dropped = 0
        self.mac_mismatches = 0
        self.delivered_bytes = 0
        self.completion_ns = 0
        self.bins = {}

    # -- configuration ----------------------------------------------------

    def add_header(self, src, dst, sport, dport, proto):
        cdef Header h
        h.src = src
        h.dst = dst
        h.sport = sport
        h.dport = dport
        h.proto = proto
        self.headers.push_back(h)
        return self.headers.size() - 1

    def install_rules(self, at_time, pairs):
        self.staged.append(list(pairs))
        self._push(at_time, EV_INSTALL, len(self.staged) - 1, -1)

    def add_bulk(self, first_at, gap_ns, count, src_ep, hdr_id, size, eth_dst):
        self.have_bulk = True
        self.bulk_first = first_at
        self.bulk_gap = gap_ns
        self.bulk_count = count
        self.bulk_src_ep = src_ep
        self.bulk_hdr = hdr_id
        self.bulk_size = size
        self.bulk_eth = eth_dst
        self._push(first_at, EV_INJECT, 0, -1)

    def inject_one(self, at_time, src_ep, hdr_id, size, eth_dst, kind):
        cdef long long pkt = self._new_packet(eth_dst, size, at_time, kind, hdr_id)
        if self.trace_enabled:
            self.trace.append((at_time, T_INJECT, N_EP, src_ep, pkt))
        self.injected += 1
        self._push(
            at_time,
            EV_ARRIVE,
            self.ep_sff_v[src_ep] * self.port_span + self.ep_port_v[src_ep],
            pkt,
        )
        return pkt

    # -- introspection ----------------------------------------------------

    @property
    def sf_count(self):
        return [self.sf_count_v[i] for i in range(self.sf_count_v.size())]

    def packet_info(self, pkt):
        return (self.p_hdr[pkt], self.p_eth[pkt], self.p_size[pkt], self.p_kind[pkt])

    def parked_count(self):
        return sum(len(p) for p in self.parked)

    def rule_count(self, sff):
        return self.rules[sff].size()

    def drop_parked(self, sff, pkt):
        entries = self.parked[sff]
        for i, (port, parked_pkt) in enumerate(entries):
            if parked_pkt == pkt:
                del entries[i]
                self.dropped += 1
                if self.trace_enabled:
                    self.trace.append((0, T_DROP, N_SFF, sff, pkt))
                return True
        return False

    # -- internals ---------------------------------------------------------

    cdef void _push(self, long long t, int kind, long long a, long long b) noexcept:
        cdef Event e
        e.t = t
        e.seq = self.event_seq
        e.kind = kind
        e.a = a
        e.b = b
        self.event_seq += 1
        _heap_push(self.heap, e)

    cdef long long _new_packet(self, long long eth, long long size, long long created, long long kind, long long hdr) noexcept:
        self.p_eth.push_back(eth)
        self.p_size.push_back(size)
        self.p_created.push_back(created)
        self.p_kind.push_back(kind)
        self.p_hdr.push_back(hdr)
        return self.p_eth.size() - 1

    cdef unsigned long long _rand(self) noexcept:
        cdef unsigned long long z
        self.rng_state += <unsigned long long>0x9E3779B97F4A7C15
        z = self.rng_state
        z = (z ^ (z >> 30)) * <unsigned long long>0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * <unsigned long long>0x94D049BB133111EB
        return z ^ (z >> 31)

    cdef object _arrive(self, long long t, long long sff, long long port, long long pkt, bint notify_miss):
        cdef int idx
        cdef Rule* row
        cdef long long out, w, kind, chan, link, cap, ser, dep, delay, s, via_in, busy, start, done, e, size, sec
        cdef Header* hdr
        if self.trace_enabled:
            self.trace.append((t, T_SFF_RX, N_SFF, sff, pkt))
        hdr = &self.headers[self.p_hdr[pkt]]
        idx = _best_match(
            self.rules[sff], port, self.p_eth[pkt],
            hdr.src, hdr.dst, hdr.sport, hdr.dport, hdr.proto,
        )
        if idx < 0:
            self.parked[sff].append((port, pkt))
            if notify_miss:
                if self.trace_enabled:
                    self.trace.append((t, T_PACKET_IN, N_SFF, sff, pkt))
                return ("miss", t, sff, port, pkt)
            return None
        row = &self.rules[sff][idx]
        if row.set_eth != -1:
            self.p_eth[pkt] = row.set_eth
        out = row.out
        w = sff * self.port_span + out
        kind = self.wiring_kind[w]
        if kind == W_LINK:
            chan = self.wiring_chan[w]
            link = chan >> 1
            cap = self.link_cap[link]
            ser = 0 if cap == 0 else (self.p_size[pkt] * 8 * GIGA) // cap
            dep = self.link_busy[chan]
            if dep < t:
                dep = t
            self.link_busy[chan] = dep + ser
            delay = self.link_delay[link]
            if self.jitter_ns > 0:
                delay += <long long>(self._rand() % <unsigned long long>(self.jitter_ns + 1))
            self._push(
                dep + ser + delay,
                EV_ARRIVE,
                self.wiring_node[w] * self.port_span + self.wiring_port[w],
                pkt,
            )
        elif kind == W_SF:
            s = self.wiring_node[w]
            if self.trace_enabled:
                self.trace.append((t, T_SF_RX, N_SF, s, pkt))
            self.sf_count_v[s] += 1
            via_in = 1 if out == self.sf_in_v[s] else 0
            busy = self.sf_busy[s]
            start = busy if busy > t else t
            done = start + self.sf_delay_v[s]
            self.sf_busy[s] = done
            self._push(done, EV_SF_DONE, (s << 1) | via_in, pkt)
        elif kind == W_EP:
            e = self.wiring_node[w]
            self.delivered += 1
            size = self.p_size[pkt]
            self.delivered_bytes += size
            sec = t // GIGA
            self.bins[sec] = self.bins.get(sec, 0) + size
            if t > self.completion_ns:
                self.completion_ns = t
            if self.p_eth[pkt] != self.ep_mac_v[e]:
                self.mac_mismatches += 1
            if self.trace_enabled:
                self.trace.append((t, T_DELIVER, N_EP, e, pkt))
            if self.p_kind[pkt] == PK_PROBE:
                return ("probe", t, e, pkt)
        else:
            self.dropped += 1
            if self.trace_enabled:
                self.trace.append((t, T_DROP, N_SFF, sff, pkt))
        return None

    def run(self):
        """Process events until drained (None) or a pause tuple; see the
        Python twin for the contract."""
        cdef Event ev
        cdef long long t, s, via_in, port, pkt, k
        cdef object res
        while self.heap.size() > 0:
            ev = _heap_pop(self.heap)
            t = ev.t
            if ev.kind == EV_ARRIVE or ev.kind == EV_RETRY:
                res = self._arrive(
                    t, ev.a // self.port_span, ev.a % self.port_span, ev.b,
                    ev.kind == EV_ARRIVE,
                )
                if res is not None:
                    return res
            elif ev.kind == EV_SF_DONE:
                s = ev.a >> 1
                via_in = ev.a & 1
                if self.trace_enabled:
                    self.trace.append((t, T_SF_TX, N_SF, s, ev.b))
                port = self.sf_out_v[s] if via_in else self.sf_in_v[s]
                res = self._arrive(t, self.sf_sff_v[s], port, ev.b, True)
                if res is not None:
                    return res
            elif ev.kind == EV_INJECT:
                k = ev.a
                if k + 1 < self.bulk_count:
                    self._push(self.bulk_first + (k + 1) * self.bulk_gap, EV_INJECT, k + 1, -1)
                pkt = self._new_packet(self.bulk_eth, self.bulk_size, t, PK_DATA, self.bulk_hdr)
                self.injected += 1
                if self.trace_enabled:
                    self.trace.append((t, T_INJECT, N_EP, self.bulk_src_ep, pkt))
                res = self._arrive(
                    t, self.ep_sff_v[self.bulk_src_ep], self.ep_port_v[self.bulk_src_ep], pkt, True
                )
                if res is not None:
                    return res
            elif ev.kind == EV_INSTALL:
                self._apply_install(t, ev.a)
        return None

    cdef void _apply_install(self, long long t, long long batch_idx):
        cdef Rule r
        cdef bint duplicate
        cdef size_t i
        cdef long long sff_ll
        touched = set()
        batch = self.staged[batch_idx]
        for sff, row in batch:
            r = _rule_from_row(row)
            duplicate = False
            sff_ll = sff
            for i in range(self.rules[sff_ll].size()):
                if (
                    self.rules[sff_ll][i].m_in_port == r.m_in_port
                    and self.rules[sff_ll][i].m_eth == r.m_eth
                    and self.rules[sff_ll][i].m_src == r.m_src
                    and self.rules[sff_ll][i].m_dst == r.m_dst
                    and self.rules[sff_ll][i].m_sport == r.m_sport
                    and self.rules[sff_ll][i].m_dport == r.m_dport
                    and self.rules[sff_ll][i].m_proto == r.m_proto
                    and self.rules[sff_ll][i].prio == r.prio
                    and self.rules[sff_ll][i].set_eth == r.set_eth
                    and self.rules[sff_ll][i].out == r.out
                ):
                    duplicate = True
                    break
            if not duplicate:
                self.rules[sff_ll].push_back(r)
            touched.add(sff)
            if self.trace_enabled:
                self.trace.append((t, T_INSTALL, N_SFF, sff, -1))
        for sff in sorted(touched):
            pending = self.parked[sff]
            self.parked[sff] = []
            for port, pkt in pending:
                self._push(t, EV_RETRY, sff * self.port_span + port, pkt)
