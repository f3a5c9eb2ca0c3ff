"""Pure-Python event-loop core for the data-plane simulator.

This is the fallback backend; `_core.pyx` is the compiled twin with the same
class, method and field layout. Both operate purely on integers so results
are bit-identical across backends. Time is integer nanoseconds; the event
queue is totally ordered by (time, insertion sequence).

Semantics:
  * one FIFO server per SF and per link direction (serialization delay =
    payload_bits / capacity, capacity 0 means unlimited);
  * SF/endpoint attachments are zero-delay wires;
  * a table miss parks the packet and pauses the loop so the driver can ask
    the controller; installs retry parked packets at install time.
"""

from heapq import heappop, heappush

BACKEND_NAME = "python"

MASK64 = (1 << 64) - 1
GIGA = 1_000_000_000

# wiring kinds
W_NONE = 0
W_LINK = 1
W_SF = 2
W_EP = 3

# event kinds
EV_INJECT = 0
EV_ARRIVE = 1
EV_RETRY = 2
EV_SF_DONE = 3
EV_INSTALL = 4

# packet kinds
PK_DATA = 0
PK_PROBE = 1

# trace event codes
T_INJECT = 0
T_SFF_RX = 1
T_PACKET_IN = 2
T_INSTALL = 3
T_SF_RX = 4
T_SF_TX = 5
T_DELIVER = 6
T_DROP = 7

# trace node kinds
N_SFF = 0
N_SF = 1
N_EP = 2

# rule row field offsets (10 ints; -1 = wildcard / no-op)
R_IN_PORT = 0
R_ETH = 1
R_SRC = 2
R_DST = 3
R_SPORT = 4
R_DPORT = 5
R_PROTO = 6
R_PRIO = 7
R_SET_ETH = 8
R_OUT = 9


def match_rows(rows, in_port, eth, src, dst, sport, dport, proto):
    """Best-matching rule index in `rows` (install order), -1 on miss.

    Highest priority wins, then most populated match fields, then earliest
    position.
    """
    best_prio = -1
    best_spec = -1
    best_i = -1
    for i, row in enumerate(rows):
        if row[R_IN_PORT] != -1 and row[R_IN_PORT] != in_port:
            continue
        if row[R_ETH] != -1 and row[R_ETH] != eth:
            continue
        if row[R_SRC] != -1 and row[R_SRC] != src:
            continue
        if row[R_DST] != -1 and row[R_DST] != dst:
            continue
        if row[R_SPORT] != -1 and row[R_SPORT] != sport:
            continue
        if row[R_DPORT] != -1 and row[R_DPORT] != dport:
            continue
        if row[R_PROTO] != -1 and row[R_PROTO] != proto:
            continue
        spec = 0
        for j in range(7):
            if row[j] != -1:
                spec += 1
        prio = row[R_PRIO]
        if prio > best_prio or (prio == best_prio and spec > best_spec):
            best_prio = prio
            best_spec = spec
            best_i = i
    return best_i


class EngineCore:
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
        self.wiring_kind = list(wiring_kind)
        self.wiring_node = list(wiring_node)
        self.wiring_port = list(wiring_port)
        self.wiring_chan = list(wiring_chan)
        self.link_delay = list(link_delay)
        self.link_cap = list(link_cap)
        self.link_busy = [0] * (2 * len(self.link_delay))
        self.sf_delay = list(sf_delay)
        self.sf_sff = list(sf_sff)
        self.sf_in_port = list(sf_in_port)
        self.sf_out_port = list(sf_out_port)
        self.sf_busy = [0] * len(self.sf_delay)
        self.sf_count = [0] * len(self.sf_delay)
        self.ep_mac = list(ep_mac)
        self.ep_sff = list(ep_sff)
        self.ep_port = list(ep_port)
        self.jitter_ns = jitter_ns
        self.rng_state = seed & MASK64
        self.trace_enabled = trace_enabled
        self.trace = []

        self.heap = []
        self.event_seq = 0
        self.rules = [[] for _ in range(n_sff)]
        self.parked = [[] for _ in range(n_sff)]
        self.staged = []

        self.headers = []  # rows of (src, dst, sport, dport, proto)
        self.p_eth = []
        self.p_size = []
        self.p_created = []
        self.p_kind = []
        self.p_hdr = []

        self.bulk = None

        self.injected = 0
        self.delivered = 0
        self.dropped = 0
        self.mac_mismatches = 0
        self.delivered_bytes = 0
        self.completion_ns = 0
        self.bins = {}

    # -- configuration ----------------------------------------------------

    def add_header(self, src, dst, sport, dport, proto):
        self.headers.append((src, dst, sport, dport, proto))
        return len(self.headers) - 1

    def install_rules(self, at_time, pairs):
        """Schedule installation of (sff, 10-int row) pairs at `at_time`."""
        self.staged.append(list(pairs))
        self._push(at_time, EV_INSTALL, len(self.staged) - 1, -1)

    def add_bulk(self, first_at, gap_ns, count, src_ep, hdr_id, size, eth_dst):
        self.bulk = (first_at, gap_ns, count, src_ep, hdr_id, size, eth_dst)
        self._push(first_at, EV_INJECT, 0, -1)

    def inject_one(self, at_time, src_ep, hdr_id, size, eth_dst, kind):
        pkt = self._new_packet(eth_dst, size, at_time, kind, hdr_id)
        if self.trace_enabled:
            self.trace.append((at_time, T_INJECT, N_EP, src_ep, pkt))
        self.injected += 1
        self._push(
            at_time,
            EV_ARRIVE,
            self.ep_sff[src_ep] * self.port_span + self.ep_port[src_ep],
            pkt,
        )
        return pkt

    # -- introspection ----------------------------------------------------

    def packet_info(self, pkt):
        return (self.p_hdr[pkt], self.p_eth[pkt], self.p_size[pkt], self.p_kind[pkt])

    def parked_count(self):
        return sum(len(p) for p in self.parked)

    def rule_count(self, sff):
        return len(self.rules[sff])

    def drop_parked(self, sff, pkt):
        for i, (port, parked_pkt) in enumerate(self.parked[sff]):
            if parked_pkt == pkt:
                del self.parked[sff][i]
                self.dropped += 1
                if self.trace_enabled:
                    self.trace.append((0, T_DROP, N_SFF, sff, pkt))
                return True
        return False

    # -- internals ---------------------------------------------------------

    def _push(self, t, kind, a, b):
        heappush(self.heap, (t, self.event_seq, kind, a, b))
        self.event_seq += 1

    def _new_packet(self, eth, size, created, kind, hdr):
        self.p_eth.append(eth)
        self.p_size.append(size)
        self.p_created.append(created)
        self.p_kind.append(kind)
        self.p_hdr.append(hdr)
        return len(self.p_eth) - 1

    def _rand(self):
        self.rng_state = (self.rng_state + 0x9E3779B97F4A7C15) & MASK64
        z = self.rng_state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def _match(self, sff, in_port, eth, hdr_id):
        hdr = self.headers[hdr_id]
        rows = self.rules[sff]
        return match_rows(rows, in_port, eth, hdr[0], hdr[1], hdr[2], hdr[3], hdr[4])

    def _arrive(self, t, sff, port, pkt, notify_miss):
        """Packet lands on a forwarder port; returns a pause tuple or None."""
        if self.trace_enabled:
            self.trace.append((t, T_SFF_RX, N_SFF, sff, pkt))
        idx = self._match(sff, port, self.p_eth[pkt], self.p_hdr[pkt])
        if idx < 0:
            self.parked[sff].append((port, pkt))
            if notify_miss:
                if self.trace_enabled:
                    self.trace.append((t, T_PACKET_IN, N_SFF, sff, pkt))
                return ("miss", t, sff, port, pkt)
            return None
        row = self.rules[sff][idx]
        if row[R_SET_ETH] != -1:
            self.p_eth[pkt] = row[R_SET_ETH]
        out = row[R_OUT]
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
                delay += self._rand() % (self.jitter_ns + 1)
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
            self.sf_count[s] += 1
            via_in = 1 if out == self.sf_in_port[s] else 0
            busy = self.sf_busy[s]
            start = busy if busy > t else t
            done = start + self.sf_delay[s]
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
            if self.p_eth[pkt] != self.ep_mac[e]:
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
        """Process events until drained (None) or a pause: a table miss
        ("miss", t, sff, port, pkt) or a probe delivery ("probe", t, ep, pkt).
        """
        heap = self.heap
        while heap:
            t, _seq, kind, a, b = heappop(heap)
            if kind == EV_ARRIVE or kind == EV_RETRY:
                res = self._arrive(t, a // self.port_span, a % self.port_span, b, kind == EV_ARRIVE)
                if res is not None:
                    return res
            elif kind == EV_SF_DONE:
                s = a >> 1
                via_in = a & 1
                if self.trace_enabled:
                    self.trace.append((t, T_SF_TX, N_SF, s, b))
                port = self.sf_out_port[s] if via_in else self.sf_in_port[s]
                res = self._arrive(t, self.sf_sff[s], port, b, True)
                if res is not None:
                    return res
            elif kind == EV_INJECT:
                first_at, gap, count, src_ep, hdr_id, size, eth_dst = self.bulk
                k = a
                if k + 1 < count:
                    self._push(first_at + (k + 1) * gap, EV_INJECT, k + 1, -1)
                pkt = self._new_packet(eth_dst, size, t, PK_DATA, hdr_id)
                self.injected += 1
                if self.trace_enabled:
                    self.trace.append((t, T_INJECT, N_EP, src_ep, pkt))
                res = self._arrive(
                    t, self.ep_sff[src_ep], self.ep_port[src_ep], pkt, True
                )
                if res is not None:
                    return res
            elif kind == EV_INSTALL:
                batch = self.staged[a]
                touched = set()
                for sff, row in batch:
                    rows = self.rules[sff]
                    duplicate = False
                    for existing in rows:
                        if existing == row:
                            duplicate = True
                            break
                    if not duplicate:
                        rows.append(tuple(row))
                    touched.add(sff)
                    if self.trace_enabled:
                        self.trace.append((t, T_INSTALL, N_SFF, sff, -1))
                for sff in sorted(touched):
                    pending = self.parked[sff]
                    self.parked[sff] = []
                    for port, pkt in pending:
                        self._push(t, EV_RETRY, sff * self.port_span + port, pkt)
        return None
