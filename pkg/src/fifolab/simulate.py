"""Step-driven simulation of online FIFO buffering policies.

Each time step has two phases: all arrivals of the step are admitted in
release order (evicting the minimum-value packet on overflow, ties
broken toward the earliest released), then the policy delivers at most
one packet. The threshold policy ("on") may first preempt every
buffered 1-value packet that precedes some buffered alpha packet, but
only when the buffered alpha mass is at least ``beta`` times the count
of those packets; the greedy policy always sends its head.

Traces record every admission, eviction, rejection, preemption, send,
and idle step, so downstream analysis can replay buffer states without
re-running policy logic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .model import (
    Instance,
    Packet,
    Rat,
    ZERO,
    format_rat,
    require_valid,
    value_of,
)


class EventKind(Enum):
    ADMITTED = "admitted"
    EVICTED = "evicted"
    REJECTED = "rejected"
    PREEMPTED = "preempted"
    SENT = "sent"
    IDLE = "idle"


TERMINAL_KINDS = frozenset(
    {EventKind.SENT, EventKind.EVICTED, EventKind.REJECTED, EventKind.PREEMPTED}
)


@dataclass(frozen=True)
class StepEvent:
    step: int
    kind: EventKind
    packet: Packet | None


@dataclass(frozen=True)
class Policy:
    kind: str  # "on" | "greedy"
    beta: Rat | None = None

    @classmethod
    def on(cls, beta: Rat) -> "Policy":
        if beta <= 0:
            raise ValueError("beta must be positive")
        return cls("on", Fraction(beta))

    @classmethod
    def greedy(cls) -> "Policy":
        return cls("greedy", None)

    def describe(self) -> str:
        if self.kind == "on":
            return f"on(beta={format_rat(self.beta)})"
        return "greedy"


@dataclass(frozen=True)
class Buffer:
    """FIFO buffer contents: slots ascending by arrival key."""

    slots: tuple[Packet, ...]
    capacity: int

    @property
    def head(self) -> Packet | None:
        return self.slots[0] if self.slots else None

    def alpha_count(self) -> int:
        return sum(1 for p in self.slots if p.is_alpha)


class AdmitKind(Enum):
    APPENDED = "appended"
    EVICTED_OTHER = "evicted-other"
    REJECTED_SELF = "rejected-self"


@dataclass(frozen=True)
class Admission:
    kind: AdmitKind
    evicted: Packet | None = None


def admit(buf: Buffer, p: Packet, inst: Instance) -> tuple[Buffer, Admission]:
    """Admit an arriving packet, evicting on overflow.

    With a full buffer the minimum-value candidate among the slots plus
    the arrival is removed; ties go to the earliest-released candidate,
    so the arrival (largest key) never wins a tie and a 1-value arrival
    is self-rejected exactly when the buffer holds only alpha packets.
    """
    if buf.slots and buf.slots[-1].key >= p.key:
        raise ValueError(f"arrival order violated: {p.id} not after buffered packets")
    if len(buf.slots) < buf.capacity:
        return Buffer(buf.slots + (p,), buf.capacity), Admission(AdmitKind.APPENDED)
    victim = min(buf.slots + (p,), key=lambda q: (q.is_alpha, q.key))
    if victim is p:
        return buf, Admission(AdmitKind.REJECTED_SELF)
    slots = tuple(q for q in buf.slots if q is not victim) + (p,)
    return Buffer(slots, buf.capacity), Admission(AdmitKind.EVICTED_OTHER, victim)


def ejectable_set(buf: Buffer) -> frozenset[Packet]:
    """1-value packets released before at least one buffered alpha packet."""
    alpha_keys = [p.key for p in buf.slots if p.is_alpha]
    if not alpha_keys:
        return frozenset()
    last_alpha = max(alpha_keys)
    return frozenset(p for p in buf.slots if not p.is_alpha and p.key < last_alpha)


def deliver_on(
    buf: Buffer, inst: Instance, beta: Rat
) -> tuple[Buffer, Packet | None, frozenset[Packet]]:
    """Threshold delivery: maybe preempt, then send the earliest packet.

    An alpha head is sent immediately. Otherwise the ejectable packets D
    are dropped when the buffered alpha mass is at least ``beta * |D|``
    (vacuously true for empty D, where preemption is a no-op), and the
    new head is sent. The comparison is exact, so equality preempts.
    """
    if not buf.slots:
        return buf, None, frozenset()
    head = buf.slots[0]
    if head.is_alpha:
        return Buffer(buf.slots[1:], buf.capacity), head, frozenset()
    ejectable = ejectable_set(buf)
    alpha_mass = inst.alpha * buf.alpha_count()
    if alpha_mass >= beta * len(ejectable):
        remaining = tuple(p for p in buf.slots if p not in ejectable)
        preempted = ejectable
    else:
        remaining = buf.slots
        preempted = frozenset()
    sent = remaining[0]
    return Buffer(remaining[1:], buf.capacity), sent, preempted


def deliver_greedy(buf: Buffer) -> tuple[Buffer, Packet | None]:
    """Send the earliest-released packet, if any."""
    if not buf.slots:
        return buf, None
    return Buffer(buf.slots[1:], buf.capacity), buf.slots[0]


@dataclass(frozen=True)
class RunTrace:
    policy: Policy
    events: tuple[StepEvent, ...]
    sent: tuple[Packet, ...]
    totals: Rat


def run(policy: Policy, inst: Instance) -> RunTrace:
    """Run a policy over an instance until the buffer drains.

    Within a step, arrivals are processed before delivery; the run
    continues past the last arrival step until the buffer is empty.
    Idle events are recorded only while later arrivals may still come.
    """
    require_valid(inst)
    by_step: dict[int, list[Packet]] = {}
    for p in inst.arrivals:
        by_step.setdefault(p.key.step, []).append(p)
    last = max(by_step) if by_step else 0

    buf = Buffer((), inst.capacity)
    events: list[StepEvent] = []
    sent_packets: list[Packet] = []
    t = 1
    while t <= last or buf.slots:
        for p in by_step.get(t, ()):
            buf, adm = admit(buf, p, inst)
            if adm.kind is AdmitKind.APPENDED:
                events.append(StepEvent(t, EventKind.ADMITTED, p))
            elif adm.kind is AdmitKind.EVICTED_OTHER:
                events.append(StepEvent(t, EventKind.EVICTED, adm.evicted))
                events.append(StepEvent(t, EventKind.ADMITTED, p))
            else:
                events.append(StepEvent(t, EventKind.REJECTED, p))
        if policy.kind == "on":
            buf, sent, preempted = deliver_on(buf, inst, policy.beta)
        else:
            buf, sent = deliver_greedy(buf)
            preempted = frozenset()
        for q in sorted(preempted, key=lambda p: p.key):
            events.append(StepEvent(t, EventKind.PREEMPTED, q))
        if sent is not None:
            events.append(StepEvent(t, EventKind.SENT, sent))
            sent_packets.append(sent)
        elif t <= last:
            events.append(StepEvent(t, EventKind.IDLE, None))
        t += 1

    totals = sum((value_of(p, inst.alpha) for p in sent_packets), ZERO)
    return RunTrace(policy, tuple(events), tuple(sent_packets), totals)


def sends_by_step(trace: RunTrace) -> dict[int, Packet]:
    return {e.step: e.packet for e in trace.events if e.kind is EventKind.SENT}


def fates(trace: RunTrace) -> dict[Packet, StepEvent]:
    """Terminal classification of every arrival (sent/evicted/rejected/preempted).

    Raises if the trace classifies any packet more than once, which would
    violate conservation.
    """
    out: dict[Packet, StepEvent] = {}
    for e in trace.events:
        if e.kind in TERMINAL_KINDS:
            if e.packet in out:
                raise ValueError(f"packet {e.packet.id} classified twice")
            out[e.packet] = e
    return out


def replay_buffer_states(trace: RunTrace) -> list[tuple[StepEvent, tuple[Packet, ...]]]:
    """Reconstruct the buffer after each event, from the event log alone.

    Delivery must remove the current head; a mismatch means the trace
    itself violates FIFO order and raises.
    """
    buf: list[Packet] = []
    out: list[tuple[StepEvent, tuple[Packet, ...]]] = []
    for e in trace.events:
        if e.kind is EventKind.ADMITTED:
            buf.append(e.packet)
        elif e.kind in (EventKind.EVICTED, EventKind.PREEMPTED):
            buf.remove(e.packet)
        elif e.kind is EventKind.SENT:
            if not buf or buf[0] is not e.packet:
                raise ValueError(f"non-FIFO send of {e.packet.id} at step {e.step}")
            buf.pop(0)
        out.append((e, tuple(buf)))
    return out


def format_trace(trace: RunTrace) -> str:
    """Line-oriented trace export: one event per line, then the exact total."""
    lines = []
    for e in trace.events:
        pid = e.packet.id if e.packet is not None else "-"
        lines.append(f"{e.step} {e.kind.value} {pid}")
    lines.append(f"total {format_rat(trace.totals)}")
    return "\n".join(lines) + "\n"
