"""Deterministic discrete-event network simulator with a passive eavesdropper.

Integer ticks, seeded delays, and a seeded choice among same-tick deliveries
make every run exactly reproducible from (scenario, seed). Protocol
randomness and schedule randomness live on separate streams of the master
seed (stream 0 drives the schedule, streams 1..n the per-agent shares,
stream n+1 the gossip edge picks), so reshuffling deliveries can never change
what anyone draws. A colluding set of agents can be declared; it is recorded,
never consulted: the trajectory with and without the recorder is identical.
"""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .consensus import ConsensusAlgo, finalize, gossip_avg
from .masking import (
    AgentState,
    MaskShareMsg,
    PhaseDoneMsg,
    ProtocolParams,
    build_states,
    edge_differences,
    init_shares,
    phase_complete,
    receive_share,
)
from .residues import SeededRng
from .topology import Topology, connected_components

__all__ = [
    "AdversarySpec",
    "AdversaryView",
    "RunReport",
    "SimEvent",
    "ValueMsg",
    "delivery_schedule",
    "extract_view",
    "simulate",
]


@dataclass(frozen=True)
class ValueMsg:
    """Phase-2 flooded (origin, effective value) pair."""

    origin: int
    value: int
    sender: int
    receiver: int


Payload = Union[MaskShareMsg, PhaseDoneMsg, ValueMsg]


@dataclass(frozen=True, order=True)
class SimEvent:
    """One pending delivery; the (time, seq) pair is the processing order key."""

    time: int
    seq: int
    kind: str = field(compare=False)
    msg: Payload = field(compare=False)


@dataclass(frozen=True)
class AdversarySpec:
    """Colluding agents. They run the protocol unmodified; only their tape differs."""

    members: frozenset[int]

    def __init__(self, members):
        object.__setattr__(self, "members", frozenset(members))


@dataclass
class AdversaryView:
    """Everything the coalition ends up knowing: own inputs, every effective
    input, the share differences on its incident edges, and its message tape."""

    adversary_inputs: dict[int, int]
    all_effective_inputs: dict[int, int]
    incident_differences: dict[tuple[int, int], int]
    transcript: tuple[str, ...]

    def key(self) -> tuple:
        """Canonical tuple for histogramming; transcript ordering excluded."""
        return (
            tuple(self.all_effective_inputs[i] for i in sorted(self.all_effective_inputs)),
            tuple((e, self.incident_differences[e]) for e in sorted(self.incident_differences)),
        )


def _fraction(s: str) -> Fraction:
    return Fraction(s)


@dataclass
class RunReport:
    """Full account of one simulated run; serializes to stable line-oriented text."""

    seed: int
    schedule_seed: Optional[int]
    config_hash: str
    n: int
    algo_variant: str
    averages: dict[int, Fraction]
    phase1_messages: int
    phase2_messages: int
    ticks: int
    adversary: Optional[tuple[int, ...]] = None
    view: Optional[AdversaryView] = None
    events: tuple[str, ...] = ()
    gossip_spread: tuple[Fraction, ...] = ()

    @property
    def average(self) -> Fraction:
        values = set(self.averages.values())
        assert len(values) == 1, "agents disagree on the average"
        return next(iter(values))

    def to_text(self) -> str:
        lines = [
            "runreport v1",
            f"seed {self.seed}",
            f"schedule_seed {'-' if self.schedule_seed is None else self.schedule_seed}",
            f"config {self.config_hash}",
            f"agents {self.n}",
            f"algo {self.algo_variant}",
            f"ticks {self.ticks}",
            f"phase1_messages {self.phase1_messages}",
            f"phase2_messages {self.phase2_messages}",
            f"average {self.average}",
        ]
        for i in sorted(self.averages):
            lines.append(f"agent_average {i} {self.averages[i]}")
        if self.adversary is not None:
            lines.append("adversary " + " ".join(map(str, self.adversary)))
        if self.view is not None:
            v = self.view
            for i in sorted(v.adversary_inputs):
                lines.append(f"view_input {i} {v.adversary_inputs[i]}")
            for i in sorted(v.all_effective_inputs):
                lines.append(f"view_effective {i} {v.all_effective_inputs[i]}")
            for (a, b) in sorted(v.incident_differences):
                lines.append(f"view_diff {a} {b} {v.incident_differences[(a, b)]}")
            for line in v.transcript:
                lines.append(f"transcript {line}")
        for r, s in enumerate(self.gossip_spread, start=1):
            lines.append(f"spread {r} {s}")
        for line in self.events:
            lines.append(f"event {line}")
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunReport":
        lines = text.splitlines()
        if not lines or lines[0] != "runreport v1" or lines[-1] != "end":
            raise ValueError("not a v1 run report")
        fields: dict[str, str] = {}
        averages: dict[int, Fraction] = {}
        adversary: Optional[tuple[int, ...]] = None
        view_inputs: dict[int, int] = {}
        view_eff: dict[int, int] = {}
        view_diff: dict[tuple[int, int], int] = {}
        transcript: list[str] = []
        spread: list[Fraction] = []
        events: list[str] = []
        saw_view = False
        for line in lines[1:-1]:
            tag, _, rest = line.partition(" ")
            if tag in ("seed", "schedule_seed", "config", "agents", "algo", "ticks",
                       "phase1_messages", "phase2_messages", "average"):
                fields[tag] = rest
            elif tag == "agent_average":
                i, val = rest.split(" ", 1)
                averages[int(i)] = _fraction(val)
            elif tag == "adversary":
                adversary = tuple(int(x) for x in rest.split()) if rest else ()
            elif tag == "view_input":
                saw_view = True
                i, val = rest.split()
                view_inputs[int(i)] = int(val)
            elif tag == "view_effective":
                saw_view = True
                i, val = rest.split()
                view_eff[int(i)] = int(val)
            elif tag == "view_diff":
                saw_view = True
                a, b, val = rest.split()
                view_diff[(int(a), int(b))] = int(val)
            elif tag == "transcript":
                saw_view = True
                transcript.append(rest)
            elif tag == "spread":
                _, val = rest.split(" ", 1)
                spread.append(_fraction(val))
            elif tag == "event":
                events.append(rest)
            else:
                raise ValueError(f"unknown report line {line!r}")
        view = None
        if saw_view:
            view = AdversaryView(view_inputs, view_eff, view_diff, tuple(transcript))
        return cls(
            seed=int(fields["seed"]),
            schedule_seed=None if fields["schedule_seed"] == "-" else int(fields["schedule_seed"]),
            config_hash=fields["config"],
            n=int(fields["agents"]),
            algo_variant=fields["algo"],
            averages=averages,
            phase1_messages=int(fields["phase1_messages"]),
            phase2_messages=int(fields["phase2_messages"]),
            ticks=int(fields["ticks"]),
            adversary=adversary,
            view=view,
            events=tuple(events),
            gossip_spread=tuple(spread),
        )


def extract_view(report: RunReport) -> AdversaryView:
    if report.view is None:
        raise ValueError("run had no adversary configured; nothing was recorded")
    return report.view


def delivery_schedule(rng: SeededRng, pending: list[SimEvent]) -> SimEvent:
    """Pop the next delivery: uniformly random among the earliest-tick events.

    `pending` is a heap ordered by (time, seq); the seq tiebreak makes the
    candidate list deterministic so the random index is reproducible. A lone
    candidate consumes no randomness.
    """
    if not pending:
        raise ValueError("no pending events")
    lowest = pending[0].time
    candidates = []
    while pending and pending[0].time == lowest:
        candidates.append(heapq.heappop(pending))
    chosen = candidates.pop(rng.randint_below(len(candidates)))
    for ev in candidates:
        heapq.heappush(pending, ev)
    return chosen


def _scenario_hash(
    t: Topology,
    inputs: Sequence[int],
    params: ProtocolParams,
    algo: ConsensusAlgo,
    adversary: Optional[AdversarySpec],
    max_delay: int,
    share_override: Optional[Mapping[tuple[int, int], int]],
) -> str:
    parts = [
        f"n={t.n}",
        "edges=" + ";".join(f"{i},{j}" for i, j in t.edges),
        "inputs=" + ",".join(map(str, inputs)),
        f"q={params.q}",
        f"p={params.p.value}",
        f"algo={algo.variant}",
        f"tol={algo.gossip_tolerance}",
        f"max_rounds={algo.max_rounds}",
        f"adversary={sorted(adversary.members) if adversary else None}",
        f"max_delay={max_delay}",
        "override=" + (
            ";".join(f"{k[0]},{k[1]}={v}" for k, v in sorted(share_override.items()))
            if share_override else "-"
        ),
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:12]


def simulate(
    t: Topology,
    inputs: Sequence[int],
    params: ProtocolParams,
    algo: Optional[ConsensusAlgo] = None,
    adversary: Optional[AdversarySpec] = None,
    seed: int = 0,
    max_delay: int = 4,
    schedule_seed: Optional[int] = None,
    share_override: Optional[Mapping[tuple[int, int], int]] = None,
) -> RunReport:
    """Run both phases under a randomized delivery schedule.

    Parameters
    ----------
    t, inputs, params : the scenario; `t` must be connected.
    algo : consensus route for phase 2 (flooding by default).
    adversary : optional coalition whose view gets recorded, never consulted.
    seed : master seed; fixes shares, schedule, and gossip at once.
    max_delay : delivery delay is drawn uniformly from [1, max_delay].
    schedule_seed : replaces only the schedule stream, leaving shares and
        gossip pinned to `seed`; the knob behind order-independence tests.
    share_override : pins chosen shares by (sender, receiver) pair, for
        replaying worked instances exactly.
    """
    algo = algo or ConsensusAlgo()
    comps = connected_components(t)
    if len(comps) > 1:
        pretty = " ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in comps)
        raise ValueError(f"simulation needs a connected graph; components: {pretty}")
    if max_delay < 1:
        raise ValueError(f"max_delay must be at least 1, got {max_delay}")
    members: frozenset[int] = adversary.members if adversary is not None else frozenset()
    for v in members:
        if not 1 <= v <= t.n:
            raise ValueError(f"adversary member {v} outside 1..{t.n}")

    states = build_states(t, inputs, params)
    share_rngs = {i: SeededRng(seed, i) for i in t.vertices}
    sched = SeededRng(seed if schedule_seed is None else schedule_seed, 0)
    everyone = set(t.vertices)

    pending: list[SimEvent] = []
    seq = 0
    counts = {"share": 0, "done": 0, "value": 0}
    events: list[str] = []
    transcript: list[str] = []
    flood_values: dict[int, dict[int, int]] = {i: {} for i in t.vertices}

    def send(now: int, kind: str, msg: Payload) -> None:
        nonlocal seq
        heapq.heappush(pending, SimEvent(now + sched.randrange(1, max_delay), seq, kind, msg))
        seq += 1
        counts[kind] += 1

    def start_phase2(i: int, now: int) -> None:
        if algo.variant != "flood_sum":
            return
        st = states[i]
        assert st.effective_input is not None
        flood_values[i][i] = int(st.effective_input)
        for nbr in sorted(t.neighbors(i)):
            send(now, "value", ValueMsg(origin=i, value=int(st.effective_input), sender=i, receiver=nbr))

    def mark_done(agent: int, origin: int, came_from: Optional[int], now: int) -> None:
        st = states[agent]
        if origin in st.completed_peers:
            return
        st.completed_peers.add(origin)
        for nbr in sorted(st.neighbors):
            if nbr != came_from:
                send(now, "done", PhaseDoneMsg(origin=origin, sender=agent, receiver=nbr))
        if st.completed_peers == everyone:
            start_phase2(agent, now)

    for i in sorted(t.vertices):
        for msg in init_shares(states[i], share_rngs[i], share_override):
            send(0, "share", msg)
    for i in sorted(t.vertices):
        if states[i].mask is not None:  # isolated in a 1-vertex graph: done at once
            mark_done(i, i, None, 0)

    ticks = 0
    while pending:
        ev = delivery_schedule(sched, pending)
        ticks = max(ticks, ev.time)
        msg = ev.msg
        if ev.kind == "share":
            assert isinstance(msg, MaskShareMsg)
            line = f"{ev.time} {ev.seq} share {msg.sender} {msg.receiver} {int(msg.share)}"
            done = receive_share(states[msg.receiver], msg)
            if done is not None:
                mark_done(msg.receiver, msg.receiver, None, ev.time)
        elif ev.kind == "done":
            assert isinstance(msg, PhaseDoneMsg)
            line = f"{ev.time} {ev.seq} done {msg.sender} {msg.receiver} {msg.origin}"
            mark_done(msg.receiver, msg.origin, msg.sender, ev.time)
        else:
            assert isinstance(msg, ValueMsg)
            line = f"{ev.time} {ev.seq} value {msg.sender} {msg.receiver} {msg.origin}:{msg.value}"
            box = flood_values[msg.receiver]
            if msg.origin not in box:
                box[msg.origin] = msg.value
                for nbr in sorted(t.neighbors(msg.receiver)):
                    if nbr != msg.sender:
                        send(ev.time, "value", ValueMsg(msg.origin, msg.value, msg.receiver, nbr))
        events.append(line)
        if msg.receiver in members:
            transcript.append(line)

    assert phase_complete(states), "schedule deadlock: phase 1 unfinished on a connected graph"

    spread_trace: tuple[Fraction, ...] = ()
    if algo.variant == "flood_sum":
        assert all(len(flood_values[i]) == t.n for i in t.vertices)
        per_agent = {i: Fraction(sum(flood_values[i].values())) for i in t.vertices}
        rounds_messages = counts["value"]
    else:
        grng = SeededRng(seed, t.n + 1)
        scaled = {i: t.n * int(states[i].effective_input) for i in t.vertices}
        exchange_log: list[str] = []

        def record_exchange(i: int, j: int, mean: Fraction) -> None:
            if i in members or j in members:
                exchange_log.append(f"{ticks} {len(exchange_log)} gossip {i} {j} {mean}")

        res = gossip_avg(t, scaled, algo, grng, on_exchange=record_exchange)
        per_agent = res.per_agent
        spread_trace = res.spread_trace
        rounds_messages = res.messages
        transcript.extend(exchange_log)

    averages = {i: finalize(v, params) for i, v in per_agent.items()}
    assert len(set(averages.values())) == 1

    view = None
    if adversary is not None:
        diffs = {
            d.edge: int(d.value)
            for d in edge_differences(states)
            if d.edge[0] in members or d.edge[1] in members
        }
        view = AdversaryView(
            adversary_inputs={i: int(inputs[i - 1]) for i in sorted(members)},
            all_effective_inputs={i: int(states[i].effective_input) for i in t.vertices},
            incident_differences=diffs,
            transcript=tuple(transcript),
        )

    return RunReport(
        seed=seed,
        schedule_seed=schedule_seed,
        config_hash=_scenario_hash(t, inputs, params, algo, adversary, max_delay, share_override),
        n=t.n,
        algo_variant=algo.variant,
        averages=averages,
        phase1_messages=counts["share"] + counts["done"],
        phase2_messages=rounds_messages if algo.variant == "gossip_avg" else counts["value"],
        ticks=ticks,
        adversary=tuple(sorted(members)) if adversary is not None else None,
        view=view,
        events=tuple(events),
        gossip_spread=spread_trace,
    )
