"""Schedule exploration.

explore() walks every reachable interleaving of a scenario once, sharing
states that coincide, and reports the first witness of each violation
class together with a replayable schedule. Programs cannot revisit a
position (loops are unrolled), so the state graph is acyclic and the
number of maximal schedules can be counted exactly by memoized path
counting. find_shortest() answers the same question breadth-first and
therefore returns a minimal counterexample. random_walks() is the
cheap cross-check: it must never find a class the exhaustive pass missed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .kernel import System, Trace, store_get, store_has
from .monitors import compile_monitors

_IN_PROGRESS = object()


@dataclass(frozen=True)
class Bounds:
    max_depth: int = 200
    max_states: int = 1_000_000


@dataclass(frozen=True)
class Violation:
    kind: str
    name: str | None
    detail: str | None
    trace: Trace
    state_hash: str

    @property
    def cls(self) -> str:
        """Stable class string used for dedup, expectations, and matching."""
        if self.kind == "monitor_assert":
            return f"monitor_assert:{self.name}"
        if self.kind == "lost_message" and self.detail in ("own-outgoing", "incoming"):
            return f"lost_message:{self.detail}"
        return self.kind

    def to_doc(self):
        return {"class": self.cls, "kind": self.kind, "name": self.name,
                "detail": self.detail, "state_hash": self.state_hash,
                "trace": self.trace.to_doc()}

    @classmethod
    def from_doc(cls, doc):
        return cls(kind=doc["kind"], name=doc.get("name"), detail=doc.get("detail"),
                   trace=Trace.from_doc(doc["trace"]), state_hash=doc["state_hash"])


@dataclass(frozen=True)
class ExplorationReport:
    scenario: str
    states_visited: int
    distinct_terminal_states: int
    schedules_complete: int | None
    violations: tuple
    bounds_hit: bool
    terminal_states: tuple = ()

    @property
    def violation_classes(self) -> frozenset:
        return frozenset(v.cls for v in self.violations)

    def to_doc(self):
        return {"scenario": self.scenario,
                "states_visited": self.states_visited,
                "distinct_terminal_states": self.distinct_terminal_states,
                "schedules_complete": self.schedules_complete,
                "bounds_hit": self.bounds_hit,
                "violations": [v.to_doc() for v in self.violations]}


@dataclass(frozen=True)
class WalkSummary:
    walks: int
    classes: frozenset


def as_system(scenario_or_system) -> System:
    if isinstance(scenario_or_system, System):
        return scenario_or_system
    return System(scenario_or_system)


def resolve_bounds(sys: System, override) -> Bounds:
    if isinstance(override, Bounds):
        return override
    if isinstance(override, dict):
        return Bounds(**override)
    doc = sys.scenario.bounds
    if doc:
        return Bounds(max_depth=doc.get("max_depth", Bounds.max_depth),
                      max_states=doc.get("max_states", Bounds.max_states))
    return Bounds()


class _Checks:
    """Monitor fan-out, shared by every exploration strategy."""

    def __init__(self, sys):
        self.sys = sys
        self.monitors = compile_monitors(sys)

    def state(self, state):
        out = []
        for m in self.monitors:
            out.extend(m.on_state(self.sys, state))
        return out

    def event(self, prev, ev, post):
        out = []
        for m in self.monitors:
            out.extend(m.on_event(self.sys, prev, ev, post))
        return out

    def sink(self, state):
        """Hits for a state with no enabled action: deadlock or terminal checks."""
        if self.sys.all_terminated(state):
            out = []
            for m in self.monitors:
                out.extend(m.on_terminal(self.sys, state))
            return out
        stuck = ", ".join(f"p{q}" for q in self.sys.live_processes(state))
        return [("deadlock", None, f"no action enabled, {stuck} not terminated")]


def explore(scenario, bounds=None) -> ExplorationReport:
    """Visit every reachable state within bounds; report one witness per class."""
    sys = as_system(scenario)
    b = resolve_bounds(sys, bounds)
    checks = _Checks(sys)

    memo = {}            # state -> maximal-schedule count below it (None = truncated)
    violations = {}      # class -> first Violation, in discovery order
    terminals = []
    terminal_seen = set()
    bounds_hit = False

    def record(hits, events, state):
        for kind, name, detail in hits:
            v = Violation(kind, name, detail, Trace(tuple(events)), sys.state_hash(state))
            violations.setdefault(v.cls, v)

    init = sys.initial_state()
    memo[init] = _IN_PROGRESS
    record(checks.state(init), (), init)
    # frame: [state, enabled, next edge index, schedule count accumulator, inbound event]
    stack = [[init, None, 0, 0, None]]

    def close(count):
        frame = stack.pop()
        memo[frame[0]] = count
        if stack:
            parent = stack[-1]
            parent[3] = None if (parent[3] is None or count is None) else parent[3] + count

    def trail(extra=None):
        events = tuple(f[4] for f in stack[1:])
        return events if extra is None else events + (extra,)

    while stack:
        frame = stack[-1]
        state = frame[0]
        if frame[1] is None:
            frame[1] = sys.enabled_actions(state)
            if not frame[1]:
                hits = checks.sink(state)
                if sys.all_terminated(state) and state not in terminal_seen:
                    terminal_seen.add(state)
                    terminals.append(state)
                record(hits, trail(), state)
                close(1)
                continue
            if len(stack) - 1 >= b.max_depth:
                bounds_hit = True
                close(None)
                continue
        edges = frame[1]
        if frame[2] >= len(edges):
            close(frame[3])
            continue
        ev = edges[frame[2]]
        frame[2] += 1
        post = sys.apply(state, ev)
        hits = checks.event(state, ev, post)
        if hits:
            record(hits, trail(ev), post)
        if post in memo:
            count = memo[post]
            if count is _IN_PROGRESS:  # pragma: no cover - programs only move forward
                raise RuntimeError("cycle in the schedule graph")
            frame[3] = None if (frame[3] is None or count is None) else frame[3] + count
        else:
            memo[post] = _IN_PROGRESS
            state_hits = checks.state(post)
            if state_hits:
                record(state_hits, trail(ev), post)
            if len(memo) > b.max_states:
                bounds_hit = True
                memo[post] = None
                frame[3] = None
            else:
                stack.append([post, None, 0, 0, ev])

    total = memo[init]
    return ExplorationReport(
        scenario=sys.scenario.name,
        states_visited=len(memo),
        distinct_terminal_states=len(terminals),
        schedules_complete=None if bounds_hit else total,
        violations=tuple(violations.values()),
        bounds_hit=bounds_hit,
        terminal_states=tuple(terminals),
    )


def _matches(requested, hit_kind, hit_cls):
    return hit_cls == requested or hit_kind == requested


def find_shortest(scenario, kind, bounds=None) -> Violation | None:
    """Breadth-first search for the shortest schedule hitting a violation class.

    ``kind`` may be a bare kind ("deadlock", "torn_read", "monitor_assert")
    or a full class string ("lost_message:own-outgoing").
    """
    sys = as_system(scenario)
    b = resolve_bounds(sys, bounds)
    checks = _Checks(sys)

    init = sys.initial_state()
    parents = {init: None}
    depth = {init: 0}

    def build(state, extra=None):
        events = []
        cur = state
        while parents[cur] is not None:
            prev, ev = parents[cur]
            events.append(ev)
            cur = prev
        events.reverse()
        if extra is not None:
            events.append(extra)
        return tuple(events)

    def first_match(hits, events, state):
        for hk, hn, hd in hits:
            v = Violation(hk, hn, hd, Trace(events), sys.state_hash(state))
            if _matches(kind, hk, v.cls):
                return v
        return None

    v = first_match(checks.state(init), (), init)
    if v is not None:
        return v

    queue = [init]
    qi = 0
    while qi < len(queue):
        state = queue[qi]
        qi += 1
        edges = sys.enabled_actions(state)
        if not edges:
            v = first_match(checks.sink(state), build(state), state)
            if v is not None:
                return v
            continue
        if depth[state] >= b.max_depth:
            continue
        for ev in edges:
            post = sys.apply(state, ev)
            v = first_match(checks.event(state, ev, post), build(state, ev), post)
            if v is not None:
                return v
            if post not in parents:
                parents[post] = (state, ev)
                depth[post] = depth[state] + 1
                v = first_match(checks.state(post), build(post), post)
                if v is not None:
                    return v
                if len(parents) <= b.max_states:
                    queue.append(post)
    return None


def random_walks(scenario, walks=10_000, seed=0, bounds=None) -> WalkSummary:
    """Sample maximal schedules uniformly step-wise; collect violation classes."""
    sys = as_system(scenario)
    b = resolve_bounds(sys, bounds)
    checks = _Checks(sys)
    rng = random.Random(seed)
    classes = set()

    def collect(hits):
        for hk, hn, hd in hits:
            classes.add(Violation(hk, hn, hd, Trace(()), "").cls)

    init = sys.initial_state()
    for _ in range(walks):
        state = init
        collect(checks.state(state))
        steps = 0
        while True:
            edges = sys.enabled_actions(state)
            if not edges:
                collect(checks.sink(state))
                break
            if steps >= b.max_depth:
                break
            ev = edges[rng.randrange(len(edges))]
            post = sys.apply(state, ev)
            collect(checks.event(state, ev, post))
            collect(checks.state(post))
            state = post
            steps += 1
    return WalkSummary(walks=walks, classes=frozenset(classes))


def replay_with_checks(scenario, events):
    """Replay a schedule and report the violation classes present at its end.

    Returns (final_state, classes). Classes cover the final transition, the
    final state, and, where the schedule ends in a state with no enabled
    action, the deadlock/terminal checks.
    """
    sys = as_system(scenario)
    if isinstance(events, Trace):
        events = events.events
    return _replay_collect(sys, tuple(events))


def verify_violation(scenario, violation: Violation) -> bool:
    """Replay a recorded violation; True iff its class recurs at the trace end
    and the final state hash matches."""
    sys = as_system(scenario)
    final, classes = _replay_collect(sys, violation.trace.events)
    return violation.cls in classes and sys.state_hash(final) == violation.state_hash


def _replay_collect(sys, events):
    from .kernel import NotEnabledAtStep

    checks = _Checks(sys)
    classes = set()

    def collect(hits):
        for hk, hn, hd in hits:
            classes.add(Violation(hk, hn, hd, Trace(()), "").cls)

    state = sys.initial_state()
    last = len(events) - 1
    for k, ev in enumerate(events):
        enabled = sys.enabled_actions(state)
        if ev not in enabled:
            raise NotEnabledAtStep(k, ev, enabled)
        post = sys.apply(state, ev)
        if k == last:
            collect(checks.event(state, ev, post))
        state = post
    collect(checks.state(state))
    if not sys.enabled_actions(state):
        collect(checks.sink(state))
    return state, classes


def terminal_variable_values(sys, report, pid, names):
    """The set of value tuples a process's variables hold across completed runs."""
    out = set()
    for state in report.terminal_states:
        store = state.procs[pid].store
        out.add(tuple(store_get(store, n) if store_has(store, n) else None
                      for n in names))
    return out


def terminal_mechanism_states(sys, report, mech_id):
    """The set of snapshots one mechanism ends in across completed runs."""
    index = sys.mech_index[mech_id]
    return {state.mechs[index] for state in report.terminal_states}
