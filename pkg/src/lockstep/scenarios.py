"""Scenario documents: loading, validation, serialization, builders.

A scenario lives as plain JSON-shaped data (dicts, lists, ints, strings)
both on disk and in memory, so serialize/load round-trips reduce to
structural equality. The builder helpers at the bottom construct exactly
the document shapes the loader accepts; they are how the built-in catalog
is written and they keep hand-rolled test scenarios terse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .machines import WORD_DOMAIN
from .programs import (STATUS_TOKENS, CompileContext, ProgramError, compile_program)

MECHANISM_KINDS = frozenset({
    "raw_cell", "locked_cell", "message_cell", "status_channel",
    "last_message_channel", "duplex_channel", "shared_register", "direct_channel",
})

MONITOR_KINDS = frozenset({
    "mutual_exclusion", "sent_received_order", "torn_value",
    "recipient_tag", "terminal_assert", "lost_unread",
})

_LOGGED_KINDS = frozenset({"message_cell", "status_channel",
                           "last_message_channel", "duplex_channel"})
_CELL_KINDS = frozenset({"raw_cell", "locked_cell"})


class ParseError(ValueError):
    """The document is not well-formed JSON; carries line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ValueError):
    """The document parsed but violates the scenario rules."""

    def __init__(self, errors):
        self.errors = tuple(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class Scenario:
    name: str
    word_width: int
    mechanisms: tuple
    processes: tuple
    monitors: tuple = ()
    bounds: dict | None = None

    @classmethod
    def from_parts(cls, name, word_width, mechanisms, processes, monitors=(), bounds=None):
        """Build from builder output, normalizing to plain JSON data."""
        doc = _plain({"name": name, "word_width": word_width,
                      "mechanisms": list(mechanisms), "processes": list(processes),
                      "monitors": list(monitors)})
        if bounds is not None:
            doc["bounds"] = _plain(bounds)
        return cls.from_doc(doc)

    @classmethod
    def from_doc(cls, doc):
        if not isinstance(doc, dict):
            raise ValidationError(["document: a scenario must be a JSON object"])
        missing = [k for k in ("name", "word_width", "mechanisms", "processes")
                   if k not in doc]
        if missing:
            raise ValidationError([f"document: missing required field '{k}'" for k in missing])
        unknown = set(doc) - {"name", "word_width", "mechanisms", "processes",
                              "monitors", "bounds"}
        if unknown:
            raise ValidationError([f"document: unknown field '{k}'" for k in sorted(unknown)])
        doc = _plain(doc)
        for key in ("mechanisms", "processes"):
            if not isinstance(doc[key], list):
                raise ValidationError([f"{key}: must be a list"])
        monitors = doc.get("monitors", [])
        if not isinstance(monitors, list):
            raise ValidationError(["monitors: must be a list"])
        return cls(name=doc["name"], word_width=doc["word_width"],
                   mechanisms=tuple(doc["mechanisms"]), processes=tuple(doc["processes"]),
                   monitors=tuple(monitors), bounds=doc.get("bounds"))

    def to_doc(self):
        doc = {"name": self.name, "word_width": self.word_width,
               "mechanisms": list(self.mechanisms), "processes": list(self.processes),
               "monitors": list(self.monitors)}
        if self.bounds is not None:
            doc["bounds"] = self.bounds
        return _plain(doc)

    def serialize(self) -> str:
        return json.dumps(self.to_doc(), indent=2, sort_keys=True) + "\n"


def _plain(x):
    """Deep-copy through JSON, coercing tuples to lists on the way."""
    try:
        return json.loads(json.dumps(x))
    except TypeError as e:
        raise ValidationError([f"document: not JSON-representable: {e}"]) from None


def serialize(scenario: Scenario) -> str:
    return scenario.serialize()


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    scenario = Scenario.from_doc(doc)
    validate(scenario)
    return scenario


def load_file(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


# -- validation ---------------------------------------------------------------


def _is_word(x):
    return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < WORD_DOMAIN


def _check_value_literal(doc, width, path, errors):
    if not isinstance(doc, list) or len(doc) != width or not all(_is_word(w) for w in doc):
        errors.append(f"{path}: must be a list of {width} words in 0..{WORD_DOMAIN - 1}")
        return False
    return True


def validate(scenario: Scenario) -> None:
    """Check every scenario rule; raise ValidationError listing all problems."""
    errors = []
    if not isinstance(scenario.name, str) or not scenario.name:
        errors.append("name: must be a non-empty string")
    width_ok = isinstance(scenario.word_width, int) and 1 <= scenario.word_width <= 4
    if not width_ok:
        errors.append("word_width: must be an integer in 1..4")
    width = scenario.word_width if width_ok else 2

    mech_kind = {}
    duplex_sides = {}
    for i, m in enumerate(scenario.mechanisms):
        path = f"mechanisms[{i}]"
        if not isinstance(m, dict):
            errors.append(f"{path}: must be an object")
            continue
        mid = m.get("id")
        if not isinstance(mid, str) or not mid:
            errors.append(f"{path}.id: must be a non-empty string")
            continue
        if mid in mech_kind:
            errors.append(f"{path}.id: duplicate mechanism id '{mid}'")
            continue
        kind = m.get("kind")
        if kind not in MECHANISM_KINDS:
            errors.append(f"{path}.kind: unknown mechanism kind {kind!r}")
            continue
        mech_kind[mid] = kind
        if kind in ("raw_cell", "locked_cell", "shared_register"):
            _check_value_literal(m.get("initial"), width, f"{path}.initial", errors)
        if kind == "locked_cell" and m.get("mode") not in ("encapsulated", "undisciplined"):
            errors.append(f"{path}.mode: must be 'encapsulated' or 'undisciplined'")
        if kind == "duplex_channel":
            a, b = m.get("side_a"), m.get("side_b")
            for side, v in (("side_a", a), ("side_b", b)):
                if not isinstance(v, int) or isinstance(v, bool):
                    errors.append(f"{path}.{side}: must be a process id")
            if isinstance(a, int) and a == b:
                errors.append(f"{path}: side_a and side_b must be distinct processes")
            duplex_sides[mid] = (a, b)

    pids = []
    for i, p in enumerate(scenario.processes):
        path = f"processes[{i}]"
        if not isinstance(p, dict) or not isinstance(p.get("id"), int):
            errors.append(f"{path}: must be an object with an integer 'id'")
            continue
        pids.append(p["id"])
    if sorted(pids) != list(range(len(scenario.processes))):
        errors.append("processes: ids must be exactly 0..N-1, each once")
    valid_pids = set(range(len(scenario.processes)))

    for mid, (a, b) in duplex_sides.items():
        for side, v in (("side_a", a), ("side_b", b)):
            if isinstance(v, int) and v not in valid_pids:
                errors.append(f"duplex channel '{mid}'.{side}: process {v} is not declared")

    if errors:
        raise ValidationError(errors)

    # With the structure sound, compile every program and then check monitors
    # against what the programs actually bind.
    mech_index = {mid: i for i, mid in enumerate(mech_kind)}
    programs = {}
    referenced = set()
    for i, p in enumerate(sorted(scenario.processes, key=lambda q: q["id"])):
        ctx = CompileContext(pid=p["id"], word_width=width, mech_kind=mech_kind,
                             mech_index=mech_index, duplex_sides=duplex_sides)
        try:
            prog = compile_program(p.get("steps"), ctx)
        except ProgramError as e:
            errors.append(f"processes[{p['id']}].{e.path}: {e.message}")
            continue
        programs[p["id"]] = prog
        referenced |= prog.mechs

    for mid in mech_kind:
        if mid not in referenced:
            errors.append(f"mechanism '{mid}' is never referenced by any process step")

    for j, mon in enumerate(scenario.monitors):
        _validate_monitor(mon, f"monitors[{j}]", mech_kind, programs, valid_pids,
                          width, errors)

    if scenario.bounds is not None:
        b = scenario.bounds
        if not isinstance(b, dict) or set(b) - {"max_depth", "max_states"}:
            errors.append("bounds: must be an object with only max_depth / max_states")
        else:
            for k, v in b.items():
                if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                    errors.append(f"bounds.{k}: must be a positive integer")

    if errors:
        raise ValidationError(errors)


def _validate_monitor(mon, path, mech_kind, programs, valid_pids, width, errors):
    if not isinstance(mon, dict):
        errors.append(f"{path}: must be an object")
        return
    kind = mon.get("kind")
    if kind not in MONITOR_KINDS:
        errors.append(f"{path}.kind: unknown monitor kind {kind!r}")
        return

    def need_mech(allowed):
        mid = mon.get("mechanism")
        if mid not in mech_kind:
            errors.append(f"{path}.mechanism: undeclared mechanism {mid!r}")
            return None
        if mech_kind[mid] not in allowed:
            errors.append(f"{path}.mechanism: '{mid}' has kind {mech_kind[mid]}, "
                          f"which this monitor does not apply to")
            return None
        return mid

    def need_var(pid, name, where):
        prog = programs.get(pid)
        if prog is not None and name not in prog.vars:
            errors.append(f"{where}: process {pid} never binds variable {name!r}")

    if kind == "mutual_exclusion":
        if "mechanism" in mon:
            need_mech(MECHANISM_KINDS)
        markers = mon.get("markers")
        if not isinstance(markers, list) or len(markers) < 2:
            errors.append(f"{path}.markers: needs at least two [process, var] pairs")
            return
        for k, mk in enumerate(markers):
            if (not isinstance(mk, list) or len(mk) != 2
                    or not isinstance(mk[0], int) or not isinstance(mk[1], str)):
                errors.append(f"{path}.markers[{k}]: must be a [process, var] pair")
                continue
            if mk[0] not in valid_pids:
                errors.append(f"{path}.markers[{k}]: process {mk[0]} is not declared")
            else:
                need_var(mk[0], mk[1], f"{path}.markers[{k}]")
    elif kind == "sent_received_order":
        need_mech(_LOGGED_KINDS)
    elif kind == "torn_value":
        need_mech(_CELL_KINDS)
        allowed = mon.get("allowed")
        if not isinstance(allowed, list) or not allowed:
            errors.append(f"{path}.allowed: needs at least one value")
        else:
            for k, v in enumerate(allowed):
                _check_value_literal(v, width, f"{path}.allowed[{k}]", errors)
        pid = mon.get("process")
        if pid not in valid_pids:
            errors.append(f"{path}.process: process {pid!r} is not declared")
        names = mon.get("vars")
        if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
            errors.append(f"{path}.vars: needs a list of variable names")
        elif pid in valid_pids:
            for n in names:
                need_var(pid, n, f"{path}.vars")
    elif kind == "recipient_tag":
        need_mech({"duplex_channel"})
    elif kind == "terminal_assert":
        pid = mon.get("process")
        if pid not in valid_pids:
            errors.append(f"{path}.process: process {pid!r} is not declared")
        name = mon.get("var")
        if not isinstance(name, str):
            errors.append(f"{path}.var: must be a variable name")
        elif pid in valid_pids:
            need_var(pid, name, f"{path}.var")
        exp = mon.get("expected")
        if isinstance(exp, list):
            _check_value_literal(exp, width, f"{path}.expected", errors)
        elif isinstance(exp, str):
            if exp not in STATUS_TOKENS:
                errors.append(f"{path}.expected: status token must be one of {STATUS_TOKENS}")
        elif exp is not None and not _is_word(exp):
            errors.append(f"{path}.expected: must be null, a word, a status token, or a value")
    elif kind == "lost_unread":
        need_mech(_LOGGED_KINDS)


# -- builders: mechanisms ------------------------------------------------------


def raw_cell(mid, initial):
    return {"id": mid, "kind": "raw_cell", "initial": list(initial)}


def locked_cell(mid, initial, mode="encapsulated"):
    return {"id": mid, "kind": "locked_cell", "initial": list(initial), "mode": mode}


def message_cell(mid):
    return {"id": mid, "kind": "message_cell"}


def status_channel(mid):
    return {"id": mid, "kind": "status_channel"}


def last_message_channel(mid):
    return {"id": mid, "kind": "last_message_channel"}


def duplex_channel(mid, side_a, side_b, last_message=False):
    return {"id": mid, "kind": "duplex_channel", "side_a": side_a, "side_b": side_b,
            "last_message": last_message}


def shared_register(mid, initial):
    return {"id": mid, "kind": "shared_register", "initial": list(initial)}


def direct_channel(mid):
    return {"id": mid, "kind": "direct_channel"}


# -- builders: steps -----------------------------------------------------------


def process(pid, *steps):
    return {"id": pid, "steps": list(steps)}


def lock(mech):
    return {"op": "lock", "mechanism": mech}


def unlock(mech):
    return {"op": "unlock", "mechanism": mech}


def read(mech, var):
    return {"op": "read", "mechanism": mech, "var": var}


def write(mech, value):
    return {"op": "write", "mechanism": mech, "value": value}


def send(mech, value):
    return {"op": "send", "mechanism": mech, "value": value}


def receive(mech, var):
    return {"op": "receive", "mechanism": mech, "var": var}


def read_word(mech, index, var):
    return {"op": "read_word", "mechanism": mech, "index": index, "var": var}


def write_word(mech, index, word):
    return {"op": "write_word", "mechanism": mech, "index": index, "word": word}


def wait_word(mech, index, word):
    return {"op": "wait_word", "mechanism": mech, "index": index, "word": word}


def if_word(mech, index, word, then, orelse=()):
    return {"op": "if_word", "mechanism": mech, "index": index, "word": word,
            "then": list(then), "else": list(orelse)}


def check(mech, var):
    return {"op": "check", "mechanism": mech, "var": var}


def if_status(mech, full, empty=()):
    return {"op": "if_status", "mechanism": mech, "full": list(full),
            "empty": list(empty)}


def update(mech, fn, k=None):
    doc = {"op": "update", "mechanism": mech, "fn": fn}
    if k is not None:
        doc["k"] = k
    return doc


def loop(count, body):
    return {"op": "loop", "count": count, "body": list(body)}


def choose(*alternatives):
    return {"op": "choose", "alternatives": [list(a) for a in alternatives]}


def local(var, value):
    return {"op": "local", "var": var, "value": value}


def assert_local(var, expected):
    return {"op": "assert_local", "var": var, "expected": expected}


def var(name):
    return {"var": name}


def applied(fn, variable, k=None):
    doc = {"fn": fn, "var": variable}
    if k is not None:
        doc["k"] = k
    return doc


# -- builders: monitors ---------------------------------------------------------


def mutual_exclusion(markers, mech=None):
    doc = {"kind": "mutual_exclusion", "markers": [list(m) for m in markers]}
    if mech is not None:
        doc["mechanism"] = mech
    return doc


def sent_received_order(mech):
    return {"kind": "sent_received_order", "mechanism": mech}


def torn_value(mech, allowed, process_id, variables):
    return {"kind": "torn_value", "mechanism": mech,
            "allowed": [list(v) for v in allowed],
            "process": process_id, "vars": list(variables)}


def recipient_tag(mech):
    return {"kind": "recipient_tag", "mechanism": mech}


def terminal_assert(process_id, variable, expected):
    return {"kind": "terminal_assert", "process": process_id, "var": variable,
            "expected": expected}


def lost_unread(mech):
    return {"kind": "lost_unread", "mechanism": mech}
