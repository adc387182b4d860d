"""Control-flow graph of a checked model and finite execution paths over it.

A path records one decision per executed decision point: IF (``T``/``F``),
WHILE (``enter``/``exit``), NEXT (``ok``/``exn``) and db-writes (``ok`` or
``exn`` plus the violated constraint).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

from .frontend import ast as A
from .frontend.checker import CheckedModel
from .schema import applicable_violations

EXIT = "exit"
ABORT = "abort"

Target = Union[int, str]

_DECISIONS = {"T", "F", "enter", "exit", "ok", "exn"}


@dataclass(frozen=True)
class PathStep:
    stmt: int
    decision: str
    violation: Optional[str] = None

    def to_json(self) -> dict:
        return {"stmt": self.stmt, "d": self.decision, "violation": self.violation}

    @classmethod
    def from_json(cls, obj: dict) -> "PathStep":
        d = obj["d"]
        if d not in _DECISIONS:
            raise ValueError(f"unknown decision {d!r}")
        return cls(int(obj["stmt"]), d, obj.get("violation"))

    def __str__(self) -> str:
        s = f"{self.stmt}:{self.decision}"
        return f"{s}({self.violation})" if self.violation else s


@dataclass(frozen=True)
class Path:
    steps: Tuple[PathStep, ...]
    terminal: str = EXIT  # 'exit' or 'abort'

    @property
    def aborted_at(self) -> Optional[int]:
        if self.terminal == ABORT and self.steps:
            return self.steps[-1].stmt
        return None

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps], "terminal": self.terminal}

    @classmethod
    def from_json(cls, obj: dict) -> "Path":
        terminal = obj.get("terminal", EXIT)
        if terminal not in (EXIT, ABORT):
            raise ValueError(f"unknown terminal {terminal!r}")
        return cls(tuple(PathStep.from_json(s) for s in obj["steps"]), terminal)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __str__(self) -> str:
        return " ".join(str(s) for s in self.steps) + f" -> {self.terminal}"


@dataclass(frozen=True)
class PathBounds:
    max_loop_iterations: int = 1
    include_exception_paths: bool = True
    max_paths: int = 1000

    def __post_init__(self):
        if self.max_loop_iterations < 0 or self.max_paths < 0:
            raise ValueError("path bounds must be >= 0")


@dataclass(frozen=True)
class Edge:
    src: int
    label: str  # 'next', 'T', 'F', 'enter', 'exit', 'ok', 'exn', 'exn:<violation>'
    dst: Target


@dataclass
class Cfg:
    model: CheckedModel
    nodes: Dict[int, A.Stmt]
    edges: List[Edge]
    entry: int = 0
    succ: Dict[Tuple[int, str], Target] = field(default_factory=dict)

    def successors(self, sid: int) -> List[Edge]:
        return [e for e in self.edges if e.src == sid]

    def target(self, sid: int, label: str) -> Target:
        return self.succ[(sid, label)]


def _first(stmts, cont: Target) -> Target:
    return stmts[0].stmt_id if stmts else cont


def build_cfg(model: CheckedModel) -> Cfg:
    m = model.model
    nodes: Dict[int, A.Stmt] = {}
    edges: List[Edge] = []

    def add(src: int, label: str, dst: Target) -> None:
        edges.append(Edge(src, label, dst))

    def block(stmts, cont: Target) -> None:
        for k, s in enumerate(stmts):
            nxt = stmts[k + 1].stmt_id if k + 1 < len(stmts) else cont
            nodes[s.stmt_id] = s
            if isinstance(s, A.If):
                add(s.stmt_id, "T", _first(s.then, nxt))
                add(s.stmt_id, "F", _first(s.orelse, nxt))
                block(s.then, nxt)
                block(s.orelse, nxt)
            elif isinstance(s, A.While):
                add(s.stmt_id, "enter", _first(s.body, s.stmt_id))
                add(s.stmt_id, "exit", nxt)
                block(s.body, s.stmt_id)
            elif isinstance(s, A.Next):
                add(s.stmt_id, "ok", nxt)
                add(s.stmt_id, "exn", nxt if s.catch else ABORT)
            elif isinstance(s, A.DbWrite):
                add(s.stmt_id, "ok", nxt)
                for v in applicable_violations(m, s.op):
                    add(s.stmt_id, f"exn:{v}", nxt if s.catch else ABORT)
            else:
                add(s.stmt_id, "next", nxt)

    body = (m.opening,) + tuple(m.program) + (m.closing,)
    block(body, EXIT)
    cfg = Cfg(model, nodes, edges, entry=m.opening.stmt_id)
    cfg.succ = {(e.src, e.label): e.dst for e in edges}
    return cfg


# ---------------------------------------------------------------- walking

def _phase_after_select(phases, var):
    return tuple((k, v) for k, v in phases if k != var) + ((var, "fresh"),)


def _phase(phases, var) -> str:
    for k, v in phases:
        if k == var:
            return v
    return "fresh"


def _set_phase(phases, var, value):
    return tuple((k, v) for k, v in phases if k != var) + ((var, value),)


def _skip_plain(cfg: Cfg, node: Target, phases):
    """Follow fallthrough edges from ``node`` to the next decision point or terminal."""
    while isinstance(node, int):
        s = cfg.nodes[node]
        if isinstance(s, (A.If, A.While, A.Next, A.DbWrite)):
            break
        if isinstance(s, A.Select):
            phases = _phase_after_select(phases, s.target)
        node = cfg.succ[(node, "next")]
    return node, phases


def _options(cfg: Cfg, s: A.Stmt, phases, count: int, bounds: Optional[PathBounds]):
    """Decisions available at decision node ``s`` in enumeration order: (step, label)."""
    sid = s.stmt_id
    if isinstance(s, A.If):
        return [(PathStep(sid, "T"), "T"), (PathStep(sid, "F"), "F")]
    if isinstance(s, A.While):
        opts = [(PathStep(sid, "exit"), "exit")]
        if bounds is None or count < bounds.max_loop_iterations:
            opts.append((PathStep(sid, "enter"), "enter"))
        return opts
    if isinstance(s, A.Next):
        opts = []
        if _phase(phases, s.var) != "exhausted":
            opts.append((PathStep(sid, "ok"), "ok"))
        opts.append((PathStep(sid, "exn"), "exn"))
        return opts
    opts = [(PathStep(sid, "ok"), "ok")]
    if bounds is None or bounds.include_exception_paths:
        for v in applicable_violations(cfg.model.model, s.op):
            opts.append((PathStep(sid, "exn", v), f"exn:{v}"))
    return opts


def _advance(cfg: Cfg, s: A.Stmt, label: str, phases, counts):
    sid = s.stmt_id
    if isinstance(s, A.While):
        counts = dict(counts)
        if label == "exit":
            counts.pop(sid, None)
        else:
            counts[sid] = counts.get(sid, 0) + 1
        counts = tuple(sorted(counts.items()))
    elif isinstance(s, A.Next):
        phases = _set_phase(phases, s.var, "advanced" if label == "ok" else "exhausted")
    return cfg.succ[(sid, label)], phases, counts


@dataclass
class PathSet:
    paths: List[Path]
    truncated: bool = False

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, i):
        return self.paths[i]


def enumerate_paths(cfg: Cfg, bounds: PathBounds = PathBounds()) -> PathSet:
    """Depth-first enumeration of every decision sequence within ``bounds``."""
    out: List[Path] = []
    # state: (node, steps, phases, loop counts)
    stack = [(cfg.entry, (), (), ())]
    while stack:
        if len(out) >= bounds.max_paths:
            return PathSet(out, truncated=True)
        node, steps, phases, counts = stack.pop()
        node, phases = _skip_plain(cfg, node, phases)
        if node == EXIT or node == ABORT:
            out.append(Path(steps, node))
            continue
        s = cfg.nodes[node]
        count = dict(counts).get(node, 0)
        children = []
        for step, label in _options(cfg, s, phases, count, bounds):
            nxt, ph, cn = _advance(cfg, s, label, phases, counts)
            children.append((nxt, steps + (step,), ph, cn))
        stack.extend(reversed(children))
    return PathSet(out, truncated=False)


class InvalidStep(Exception):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"step {index}: {reason}")


def validate_path(cfg: Cfg, path: Path) -> None:
    """Raise :class:`InvalidStep` unless ``path`` follows the edges of ``cfg`` from entry."""
    node: Target = cfg.entry
    phases: tuple = ()
    counts: tuple = ()
    for i, step in enumerate(path.steps):
        node, phases = _skip_plain(cfg, node, phases)
        if not isinstance(node, int):
            raise InvalidStep(i, f"path continues after reaching {node}")
        if step.stmt != node:
            raise InvalidStep(i, f"expected a decision at statement {node}, got statement {step.stmt}")
        s = cfg.nodes[node]
        for opt, label in _options(cfg, s, phases, 0, None):
            if opt == step:
                break
        else:
            raise InvalidStep(i, f"decision {step.decision}"
                                 f"{'(' + step.violation + ')' if step.violation else ''} "
                                 f"is not available at {type(s).__name__.lower()} statement {node}")
        node, phases, counts = _advance(cfg, s, label, phases, counts)
    node, phases = _skip_plain(cfg, node, phases)
    if isinstance(node, int):
        raise InvalidStep(len(path.steps), f"path ends before the decision at statement {node}")
    if node != path.terminal:
        raise InvalidStep(max(len(path.steps) - 1, 0), f"path reaches {node} but declares {path.terminal}")


def path_of_trace(trace) -> Path:
    """Project an interpreter trace (anything with ``steps`` and ``aborted``) onto a Path."""
    return Path(tuple(trace.steps), ABORT if trace.aborted else EXIT)
