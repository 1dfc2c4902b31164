"""Def-use graphs over subset syntax trees.

Variables are renamed to their first-occurrence index, so consistent renaming
of identifiers leaves the graph unchanged. Edges point from a definition to a
later use in program order. Loop-carried edges, where a use reads a value
defined further down the loop body on an earlier iteration, are not recorded.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .ast import AstNode

RETURN_SINK = "<return>"
TEST_SINK = "<test>"


@dataclass(frozen=True)
class Occurrence:
    name: str
    pos: int
    role: str   # "def" or "use"


@dataclass
class DataflowGraph:
    nodes: list[Occurrence] = field(default_factory=list)
    # (def occurrence, use occurrence, sink name or marker); sink is the variable
    # or statement role that consumes the use
    edges: list[tuple[Occurrence, Occurrence, str | None]] = field(default_factory=list)

    def edge_keys(self) -> Counter:
        """Edges with names normalised by first occurrence and defs by ordinal."""
        first: dict[str, int] = {}
        for occ in sorted(self.nodes, key=lambda o: o.pos):
            first.setdefault(occ.name, len(first))
        ordinal: dict[int, int] = {}
        seen: Counter = Counter()
        for occ in sorted((o for o in self.nodes if o.role == "def"), key=lambda o: o.pos):
            ordinal[occ.pos] = seen[occ.name]
            seen[occ.name] += 1

        def norm(sink):
            if sink is None or sink.startswith("<"):
                return sink
            return f"v{first.get(sink, -1)}"

        return Counter((f"v{first[d.name]}", ordinal[d.pos], norm(sink)) for d, _, sink in self.edges)


Env = dict  # name -> frozenset of def occurrences


class _Builder:
    def __init__(self):
        self.graph = DataflowGraph()
        self._edges: set = set()

    # -- occurrences ----------------------------------------------------------
    def define(self, name_node: AstNode, env: Env) -> None:
        occ = Occurrence(name_node.value, name_node.pos, "def")
        self.graph.nodes.append(occ)
        env[name_node.value] = frozenset({occ})

    def use(self, name_node: AstNode, env: Env, sink: str | None) -> None:
        occ = Occurrence(name_node.value, name_node.pos, "use")
        self.graph.nodes.append(occ)
        for d in env.get(name_node.value, ()):
            key = (d, occ, sink)
            if d.pos < occ.pos and key not in self._edges:
                self._edges.add(key)
                self.graph.edges.append(key)

    @staticmethod
    def merge(*envs: Env) -> Env:
        out: Env = {}
        for e in envs:
            for k, v in e.items():
                out[k] = out.get(k, frozenset()) | v
        return out

    # -- expressions ----------------------------------------------------------
    def expr(self, node: AstNode, env: Env, sink: str | None) -> None:
        kind = node.kind
        if kind == "Name":
            if node.pos is not None:
                self.use(node, env, sink)
            return
        if kind in ("Assign", "AugAssign"):
            # assignment inside an expression (Java)
            self.assign(node, env)
            return
        if kind == "UnaryOp" and node.value in ("++", "--", "++post", "--post"):
            target = node.children[0]
            self.expr(target, env, sink)
            if target.kind == "Name":
                self.define(target, env)
            return
        if kind == "Keyword":
            for c in node.children:
                self.expr(c, env, sink)
            return
        for c in node.children:
            self.expr(c, env, sink)

    @staticmethod
    def first_name(node: AstNode) -> str | None:
        for n in node.walk():
            if n.kind == "Name" and n.pos is not None:
                return n.value
        return None

    def bind_target(self, target: AstNode, env: Env, sink: str | None) -> None:
        if target.kind == "Name":
            if target.pos is not None:
                self.define(target, env)
        elif target.kind in ("Tuple", "List"):
            for c in target.children:
                self.bind_target(c, env, sink)
        elif target.kind == "Starred":
            self.bind_target(target.children[0], env, sink)
        else:
            # attribute / subscript stores read their base and index
            self.expr(target, env, sink)

    def assign(self, node: AstNode, env: Env) -> None:
        *targets, value = node.children
        sink = self.first_name(targets[0]) if targets else None
        if node.kind == "AugAssign":
            self.expr(targets[0], env, sink)
        self.expr(value, env, sink)
        for t in targets:
            self.bind_target(t, env, sink)

    # -- statements -----------------------------------------------------------
    def stmts(self, nodes, env: Env) -> Env:
        for n in nodes:
            env = self.stmt(n, env)
        return env

    def stmt(self, node: AstNode, env: Env) -> Env:
        kind = node.kind
        ch = node.children
        if kind in ("Module", "Block", "ClassDef"):
            body = [c for c in ch if c.kind != "Name"] if kind == "ClassDef" else ch
            if kind == "ClassDef" and ch and ch[0].kind == "Name":
                self.define(ch[0], env)
            return self.stmts(body, dict(env))
        if kind == "FunctionDef":
            name, params, *body = ch
            self.define(name, env)
            inner = dict(env)
            for p in params.children:
                for c in p.children:
                    self.expr(c, env, None)
                if p.pos is not None:
                    self.define(AstNode("Name", (), p.span, p.value, p.pos), inner)
            self.stmts(body, inner)
            return env
        if kind in ("Assign", "AugAssign"):
            env = dict(env)
            self.assign(node, env)
            return env
        if kind == "VarDecl":
            env = dict(env)
            for c in ch[1:]:
                if c.kind == "Name":
                    self.define(c, env)
                else:
                    self.assign(c, env)
            return env
        if kind == "Return":
            for c in ch:
                self.expr(c, env, RETURN_SINK)
            return env
        if kind == "ExprStmt":
            env = dict(env)
            for c in ch:
                self.expr(c, env, None)
            return env
        if kind == "If":
            env = dict(env)
            self.expr(ch[0], env, TEST_SINK)
            then = self.stmt(ch[1], dict(env))
            other = self.stmt(ch[2], dict(env)) if len(ch) > 2 else env
            return self.merge(then, other)
        if kind == "While":
            env = dict(env)
            self.expr(ch[0], env, TEST_SINK)
            return self.merge(env, self.stmt(ch[1], dict(env)))
        if kind == "For":
            target, it, body = ch
            env = dict(env)
            self.expr(it, env, None)
            inner = dict(env)
            self.bind_target(target, inner, None)
            return self.merge(env, self.stmt(body, inner))
        if kind == "ForLoop":
            parts = node.value or ""
            env = dict(env)
            idx = 0
            init = cond = update = None
            for flag in parts:
                if flag == "i":
                    init = ch[idx]
                elif flag == "c":
                    cond = ch[idx]
                else:
                    update = ch[idx]
                idx += 1
            if init is not None:
                env = self.stmt(init, env)
            if cond is not None:
                self.expr(cond, env, TEST_SINK)
            after = self.stmt(ch[-1], dict(env))
            if update is not None:
                after = self.stmt(update, after)
            return self.merge(env, after)
        # pass / break / continue / opaque statements carry no flow
        return env


def build_dataflow(root: AstNode) -> DataflowGraph:
    b = _Builder()
    b.stmt(root, {})
    return b.graph


def dataflow_match(hyp: DataflowGraph, ref: DataflowGraph) -> float:
    """Clipped fraction of reference edges found in the hypothesis graph."""
    ref_keys = ref.edge_keys()
    total = sum(ref_keys.values())
    if total == 0:
        return 1.0
    hyp_keys = hyp.edge_keys()
    hit = sum(min(c, hyp_keys[k]) for k, c in ref_keys.items())
    return hit / total
