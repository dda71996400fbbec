"""Deterministic fragment of the action language BC.

An action description is written as line-oriented text::

    sort location = {mp, rd, ls, lll, lrl, key}
    fluent loc : location
    fluent picked_key : bool
    action move(L : location)
    dynamic move(L) causes loc=L
    static picked_key=true if loc=key
    nonexecutable move(key) if picked_key=true
    inertial loc
    default picked_key=false

Identifiers starting with an upper-case letter are variables. A variable is
bound either positionally by the parameters of an ``action`` declaration or
globally with ``variable X : sort``. Every law is grounded over the objects of
the sorts of the variables it mentions, so the resulting
:class:`ActionDescription` is propositional.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

BOOL = ("false", "true")

STATIC = "static"
DYNAMIC = "dynamic"
NONEXECUTABLE = "nonexecutable"
INERTIAL = "inertial"
DEFAULT = "default"
LAW_KINDS = (STATIC, DYNAMIC, NONEXECUTABLE, INERTIAL, DEFAULT)


class ParseError(ValueError):
    """Raised for malformed or ill-typed action-description text."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class FluentDecl:
    name: str
    domain: tuple[str, ...]


@dataclass(frozen=True, order=True)
class FluentAtom:
    fluent: str
    value: str

    def __str__(self) -> str:
        return f"{self.fluent}={self.value}"


@dataclass(frozen=True)
class CausalLaw:
    """One grounded causal law.

    ``head`` is absent for nonexecutable and inertial laws; ``fluent`` is only
    set for inertial laws; ``action`` only for dynamic and nonexecutable laws.
    """

    kind: str
    head: FluentAtom | None = None
    action: str | None = None
    body: tuple[FluentAtom, ...] = ()
    fluent: str | None = None

    def holds(self, state: Mapping[str, str]) -> bool:
        return all(state.get(a.fluent) == a.value for a in self.body)

    def __str__(self) -> str:
        cond = f" if {', '.join(map(str, self.body))}" if self.body else ""
        if self.kind == DYNAMIC:
            return f"dynamic {self.action} causes {self.head}{cond}"
        if self.kind == NONEXECUTABLE:
            return f"nonexecutable {self.action}{cond}"
        if self.kind == INERTIAL:
            return f"inertial {self.fluent}"
        return f"{self.kind} {self.head}{cond}"


@dataclass(frozen=True)
class ActionDescription:
    fluents: tuple[FluentDecl, ...]
    actions: tuple[str, ...]
    laws: tuple[CausalLaw, ...]
    sorts: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def fluent(self, name: str) -> FluentDecl:
        for f in self.fluents:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def fluent_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fluents)

    def laws_of(self, kind: str) -> Iterator[CausalLaw]:
        return (law for law in self.laws if law.kind == kind)

    @property
    def inertial(self) -> frozenset[str]:
        return frozenset(law.fluent for law in self.laws_of(INERTIAL))

    def __str__(self) -> str:
        return format_action_description(self)


class SymbolicState(Mapping[str, str]):
    """A complete, immutable assignment of values to fluents.

    Atom order follows the fluent declaration order of the description the
    state was built from, so two equal states print identically.
    """

    __slots__ = ("_items", "_index", "_hash")

    def __init__(self, items: Iterable[tuple[str, str]]):
        self._items = tuple(items)
        self._index = dict(self._items)
        self._hash = hash(self._items)

    @classmethod
    def from_mapping(cls, d: ActionDescription, values: Mapping[str, str]) -> "SymbolicState":
        return cls((name, values[name]) for name in d.fluent_names)

    def __getitem__(self, fluent: str) -> str:
        return self._index[fluent]

    def __iter__(self) -> Iterator[str]:
        return (f for f, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SymbolicState):
            return self._items == other._items
        return NotImplemented

    def __lt__(self, other: "SymbolicState") -> bool:
        return self._items < other._items

    def atoms(self) -> tuple[FluentAtom, ...]:
        return tuple(FluentAtom(f, v) for f, v in self._items)

    def replace(self, **values: str) -> "SymbolicState":
        return SymbolicState((f, values.get(f, v)) for f, v in self._items)

    def __str__(self) -> str:
        return ",".join(f"{f}={v}" for f, v in self._items)

    def __repr__(self) -> str:
        return f"SymbolicState({self})"


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<id>[a-z][A-Za-z0-9_]*)|(?P<var>[A-Z][A-Za-z0-9_]*)|(?P<num>-?\d+)"
    r"|(?P<sym>[{}(),:=]))"
)
_KEYWORDS = {"sort", "fluent", "action", "variable", "causes", "if", *LAW_KINDS}


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    stripped = line.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(stripped[pos:]) - len(stripped[pos:].lstrip()))
            raise ParseError(f"unexpected character {stripped[col - 1]!r}", lineno, col)
        kind = m.lastgroup
        text = m.group(kind)
        if kind == "num":
            kind = "id"
        toks.append(_Tok(kind, text, m.start(kind) + 1))
        pos = m.end()
    return toks


class _Line:
    def __init__(self, toks: list[_Tok], lineno: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno

    def error(self, message: str, tok: _Tok | None = None) -> ParseError:
        if tok is None:
            tok = self.toks[self.i] if self.i < len(self.toks) else None
        col = tok.col if tok else (self.toks[-1].col + len(self.toks[-1].text) if self.toks else 1)
        return ParseError(message, self.lineno, col)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, kind: str | None = None, text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None:
            want = text or kind or "token"
            raise self.error(f"expected {want!r}, found end of line")
        if (kind and tok.kind != kind) or (text and tok.text != text):
            raise self.error(f"expected {text or kind!r}, found {tok.text!r}")
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return True
        return False

    def done(self) -> None:
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek().text!r}")


@dataclass
class _Term:
    text: str
    is_var: bool
    tok: _Tok


@dataclass
class _RawAtom:
    fluent: _Tok
    value: _Term


@dataclass
class _RawAction:
    name: _Tok
    args: list[_Term]


@dataclass
class _RawLaw:
    kind: str
    lineno: int
    head: _RawAtom | None = None
    action: _RawAction | None = None
    body: list[_RawAtom] = field(default_factory=list)
    fluents: list[_Tok] = field(default_factory=list)


@dataclass
class _ActionSchema:
    name: str
    params: list[tuple[str | None, str]]  # (variable or None, sort-or-constant)


def _term(ln: _Line) -> _Term:
    tok = ln.peek()
    if tok is None or tok.kind not in ("id", "var"):
        raise ln.error("expected a value or variable")
    ln.i += 1
    return _Term(tok.text, tok.kind == "var", tok)


def _atom(ln: _Line) -> _RawAtom:
    name = ln.take("id")
    ln.take(text="=")
    return _RawAtom(name, _term(ln))


def _atoms(ln: _Line) -> list[_RawAtom]:
    out = [_atom(ln)]
    while ln.accept(","):
        out.append(_atom(ln))
    return out


def _action_ref(ln: _Line) -> _RawAction:
    name = ln.take("id")
    args: list[_Term] = []
    if ln.accept("("):
        args.append(_term(ln))
        while ln.accept(","):
            args.append(_term(ln))
        ln.take(text=")")
    return _RawAction(name, args)


def _ident_set(ln: _Line) -> list[_Tok]:
    ln.take(text="{")
    items = [ln.take("id")]
    while ln.accept(","):
        items.append(ln.take("id"))
    ln.take(text="}")
    return items


def action_id(name: str, args: Iterable[str] = ()) -> str:
    args = tuple(args)
    return f"{name}({','.join(args)})" if args else name


def parse_action_description(text: str) -> ActionDescription:
    """Parse and ground action-description text.

    Raises:
        ParseError: on syntax errors (with line and column), references to
            undeclared sorts, fluents, values, actions or objects, and
            duplicate declarations.
    """
    sorts: dict[str, tuple[str, ...]] = {}
    fluents: dict[str, FluentDecl] = {}
    fluent_sorts: dict[str, str] = {}
    schemas: dict[str, _ActionSchema] = {}
    global_vars: dict[str, str] = {}
    raw_laws: list[_RawLaw] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0]
        toks = _tokenize(line, lineno)
        if not toks:
            continue
        ln = _Line(toks, lineno)
        head = ln.take("id")
        kw = head.text
        if kw == "sort":
            name = ln.take("id")
            if name.text in sorts or name.text == "bool":
                raise ln.error(f"duplicate sort {name.text!r}", name)
            ln.take(text="=")
            items = _ident_set(ln)
            values = tuple(t.text for t in items)
            if len(set(values)) != len(values):
                raise ln.error(f"duplicate object in sort {name.text!r}", name)
            sorts[name.text] = values
        elif kw == "fluent":
            name = ln.take("id")
            if name.text in fluents:
                raise ln.error(f"duplicate fluent declaration {name.text!r}", name)
            if name.text in _KEYWORDS:
                raise ln.error(f"reserved word {name.text!r}", name)
            ln.take(text=":")
            if ln.peek() is not None and ln.peek().text == "{":
                items = _ident_set(ln)
                domain = tuple(t.text for t in items)
                if len(set(domain)) != len(domain):
                    raise ln.error(f"duplicate value in domain of {name.text!r}", name)
            else:
                sort = ln.take("id")
                if sort.text == "bool":
                    domain = BOOL
                elif sort.text in sorts:
                    domain = sorts[sort.text]
                    fluent_sorts[name.text] = sort.text
                else:
                    raise ln.error(f"undeclared sort {sort.text!r}", sort)
            fluents[name.text] = FluentDecl(name.text, domain)
        elif kw == "action":
            name = ln.take("id")
            params: list[tuple[str | None, str]] = []
            if ln.accept("("):
                while True:
                    tok = ln.peek()
                    if tok is not None and tok.kind == "var":
                        ln.i += 1
                        ln.take(text=":")
                        sort = ln.take("id")
                        if sort.text not in sorts:
                            raise ln.error(f"undeclared sort {sort.text!r}", sort)
                        params.append((tok.text, sort.text))
                    else:
                        const = ln.take("id")
                        if not any(const.text in objs for objs in sorts.values()):
                            raise ln.error(f"undeclared object {const.text!r}", const)
                        params.append((None, const.text))
                    if not ln.accept(","):
                        break
                ln.take(text=")")
            key = name.text
            if key in schemas and not all(v is None for v, _ in params):
                raise ln.error(f"duplicate action declaration {key!r}", name)
            if key in schemas:
                # several grounded declarations of the same action name
                schemas[key].params.append(("@ground", ",".join(c for _, c in params)))
            elif params and all(v is None for v, _ in params):
                schemas[key] = _ActionSchema(key, [("@ground", ",".join(c for _, c in params))])
            else:
                schemas[key] = _ActionSchema(key, params)
        elif kw == "variable":
            var = ln.take("var")
            ln.take(text=":")
            sort = ln.take("id")
            if sort.text not in sorts:
                raise ln.error(f"undeclared sort {sort.text!r}", sort)
            global_vars[var.text] = sort.text
        elif kw == DYNAMIC:
            act = _action_ref(ln)
            ln.take(text="causes")
            law = _RawLaw(DYNAMIC, lineno, head=_atom(ln), action=act)
            if ln.accept("if"):
                law.body = _atoms(ln)
            raw_laws.append(law)
        elif kw == NONEXECUTABLE:
            law = _RawLaw(NONEXECUTABLE, lineno, action=_action_ref(ln))
            if ln.accept("if"):
                law.body = _atoms(ln)
            raw_laws.append(law)
        elif kw in (STATIC, DEFAULT):
            law = _RawLaw(kw, lineno, head=_atom(ln))
            if ln.accept("if"):
                law.body = _atoms(ln)
            raw_laws.append(law)
        elif kw == INERTIAL:
            law = _RawLaw(INERTIAL, lineno, fluents=[ln.take("id")])
            while ln.accept(","):
                law.fluents.append(ln.take("id"))
            raw_laws.append(law)
        else:
            raise ln.error(f"unknown declaration {kw!r}", head)
        ln.done()

    if not fluents:
        raise ParseError("no fluents declared")

    actions = _ground_actions(schemas, sorts)
    laws: list[CausalLaw] = []
    for raw_law in raw_laws:
        laws.extend(_ground_law(raw_law, fluents, schemas, sorts, global_vars, set(actions)))
    return ActionDescription(
        fluents=tuple(fluents.values()),
        actions=tuple(actions),
        laws=tuple(laws),
        sorts=tuple(sorts.items()),
    )


def _ground_actions(schemas: Mapping[str, _ActionSchema], sorts: Mapping[str, tuple[str, ...]]) -> list[str]:
    out: list[str] = []
    for schema in schemas.values():
        if not schema.params:
            out.append(schema.name)
            continue
        if schema.params[0][0] == "@ground":
            out.extend(action_id(schema.name, c.split(",")) for _, c in schema.params)
            continue
        choices = [sorts[s] if v is not None else (s,) for v, s in schema.params]
        out.extend(action_id(schema.name, combo) for combo in itertools.product(*choices))
    return out


def _ground_law(
    law: _RawLaw,
    fluents: Mapping[str, FluentDecl],
    schemas: Mapping[str, _ActionSchema],
    sorts: Mapping[str, tuple[str, ...]],
    global_vars: Mapping[str, str],
    actions: set[str],
) -> list[CausalLaw]:
    def fail(message: str, tok: _Tok) -> ParseError:
        return ParseError(message, law.lineno, tok.col)

    if law.kind == INERTIAL:
        out = []
        for tok in law.fluents:
            if tok.text not in fluents:
                raise fail(f"undeclared fluent {tok.text!r}", tok)
            out.append(CausalLaw(INERTIAL, fluent=tok.text))
        return out

    # variable -> sort
    binding: dict[str, str] = {}
    if law.action is not None:
        name = law.action.name
        if name.text not in schemas:
            raise fail(f"undeclared action {name.text!r}", name)
        schema = schemas[name.text]
        params = schema.params
        grounded_schema = bool(params) and params[0][0] == "@ground"
        arity = len(params[0][1].split(",")) if grounded_schema else len(params)
        if len(law.action.args) != arity:
            raise fail(f"action {name.text!r} expects {arity} argument(s)", name)
        for pos, arg in enumerate(law.action.args):
            if grounded_schema:
                objs = {c.split(",")[pos] for _, c in params}
            else:
                var, sort = params[pos]
                objs = set(sorts[sort]) if var is not None else {sort}
            if arg.is_var:
                if grounded_schema:
                    raise fail(f"variable {arg.text!r} in grounded action {name.text!r}", arg.tok)
                binding[arg.text] = params[pos][1]
            elif arg.text not in objs:
                raise fail(f"undeclared object {arg.text!r} for action {name.text!r}", arg.tok)

    atoms = ([law.head] if law.head else []) + law.body
    for atom in atoms:
        if atom.fluent.text not in fluents:
            raise fail(f"undeclared fluent {atom.fluent.text!r}", atom.fluent)
        if atom.value.is_var and atom.value.text not in binding:
            if atom.value.text not in global_vars:
                raise fail(f"unbound variable {atom.value.text!r}", atom.value.tok)
            binding[atom.value.text] = global_vars[atom.value.text]

    variables = sorted(binding)
    out: list[CausalLaw] = []
    for combo in itertools.product(*(sorts[binding[v]] for v in variables)):
        env = dict(zip(variables, combo))

        def ground(atom: _RawAtom) -> FluentAtom:
            value = env[atom.value.text] if atom.value.is_var else atom.value.text
            decl = fluents[atom.fluent.text]
            if value not in decl.domain:
                raise fail(
                    f"undeclared value {value!r} for fluent {decl.name!r}",
                    atom.value.tok,
                )
            return FluentAtom(decl.name, value)

        act = None
        if law.action is not None:
            act = action_id(
                law.action.name.text,
                (env[a.text] if a.is_var else a.text for a in law.action.args),
            )
            if act not in actions:
                raise fail(f"undeclared action {act!r}", law.action.name)
        out.append(
            CausalLaw(
                law.kind,
                head=ground(law.head) if law.head else None,
                action=act,
                body=tuple(ground(a) for a in law.body),
            )
        )
    return out


def format_action_description(d: ActionDescription) -> str:
    """Render a grounded description back to text that re-parses to ``d``."""
    lines = [f"sort {name} = {{{', '.join(objs)}}}" for name, objs in d.sorts]
    for f in d.fluents:
        dom = "bool" if f.domain == BOOL else "{" + ", ".join(f.domain) + "}"
        lines.append(f"fluent {f.name} : {dom}")
    known = {o for _, objs in d.sorts for o in objs}
    for act in d.actions:
        m = re.fullmatch(r"([a-z][A-Za-z0-9_]*)\((.*)\)", act)
        if m and not all(a in known for a in m.group(2).split(",")):
            raise ValueError(f"action {act!r} has arguments outside the declared sorts")
        lines.append(f"action {act}")
    lines.extend(str(law) for law in d.laws)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# validation


def _static_cycles(d: ActionDescription) -> list[str]:
    graph: dict[str, set[str]] = {}
    for law in d.laws_of(STATIC):
        if law.head is None:
            continue
        for a in law.body:
            graph.setdefault(a.fluent, set()).add(law.head.fluent)
    cyclic = []
    state: dict[str, int] = {}

    def visit(node: str, stack: list[str]) -> None:
        state[node] = 1
        for nxt in sorted(graph.get(node, ())):
            if state.get(nxt) == 1:
                cyclic.append(" -> ".join(stack[stack.index(nxt):] + [nxt]) if nxt in stack else nxt)
            elif nxt not in state:
                visit(nxt, stack + [nxt])
        state[node] = 2

    for node in sorted(graph):
        if node not in state:
            visit(node, [node])
    return cyclic


def validate(d: ActionDescription) -> list[str]:
    """Check the structural invariants of ``d``; an empty list means valid."""
    diags: list[str] = []
    names = [f.name for f in d.fluents]
    decls = {f.name: f for f in d.fluents}
    if not names:
        diags.append("no fluents declared")
    for name in sorted({n for n in names if names.count(n) > 1}):
        diags.append(f"duplicate fluent {name!r}")
    for f in d.fluents:
        if not f.domain:
            diags.append(f"fluent {f.name!r} has an empty domain")
        elif len(set(f.domain)) != len(f.domain):
            diags.append(f"fluent {f.name!r} has duplicate domain values")
    actions = set(d.actions)

    def check_atom(atom: FluentAtom, law: CausalLaw) -> None:
        if atom.fluent not in decls:
            diags.append(f"undeclared fluent {atom.fluent!r} in law '{law}'")
        elif atom.value not in decls[atom.fluent].domain:
            diags.append(f"undeclared value {atom.value!r} for {atom.fluent!r} in law '{law}'")

    defaults: dict[tuple[str, tuple[FluentAtom, ...]], CausalLaw] = {}
    for law in d.laws:
        if law.kind not in LAW_KINDS:
            diags.append(f"unknown law kind {law.kind!r} in '{law}'")
            continue
        if law.kind in (DYNAMIC, NONEXECUTABLE):
            if not law.action:
                diags.append(f"{law.kind} law '{law}' names no action")
            elif law.action not in actions:
                diags.append(f"undeclared action {law.action!r} in law '{law}'")
        elif law.action:
            diags.append(f"{law.kind} law '{law}' must not name an action")
        if law.kind == INERTIAL:
            if law.fluent not in decls:
                diags.append(f"inertial law names undeclared fluent {law.fluent!r}")
            continue
        if law.kind == NONEXECUTABLE:
            if law.head is not None:
                diags.append(f"nonexecutable law '{law}' must not have a head")
        elif law.head is None:
            diags.append(f"{law.kind} law '{law}' has no head")
        else:
            check_atom(law.head, law)
        for a in law.body:
            check_atom(a, law)
        if law.kind == DEFAULT and law.head is not None:
            key = (law.head.fluent, tuple(sorted(law.body)))
            if key in defaults and defaults[key].head != law.head:
                diags.append(f"conflicting defaults for {law.head.fluent!r}: '{defaults[key]}' and '{law}'")
            defaults.setdefault(key, law)

    inertial = d.inertial
    unconditional = {law.head.fluent for law in d.laws_of(DEFAULT) if law.head and not law.body}
    for name in names:
        if name not in inertial and name not in unconditional:
            diags.append(f"uncovered fluent {name!r}: neither inertial nor unconditionally defaulted")
    for cycle in _static_cycles(d):
        diags.append(f"static laws are not stratified: {cycle}")
    return diags


# ---------------------------------------------------------------------------
# states


def _close(d: ActionDescription, values: dict[str, str], fixed: dict[str, str], who: str) -> dict[str, str]:
    for _ in range(len(d.fluents) + 1):
        changed = False
        for law in d.laws_of(STATIC):
            if law.head is None or not law.holds(values):
                continue
            f, v = law.head.fluent, law.head.value
            if f in fixed and fixed[f] != v:
                raise InconsistentEffects(who, f"static law '{law}' contradicts {f}={fixed[f]}")
            if values.get(f) != v:
                values[f] = v
                changed = True
            fixed[f] = v
        if not changed:
            return values
    raise InconsistentEffects(who, "static laws do not reach a fixpoint")


class InconsistentEffects(RuntimeError):
    def __init__(self, action: str, detail: str):
        self.action = action
        super().__init__(f"inconsistent effects for {action}: {detail}")


class UncoveredFluent(RuntimeError):
    pass


def _apply_defaults(d: ActionDescription, values: dict[str, str], candidates: Iterable[str]) -> None:
    pending = [f for f in candidates if f not in values]
    progress = True
    while pending and progress:
        progress = False
        for law in d.laws_of(DEFAULT):
            f = law.head.fluent if law.head else None
            if f in pending and all(values.get(a.fluent) == a.value for a in law.body):
                values[f] = law.head.value
                pending.remove(f)
                progress = True
    if pending:
        raise UncoveredFluent(f"no value for fluent(s) {', '.join(pending)}")


def initial_state(d: ActionDescription, partial: Mapping[str, str] | None = None) -> SymbolicState:
    """Complete ``partial`` with defaults, then close it under static laws."""
    values = dict(partial or {})
    for f, v in values.items():
        if f not in d.fluent_names:
            raise KeyError(f"undeclared fluent {f!r}")
        if v not in d.fluent(f).domain:
            raise ValueError(f"undeclared value {v!r} for fluent {f!r}")
    _apply_defaults(d, values, d.fluent_names)
    _close(d, values, dict(partial or {}), "initial state")
    return SymbolicState.from_mapping(d, values)


def is_closed(d: ActionDescription, s: Mapping[str, str]) -> bool:
    return all(law.head is None or not law.holds(s) or s.get(law.head.fluent) == law.head.value
               for law in d.laws_of(STATIC))


def all_states(d: ActionDescription) -> Iterator[SymbolicState]:
    """Every complete, statically closed state (exponential in #fluents)."""
    for combo in itertools.product(*(f.domain for f in d.fluents)):
        s = SymbolicState(zip(d.fluent_names, combo))
        if is_closed(d, s):
            yield s
