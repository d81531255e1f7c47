"""Object model for the subset of the SX hybrid-automaton format used here.

All types are frozen dataclasses holding tuples, so they compare structurally
and can be shared freely.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from . import expr as ex
from .errors import NonAffineError, UnboundSymbolError
from .expr import Expression, Num, format_real

VARIABLE = "variable"
CONSTANT = "constant"


@dataclass(frozen=True)
class ParamDecl:
    name: str
    kind: str = VARIABLE
    controlled: bool = True
    local: bool = False

    def __post_init__(self):
        if self.kind not in (VARIABLE, CONSTANT):
            raise ValueError(f"param kind must be {VARIABLE!r} or {CONSTANT!r}, got {self.kind!r}")

    @property
    def dynamics(self) -> str:
        return "any" if self.kind == VARIABLE else "const"

    @classmethod
    def variable(cls, name, controlled=True, local=False):
        return cls(name, VARIABLE, controlled, local)

    @classmethod
    def constant(cls, name, local=False):
        return cls(name, CONSTANT, False, local)


@dataclass(frozen=True)
class Literal:
    """Numeric bind actual. The decimal text is authoritative; ``value`` derives from it."""

    text: str

    def __post_init__(self):
        if not ex.SIGNED_NUMBER_RE.match(self.text):
            raise ValueError(f"not a decimal literal: {self.text!r}")

    @property
    def value(self) -> float:
        return float(self.text)

    @classmethod
    def of(cls, value: float) -> "Literal":
        return cls(format_real(value))


Actual = Union[str, Literal]


@dataclass(frozen=True)
class Location:
    id: int
    name: str
    flow: tuple[tuple[str, Expression], ...] = ()
    invariant: Optional[Expression] = None

    @property
    def flow_map(self) -> dict[str, Expression]:
        return dict(self.flow)


@dataclass(frozen=True)
class BaseComponent:
    id: str
    params: tuple[ParamDecl, ...] = ()
    locations: tuple[Location, ...] = ()
    transitions: tuple = ()

    def param(self, name: str) -> Optional[ParamDecl]:
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Bind:
    component: str
    alias: str
    map: tuple[tuple[str, Actual], ...] = ()


@dataclass(frozen=True)
class NetworkComponent:
    id: str
    params: tuple[ParamDecl, ...] = ()
    binds: tuple[Bind, ...] = ()


@dataclass(frozen=True)
class Issue:
    severity: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "warning"]

    def __add__(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.issues + other.issues)


@dataclass(frozen=True)
class Model:
    components: tuple[BaseComponent, ...] = ()
    network: Optional[NetworkComponent] = None
    # Diagnostics from parsing; not part of the model's identity.
    diagnostics: ValidationReport = field(default=ValidationReport(), compare=False, repr=False)

    def component(self, cid: str) -> Optional[BaseComponent]:
        for c in self.components:
            if c.id == cid:
                return c
        return None


class _Issues:
    def __init__(self):
        self.items: list[Issue] = []

    def error(self, path, message):
        self.items.append(Issue("error", path, message))

    def warning(self, path, message):
        self.items.append(Issue("warning", path, message))

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.items))


def _check_params(params: Sequence[ParamDecl], path: str, out: _Issues) -> None:
    for name, n in Counter(p.name for p in params).items():
        if n > 1:
            out.error(f"{path}/param[{name}]", f"duplicate param name {name!r}")
    for p in params:
        if not ex.IDENT_RE.match(p.name):
            out.error(f"{path}/param[{p.name}]", f"invalid identifier {p.name!r}")


def validate_component(c: BaseComponent) -> ValidationReport:
    out = _Issues()
    path = c.id
    if not ex.IDENT_RE.match(c.id):
        out.error(path, f"invalid component id {c.id!r}")
    _check_params(c.params, path, out)
    declared = {p.name: p for p in c.params}
    controlled = [p.name for p in c.params if p.kind == VARIABLE and p.controlled]

    if not c.locations:
        out.error(path, "component has no location")
    if c.transitions:
        out.error(path, f"{len(c.transitions)} transition(s) present; transitions are not supported")
    for lid, n in Counter(loc.id for loc in c.locations).items():
        if n > 1:
            out.error(f"{path}/location[{lid}]", f"duplicate location id {lid}")

    used: set[str] = set()
    for loc in c.locations:
        lpath = f"{path}/{loc.name}"
        if not isinstance(loc.id, int) or loc.id < 1:
            out.error(lpath, f"location id must be a positive integer, got {loc.id!r}")
        if loc.invariant is not None:
            out.error(f"{lpath}/invariant", "invariants are not supported")
        seen = Counter(var for var, _ in loc.flow)
        for var, n in seen.items():
            if n > 1:
                out.error(f"{lpath}/flow/{var}", f"{n} flow equations for {var!r}")
        for var, rhs in loc.flow:
            p = declared.get(var)
            if p is None:
                out.error(f"{lpath}/flow/{var}", f"flow for undeclared name {var!r}")
            elif p.kind != VARIABLE or not p.controlled:
                out.error(f"{lpath}/flow/{var}", f"flow for uncontrolled param {var!r}")
            for name in ex.refs(rhs):
                used.add(name)
                if name not in declared:
                    out.error(f"{lpath}/flow/{var}", f"reference to undeclared param {name!r}")
        for var in controlled:
            if var not in seen:
                out.error(f"{lpath}/flow", f"controlled variable {var!r} has no flow equation")
        used.update(seen)

    for p in c.params:
        if p.name not in used and p.kind == CONSTANT:
            out.warning(f"{path}/param[{p.name}]", f"constant {p.name!r} is never used")
    return out.report()


def validate_network(n: NetworkComponent, components: Sequence[BaseComponent]) -> ValidationReport:
    out = _Issues()
    path = n.id
    if not ex.IDENT_RE.match(n.id):
        out.error(path, f"invalid component id {n.id!r}")
    _check_params(n.params, path, out)
    declared = {p.name for p in n.params}
    by_id = {c.id: c for c in components}

    for alias, k in Counter(b.alias for b in n.binds).items():
        if k > 1:
            out.error(f"{path}/bind[{alias}]", f"duplicate bind alias {alias!r}")
    used: set[str] = set()
    for b in n.binds:
        bpath = f"{path}/bind[{b.alias}]"
        if not ex.IDENT_RE.match(b.alias):
            out.error(bpath, f"invalid alias {b.alias!r}")
        target = by_id.get(b.component)
        if target is None:
            out.error(bpath, f"bind target {b.component!r} is not a known base component")
            continue
        formals = {p.name: p for p in target.params}
        nonlocal_formals = [p.name for p in target.params if not p.local]
        keys = Counter(k for k, _ in b.map)
        for key, k in keys.items():
            if k > 1:
                out.error(f"{bpath}/map[{key}]", f"formal {key!r} mapped {k} times")
        for key, actual in b.map:
            mpath = f"{bpath}/map[{key}]"
            formal = formals.get(key)
            if formal is None:
                out.error(mpath, f"unknown formal {key!r} of component {b.component!r}")
                continue
            if formal.local:
                out.error(mpath, f"formal {key!r} is local to {b.component!r}")
            if isinstance(actual, Literal):
                if formal.kind != CONSTANT:
                    out.error(mpath, f"literal {actual.text} bound to variable {key!r}")
            else:
                used.add(actual)
                if actual not in declared:
                    out.error(mpath, f"actual {actual!r} is not declared in network {n.id!r}")
        for name in nonlocal_formals:
            if name not in keys:
                out.error(bpath, f"non-local formal {name!r} is not mapped")
    for p in n.params:
        if p.name not in used:
            out.warning(f"{path}/param[{p.name}]", f"network param {p.name!r} is never bound")
    return out.report()


def validate_model(m: Model) -> ValidationReport:
    out = _Issues()
    for cid, k in Counter(c.id for c in m.components).items():
        if k > 1:
            out.error(cid, f"duplicate component id {cid!r}")
    if m.network is None:
        out.warning("", "no network component")
    elif m.network.id in {c.id for c in m.components}:
        out.error(m.network.id, f"network id {m.network.id!r} clashes with a base component")
    report = out.report()
    for c in m.components:
        report = report + validate_component(c)
    if m.network is not None:
        report = report + validate_network(m.network, m.components)
    return report


# -- affine normal form ------------------------------------------------------

@dataclass(frozen=True)
class AffineForm:
    """``c0 + coeffs . s`` over an ordered list of state variables."""

    c0: float
    coeffs: tuple[float, ...]

    def evaluate(self, state: Sequence[float]) -> float:
        return self.c0 + sum(a * s for a, s in zip(self.coeffs, state))


def affine_normal_form(e: Expression, constants: Mapping[str, float],
                       statevars: Sequence[str]) -> AffineForm:
    """Collapse ``e`` to constant plus linear part in ``statevars``.

    Raises NonAffineError when two state-dependent factors are multiplied,
    UnboundSymbolError for a name that is neither constant nor state.
    """
    index = {v: i for i, v in enumerate(statevars)}
    n = len(statevars)

    # (c0, coeffs, depends_on_state); the flag is syntactic so x*(y - y) is still rejected
    def walk(node):
        if isinstance(node, Num):
            return node.value, [0.0] * n, False
        if isinstance(node, ex.Ref):
            if node.name in index:
                coeffs = [0.0] * n
                coeffs[index[node.name]] = 1.0
                return 0.0, coeffs, True
            if node.name in constants:
                return float(constants[node.name]), [0.0] * n, False
            raise UnboundSymbolError(f"unbound symbol {node.name!r}")
        if isinstance(node, ex.Neg):
            c, a, dep = walk(node.operand)
            return -c, [-v for v in a], dep
        lc, la, ldep = walk(node.left)
        rc, ra, rdep = walk(node.right)
        if node.op == "+":
            return lc + rc, [u + v for u, v in zip(la, ra)], ldep or rdep
        if node.op == "-":
            return lc - rc, [u - v for u, v in zip(la, ra)], ldep or rdep
        if ldep and rdep:
            raise NonAffineError(f"product of state-dependent terms: {ex.render(node)}")
        if ldep:
            return lc * rc, [v * rc for v in la], True
        return lc * rc, [lc * v for v in ra], rdep

    c0, coeffs, _ = walk(e)
    return AffineForm(c0, tuple(coeffs))


def render_flow(loc: Location) -> str:
    return " & ".join(f"{var}' == {ex.render(rhs)}" for var, rhs in loc.flow)
