"""SX XML serialization, SpaceEx cfg emission, and GEN vertex-file parsing."""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

from . import expr as ex
from .errors import (
    ExpressionSyntaxError,
    GenParseError,
    InvalidModelError,
    MalformedXmlError,
    UnsupportedSchemaError,
)
from .expr import format_real
from .ha_model import (
    CONSTANT,
    VARIABLE,
    BaseComponent,
    Bind,
    Issue,
    Literal,
    Location,
    Model,
    NetworkComponent,
    ParamDecl,
    ValidationReport,
    render_flow,
    validate_model,
)
from .sine_builder import CLOCK_ALIAS, NETWORK_ID, SINE_ALIAS, StateBox

SX_NAMESPACE = "http://www-verimag.imag.fr/xml-namespaces/sspaceex"
SX_VERSION = "0.2"

SCENARIOS = ("stc", "lgg", "supp")
OUTPUT_FORMATS = ("GEN", "TXT", "INTV")

# cfg key spellings, in emission order
CFG_KEYS = (
    ("system", "system"),
    ("initially", "initially"),
    ("scenario", "scenario"),
    ("flowpipe_tolerance", "flowpipe-tolerance"),
    ("time_horizon", "time-horizon"),
    ("iter_max", "iter-max"),
    ("output_variables", "output-variables"),
    ("output_format", "output-format"),
)


def _attr(value: str) -> str:
    return '"' + escape(value, {'"': "&quot;"}) + '"'


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


def _param_xml(p: ParamDecl) -> str:
    return (
        f"<param name={_attr(p.name)} type=\"real\" local=\"{_bool(p.local)}\" "
        f"d1=\"1\" d2=\"1\" dynamics=\"{p.dynamics}\" controlled=\"{_bool(p.controlled)}\" />"
    )


def emit_sx(m: Model) -> str:
    """Serialize ``m`` as an SX document. Equal models give byte-identical text."""
    report = validate_model(m)
    if not report.ok:
        detail = "; ".join(str(i) for i in report.errors)
        raise InvalidModelError(f"model does not validate: {detail}", report)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<sspaceex xmlns="{SX_NAMESPACE}" version="{SX_VERSION}" math="SpaceEx">',
    ]
    for c in m.components:
        lines.append(f"  <component id={_attr(c.id)}>")
        lines.extend("    " + _param_xml(p) for p in c.params)
        for loc in c.locations:
            head = f"    <location id=\"{loc.id}\" name={_attr(loc.name)}"
            if loc.flow:
                lines.append(head + ">")
                lines.append(f"      <flow>{escape(render_flow(loc))}</flow>")
                lines.append("    </location>")
            else:
                lines.append(head + " />")
        lines.append("  </component>")
    if m.network is not None:
        n = m.network
        lines.append(f"  <component id={_attr(n.id)}>")
        lines.extend("    " + _param_xml(p) for p in n.params)
        for b in n.binds:
            lines.append(f"    <bind component={_attr(b.component)} as={_attr(b.alias)}>")
            for key, actual in b.map:
                text = actual.text if isinstance(actual, Literal) else actual
                lines.append(f"      <map key={_attr(key)}>{escape(text)}</map>")
            lines.append("    </bind>")
        lines.append("  </component>")
    lines.append("</sspaceex>")
    return "\n".join(lines) + "\n"


# -- parsing -----------------------------------------------------------------

_FLOW_EQ = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*'\s*==\s*(.*\S)\s*\Z", re.S)
_IGNORED_LAYOUT = {"x", "y", "width", "height"}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


class _Collector:
    def __init__(self):
        self.issues: list[Issue] = []

    def warn(self, path, message):
        self.issues.append(Issue("warning", path, message))

    def error(self, path, message):
        self.issues.append(Issue("error", path, message))


def _parse_bool(text: Optional[str], default: bool, path: str, log: _Collector) -> bool:
    if text is None:
        return default
    t = text.strip().lower()
    if t in ("true", "1"):
        return True
    if t in ("false", "0"):
        return False
    log.error(path, f"not a boolean: {text!r}")
    return default


def _parse_param(el: ET.Element, path: str, log: _Collector) -> ParamDecl:
    name = el.get("name", "")
    ppath = f"{path}/param[{name}]"
    if el.get("type", "real") != "real":
        log.warn(ppath, f"param type {el.get('type')!r} treated as real")
    if el.get("d1", "1") != "1" or el.get("d2", "1") != "1":
        log.warn(ppath, "non-scalar dimensions ignored")
    dynamics = el.get("dynamics", "any")
    if dynamics not in ("any", "const"):
        log.error(ppath, f"unknown dynamics {dynamics!r}")
    kind = CONSTANT if dynamics == "const" else VARIABLE
    local = _parse_bool(el.get("local"), False, ppath, log)
    controlled = _parse_bool(el.get("controlled"), kind == VARIABLE, ppath, log)
    return ParamDecl(name, kind, controlled, local)


def _parse_flow(text: str, path: str, log: _Collector) -> tuple:
    eqs = []
    for chunk in text.split("&"):
        if not chunk.strip():
            continue
        m = _FLOW_EQ.match(chunk)
        if m is None:
            log.error(path, f"not a flow equation: {chunk.strip()!r}")
            continue
        try:
            eqs.append((m.group(1), ex.parse(m.group(2))))
        except ExpressionSyntaxError as err:
            log.error(f"{path}/{m.group(1)}", f"unsupported expression dropped: {err}")
    return tuple(eqs)


def _parse_location(el: ET.Element, path: str, log: _Collector) -> Location:
    name = el.get("name", "")
    lpath = f"{path}/{name or el.get('id', '?')}"
    try:
        lid = int(el.get("id", ""))
    except ValueError:
        log.error(lpath, f"location id {el.get('id')!r} is not an integer")
        lid = 0
    if _IGNORED_LAYOUT & set(el.attrib):
        log.warn(lpath, "layout attributes dropped")
    flow = ()
    for child in el:
        tag = _local(child.tag)
        if tag == "flow":
            flow += _parse_flow(child.text or "", f"{lpath}/flow", log)
        else:
            log.warn(f"{lpath}/{tag}", f"unsupported element <{tag}> dropped")
    return Location(lid, name, flow)


def _parse_bind(el: ET.Element, path: str, log: _Collector) -> Bind:
    alias = el.get("as", "")
    bpath = f"{path}/bind[{alias}]"
    if _IGNORED_LAYOUT & set(el.attrib):
        log.warn(bpath, "layout attributes dropped")
    entries = []
    for child in el:
        tag = _local(child.tag)
        if tag != "map":
            log.warn(f"{bpath}/{tag}", f"unsupported element <{tag}> dropped")
            continue
        text = (child.text or "").strip()
        actual = Literal(text) if ex.SIGNED_NUMBER_RE.match(text) else text
        entries.append((child.get("key", ""), actual))
    return Bind(el.get("component", ""), alias, tuple(entries))


def parse_sx(doc: str) -> Model:
    """Parse an SX document; unsupported content is dropped and reported in ``diagnostics``."""
    try:
        root = ET.fromstring(doc.encode("utf-8") if isinstance(doc, str) else doc)
    except ET.ParseError as err:
        raise MalformedXmlError(f"malformed XML: {err}") from None
    if _local(root.tag) != "sspaceex":
        raise UnsupportedSchemaError(f"root element is <{_local(root.tag)}>, expected <sspaceex>")
    log = _Collector()
    if root.tag.startswith("{") and not root.tag.startswith("{" + SX_NAMESPACE + "}"):
        log.warn("", f"unexpected namespace in {root.tag!r}")

    elements = [el for el in root if _local(el.tag) == "component"]
    for el in root:
        if _local(el.tag) != "component":
            log.warn(_local(el.tag), f"unsupported element <{_local(el.tag)}> dropped")

    def is_network(i, el):
        tags = {_local(c.tag) for c in el}
        if "bind" in tags:
            return True
        return "location" not in tags and i == len(elements) - 1

    bases, networks = [], []
    for i, el in enumerate(elements):
        cid = el.get("id", "")
        params, locations, binds = [], [], []
        for child in el:
            tag = _local(child.tag)
            if tag == "param":
                params.append(_parse_param(child, cid, log))
            elif tag == "location":
                locations.append(_parse_location(child, cid, log))
            elif tag == "bind":
                binds.append(_parse_bind(child, cid, log))
            else:
                log.warn(f"{cid}/{tag}", f"unsupported element <{tag}> dropped")
        if is_network(i, el):
            if locations:
                log.warn(cid, "locations in a network component dropped")
            networks.append(NetworkComponent(cid, tuple(params), tuple(binds)))
        else:
            bases.append(BaseComponent(cid, tuple(params), tuple(locations)))

    network = None
    if networks:
        network = networks[-1]
        for extra in networks[:-1]:
            log.warn(extra.id, "nested network component dropped")
    else:
        log.warn("", "no network component")
    return Model(tuple(bases), network, ValidationReport(tuple(log.issues)))


# -- analysis configuration --------------------------------------------------

@dataclass(frozen=True)
class AnalysisConfig:
    initially: str
    system: str = NETWORK_ID
    scenario: str = "stc"
    flowpipe_tolerance: float = 0.01
    time_horizon: float = 10.0
    iter_max: int = -1
    output_variables: tuple[str, ...] = ("t_gl", "y")
    output_format: str = "GEN"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output format must be one of {OUTPUT_FORMATS}")
        if not self.flowpipe_tolerance > 0:
            raise ValueError("flowpipe tolerance must be > 0")
        if not self.time_horizon > 0:
            raise ValueError("time horizon must be > 0")
        if not self.output_variables:
            raise ValueError("at least one output variable is required")
        if '"' in self.initially:
            raise ValueError("initially predicate may not contain double quotes")


def emit_cfg(c: AnalysisConfig) -> str:
    values = {
        "system": c.system,
        "initially": f'"{c.initially}"',
        "scenario": c.scenario,
        "flowpipe_tolerance": format_real(c.flowpipe_tolerance),
        "time_horizon": format_real(c.time_horizon),
        "iter_max": str(int(c.iter_max)),
        "output_variables": ", ".join(c.output_variables),
        "output_format": c.output_format,
    }
    return "".join(f"{key} = {values[attr]}\n" for attr, key in CFG_KEYS)


def qualified_name(m: Model, alias: str, var: str) -> str:
    """Name of ``var`` of bound instance ``alias`` as seen from the network.

    Local formals are prefixed with the alias; non-local ones resolve to the
    network identifier they are bound to.
    """
    if m.network is None:
        raise ValueError("model has no network component")
    for b in m.network.binds:
        if b.alias != alias:
            continue
        comp = m.component(b.component)
        decl = comp.param(var) if comp is not None else None
        if decl is None:
            raise KeyError(f"{alias!r} has no param {var!r}")
        if decl.local:
            return f"{alias}.{var}"
        actual = dict(b.map).get(var)
        if not isinstance(actual, str):
            raise ValueError(f"{alias}.{var} is not bound to a network variable")
        return actual
    raise KeyError(f"no bind with alias {alias!r}")


def _interval_terms(name: str, lo: float, hi: float) -> list[str]:
    if lo == hi:
        return [f"{name}=={format_real(lo)}"]
    return [f"{name}>={format_real(lo)}", f"{name}<={format_real(hi)}"]


def initially_predicate(m: Model, box: StateBox, sine_alias: str = SINE_ALIAS,
                        clock_alias: Optional[str] = CLOCK_ALIAS) -> str:
    """Conjunction fixing the sine state to ``box`` and the global clock to 0."""
    terms = []
    for var, (lo, hi) in zip("xyt", (box.x, box.y, box.t)):
        terms += _interval_terms(qualified_name(m, sine_alias, var), lo, hi)
    if clock_alias is not None:
        terms += _interval_terms(qualified_name(m, clock_alias, "t_gl"), 0.0, 0.0)
    return " & ".join(terms)


# -- GEN polygons ------------------------------------------------------------

@dataclass(frozen=True)
class Polygon:
    vertices: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("polygon needs at least one vertex")
        for v in self.vertices:
            if len(v) != 2 or not all(math.isfinite(c) for c in v):
                raise ValueError(f"bad vertex {v!r}")

    def __len__(self) -> int:
        return len(self.vertices)


def parse_gen(doc: str) -> list[Polygon]:
    polygons: list[Polygon] = []
    current: list[tuple[float, float]] = []
    for lineno, line in enumerate(doc.splitlines(), start=1):
        fields = line.split()
        if not fields:
            if current:
                polygons.append(Polygon(tuple(current)))
                current = []
            continue
        if len(fields) != 2:
            raise GenParseError(lineno, f"expected two numbers, got {len(fields)} field(s)")
        try:
            point = (float(fields[0]), float(fields[1]))
        except ValueError:
            raise GenParseError(lineno, f"not numeric: {line.strip()!r}") from None
        if not all(math.isfinite(c) for c in point):
            raise GenParseError(lineno, f"non-finite coordinate: {line.strip()!r}")
        current.append(point)
    if current:
        polygons.append(Polygon(tuple(current)))
    return polygons


def emit_gen(polygons: Iterable[Polygon | Sequence]) -> str:
    """One ``x y`` line per vertex, a blank line between polygons."""
    blocks = []
    for poly in polygons:
        verts = poly.vertices if isinstance(poly, Polygon) else poly
        blocks.append("".join(f"{repr(float(a))} {repr(float(b))}\n" for a, b in verts))
    return "\n".join(blocks)
