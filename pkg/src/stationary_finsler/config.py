"""Run configuration files (INI syntax).

A metric is either a zoo entry::

    [metric]
    zoo = kerr_perturbation
    [params]
    a = 0.3

or assembled from sections ``[lambda]``, ``[B]``, ``[F]`` and ``[cone]``,
each giving an expression (``expr``; ``f2`` for the square of ``F``) or a
zoo reference (``zoo``, with parameters from ``[params]``)::

    [metric]
    n = 2
    [lambda]
    expr = 1 + 0.1*x1^2
    [B]
    expr = 0.5*y1
    [F]
    f2 = y1^2 + y2^2
    [cone]
    kind = FullSlit

Expressions use ``x1..xn`` (base point) and ``y1..yn`` (velocity).  A
``[run]`` section holds ``seed``, ``tol``, ``out`` and ``threads``; each
command reads its own section.  Unknown sections or keys are errors,
reported with line and column.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from . import expr as _expr
from .errors import ConfigError, ExpressionError, FinslerError, UnknownZooEntry
from .lagrangian import FiberLagrangian, ScalarField, make_stationary_splitting
from .types import ConeKind, ConeSpec
from .zoo import ZOO, load_zoo

METRIC_SECTIONS = {
    "metric": {"zoo", "n", "name"},
    "lambda": {"expr", "zoo"},
    "B": {"expr", "zoo", "linear"},
    "F": {"expr", "f2", "zoo"},
    "cone": {"kind", "guard_eps"},
    "run": {"seed", "tol", "out", "threads"},
}


@dataclass
class RunConfig:
    sections: dict = field(default_factory=dict)  # name -> {key: raw string}
    positions: dict = field(default_factory=dict)  # (section, key) -> (line, column)
    source: str = "<config>"

    def has_metric(self):
        return any(s in self.sections for s in ("metric", "lambda", "B", "F"))

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def error(self, section, key, message):
        line, col = self.positions.get((section, key), (None, None))
        return ConfigError(f"[{section}] {key}: {message}", line, col)

    def number(self, section, key, default=None, kind=float):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            val = kind(float(raw)) if kind is int else kind(raw)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {raw!r}") from None
        if kind is int and float(raw) != val:
            raise self.error(section, key, f"expected an integer, got {raw!r}")
        return val

    def vector(self, section, key, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return [_scalar(c) for c in raw.split(",")]
        except (ValueError, ExpressionError) as exc:
            raise self.error(section, key, f"bad vector {raw!r}: {exc}") from None

    def vectors(self, section, key, default=None):
        """Several vectors separated by ``;``."""
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return [[_scalar(c) for c in part.split(",")] for part in raw.split(";") if part.strip()]
        except (ValueError, ExpressionError) as exc:
            raise self.error(section, key, f"bad vector list {raw!r}: {exc}") from None

    def flag(self, section, key, default=False):
        raw = self.get(section, key)
        if raw is None:
            return default
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise self.error(section, key, f"expected a boolean, got {raw!r}")


def _scalar(text):
    """A number or a constant expression such as ``pi/2``."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return float(_expr.evaluate(_expr.parse(text, []), {}))


def _positions(text):
    """Line and column of every ``key = value`` line, keyed by (section, key)."""
    pos, section = {}, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            pos[(section, None)] = (lineno, line.index("[") + 1)
            continue
        for sep in ("=", ":"):
            if sep in line:
                key = line.split(sep, 1)[0].strip()
                col = line.index(key) + 1 if key else 1
                pos[(section, key)] = (lineno, col)
                vstart = line.index(sep) + 1
                while vstart < len(line) and line[vstart] == " ":
                    vstart += 1
                pos[(section, key, "value")] = (lineno, vstart + 1)
                break
    return pos


def parse_config(text, command_sections=None, source="<config>"):
    """Parse config text.  ``command_sections`` maps section name -> allowed keys."""
    allowed = dict(METRIC_SECTIONS)
    allowed.update(command_sections or {})
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno, 1) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any section", exc.lineno, 1) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", lineno, 1) from None
    pos = _positions(text)
    sections = {}
    for name in cp.sections():
        if name != "params" and name not in allowed:
            line, col = pos.get((name, None), (None, None))
            raise ConfigError(f"unknown section [{name}]", line, col)
        keys = dict(cp[name])
        if name != "params":
            for k in keys:
                if k not in allowed[name]:
                    line, col = pos.get((name, k), (None, None))
                    raise ConfigError(f"unknown key {k!r} in [{name}]", line, col)
        sections[name] = keys
    return RunConfig(sections, pos, source)


def load_config(path, command_sections=None):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), command_sections, str(path))


# metric construction -------------------------------------------------------------------

def _zoo_params(cfg):
    return dict(cfg.sections.get("params", {}))


def _load_entry(cfg, section, name):
    try:
        return load_zoo(name, _zoo_params(cfg))
    except UnknownZooEntry:
        raise cfg.error(section, "zoo", f"unknown zoo entry {name!r}") from None
    except FinslerError as exc:
        raise cfg.error("params", next(iter(_zoo_params(cfg)), "zoo"), str(exc)) from None


def _compile(cfg, section, key, compiler, n):
    text = cfg.get(section, key)
    try:
        return compiler(text, n)
    except ExpressionError as exc:
        line, col = cfg.positions.get((section, key, "value"), (None, None))
        if col is not None and exc.column is not None:
            col += exc.column - 1
        raise ConfigError(f"[{section}] {key}: {exc}", line, col) from None


def build_metric(cfg):
    """Build the SpacetimeLagrangian described by ``cfg``."""
    zoo = cfg.get("metric", "zoo")
    parts = [s for s in ("lambda", "B", "F") if s in cfg.sections]
    if zoo is not None and not parts:
        if "cone" in cfg.sections:
            raise cfg.error("cone", "kind", "a zoo metric carries its own cone")
        return _load_entry(cfg, "metric", zoo)
    if zoo is None and not parts:
        raise ConfigError("no metric given: add [metric] zoo = NAME or [lambda]/[B]/[F] sections", 1, 1)
    missing = [s for s in ("lambda", "B", "F") if s not in cfg.sections]
    if missing:
        raise ConfigError(f"missing section(s) {', '.join('[' + m + ']' for m in missing)}", None, None)
    if "params" in cfg.sections and not any(cfg.get(s, "zoo") for s in ("lambda", "B", "F")) and zoo is None:
        line, col = cfg.positions.get(("params", None), (None, None))
        raise ConfigError("[params] is only used with zoo references", line, col)

    refs = {}
    for s in ("lambda", "B", "F"):
        name = cfg.get(s, "zoo")
        if name is not None:
            refs[s] = _load_entry(cfg, s, name)
    n = cfg.number("metric", "n", kind=int)
    if n is None:
        if refs:
            n = next(iter(refs.values())).n
        else:
            raise ConfigError("[metric] n is required for expression metrics", None, None)
    for s, L in refs.items():
        if L.n != n:
            raise cfg.error(s, "zoo", f"entry has dimension {L.n}, expected {n}")
        if not L.is_splitting:
            raise cfg.error(s, "zoo", "entry is not a stationary splitting")

    def pick(section, attr, key, compiler, wrap):
        if section in refs:
            return getattr(refs[section], attr)
        if cfg.get(section, key) is None:
            return None
        return wrap(_compile(cfg, section, key, compiler, n))

    lam = pick("lambda", "lam", "expr", _expr.compile_base,
               lambda fn: ScalarField(fn, cfg.get("lambda", "expr")))
    if lam is None:
        raise cfg.error("lambda", "expr", "missing")
    linear = cfg.flag("B", "linear", False)
    b = pick("B", "b", "expr", _expr.compile_fiber,
             lambda fn: FiberLagrangian(fn, 1, name=cfg.get("B", "expr"), linear=linear))
    if b is None:
        raise cfg.error("B", "expr", "missing")
    if "F" in refs:
        f2 = refs["F"].f2
    elif cfg.get("F", "f2") is not None:
        f2 = FiberLagrangian(_compile(cfg, "F", "f2", _expr.compile_fiber, n), 2,
                             name=cfg.get("F", "f2"))
    elif cfg.get("F", "expr") is not None:
        f1 = _compile(cfg, "F", "expr", _expr.compile_fiber, n)

        def f2_fn(x, v, f1=f1):
            f = f1(x, v)
            return f * f

        f2 = FiberLagrangian(f2_fn, 2, name=f"({cfg.get('F', 'expr')})^2")
    else:
        raise cfg.error("F", "expr", "give expr (F) or f2 (F squared)")

    cone = _cone(cfg, refs)
    sign = -1 if cone.kind is ConeKind.LOWER_HALF else 1
    base = next(iter(refs.values()), None)
    return make_stationary_splitting(
        lam, b, f2, cone, n, y_field_sign=sign,
        name=cfg.get("metric", "name", "config"),
        chart=base.chart if base is not None else None,
        sample_box=base.sample_box if base is not None else ((-1.0, 1.0),) * n,
        plane_guard=base.plane_guard if base is not None else 0.0,
        kind="config",
    )


def _cone(cfg, refs):
    raw = cfg.get("cone", "kind")
    if raw is None:
        if refs:
            return next(iter(refs.values())).cone
        raise ConfigError("missing [cone] kind", None, None)
    try:
        kind = ConeKind(raw.strip())
    except ValueError:
        raise cfg.error("cone", "kind", f"expected one of {[k.value for k in ConeKind]}") from None
    eps = cfg.number("cone", "guard_eps", 1e-9)
    if not (eps > 0 and math.isfinite(eps)):
        raise cfg.error("cone", "guard_eps", "must be positive")
    return ConeSpec(kind, eps)


__all__ = ["RunConfig", "parse_config", "load_config", "build_metric", "ZOO"]
