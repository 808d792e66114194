"""INI run configuration: parsing, validation, normalization and problem assembly.

Example::

    [phi]
    name = model-gamma
    gamma = 2
    dimension = 3

    [reaction]
    f = s/4
    F = s^2/8
    A_infinity = 1/8
    ell = 2

    [source]
    h = 0.1

    [mesh]
    nx = 32
    ny = 32

    [solver]
    tol = 1e-6
    seed = 0

``[phi]`` takes either ``name`` plus that entry's parameters or ``expr``, a
formula in ``t``.  Reaction expressions use ``x``, ``y`` and ``s``; ``h`` and
the spatially varying constants use ``x`` and ``y``.
"""
import configparser
import re
from dataclasses import dataclass, field

import numpy as np

from .expr import ExpressionError, compile_expression
from .mesh import make_rect_mesh
from .nfunction import BUILTINS, build_nfunction, builtin, from_expression
from .solver import ProblemSpec, Reaction, SolverOptions


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _expr(variables):
    def parse(text):
        compile_expression(text, variables)
        return text.strip()
    parse.variables = variables
    return parse


def _positive(kind):
    def parse(text):
        v = kind(text)
        if v <= 0:
            raise ValueError("must be positive")
        return v
    return parse


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError("expected an integer")
    return int(v)


def _float(text):
    return float(text)


_XY = _expr(("x", "y"))
_XYS = _expr(("x", "y", "s"))

_PHI_PARAMS = {"c": _float, "p": _float, "gamma": _float}

SCHEMA = {
    "phi": {"name": _choice(*sorted(BUILTINS)), "expr": _expr(("t",)), "dimension": _positive(_int),
            "t_max": _positive(_float), **_PHI_PARAMS},
    "probe": {"t_min": _positive(_float), "t_max": _positive(_float), "n": _positive(_int)},
    "reaction": {"f": _XYS, "F": _XYS, "A": _float, "B": _XY, "a": _float, "b": _XY,
                 "A_infinity": _XY, "ell": _float, "critical": _choice("sobolev", "power"),
                 "gamma": _float, "audit_samples": _int},
    "source": {"h": _XY},
    "mesh": {"nx": _positive(_int), "ny": _positive(_int), "width": _positive(_float),
             "height": _positive(_float)},
    "solver": {"tol": _positive(_float), "max_iter": _positive(_int), "method": _choice("lbfgs", "descent"),
               "memory": _positive(_int), "energy_floor": _float, "regularization": _float,
               "initial": _choice("zero", "random"), "seed": _int,
               "coercivity_samples": _int, "coercivity_steps": _positive(_int)},
    "output": {"dir": str},
}

BUILTIN_PARAMS = {"linear": ("c",), "power": ("p",), "model-gamma": ("gamma",), "log-power": ("p",)}


@dataclass
class RunConfig:
    sections: dict = field(default_factory=dict)

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    @property
    def seed(self):
        return self.get("solver", "seed", 0)

    @property
    def dimension(self):
        return self.get("phi", "dimension")

    def replace(self, section, **values):
        sections = {k: dict(v) for k, v in self.sections.items()}
        sections.setdefault(section, {}).update({k: v for k, v in values.items() if v is not None})
        return RunConfig(sections)

    # assembly

    def phi_spec(self):
        phi = self.sections.get("phi")
        if not phi:
            raise ConfigError("missing [phi] section")
        if "expr" in phi:
            return from_expression(phi["expr"], t_max=phi.get("t_max", 1e6))
        params = {k: phi[k] for k in BUILTIN_PARAMS[phi["name"]] if k in phi}
        return builtin(phi["name"], **params)

    def nfunction(self):
        probe = self.sections.get("probe")
        return build_nfunction(self.phi_spec(), probe=dict(probe) if probe else None)

    def mesh(self):
        m = self.sections.get("mesh", {})
        return make_rect_mesh(m.get("nx", 16), m.get("ny", 16), m.get("width", 1.0), m.get("height", 1.0))

    def reaction(self):
        r = self.sections.get("reaction")
        if not r or "f" not in r:
            return Reaction.zero()
        f = _xys_callable(r["f"])
        return Reaction(
            f=f,
            F=_xys_callable(r["F"]) if "F" in r else None,
            A=r.get("A"),
            B=_xy_callable(r.get("B", "0")),
            a=r.get("a"),
            b=_xy_callable(r.get("b", "0")),
            A_infinity=_xy_callable(r["A_infinity"]) if "A_infinity" in r else None,
            ell=r.get("ell"),
        )

    def options(self):
        s = self.sections.get("solver", {})
        keys = SolverOptions.__dataclass_fields__
        return SolverOptions(**{k: v for k, v in s.items() if k in keys})

    def problem(self, nfunction=None):
        return ProblemSpec(
            nfunction=nfunction or self.nfunction(),
            mesh=self.mesh(),
            reaction=self.reaction(),
            h=_xy_callable(self.get("source", "h", "0")),
            options=self.options(),
        )


def _xy_callable(text):
    e = compile_expression(text, ("x", "y"))
    return lambda x, y: np.asarray(e(x=np.asarray(x, dtype=float), y=np.asarray(y, dtype=float)), dtype=float)


def _xys_callable(text):
    e = compile_expression(text, ("x", "y", "s"))
    return lambda x, y, s: np.asarray(e(x=np.asarray(x, dtype=float), y=np.asarray(y, dtype=float),
                                        s=np.asarray(s, dtype=float)), dtype=float)


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:\s;#][^=:]*?)\s*[=:]")


def _line_index(text):
    """(section, key) -> first line number, for error messages."""
    where = {}
    section = None
    for n, line in enumerate(text.splitlines(), 1):
        if line.lstrip().startswith(("#", ";")):
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), n)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            where.setdefault((section, m.group(1)), n)
    return where


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # f and F are different keys
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any section", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", lineno) from None
    lines = _line_index(text)
    sections = {}
    for name in parser.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]", lines.get((name, None)))
        out = {}
        for key, raw in parser.items(name):
            line = lines.get((name, key))
            if key not in SCHEMA[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]", line)
            try:
                out[key] = SCHEMA[name][key](raw.strip())
            except (ValueError, ExpressionError) as exc:
                raise ConfigError(f"[{name}] {key}: {exc}", line) from None
        sections[name] = out
    _validate(sections, lines)
    return RunConfig(sections)


def _validate(sections, lines):
    phi = sections.get("phi")
    if phi is None:
        return
    where = lines.get(("phi", None))
    if ("name" in phi) == ("expr" in phi):
        raise ConfigError("[phi] needs exactly one of 'name' or 'expr'", where)
    if "name" in phi:
        allowed = set(BUILTIN_PARAMS[phi["name"]])
        for key in _PHI_PARAMS:
            if key in phi and key not in allowed:
                raise ConfigError(f"{phi['name']!r} takes no parameter {key!r}", lines.get(("phi", key)))
    else:
        for key in _PHI_PARAMS:
            if key in phi:
                raise ConfigError(f"parameter {key!r} only applies to built-in phi", lines.get(("phi", key)))


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def _format(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config):
    """Canonical text: sections in schema order, keys in schema order."""
    chunks = []
    for name, keys in SCHEMA.items():
        values = config.sections.get(name)
        if values is None:
            continue
        body = [f"{k} = {_format(values[k])}" for k in keys if k in values]
        chunks.append("\n".join([f"[{name}]", *body]))
    return "\n\n".join(chunks) + "\n"
