"""TOML run configurations.

Exact fields (roots, leading coefficient, pair scales, domain ends) accept integers or
``"p/q"`` strings so that they never pass through floating point. Example::

    seed = 42

    [model]
    parity = "even"          # or "odd" (then nu is required)
    roots = ["1"]
    xi = [1.0]
    eps = [-1]
    leading = "1"
    # nu = 1.0
    # domain = ["0", "1"]
    # multiple = { a = "2", eps = 1, mu = [1.0, 0.5] }
    # pairs = [ { scale = "1", mu_plus = [1.0], mu_minus = [0.0] } ]

    [suites]                 # all default to true
    drift = true

    [tolerances]
    conservation = 1e-9

    [integrate]
    T = 100.0
    tol = 1e-10
    start = [0.5, 0.0, 0.3, 0.7]

    [output]
    dir = "out"
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .errors import ConfigError, DegenerateSpec, DuplicateRoot
from .model import ModelSpec, make_model
from .symfun import as_fraction

__all__ = ["RunConfig", "DEFAULT_TOLERANCES", "SUITES", "load_config", "parse_config"]

SUITES = ("ode", "defining", "brackets", "algebraic", "drift")

DEFAULT_TOLERANCES = {
    "ode": 1e-9,
    "defining": 1e-6,
    "conservation": 1e-9,
    "algebraic": 1e-9,
    "drift": 1e-6,
}

_TOP = {"seed", "model", "suites", "tolerances", "integrate", "output"}
_MODEL = {"parity", "roots", "xi", "eps", "leading", "nu", "domain", "multiple", "pairs"}


@dataclass
class RunConfig:
    parity: str
    roots: list
    xi: list
    eps: list
    leading: Fraction = Fraction(1)
    nu: float | None = None
    domain: tuple | None = None
    multiple: tuple | None = None
    pairs: list = field(default_factory=list)
    suites: dict = field(default_factory=lambda: {s: True for s in SUITES})
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 42
    T: float = 10.0
    integrate_tol: float = 1e-10
    start: tuple | None = None
    out_dir: str | None = None
    source: str = "<string>"

    def build_model(self) -> ModelSpec:
        return make_model(self.parity, self.roots, self.xi, eps=self.eps, leading=self.leading,
                          nu=self.nu, multiple=self.multiple, pairs=self.pairs, domain=self.domain)

    def as_dict(self) -> dict:
        s = lambda v: str(v) if isinstance(v, Fraction) else v
        return {
            "parity": self.parity,
            "roots": [s(r) for r in self.roots],
            "xi": list(self.xi),
            "eps": list(self.eps),
            "leading": s(self.leading),
            "nu": self.nu,
            "domain": None if self.domain is None else [s(d) for d in self.domain],
            "multiple": None if self.multiple is None else
            [s(self.multiple[0]), self.multiple[1], list(self.multiple[2])],
            "pairs": [[s(p[0]), list(p[1]), list(p[2])] for p in self.pairs],
            "suites": dict(self.suites),
            "tolerances": dict(self.tolerances),
            "seed": self.seed,
            "T": self.T,
            "integrate_tol": self.integrate_tol,
            "start": None if self.start is None else list(self.start),
        }


class _Locator:
    """Maps ``section.key`` to a line number of the raw text for diagnostics."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.lines = {}
        section = ""
        for no, line in enumerate(text.splitlines(), 1):
            m = re.match(r"\s*\[+\s*([A-Za-z0-9_.]+)\s*\]+", line)
            if m:
                section = m.group(1)
                continue
            m = re.match(r"\s*([A-Za-z0-9_]+)\s*=", line)
            if m:
                key = f"{section}.{m.group(1)}" if section else m.group(1)
                self.lines.setdefault(key, no)

    def __call__(self, dotted: str) -> str:
        base = dotted.split("[")[0]
        no = self.lines.get(base)
        while no is None and "." in base:
            base = base.rsplit(".", 1)[0]
            no = self.lines.get(base)
        where = f"{self.source}:{no}" if no else self.source
        return f"{where} [{dotted}]"


def _rational(v, loc, where):
    if isinstance(v, float):
        raise ConfigError(f"exact field must be an integer or a 'p/q' string, got float {v!r}", loc(where))
    try:
        return as_fraction(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot read {v!r} as a rational ({exc})", loc(where)) from None


def _real(v, loc, where):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ConfigError(f"expected a number, got {v!r}", loc(where))
    try:
        return float(as_fraction(v)) if isinstance(v, str) else float(v)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"expected a number, got {v!r}", loc(where)) from None


def _list(v, loc, where):
    if not isinstance(v, list):
        raise ConfigError(f"expected a list, got {type(v).__name__}", loc(where))
    return v


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    loc = _Locator(text, source)
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}", source) from None
    unknown = set(raw) - _TOP
    if unknown:
        k = sorted(unknown)[0]
        raise ConfigError(f"unknown top-level key {k!r}", loc(k))
    m = raw.get("model")
    if not isinstance(m, dict):
        raise ConfigError("missing [model] table", source)
    unknown = set(m) - _MODEL
    if unknown:
        k = sorted(unknown)[0]
        raise ConfigError(f"unknown key {k!r}", loc(f"model.{k}"))
    parity = m.get("parity", "even")
    if parity not in ("even", "odd"):
        raise ConfigError(f"parity must be 'even' or 'odd', got {parity!r}", loc("model.parity"))
    roots = [_rational(r, loc, f"model.roots[{i}]") for i, r in enumerate(_list(m.get("roots", []), loc, "model.roots"))]
    seen = {}
    for i, r in enumerate(roots):
        if r in seen:
            raise ConfigError(f"duplicate root {r} (also at index {seen[r]})", loc(f"model.roots[{i}]"))
        seen[r] = i
    xi = [_real(x, loc, f"model.xi[{i}]") for i, x in enumerate(_list(m.get("xi", []), loc, "model.xi"))]
    if len(xi) != len(roots):
        raise ConfigError(f"{len(roots)} roots but {len(xi)} amplitudes", loc("model.xi"))
    eps_raw = m.get("eps", [1] * len(roots))
    eps = list(_list(eps_raw, loc, "model.eps"))
    if len(eps) != len(roots) or any(e not in (1, -1) for e in eps):
        raise ConfigError("eps must list one +1/-1 per root", loc("model.eps"))
    leading = _rational(m.get("leading", 1), loc, "model.leading")
    if leading == 0:
        raise ConfigError("leading coefficient must be nonzero", loc("model.leading"))
    nu = m.get("nu")
    if parity == "odd":
        if nu is None:
            raise ConfigError("odd parity needs nu", loc("model.parity"))
        nu = _real(nu, loc, "model.nu")
    elif nu is not None:
        raise ConfigError("nu is only meaningful for odd parity", loc("model.nu"))
    domain = m.get("domain")
    if domain is not None:
        d = _list(domain, loc, "model.domain")
        if len(d) != 2:
            raise ConfigError("domain must be [lo, hi]", loc("model.domain"))
        domain = tuple(float("inf") if v == "inf" else _rational(v, loc, "model.domain") for v in d)
    multiple = m.get("multiple")
    if multiple is not None:
        if not isinstance(multiple, dict) or set(multiple) - {"a", "eps", "mu"} or "a" not in multiple:
            raise ConfigError("multiple must be {a, eps, mu}", loc("model.multiple"))
        if any(multiple["a"] == r for r in roots):
            raise ConfigError("multiple zero coincides with a simple root", loc("model.multiple"))
        mu = [_real(x, loc, "model.multiple.mu") for x in _list(multiple.get("mu", []), loc, "model.multiple")]
        multiple = (_rational(multiple["a"], loc, "model.multiple"), int(multiple.get("eps", 1)), tuple(mu))
    pairs = []
    for i, p in enumerate(_list(m.get("pairs", []), loc, "model.pairs")):
        if not isinstance(p, dict) or set(p) - {"scale", "mu_plus", "mu_minus"}:
            raise ConfigError("pair must be {scale, mu_plus, mu_minus}", loc(f"model.pairs[{i}]"))
        pairs.append((
            _rational(p.get("scale", 1), loc, f"model.pairs[{i}].scale"),
            tuple(_real(x, loc, f"model.pairs[{i}]") for x in p.get("mu_plus", [])),
            tuple(_real(x, loc, f"model.pairs[{i}]") for x in p.get("mu_minus", [])),
        ))
    suites = {s: True for s in SUITES}
    for k, v in raw.get("suites", {}).items():
        if k not in suites or not isinstance(v, bool):
            raise ConfigError(f"unknown suite or non-boolean flag {k!r}", loc(f"suites.{k}"))
        suites[k] = v
    tols = dict(DEFAULT_TOLERANCES)
    for k, v in raw.get("tolerances", {}).items():
        if k not in tols:
            raise ConfigError(f"unknown tolerance {k!r}", loc(f"tolerances.{k}"))
        tols[k] = _real(v, loc, f"tolerances.{k}")
        if tols[k] <= 0:
            raise ConfigError("tolerances must be positive", loc(f"tolerances.{k}"))
    seed = raw.get("seed", 42)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer", loc("seed"))
    integ = raw.get("integrate", {})
    T = _real(integ.get("T", 10.0), loc, "integrate.T")
    itol = _real(integ.get("tol", 1e-10), loc, "integrate.tol")
    start = integ.get("start")
    if start is not None:
        start = tuple(_real(v, loc, "integrate.start") for v in _list(start, loc, "integrate.start"))
        if len(start) != 4:
            raise ConfigError("start must be [a, y, p_a, p_y]", loc("integrate.start"))
    out_dir = raw.get("output", {}).get("dir")
    cfg = RunConfig(parity, roots, xi, eps, leading, nu, domain, multiple, pairs, suites, tols,
                    seed, T, itol, start, out_dir, source)
    try:
        cfg.build_model()
    except DuplicateRoot as exc:
        raise ConfigError(str(exc), loc("model.roots")) from None
    except DegenerateSpec as exc:
        raise ConfigError(f"DegenerateSpec: {exc}", loc("model.xi")) from None
    except ValueError as exc:
        raise ConfigError(str(exc), loc("model")) from None
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from None
    return parse_config(text, str(path))
