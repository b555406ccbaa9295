"""Experiment specifications in INI form.

A spec names a model, an exit domain, a scheme rule, an ``eps x T`` grid and
run settings::

    [model]
    kind = linear          ; linear | double-well | polynomial
    c = 1
    sbar = 1

    [domain]
    kind = symmetric       ; symmetric | two-sided | one-sided
    half_width = 1

    [scheme]
    kind = mollified-linear
    xhat = 1
    M = 4

    [grid]
    eps = 0.2, 0.13
    T = 2.5, 5

    [run]
    n = 100000
    dt = 1e-3
    seed = 0

An optional ``[analysis]`` section sets ``eta``, ``nt``, ``nx`` and ``slack``
for the ``verify`` command.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, RareExitError
from .model import (EscapeProblem, ExitDomain, double_well_model, linear_model,
                    polynomial_model)
from .sampler import SchemeRule
from .subsolution import SCHEME_KINDS
from .verify import AnalysisParams

__all__ = ["ExperimentSpec", "load_spec", "parse_spec"]

_KNOWN = {
    "model": {"kind", "c", "sbar", "x0", "drift", "diffusion", "rest_point"},
    "domain": {"kind", "lower", "upper", "half_width", "center", "level_rule"},
    "scheme": {"kind", "xhat", "xhat_power", "m", "kappa", "delta_factor"},
    "grid": {"eps", "t"},
    "run": {"n", "dt", "seed", "out", "name"},
    "analysis": {"eta", "nt", "nx", "slack"},
}


@dataclass
class ExperimentSpec:
    problem: EscapeProblem
    rule: SchemeRule
    eps: list[float]
    T: list[float]
    n: int = 100_000
    dt: float = 1e-3
    seed: int = 0
    out: str | None = None
    name: str = "experiment"
    analysis: AnalysisParams = AnalysisParams()
    raw: dict[str, dict[str, str]] = field(default_factory=dict)


def _get(cp, sec, key, conv, default=None, required=False):
    path = f"{sec}.{key}"
    if not cp.has_option(sec, key):
        if required:
            raise ConfigError(path, "missing")
        return default
    text = cp.get(sec, key).strip()
    try:
        return conv(text)
    except ValueError as exc:
        raise ConfigError(path, f"cannot parse {text!r} ({exc})") from None


def _floats(text: str) -> list[float]:
    vals = [float(v) for v in text.replace(",", " ").split()]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("non-finite entry")
    return vals


def _int(text: str) -> int:
    return int(float(text)) if "e" in text.lower() else int(text, 0)


def _model(cp):
    kind = _get(cp, "model", "kind", str, required=True)
    if kind == "linear":
        return linear_model(_get(cp, "model", "c", float, 1.0),
                            _get(cp, "model", "sbar", float, 1.0),
                            _get(cp, "model", "x0", float, 0.0))
    if kind == "double-well":
        return double_well_model()
    if kind == "polynomial":
        return polynomial_model(_get(cp, "model", "drift", _floats, required=True),
                                _get(cp, "model", "diffusion", _floats, required=True),
                                _get(cp, "model", "rest_point", float, 0.0))
    raise ConfigError("model.kind", f"unknown model {kind!r}")


def _domain(cp):
    kind = _get(cp, "domain", "kind", str, required=True)
    if kind == "symmetric":
        return ExitDomain.symmetric(_get(cp, "domain", "half_width", float, required=True),
                                    _get(cp, "domain", "center", float, 0.0))
    if kind == "two-sided":
        return ExitDomain.two_sided(_get(cp, "domain", "lower", float, required=True),
                                    _get(cp, "domain", "upper", float, required=True))
    if kind == "one-sided":
        return ExitDomain.one_sided(_get(cp, "domain", "upper", float, required=True))
    raise ConfigError("domain.kind", f"unknown domain {kind!r}")


def parse_spec(text: str) -> ExperimentSpec:
    """Parse and validate a spec; every error names its ``section.key``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from None
    for sec in cp.sections():
        if sec not in _KNOWN:
            raise ConfigError(sec, "unknown section")
        for key in cp.options(sec):
            if key not in _KNOWN[sec]:
                raise ConfigError(f"{sec}.{key}", "unknown key")
    for sec in ("model", "domain", "scheme", "grid"):
        if not cp.has_section(sec):
            raise ConfigError(sec, "missing section")

    try:
        model = _model(cp)
        domain = _domain(cp)
    except ConfigError:
        raise
    except (RareExitError, ValueError) as exc:
        raise ConfigError("model", str(exc)) from None
    rule_name = _get(cp, "domain", "level_rule", str, "min")
    try:
        problem = EscapeProblem(model, domain, rule_name)
    except (RareExitError, ValueError) as exc:
        raise ConfigError("domain", str(exc)) from None

    kind = _get(cp, "scheme", "kind", str, required=True)
    if kind not in SCHEME_KINDS:
        raise ConfigError("scheme.kind", f"unknown scheme {kind!r}")
    M = _get(cp, "scheme", "m", float)
    lam = _get(cp, "scheme", "xhat_power", float, 0.0)
    kappa = _get(cp, "scheme", "kappa", float, 0.4)
    if M is None and lam != 0.0 and not lam < kappa:
        raise ConfigError("scheme.xhat_power", "must be below kappa when both scale with eps")
    if M is not None and not M > 0:
        raise ConfigError("scheme.M", "must be positive")
    rule = SchemeRule(kind, _get(cp, "scheme", "xhat", float, 1.0), lam, M, kappa,
                      _get(cp, "scheme", "delta_factor", float, 2.0))

    eps = _get(cp, "grid", "eps", _floats, required=True)
    T = _get(cp, "grid", "t", _floats, required=True)
    if not eps:
        raise ConfigError("grid.eps", "empty list")
    if not T:
        raise ConfigError("grid.T", "empty list")
    if min(eps) <= 0:
        raise ConfigError("grid.eps", "entries must be positive")
    if min(T) <= 0:
        raise ConfigError("grid.T", "entries must be positive")

    n = _get(cp, "run", "n", _int, 100_000)
    dt = _get(cp, "run", "dt", float, 1e-3)
    seed = _get(cp, "run", "seed", _int, 0)
    if n < 1:
        raise ConfigError("run.n", "must be positive")
    if not 0 < dt <= min(T):
        raise ConfigError("run.dt", "need 0 < dt <= min(T)")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("run.seed", "must fit in 64 unsigned bits")

    d = AnalysisParams()
    analysis = AnalysisParams(_get(cp, "analysis", "eta", float, d.eta),
                              _get(cp, "analysis", "nt", _int, d.nt),
                              _get(cp, "analysis", "nx", _int, d.nx),
                              _get(cp, "analysis", "slack", float, d.slack))
    if not 0 <= analysis.eta <= 0.25:
        raise ConfigError("analysis.eta", "must lie in [0, 1/4]")
    raw = {s: dict(cp.items(s)) for s in cp.sections()}
    return ExperimentSpec(problem, rule, eps, T, n, dt, seed, _get(cp, "run", "out", str),
                          _get(cp, "run", "name", str, "experiment"), analysis, raw)


def load_spec(path: str | Path) -> ExperimentSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), exc.strerror or str(exc)) from None
    return parse_spec(text)
