"""One-dimensional diffusion models, exit domains and the quasipotential.

A model is the SDE ``dX = b(X) dt + sqrt(eps) sigma(X) dB`` with polynomial
drift ``b`` and diffusion ``sigma``, together with a stable rest point ``x0``.
Polynomials give exact derivatives of any order, which the verification
operators need, and they compile directly into the simulation kernel.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .errors import (DegenerateDiffusion, InvalidDomain, NonStableRestPoint,
                     QuadratureFailure)

__all__ = [
    "ProcessModel", "ExitDomain", "EscapeProblem", "linear_model",
    "double_well_model", "polynomial_model", "linearize", "quasipotential",
    "exit_level", "QUAD_TOL",
]

QUAD_TOL = 1e-10


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return Polynomial(p.coef)
    coef = np.atleast_1d(np.asarray(p, dtype=float))
    return Polynomial(coef)


@dataclass(frozen=True)
class ProcessModel:
    """Polynomial drift and diffusion with a rest point.

    Parameters
    ----------
    drift, diffusion : Polynomial or sequence of float
        Coefficients in increasing powers of ``x``.
    rest_point : float
        Stable zero of the drift.
    name : str
        Label used in reports.
    """

    drift: Polynomial
    diffusion: Polynomial
    rest_point: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "drift", _as_poly(self.drift))
        object.__setattr__(self, "diffusion", _as_poly(self.diffusion))
        object.__setattr__(self, "rest_point", float(self.rest_point))
        scale = max(1.0, float(np.max(np.abs(self.drift.coef))))
        if abs(self.drift(self.rest_point)) > 1e-12 * scale:
            raise NonStableRestPoint(
                f"b(x0) = {self.drift(self.rest_point):.3e} is not zero")
        linearize(self)

    # derivatives are exact for polynomials
    @cached_property
    def drift_prime(self) -> Polynomial:
        return self.drift.deriv()

    @cached_property
    def drift_second(self) -> Polynomial:
        return self.drift.deriv(2)

    @cached_property
    def diffusion_prime(self) -> Polynomial:
        return self.diffusion.deriv()

    @property
    def constant_diffusion(self) -> bool:
        return bool(np.all(self.diffusion.coef[1:] == 0.0))

    @property
    def c(self) -> float:
        return linearize(self)[0]

    @property
    def sbar(self) -> float:
        return linearize(self)[1]

    def b(self, x):
        return self.drift(x)

    def sigma(self, x):
        return self.diffusion(x)

    def qp_density(self, x):
        """Integrand ``-2 b / sigma^2`` of the quasipotential."""
        return -2.0 * self.drift(x) / self.diffusion(x) ** 2

    def d_b_over_s2(self, x):
        """Derivative of ``b / sigma^2``."""
        s = self.diffusion(x)
        return (self.drift_prime(x) * s - 2.0 * self.drift(x) * self.diffusion_prime(x)) / s ** 3

    @cached_property
    def qp_antiderivative(self) -> Polynomial | None:
        """Exact antiderivative of ``-2b/sigma^2`` vanishing at ``x0``, if polynomial."""
        if not self.constant_diffusion:
            return None
        p = (-2.0 / self.diffusion.coef[0] ** 2 * self.drift).integ()
        return p - p(self.rest_point)


def linear_model(c: float = 1.0, sbar: float = 1.0, x0: float = 0.0) -> ProcessModel:
    """Gauss-Markov model ``b(x) = -c (x - x0)``, ``sigma = sbar``."""
    return ProcessModel([c * x0, -c], [sbar], x0, name="linear")


def double_well_model() -> ProcessModel:
    """``V(x) = (x^2 - 1)^2 / 2``, ``b = -V'``, unit diffusion, rest point -1."""
    return ProcessModel([0.0, 2.0, 0.0, -2.0], [1.0], -1.0, name="double-well")


def polynomial_model(drift: Sequence[float], diffusion: Sequence[float],
                     rest_point: float) -> ProcessModel:
    return ProcessModel(drift, diffusion, rest_point, name="polynomial")


def linearize(model: ProcessModel) -> tuple[float, float]:
    """Return ``(c, sbar) = (-b'(x0), sigma(x0))``.

    Raises
    ------
    NonStableRestPoint
        If ``c <= 0``.
    DegenerateDiffusion
        If ``sbar <= 0``.
    """
    x0 = model.rest_point
    c = -float(model.drift.deriv()(x0))
    sbar = float(model.diffusion(x0))
    if not c > 0:
        raise NonStableRestPoint(f"c = {c} <= 0 at x0 = {x0}")
    if not sbar > 0:
        raise DegenerateDiffusion(f"sigma(x0) = {sbar} <= 0")
    return c, sbar


def quasipotential(model: ProcessModel, x, tol: float = QUAD_TOL):
    """Quasipotential ``S(x0, x) = int_{x0}^{x} -2 b / sigma^2 dz``.

    Uses the exact antiderivative when the diffusion is constant and adaptive
    Gauss-Kronrod quadrature otherwise.

    Raises
    ------
    QuadratureFailure
        If the error estimate exceeds ``tol``.
    """
    xs = np.asarray(x, dtype=float)
    anti = model.qp_antiderivative
    if anti is not None:
        return anti(xs) if xs.ndim else float(anti(xs))
    out = np.empty(xs.shape)
    for idx, xi in np.ndenumerate(xs):
        out[idx] = _quad(model.qp_density, model.rest_point, float(xi), tol)
    return out if xs.ndim else float(out)


def _quad(f, a, b, tol):
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=60)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    if not err <= tol:
        raise QuadratureFailure(f"error estimate {err:.2e} > {tol:.0e} on [{a}, {b}]")
    return val


@dataclass(frozen=True)
class ExitDomain:
    """Interval ``(lower, upper)``; one-sided domains have ``lower = -inf``."""

    kind: Literal["two-sided", "one-sided"]
    lower: float
    upper: float

    @classmethod
    def two_sided(cls, lower: float, upper: float) -> "ExitDomain":
        return cls("two-sided", float(lower), float(upper))

    @classmethod
    def one_sided(cls, upper: float) -> "ExitDomain":
        return cls("one-sided", -np.inf, float(upper))

    @classmethod
    def symmetric(cls, half_width: float, center: float = 0.0) -> "ExitDomain":
        return cls.two_sided(center - half_width, center + half_width)

    @property
    def two(self) -> bool:
        return self.kind == "two-sided"

    def validate(self, model: ProcessModel, n: int = 200) -> None:
        """Check ``A1 < x0 < A2`` and the inward-pointing drift on a grid.

        For one-sided domains the left sign condition is checked on a window of
        the same width as the right half.
        """
        x0 = model.rest_point
        if self.kind not in ("two-sided", "one-sided"):
            raise InvalidDomain(f"unknown kind {self.kind!r}")
        if not self.lower < x0 < self.upper:
            raise InvalidDomain(f"rest point {x0} not inside ({self.lower}, {self.upper})")
        left = self.lower if self.two else x0 - (self.upper - x0)
        xr = np.linspace(x0, self.upper, n + 1)[1:]
        xl = np.linspace(left, x0, n + 1)[:-1]
        if np.any(model.b(xr) >= 0) or np.any(model.b(xl) <= 0):
            raise InvalidDomain("drift does not point towards the rest point on the domain")
        s = model.sigma(np.linspace(left, self.upper, 2 * n))
        if np.any(s <= 0):
            raise DegenerateDiffusion("sigma must be positive on the domain")


def exit_level(model: ProcessModel, domain: ExitDomain,
               rule: Literal["min", "max"] = "min") -> float:
    """Exit level ``L`` (half the endpoint quasipotential).

    The default ``"min"`` keeps ``2L - S <= 0`` on both endpoints so that the
    quasipotential subsolution satisfies its boundary condition on every exit.
    For symmetric domains both rules coincide.
    """
    if not domain.two:
        return 0.5 * quasipotential(model, domain.upper)
    s1 = quasipotential(model, domain.lower)
    s2 = quasipotential(model, domain.upper)
    if rule == "min":
        return 0.5 * min(s1, s2)
    if rule == "max":
        return 0.5 * max(s1, s2)
    raise ValueError(f"unknown rule {rule!r}")


@dataclass(frozen=True)
class EscapeProblem:
    """A model, its exit domain and the exit level ``L``."""

    model: ProcessModel
    domain: ExitDomain
    level_rule: Literal["min", "max"] = "min"
    L: float = field(init=False)

    def __post_init__(self):
        self.domain.validate(self.model)
        object.__setattr__(self, "L", float(exit_level(self.model, self.domain, self.level_rule)))

    @property
    def c(self) -> float:
        return self.model.c

    @property
    def sbar(self) -> float:
        return self.model.sbar

    @property
    def x0(self) -> float:
        return self.model.rest_point

    @property
    def is_linear(self) -> bool:
        m = self.model
        return m.drift.degree() <= 1 and m.constant_diffusion
