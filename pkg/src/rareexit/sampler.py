"""Importance-sampling estimator of finite-time exit probabilities.

Trajectories follow the Euler-Maruyama discretisation of the controlled SDE

    dX = (b(X) + sigma(X) u(t, X)) dt + sqrt(eps) sigma(X) dB

and carry the log likelihood ratio of the original measure. Each trajectory
draws its normals from a counter-based stream keyed by ``(seed, cell,
trajectory, step)``, and moments are reduced over fixed-size chunks in a fixed
order, so reports are bit-identical for any number of workers.
"""
from __future__ import annotations

import csv
import io
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy import integrate

from . import _kernel as kn
from .errors import NonFiniteState, RareExitError
from .model import EscapeProblem
from .subsolution import SCHEME_KINDS, SchemeParams, Subsolution

__all__ = [
    "SchemeRule", "SimConfig", "TrajectoryOutcome", "EstimatorReport",
    "simulate_trajectory", "estimate", "experiment_grid", "GridResult", "CHUNK",
]

CHUNK = 4096
_KIND_CODE = {"none": kn.K_NONE, "quasipotential": kn.K_QP, "eps-zero-hjb": kn.K_HJB0,
              "mollified-linear": kn.K_MLIN, "mollified-nonlinear": kn.K_MNL}


@dataclass(frozen=True)
class SchemeRule:
    """How scheme parameters follow ``(eps, T)`` across a table.

    ``xhat = xhat0 * eps**xhat_power``; ``M`` is fixed when given and follows
    the kappa rule otherwise; ``delta = delta_factor * eps``.
    """

    kind: str = "mollified-linear"
    xhat0: float = 1.0
    xhat_power: float = 0.0
    M: float | None = None
    kappa: float = 0.4
    delta_factor: float = 2.0

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")

    def params(self, problem: EscapeProblem, eps: float, T: float) -> SchemeParams:
        xhat = self.xhat0 * eps ** self.xhat_power
        return SchemeParams.build(problem, eps, T, xhat=xhat, M=self.M, kappa=self.kappa,
                                  delta=self.delta_factor * eps,
                                  lqr=self.kind.startswith("mollified"))


@dataclass(frozen=True)
class SimConfig:
    """One estimation cell."""

    params: SchemeParams
    kind: str
    n: int = 100_000
    dt: float = 1e-3
    seed: int = 0
    cell: int = 0
    x_start: float | None = None

    def __post_init__(self):
        if not self.dt > 0 or self.dt > self.params.T:
            raise ValueError("need 0 < dt <= T")
        if self.n < 1:
            raise ValueError("need n >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class TrajectoryOutcome:
    exited: bool
    exit_time: float | None
    exit_side: Literal["left", "right"] | None
    log_lr: float


@dataclass
class EstimatorReport:
    """Moments of the estimator ``1{exit} exp(log_lr)``.

    ``rel_error`` is the per-sample relative error and is ``nan`` when no
    trajectory exits (``zero_hits`` is then set). ``second_moment_se`` is the
    standard error of ``second_moment`` and is not written to CSV.
    """

    n: int
    estimate: float
    second_moment: float
    rel_error: float
    std_error: float
    hits: int
    zero_hits: bool
    max_log_lr: float
    epsilon: float = math.nan
    T: float = math.nan
    scheme: str = ""
    wall_time_s: float = 0.0
    second_moment_se: float = math.nan

    CSV_FIELDS = ("epsilon", "T", "scheme", "N", "estimate", "second_moment",
                  "rel_error", "std_error", "hits", "wall_time_s")

    def csv_row(self) -> list[str]:
        return [repr(self.epsilon), repr(self.T), self.scheme, str(self.n),
                repr(self.estimate), repr(self.second_moment), repr(self.rel_error),
                repr(self.std_error), str(self.hits), f"{self.wall_time_s:.3f}"]


# --- compilation of a scheme for the kernel ------------------------------------

@dataclass
class _Compiled:
    fp: np.ndarray
    ip: np.ndarray
    drift: np.ndarray
    diff: np.ndarray
    ta: np.ndarray
    tb: np.ndarray
    qp_coef: np.ndarray
    qp_val: np.ndarray
    qp_der: np.ndarray
    dt: float
    nsteps: int


def _qp_table(problem: EscapeProblem, n: int = 4096):
    m = problem.model
    lo, hi = Subsolution(problem, SchemeParams(1.0, 1.0), "none").grid_bounds()
    pad = 0.25 * (hi - lo)
    xs = np.linspace(lo - pad, hi + pad, n + 1)
    vals = np.empty_like(xs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        vals[0] = integrate.quad(m.qp_density, m.rest_point, xs[0], epsabs=1e-12)[0]
        for i in range(n):
            vals[i + 1] = vals[i] + integrate.quad(m.qp_density, xs[i], xs[i + 1],
                                                   epsabs=1e-14)[0]
    return xs[0], xs[1] - xs[0], vals, m.qp_density(xs)


def _compile(sub: Subsolution, dt: float, x_start: float | None) -> _Compiled:
    pr, p = sub.problem, sub.params
    m = pr.model
    nsteps = max(1, int(round(p.T / dt)))
    dt = p.T / nsteps
    tk = np.arange(nsteps) * dt
    fp = np.zeros(kn.N_FP)
    ip = np.zeros(kn.N_IP, dtype=np.int64)
    k1 = pr.c / pr.sbar ** 2
    fp[kn.F_EPS], fp[kn.F_DT], fp[kn.F_X0] = p.eps, dt, pr.x0
    fp[kn.F_XSTART] = pr.x0 if x_start is None else x_start
    fp[kn.F_LOWER], fp[kn.F_UPPER] = pr.domain.lower, pr.domain.upper
    fp[kn.F_L2], fp[kn.F_K1] = 2.0 * pr.L, k1
    fp[kn.F_DELTA], fp[kn.F_XHAT] = p.delta, p.xhat
    fp[kn.F_F1HAT] = 2.0 * pr.L - k1 * p.xhat ** 2
    fp[kn.F_APLUS] = pr.domain.upper - pr.x0
    fp[kn.F_AMINUS] = pr.x0 - pr.domain.lower
    ip[kn.I_KIND] = _KIND_CODE[sub.kind]
    ip[kn.I_TWO] = int(pr.domain.two)
    ip[kn.I_NSTEPS] = nsteps
    ta = tb = np.zeros(1)
    if sub.kind == "eps-zero-hjb":
        ta = np.exp(pr.c * (tk - p.T))
    elif sub.kind.startswith("mollified"):
        if p.T > p.tstar:
            ip[kn.I_NMOLL] = min(nsteps, int(math.floor((p.T - p.tstar) / dt + 1e-9)) + 1)
        e1 = np.exp(p.c * (tk - p.T))
        K = 2.0 * p.c / p.M + p.sbar ** 2
        tb = np.sqrt(p.c / (K - p.sbar ** 2 * e1 * e1))
        ta = tb * e1
    qp_coef, qp_val, qp_der = np.zeros(1), np.zeros(1), np.zeros(1)
    if sub.kind == "mollified-nonlinear" and ip[kn.I_NMOLL] > 0:
        anti = m.qp_antiderivative
        if anti is not None:
            qp_coef = np.asarray(anti.coef, dtype=float)
        else:
            ip[kn.I_QPMODE] = 1
            fp[kn.F_QPX0], fp[kn.F_QPH], qp_val, qp_der = _qp_table(pr)
    return _Compiled(fp, ip, np.asarray(m.drift.coef, float), np.asarray(m.diffusion.coef, float),
                     np.ascontiguousarray(ta), np.ascontiguousarray(tb),
                     qp_coef, qp_val, qp_der, dt, nsteps)


def _run(comp: _Compiled, seed: int, cell: int, n: int, workers: int):
    status = np.empty(n, dtype=np.int8)
    exit_step = np.empty(n, dtype=np.int64)
    side = np.empty(n, dtype=np.int8)
    log_lr = np.empty(n)
    seed = np.uint64(seed)
    cell = np.uint64(cell)

    def block(start):
        stop = min(n, start + CHUNK)
        kn.simulate(seed, cell, start, stop - start, comp.fp, comp.ip, comp.drift, comp.diff,
                    comp.ta, comp.tb, comp.qp_coef, comp.qp_val, comp.qp_der,
                    status[start:stop], exit_step[start:stop], side[start:stop],
                    log_lr[start:stop])

    starts = range(0, n, CHUNK)
    if workers <= 1:
        for s in starts:
            block(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(block, starts))
    return status, exit_step, side, log_lr


def simulate_trajectory(scheme: Subsolution, traj: int = 0, *, dt: float = 1e-3,
                        seed: int = 0, cell: int = 0,
                        x_start: float | None = None) -> TrajectoryOutcome:
    """Simulate trajectory number ``traj`` of the stream ``(seed, cell)``."""
    comp = _compile(scheme, dt, x_start)
    status = np.empty(1, dtype=np.int8)
    exit_step = np.empty(1, dtype=np.int64)
    side = np.empty(1, dtype=np.int8)
    log_lr = np.empty(1)
    kn.simulate(np.uint64(seed), np.uint64(cell), traj, 1, comp.fp, comp.ip, comp.drift,
                comp.diff, comp.ta, comp.tb, comp.qp_coef, comp.qp_val, comp.qp_der,
                status, exit_step, side, log_lr)
    if status[0] == kn.ST_NONFINITE:
        raise NonFiniteState(f"trajectory {traj} diverged at step {exit_step[0]}")
    exited = bool(status[0] == kn.ST_EXIT)
    return TrajectoryOutcome(
        exited, exit_step[0] * comp.dt if exited else None,
        ("right" if side[0] > 0 else "left") if exited else None, float(log_lr[0]))


def estimate(problem: EscapeProblem, config: SimConfig, workers: int = 1) -> EstimatorReport:
    """Estimate the probability of leaving the domain before ``T``.

    Raises
    ------
    NonFiniteState
        If any trajectory produced a non-finite state or likelihood ratio.
    """
    t0 = time.perf_counter()
    sub = Subsolution(problem, config.params, config.kind)
    comp = _compile(sub, config.dt, config.x_start)
    status, _, _, log_lr = _run(comp, config.seed, config.cell, config.n, workers)
    bad = int(np.count_nonzero(status == kn.ST_NONFINITE))
    if bad:
        raise NonFiniteState(f"{bad} of {config.n} trajectories became non-finite; reduce dt")
    hit = status == kn.ST_EXIT
    hits = int(np.count_nonzero(hit))
    n = config.n
    p = config.params
    if hits == 0:
        return EstimatorReport(n, 0.0, 0.0, math.nan, 0.0, 0, True, -math.inf, p.eps, p.T,
                               config.kind, time.perf_counter() - t0)
    shift = float(np.max(log_lr[hit]))
    s1, s2 = kn.partial_sums(status, log_lr, shift, CHUNK)
    m1 = kn.tree_sum(s1) / n
    m2 = kn.tree_sum(s2) / n
    rel = math.sqrt(max(m2 - m1 * m1, 0.0)) / m1
    est = math.exp(shift) * m1
    second = math.exp(2.0 * shift) * m2
    m4 = float(np.sum(np.exp(4.0 * (log_lr[hit] - shift)))) / n
    q_se = math.exp(2.0 * shift) * math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    return EstimatorReport(n, est, second, rel, rel * est / math.sqrt(n), hits, False, shift,
                           p.eps, p.T, config.kind, time.perf_counter() - t0, q_se)


@dataclass
class GridResult:
    """Reports of an ``eps x T`` table; failed cells hold the error message."""

    eps: list[float]
    T: list[float]
    scheme: str
    reports: dict[tuple[int, int], EstimatorReport] = field(default_factory=dict)
    errors: dict[tuple[int, int], str] = field(default_factory=dict)

    def table(self, attr: str) -> np.ndarray:
        out = np.full((len(self.eps), len(self.T)), np.nan)
        for (i, j), r in self.reports.items():
            out[i, j] = getattr(r, attr)
        return out

    def table_csv(self, attr: str) -> str:
        """``eps`` rows by ``T`` columns at full precision; empty cells for failures."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon"] + [repr(float(t)) for t in self.T])
        for i, e in enumerate(self.eps):
            row = [repr(float(e))]
            for j in range(len(self.T)):
                r = self.reports.get((i, j))
                row.append("" if r is None else repr(float(getattr(r, attr))))
            w.writerow(row)
        return buf.getvalue()

    def cells_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EstimatorReport.CSV_FIELDS)
        for key in sorted(self.reports):
            w.writerow(self.reports[key].csv_row())
        return buf.getvalue()

    @staticmethod
    def parse_table_csv(text: str) -> tuple[list[float], list[float], np.ndarray]:
        rows = list(csv.reader(io.StringIO(text)))
        T = [float(v) for v in rows[0][1:]]
        eps = [float(r[0]) for r in rows[1:]]
        vals = np.array([[float(v) if v else np.nan for v in r[1:]] for r in rows[1:]])
        return eps, T, vals


def experiment_grid(problem: EscapeProblem, eps_list: Sequence[float], T_list: Sequence[float],
                    rule: SchemeRule, n: int, seed: int = 0, *, dt: float = 1e-3,
                    workers: int = 1, cells: Iterable[tuple[int, int]] | None = None) -> GridResult:
    """Run every ``(eps, T)`` cell; cell ``(i, j)`` uses stream index ``i * len(T) + j``.

    A failing cell is recorded in :attr:`GridResult.errors` and the grid continues.
    ``cells`` restricts the run to a subset of index pairs.
    """
    if not eps_list or not T_list:
        raise ValueError("eps and T lists must be non-empty")
    res = GridResult(list(map(float, eps_list)), list(map(float, T_list)), rule.kind)
    todo = cells if cells is not None else [(i, j) for i in range(len(eps_list))
                                            for j in range(len(T_list))]
    for i, j in todo:
        eps, T = res.eps[i], res.T[j]
        try:
            cfg = SimConfig(rule.params(problem, eps, T), rule.kind, n, dt, seed,
                            i * len(T_list) + j)
            res.reports[(i, j)] = estimate(problem, cfg, workers)
        except (RareExitError, ValueError, ArithmeticError) as exc:
            res.errors[(i, j)] = f"{type(exc).__name__}: {exc}"
    return res
