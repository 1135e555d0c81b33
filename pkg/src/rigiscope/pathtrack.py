"""Polynomial homotopy continuation.

Paths are tracked in batches: every array carries a leading path axis and
each path keeps its own step size, so thousands of independent paths share
one vectorized predictor-corrector loop.

A homotopy is any object with ``nvars``, ``neqs`` and
``evaluate(x, t) -> (H, Hx, Ht)`` for points ``x`` of shape ``(P, nvars)``
and parameters ``t`` of shape ``(P,)``.  Tracking runs from ``t = 1`` (start
system) to ``t = 0`` (target).
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from . import numlin
from .errors import DimensionError
from .polycore import CompiledSystem, PolySystem


class Status(str, Enum):
    SUCCESS = "Success"
    DIVERGED = "Diverged"
    SINGULAR = "SingularEndpoint"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class TrackerSettings:
    """Numerical knobs for path tracking.

    Steps are measured in the path parameter, which equals ``t`` on the main
    segment from 1 to ``t_endgame``.
    """

    initial_step: float = 0.05
    min_step: float = 1e-9
    max_step: float = 0.1
    corrector_tol: float = 1e-10
    max_corrector_iters: int = 3
    t_endgame: float = 1e-6
    cond_limit: float = 1e12
    real_threshold: float = 1e-8
    dedupe_tol: float = 1e-6
    seed: int = 0
    divergence_limit: float = 1e10
    polish_iters: int = 20
    endgame: bool = False  # Cauchy loops for endpoints that do not polish
    cauchy_samples: int = 8
    cauchy_max_loops: int = 8
    batch_size: int = 16384
    threads: int = 1

    def __post_init__(self):
        positive = ("initial_step", "min_step", "max_step", "corrector_tol", "t_endgame",
                    "cond_limit", "real_threshold", "dedupe_tol", "divergence_limit")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_corrector_iters", "polish_iters", "cauchy_samples",
                     "cauchy_max_loops", "batch_size", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not self.min_step < self.initial_step:
            raise ValueError("min_step must be smaller than initial_step")
        if not 0 < self.t_endgame < 0.5:
            raise ValueError("t_endgame must lie in (0, 0.5)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_(self, **kw) -> TrackerSettings:
        return replace(self, **kw)

    @classmethod
    def from_env(cls, **kw) -> TrackerSettings:
        threads = os.environ.get("RIGISCOPE_THREADS")
        if threads and "threads" not in kw:
            kw["threads"] = max(1, int(threads))
        return cls(**kw)


@dataclass
class PathResult:
    endpoint: np.ndarray
    status: Status
    final_residual: float
    condition_estimate: float
    t_reached: float
    steps_taken: int
    winding_number: int = 0  # cycle number found by the Cauchy endgame, 0 if not run

    @property
    def is_finite_endpoint(self) -> bool:
        return self.status is Status.SUCCESS or (
            self.status is Status.SINGULAR and self.winding_number > 0)


# -- systems and homotopies ------------------------------------------------------


def as_batch_system(sys):
    if isinstance(sys, PolySystem):
        return CompiledSystem(sys)
    if not hasattr(sys, "evaluate"):
        raise TypeError(f"{type(sys).__name__} cannot be evaluated in batch")
    return sys


class TotalDegreeStart:
    """Start system ``x_i^{d_i} - 1``."""

    def __init__(self, degrees: Sequence[int]):
        self.degrees = np.asarray(degrees, dtype=np.intp)
        if np.any(self.degrees < 1):
            raise ValueError("total-degree start needs every degree >= 1")
        self.nvars = self.neqs = len(self.degrees)

    def evaluate(self, x):
        d = self.degrees
        xd1 = x ** (d - 1)
        F = xd1 * x - 1
        P, n = x.shape
        J = np.zeros((P, n, n), dtype=x.dtype)
        J[:, np.arange(n), np.arange(n)] = d * xd1
        return F, J

    def evaluate_diag(self, x):
        """Values and the diagonal of the (diagonal) Jacobian."""
        d = self.degrees
        xd1 = x ** (d - 1)
        return xd1 * x - 1, d * xd1

    def count(self) -> int:
        return int(np.prod([int(k) for k in self.degrees], dtype=object))

    def roots(self) -> Iterator[np.ndarray]:
        """All ``prod(d_i)`` tuples of roots of unity, lazily, in lexicographic order."""
        unity = [np.exp(2j * np.pi * np.arange(k) / k) for k in self.degrees]
        for idx in itertools.product(*(range(k) for k in self.degrees)):
            yield np.array([u[i] for u, i in zip(unity, idx)])


def _system_degrees(target) -> list[int]:
    degs = target.degrees
    return list(degs() if callable(degs) else degs)


def total_degree_start(target) -> tuple[TotalDegreeStart, Iterator[np.ndarray]]:
    """Start system and lazy root iterator for a square ``target``."""
    degs = _system_degrees(target)
    nvars = target.nvars
    if len(degs) != nvars:
        raise DimensionError(f"target is not square: {len(degs)} equations, {nvars} variables")
    if any(d < 1 for d in degs):
        raise ValueError("total-degree start needs every target degree >= 1")
    start = TotalDegreeStart(degs)
    return start, start.roots()


class StraightLineHomotopy:
    """``H(x, t) = t * gamma * start(x) + (1 - t) * target(x)``."""

    def __init__(self, start, target, gamma: complex | None = None):
        self.start = as_batch_system(start)
        self.target = as_batch_system(target)
        if self.start.nvars != self.target.nvars:
            raise DimensionError("start and target have different variable counts")
        self.gamma = 1.0 if gamma is None else complex(gamma)
        self.nvars = self.target.nvars
        self.neqs = getattr(self.target, "neqs", self.nvars)

    def evaluate(self, x, t):
        T, JT = self.target.evaluate(x)
        tt = t[:, None]
        g = self.gamma
        if isinstance(self.start, TotalDegreeStart):
            S, dS = self.start.evaluate_diag(x)
            Hx = (1 - tt)[:, :, None] * JT
            k = np.arange(self.nvars)
            Hx[:, k, k] += g * tt * dS
        else:
            S, JS = self.start.evaluate(x)
            Hx = g * tt[:, :, None] * JS + (1 - tt)[:, :, None] * JT
        H = g * tt * S + (1 - tt) * T
        Ht = g * S - T
        return H, Hx, Ht


class ProjectiveHomotopy:
    """Homogenized homotopy on an affine chart.

    Variables are ``W = (w0, w)`` with ``x = w / w0``; row ``i`` of ``h`` is
    multiplied by ``w0 ** degrees[i]`` and the chart ``a . W = 1`` is appended.
    Paths that run to infinity in ``x`` stay bounded and end at ``w0 = 0``.
    ``chart`` is the default; :meth:`evaluate` also accepts one chart per
    point, which the tracker uses to keep every path well scaled.
    """

    def __init__(self, h, degrees: Sequence[int], chart: np.ndarray):
        self.inner = h
        self.D = np.asarray(degrees, dtype=float)
        self.chart = np.asarray(chart, dtype=complex)
        if self.D.size != h.nvars or self.chart.size != h.nvars + 1:
            raise DimensionError("degrees and chart must match the homotopy size")
        self.nvars = self.neqs = h.nvars + 1
        make = getattr(h, "projective_solver", None)
        self.solve_both = make(np.asarray(degrees, dtype=np.int64)) if make else None

    def lift(self, x: np.ndarray) -> np.ndarray:
        W = np.concatenate([np.ones((x.shape[0], 1), dtype=complex), x], axis=1)
        return W / (W @ self.chart)[:, None]

    def charts_for(self, P: int) -> np.ndarray:
        return np.tile(self.chart, (P, 1))

    def evaluate(self, W, t, chart=None):
        if chart is None:
            chart = self.charts_for(W.shape[0])
        n = self.inner.nvars
        w0 = W[:, 0]
        w0 = np.where(np.abs(w0) < 1e-300, 1e-300, w0)
        x = W[:, 1:] / w0[:, None]
        H, Hx, Ht = self.inner.evaluate(x, t)
        pw = w0[:, None] ** (self.D - 1)
        P = W.shape[0]
        F = np.empty((P, n + 1), dtype=complex)
        F[:, :n] = pw * w0[:, None] * H
        F[:, n] = np.sum(W * chart, axis=1) - 1
        J = np.empty((P, n + 1, n + 1), dtype=complex)
        J[:, :n, 1:] = pw[:, :, None] * Hx
        J[:, :n, 0] = pw * (self.D * H - (Hx @ x[:, :, None])[:, :, 0])
        J[:, n, :] = chart
        Ft = np.zeros((P, n + 1), dtype=complex)
        Ft[:, :n] = pw * w0[:, None] * Ht
        return F, J, Ft


class ParameterHomotopy:
    """Linear parameter path ``params(t) = t * p_from + (1 - t) * p_to`` without gamma.

    ``family.evaluate(x, params)`` must return ``(F, Fx, Fp)`` with shapes
    ``(P, neqs)``, ``(P, neqs, nvars)`` and ``(P, neqs, nparams)``.
    """

    def __init__(self, family, p_from, p_to):
        self.family = family
        self.p_from = np.asarray(p_from)
        self.p_to = np.asarray(p_to)
        self.nvars = family.nvars
        self.neqs = family.neqs

    def evaluate(self, x, t):
        tt = t[:, None]
        params = tt * self.p_from + (1 - tt) * self.p_to
        if np.isrealobj(x) and np.isrealobj(params):
            params = params.real
        F, Fx, Fp = self.family.evaluate(x, params)
        Ht = Fp @ (self.p_from - self.p_to)
        return F, Fx, Ht


class PolynomialFamily:
    """A :class:`PolySystem` whose trailing ``nparams`` variables are parameters."""

    def __init__(self, system: PolySystem, nparams: int):
        self.compiled = CompiledSystem(system)
        self.nparams = nparams
        self.nvars = system.nvars - nparams
        self.neqs = len(system)

    def evaluate(self, x, params):
        z = np.concatenate([np.asarray(x, dtype=complex), np.asarray(params, dtype=complex)], axis=1)
        F, J = self.compiled.evaluate(z)
        return F, J[:, :, :self.nvars], J[:, :, self.nvars:]


# -- batched predictor-corrector core ----------------------------------------------------


def _linsolve(A, b, overdetermined):
    if overdetermined:
        return numlin.batch_lstsq(A, b)
    return numlin.batch_solve(A, b)


def _norm(x):
    return np.linalg.norm(x, axis=-1)


class _Tracker:
    """Batched predictor-corrector.

    Every method takes ``ids``, the positions of its points within the
    batch, so that projective homotopies can carry one chart per path.
    """

    def __init__(self, h, st: TrackerSettings, P: int):
        self.h = h
        self.st = st
        self.over = getattr(h, "neqs", h.nvars) > h.nvars
        # homotopies may supply a fused solver returning (Hx^-1 H, Hx^-1 Ht, ok)
        self.fused = getattr(h, "solve_both", None) is not None
        self.charts = h.charts_for(P) if isinstance(h, ProjectiveHomotopy) else None

    def _chart(self, ids):
        return None if self.charts is None else self.charts[ids]

    def evaluate(self, x, t, ids):
        if self.charts is None:
            return self.h.evaluate(x, t)
        return self.h.evaluate(x, t, self.charts[ids])

    def field(self, x, t, dt, ids):
        if self.fused:
            _, v, ok = self.h.solve_both(x, t, self.charts[ids])
            return -v * dt[:, None], ok
        H, Hx, Ht = self.evaluate(x, t, ids)
        dx, ok = _linsolve(Hx, -Ht * dt[:, None], self.over)
        return dx, ok

    def newton(self, x, t, ids):
        if self.fused:
            u, _, ok = self.h.solve_both(x, t, self.charts[ids])
            return -u, ok
        H, Hx, _ = self.evaluate(x, t, ids)
        return _linsolve(Hx, -H, self.over)

    def rechart(self, x, ids):
        """Move badly scaled projective points onto their own orthogonal chart.

        ``x`` holds the points at batch positions ``ids``; it is rescaled in place.
        """
        if self.charts is None or ids.size == 0:
            return
        nrm = _norm(x)
        sel = (nrm > 4.0) | (nrm < 0.25)
        sel &= np.isfinite(nrm) & (nrm > 0)
        if np.any(sel):
            x[sel] /= nrm[sel][:, None]
            self.charts[ids[sel]] = np.conj(x[sel])

    def correct(self, x, t, ids, iters, tol):
        """Newton (or Gauss-Newton) at fixed ``t``.

        Returns the corrected points and a convergence mask.  A path fails
        when an update does not shrink by at least half before the tolerance
        is met.
        """
        x = x.copy()
        P = x.shape[0]
        conv = np.zeros(P, dtype=bool)
        fail = np.zeros(P, dtype=bool)
        prev = np.full(P, np.inf)
        for _ in range(iters):
            live = np.flatnonzero(~conv & ~fail)
            if live.size == 0:
                break
            dx, ok = self.newton(x[live], t[live], ids[live])
            nrm = _norm(dx)
            x[live] = x[live] + np.where(ok[:, None], dx, 0)
            done = ok & (nrm <= tol * (1 + _norm(x[live])))
            bad = ~ok | ~np.isfinite(nrm) | (~done & (nrm > 0.5 * prev[live]))
            conv[live[done]] = True
            fail[live[bad & ~done]] = True
            prev[live] = nrm
        return x, conv & ~fail

    def segment(self, x, ta, tb, ids, step0=None):
        """Track every path from ``ta`` to ``tb`` along a straight line in ``t``.

        Returns ``(x, code, steps)`` where ``code`` is 0 for arrival,
        1 for divergence and 2 for step failure.
        """
        st = self.st
        P = x.shape[0]
        x = x.copy()
        s = np.zeros(P)
        step = np.full(P, st.initial_step if step0 is None else step0)
        succ = np.zeros(P, dtype=np.intp)
        steps = np.zeros(P, dtype=np.intp)
        code = np.full(P, -1, dtype=np.intp)
        dt_all = tb - ta
        while True:
            act = np.flatnonzero(code < 0)
            if act.size == 0:
                break
            xa, sa, ia_ids = x[act], s[act], ids[act]
            ha = np.minimum(step[act], 1.0 - sa)
            dt = dt_all[act]
            t0 = ta[act] + sa * dt
            k1, ok = self.field(xa, t0, dt, ia_ids)
            hh = ha[:, None]
            k2, ok2 = self.field(xa + 0.5 * hh * k1, t0 + 0.5 * ha * dt, dt, ia_ids)
            k3, ok3 = self.field(xa + 0.5 * hh * k2, t0 + 0.5 * ha * dt, dt, ia_ids)
            k4, ok4 = self.field(xa + hh * k3, t0 + ha * dt, dt, ia_ids)
            xp = xa + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            good = ok & ok2 & ok3 & ok4 & np.all(np.isfinite(xp), axis=1)
            xp[~good] = xa[~good]
            xc, conv = self.correct(xp, t0 + ha * dt, ia_ids, st.max_corrector_iters,
                                    st.corrector_tol)
            acc = conv & good

            ia = act[acc]
            x[ia] = xc[acc]
            if self.charts is not None:
                xs = x[ia]
                self.rechart(xs, ids[ia])
                x[ia] = xs
            s[ia] = np.where(1.0 - (sa[acc] + ha[acc]) < 1e-14, 1.0, sa[acc] + ha[acc])
            steps[ia] += 1
            succ[ia] += 1
            grow = ia[succ[ia] >= 4]
            step[grow] = np.minimum(step[grow] * 1.5, st.max_step)
            succ[grow] = 0

            ir = act[~acc]
            step[ir] *= 0.5
            succ[ir] = 0

            code[ia[s[ia] >= 1.0]] = 0
            code[ia[_norm(x[ia]) > st.divergence_limit]] = 1
            code[ir[step[ir] < st.min_step]] = 2
        return x, code, steps

    def polish(self, x, t, ids):
        """Newton at fixed ``t``; returns points, converged mask, quadratic-convergence mask."""
        st = self.st
        x = x.copy()
        P = x.shape[0]
        conv = np.zeros(P, dtype=bool)
        quad = np.ones(P, dtype=bool)
        stop = np.zeros(P, dtype=bool)
        prev = np.full(P, np.inf)
        for _ in range(st.polish_iters):
            live = np.flatnonzero(~conv & ~stop)
            if live.size == 0:
                break
            dx, ok = self.newton(x[live], t[live], ids[live])
            nrm = _norm(dx)
            scale = st.corrector_tol * (1 + _norm(x[live]))
            # polishing must stay local: a large step means we are not near a root
            blowup = ~ok | ~np.isfinite(nrm) | (nrm > 1e-3 * (1 + _norm(x[live])))
            upd = live[~blowup]
            x[upd] = x[upd] + dx[~blowup]
            stop[live[blowup]] = True
            slow = (prev[live] > 1e2 * scale) & (nrm > 0.25 * prev[live])
            quad[live[slow]] = False
            conv[live[~blowup & (nrm <= scale)]] = True
            prev[live] = nrm
        return x, conv, quad

    def _on_chart(self, x, a):
        """Rescale projective points onto the charts ``a`` (one per row)."""
        if a is None:
            return x
        return x / np.sum(x * a, axis=1)[:, None]

    def cauchy(self, x, r, ids):
        """Cauchy endgame around ``|t| = r``.

        Loops a regular polygon in the ``t``-plane until each path closes up,
        then averages the samples.  Returns ``(estimate, winding, ok)``.
        Samples of projective paths are averaged on the chart the loop
        started from, which is restored for the estimate.
        """
        st = self.st
        K = st.cauchy_samples
        P = x.shape[0]
        a0 = None if self.charts is None else self.charts[ids].copy()
        x0 = x.copy()
        cur = x.copy()
        acc = np.zeros_like(x)
        est = x.copy()
        wind = np.zeros(P, dtype=np.intp)
        live = np.ones(P, dtype=bool)
        nodes = r * np.exp(2j * np.pi * np.arange(K + 1) / K)
        for k in range(K * st.cauchy_max_loops):
            idx = np.flatnonzero(live)
            if idx.size == 0:
                break
            ta = np.full(idx.size, nodes[k % K])
            tb = np.full(idx.size, nodes[k % K + 1])
            xn, code, _ = self.segment(cur[idx], ta, tb, ids[idx], step0=0.25)
            ok = code == 0
            live[idx[~ok]] = False
            idx, xn = idx[ok], xn[ok]
            cur[idx] = xn
            xr = self._on_chart(xn, None if a0 is None else a0[idx])
            acc[idx] += xr
            if (k + 1) % K == 0:
                loops = (k + 1) // K
                closed = _norm(xr - x0[idx]) <= st.dedupe_tol * (1 + _norm(xr))
                fin = idx[closed]
                est[fin] = acc[fin] / (loops * K)
                wind[fin] = loops
                live[fin] = False
        if a0 is not None:
            self.charts[ids] = a0
        return est, wind, wind > 0

    def endpoint_diagnostics(self, x, t, ids):
        H, Hx, _ = self.evaluate(x, t, ids)
        res = np.max(np.abs(H), axis=1) if H.size else np.zeros(x.shape[0])
        if self.over:
            s = np.linalg.svd(Hx, compute_uv=False)
            with np.errstate(divide="ignore", invalid="ignore"):
                cond = s[:, 0] / s[:, -1]
            cond[~np.isfinite(cond)] = np.inf
        else:
            cond = numlin.batch_condition(Hx)
        return res, cond


def _track_batch(h, X0: np.ndarray, st: TrackerSettings, t_final: float | None = None):
    """Track a batch of start points from ``t = 1`` to ``t = 0``.

    With ``t_final=None`` the main segment stops at ``st.t_endgame`` and
    the endpoint is obtained by Newton polishing at ``t = 0``, falling back
    to the Cauchy endgame when ``st.endgame`` is set.  Otherwise the segment
    runs all the way to ``t_final`` (parameter homotopies).
    """
    P = X0.shape[0]
    tr = _Tracker(h, st, P)
    real = np.isrealobj(X0) and getattr(h, "real", False)
    dtype = float if real else complex
    X0 = X0.astype(dtype)
    t_stop = st.t_endgame if t_final is None else t_final
    ids = np.arange(P)
    ta = np.ones(P, dtype=dtype)
    tb = np.full(P, t_stop, dtype=dtype)
    x, code, steps = tr.segment(X0, ta, tb, ids)

    status = np.empty(P, dtype=object)
    status[code == 1] = Status.DIVERGED
    status[code == 2] = Status.STEP_FAILURE
    t_reached = np.where(code == 0, t_stop, np.nan)
    wind = np.zeros(P, dtype=np.intp)

    arrived = np.flatnonzero(code == 0)
    x_end = x[arrived].copy()
    charts_end = None if tr.charts is None else tr.charts[arrived].copy()
    t0 = np.zeros(arrived.size, dtype=dtype)
    xp, conv, quad = tr.polish(x[arrived], t0, arrived)
    x[arrived] = xp
    if arrived.size:
        res, cond = tr.endpoint_diagnostics(xp, t0, arrived)
    else:
        res, cond = np.zeros(0), np.zeros(0)
    residual = np.full(P, np.nan)
    condition = np.full(P, np.nan)
    residual[arrived] = res
    condition[arrived] = cond
    t_reached[arrived] = 0.0
    if tr.over:
        # Gauss-Newton converges linearly at least-squares points with nonzero residual
        good = conv & (cond < st.cond_limit)
    else:
        good = conv & quad & (cond < st.cond_limit) & (res < 10 * st.corrector_tol * (1 + _norm(xp)))
    status[arrived[good]] = Status.SUCCESS
    sel = ~good
    bad = arrived[sel]
    status[bad] = Status.SINGULAR

    if st.endgame and bad.size and t_final is None:
        # the endgame starts from the unpolished point at t_endgame
        if charts_end is not None:
            tr.charts[bad] = charts_end[sel]
        est, w, ok = tr.cauchy(x_end[sel], st.t_endgame, bad)
        x[bad[ok]] = est[ok]
        wind[bad[ok]] = w[ok]
        x[bad[~ok]] = x_end[sel][~ok]
        tz = np.zeros(bad.size, dtype=complex)
        r2, c2 = tr.endpoint_diagnostics(x[bad], tz, bad)
        residual[bad] = r2
        condition[bad] = c2

    big = _norm(x) > st.divergence_limit
    status[big & (status != Status.STEP_FAILURE)] = Status.DIVERGED
    return [PathResult(x[p].copy(), status[p], float(residual[p]), float(condition[p]),
                       float(t_reached[p]), int(steps[p]), int(wind[p]))
            for p in range(P)]


def _chunks(roots: Iterable, size: int) -> Iterator[np.ndarray]:
    it = iter(roots)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.array(block)


def track_all(h, roots: Iterable, st: TrackerSettings | None = None) -> list[PathResult]:
    """Track every start root; one :class:`PathResult` per root, in root order."""
    st = st or TrackerSettings()
    chunks = list(_chunks(roots, st.batch_size))
    if not chunks:
        raise ValueError("no start roots supplied")
    for c in chunks:
        if c.shape[1] != h.nvars:
            raise DimensionError(f"start roots have {c.shape[1]} coordinates, expected {h.nvars}")
    if st.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=st.threads) as pool:
            parts = list(pool.map(lambda c: _track_batch(h, c, st), chunks))
    else:
        parts = [_track_batch(h, c, st) for c in chunks]
    return [r for part in parts for r in part]


def track_all_projective(h, degrees: Sequence[int], roots: Iterable,
                         st: TrackerSettings | None = None) -> list[PathResult]:
    """Like :func:`track_all`, but tracked in homogeneous coordinates.

    ``degrees[i]`` is the degree of row ``i`` of ``h`` in ``x``, uniform in
    ``t``.  The random chart is drawn from ``st.seed``.  Endpoints are mapped
    back to affine coordinates; those at infinity are reported as Diverged.
    """
    st = st or TrackerSettings()
    rng = np.random.default_rng([st.seed, 7])
    n = h.nvars
    chart = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    chart /= np.linalg.norm(chart)
    ph = ProjectiveHomotopy(h, degrees, chart)
    lifted = (ph.lift(c) for c in _chunks(roots, st.batch_size))
    results = track_all(ph, (w for block in lifted for w in block), st)
    out = []
    for r in results:
        W = r.endpoint
        w0 = abs(W[0])
        at_infinity = w0 <= np.max(np.abs(W)) / st.divergence_limit
        x = W[1:] / W[0] if w0 > 0 else np.full(n, np.inf + 0j)
        status = r.status
        if status is not Status.STEP_FAILURE and at_infinity:
            status = Status.DIVERGED
        out.append(PathResult(x, status, r.final_residual, r.condition_estimate,
                              r.t_reached, r.steps_taken, r.winding_number))
    return out


def track_path(h, x_start, st: TrackerSettings | None = None) -> PathResult:
    """Track a single start solution from ``t = 1`` to ``t = 0``."""
    st = st or TrackerSettings()
    x_start = np.asarray(x_start)
    H, _, _ = h.evaluate(x_start[None, :].astype(complex), np.ones(1, dtype=complex))
    if np.max(np.abs(H)) > 1e-6 * (1 + np.linalg.norm(x_start)):
        raise ValueError("start point does not satisfy H(x, 1) = 0")
    return _track_batch(h, x_start[None, :], st)[0]


def parameter_track(family, start_solution, param_from, param_to,
                    st: TrackerSettings | None = None, overdetermined: bool = False) -> PathResult:
    """Follow one solution of a parameterized family along a straight parameter path.

    No gamma factor is used, so a real start on a real family stays real
    unless the path meets the discriminant.  With ``overdetermined`` the
    corrector is Gauss-Newton and the endpoint is a least-squares point.
    """
    st = st or TrackerSettings()
    h = ParameterHomotopy(family, param_from, param_to)
    if (h.neqs > h.nvars) != overdetermined:
        raise DimensionError(
            f"family has {h.neqs} equations in {h.nvars} unknowns; overdetermined={overdetermined}")
    x0 = np.asarray(start_solution)
    real = np.isrealobj(x0) and np.isrealobj(h.p_from) and np.isrealobj(h.p_to)
    h.real = real and getattr(family, "real", False)
    F, _, _ = family.evaluate(x0[None, :], np.asarray(param_from)[None, :])
    tol = st.corrector_tol * (1 + np.linalg.norm(x0))
    if not overdetermined and np.max(np.abs(F)) > 1e3 * tol:
        raise ValueError("start solution does not solve the family at param_from")
    return _track_batch(h, x0[None, :], st, t_final=0.0)[0]


# -- endpoint classification ---------------------------------------------------------


class Classification(NamedTuple):
    real_points: list
    complex_count: int
    singular_count: int
    max_discarded_imag: float = 0.0


def dedupe(points: Sequence[np.ndarray], tol: float) -> list[np.ndarray]:
    """Greedy clustering in the sup norm; each cluster is replaced by its mean."""
    clusters: list[list[np.ndarray]] = []
    reps: list[np.ndarray] = []
    for p in points:
        for k, r in enumerate(reps):
            if np.max(np.abs(p - r)) <= tol:
                clusters[k].append(p)
                reps[k] = np.mean(clusters[k], axis=0)
                break
        else:
            clusters.append([p])
            reps.append(p)
    return reps


def realness(x: np.ndarray) -> float:
    return float(np.max(np.abs(x.imag)) / max(1.0, float(np.max(np.abs(x)))))


def classify_endpoints(results: Sequence[PathResult], st: TrackerSettings | None = None,
                       nproject: int | None = None, include_singular: bool = False) -> Classification:
    """Split endpoints into deduplicated real points and counts of the rest.

    Only ``Success`` endpoints are candidates unless ``include_singular``
    is set, in which case singular endpoints resolved by the Cauchy endgame
    count as well.  ``nproject`` keeps only the leading coordinates (the
    critical-point multipliers are dropped that way).
    """
    st = st or TrackerSettings()
    reals, n_complex, n_singular = [], 0, 0
    max_imag = 0.0
    for r in results:
        usable = r.status is Status.SUCCESS or (include_singular and r.is_finite_endpoint)
        if r.status is Status.SINGULAR:
            n_singular += 1
        if not usable:
            continue
        x = r.endpoint[:nproject] if nproject is not None else r.endpoint
        if realness(x) < st.real_threshold:
            reals.append(x.real.copy())
        else:
            if r.status is Status.SUCCESS:
                n_complex += 1
            max_imag = max(max_imag, float(np.max(np.abs(x.imag))))
    return Classification(dedupe(reals, st.dedupe_tol), n_complex, n_singular, max_imag)


#: alternate spelling kept for callers written against the original operation name
classify_endpooints = classify_endpoints
