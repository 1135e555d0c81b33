"""Epsilon-local rigidity, discrete flexes and flexes along a direction.

The epsilon test looks for real points of the moving-frame variety on the
sphere of radius ``eps`` about ``p0``.  All of those are real zeros of the
quartic ``G = sum(g_i^2) + s^2`` where ``s = eps^2 - |x - p0|^2``.  Every
connected component of the real zero set of ``G`` contains a critical
point of the squared distance to a random point ``y``, and these are reached
as limits of critical points on the level sets ``G = t*gamma*z``.

Solving proceeds in two stages:

1. a total-degree homotopy solves the critical system at ``t = 1``;
2. those solutions are followed from ``t = 1`` to ``t = 0``, where the limits
   are resolved by a Cauchy endgame (real zeros of a sum of squares are always
   singular).

Real candidates are refined by Gauss-Newton on ``[g; s]`` and kept only when
they satisfy every member constraint and the sphere equation.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels, numlin
from .errors import DegenerateDirection, DimensionError, RandomizationFailure
from .framework import (EdgeModel, Framework, MovingFrame, build_epsilon_system,
                        build_moving_frame_constraints, infinitesimal_flexes, lift,
                        moving_frame, project_velocity, rigidity_matrix)
from .pathtrack import (PathResult, Status, StraightLineHomotopy, TrackerSettings,
                        dedupe, parameter_track, realness, total_degree_start,
                        track_all_projective)
from .polycore import Polynomial, PolySystem, bezout_number, gradient

#: residual required of every reported real point
SOUNDNESS_TOL = 1e-8
#: loose realness prefilter before verified refinement of endgame estimates
CANDIDATE_IMAG_TOL = 1e-4


# -- critical system ------------------------------------------------------------------


class CriticalSystem:
    """Square critical-point system in ``x`` (``N`` coordinates) and ``lam0, lam1``.

    Rows at parameter ``t`` are::

        G(x) - t * gamma * z
        lam0 * (x - y) + lam1 * grad G(x)
        alpha0 * lam0 + alpha1 * lam1 - 1

    Evaluation uses edge geometry directly; :meth:`polys` expands the same
    system into sparse polynomials for cross-checking and degree counts.
    """

    def __init__(self, fw: Framework, mf: MovingFrame, eps: float, *, z: float,
                 gamma: complex, y: np.ndarray, alpha: np.ndarray):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.fw, self.mf, self.eps = fw, mf, float(eps)
        self.z, self.gamma = float(z), complex(gamma)
        self.y = np.asarray(y, dtype=float)
        self.alpha = np.asarray(alpha, dtype=complex)
        self.edges = EdgeModel(fw, mf)
        self.N = mf.N
        self.nvars = self.neqs = self.N + 2
        self.p_hat = np.asarray(mf.reduced_config, dtype=float)
        self._hsum = self.edges.hessians  # (m, N, N)
        self._hsum_flat = self._hsum.reshape(self._hsum.shape[0], -1)

    @property
    def degrees(self) -> list[int]:
        return [4] * (self.N + 1) + [1]

    def bezout(self) -> int:
        return 4 ** (self.N + 1)

    # value, gradient and Hessian of G for a batch of points
    def g_eps(self, x):
        g, Jg = self.edges.evaluate(x)
        r = x - self.p_hat
        s = self.eps ** 2 - np.sum(r * r, axis=1)
        G = np.sum(g * g, axis=1) + s * s
        ds = -2 * r
        JgT = Jg.transpose(0, 2, 1)
        dG = 2 * (JgT @ g[:, :, None])[:, :, 0] + 2 * s[:, None] * ds
        N = self.N
        HG = 2 * (JgT @ Jg + (g @ self._hsum_flat).reshape(-1, N, N))
        HG += 2 * (ds[:, :, None] * ds[:, None, :])
        HG -= 4 * s[:, None, None] * np.eye(self.N)
        return G, dG, HG

    def evaluate_at(self, w, t):
        """``(H, Hx, Ht)`` for points ``w`` of shape ``(P, N+2)`` and parameters ``t``."""
        w = np.asarray(w)
        P, N = w.shape[0], self.N
        x, l0, l1 = w[:, :N], w[:, N], w[:, N + 1]
        G, dG, HG = self.g_eps(x)
        xy = x - self.y
        dtype = np.result_type(w, t, complex)
        H = np.empty((P, N + 2), dtype=dtype)
        H[:, 0] = G - t * self.gamma * self.z
        H[:, 1:N + 1] = l0[:, None] * xy + l1[:, None] * dG
        H[:, N + 1] = self.alpha[0] * l0 + self.alpha[1] * l1 - 1
        J = np.zeros((P, N + 2, N + 2), dtype=dtype)
        J[:, 0, :N] = dG
        J[:, 1:N + 1, :N] = l1[:, None, None] * HG
        idx = np.arange(N)
        J[:, 1 + idx, idx] += l0[:, None]
        J[:, 1:N + 1, N] = xy
        J[:, 1:N + 1, N + 1] = dG
        J[:, N + 1, N] = self.alpha[0]
        J[:, N + 1, N + 1] = self.alpha[1]
        Ht = np.zeros((P, N + 2), dtype=dtype)
        Ht[:, 0] = -self.gamma * self.z
        return H, J, Ht

    def polys(self, t: complex = 0.0) -> PolySystem:
        """The system at parameter ``t`` as expanded sparse polynomials."""
        N, n = self.N, self.N + 2
        G = build_epsilon_system(self.fw, self.mf, self.eps)
        embed = lambda p: Polynomial(n, {m + (0, 0): c for m, c in p.terms.items()})
        Gw = embed(G)
        l0 = Polynomial.variable(N, n)
        l1 = Polynomial.variable(N + 1, n)
        rows = [Gw - t * self.gamma * self.z]
        for k, dG in enumerate(gradient(G)):
            rows.append(l0 * (Polynomial.variable(k, n) - float(self.y[k])) + l1 * embed(dG))
        rows.append(self.alpha[0] * l0 + self.alpha[1] * l1 - 1)
        return PolySystem(rows, n)


def _kernel_data(crit: CriticalSystem):
    em, mf = crit.edges, crit.mf
    slot_free = -np.ones(mf.n * mf.d, dtype=np.int64)
    slot_free[mf.free_indices] = np.arange(mf.N)
    return (slot_free, em.I.astype(np.int64), em.J.astype(np.int64),
            np.asarray(em.lsq, dtype=float), mf.d, crit.p_hat, crit.eps, crit.y,
            crit.alpha, complex(crit.gamma * crit.z))


class _TotalDegreeCritical(StraightLineHomotopy):
    """Total-degree homotopy onto the critical system at ``t = 1``, with a compiled solver."""

    def __init__(self, crit: CriticalSystem, gamma: complex):
        target = _CriticalAt(crit, 1.0)
        start, _ = total_degree_start(target)
        super().__init__(start, target, gamma)
        self.crit = crit

    def projective_solver(self, D):
        data = _kernel_data(self.crit)
        deg = np.asarray(self.start.degrees, dtype=np.int64)
        g = complex(self.gamma)

        def solve_both(W, t, chart):
            return _kernels.critical_solve(np.ascontiguousarray(W, dtype=complex),
                                           np.asarray(t, dtype=complex),
                                           _kernels.MODE_TOTAL_DEGREE, *data, deg, g, D,
                                           np.ascontiguousarray(chart, dtype=complex))
        return solve_both


class _CriticalAt:
    """The critical system frozen at one value of ``t``, as a target for tracking."""

    def __init__(self, crit: CriticalSystem, t: complex):
        self.crit, self.t = crit, t
        self.nvars = self.neqs = crit.nvars
        self.degrees = crit.degrees

    def evaluate(self, w):
        H, J, _ = self.crit.evaluate_at(w, self.t)
        return H, J


class _CriticalHomotopy:
    """``t -> critical system at t``, tracked from 1 to 0."""

    def __init__(self, crit: CriticalSystem):
        self.crit = crit
        self.nvars = self.neqs = crit.nvars

    def evaluate(self, w, t):
        return self.crit.evaluate_at(w, t)

    def projective_solver(self, D):
        data = _kernel_data(self.crit)
        deg = np.ones(self.nvars, dtype=np.int64)

        def solve_both(W, t, chart):
            return _kernels.critical_solve(np.ascontiguousarray(W, dtype=complex),
                                           np.asarray(t, dtype=complex),
                                           _kernels.MODE_LEVEL_SETS, *data, deg, 1.0 + 0j, D,
                                           np.ascontiguousarray(chart, dtype=complex))
        return solve_both


def build_critical_system(fw: Framework, mf: MovingFrame, eps: float, seed: int) -> CriticalSystem:
    """Draw the random data from ``seed`` and assemble the critical system."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(seed)
    gamma = np.exp(2j * np.pi * rng.random())
    alpha = np.exp(2j * np.pi * rng.random(2))
    z = rng.standard_normal()
    sigma = max(0.1, eps)
    p_hat = np.asarray(mf.reduced_config, dtype=float)
    probe = CriticalSystem(fw, mf, eps, z=z, gamma=gamma, y=p_hat, alpha=alpha)
    for _ in range(100):
        y = p_hat + rng.normal(scale=sigma, size=mf.N)
        if abs(probe.g_eps(y[None, :])[0][0]) > 1e-6:
            return CriticalSystem(fw, mf, eps, z=z, gamma=gamma, y=y, alpha=alpha)
    raise RandomizationFailure("could not draw a point off the epsilon hypersurface")


def recover_multipliers(crit: CriticalSystem, x) -> tuple[np.ndarray, float]:
    """Least-squares multipliers for a point ``x`` of the ``t = 0`` system, with the residual."""
    x = np.asarray(x, dtype=complex)[None, :]
    _, dG, _ = crit.g_eps(x)
    A = np.zeros((crit.N + 1, 2), dtype=complex)
    A[:crit.N, 0] = x[0] - crit.y
    A[:crit.N, 1] = dG[0]
    A[crit.N] = crit.alpha
    b = np.zeros(crit.N + 1, dtype=complex)
    b[crit.N] = 1
    lam = np.linalg.lstsq(A, b, rcond=None)[0]
    return lam, float(np.linalg.norm(A @ lam - b))


# -- witness points of the hypersurface ----------------------------------------------


@dataclass
class WitnessSet:
    polynomial: Polynomial
    base: np.ndarray  # the line is base + tau * direction
    direction: np.ndarray
    params: np.ndarray
    points: list

    @property
    def degree(self) -> int:
        return len(self.points)


def witness_hypersurface(g_eps: Polynomial, seed: int, max_tries: int = 10) -> WitnessSet:
    """Intersect the hypersurface ``g_eps = 0`` with a random complex line."""
    deg = g_eps.degree
    if deg < 1:
        raise ValueError("witness sets need a non-constant polynomial")
    rng = np.random.default_rng(seed)
    n = g_eps.nvars
    nodes = np.exp(2j * np.pi * np.arange(deg + 1) / (deg + 1))
    for _ in range(max_tries):
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        vals = np.array([g_eps(a + tau * b) for tau in nodes])
        # interpolate on roots of unity: coefficient k is the k-th discrete Fourier mode
        coeffs = np.array([np.mean(vals * nodes ** (-k)) for k in range(deg + 1)])
        scale = np.max(np.abs(coeffs))
        if scale == 0 or abs(coeffs[deg]) < 1e-10 * scale:
            continue
        taus = np.roots(coeffs[::-1])
        dg = gradient(g_eps)
        polished = []
        for tau in taus:
            for _ in range(8):
                x = a + tau * b
                f = g_eps(x)
                df = sum(dg[k](x) * b[k] for k in range(n))
                if df == 0:
                    break
                step = f / df
                tau = tau - step
                if abs(step) < 1e-15 * (1 + abs(tau)):
                    break
            polished.append(tau)
        taus = np.array(polished)
        return WitnessSet(g_eps, a, b, taus, [a + t * b for t in taus])
    raise RandomizationFailure("every sampled line met the hypersurface in lower degree")


# -- epsilon-local rigidity ------------------------------------------------------------------


def _status_counts(results: Sequence[PathResult]) -> dict:
    counts = {s.value: 0 for s in Status}
    for r in results:
        counts[r.status.value] += 1
    return counts


def refine_real_point(fw: Framework, mf: MovingFrame, eps: float, x0, iters: int = 30):
    """Gauss-Newton on the member constraints and the sphere, in real arithmetic."""
    em = EdgeModel(fw, mf)
    p_hat = np.asarray(mf.reduced_config, dtype=float)
    x = np.asarray(x0, dtype=float).copy()

    def residual(x):
        g, Jg = em.evaluate(x[None, :])
        r = x - p_hat
        F = np.concatenate([g[0], [eps ** 2 - r @ r]])
        J = np.vstack([Jg[0], -2 * r[None, :]])
        return F, J

    for _ in range(iters):
        F, J = residual(x)
        dx = np.linalg.lstsq(J, -F, rcond=None)[0]
        x = x + dx
        if np.linalg.norm(dx) < 1e-15 * (1 + np.linalg.norm(x)):
            break
    return x


def is_sound_real_point(fw: Framework, mf: MovingFrame, eps: float, x, tol: float = SOUNDNESS_TOL) -> bool:
    g, _ = EdgeModel(fw, mf).evaluate(np.asarray(x, dtype=float)[None, :])
    dist = np.linalg.norm(np.asarray(x) - mf.reduced_config)
    return bool(np.all(np.abs(g) < tol) and abs(dist - eps) < tol)


@dataclass
class EpsRigidityReport:
    u: bool  # no real points on the sphere
    v: bool  # tracking assumptions held: no step failure, every path resolved
    R: list
    eps: float
    seed: int
    path_stats: dict
    n_paths: int
    witness_degree: int | None = None
    max_discarded_imag: float = 0.0
    unresolved_paths: int = 0
    timings: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if not self.v:
            return "verdict withheld"
        return f"epsilon-locally rigid at {self.eps:g}" if self.u else \
            f"not epsilon-locally rigid at {self.eps:g}"

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "seed": self.seed, "u": self.u, "v": self.v,
            "verdict": self.verdict, "num_real": len(self.R),
            "R": [list(map(float, x)) for x in self.R],
            "paths": self.n_paths, "path_stats": self.path_stats,
            "unresolved_paths": self.unresolved_paths,
            "witness_degree": self.witness_degree,
            "max_discarded_imag": self.max_discarded_imag,
            "timings": self.timings,
        }


def _finer(st: TrackerSettings, k: int) -> TrackerSettings:
    return st.with_(initial_step=st.initial_step / 4 ** k, max_step=st.max_step / 4 ** k)


def _retrack_failures(h, degrees, starts, results, st, tries=2):
    """Retrack StepFailure paths with smaller steps; returns the final results."""
    for k in range(1, tries + 1):
        bad = [i for i, r in enumerate(results) if r.status is Status.STEP_FAILURE]
        if not bad:
            break
        redo = track_all_projective(h, degrees, [starts[i] for i in bad], _finer(st, k))
        for i, r in zip(bad, redo):
            results[i] = r
    return results


def _stage_one(crit: CriticalSystem, st: TrackerSettings, rng):
    gamma = np.exp(2j * np.pi * rng.random())
    h = _TotalDegreeCritical(crit, gamma)
    roots = list(h.start.roots())
    st = st.with_(endgame=False)
    results = track_all_projective(h, crit.degrees, roots, st)
    results = _retrack_failures(h, crit.degrees, roots, results, st)
    # distinct start roots must reach distinct nonsingular endpoints; retrack collisions
    jumped = _colliding(results, st)
    tries = 0
    while jumped and tries < 2:
        tries += 1
        redo = track_all_projective(h, crit.degrees, [roots[k] for k in jumped], _finer(st, tries))
        for k, r in zip(jumped, redo):
            results[k] = r
        jumped = _colliding(results, st)
    return results, len(jumped)


def _colliding(results, st) -> list[int]:
    idx = [k for k, r in enumerate(results) if r.status is Status.SUCCESS]
    if not idx:
        return []
    X = np.array([results[k].endpoint for k in idx])
    order = np.lexsort(np.round(X.real, 6).T[::-1])
    hit = set()
    # exact duplicates sort next to each other after rounding; compare neighbours
    for a, b in zip(order[:-1], order[1:]):
        if np.max(np.abs(X[a] - X[b])) <= 1e-6 * (1 + np.max(np.abs(X[a]))):
            hit.update((idx[a], idx[b]))
    return sorted(hit)


def eps_local_rigidity(fw: Framework, eps: float, seed: int = 0,
                       settings: TrackerSettings | None = None, *,
                       witness: bool = True) -> EpsRigidityReport:
    """Decide whether the sphere of radius ``eps`` about ``p0`` misses the real variety."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    st = (settings or TrackerSettings()).with_(endgame=True)
    timings = {}
    t0 = time.perf_counter()
    mf = moving_frame(fw)
    crit = build_critical_system(fw, mf, eps, seed)
    wdeg = None
    if witness and mf.N <= 8:
        wdeg = witness_hypersurface(build_epsilon_system(fw, mf, eps), seed).degree
    timings["setup"] = time.perf_counter() - t0

    rng = np.random.default_rng([seed, 1])
    t1 = time.perf_counter()
    stage1, jumped = _stage_one(crit, st, rng)
    timings["stage1"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    starts = [r.endpoint for r in stage1 if r.status is Status.SUCCESS]
    stage2 = []
    if starts:
        h2 = _CriticalHomotopy(crit)
        stage2 = track_all_projective(h2, crit.degrees, starts, st)
        stage2 = _retrack_failures(h2, crit.degrees, starts, stage2, st)
    timings["stage2"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    N = mf.N
    cands, max_imag = [], 0.0
    for r in stage2:
        if r.status not in (Status.SUCCESS, Status.SINGULAR):
            continue
        x = r.endpoint[:N]
        if not np.all(np.isfinite(x)):
            continue
        im = realness(x)
        if im < CANDIDATE_IMAG_TOL:
            xr = refine_real_point(fw, mf, eps, x.real)
            if is_sound_real_point(fw, mf, eps, xr):
                cands.append(xr)
                continue
        if im >= st.real_threshold:
            max_imag = max(max_imag, float(np.max(np.abs(x.imag))))
    R = dedupe(sorted(cands, key=tuple), st.dedupe_tol)
    R = [x for x in R if is_sound_real_point(fw, mf, eps, x)]
    timings["classify"] = time.perf_counter() - t3

    unresolved = sum(1 for r in stage2 if r.status is Status.SINGULAR and r.winding_number == 0)
    failures = sum(1 for r in stage1 + stage2 if r.status is Status.STEP_FAILURE)
    v = failures == 0 and unresolved == 0 and jumped == 0
    stats = {"stage1": _status_counts(stage1), "stage2": _status_counts(stage2),
             "path_jumps": jumped}
    return EpsRigidityReport(u=not R, v=v, R=R, eps=float(eps), seed=int(seed), path_stats=stats,
                             n_paths=len(stage1), witness_degree=wdeg,
                             max_discarded_imag=max_imag, unresolved_paths=unresolved,
                             timings=timings)


# -- discrete flexes -----------------------------------------------------------------------


@dataclass(frozen=True)
class Termination:
    kind: str  # Completed, EpsLocallyRigidAt, NoRealSolutionsAt or VerdictWithheld
    eps: float | None = None

    def __str__(self):
        return self.kind if self.eps is None else f"{self.kind}({self.eps:g})"


@dataclass
class DiscreteFlex:
    points: list
    eps_schedule: list
    terminated_reason: Termination
    frame: MovingFrame
    reports: list = field(default_factory=list)

    def configurations(self) -> np.ndarray:
        """Points lifted back to ``n*d`` coordinates in the original frame."""
        return lift(self.frame, np.array(self.points))

    def to_dict(self) -> dict:
        return {
            "terminated_reason": str(self.terminated_reason),
            "eps_schedule": list(map(float, self.eps_schedule)),
            "points": [list(map(float, p)) for p in self.points],
            "configurations": self.configurations().tolist(),
        }


def _nearest(points, ref, tol):
    d = np.array([np.linalg.norm(p - ref) for p in points])
    close = [p for p, dist in zip(points, d) if dist <= d.min() + tol]
    return min(close, key=tuple)


def discrete_flex(fw: Framework, eps0: float, M: int, seed: int = 0,
                  settings: TrackerSettings | None = None) -> DiscreteFlex:
    """Walk outward on spheres of radius ``j * eps0``, taking the nearest real point each time."""
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    st = settings or TrackerSettings()
    mf = moving_frame(fw)
    points = [np.array(mf.reduced_config, dtype=float)]
    sched, reports = [0.0], []
    for j in range(1, M + 1):
        eps = j * eps0
        rep = eps_local_rigidity(fw, eps, seed, st, witness=False)
        reports.append(rep)
        if not rep.v:
            return DiscreteFlex(points, sched, Termination("VerdictWithheld", eps), mf, reports)
        if rep.u:
            return DiscreteFlex(points, sched, Termination("EpsLocallyRigidAt", eps), mf, reports)
        points.append(_nearest(rep.R, points[-1], st.dedupe_tol))
        sched.append(eps)
    return DiscreteFlex(points, sched, Termination("Completed"), mf, reports)


class _OffsetFamily:
    """Real family ``[g(x); vhat . (x - p0) - c]`` with one parameter ``c``."""

    real = True

    def __init__(self, fw: Framework, mf: MovingFrame, vhat: np.ndarray):
        self.edges = EdgeModel(fw, mf)
        self.vhat = vhat
        self.p_hat = np.asarray(mf.reduced_config, dtype=float)
        self.nvars = mf.N
        self.neqs = fw.m + 1

    def evaluate(self, x, params):
        g, Jg = self.edges.evaluate(x)
        P = x.shape[0]
        F = np.concatenate([g, ((x - self.p_hat) @ self.vhat - params[:, 0])[:, None]], axis=1)
        J = np.concatenate([Jg, np.broadcast_to(self.vhat, (P, 1, self.nvars)).astype(x.dtype)], axis=1)
        Fp = np.zeros((P, self.neqs, 1), dtype=F.dtype)
        Fp[:, -1, 0] = -1
        return F, J, Fp


def flex_param_homotopy(fw: Framework, v_flex, eps0: float, M: int,
                        settings: TrackerSettings | None = None, *,
                        residual_tol: float | None = None) -> DiscreteFlex:
    """Push ``p0`` along a flex direction with real parameter homotopies.

    Step ``j`` moves the offset along the unit reduced direction from
    ``(j-1)*eps0`` to ``j*eps0`` while keeping the member constraints.  When
    there are more equations than unknowns each point is a Gauss-Newton
    (least-squares) point; ``residual_tol`` additionally stops the walk once
    the member residual exceeds it.
    """
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    st = settings or TrackerSettings()
    mf = moving_frame(fw)
    v = np.asarray(v_flex, dtype=float).reshape(-1)
    if v.shape != (fw.n * fw.d,):
        raise DimensionError(f"direction has length {v.size}, expected {fw.n * fw.d}")
    dg = rigidity_matrix(fw)
    if np.linalg.norm(dg @ v) > 1e-6 * max(1.0, np.linalg.norm(dg)) * np.linalg.norm(v):
        warnings.warn("direction is not an infinitesimal flex; expect no real solutions",
                      stacklevel=2)
    vhat = project_velocity(fw, mf, v)
    nv = np.linalg.norm(vhat)
    if nv < 1e-12 * max(1.0, np.linalg.norm(v)):
        raise DegenerateDirection("direction is a rigid motion and vanishes in the moving frame")
    vhat = vhat / nv
    family = _OffsetFamily(fw, mf, vhat)
    if family.neqs < family.nvars:
        raise DimensionError("more than one flex direction is free; the offset system is underdetermined")
    over = family.neqs > family.nvars
    points = [np.array(mf.reduced_config, dtype=float)]
    sched = [0.0]
    for j in range(1, M + 1):
        c0, c1 = (j - 1) * eps0, j * eps0
        res = parameter_track(family, points[-1], [c0], [c1], st, overdetermined=over)
        x = res.endpoint
        stop = res.status is not Status.SUCCESS or not np.all(np.isfinite(x)) or \
            realness(np.asarray(x, dtype=complex)) >= st.real_threshold
        if not stop and residual_tol is not None:
            g, _ = family.edges.evaluate(np.real(x)[None, :])
            stop = np.max(np.abs(g)) > residual_tol
        if stop:
            return DiscreteFlex(points, sched, Termination("NoRealSolutionsAt", c1), mf)
        points.append(np.real(x).astype(float))
        sched.append(c1)
    return DiscreteFlex(points, sched, Termination("Completed"), mf)


def flex_direction(fw: Framework, index: int = 0, tol: float = numlin.DEFAULT_RANK_TOL) -> np.ndarray:
    """The ``index``-th basis vector of the infinitesimal flexes at ``p0``."""
    fb = infinitesimal_flexes(fw, tol)
    if not 0 <= index < fb.flexes.shape[0]:
        raise IndexError(f"flex index {index} out of range; dim F = {fb.flexes.shape[0]}")
    return fb.flexes[index]
