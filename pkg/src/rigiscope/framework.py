"""Bar frameworks, their member constraints, and the moving-frame reduction.

Node and edge indices are 0-based in the Python API; the JSON file format
and all user-facing reports use 1-based labels.

The moving frame applies a rigid motion so that node ``i`` (for the first
``d`` nodes of a chosen ordering) has coordinates ``k >= i`` equal to zero.
Those ``C(d+1, 2)`` coordinates are dropped, leaving ``N = nd - C(d+1, 2)``
free coordinates in which rigid motions are quotiented out.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import numlin
from .errors import DegenerateDirection, DegenerateSpan, DimensionError, RankTolAmbiguous, ValidationError
from .polycore import Polynomial, PolySystem, sum_of_squares

SPAN_TOL = 1e-10


def _affine_rank(points: np.ndarray, tol: float = SPAN_TOL) -> int:
    if len(points) <= 1:
        return 0
    diffs = points[1:] - points[0]
    s = np.linalg.svd(diffs, compute_uv=False)
    scale = max(1.0, float(np.abs(points).max()))
    return int(np.sum(s > tol * scale))


class Framework:
    """A graph with an initial configuration ``p0`` in ``R^d``.

    Parameters
    ----------
    nodes : array_like, shape (n, d)
        Initial node positions.
    edges : iterable of pairs
        0-based node index pairs; stored sorted as ``(i, j)`` with ``i < j``
        in input order.
    validate : bool
        Check the graph invariants (no loops or repeated edges, connected,
        ``d``-dimensional affine span).  Coincident nodes and zero-length
        edges are allowed.
    """

    def __init__(self, nodes, edges, *, validate: bool = True, name: str | None = None):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] < 1:
            raise ValidationError(f"nodes must be an (n, d) array, got shape {nodes.shape}")
        nodes.setflags(write=False)
        self.nodes = nodes
        self.edges = tuple((min(int(i), int(j)), max(int(i), int(j))) for i, j in edges)
        self.name = name
        if validate:
            self.validate()

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def d(self) -> int:
        return self.nodes.shape[1]

    dimension = d

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def N(self) -> int:
        return self.n * self.d - comb(self.d + 1, 2)

    @property
    def p0(self) -> np.ndarray:
        return self.nodes.reshape(-1)

    def validate(self) -> None:
        n = self.n
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValidationError(f"self-loop on node {i + 1}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edge {{{i + 1},{j + 1}}} references a missing node")
            if (i, j) in seen:
                raise ValidationError(f"repeated edge {{{i + 1},{j + 1}}}")
            seen.add((i, j))
        if not np.all(np.isfinite(self.nodes)):
            raise ValidationError("node coordinates must be finite")
        # connectivity by union-find
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in self.edges:
            parent[find(i)] = find(j)
        if len({find(a) for a in range(n)}) != 1:
            raise ValidationError("graph is not connected")
        if _affine_rank(self.nodes) != self.d:
            raise ValidationError(f"affine span of the nodes is not {self.d}-dimensional")

    def edge_lengths_sq(self, config=None) -> np.ndarray:
        X = self.nodes if config is None else np.asarray(config).reshape(self.n, self.d)
        I = [i for i, _ in self.edges]
        J = [j for _, j in self.edges]
        return np.sum((X[I] - X[J]) ** 2, axis=1)

    def relabeled(self, perm) -> Framework:
        """Framework with node ``perm[k]`` becoming node ``k``."""
        perm = list(perm)
        inv = {old: new for new, old in enumerate(perm)}
        return Framework(self.nodes[perm], [(inv[i], inv[j]) for i, j in self.edges],
                         name=self.name)

    def moved(self, rotation, translation) -> Framework:
        X = self.nodes @ np.asarray(rotation).T + np.asarray(translation)
        return Framework(X, self.edges, validate=False, name=self.name)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Framework{label} n={self.n} m={self.m} d={self.d}>"


# -- member constraints --------------------------------------------------------


def _edge_poly(vars_i, vars_j, length_sq, nvars):
    g = Polynomial.constant(-length_sq, nvars)
    for a, b in zip(vars_i, vars_j):
        diff = a - b
        g = g + diff * diff
    return g


def build_member_constraints(fw: Framework) -> PolySystem:
    """One quadratic per edge in ``n*d`` variables ordered node by node."""
    nv = fw.n * fw.d
    X = [[Polynomial.variable(i * fw.d + k, nv) for k in range(fw.d)] for i in range(fw.n)]
    lsq = fw.edge_lengths_sq()
    polys = [_edge_poly(X[i], X[j], lsq[l], nv) for l, (i, j) in enumerate(fw.edges)]
    return PolySystem(polys, nv)


def rigidity_matrix(fw: Framework, config=None) -> np.ndarray:
    """Jacobian of the member constraints at ``config`` (default ``p0``)."""
    X = fw.nodes if config is None else np.asarray(config, dtype=float).reshape(fw.n, fw.d)
    d = fw.d
    R = np.zeros((fw.m, fw.n * d))
    for l, (i, j) in enumerate(fw.edges):
        diff = X[i] - X[j]
        R[l, i * d:(i + 1) * d] = 2 * diff
        R[l, j * d:(j + 1) * d] = -2 * diff
    return R


def rigid_motion_basis(fw: Framework) -> np.ndarray:
    """Infinitesimal rigid motions at ``p0``, shape ``(C(d+1,2), n*d)``.

    The first ``d`` rows are translations, the rest rotations in the
    ``(k, l)`` coordinate planes.
    """
    n, d = fw.n, fw.d
    P = fw.nodes
    rows = []
    for k in range(d):
        v = np.zeros((n, d))
        v[:, k] = 1.0
        rows.append(v.ravel())
    for k in range(d):
        for l in range(k + 1, d):
            v = np.zeros((n, d))
            v[:, k] = -P[:, l]
            v[:, l] = P[:, k]
            rows.append(v.ravel())
    return np.array(rows).reshape(len(rows), n * d)


@dataclass(frozen=True)
class FlexBasis:
    rigid_motions: np.ndarray  # (C(d+1,2), nd)
    flexes: np.ndarray  # (k, nd), orthonormal, orthogonal to the rigid motions
    tolerance: float
    rank: int
    singular_values: np.ndarray

    @property
    def infinitesimally_rigid(self) -> bool:
        return self.flexes.shape[0] == 0


def infinitesimal_flexes(fw: Framework, tol: float = numlin.DEFAULT_RANK_TOL) -> FlexBasis:
    """Split ``Null(dg|p0)`` into rigid motions and infinitesimal flexes.

    Raises :class:`RankTolAmbiguous` when a singular value lies within a
    factor 10 of the cutoff ``tol * sigma_max``.
    """
    R = rigidity_matrix(fw)
    ns = numlin.nullspace(R, tol)
    s = ns.singular_values
    cut = tol * (s[0] if s.size else 0.0)
    near = s[(s > cut / 10) & (s < cut * 10)]
    if near.size:
        raise RankTolAmbiguous(
            f"singular value {near[0]:.3e} within a factor 10 of the cutoff {cut:.3e}")
    RM = rigid_motion_basis(fw)
    Q, _ = np.linalg.qr(RM.T)
    N = ns.basis.real
    comp = N - Q @ (Q.T @ N)
    if comp.shape[1]:
        U, sv, _ = np.linalg.svd(comp, full_matrices=False)
        flexes = U[:, sv > 1e-6].T
    else:
        flexes = np.zeros((0, fw.n * fw.d))
    flexes = np.array([_canonical_sign(f) for f in flexes]).reshape(-1, fw.n * fw.d)
    return FlexBasis(RM, flexes, tol, ns.rank, s)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so that its largest-magnitude entry is positive."""
    k = int(np.argmax(np.abs(v) - 1e-9 * np.arange(v.size)))
    return -v if v[k] < 0 else v


# -- moving frame ----------------------------------------------------------------


@dataclass(frozen=True)
class MovingFrame:
    """Rigid change of coordinates pinning ``C(d+1,2)`` coordinates to zero.

    The motion maps an original node position ``p`` to ``rotation @ p +
    translation``.  ``node_order[k]`` is the original index of the node placed
    in slot ``k``.  Reduced vectors list the free coordinates of the reordered
    nodes, node by node.
    """

    n: int
    d: int
    node_order: tuple
    rotation: np.ndarray
    translation: np.ndarray
    free_indices: np.ndarray  # flat indices into the reordered (n*d) layout
    dropped_indices: tuple  # (slot, coordinate) pairs that are pinned to zero
    reduced_config: np.ndarray
    framed_config: np.ndarray  # (n, d) in reordered slots

    @property
    def N(self) -> int:
        return len(self.free_indices)

    def scatter(self, xhat) -> np.ndarray:
        """Reduced ``(..., N)`` vectors to full reordered ``(..., n*d)`` with zeros inserted."""
        xhat = np.asarray(xhat)
        out = np.zeros(xhat.shape[:-1] + (self.n * self.d,), dtype=xhat.dtype)
        out[..., self.free_indices] = xhat
        return out


def moving_frame(fw: Framework) -> MovingFrame:
    """Choose a node ordering and rigid motion putting ``p0`` in frame position."""
    n, d = fw.n, fw.d
    P = fw.nodes
    chosen = [0]
    for k in range(1, n):
        if len(chosen) == d:
            break
        if _affine_rank(P[chosen + [k]]) > _affine_rank(P[chosen]):
            chosen.append(k)
    if len(chosen) < d or _affine_rank(P[chosen]) != d - 1:
        raise DegenerateSpan(f"no {d} nodes with a {d - 1}-dimensional affine span")
    order = chosen + [k for k in range(n) if k not in chosen]

    base = P[order[0]]
    D = (P[order[1:d]] - base).T  # (d, d-1)
    if d > 1:
        Q, Rq = np.linalg.qr(D, mode="complete")
        for j in range(d - 1):
            if Rq[j, j] < 0:
                Q[:, j] = -Q[:, j]
        rotation = Q.T.copy()
    else:
        rotation = np.eye(1)
    if np.linalg.det(rotation) < 0:
        rotation[-1] = -rotation[-1]
    translation = -rotation @ base

    framed = (P[order] - base) @ rotation.T
    dropped = tuple((i, k) for i in range(d) for k in range(i, d))
    for i, k in dropped:
        framed[i, k] = 0.0
    dropped_flat = {i * d + k for i, k in dropped}
    free = np.array([f for f in range(n * d) if f not in dropped_flat], dtype=np.intp)
    framed.setflags(write=False)
    reduced = framed.reshape(-1)[free].copy()
    reduced.setflags(write=False)
    return MovingFrame(n, d, tuple(order), rotation, translation, free, dropped,
                       reduced, framed)


def lift(mf: MovingFrame, xhat) -> np.ndarray:
    """Reduced coordinates to an ``n*d`` configuration in the original frame."""
    xhat = np.asarray(xhat)
    if xhat.shape[-1] != mf.N:
        raise DimensionError(f"reduced vector has length {xhat.shape[-1]}, expected {mf.N}")
    framed = mf.scatter(xhat).reshape(xhat.shape[:-1] + (mf.n, mf.d))
    # invert p -> R p + t
    orig_slots = (framed - mf.translation) @ mf.rotation
    out = np.empty_like(orig_slots)
    out[..., list(mf.node_order), :] = orig_slots
    return out.reshape(xhat.shape[:-1] + (mf.n * mf.d,))


def project(mf: MovingFrame, x) -> np.ndarray:
    """Apply the frame's rigid motion to ``x`` and keep the free coordinates."""
    x = np.asarray(x)
    if x.shape[-1] != mf.n * mf.d:
        raise DimensionError(f"configuration has length {x.shape[-1]}, expected {mf.n * mf.d}")
    X = x.reshape(x.shape[:-1] + (mf.n, mf.d))[..., list(mf.node_order), :]
    framed = X @ mf.rotation.T + mf.translation
    return framed.reshape(x.shape[:-1] + (mf.n * mf.d,))[..., mf.free_indices]


def project_velocity(fw: Framework, mf: MovingFrame, v) -> np.ndarray:
    """Reduced representative of an infinitesimal motion ``v`` at ``p0``.

    Adds the infinitesimal rigid motion that zeroes the pinned slots, then
    rotates into the frame and drops them.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (fw.n * fw.d,):
        raise DimensionError(f"velocity has shape {v.shape}, expected ({fw.n * fw.d},)")
    d = fw.d
    order = list(mf.node_order)

    def rotate(w):
        return (w.reshape(fw.n, d)[order] @ mf.rotation.T).reshape(-1)

    pinned = [i * d + k for i, k in mf.dropped_indices]
    RM = rigid_motion_basis(fw)
    A = np.array([rotate(r)[pinned] for r in RM]).T
    c = np.linalg.solve(A, -rotate(v)[pinned])
    w = rotate(v + c @ RM)
    return w[mf.free_indices]


def build_moving_frame_constraints(fw: Framework, mf: MovingFrame) -> PolySystem:
    """Member constraints in the ``N`` free coordinates of the moving frame."""
    N, d = mf.N, fw.d
    slot_of = {orig: slot for slot, orig in enumerate(mf.node_order)}
    var_at = {int(f): k for k, f in enumerate(mf.free_indices)}

    def coord(slot, k):
        f = slot * d + k
        if f in var_at:
            return Polynomial.variable(var_at[f], N)
        return Polynomial.zero(N)

    lsq = fw.edge_lengths_sq()
    polys = []
    for l, (i, j) in enumerate(fw.edges):
        si, sj = slot_of[i], slot_of[j]
        polys.append(_edge_poly([coord(si, k) for k in range(d)],
                                [coord(sj, k) for k in range(d)], lsq[l], N))
    return PolySystem(polys, N)


def sphere_polynomial(mf: MovingFrame, eps: float) -> Polynomial:
    """``eps^2 - sum_k (x_k - phat_k)^2`` over the free coordinates."""
    N = mf.N
    s = Polynomial.constant(eps ** 2, N)
    for k in range(N):
        diff = Polynomial.variable(k, N) - float(mf.reduced_config[k])
        s = s - diff * diff
    return s


def build_epsilon_system(fw: Framework, mf: MovingFrame, eps: float) -> Polynomial:
    """The quartic ``sum(ghat_i^2) + s_eps^2`` whose real zeros lie on the eps-sphere."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    ghat = build_moving_frame_constraints(fw, mf)
    return sum_of_squares(list(ghat.polys) + [sphere_polynomial(mf, eps)])


class EdgeModel:
    """Vectorized member constraints in reduced coordinates.

    Evaluates ``ghat`` and its Jacobian for a batch of (complex) reduced
    points directly from edge geometry, avoiding expanded polynomials.
    """

    def __init__(self, fw: Framework, mf: MovingFrame):
        self.fw, self.mf = fw, mf
        d = fw.d
        slot_of = {orig: slot for slot, orig in enumerate(mf.node_order)}
        self.I = np.array([slot_of[i] for i, _ in fw.edges], dtype=np.intp)
        self.J = np.array([slot_of[j] for _, j in fw.edges], dtype=np.intp)
        self.lsq = fw.edge_lengths_sq()
        self.N, self.m = mf.N, fw.m
        # d(g_l)/d(full coord) is 2*diff at slot I, -2*diff at slot J
        full_to_free = -np.ones(fw.n * d, dtype=np.intp)
        full_to_free[mf.free_indices] = np.arange(mf.N)
        self._colI = full_to_free[(self.I[:, None] * d + np.arange(d))]
        self._colJ = full_to_free[(self.J[:, None] * d + np.arange(d))]
        # constant Hessians of each g_l in free coordinates
        H = np.zeros((self.m, self.N, self.N))
        for l in range(self.m):
            for k in range(d):
                a, b = self._colI[l, k], self._colJ[l, k]
                for u, su in ((a, 1), (b, -1)):
                    for w, sw in ((a, 1), (b, -1)):
                        if u >= 0 and w >= 0:
                            H[l, u, w] += 2 * su * sw
        self.hessians = H

    def nodes(self, x: np.ndarray) -> np.ndarray:
        return self.mf.scatter(x).reshape(x.shape[:-1] + (self.mf.n, self.mf.d))

    def evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``g`` with shape ``(P, m)`` and Jacobian ``(P, m, N)``."""
        X = self.nodes(x)
        diff = X[:, self.I, :] - X[:, self.J, :]
        g = np.sum(diff * diff, axis=2) - self.lsq
        P = x.shape[0]
        Jg = np.zeros((P, self.m, self.N + 1), dtype=x.dtype)  # last column absorbs pinned slots
        rows = np.arange(self.m)[:, None]
        colI = np.where(self._colI >= 0, self._colI, self.N)
        colJ = np.where(self._colJ >= 0, self._colJ, self.N)
        # slots I and J differ, so only the absorber column can collide
        Jg[:, rows, colI] = 2 * diff
        Jg[:, rows, colJ] = -2 * diff
        return g, Jg[:, :, :self.N]
