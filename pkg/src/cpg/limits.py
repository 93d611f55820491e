"""Numeric experiments on limits of automorphism sequences and of transformed domains."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.ndimage import binary_dilation, distance_transform_edt
from scipy.optimize import linprog, minimize

from cpg.domains import EPS, ConvexDomain, DomainError, FaceDescriptor, Membership
from cpg.projective import (
    ProjectiveError,
    ProjectiveMap,
    ProjectiveSubspace,
    kernel_and_range,
    limit_of_sequence,
    normalize_matrix,
)

log = logging.getLogger(__name__)

PRESERVE_SAMPLES = 32
SUBSPACE_TOL = 1e-7


def _raw(seq, steps: int) -> list[np.ndarray]:
    items = [seq(k) for k in range(1, steps + 1)] if callable(seq) else [m for _, m in zip(range(steps), seq)]
    if len(items) < steps:
        raise ProjectiveError(f"sequence yielded {len(items)} maps, {steps} required")
    return [np.asarray(m.matrix if isinstance(m, ProjectiveMap) else m, dtype=float) for m in items]


def _materialize(seq, steps: int) -> list[np.ndarray]:
    return [normalize_matrix(M) for M in _raw(seq, steps)]


def _push(M: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Homogeneous images of affine points (rows)."""
    return np.hstack([X, np.ones((X.shape[0], 1))]) @ M.T


def _affine(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Affine coordinates of homogeneous rows, and a mask of rows that are finite."""
    w = Y[:, -1]
    out = np.full((Y.shape[0], Y.shape[1] - 1), np.nan)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        A = Y[:, :-1] / w[:, None]
    finite = (w != 0) & np.all(np.isfinite(A), axis=1)
    out[finite] = A[finite]
    return out, finite


def check_sequence_preserves(D: ConvexDomain, mats: list[np.ndarray], samples: int = PRESERVE_SAMPLES, seed: int = 0) -> None:
    """Raise naming the first map that sends a sampled interior point outside D."""
    rng = np.random.default_rng(seed)
    X = D.sample_interior(rng, samples)
    for k, M in enumerate(mats, start=1):
        Y, finite = _affine(_push(M, X))
        for x, y, ok in zip(X, Y, finite):
            # images may be tiny; floats are rationals, so test them exactly where D allows
            if not ok or D.contains([Fraction(float(v)) for v in y]) != Membership.INTERIOR:
                raise DomainError(f"map g_{k} does not preserve the domain (sample point {x.tolist()})")


def _chordal(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Distance between projective points given by rows: min |u' -+ v'| over unit representatives."""
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return np.minimum(np.linalg.norm(u - v, axis=-1), np.linalg.norm(u + v, axis=-1))


# ---------------------------------------------------------------------------
# subspaces against the domain


@dataclass
class SubspaceVerdict:
    """How a projective subspace sits relative to D in the affine chart."""

    meets_interior: bool
    affine_dim: int  # -1 when the subspace lies at infinity
    probes: int
    boundary_points: int
    supporting: bool
    witness: list | None = None  # an interior point on the subspace, if found

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _lp_meets(D: ConvexDomain, p: np.ndarray, B: np.ndarray) -> np.ndarray | None:
    """Interior point of a polyhedral D on p + span(B), by maximizing the uniform slack."""
    P = D.as_hpoly()
    if P.m == 0:
        return p
    A, b = P._Af, P._bf
    k = B.shape[0]
    # variables (lambda, s): A (p + B^T lambda) + s |a_i| <= b, s <= 1
    Aub = np.hstack([A @ B.T, P._rownorm[:, None]]) if k else P._rownorm[:, None]
    res = linprog(np.append(np.zeros(k), -1.0), A_ub=Aub, b_ub=b - A @ p, bounds=[(None, None)] * k + [(None, 1.0)], method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    x = p + (B.T @ res.x[:k] if k else 0.0)
    return x if D.contains(x) == Membership.INTERIOR else None


def _face_in(face: FaceDescriptor, S: ProjectiveSubspace, tol: float) -> bool:
    rows = face.support.basis.astype(float)
    B = S.basis.astype(float)
    Q, _ = np.linalg.qr(B.T)
    for v in rows:
        v = v / np.linalg.norm(v)
        if np.linalg.norm(v - Q @ (Q.T @ v)) > tol:
            return False
    return True


def subspace_verdict(D: ConvexDomain, S: ProjectiveSubspace, probes: np.ndarray, polish: int = 8) -> SubspaceVerdict:
    """Interior-intersection probes on S, then the supporting-subspace test.

    Probes are orthogonal projections of interior points onto S ∩ R^n; the
    best few are polished by minimizing the membership value along S. For
    polyhedral D a slack LP decides the interior question exactly. Every
    boundary point found on S must have its face contained in S.
    """
    part = None if S.is_empty() else S.affine_part()
    if part is None:
        return SubspaceVerdict(False, -1, 0, 0, True)
    p, dirs = part
    Q = np.linalg.qr(dirs.T)[0].T if dirs.shape[0] else np.zeros((0, D.n))
    P = p + (probes - p) @ Q.T @ Q if Q.shape[0] else np.tile(p, (probes.shape[0], 1))
    g = D.values(P)
    hit = np.flatnonzero(g < -EPS)
    witness = P[hit[0]] if hit.size else None
    if witness is None and D.as_hpoly() is not None:
        witness = _lp_meets(D, p, Q)
    candidates = [P[i] for i in np.argsort(g)[:polish]]
    if witness is None and Q.shape[0]:
        f = lambda lam: D.value(p + Q.T @ lam)
        polished = []
        for c in candidates:
            res = minimize(f, Q @ (c - p), method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
            x = p + Q.T @ res.x
            if D.value(x) < -EPS:
                witness = x
                break
            polished.append(x)
        candidates += polished
    if witness is not None:
        return SubspaceVerdict(True, Q.shape[0], probes.shape[0], 0, False, [float(v) for v in witness])
    found = supporting = 0
    for x in candidates:
        if D.contains(x) != Membership.BOUNDARY:
            continue
        found += 1
        if _face_in(D.face_of(x), S, SUBSPACE_TOL):
            supporting += 1
    return SubspaceVerdict(False, Q.shape[0], probes.shape[0], found, supporting == found)


# ---------------------------------------------------------------------------
# limits of automorphisms


@dataclass
class OrbitTrace:
    probe: list
    limit_point: list | None  # affine limit, None when it lies at infinity or in K
    distances: list  # chordal distance of g_k x to the limit point, k = 1..steps
    face: FaceDescriptor | None = None  # face of D through an affine boundary limit
    face_matches_R: bool | None = None

    def to_json(self) -> dict:
        return {
            "probe": self.probe,
            "limit_point": self.limit_point,
            "final_distance": self.distances[-1] if self.distances else None,
            "face": self.face.to_json() if self.face is not None else None,
            "face_matches_R": self.face_matches_R,
        }


@dataclass
class LimitReport:
    limit_map: ProjectiveMap
    converged: bool
    K: ProjectiveSubspace
    R: ProjectiveSubspace
    K_meets_interior: bool
    R_meets_interior: bool
    R_face: FaceDescriptor | None
    orbit_trace: list = field(default_factory=list)
    K_verdict: SubspaceVerdict | None = None
    R_verdict: SubspaceVerdict | None = None
    steps: int = 0
    last_change: float = 0.0

    @property
    def singular(self) -> bool:
        return self.limit_map.is_singular()

    @property
    def consistent(self) -> bool:
        """At the probes: K and R miss the interior and are supporting subspaces of D."""
        if not (self.converged and self.singular):
            return True
        faces_ok = all(t.face_matches_R is not False for t in self.orbit_trace)
        return (
            not self.K_meets_interior
            and not self.R_meets_interior
            and self.K_verdict.supporting
            and self.R_verdict.supporting
            and faces_ok
        )

    def to_json(self, traces: int = 10) -> dict:
        sub = lambda S: {"dim": S.dim, "basis": np.asarray(S.basis, dtype=float).tolist()}
        return {
            "limit_map": np.asarray(self.limit_map.matrix, dtype=float).tolist(),
            "rank": self.limit_map.rank,
            "converged": self.converged,
            "singular": self.singular,
            "steps": self.steps,
            "last_change": self.last_change,
            "K": sub(self.K),
            "R": sub(self.R),
            "K_meets_interior": self.K_meets_interior,
            "R_meets_interior": self.R_meets_interior,
            "K_test": self.K_verdict.to_json() if self.K_verdict else None,
            "R_test": self.R_verdict.to_json() if self.R_verdict else None,
            "R_face": self.R_face.to_json() if self.R_face is not None else None,
            "consistent": self.consistent,
            "orbit_trace": [t.to_json() for t in self.orbit_trace[:traces]],
        }


def _probe_points(D: ConvexDomain, probes, seed: int) -> np.ndarray:
    if probes is None or isinstance(probes, (int, np.integer)):
        count = 1000 if probes is None else int(probes)
        return D.sample_interior(np.random.default_rng(seed), count)
    X = np.asarray(probes, dtype=float).reshape(-1, D.n)
    if np.any(D.contains_many(X) != 0):
        raise DomainError("probes must be interior points")
    return X


def _orbits(D: ConvexDomain, mats, f: ProjectiveMap, R: ProjectiveSubspace, X: np.ndarray, traced: int) -> list[OrbitTrace]:
    F = f.matrix.astype(float)
    H = np.hstack([X, np.ones((X.shape[0], 1))])
    limits = H @ F.T
    scale = np.linalg.norm(limits, axis=1) / np.linalg.norm(H, axis=1)
    in_kernel = scale <= 1e-9
    dist = np.array([_chordal(H @ M.T, limits) for M in mats]).T  # probes x steps
    aff, finite = _affine(limits)
    out = []
    for i in range(min(traced, X.shape[0])):
        lp = None if in_kernel[i] or not finite[i] else aff[i]
        face = match = None
        if lp is not None and f.is_singular() and D.contains(lp) == Membership.BOUNDARY:
            face = D.face_of(lp)
            match = face.dim == R.dim and _face_in(face, R, SUBSPACE_TOL)
        out.append(
            OrbitTrace(
                X[i].tolist(),
                None if lp is None else lp.tolist(),
                [float(v) for v in dist[i]],
                face,
                match,
            )
        )
    return out


def analyze_limit(D: ConvexDomain, seq, steps: int = 60, probes=None, seed: int = 0, traced: int = 32, tol: float = 1e-9) -> LimitReport:
    """Singular-limit analysis of a sequence of automorphisms of D.

    Each map is checked to preserve D on sampled interior points. The
    normalized limit f is computed; when it is singular, K(f) and R(f) are
    tested against D with the probe points (1000 interior samples unless
    given), and probe orbits that converge to an affine boundary point p
    report the face through p and whether its support equals R(f).
    """
    mats = _materialize(seq, steps)
    check_sequence_preserves(D, mats, PRESERVE_SAMPLES, seed)
    lim = limit_of_sequence(mats, steps, tol=tol)
    f = lim.map
    X = _probe_points(D, probes, seed)
    if not (lim.converged and f.is_singular()):
        empty = ProjectiveSubspace.empty(D.n)
        K, R = (empty, empty) if not f.is_singular() else kernel_and_range(f)
        trace = _orbits(D, mats, f, R, X, traced)
        return LimitReport(f, lim.converged, K, R, False, False, None, trace, None, None, steps, lim.last_change)
    K, R = kernel_and_range(f)
    kv = subspace_verdict(D, K, X)
    rv = subspace_verdict(D, R, X)
    trace = _orbits(D, mats, f, R, X, traced)
    face = next((t.face for t in trace if t.face is not None), None)
    return LimitReport(f, True, K, R, kv.meets_interior, rv.meets_interior, face, trace, kv, rv, steps, lim.last_change)


@dataclass
class KernelVerdict:
    verdict: str  # "vacuous", "holds", "violated", "inconclusive"
    reason: str
    limit_map: ProjectiveMap
    K: ProjectiveSubspace
    R: ProjectiveSubspace

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "limit_map": np.asarray(self.limit_map.matrix, dtype=float).tolist(),
            "K_dim": self.K.dim,
            "R_dim": self.R.dim,
        }


def affine_kernel_check(seq, steps: int = 60, tol: float = 1e-9) -> KernelVerdict:
    """For limits of affine maps: if R(f) meets R^n then K(f) lies at infinity."""
    raw = _raw(seq, steps)
    for k, M in enumerate(raw, start=1):
        if np.any(M[-1, :-1] != 0) or M[-1, -1] == 0:
            raise DomainError(f"map g_{k} is not affine (last row must be (0, ..., 0, c))")
    mats = [normalize_matrix(M) for M in raw]
    lim = limit_of_sequence(mats, steps, tol=tol)
    f = lim.map
    empty = ProjectiveSubspace.empty(f.n)
    if not lim.converged:
        return KernelVerdict("inconclusive", "sequence did not converge", f, empty, empty)
    if not f.is_singular():
        return KernelVerdict("vacuous", "limit is nonsingular", f, empty, empty)
    K, R = kernel_and_range(f)
    if R.at_infinity():
        return KernelVerdict("vacuous", "R(f) lies in the hyperplane at infinity", f, K, R)
    if K.at_infinity():
        return KernelVerdict("holds", "R(f) meets R^n and K(f) lies at infinity", f, K, R)
    return KernelVerdict("violated", "R(f) meets R^n but K(f) has affine points", f, K, R)


# ---------------------------------------------------------------------------
# limits of transformed domains


@dataclass(frozen=True)
class Chart:
    """Axis-aligned box in R^n with a grid of `resolution` cells per axis."""

    lo: tuple
    hi: tuple
    resolution: int

    @classmethod
    def default(cls, n: int, half_width: float = 1.5) -> Chart:
        return cls((-half_width,) * n, (half_width,) * n, 512 if n == 2 else 64)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def spacing(self) -> np.ndarray:
        return (np.asarray(self.hi, float) - np.asarray(self.lo, float)) / self.resolution

    def contains(self, Y: np.ndarray) -> bool:
        return bool(np.all(Y >= np.asarray(self.lo)) and np.all(Y <= np.asarray(self.hi)))

    def cell(self, Y: np.ndarray) -> np.ndarray:
        idx = np.floor((Y - np.asarray(self.lo)) / self.spacing).astype(int)
        return np.clip(idx, 0, self.resolution - 1)

    def centers(self, axis: int) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.resolution) + 0.5) * self.spacing[axis]


def _boundary_rays(D: ConvexDomain, count: int) -> np.ndarray:
    """Homogeneous boundary points of the closure, one per direction from the witness.

    Directions are equally spaced (2D) or on a Fibonacci sphere (3D); an
    infinite exit contributes the point at infinity in that direction.
    """
    n = D.n
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        U = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5**0.5) * i
        U = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    w = np.asarray(D.witness, dtype=float)
    T = D.exits(np.tile(w, (count, 1)), U)
    out = np.empty((count, n + 1))
    fin = np.isfinite(T)
    out[fin, :n] = w + T[fin, None] * U[fin]
    out[fin, n] = 1.0
    out[~fin, :n] = U[~fin]
    out[~fin, n] = 0.0
    return out


def _traced_cells(chart: Chart, Y: np.ndarray) -> np.ndarray:
    """Cells met by the pushed boundary: the closed polygon in 2D, the points in 3D."""
    mask = np.zeros((chart.resolution,) * chart.n, dtype=bool)
    if chart.n == 2:
        a, b = Y, np.roll(Y, -1, axis=0)
        counts = np.ceil(2 * np.linalg.norm((b - a) / chart.spacing, axis=1)).astype(int) + 1
        edge = np.repeat(np.arange(a.shape[0]), counts)
        start = np.cumsum(counts) - counts
        s = (np.arange(edge.size) - start[edge]) / (counts[edge] - 1).clip(min=1)
        Y = a[edge] + s[:, None] * (b[edge] - a[edge])
    idx = chart.cell(Y)
    mask[tuple(idx.T)] = True
    return mask


def _center_cells(chart: Chart, D: ConvexDomain, M: np.ndarray) -> np.ndarray:
    """Cells whose center lies in the closure of g D, tested through g^{-1}."""
    axes = [chart.centers(i) for i in range(chart.n)]
    C = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, chart.n)
    Z, finite = _affine(_push(np.linalg.inv(M), C))
    inside = np.zeros(C.shape[0], dtype=bool)
    inside[finite] = D.contains_many(Z[finite]) != 2
    return inside.reshape((chart.resolution,) * chart.n)


def hausdorff(A: np.ndarray, B: np.ndarray, spacing) -> float:
    """Hausdorff distance between two nonempty cell sets, measured between cell centers."""
    if not A.any() or not B.any():
        raise DomainError("empty intersection with chart")
    if np.array_equal(A, B):
        return 0.0
    dA = distance_transform_edt(~A, sampling=spacing)
    dB = distance_transform_edt(~B, sampling=spacing)
    return float(max(dA[B].max(), dB[A].max()))


@dataclass
class DomainLimit:
    limit_domain_estimate: np.ndarray  # boolean cell mask of the last rasterized image
    hausdorff_trace: list  # distance between successive rasterized images
    steps_used: list  # indices k of the rasterized images
    skipped: list  # (k, reason) for steps whose image left the chart
    chart: Chart
    converged: bool
    degenerate: bool
    estimated_dim: int
    boundary_points: np.ndarray = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "hausdorff_trace": self.hausdorff_trace,
            "steps_used": self.steps_used,
            "skipped": [{"k": k, "reason": r} for k, r in self.skipped],
            "chart": {"lo": list(self.chart.lo), "hi": list(self.chart.hi), "resolution": self.chart.resolution},
            "converged": self.converged,
            "degenerate": self.degenerate,
            "estimated_dim": self.estimated_dim,
            "cells": int(self.limit_domain_estimate.sum()),
        }


def _thread_count() -> int:
    try:
        cap = int(os.environ.get("CPG_NUM_THREADS", "0"))
    except ValueError:
        cap = 0
    return cap if cap > 0 else min(8, os.cpu_count() or 1)


def _rasterize(chart: Chart, D: ConvexDomain, H: np.ndarray, M: np.ndarray):
    """Cell mask of the closure of g D: centers in the set, plus traced cells of thin parts."""
    Y, finite = _affine(H @ M.T)
    if not finite.all() or not chart.contains(Y):
        return None, Y
    inner = _center_cells(chart, D, M)
    near = binary_dilation(inner, structure=np.ones((3,) * chart.n, dtype=bool))
    return inner | (_traced_cells(chart, Y) & ~near), Y


def _mask_dim(mask: np.ndarray, chart: Chart) -> int:
    """Number of principal directions along which the cell set is wider than two cells."""
    idx = np.argwhere(mask)
    pts = np.asarray(chart.lo) + (idx + 0.5) * chart.spacing
    if pts.shape[0] < 2:
        return 0
    sv = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False) / np.sqrt(pts.shape[0])
    # a uniform spread of width w has standard deviation w / sqrt(12)
    return int(np.sum(np.sqrt(12) * sv > 2 * float(np.max(chart.spacing))))


def domain_sequence_limit(D: ConvexDomain, seq, steps: int = 60, chart: Chart | None = None, rays: int | None = None, tail: int = 3) -> DomainLimit:
    """Hausdorff limit of g_k D estimated on a grid of the chart.

    The closure's boundary is sampled along rays from the witness and
    pushed through each g_k; images leaving the chart are skipped.
    Successive rasterized images are compared by Hausdorff distance; the
    trace converges when its last `tail` entries are within one cell
    diagonal. The limit is flagged degenerate when the final image is
    thinner than two cells in some direction.
    """
    if D.n not in (2, 3):
        raise DomainError("domain limits are rasterized in 2D or 3D charts only")
    chart = chart or Chart.default(D.n)
    if chart.n != D.n:
        raise DomainError("chart dimension does not match the domain")
    mats = _materialize(seq, steps)
    H = _boundary_rays(D, rays or (8 * chart.resolution if D.n == 2 else 24 * chart.resolution**2 // 16))
    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        results = list(pool.map(lambda M: _rasterize(chart, D, H, M), mats))
    masks, used, skipped, last_pts = [], [], [], None
    for k, (mask, Y) in enumerate(results, start=1):
        if mask is None:
            skipped.append((k, "image leaves the chart"))
            log.info("step %d skipped: image leaves the chart", k)
            continue
        if not mask.any():
            skipped.append((k, "empty intersection with chart"))
            continue
        masks.append(mask)
        used.append(k)
        last_pts = Y
    if not masks:
        raise DomainError("empty intersection with chart")
    trace = [hausdorff(a, b, chart.spacing) for a, b in zip(masks, masks[1:])]
    cell = float(np.linalg.norm(chart.spacing))
    converged = len(trace) >= tail and all(h <= cell for h in trace[-tail:])
    dim = _mask_dim(masks[-1], chart)
    return DomainLimit(masks[-1], trace, used, skipped, chart, converged, dim < D.n, dim, last_pts)


def raster(D: ConvexDomain, chart: Chart, rays: int | None = None) -> np.ndarray:
    """Cell mask of the closure of D (which must fit in the chart)."""
    H = _boundary_rays(D, rays or (8 * chart.resolution if D.n == 2 else 24 * chart.resolution**2 // 16))
    mask, _ = _rasterize(chart, D, H, np.eye(D.n + 1))
    if mask is None:
        raise DomainError("domain does not fit in the chart")
    return mask
