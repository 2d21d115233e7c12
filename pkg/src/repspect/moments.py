"""Invariant probability measures and their second-moment statistics.

The central statistic is the mean squared overlap E<x,y>^2 of two
independent draws from an invariant measure on the unit sphere of a
representation space.  It always satisfies E<x,y>^2 >= 1/n, with equality
for every invariant measure exactly when the representation is
irreducible; the estimators and exact finite-group sums here put numbers
on both sides of that statement.

Monte Carlo estimates are a deterministic function of (seed, worker
count, sample count): sampling is partitioned into per-worker substreams
and reduced in a fixed order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .commutant import reynolds_matrix, reynolds_matrix_mc
from .errors import (
    BadMeasureSpec,
    BadParams,
    IncompleteTable,
    NotDiscrete,
    NotSumZero,
    NotUnitVector,
    TooLarge,
    TraceNotOne,
)
from .groups import ContinuousFamily, FiniteGroupTable, GroupElement, haar_matrices, stream
from .representations import Representation

UNIT_TOL = 1e-10
PROB_SUM_TOL = 1e-12
DEFAULT_PAIRS = 100_000
PAIR_ENUMERATION_CAP = 100_000_000
FACTORIAL_GUARD = 8


@dataclass(frozen=True)
class MeasureSpec:
    """Description of an invariant probability measure on the unit sphere.

    kinds: ``orbit`` (push-forward of the group's invariant distribution
    through g -> rho(g) base), ``uniform_sphere``, ``uniform_subsphere``
    (uniform on the unit sphere of the column span of ``subspace``), and
    ``discrete`` (finitely many unit ``points`` with ``probs``).
    """

    kind: str
    base: np.ndarray | None = None
    subspace: np.ndarray | None = None
    points: np.ndarray | None = None
    probs: np.ndarray | None = None

    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class MomentEstimate:
    """A scalar moment with its sampling error; stderr is 0 when exact."""

    value: float
    stderr: float
    n_samples: int
    exact: bool


@dataclass
class SecondMomentMatrix:
    """Mean of x x^T with per-entry standard errors when sampled."""

    entries: np.ndarray
    n_samples: int
    exact: bool
    stderr: np.ndarray | None = None


def _check_unit(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > UNIT_TOL:
        raise NotUnitVector(f"{what} has norm {nrm!r}")
    return v


# ---------------------------------------------------------------------------
# measure constructors
# ---------------------------------------------------------------------------

def orbit_measure(base: np.ndarray) -> MeasureSpec:
    return MeasureSpec(kind="orbit", base=_check_unit(base, "orbit base"))


def uniform_sphere() -> MeasureSpec:
    return MeasureSpec(kind="uniform_sphere")


def uniform_subsphere(subspace: np.ndarray) -> MeasureSpec:
    w = np.atleast_2d(np.asarray(subspace, dtype=float))
    if w.shape[0] < w.shape[1]:
        raise BadMeasureSpec("subspace must have orthonormal columns (n x m, m <= n)")
    gram = w.T @ w
    if np.max(np.abs(gram - np.eye(w.shape[1]))) > 1e-8:
        raise BadMeasureSpec("subspace columns are not orthonormal")
    return MeasureSpec(kind="uniform_subsphere", subspace=w)


def discrete_measure(points, probs) -> MeasureSpec:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    pr = np.asarray(probs, dtype=float)
    if pts.shape[0] != pr.shape[0]:
        raise BadMeasureSpec(f"{pts.shape[0]} points vs {pr.shape[0]} probabilities")
    if (pr < 0).any():
        raise BadMeasureSpec("probabilities must be nonnegative")
    if abs(pr.sum() - 1.0) > PROB_SUM_TOL:
        raise BadMeasureSpec(f"probabilities sum to {pr.sum()!r}, not 1")
    for i, p in enumerate(pts):
        _check_unit(p, f"discrete point {i}")
    return MeasureSpec(kind="discrete", points=pts, probs=pr)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

class VectorSampler:
    """Stateless batch sampler of unit vectors for one measure."""

    def __init__(self, dim: int):
        self.dim = dim

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError


class _SphereSampler(VectorSampler):
    def sample(self, rng, count):
        z = rng.standard_normal((count, self.dim))
        norms = np.linalg.norm(z, axis=1)
        while (norms < 1e-12).any():  # probability-zero guard
            bad = norms < 1e-12
            z[bad] = rng.standard_normal((int(bad.sum()), self.dim))
            norms = np.linalg.norm(z, axis=1)
        return z / norms[:, None]


class _SubsphereSampler(VectorSampler):
    def __init__(self, subspace: np.ndarray):
        super().__init__(subspace.shape[0])
        self.subspace = subspace
        self._inner = _SphereSampler(subspace.shape[1])

    def sample(self, rng, count):
        return self._inner.sample(rng, count) @ self.subspace.T


class _DiscreteSampler(VectorSampler):
    def __init__(self, points: np.ndarray, probs: np.ndarray):
        super().__init__(points.shape[1])
        self.points = points
        self.probs = probs

    def sample(self, rng, count):
        idx = rng.choice(len(self.points), size=count, p=self.probs)
        return self.points[idx]


class _FiniteOrbitSampler(VectorSampler):
    def __init__(self, rep: Representation, base: np.ndarray):
        super().__init__(rep.dim)
        self.orbit_vectors = rep.table_images() @ base
        self.order = rep.group.order
        if not rep.group.complete:
            raise IncompleteTable("orbit sampling needs a complete table")

    def sample(self, rng, count):
        return self.orbit_vectors[rng.integers(self.order, size=count)]


class _ContinuousOrbitSampler(VectorSampler):
    def __init__(self, rep: Representation, base: np.ndarray):
        super().__init__(rep.dim)
        self.rep = rep
        self.base = base

    def sample(self, rng, count):
        payload = haar_matrices(self.rep.group, rng, count)
        if self.rep.matrix_stack_map is not None:
            images = self.rep.matrix_stack_map(payload)
        else:
            images = np.stack([self.rep.evaluate(GroupElement(matrix=m)) for m in payload])
        return np.einsum("kij,j->ki", images, self.base)


def make_sampler(spec: MeasureSpec, rep: Representation) -> VectorSampler:
    """Build the sampler realizing a measure on a representation's sphere.

    Orbit measures draw a group element from the invariant distribution
    and push it through g -> rho(g) base; any stabilizer of the base
    point is handled implicitly by the push-forward.
    """
    if spec.kind == "uniform_sphere":
        return _SphereSampler(rep.dim)
    if spec.kind == "uniform_subsphere":
        if spec.subspace.shape[0] != rep.dim:
            raise BadMeasureSpec(
                f"subspace lives in R^{spec.subspace.shape[0]}, representation in R^{rep.dim}"
            )
        return _SubsphereSampler(spec.subspace)
    if spec.kind == "discrete":
        if spec.points.shape[1] != rep.dim:
            raise BadMeasureSpec(
                f"points live in R^{spec.points.shape[1]}, representation in R^{rep.dim}"
            )
        return _DiscreteSampler(spec.points, spec.probs)
    if spec.kind == "orbit":
        if spec.base.shape != (rep.dim,):
            raise BadMeasureSpec(
                f"orbit base has shape {spec.base.shape}, representation dim {rep.dim}"
            )
        if isinstance(rep.group, FiniteGroupTable):
            return _FiniteOrbitSampler(rep, spec.base)
        if isinstance(rep.group, ContinuousFamily):
            return _ContinuousOrbitSampler(rep, spec.base)
        raise BadMeasureSpec("orbit measure needs a representation with a group source")
    raise BadMeasureSpec(f"unknown measure kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------

def _chunk_sizes(n: int, workers: int) -> list[int]:
    base, rem = divmod(n, workers)
    return [base + 1] * rem + [base] * (workers - rem)


def squared_overlap_values(
    sampler: VectorSampler,
    n_pairs: int,
    seed=0,
    workers: int = 1,
) -> np.ndarray:
    """The n_pairs values <x_i, y_i>^2, in deterministic stream order.

    x and y come from independent substreams, one pair of substreams per
    worker chunk; the concatenation order is fixed by the worker index.
    """
    if n_pairs < 2:
        raise BadParams("need at least 2 pairs")
    if workers < 1:
        raise BadParams("workers must be >= 1")
    out = []
    for w, size in enumerate(_chunk_sizes(n_pairs, workers)):
        if size == 0:
            continue
        x = sampler.sample(stream(seed, w, 0), size)
        y = sampler.sample(stream(seed, w, 1), size)
        out.append(np.einsum("ki,ki->k", x, y) ** 2)
    return np.concatenate(out)


def estimate_squared_overlap(
    sampler: VectorSampler,
    n_pairs: int,
    seed=0,
    workers: int = 1,
) -> MomentEstimate:
    """Mean of <x,y>^2 over independent pairs, with its standard error."""
    vals = squared_overlap_values(sampler, n_pairs, seed, workers)
    return MomentEstimate(
        value=float(vals.mean()),
        stderr=float(vals.std(ddof=1) / math.sqrt(n_pairs)),
        n_samples=n_pairs,
        exact=False,
    )


def overlap_convergence_trace(
    sampler: VectorSampler,
    n_pairs: int,
    seed=0,
    workers: int = 1,
) -> list[tuple[int, float, float]]:
    """Running (n, estimate, stderr) at powers of two, ending at n_pairs."""
    vals = squared_overlap_values(sampler, n_pairs, seed, workers)
    checkpoints = []
    k = 2
    while k < n_pairs:
        checkpoints.append(k)
        k *= 2
    checkpoints.append(n_pairs)
    cum = np.cumsum(vals)
    cum2 = np.cumsum(vals**2)
    rows = []
    for k in checkpoints:
        mean = cum[k - 1] / k
        var = max(cum2[k - 1] - k * mean**2, 0.0) / (k - 1)
        rows.append((k, float(mean), float(math.sqrt(var / k))))
    return rows


def coordinate_second_moments(
    sampler: VectorSampler,
    n_samples: int,
    seed=0,
    workers: int = 1,
    block: int = 65536,
) -> SecondMomentMatrix:
    """Monte Carlo mean of x x^T with per-entry standard errors."""
    if n_samples < 2:
        raise BadParams("need at least 2 samples")
    n = sampler.dim
    total = np.zeros((n, n))
    total_sq = np.zeros((n, n))
    for w, size in enumerate(_chunk_sizes(n_samples, workers)):
        rng = stream(seed, w)
        done = 0
        while done < size:
            take = min(block, size - done)
            x = sampler.sample(rng, take)
            outer = np.einsum("ki,kj->kij", x, x)
            total += outer.sum(axis=0)
            total_sq += (outer**2).sum(axis=0)
            done += take
    mean = total / n_samples
    var = np.maximum(total_sq - n_samples * mean**2, 0.0) / (n_samples - 1)
    return SecondMomentMatrix(
        entries=mean,
        n_samples=n_samples,
        exact=False,
        stderr=np.sqrt(var / n_samples),
    )


# ---------------------------------------------------------------------------
# exact second moments and overlaps
# ---------------------------------------------------------------------------

def exact_discrete_overlap(spec: MeasureSpec) -> tuple[MomentEstimate, SecondMomentMatrix]:
    """Exact E<x,y>^2 of a discrete measure via its second-moment matrix.

    Independence factors the expectation through M = sum_i p_i x_i x_i^T:
    the exact value is |M|_F^2 = sum_ij p_i p_j <x_i, x_j>^2.
    """
    if spec.kind != "discrete":
        raise NotDiscrete(f"measure kind is {spec.kind!r}")
    m = np.einsum("k,ki,kj->ij", spec.probs, spec.points, spec.points)
    value = float(np.sum(m * m))
    est = MomentEstimate(value=value, stderr=0.0, n_samples=len(spec.points), exact=True)
    return est, SecondMomentMatrix(entries=m, n_samples=len(spec.points), exact=True)


@dataclass(frozen=True)
class LowerBoundCheck:
    value: float   # |M|_F^2
    bound: float   # 1/n
    gap: float     # |M - I/n|_F^2 >= 0


def lower_bound_check(m, trace_tol: float = 1e-8) -> LowerBoundCheck:
    """Decompose |M|_F^2 = 1/n + gap for a unit-trace second-moment matrix.

    The traceless part z = M - I/n is Frobenius-orthogonal to the
    identity, so the cross term vanishes and the gap |z|_F^2 is an exact
    nonnegative excess over the universal lower bound 1/n.
    """
    entries = m.entries if isinstance(m, SecondMomentMatrix) else np.asarray(m, dtype=float)
    n = entries.shape[0]
    tr = float(np.trace(entries))
    if abs(tr - 1.0) > trace_tol:
        raise TraceNotOne(f"trace is {tr!r}")
    z = entries - np.eye(n) / n
    gap = float(np.sum(z * z))
    return LowerBoundCheck(value=1.0 / n + gap, bound=1.0 / n, gap=gap)


@dataclass(frozen=True)
class OrbitMoments:
    single_sum: float          # mean over g of <rho(g) v, v>^2
    double_sum: float | None   # mean over (g, h) pairs; None when too large
    group_sum: float           # |G| * single_sum
    order: int


def exact_finite_orbit_moments(
    rep: Representation,
    table: FiniteGroupTable | None,
    v: np.ndarray,
    pair_cap: int = PAIR_ENUMERATION_CAP,
) -> OrbitMoments:
    """Exact orbit-averaged squared overlaps of a finite group.

    For an irreducible representation both averages equal 1/dim and the
    unnormalized group sum equals |G|/dim, for a base point with any
    stabilizer.  The double sum enumerates all |G|^2 pairs (in blocks)
    and is skipped above ``pair_cap``.
    """
    table = rep.group if table is None else table
    if not isinstance(table, FiniteGroupTable) or not table.complete:
        raise IncompleteTable("exact orbit sums need a complete finite table")
    v = _check_unit(v, "orbit base")
    if v.shape != (rep.dim,):
        raise BadParams(f"base has shape {v.shape}, representation dim {rep.dim}")
    orbit = rep.table_images() @ v
    single = float(np.mean((orbit @ v) ** 2))
    order = table.order
    double = None
    if order * order <= pair_cap:
        acc = 0.0
        step = max(1, min(order, 4096))
        for lo in range(0, order, step):
            g = orbit[lo : lo + step] @ orbit.T
            acc += float(np.sum(g * g))
        double = acc / order**2
    return OrbitMoments(single_sum=single, double_sum=double, group_sum=order * single, order=order)


def exact_finite_orbit_second_moment(
    rep: Representation,
    table: FiniteGroupTable | None,
    v: np.ndarray,
) -> SecondMomentMatrix:
    """Exact mean of y y^T over the orbit of v under a finite group."""
    table = rep.group if table is None else table
    if not isinstance(table, FiniteGroupTable) or not table.complete:
        raise IncompleteTable("exact orbit averaging needs a complete finite table")
    v = _check_unit(v, "orbit base")
    orbit = rep.table_images() @ v
    m = np.einsum("ki,kj->ij", orbit, orbit) / table.order
    return SecondMomentMatrix(entries=m, n_samples=table.order, exact=True)


def sn_cosine_identity(x) -> float:
    """Sum of cos^2(x, sigma x) over all coordinate permutations.

    For any nonzero vector whose coordinates add to zero this equals
    n!/(n-1); the full factorial enumeration is guarded at n <= 8.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise BadParams("need a vector of length >= 2")
    if n > FACTORIAL_GUARD:
        raise TooLarge(f"n = {n} would enumerate {math.factorial(n)} permutations")
    nrm = float(np.linalg.norm(x))
    if nrm == 0.0:
        raise BadParams("zero vector")
    if abs(float(x.sum())) > 1e-10 * max(1.0, nrm):
        raise NotSumZero(f"coordinates sum to {float(x.sum())!r}")
    perms = np.array(list(itertools.permutations(range(n))))
    overlaps = x[perms] @ x
    return float(np.sum(overlaps**2) / nrm**4)


# ---------------------------------------------------------------------------
# expectation identity and invariance checks
# ---------------------------------------------------------------------------

@dataclass
class ExpectationCheck:
    """Comparison of E(x) with E(P x) for the invariant projector P."""

    mean_x: np.ndarray
    mean_proj: np.ndarray
    residual: float
    residual_band: float
    mean_norm: float
    mean_norm_band: float
    exact: bool


def expectation_identity_check(
    rep: Representation,
    spec: MeasureSpec,
    n_samples: int = DEFAULT_PAIRS,
    seed=0,
    workers: int = 1,
    band_sigma: float = 4.0,
    projector_samples: int = 8192,
) -> ExpectationCheck:
    """Check E(x) = E(P x) with P the projector onto the fixed subspace.

    Exact table averages are used for orbit and discrete measures of
    finite groups; otherwise both expectations are estimated on the same
    sample stream, and the bands are ``band_sigma`` times the Euclidean
    aggregate of per-coordinate standard errors.
    """
    finite = isinstance(rep.group, FiniteGroupTable)
    if finite and spec.kind in ("orbit", "discrete"):
        proj = reynolds_matrix(rep)
        if spec.kind == "orbit":
            mean_x = rep.table_images() @ _check_unit(spec.base, "orbit base")
            mean_x = mean_x.mean(axis=0)
        else:
            mean_x = spec.probs @ spec.points
        mean_proj = proj @ mean_x
        residual = float(np.linalg.norm(mean_x - mean_proj))
        return ExpectationCheck(
            mean_x=mean_x,
            mean_proj=mean_proj,
            residual=residual,
            residual_band=0.0,
            mean_norm=float(np.linalg.norm(mean_x)),
            mean_norm_band=0.0,
            exact=True,
        )

    if finite:
        proj = reynolds_matrix(rep)
    else:
        proj = reynolds_matrix_mc(rep, stream(seed, 999), projector_samples)
    sampler = make_sampler(spec, rep)
    total_x = np.zeros(rep.dim)
    total_x2 = np.zeros(rep.dim)
    total_d = np.zeros(rep.dim)
    total_d2 = np.zeros(rep.dim)
    for w, size in enumerate(_chunk_sizes(n_samples, workers)):
        x = sampler.sample(stream(seed, w), size)
        d = x - x @ proj.T
        total_x += x.sum(axis=0)
        total_x2 += (x**2).sum(axis=0)
        total_d += d.sum(axis=0)
        total_d2 += (d**2).sum(axis=0)
    mean_x = total_x / n_samples
    mean_d = total_d / n_samples
    se_x = np.sqrt(np.maximum(total_x2 - n_samples * mean_x**2, 0.0) / (n_samples - 1) / n_samples)
    se_d = np.sqrt(np.maximum(total_d2 - n_samples * mean_d**2, 0.0) / (n_samples - 1) / n_samples)
    return ExpectationCheck(
        mean_x=mean_x,
        mean_proj=mean_x - mean_d,
        residual=float(np.linalg.norm(mean_d)),
        residual_band=band_sigma * float(np.linalg.norm(se_d)),
        mean_norm=float(np.linalg.norm(mean_x)),
        mean_norm_band=band_sigma * float(np.linalg.norm(se_x)),
        exact=False,
    )


@dataclass(frozen=True)
class InvarianceCheck:
    invariant: bool
    violating_element: GroupElement | None


def check_discrete_invariance(
    spec: MeasureSpec,
    rep: Representation,
    table: FiniteGroupTable | None = None,
    point_tol: float = 1e-8,
    prob_tol: float = 1e-10,
) -> InvarianceCheck:
    """Whether every group element permutes the weighted support of spec.

    Points closer than ``point_tol`` (entrywise) are merged with summed
    probabilities before comparison; the first element that fails to map
    the weighted support onto itself is reported.
    """
    if spec.kind != "discrete":
        raise NotDiscrete(f"measure kind is {spec.kind!r}")
    table = rep.group if table is None else table
    if not isinstance(table, FiniteGroupTable) or not table.complete:
        raise IncompleteTable("invariance check enumerates a complete finite table")
    ref_pts, ref_pr = _merge_weighted_points(spec.points, spec.probs, point_tol)
    images = rep.table_images()
    for el, image in zip(table.elements, images):
        moved = spec.points @ image.T
        pts, pr = _merge_weighted_points(moved, spec.probs, point_tol)
        if not _same_weighted_points(ref_pts, ref_pr, pts, pr, point_tol, prob_tol):
            return InvarianceCheck(invariant=False, violating_element=el)
    return InvarianceCheck(invariant=True, violating_element=None)


def _merge_weighted_points(points: np.ndarray, probs: np.ndarray, tol: float):
    reps: list[np.ndarray] = []
    weights: list[float] = []
    for p, w in zip(points, probs):
        for i, r in enumerate(reps):
            if float(np.max(np.abs(r - p))) < tol:
                weights[i] += float(w)
                break
        else:
            reps.append(p)
            weights.append(float(w))
    return reps, weights


def _same_weighted_points(ref_pts, ref_pr, pts, pr, point_tol, prob_tol) -> bool:
    if len(ref_pts) != len(pts):
        return False
    used = [False] * len(ref_pts)
    for p, w in zip(pts, pr):
        for i, (r, rw) in enumerate(zip(ref_pts, ref_pr)):
            if not used[i] and float(np.max(np.abs(r - p))) < point_tol:
                if abs(rw - w) > prob_tol:
                    return False
                used[i] = True
                break
        else:
            return False
    return all(used)
