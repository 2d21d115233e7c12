"""The fixed-point algebra of the conjugation action and what it decides.

A matrix A commutes with every image rho(g) exactly when it is fixed by
the conjugation action a -> rho(g) a rho(g)^T.  The span of all such
matrices always contains the identity; its structure decides everything
this package certifies:

* the representation is irreducible exactly when the only *symmetric*
  commuting matrices are the multiples of the identity;
* for irreducible representations the full commuting algebra is a real
  division algebra, so its dimension (1, 2 or 4) classifies the
  representation as real, complex or quaternionic type;
* for reducible representations a symmetric commuting matrix that is not
  a multiple of the identity has an eigenspace that is a proper invariant
  subspace, which is extracted as an explicit witness.

The commuting span is computed as the nullspace of stacked linear
constraints rho(g) A - A rho(g) = 0, with g running over the generators
(finite groups), all elements, or a batch of invariant-distributed
samples (continuous groups).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParams,
    DegenerateSpectrum,
    DimensionMismatch,
    IncompleteTable,
    InconsistentDimensions,
    NonStabilizedDimension,
    NotReducible,
    RepspectError,
    ThresholdAmbiguity,
    TooLarge,
)
from .groups import ContinuousFamily, FiniteGroupTable, GroupElement, haar_matrices
from .representations import Representation

NULLSPACE_REL_THRESHOLD = 1e-8
ELEMENT_SOURCE_CAP = 10_000
WITNESS_GAP_TOL = 1e-8
WITNESS_RESIDUAL_TOL = 1e-6


@dataclass
class CommutantBasis:
    """Orthonormal basis (trace inner product) of the commuting span.

    ``sym_dim``/``skew_dim`` are populated by :func:`split_symmetric_skew`,
    after which the basis lists the symmetric elements first.  ``residual``
    is the largest commutation defect of any basis element against any
    constraint matrix; ``threshold`` is the singular-value cutoff that
    defined the nullspace.  ``constraints`` keeps the constraint images
    so later stages can re-verify against the same evidence.
    """

    basis: list[np.ndarray]
    dim: int
    sym_dim: int | None
    skew_dim: int | None
    residual: float
    threshold: float
    constraints: np.ndarray
    ambiguous_sigma: float | None = None


@dataclass(frozen=True)
class TypeVerdict:
    """Irreducibility decision plus division-algebra type when it applies."""

    irreducible: bool
    type: str  # "R" | "C" | "H" | "not_applicable"
    commutant_dim: int
    sym_dim: int


@dataclass
class WitnessSubspace:
    """Orthonormal basis of a proper invariant subspace, with its residual."""

    basis: np.ndarray  # (n, m), orthonormal columns
    m: int
    residual: float


# ---------------------------------------------------------------------------
# invariant projector
# ---------------------------------------------------------------------------

def reynolds_matrix(rep: Representation, table: FiniteGroupTable | None = None) -> np.ndarray:
    """Exact group average of the representation matrices."""
    table = rep.group if table is None else table
    if not isinstance(table, FiniteGroupTable):
        raise BadParams("exact averaging needs a finite group table")
    if not table.complete:
        raise IncompleteTable("exact averaging needs a complete table")
    return rep.table_images().mean(axis=0)


def reynolds_project(rep: Representation, table: FiniteGroupTable, v: np.ndarray) -> np.ndarray:
    """Exact projection of v onto the fixed subspace: average of rho(g) v."""
    v = np.asarray(v, dtype=float)
    if v.shape != (rep.dim,):
        raise DimensionMismatch(f"vector shape {v.shape} != ({rep.dim},)")
    return reynolds_matrix(rep, table) @ v


def reynolds_matrix_mc(rep: Representation, rng: np.random.Generator, n_samples: int) -> np.ndarray:
    """Monte Carlo estimate of the group average of the images."""
    return _sample_constraint_images(rep, rng, n_samples).mean(axis=0)


def reynolds_project_mc(
    rep: Representation,
    v: np.ndarray,
    rng: np.random.Generator,
    n_samples: int = 4096,
) -> tuple[np.ndarray, float]:
    """Monte Carlo fixed-subspace projection; returns (vector, stderr).

    The standard error aggregates per-coordinate errors in the Euclidean
    norm, matching how residuals of the projected vector are measured.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (rep.dim,):
        raise DimensionMismatch(f"vector shape {v.shape} != ({rep.dim},)")
    images = _sample_constraint_images(rep, rng, n_samples)
    samples = images @ v
    mean = samples.mean(axis=0)
    coord_err = samples.std(axis=0, ddof=1) / np.sqrt(n_samples)
    return mean, float(np.linalg.norm(coord_err))


# ---------------------------------------------------------------------------
# nullspace machinery
# ---------------------------------------------------------------------------

def commutation_constraint_rows(image: np.ndarray) -> np.ndarray:
    """Linear map A -> rho(g) A - A rho(g) on row-major vectorized A."""
    n = image.shape[0]
    eye = np.eye(n)
    return np.kron(image, eye) - np.kron(eye, image.T)


def trace_orthonormal_nullspace(
    stacked: np.ndarray,
    rel_threshold: float = NULLSPACE_REL_THRESHOLD,
) -> tuple[np.ndarray, float, float | None]:
    """Nullspace rows of a stacked constraint matrix.

    Returns (rows, threshold, ambiguous_sigma) where rows are orthonormal
    right singular vectors whose singular values fall below
    ``rel_threshold * sigma_max``, and ambiguous_sigma is the singular
    value closest to the cutoff if any lies within a factor of ten of it.
    """
    _, sigma, vh = np.linalg.svd(stacked, full_matrices=True)
    cols = stacked.shape[1]
    sigma = np.concatenate([sigma, np.zeros(cols - len(sigma))])
    sigma_max = sigma[0] if len(sigma) else 0.0
    if sigma_max <= 0.0:
        return vh, 0.0, None
    threshold = rel_threshold * sigma_max
    null_mask = sigma <= threshold
    band = (sigma > threshold / 10.0) & (sigma < threshold * 10.0)
    ambiguous = None
    if band.any():
        band_vals = sigma[band]
        ambiguous = float(band_vals[np.argmin(np.abs(np.log(band_vals / threshold)))])
    return vh[null_mask], threshold, ambiguous


def _sample_constraint_images(rep: Representation, rng: np.random.Generator, k: int) -> np.ndarray:
    family = rep.group
    if not isinstance(family, ContinuousFamily):
        raise BadParams("sampled constraints need a continuous family")
    payload = haar_matrices(family, rng, k)
    if rep.matrix_stack_map is not None:
        return rep.matrix_stack_map(payload)
    return np.stack([rep.evaluate(GroupElement(matrix=m)) for m in payload])


def _finite_constraint_images(rep: Representation, source: str, element_cap: int) -> np.ndarray:
    table = rep.group
    if source == "elements":
        if table.order > element_cap:
            raise TooLarge(
                f"table has {table.order} elements; all-element constraints capped at {element_cap}"
            )
        return rep.table_images()
    if source == "generators":
        return np.stack(rep.generator_images())
    raise BadParams(f"unknown finite constraint source {source!r}")


def commutant_basis(
    rep: Representation,
    source: str = "auto",
    *,
    rng: np.random.Generator | None = None,
    rel_threshold: float = NULLSPACE_REL_THRESHOLD,
    element_cap: int = ELEMENT_SOURCE_CAP,
    start_samples: int = 8,
    max_samples: int = 64,
) -> CommutantBasis:
    """Compute the commuting span of a representation.

    ``source`` selects the constraint matrices: ``generators`` or
    ``elements`` for finite groups, ``samples`` for continuous families;
    ``auto`` picks generators when finite, samples otherwise.  In the
    sampled case the batch is doubled (8, 16, 32, ...) until the computed
    dimension agrees across two consecutive rounds; failure to stabilize
    by ``max_samples`` raises NonStabilizedDimension.

    The commuting span of the generators already equals that of the whole
    group, since a matrix commuting with generators commutes with all of
    their products.
    """
    finite = isinstance(rep.group, FiniteGroupTable)
    if source == "auto":
        source = "generators" if finite else "samples"

    if source in ("generators", "elements"):
        if not finite:
            raise BadParams(f"source {source!r} needs a finite group table")
        images = _finite_constraint_images(rep, source, element_cap)
        rows, threshold, ambiguous = _nullspace_of_images(images, rel_threshold)
    elif source == "samples":
        if finite:
            raise BadParams("source 'samples' is for continuous families")
        rng = np.random.default_rng(0) if rng is None else rng
        images, rows, threshold, ambiguous = _stabilized_sampled_nullspace(
            rep, rng, rel_threshold, start_samples, max_samples
        )
    else:
        raise BadParams(f"unknown constraint source {source!r}")

    basis = [row.reshape(rep.dim, rep.dim) for row in rows]
    cb = CommutantBasis(
        basis=basis,
        dim=len(basis),
        sym_dim=None,
        skew_dim=None,
        residual=_commutation_residual(basis, images),
        threshold=threshold,
        constraints=images,
        ambiguous_sigma=ambiguous,
    )
    if ambiguous is not None:
        warnings.warn(
            ThresholdAmbiguity(
                f"singular value {ambiguous:.3e} within a decade of cutoff {threshold:.3e}"
            )
        )
    return cb


def _nullspace_of_images(images: np.ndarray, rel_threshold: float):
    stacked = np.concatenate([commutation_constraint_rows(m) for m in images], axis=0)
    return trace_orthonormal_nullspace(stacked, rel_threshold)


def _stabilized_sampled_nullspace(rep, rng, rel_threshold, start_samples, max_samples):
    images = _sample_constraint_images(rep, rng, start_samples)
    rows, threshold, ambiguous = _nullspace_of_images(images, rel_threshold)
    k = start_samples
    while 2 * k <= max_samples:
        extra = _sample_constraint_images(rep, rng, k)
        images = np.concatenate([images, extra], axis=0)
        k *= 2
        new_rows, threshold, ambiguous = _nullspace_of_images(images, rel_threshold)
        if len(new_rows) == len(rows):
            return images, new_rows, threshold, ambiguous
        rows = new_rows
    raise NonStabilizedDimension(
        f"commutant dimension still changing at {k} sampled constraints"
    )


def _commutation_residual(basis: list[np.ndarray], images: np.ndarray) -> float:
    worst = 0.0
    for b in basis:
        defects = images @ b - b @ images  # broadcast over the stack
        worst = max(worst, float(np.max(np.abs(defects))))
    return worst


# ---------------------------------------------------------------------------
# structure of the span
# ---------------------------------------------------------------------------

def span_project(basis: list[np.ndarray], x: np.ndarray) -> np.ndarray:
    """Orthogonal projection of x onto the span of an orthonormal basis."""
    out = np.zeros_like(np.asarray(x, dtype=float))
    for b in basis:
        out += float(np.sum(b * x)) * b
    return out


def span_residual(basis: list[np.ndarray], x: np.ndarray) -> float:
    """Frobenius distance from x to the span of an orthonormal basis."""
    return float(np.linalg.norm(x - span_project(basis, x)))


def split_symmetric_skew(cb: CommutantBasis) -> CommutantBasis:
    """Re-basis the span into purely symmetric and purely skew elements.

    Transposition maps the commuting span to itself (the images are
    orthogonal), so the span splits exactly into its symmetric and skew
    parts; (B +- B^T)/2 of every basis element spans them.
    """
    n = cb.basis[0].shape[0] if cb.basis else 0
    if cb.dim == 0:
        raise RepspectError("empty commutant basis; the identity should always be present")
    sym_rows = np.stack([((b + b.T) / 2.0).reshape(-1) for b in cb.basis])
    skew_rows = np.stack([((b - b.T) / 2.0).reshape(-1) for b in cb.basis])
    sym = _orthonormal_rows(sym_rows)
    skew = _orthonormal_rows(skew_rows)
    if len(sym) + len(skew) != cb.dim:
        raise InconsistentDimensions(
            f"symmetric/skew split gives {len(sym)} + {len(skew)} != {cb.dim}"
        )
    basis = [r.reshape(n, n) for r in sym] + [r.reshape(n, n) for r in skew]
    return CommutantBasis(
        basis=basis,
        dim=cb.dim,
        sym_dim=len(sym),
        skew_dim=len(skew),
        residual=_commutation_residual(basis, cb.constraints),
        threshold=cb.threshold,
        constraints=cb.constraints,
        ambiguous_sigma=cb.ambiguous_sigma,
    )


def _orthonormal_rows(rows: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the row space.

    The rows are orthogonal projections of an orthonormal set, so their
    singular values sit near 0 or 1 and a 0.5 cutoff is unambiguous.
    """
    _, sigma, vh = np.linalg.svd(rows, full_matrices=False)
    return vh[sigma > 0.5]


def classify_and_decide(cb: CommutantBasis) -> TypeVerdict:
    """Decide irreducibility and, when it holds, the R/C/H type.

    A reducible orthogonal representation always commutes with the
    symmetric projector onto an invariant subspace, so irreducibility is
    equivalent to the symmetric part reducing to multiples of the
    identity.  For irreducible representations the span is a real
    division algebra and its dimension must be 1, 2 or 4.
    """
    if cb.sym_dim is None:
        raise BadParams("classify needs a split basis; call split_symmetric_skew first")
    irreducible = cb.sym_dim == 1
    if not irreducible:
        return TypeVerdict(False, "not_applicable", cb.dim, cb.sym_dim)
    kind = {1: "R", 2: "C", 4: "H"}.get(cb.dim)
    if kind is None:
        raise InconsistentDimensions(
            f"scalar symmetric part with commutant dimension {cb.dim} (expected 1, 2 or 4)"
        )
    return TypeVerdict(True, kind, cb.dim, cb.sym_dim)


# ---------------------------------------------------------------------------
# witness extraction
# ---------------------------------------------------------------------------

def witness_invariant_subspace(
    cb: CommutantBasis,
    rep: Representation,
    gap_tol: float = WITNESS_GAP_TOL,
    residual_tol: float = WITNESS_RESIDUAL_TOL,
) -> WitnessSubspace:
    """Extract a proper invariant subspace from a reducible commutant.

    Takes a symmetric basis element independent of the identity,
    removes its identity component, and returns the eigenspace of the
    eigenvalue furthest from the spectral mean (ties: smaller eigenspace,
    then lower eigenvalue).  Invariance is re-verified against the
    constraint matrices that defined the commutant.
    """
    if cb.sym_dim is None:
        raise BadParams("witness extraction needs a split basis")
    if cb.sym_dim < 2:
        raise NotReducible("symmetric part is scalar; no proper invariant subspace exists")
    n = rep.dim
    ident = np.eye(n) / np.sqrt(n)
    candidate = None
    for b in cb.basis[: cb.sym_dim]:
        reduced = b - float(np.sum(ident * b)) * ident
        nrm = float(np.linalg.norm(reduced))
        if nrm > 1e-6:
            candidate = reduced / nrm
            break
    if candidate is None:
        raise DegenerateSpectrum("all symmetric elements are numerically scalar")

    eigvals, eigvecs = np.linalg.eigh(candidate)
    clusters = _eigenvalue_clusters(eigvals, gap_tol)
    if len(clusters) < 2:
        raise DegenerateSpectrum("witness matrix spectrum has no usable gap")
    mean = float(eigvals.mean())
    dists = [abs(val - mean) for val, _ in clusters]
    top = max(dists)
    tied = [c for c, d in zip(clusters, dists) if top - d < gap_tol]
    value, indices = min(tied, key=lambda c: (len(c[1]), c[0]))
    basis = eigvecs[:, indices]
    residual = _subspace_invariance_residual(basis, cb.constraints)
    if residual > residual_tol:
        raise RepspectError(
            f"witness eigenspace moves under the group (residual {residual:.2e})"
        )
    return WitnessSubspace(basis=basis, m=basis.shape[1], residual=residual)


def _eigenvalue_clusters(eigvals: np.ndarray, gap_tol: float):
    """Group (sorted) eigenvalues whose gaps are below gap_tol."""
    clusters = []
    start = 0
    for i in range(1, len(eigvals) + 1):
        if i == len(eigvals) or eigvals[i] - eigvals[i - 1] > gap_tol:
            idx = list(range(start, i))
            clusters.append((float(eigvals[idx].mean()), idx))
            start = i
    return clusters


def _subspace_invariance_residual(basis: np.ndarray, images: np.ndarray) -> float:
    """Largest leakage of rho(g) W outside the column span of W."""
    proj = basis @ basis.T
    moved = images @ basis
    leak = moved - proj[None] @ moved
    return float(np.max(np.abs(leak)))
