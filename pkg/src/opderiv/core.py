"""Dense complex-matrix substrate.

Everything in the toolkit runs on square complex ndarrays ("operators").
This module provides the Hermitian eigendecomposition, the operator norm,
the one-parameter unitary group t -> exp(itD), spectral band projections
for the half-open intervals (r-1, r], orthonormal subspaces, linear spaces
of operators, and a nullspace solver for stacked linear operator equations
C @ vec(X) = 0.

Conventions
-----------
* Vectorization is column-major (Fortran order) throughout, so that
  ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.  The order is fixed so
  nullspace bases are reproducible run to run.
* All values are treated as immutable after construction; every operation
  is a pure function of its inputs, safe for concurrent use.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "NotHermitian",
    "DimensionMismatch",
    "TolerancePolicy",
    "DEFAULT_TOL",
    "as_operator",
    "operator_norm",
    "hermitian_part",
    "SelfAdjointGenerator",
    "eig_hermitian",
    "unitary_group",
    "band_index",
    "band_groups",
    "spectral_band_projections",
    "Subspace",
    "OperatorSpace",
    "vec",
    "unvec",
    "mult_matrix",
    "commutation_constraint",
    "invariance_constraint",
    "corner_constraint",
    "nullspace_of_constraints",
    "matrix_units",
    "save_operator",
    "load_operator",
    "load_matrix_json",
]


class NotHermitian(ValueError):
    """Input operator is not Hermitian within tolerance."""


class DimensionMismatch(ValueError):
    """Operands act on spaces of different dimensions."""


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical tolerances used across the toolkit.

    tol_herm/tol_eig guard Hermiticity and eigendecomposition residuals,
    tol_alg guards exact algebraic identities, tol_fd guards finite
    difference probes, and rank_cutoff is the relative singular-value
    threshold for rank decisions.  Residual tolerances are scaled as
    ``tol * (1 + prod(norms of the inputs))`` so products of large-norm
    operators are judged relatively.
    """

    tol_herm: float = 1e-9
    tol_eig: float = 1e-9
    tol_alg: float = 1e-9
    tol_fd: float = 1e-4
    rank_cutoff: float = 1e-9

    def __post_init__(self):
        for name in ("tol_herm", "tol_eig", "tol_alg", "tol_fd", "rank_cutoff"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.rank_cutoff < 1:
            raise ValueError("rank_cutoff must be < 1")

    def alg(self, *norms: float) -> float:
        return self.tol_alg * (1.0 + math.prod(norms))

    def herm(self, *norms: float) -> float:
        return self.tol_herm * (1.0 + math.prod(norms))

    def eig(self, *norms: float) -> float:
        return self.tol_eig * (1.0 + math.prod(norms))

    def replace(self, **kwargs) -> "TolerancePolicy":
        fields = {
            "tol_herm": self.tol_herm,
            "tol_eig": self.tol_eig,
            "tol_alg": self.tol_alg,
            "tol_fd": self.tol_fd,
            "rank_cutoff": self.rank_cutoff,
        }
        fields.update(kwargs)
        return TolerancePolicy(**fields)


DEFAULT_TOL = TolerancePolicy()


def as_operator(a) -> np.ndarray:
    """Coerce to a validated square complex matrix (dim >= 1, finite)."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("operator dimension must be >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator entries must be finite")
    return arr


def operator_norm(a) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex), ord=2))


def hermitian_part(a) -> np.ndarray:
    a = as_operator(a)
    return (a + a.conj().T) / 2.0


def _check_same_dim(*ops):
    dims = {op.shape[0] for op in ops}
    if len(dims) > 1:
        raise DimensionMismatch(f"dimensions differ: {sorted(dims)}")


@dataclass(frozen=True)
class SelfAdjointGenerator:
    """A Hermitian operator stored with its eigendecomposition.

    ``base == eigenvectors @ diag(eigenvalues) @ eigenvectors*`` within
    tolerance; eigenvalues are real and ascending.  The generator drives
    the unitary group exp(itD) and the spectral band projections.
    """

    base: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        base = as_operator(self.base)
        evals = np.asarray(self.eigenvalues, dtype=float)
        evecs = as_operator(self.eigenvectors)
        n = base.shape[0]
        if evals.shape != (n,) or evecs.shape != (n, n):
            raise ValueError("eigendata shapes inconsistent with base operator")
        if np.any(np.diff(evals) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        scale = 1.0 + float(np.max(np.abs(evals), initial=0.0))
        guard = 1e-7 * scale
        if operator_norm(base - base.conj().T) > guard:
            raise NotHermitian("base operator is not Hermitian")
        if operator_norm(evecs @ evecs.conj().T - np.eye(n)) > guard:
            raise ValueError("eigenvectors are not unitary")
        recon = (evecs * evals) @ evecs.conj().T
        if operator_norm(base - recon) > guard:
            raise ValueError("eigendecomposition does not reconstruct the base operator")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "eigenvalues", evals)
        object.__setattr__(self, "eigenvectors", evecs)

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    def norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues), initial=0.0))

    def shifted(self, c: float) -> "SelfAdjointGenerator":
        """Generator of D + c*I; same eigenvectors, shifted spectrum."""
        c = float(c)
        return SelfAdjointGenerator(
            self.base + c * np.eye(self.dim),
            self.eigenvalues + c,
            self.eigenvectors,
        )


def eig_hermitian(a, tol: TolerancePolicy | None = None) -> SelfAdjointGenerator:
    """Eigendecompose a Hermitian operator.

    Raises NotHermitian if ``||a - a*|| > tol_herm * (1 + ||a||)``.  The
    stored base is the Hermitian part of the input, so the reconstruction
    residual is at eigensolver accuracy.
    """
    tol = tol or DEFAULT_TOL
    a = as_operator(a)
    norm_a = operator_norm(a)
    if operator_norm(a - a.conj().T) > tol.herm(norm_a):
        raise NotHermitian("operator is not Hermitian within tol_herm")
    h = hermitian_part(a)
    evals, evecs = np.linalg.eigh(h)
    gen = SelfAdjointGenerator(h, evals, evecs)
    recon = (evecs * evals) @ evecs.conj().T
    if operator_norm(h - recon) > tol.eig(norm_a):
        raise ArithmeticError("eigendecomposition residual exceeds tol_eig")
    return gen


def unitary_group(d: SelfAdjointGenerator, t: float) -> np.ndarray:
    """exp(itD), computed through the eigendecomposition.

    Exact unitarity up to eigensolver accuracy; satisfies the group law
    exp(i(s+t)D) = exp(isD) exp(itD) within roundoff.
    """
    phases = np.exp(1j * float(t) * d.eigenvalues)
    u = d.eigenvectors
    return (u * phases) @ u.conj().T


def band_index(lam: float) -> int:
    """Band of an eigenvalue: the unique integer r with lam in (r-1, r].

    The comparison is exact on the computed eigenvalue (no fuzzing): an
    eigenvalue equal to an integer r belongs to band r.
    """
    return math.ceil(lam)


def band_groups(eigenvalues) -> dict[int, list[int]]:
    """Group eigenvalue indices by band; only nonempty bands appear."""
    groups: dict[int, list[int]] = {}
    for idx, lam in enumerate(np.asarray(eigenvalues, dtype=float)):
        groups.setdefault(band_index(lam), []).append(idx)
    return {r: groups[r] for r in sorted(groups)}


def spectral_band_projections(d: SelfAdjointGenerator) -> list[tuple[int, np.ndarray]]:
    """Orthogonal projections onto the eigenspaces with eigenvalue in (r-1, r].

    Returns (r, e_r) pairs for the nonempty bands only.  The projections
    are mutually orthogonal and sum to the identity.
    """
    out = []
    for r, idx in band_groups(d.eigenvalues).items():
        v = d.eigenvectors[:, idx]
        out.append((r, v @ v.conj().T))
    return out


@dataclass(frozen=True)
class Subspace:
    """Closed subspace given by an orthonormal basis (columns).

    The projection field is derived: ``basis @ basis*``.  Subspaces are
    compared through projections, never through bases.
    """

    ambient_dim: int
    basis: np.ndarray
    projection: np.ndarray | None = None

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise ValueError("basis must be an (ambient_dim, k) matrix")
        k = basis.shape[1]
        if k > 0:
            gram = basis.conj().T @ basis
            if operator_norm(gram - np.eye(k)) > 1e-8:
                raise ValueError("basis columns are not orthonormal")
        proj = basis @ basis.conj().T
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "projection", proj)

    @classmethod
    def from_columns(cls, columns, rank_cutoff: float = 1e-9) -> "Subspace":
        """Orthonormalize spanning columns via SVD with a relative rank cutoff."""
        cols = np.asarray(columns, dtype=complex)
        if cols.ndim != 2:
            raise ValueError("columns must be 2-D")
        d = cols.shape[0]
        if cols.shape[1] == 0:
            return cls(d, np.zeros((d, 0), dtype=complex))
        u, s, _ = np.linalg.svd(cols, full_matrices=False)
        smax = s[0] if s.size else 0.0
        rank = int(np.sum(s > rank_cutoff * smax)) if smax > 0 else 0
        return cls(d, u[:, :rank])

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def distance(self, other: "Subspace") -> float:
        """Operator-norm distance between the two projections."""
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch("subspaces live in different ambient spaces")
        return operator_norm(self.projection - other.projection)

    def embedded(self, ambient_dim: int, offset: int = 0) -> "Subspace":
        """The same subspace inside a larger space (basis rows shifted by offset)."""
        if offset < 0 or offset + self.ambient_dim > ambient_dim:
            raise ValueError("embedding does not fit in the target space")
        basis = np.zeros((ambient_dim, self.dim), dtype=complex)
        basis[offset : offset + self.ambient_dim, :] = self.basis
        return Subspace(ambient_dim, basis)


@dataclass(frozen=True)
class OperatorSpace:
    """Linear space of operators given by a linearly independent basis."""

    ambient_dim: int
    basis_elements: tuple

    def __post_init__(self):
        elems = tuple(as_operator(b) for b in self.basis_elements)
        for b in elems:
            if b.shape[0] != self.ambient_dim:
                raise DimensionMismatch("basis element dimension differs from ambient_dim")
        object.__setattr__(self, "basis_elements", elems)
        if elems:
            stacked = np.stack([vec(b) for b in elems], axis=1)
            u, s, _ = np.linalg.svd(stacked, full_matrices=False)
            if s.size and s[-1] <= DEFAULT_TOL.rank_cutoff * s[0]:
                raise ValueError("basis elements are not linearly independent")
            object.__setattr__(self, "_q", u[:, : len(elems)])
        else:
            object.__setattr__(self, "_q", np.zeros((self.ambient_dim**2, 0), dtype=complex))

    @property
    def dim(self) -> int:
        return len(self.basis_elements)

    def membership_residual(self, x) -> float:
        """Frobenius distance from x to the span, relative to 1 + ||x||_F."""
        v = vec(as_operator(x))
        q = self._q
        resid = v - q @ (q.conj().T @ v)
        return float(np.linalg.norm(resid) / (1.0 + np.linalg.norm(v)))

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.membership_residual(x) <= tol

    def equals(self, other: "OperatorSpace", tol: float = 1e-9) -> bool:
        """Same span: equal dimensions plus mutual membership of the bases."""
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return all(self.membership_residual(b) <= tol for b in other.basis_elements) and all(
            other.membership_residual(b) <= tol for b in self.basis_elements
        )

    def product_closure_residual(self, max_pairs: int | None = None) -> float:
        """Worst membership residual among pairwise products of basis elements.

        With ``max_pairs`` set, a deterministic sample of that many index
        pairs is checked instead of all dim**2 (which grows too costly for
        large spaces).
        """
        k = self.dim
        if max_pairs is None or k * k <= max_pairs:
            pairs = [(i, j) for i in range(k) for j in range(k)]
        else:
            rng = np.random.default_rng(0)
            idx = rng.integers(0, k, size=(max_pairs, 2))
            pairs = [tuple(p) for p in idx]
        worst = 0.0
        for i, j in pairs:
            worst = max(
                worst, self.membership_residual(self.basis_elements[i] @ self.basis_elements[j])
            )
        return worst


def vec(x) -> np.ndarray:
    """Column-major vectorization."""
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


def mult_matrix(left, right) -> np.ndarray:
    """Matrix of X -> left @ X @ right on column-major vectorizations."""
    left = as_operator(left)
    right = as_operator(right)
    return np.kron(right.T, left)


def commutation_constraint(g) -> np.ndarray:
    """Matrix of X -> X g - g X; its nullspace is the commutant of g."""
    g = as_operator(g)
    eye = np.eye(g.shape[0])
    return np.kron(g.T, eye) - np.kron(eye, g)


def invariance_constraint(p) -> np.ndarray:
    """Matrix of X -> (I - P) X P; nullspace = operators leaving range(P) invariant."""
    p = as_operator(p)
    eye = np.eye(p.shape[0])
    return np.kron(p.T, eye - p)


def corner_constraint(e) -> np.ndarray:
    """Matrix of X -> X - E X E; nullspace = operators supported in the corner."""
    e = as_operator(e)
    d2 = e.shape[0] ** 2
    return np.eye(d2) - np.kron(e.T, e)


def matrix_units(dim: int) -> list[np.ndarray]:
    """Standard matrix units in column-major order (orthonormal under vec)."""
    return [unvec(col, dim) for col in np.eye(dim * dim).T]


def _materialize(constraint, dim: int) -> np.ndarray:
    """Turn a callable linear map on operators into its stacked matrix."""
    cols = []
    for unit in matrix_units(dim):
        out = np.asarray(constraint(unit), dtype=complex)
        cols.append(out.reshape(-1, order="F"))
    return np.stack(cols, axis=1)


def nullspace_of_constraints(
    constraints, dim: int, tol: TolerancePolicy | None = None, scale: float | None = None
) -> OperatorSpace:
    """Orthonormal basis of {X : C @ vec(X) = 0 for every constraint C}.

    Each constraint is either a 2-D ndarray with ``dim*dim`` columns or a
    callable linear map on operators (materialized against the matrix
    units).  Rank is decided by ``rank_cutoff`` relative to the largest
    singular value of the stacked constraint matrix, floored by the
    optional problem ``scale``: a caller that knows the natural magnitude
    of its constraints should pass it, so a stack that is pure roundoff
    noise (for example the commutant of a numerically scalar operator) is
    treated as zero instead of as a noise matrix of spurious full rank.
    With no constraints the full matrix space is returned; a trivial
    solution space yields an empty basis.  Very tall stacks are
    compressed by intermediate QR factorizations, which preserve singular
    values.
    """
    tol = tol or DEFAULT_TOL
    d2 = dim * dim
    blocks: list[np.ndarray] = []
    rows = 0

    def compress(mats):
        stacked = np.vstack(mats)
        if stacked.shape[0] <= d2:
            return stacked
        return np.linalg.qr(stacked, mode="r")

    for c in constraints:
        mat = np.asarray(c, dtype=complex) if not callable(c) else _materialize(c, dim)
        if mat.ndim != 2 or mat.shape[1] != d2:
            raise ValueError(f"constraint matrix must have {d2} columns, got {mat.shape}")
        blocks.append(mat)
        rows += mat.shape[0]
        if rows > 6 * d2:
            blocks = [compress(blocks)]
            rows = blocks[0].shape[0]

    if not blocks:
        return OperatorSpace(dim, tuple(matrix_units(dim)))

    stacked = np.vstack(blocks)
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    threshold = tol.rank_cutoff * max(smax, scale or 0.0)
    rank = int(np.sum(s > threshold)) if threshold > 0 else int(np.sum(s > 0))
    null_vecs = vh[rank:].conj()
    basis = tuple(unvec(row, dim) for row in null_vecs)
    return OperatorSpace(dim, basis)


def save_operator(path, a, extra: dict | None = None) -> None:
    """Write a matrix as JSON: {"dim": n, "entries": [[[re, im], ...], ...]} row-major."""
    a = as_operator(a)
    n = a.shape[0]
    entries = [[[float(a[i, j].real), float(a[i, j].imag)] for j in range(n)] for i in range(n)]
    payload: dict = {"dim": n, "entries": entries}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2))


def load_matrix_json(path) -> tuple[np.ndarray, dict]:
    """Read the shared matrix JSON format; returns (matrix, extra fields)."""
    payload = json.loads(Path(path).read_text())
    if not isinstance(payload, dict) or "dim" not in payload or "entries" not in payload:
        raise ValueError(f"{path}: not a matrix JSON file (missing dim/entries)")
    n = int(payload["dim"])
    entries = payload["entries"]
    if len(entries) != n or any(len(row) != n for row in entries):
        raise ValueError(f"{path}: entries do not form a {n}x{n} matrix")
    a = np.array(
        [[complex(cell[0], cell[1]) for cell in row] for row in entries], dtype=complex
    )
    extra = {k: v for k, v in payload.items() if k not in ("dim", "entries")}
    return as_operator(a), extra


def load_operator(path) -> np.ndarray:
    return load_matrix_json(path)[0]
