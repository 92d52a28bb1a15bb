"""Finite atomic spectral measures and scalar functional calculus.

A spectral measure here is a finite list of atoms ``(value, projection)``
whose orthogonal projections resolve the identity.  Internally the measure
stores one orthonormal basis of eigenvectors grouped by atom; dense
projections are materialized on demand, which keeps memory linear in the
dimension even when every atom has rank one.
"""

from __future__ import annotations

import numpy as np

from .hermitian import HermitianMatrix, _eigh_checked, as_matrix

MEASURE_TOL = 1e-10
DEFAULT_CLUSTER_TOL = 1e-8

__all__ = [
    "MEASURE_TOL",
    "DEFAULT_CLUSTER_TOL",
    "SpectralMeasure",
    "from_hermitian",
    "apply_scalar",
    "coordinate_measure",
]


class SpectralMeasure:
    """Atomic spectral measure with finitely many atoms.

    Invariants (checked by :meth:`validate`):

    * each projection is Hermitian and idempotent to ``1e-10``;
    * distinct atoms are mutually orthogonal to ``1e-10``;
    * the projections sum to the identity to ``1e-10``;
    * atom values are strictly increasing.
    """

    __slots__ = ("values", "basis", "starts")

    def __init__(self, values, basis, starts) -> None:
        self.values = np.asarray(values, dtype=np.float64)
        self.basis = np.asarray(basis, dtype=np.complex128)
        self.starts = np.asarray(starts, dtype=np.intp)
        if self.basis.ndim != 2 or self.basis.shape[0] != self.basis.shape[1]:
            raise ValueError("basis must be a square matrix")
        if len(self.starts) != len(self.values) + 1:
            raise ValueError("starts must have one more entry than values")
        if self.starts[0] != 0 or self.starts[-1] != self.dim:
            raise ValueError("starts must run from 0 to dim")
        if np.any(np.diff(self.starts) <= 0):
            raise ValueError("every atom must have positive rank")
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("atom values must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def atom_count(self) -> int:
        return len(self.values)

    @property
    def ranks(self) -> np.ndarray:
        return np.diff(self.starts)

    def column_atom_index(self) -> np.ndarray:
        """Map basis column -> index of the atom owning it."""
        return np.repeat(np.arange(self.atom_count), self.ranks)

    def column_values(self) -> np.ndarray:
        """Atom value per basis column."""
        return np.repeat(self.values, self.ranks)

    def projection(self, j: int) -> np.ndarray:
        """Dense orthogonal projection of atom ``j``."""
        cols = self.basis[:, self.starts[j] : self.starts[j + 1]]
        return cols @ cols.conj().T

    @property
    def atoms(self) -> list[tuple[float, np.ndarray]]:
        """Materialized ``(value, projection)`` pairs."""
        return [(float(self.values[j]), self.projection(j)) for j in range(self.atom_count)]

    def validate(self, tol: float = MEASURE_TOL) -> None:
        """Check the measure invariants; raise ``ValueError`` on violation."""
        eye = np.eye(self.dim)
        gram = self.basis.conj().T @ self.basis
        if np.abs(gram - eye).max() > tol:
            raise ValueError("atom basis is not orthonormal within tolerance")
        total = self.basis @ self.basis.conj().T
        if np.abs(total - eye).max() > tol:
            raise ValueError("projections do not sum to the identity within tolerance")
        for j in range(self.atom_count):
            p = self.projection(j)
            if np.abs(p - p.conj().T).max() > tol:
                raise ValueError(f"projection of atom {j} is not Hermitian")
            if np.abs(p @ p - p).max() > tol:
                raise ValueError(f"projection of atom {j} is not idempotent")
        for j in range(self.atom_count):
            pj = self.projection(j)
            for k in range(j + 1, self.atom_count):
                if np.abs(pj @ self.projection(k)).max() > tol:
                    raise ValueError(f"atoms {j} and {k} are not orthogonal")

    @classmethod
    def from_atoms(cls, atoms, *, validate: bool = True) -> "SpectralMeasure":
        """Build a measure from explicit ``(value, projection)`` pairs.

        Pairs may be given in any order; values must be distinct.  Each
        projection is factored through its eigen-range (eigenvalues > 1/2).
        """
        pairs = sorted(((float(v), as_matrix(p)) for v, p in atoms), key=lambda t: t[0])
        if not pairs:
            raise ValueError("a spectral measure needs at least one atom")
        dim = pairs[0][1].shape[0]
        values, blocks, starts = [], [], [0]
        for v, p in pairs:
            if p.shape[0] != dim:
                raise ValueError("all projections must share one dimension")
            w, vecs = _eigh_checked(p)
            keep = vecs[:, w > 0.5]
            if keep.shape[1] == 0:
                raise ValueError(f"projection for atom value {v} has rank zero")
            values.append(v)
            blocks.append(keep)
            starts.append(starts[-1] + keep.shape[1])
        if starts[-1] != dim:
            raise ValueError(
                f"atom ranks sum to {starts[-1]}, expected {dim}; "
                "projections do not resolve the identity"
            )
        measure = cls(values, np.hstack(blocks), starts)
        if validate:
            measure.validate()
        return measure

    def __repr__(self) -> str:  # pragma: no cover
        return f"SpectralMeasure(dim={self.dim}, atoms={self.atom_count})"


def from_hermitian(H, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectralMeasure:
    """Spectral measure of a Hermitian matrix.

    Eigenvalues closer than ``cluster_tol`` (gap-wise, after sorting) are
    merged into one atom whose value is the cluster mean and whose
    projection sums the corresponding rank-one projectors.
    """
    if cluster_tol < 0:
        raise ValueError("cluster_tol must be nonnegative")
    mat = HermitianMatrix.wrap(H).mat
    w, v = _eigh_checked(mat)
    # split where the gap exceeds cluster_tol
    if len(w) == 0:
        raise ValueError("empty matrix has no spectral measure")
    boundaries = [0]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > cluster_tol:
            boundaries.append(i)
    boundaries.append(len(w))
    values = [float(np.mean(w[a:b])) for a, b in zip(boundaries[:-1], boundaries[1:])]
    return SpectralMeasure(values, v, boundaries)


def apply_scalar(E: SpectralMeasure, g) -> np.ndarray:
    """Scalar functional calculus ``sum g(value_j) P_j``.

    ``g`` is any callable of one real variable.  The result is exactly
    Hermitian whenever ``g`` is real on the atom values.
    """
    gvals = np.empty(E.atom_count, dtype=np.complex128)
    for j, v in enumerate(E.values):
        try:
            gvals[j] = complex(g(float(v)))
        except Exception as exc:
            raise ValueError(
                f"scalar field evaluation failed at atom value {float(v)!r}: {exc}"
            ) from exc
    out = (E.basis * gvals[E.column_atom_index()]) @ E.basis.conj().T
    if np.all(gvals.imag == 0.0):
        out = (out + out.conj().T) / 2
    return out


def coordinate_measure(values) -> SpectralMeasure:
    """Standard-basis measure: atom ``j`` is ``e_j e_j*``.

    ``values`` is either an integer ``n`` (atom values ``0..n-1``) or a
    strictly increasing sequence of atom values, one per coordinate.
    """
    if isinstance(values, (int, np.integer)):
        vals = np.arange(int(values), dtype=np.float64)
    else:
        vals = np.asarray(values, dtype=np.float64)
    n = len(vals)
    if n == 0:
        raise ValueError("coordinate measure needs at least one atom")
    return SpectralMeasure(vals, np.eye(n, dtype=np.complex128), np.arange(n + 1))
