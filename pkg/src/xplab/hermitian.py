"""Dense complex-matrix numerics: Hermitian eigendecompositions, singular
values and Schatten norms.

Everything here is a pure function of its inputs.  Matrices are plain
``numpy`` arrays except for :class:`HermitianMatrix`, a thin immutable
wrapper that guarantees exact Hermitian symmetry.
"""

from __future__ import annotations

import math

import numpy as np

HERMITIAN_TOL = 1e-12

__all__ = [
    "HERMITIAN_TOL",
    "HermitianMatrix",
    "as_matrix",
    "hermitian_eig",
    "singular_values",
    "schatten_norm",
]


class HermitianMatrix:
    """Square complex matrix with Hermitian symmetry.

    The input must satisfy ``entries[j][k] == conj(entries[k][j])`` within
    ``1e-12`` (max-entry deviation); the stored matrix is the exactly
    symmetrized ``(H + H*) / 2`` and is read-only.

    Addition, subtraction and multiplication by a *real* scalar are
    supported and stay inside the class.
    """

    __slots__ = ("_mat",)

    def __init__(self, entries) -> None:
        mat = np.array(entries, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        deviation = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
        if deviation > HERMITIAN_TOL:
            raise ValueError(
                f"matrix is not Hermitian: max |H - H*| = {deviation:.3e} "
                f"exceeds {HERMITIAN_TOL:.0e}"
            )
        mat = (mat + mat.conj().T) / 2
        mat.setflags(write=False)
        self._mat = mat

    @property
    def mat(self) -> np.ndarray:
        """The underlying (read-only) complex array."""
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    @classmethod
    def diag(cls, values) -> "HermitianMatrix":
        """Diagonal Hermitian matrix from a sequence of real values."""
        vals = np.asarray(values, dtype=np.float64)
        return cls(np.diag(vals.astype(np.complex128)))

    @classmethod
    def zeros(cls, dim: int) -> "HermitianMatrix":
        return cls(np.zeros((dim, dim), dtype=np.complex128))

    @classmethod
    def wrap(cls, obj) -> "HermitianMatrix":
        """Coerce an array-like (or pass through a HermitianMatrix)."""
        if isinstance(obj, cls):
            return obj
        return cls(obj)

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self._mat + HermitianMatrix.wrap(other)._mat)

    def __sub__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self._mat - HermitianMatrix.wrap(other)._mat)

    def __neg__(self) -> "HermitianMatrix":
        return HermitianMatrix(-self._mat)

    def __mul__(self, scalar) -> "HermitianMatrix":
        s = complex(scalar)
        if s.imag != 0.0:
            raise ValueError("only real scalars keep a Hermitian matrix Hermitian")
        return HermitianMatrix(self._mat * s.real)

    __rmul__ = __mul__

    def __repr__(self) -> str:  # pragma: no cover
        return f"HermitianMatrix(dim={self.dim})"


def as_matrix(obj) -> np.ndarray:
    """Return a complex 2-D array view of ``obj`` (HermitianMatrix or array)."""
    if isinstance(obj, HermitianMatrix):
        return obj.mat
    mat = np.asarray(obj, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    return mat


def _eigh_checked(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        n = mat.shape[0]
        raise RuntimeError(
            f"eigendecomposition did not converge for a {n}x{n} Hermitian matrix"
        ) from exc


def hermitian_eig(H) -> list[tuple[float, np.ndarray]]:
    """Eigendecomposition of a Hermitian matrix.

    Returns a list of ``(eigenvalue, eigenvector)`` pairs with eigenvalues
    ascending and eigenvectors orthonormal, so that
    ``H = sum(lam * outer(v, v.conj()))``.
    """
    mat = HermitianMatrix.wrap(H).mat
    w, v = _eigh_checked(mat)
    return [(float(w[i]), v[:, i].copy()) for i in range(len(w))]


def singular_values(M) -> np.ndarray:
    """Singular values of a square complex matrix, descending.

    Equal to the square roots of the eigenvalues of ``M* M``; computed by a
    direct SVD, which keeps the small singular values accurate to machine
    precision instead of ``sqrt(eps)``.
    """
    mat = as_matrix(M)
    if mat.size == 0:
        return np.zeros(0)
    try:
        s = np.linalg.svd(mat, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        n = mat.shape[0]
        raise RuntimeError(f"SVD did not converge for a {n}x{n} matrix") from exc
    return s


def schatten_norm(M, p) -> float:
    """Schatten p-norm ``(sum sigma_k^p)^(1/p)``; ``p = inf`` gives the
    operator norm (largest singular value).  Requires ``p >= 1``."""
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"Schatten exponent must satisfy p >= 1, got {p}")
    s = singular_values(M)
    if s.size == 0:
        return 0.0
    if math.isinf(p):
        return float(s[0])
    if p == 1.0:
        return float(np.sum(s))
    if p == 2.0:
        # Frobenius; sum of squares is cheaper and exact
        return float(np.sqrt(np.sum(s * s)))
    smax = float(s[0])
    if smax == 0.0:
        return 0.0
    # scale out the largest value so large p does not overflow
    return float(smax * np.sum((s / smax) ** p) ** (1.0 / p))
