"""Double and triple operator integrals over finite atomic spectral
measures, and functional calculus for noncommuting Hermitian tuples.

With measures ``E1, E2, E3`` whose atoms are ``(a_j, P_j)``, ``(b_k, Q_k)``,
``(c_l, R_l)``:

* ``doi(Phi, E1, T, E2)   = sum_{j,k}   Phi(a_j, b_k)      P_j T Q_k``
* ``toi(Phi, E1, T1, E2, T2, E3)
                          = sum_{j,k,l} Phi(a_j, b_k, c_l) P_j T1 Q_k T2 R_l``

Both are evaluated in the concatenated eigenbases of the measures, where
the atom sums become Hadamard products; this is algebraically identical to
the literal sum over atoms and costs O(dim^3) regardless of atom count.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .hermitian import HermitianMatrix, as_matrix, schatten_norm
from .spectral import SpectralMeasure, apply_scalar, from_hermitian

__all__ = [
    "ScalarField",
    "as_field",
    "polynomial_field",
    "product_field",
    "grid_eval",
    "doi",
    "toi",
    "func_calc_pair",
    "func_calc_triple",
    "s2_contraction_check",
]


@dataclass(frozen=True)
class ScalarField:
    """Evaluatable function of 1, 2 or 3 real variables.

    ``fn`` should accept numpy arrays (broadcasting); scalar-only callables
    still work through the fallback loop in :func:`grid_eval`.  The optional
    ``descriptor`` carries structure (for example a coefficient expansion)
    that specialized routines can exploit; it never changes the values.
    """

    arity: int
    fn: Callable[..., Any]
    name: str | None = None
    descriptor: Any = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.arity not in (1, 2, 3):
            raise ValueError(f"arity must be 1, 2 or 3, got {self.arity}")

    def __call__(self, *args):
        if len(args) != self.arity:
            raise TypeError(f"field {self.name or ''!r} takes {self.arity} arguments, got {len(args)}")
        return self.fn(*args)


def as_field(obj, arity: int) -> ScalarField:
    """Coerce a callable to a :class:`ScalarField` of the given arity."""
    if isinstance(obj, ScalarField):
        if obj.arity != arity:
            raise ValueError(f"expected a field of {arity} variables, got {obj.arity}")
        return obj
    if callable(obj):
        return ScalarField(arity, obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a scalar field")


def polynomial_field(coeffs) -> ScalarField:
    """One-variable polynomial ``sum coeffs[k] x^k`` with exposed derivative.

    The returned field's descriptor is the ``numpy`` Polynomial object;
    ``derivative()`` on the descriptor is not needed by callers, use
    :func:`polynomial_field` of ``poly.deriv().coef`` instead.
    """
    poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=np.complex128))
    return ScalarField(1, poly, name=f"poly(deg={poly.degree()})", descriptor=poly)


def product_field(phi: ScalarField, psi: ScalarField) -> ScalarField:
    """Three-variable field ``f(x, y, z) = phi(x, z) * psi(y)``."""
    phi = as_field(phi, 2)
    psi = as_field(psi, 1)

    def fn(x, y, z):
        return phi(x, z) * psi(y)

    return ScalarField(3, fn, name="product", descriptor=("separable_xz_y", phi, psi))


def grid_eval(field_obj, *axes) -> np.ndarray:
    """Evaluate a field on the Cartesian grid of the given 1-D axes.

    Tries one broadcast call; falls back to an element-wise loop for
    callables that only take scalars.  Result is a complex array of shape
    ``(len(axes[0]), ..., len(axes[-1]))``.
    """
    f = as_field(field_obj, len(axes))
    axes = [np.asarray(a, dtype=np.float64) for a in axes]
    shape = tuple(len(a) for a in axes)
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    try:
        out = np.asarray(f(*mesh), dtype=np.complex128)
        return np.ascontiguousarray(np.broadcast_to(out, shape))
    except Exception:
        pass
    out = np.empty(shape, dtype=np.complex128)
    for idx in np.ndindex(shape):
        out[idx] = complex(f(*(float(a[i]) for a, i in zip(axes, idx))))
    return out


def _check_dim(name: str, got: int, want: int) -> None:
    if got != want:
        raise ValueError(f"dimension mismatch: {name} has dim {got}, expected {want}")


def _tampered() -> bool:
    # test hook for the verify harness; leaves release behavior untouched
    return os.environ.get("XPLAB_TAMPER_DOI", "") not in ("", "0")


def doi(phi, e1: SpectralMeasure, t, e2: SpectralMeasure) -> np.ndarray:
    """Double operator integral ``sum Phi(a_j, b_k) P_j T Q_k``."""
    tmat = as_matrix(t)
    _check_dim("T", tmat.shape[0], e1.dim)
    _check_dim("E2", e2.dim, e1.dim)
    fgrid = grid_eval(as_field(phi, 2), e1.values, e2.values)
    fcols = fgrid[np.ix_(e1.column_atom_index(), e2.column_atom_index())]
    tt = e1.basis.conj().T @ tmat @ e2.basis
    out = e1.basis @ (fcols * tt) @ e2.basis.conj().T
    if _tampered():
        out = out + 1e-6
    return out


def toi(phi, e1: SpectralMeasure, t1, e2: SpectralMeasure, t2, e3: SpectralMeasure) -> np.ndarray:
    """Triple operator integral ``sum Phi(a_j, b_k, c_l) P_j T1 Q_k T2 R_l``."""
    t1m, t2m = as_matrix(t1), as_matrix(t2)
    _check_dim("T1", t1m.shape[0], e1.dim)
    _check_dim("E2", e2.dim, e1.dim)
    _check_dim("T2", t2m.shape[0], e1.dim)
    _check_dim("E3", e3.dim, e1.dim)
    fgrid = grid_eval(as_field(phi, 3), e1.values, e2.values, e3.values)
    ci1 = e1.column_atom_index()
    ci3 = e3.column_atom_index()
    a1 = e1.basis.conj().T @ t1m @ e2.basis
    a2 = e2.basis.conj().T @ t2m @ e3.basis
    acc = np.zeros((e1.dim, e3.dim), dtype=np.complex128)
    for k in range(e2.atom_count):
        cols = slice(e2.starts[k], e2.starts[k + 1])
        slab = fgrid[:, k, :][np.ix_(ci1, ci3)]
        acc += slab * (a1[:, cols] @ a2[cols, :])
    return e1.basis @ acc @ e3.basis.conj().T


def _measure_of(x, cluster_tol: float) -> SpectralMeasure:
    if isinstance(x, SpectralMeasure):
        return x
    return from_hermitian(HermitianMatrix.wrap(x), cluster_tol)


def func_calc_pair(f, A, B, *, cluster_tol: float = 1e-8) -> np.ndarray:
    """``f(A, B) = sum f(lam_j, mu_k) P_j Q_k`` for a pair of Hermitian
    matrices (or prebuilt spectral measures)."""
    ea = _measure_of(A, cluster_tol)
    eb = _measure_of(B, cluster_tol)
    eye = np.eye(ea.dim, dtype=np.complex128)
    return doi(as_field(f, 2), ea, eye, eb)


def func_calc_triple(f, A, B, C, *, cluster_tol: float = 1e-8) -> np.ndarray:
    """``f(A, B, C) = sum f(lam, mu, nu) E_A E_B E_C`` for a Hermitian
    triple (or prebuilt spectral measures)."""
    ea = _measure_of(A, cluster_tol)
    eb = _measure_of(B, cluster_tol)
    ec = _measure_of(C, cluster_tol)
    eye = np.eye(ea.dim, dtype=np.complex128)
    return toi(as_field(f, 3), ea, eye, eb, eye, ec)


def s2_contraction_check(phi, e1: SpectralMeasure, e2: SpectralMeasure, t) -> tuple[float, float]:
    """Hilbert-Schmidt contraction of the double integral.

    Returns ``(lhs, rhs)`` with ``lhs = ||doi(Phi, E1, T, E2)||_S2`` and
    ``rhs = max |Phi(a_j, b_k)| * ||T||_S2`` and asserts ``lhs <= rhs`` up
    to ``1e-10`` (a violation means a bug, not bad data).
    """
    tmat = as_matrix(t)
    lhs = schatten_norm(doi(phi, e1, tmat, e2), 2)
    fgrid = grid_eval(as_field(phi, 2), e1.values, e2.values)
    rhs = float(np.abs(fgrid).max()) * schatten_norm(tmat, 2)
    if lhs > rhs + 1e-10:
        raise AssertionError(
            f"Hilbert-Schmidt contraction violated: lhs={lhs!r} > rhs={rhs!r}"
        )
    return lhs, rhs


# re-exported for convenience: the scalar calculus lives with the measures
__all__ += ["apply_scalar"]
