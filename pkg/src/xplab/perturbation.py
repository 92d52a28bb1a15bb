"""Divided differences and the trace-norm perturbation identities.

The central identity: for Hermitian ``A``, ``B`` with finite spectra and any
scalar function ``f``,

    f(A) - f(B) = doi(Df, E_A, A - B, E_B),

where ``Df`` is the divided difference of ``f``.  The value of ``Df`` on the
diagonal never matters, because ``E_A({v}) (A - B) E_B({v}) = 0`` whenever
``v`` is an eigenvalue of both operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .hermitian import HermitianMatrix, schatten_norm
from .opint import ScalarField, as_field, doi
from .spectral import SpectralMeasure, apply_scalar, from_hermitian

__all__ = [
    "DividedDifferenceField",
    "divided_difference",
    "perturbation_identity_residual",
    "diagonal_irrelevance_check",
    "psi_difference",
    "separated_difference",
]


def _eval_vectorized(fn: Callable, x: np.ndarray) -> np.ndarray:
    try:
        return np.asarray(fn(x), dtype=np.complex128)
    except Exception:
        return np.asarray(np.vectorize(lambda t: complex(fn(t)))(x), dtype=np.complex128)


@dataclass(frozen=True)
class DividedDifferenceField(ScalarField):
    """Two-variable field ``(f(x) - f(y)) / (x - y)`` with a caller-supplied
    value on the diagonal ``x == y`` (exact float equality)."""

    base: ScalarField = field(default=None, compare=False)
    diagonal: Callable[[Any], Any] = field(default=None, compare=False)


def divided_difference(phi, phi_prime) -> DividedDifferenceField:
    """Divided difference of ``phi`` with diagonal values ``phi_prime``.

    ``phi_prime`` is typically the derivative in closed form; any map works,
    since diagonal values never affect the perturbation identities.
    """
    base = as_field(phi, 1)
    diag = phi_prime

    def fn(x, y):
        xa = np.asarray(x, dtype=np.float64)
        ya = np.asarray(y, dtype=np.float64)
        scalar = xa.ndim == 0 and ya.ndim == 0
        xb, yb = np.broadcast_arrays(xa, ya)
        same = xb == yb
        denom = np.where(same, 1.0, xb - yb)
        vals = (_eval_vectorized(base, xb) - _eval_vectorized(base, yb)) / denom
        if same.any():
            vals = np.where(same, _eval_vectorized(diag, xb), vals)
        return vals[()] if scalar else vals

    return DividedDifferenceField(2, fn, name="divided-difference", base=base, diagonal=diag)


def _off_diagonal(dd: DividedDifferenceField) -> ScalarField:
    # same field with the diagonal cells zeroed (the sum over distinct
    # eigenvalue pairs only)
    def fn(x, y):
        xa = np.asarray(x, dtype=np.float64)
        ya = np.asarray(y, dtype=np.float64)
        scalar = xa.ndim == 0 and ya.ndim == 0
        xb, yb = np.broadcast_arrays(xa, ya)
        vals = np.where(xb == yb, 0.0 + 0.0j, np.asarray(dd(xb, yb), dtype=np.complex128))
        return vals[()] if scalar else vals

    return ScalarField(2, fn, name="divided-difference-offdiag")


def perturbation_identity_residual(f, f_prime, A, B) -> float:
    """Trace-norm residual of ``f(A) - f(B) - doi(Df, E_A, A - B, E_B)``.

    Vanishes (to roundoff) for every ``f`` on matrices with finite spectra;
    the contract is residual ``<= 1e-9 * (1 + ||A|| + ||B||)``.
    """
    A = HermitianMatrix.wrap(A)
    B = HermitianMatrix.wrap(B)
    ea = from_hermitian(A)
    eb = from_hermitian(B)
    f1 = as_field(f, 1)
    lhs = apply_scalar(ea, f1) - apply_scalar(eb, f1)
    rhs = doi(divided_difference(f1, f_prime), ea, (A - B).mat, eb)
    return schatten_norm(lhs - rhs, 1)


def diagonal_irrelevance_check(f, A, B, g1, g2) -> float:
    """Trace norm of the difference between the two double integrals built
    with diagonal assignments ``g1`` and ``g2`` for the divided difference.

    Exactly zero when the spectra of ``A`` and ``B`` are disjoint (the
    diagonal cells are never sampled); zero to roundoff otherwise.
    """
    A = HermitianMatrix.wrap(A)
    B = HermitianMatrix.wrap(B)
    ea = from_hermitian(A)
    eb = from_hermitian(B)
    diff = (A - B).mat
    f1 = as_field(f, 1)
    d1 = doi(divided_difference(f1, g1), ea, diff, eb)
    d2 = doi(divided_difference(f1, g2), ea, diff, eb)
    return schatten_norm(d1 - d2, 1)


def psi_difference(psi, psi_prime, B1, B2) -> np.ndarray:
    """The double-integral form of ``psi(B1) - psi(B2)``:

    ``sum over eigenvalues l of B1, m of B2 with l != m of
    (psi(l) - psi(m)) / (l - m) * E_B1({l}) (B1 - B2) E_B2({m})``.

    ``psi_prime`` enters only through cells that vanish identically; it is
    accepted for interface symmetry with :func:`divided_difference`.
    """
    B1 = HermitianMatrix.wrap(B1)
    B2 = HermitianMatrix.wrap(B2)
    e1 = from_hermitian(B1)
    e2 = from_hermitian(B2)
    dd = divided_difference(as_field(psi, 1), psi_prime)
    return doi(_off_diagonal(dd), e1, (B1 - B2).mat, e2)


def separated_difference(phi, psi, A, B1, B2, C) -> np.ndarray:
    """``doi(phi, E_A, Q, E_C)`` with ``Q = psi(B1) - psi(B2)``.

    Equals ``f(A, B1, C) - f(A, B2, C)`` for ``f(x, y, z) = phi(x, z) psi(y)``.
    """
    ea = from_hermitian(HermitianMatrix.wrap(A))
    ec = from_hermitian(HermitianMatrix.wrap(C))
    e1 = from_hermitian(HermitianMatrix.wrap(B1))
    e2 = from_hermitian(HermitianMatrix.wrap(B2))
    psi1 = as_field(psi, 1)
    q = apply_scalar(e1, psi1) - apply_scalar(e2, psi1)
    return doi(as_field(phi, 2), ea, q, ec)
