"""The trace-norm counterexample machinery.

Construction, for matrix size ``n``:

* ``A = C = diag(0, 2*pi, ..., 2*pi*(n-1))``;
* ``P`` the rank-one projection onto the uniform unit vector,
  ``B1 = 2*pi*P`` and ``B2 = 0``;
* ``f(x, y, z) = phi(x, z) * psi(y)`` where ``phi`` interpolates the
  upper-triangular 0/1 pattern on the lattice ``2*pi*(j, k)`` and
  ``psi = eta(. - 2*pi)`` satisfies ``psi(B1) = P``, ``psi(B2) = 0``.

Then ``f(A, B1, C) - f(A, B2, C) = U_n / n`` with ``U_n`` the matrix of
ones on and above the diagonal, whose trace norm grows like ``n log n``
while the perturbation ``B1 - B2`` has trace norm ``2*pi`` and
``sup |f| <= 1``.  Scaling ``g = eps f(./eps)`` on ``eps``-scaled operators
shrinks the perturbation while the trace-norm ratio keeps growing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .hermitian import HermitianMatrix, schatten_norm
from .opint import ScalarField, as_field, func_calc_triple, grid_eval, product_field
from .spectral import from_hermitian

TWO_PI = 2.0 * math.pi
_ETA_SERIES_CUTOFF = 1e-3

__all__ = [
    "TWO_PI",
    "eta",
    "eta_deriv",
    "eta_periodized",
    "EtaField",
    "eta_field",
    "CoeffMatrix",
    "triangular_coeffs",
    "phi_from_coeffs",
    "sup_norm_estimate",
    "upper_triangular_ones",
    "CounterexampleInstance",
    "build_instance",
    "difference_matrix",
    "closed_form_difference",
    "measured_sup_norm",
    "sup_norm_refinement",
    "growth_ratio",
    "closed_form_ratio",
    "scale_instance",
]


def eta(x):
    """The nonnegative bump ``2 (1 - cos x) / x^2``.

    Equals 1 at 0, vanishes to second order at every other multiple of
    ``2*pi``, stays in ``[0, 1]``, and its Fourier transform is the tent
    supported on ``[-1, 1]``.  Near 0 a Taylor series avoids the
    ``1 - cos`` cancellation.
    """
    xa = np.asarray(x, dtype=np.float64)
    small = np.abs(xa) < _ETA_SERIES_CUTOFF
    safe = np.where(small, 1.0, xa)
    x2 = xa * xa
    out = np.where(
        small,
        1.0 - x2 / 12.0 + x2 * x2 / 360.0,
        2.0 * (1.0 - np.cos(safe)) / (safe * safe),
    )
    return out[()]


def eta_deriv(x):
    """Derivative of :func:`eta`: ``(2 x sin x - 4 (1 - cos x)) / x^3``."""
    xa = np.asarray(x, dtype=np.float64)
    small = np.abs(xa) < _ETA_SERIES_CUTOFF
    safe = np.where(small, 1.0, xa)
    x2 = xa * xa
    out = np.where(
        small,
        -xa / 6.0 + xa * x2 / 90.0 - xa * x2 * x2 / 3360.0,
        (2.0 * safe * np.sin(safe) - 4.0 * (1.0 - np.cos(safe))) / (safe * safe * safe),
    )
    return out[()]


def eta_periodized(x, period: float):
    """Periodization ``sum_m eta(x + period * m)`` in closed form.

    Requires ``period`` to be a positive multiple of ``2*pi``, in which case
    ``cos`` is period-invariant and the lattice sum of ``1/(x + P m)^2``
    collapses to ``(pi/P)^2 / sin^2(pi x / P)``.  Used to sample ``eta`` on
    finite grids without truncating its ``1/x^2`` tails, which keeps the
    sampled spectrum exactly inside the band ``[-1, 1]``.
    """
    p = float(period)
    if p <= 0 or abs(p / TWO_PI - round(p / TWO_PI)) > 1e-9:
        raise ValueError(f"period must be a positive multiple of 2*pi, got {period!r}")
    xa = np.asarray(x, dtype=np.float64)
    # reduce to the fundamental domain [-P/2, P/2)
    u = np.remainder(xa + p / 2.0, p) - p / 2.0
    v = np.pi * u / p
    small = np.abs(u) < _ETA_SERIES_CUTOFF
    safe_u = np.where(small, 1.0, u)
    safe_v = np.where(small, 1.0, v)
    # bracket = (pi/P)^2 csc^2(v) - 1/u^2, regular at u = 0
    bracket = (np.pi / p) ** 2 / np.sin(safe_v) ** 2 - 1.0 / (safe_u * safe_u)
    v2 = v * v
    series = (np.pi / p) ** 2 * (1.0 / 3.0 + v2 / 15.0 + 2.0 * v2 * v2 / 189.0)
    bracket = np.where(small, series, bracket)
    out = eta(u) + 2.0 * (1.0 - np.cos(u)) * bracket
    return out[()]


@dataclass(frozen=True)
class EtaField(ScalarField):
    """Shifted bump ``x -> eta(x - shift)`` as a one-variable field."""

    shift: float = 0.0

    def derivative(self) -> ScalarField:
        s = self.shift
        return ScalarField(1, lambda x: eta_deriv(np.asarray(x, dtype=np.float64) - s),
                           name=f"eta'(.-{s:g})")


def eta_field(shift: float = 0.0) -> EtaField:
    s = float(shift)
    return EtaField(1, lambda x: eta(np.asarray(x, dtype=np.float64) - s),
                    name=f"eta(.-{s:g})", shift=s)


@dataclass(frozen=True)
class CoeffMatrix:
    """Finite complex coefficient family ``{c_jk}`` with its sup norm."""

    entries: np.ndarray
    sup_abs: float = field(init=False)

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("coefficient matrix must be 2-D and nonempty")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "sup_abs", float(np.abs(arr).max()))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def triangular_coeffs(n: int) -> CoeffMatrix:
    """Coefficients ``c_jk = 1`` for ``j <= k``, else 0 (0-indexed, n x n)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return CoeffMatrix(np.triu(np.ones((n, n))))


def _lattice(count: int) -> np.ndarray:
    return TWO_PI * np.arange(count, dtype=np.float64)


def phi_from_coeffs(c: CoeffMatrix) -> ScalarField:
    """Interpolant ``phi(x, y) = sum c_jk eta(x - 2 pi j) eta(y - 2 pi k)``.

    Interpolation is exact: ``phi(2 pi j, 2 pi k) = c_jk`` because the
    shifted bumps vanish on all other lattice points.  The coefficient
    matrix rides along as the field descriptor so that grid scans can use
    the bilinear structure.
    """
    lat_x = _lattice(c.rows)
    lat_y = _lattice(c.cols)
    entries = c.entries

    def fn(x, y):
        xa = np.asarray(x, dtype=np.float64)
        ya = np.asarray(y, dtype=np.float64)
        scalar = xa.ndim == 0 and ya.ndim == 0
        bx = eta(xa[..., None] - lat_x)
        by = eta(ya[..., None] - lat_y)
        t = bx @ entries
        if t.ndim == 3 and by.ndim == 3 and t.shape[1] == 1 and by.shape[0] == 1:
            # outer (meshgrid) pattern reduces to one bilinear product
            return t[:, 0, :] @ by[0].T
        shape = np.broadcast_shapes(t.shape[:-1], by.shape[:-1])
        tb = np.broadcast_to(t, shape + (c.cols,))
        byb = np.broadcast_to(by, shape + (c.cols,))
        out = np.einsum("...k,...k->...", tb, byb)
        return out[()] if scalar else out

    return ScalarField(2, fn, name="lattice-interpolant", descriptor=c)


def _grid_axis(radius: float, step: float) -> np.ndarray:
    if radius <= 0 or step <= 0:
        raise ValueError("grid radius and step must be positive")
    count = int(math.floor(2.0 * radius / step + 0.5)) + 1
    return -radius + step * np.arange(count)


_SUP_CHUNK = 512


def sup_norm_estimate(phi, grid_radius: float, grid_step: float) -> float:
    """Max of ``|phi|`` over the square grid ``[-R, R]^2`` with given step.

    Fields carrying a :class:`CoeffMatrix` descriptor are scanned through
    the bilinear form (one small GEMM per row block); anything else is
    evaluated directly in row chunks.
    """
    phi = as_field(phi, 2)
    axis = _grid_axis(grid_radius, grid_step)
    best = 0.0
    c = phi.descriptor
    if isinstance(c, CoeffMatrix):
        bx = eta(axis[:, None] - _lattice(c.rows)[None, :])  # (G, rows)
        by = eta(axis[:, None] - _lattice(c.cols)[None, :])  # (G, cols)
        entries = c.entries
        if np.all(entries.imag == 0.0):
            entries = entries.real
        ce = by @ entries.T  # (G, rows)
        for lo in range(0, len(axis), _SUP_CHUNK):
            block = bx[lo : lo + _SUP_CHUNK] @ ce.T  # (chunk, G)
            best = max(best, float(np.abs(block).max()))
        return best
    for lo in range(0, len(axis), _SUP_CHUNK):
        block = grid_eval(phi, axis[lo : lo + _SUP_CHUNK], axis)
        best = max(best, float(np.abs(block).max()))
    return best


def upper_triangular_ones(n: int) -> np.ndarray:
    return np.triu(np.ones((n, n), dtype=np.complex128))


@dataclass
class CounterexampleInstance:
    """One size of the counterexample family, possibly ``eps``-scaled.

    Invariants: ``B1 - B2`` has rank one with trace norm ``2*pi*epsilon``;
    ``A = C`` diagonal with entries ``2*pi*epsilon*j``; ``sup_bound`` is the
    a-priori bound ``epsilon * sup |c_jk|`` on ``|f|``.
    """

    n: int
    f: ScalarField
    phi: ScalarField
    psi: EtaField
    A: HermitianMatrix
    B1: HermitianMatrix
    B2: HermitianMatrix
    C: HermitianMatrix
    epsilon: float = 1.0
    sup_bound: float = 1.0
    _sup_cache: dict = field(default_factory=dict, repr=False)


def _instance_field(phi: ScalarField, psi: EtaField, eps: float) -> ScalarField:
    if eps == 1.0:
        return product_field(phi, psi)

    def fn(x, y, z):
        xa = np.asarray(x, dtype=np.float64) / eps
        ya = np.asarray(y, dtype=np.float64) / eps
        za = np.asarray(z, dtype=np.float64) / eps
        return eps * phi(xa, za) * psi(ya)

    return ScalarField(3, fn, name="product-scaled",
                       descriptor=("separable_xz_y_scaled", phi, psi, eps))


def build_instance(n: int) -> CounterexampleInstance:
    """Assemble the size-``n`` instance (unscaled, ``epsilon = 1``)."""
    if n < 2:
        raise ValueError("instance size must be at least 2")
    diag = HermitianMatrix.diag(TWO_PI * np.arange(n))
    proj = np.full((n, n), 1.0 / n, dtype=np.complex128)
    b1 = HermitianMatrix(TWO_PI * proj)
    b2 = HermitianMatrix.zeros(n)
    coeffs = triangular_coeffs(n)
    phi = phi_from_coeffs(coeffs)
    psi = eta_field(TWO_PI)
    f = _instance_field(phi, psi, 1.0)
    return CounterexampleInstance(
        n=n, f=f, phi=phi, psi=psi, A=diag, B1=b1, B2=b2, C=diag,
        epsilon=1.0, sup_bound=coeffs.sup_abs,
    )


def difference_matrix(inst: CounterexampleInstance) -> np.ndarray:
    """``f(A, B1, C) - f(A, B2, C)`` through the triple operator integral."""
    ea = from_hermitian(inst.A)
    ec = ea if inst.C is inst.A else from_hermitian(inst.C)
    eb1 = from_hermitian(inst.B1)
    eb2 = from_hermitian(inst.B2)
    return func_calc_triple(inst.f, ea, eb1, ec) - func_calc_triple(inst.f, ea, eb2, ec)


def closed_form_difference(inst: CounterexampleInstance) -> np.ndarray:
    """The same difference in closed form, ``epsilon * U_n / n``."""
    return (inst.epsilon / inst.n) * upper_triangular_ones(inst.n)


def measured_sup_norm(inst: CounterexampleInstance, step: float = math.pi / 8) -> float:
    """Grid estimate of ``sup |f|``.

    ``f = eps * phi(./eps) psi(./eps)`` splits over the grid
    ``[-2 pi n - pi, 2 pi n + pi]^2 x [0, 4 pi]`` (scaled by ``eps``), so the
    scan factors into the 2-D interpolant scan times the max of ``psi``.
    """
    key = float(step)
    if key in inst._sup_cache:
        return inst._sup_cache[key]
    radius = TWO_PI * inst.n + math.pi
    sup2 = sup_norm_estimate(inst.phi, radius, step)
    yaxis = np.arange(0.0, 4.0 * math.pi + step / 2.0, step)
    sup1 = float(np.abs(np.asarray(inst.psi(yaxis))).max())
    value = inst.epsilon * sup2 * sup1
    inst._sup_cache[key] = value
    return value


def sup_norm_refinement(inst: CounterexampleInstance, step: float = math.pi / 8) -> tuple[float, float, float]:
    """Base and half-step sup estimates plus their relative change."""
    base = measured_sup_norm(inst, step)
    fine = measured_sup_norm(inst, step / 2.0)
    rel = abs(fine - base) / fine if fine else 0.0
    return base, fine, rel


def _perturbation_norm(inst: CounterexampleInstance) -> float:
    return max(
        schatten_norm((inst.A - inst.A).mat, 1),
        schatten_norm((inst.B1 - inst.B2).mat, 1),
        schatten_norm((inst.C - inst.C).mat, 1),
    )


def growth_ratio(inst: CounterexampleInstance, *, sup_step: float = math.pi / 8) -> float:
    """Trace norm of the difference over ``sup|f| * max ||increment||_S1``."""
    num = schatten_norm(difference_matrix(inst), 1)
    den = measured_sup_norm(inst, sup_step) * _perturbation_norm(inst)
    if den == 0.0:
        raise ValueError("degenerate instance: zero denominator in growth ratio")
    return num / den


def closed_form_ratio(inst: CounterexampleInstance, *, sup_step: float = math.pi / 8) -> float:
    """Independent ratio path: singular values of ``U_n / n`` over
    ``sup|f| * 2 pi eps``."""
    num = schatten_norm(closed_form_difference(inst), 1)
    den = measured_sup_norm(inst, sup_step) * (TWO_PI * inst.epsilon)
    return num / den


def scale_instance(inst: CounterexampleInstance, eps: float) -> CounterexampleInstance:
    """Rescale: ``g = eps f(./eps)`` on ``eps``-scaled operators.

    The trace norm of the difference and of ``B1 - B2`` both scale by
    exactly ``eps``; the sup norm bound scales by ``eps`` as well.
    """
    e = float(eps)
    if not (e > 0.0) or not math.isfinite(e):
        raise ValueError(f"scale must be a positive finite number, got {eps!r}")
    total = inst.epsilon * e
    return CounterexampleInstance(
        n=inst.n,
        f=_instance_field(inst.phi, inst.psi, total),
        phi=inst.phi,
        psi=inst.psi,
        A=e * inst.A,
        B1=e * inst.B1,
        B2=e * inst.B2,
        C=(e * inst.A) if inst.C is inst.A else e * inst.C,
        epsilon=total,
        sup_bound=inst.sup_bound * e,
    )
