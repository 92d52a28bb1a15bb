"""Grid sampling of the built-in function families for spectral analysis.

The bump ``eta`` decays like ``1/x^2``, so truncating it on a finite grid
leaks spectral mass outside its band.  All samplers here use the exact
periodization (:func:`xplab.counterexample.eta_periodized`), which makes
the sampled spectra band-limited to machine precision; grid spans must
therefore be multiples of ``2*pi``.
"""

from __future__ import annotations

import math

import numpy as np

from .besov import SampledField, SeparableField3, _is_pow2
from .counterexample import (
    TWO_PI,
    CoeffMatrix,
    CounterexampleInstance,
    eta_periodized,
)

__all__ = [
    "sample_eta_1d",
    "sample_phi_2d",
    "sample_instance",
    "default_piece_range",
]


def _check_span(span: float, what: str) -> None:
    if abs(span / TWO_PI - round(span / TWO_PI)) > 1e-9:
        raise ValueError(f"{what} span {span:g} must be a multiple of 2*pi for periodized sampling")


def sample_eta_1d(shift: float = 0.0, extent: float = 64 * math.pi, points: int = 2**14) -> SampledField:
    """Periodized samples of ``eta(. - shift)`` on ``[-extent, extent)``."""
    if not _is_pow2(points):
        raise ValueError(f"points must be a power of two, got {points}")
    span = 2.0 * extent
    _check_span(span, "grid")
    step = span / points
    x = -extent + step * np.arange(points)
    return SampledField((-extent,), (step,), eta_periodized(x - shift, span))


def _lattice_axis(count: int, step: float, margin: float) -> tuple[float, int]:
    """Power-of-two axis covering the lattice ``2*pi*(0..count-1)`` plus margin."""
    needed = TWO_PI * (count - 1) + 2.0 * margin
    n = 1 << max(3, int(math.ceil(math.log2(needed / step))))
    span = n * step
    start = (TWO_PI * (count - 1) - span) / 2.0
    return start, n


def sample_phi_2d(c: CoeffMatrix, step: float = math.pi / 4, margin: float = 8 * math.pi) -> SampledField:
    """Periodized samples of the lattice interpolant of ``c`` on a square
    grid centered on its coefficient lattice."""
    x0, nx = _lattice_axis(c.rows, step, margin)
    z0, nz = _lattice_axis(c.cols, step, margin)
    _check_span(nx * step, "x axis")
    _check_span(nz * step, "z axis")
    x = x0 + step * np.arange(nx)
    z = z0 + step * np.arange(nz)
    bx = np.empty((c.rows, nx))
    for j in range(c.rows):
        bx[j] = eta_periodized(x - TWO_PI * j, nx * step)
    bz = np.empty((c.cols, nz))
    for k in range(c.cols):
        bz[k] = eta_periodized(z - TWO_PI * k, nz * step)
    entries = c.entries.real if np.all(c.entries.imag == 0.0) else c.entries
    samples = bx.T @ entries @ bz
    return SampledField((x0, z0), (step, step), samples)


def sample_instance(
    inst: CounterexampleInstance,
    step: float = math.pi / 4,
    margin: float = 8 * math.pi,
    yspan: float = 16 * math.pi,
) -> SeparableField3:
    """Separable samples of the instance function ``f = eps phi(./eps) psi(./eps)``.

    The plane factor carries ``eps * phi`` on the scaled (x, z) grid and the
    line factor ``psi`` on a scaled y grid centered at ``2*pi*eps``; their
    product reproduces ``f`` exactly on the product grid.
    """
    c = inst.phi.descriptor
    if not isinstance(c, CoeffMatrix):
        raise ValueError("instance interpolant lacks a coefficient descriptor")
    plane = sample_phi_2d(c, step=step, margin=margin)
    ny = int(round(yspan / step))
    if not _is_pow2(ny) or abs(ny * step - yspan) > 1e-9 * yspan:
        raise ValueError(
            f"y span {yspan:g} over step {step:g} must give a power-of-two count, got {yspan / step:g}"
        )
    _check_span(yspan, "y axis")
    y0 = TWO_PI - yspan / 2.0
    y = y0 + step * np.arange(ny)
    line = eta_periodized(y - TWO_PI, yspan)
    e = inst.epsilon
    return SeparableField3(
        plane=SampledField(
            (e * plane.starts[0], e * plane.starts[1]),
            (e * step, e * step),
            e * plane.samples,
        ),
        line=SampledField((e * y0,), (e * step,), line),
    )


def default_piece_range(f, n_min: int = -20, n_max: int = 5) -> tuple[int, int]:
    """Clamp ``n_max`` so every requested piece passes the Nyquist guard."""
    nyq = min(f.plane.nyquist(), f.line.nyquist()) if isinstance(f, SeparableField3) else f.nyquist()
    highest = int(math.floor(math.log2(nyq))) - 1
    return n_min, min(n_max, highest)
