"""Experiment driver: the trace-norm growth experiment, the randomized
identity suites, and scalar Besov reports.

Everything is deterministic for a fixed configuration; randomized suites
draw from one seeded generator.  Reports are written as CSV (one row per
size) and JSON (rows plus the log fit and the configuration); both carry
the same shortest-round-trip float strings.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .besov import bandlimit_check, besov_breakdown, make_window
from .counterexample import (
    TWO_PI,
    build_instance,
    closed_form_ratio,
    difference_matrix,
    eta,
    eta_field,
    measured_sup_norm,
    scale_instance,
    triangular_coeffs,
)
from .hermitian import HermitianMatrix, schatten_norm, singular_values
from .opint import (
    ScalarField,
    doi,
    func_calc_triple,
    grid_eval,
    polynomial_field,
    product_field,
    s2_contraction_check,
)
from .perturbation import (
    perturbation_identity_residual,
    psi_difference,
    separated_difference,
)
from .sampling import default_piece_range, sample_eta_1d, sample_instance, sample_phi_2d
from .spectral import apply_scalar, coordinate_measure, from_hermitian

__all__ = [
    "EPSILON_SCHEDULES",
    "ExperimentConfig",
    "SizeRow",
    "ExperimentReport",
    "log_fit",
    "cmd_growth",
    "SuiteResult",
    "VerifySummary",
    "cmd_verify",
    "BesovScalarReport",
    "cmd_besov",
]

EPSILON_SCHEDULES = ("constant", "one_over_size", "one_over_loglog")


def _schedule_value(name: str, n: int) -> float:
    if name == "constant":
        return 1.0
    if name == "one_over_size":
        return 1.0 / n
    if name == "one_over_loglog":
        return 1.0 / math.log(math.log(n))
    raise ValueError(f"unknown epsilon schedule {name!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration for the growth experiment.

    ``sizes`` must be ascending; ``epsilon_schedule`` is one of
    ``constant | one_over_size | one_over_loglog``; Besov estimates are
    computed for sizes up to ``besov_max_size`` (larger grids would not fit
    the run budget) and reported as missing beyond it.
    """

    sizes: tuple
    epsilon_schedule: str = "constant"
    sup_step: float = math.pi / 8
    besov_max_size: int = 64
    besov_step: float = math.pi / 4
    besov_margin: float = 8 * math.pi
    besov_yspan: float = 16 * math.pi
    besov_n_min: int = -20
    besov_n_max: int = 5
    seed: int = 42

    def validate(self) -> None:
        if not self.sizes:
            raise ValueError("config needs at least one size")
        sizes = tuple(int(n) for n in self.sizes)
        if any(n < 2 for n in sizes):
            raise ValueError("instance sizes must be at least 2")
        if list(sizes) != sorted(set(sizes)):
            raise ValueError("sizes must be strictly ascending")
        if self.epsilon_schedule not in EPSILON_SCHEDULES:
            raise ValueError(
                f"unknown epsilon schedule {self.epsilon_schedule!r}; "
                f"choose one of {', '.join(EPSILON_SCHEDULES)}"
            )
        if self.epsilon_schedule == "one_over_loglog" and min(sizes) < 3:
            raise ValueError("the 1/loglog schedule needs sizes >= 3")
        if self.sup_step <= 0 or self.besov_step <= 0:
            raise ValueError("grid steps must be positive")


@dataclass(frozen=True)
class SizeRow:
    n: int
    s1_diff_norm: float
    perturbation_s1: float
    sup_norm: float
    besov_estimate: float | None
    ratio: float
    closed_form_ratio: float
    wall_time_ms: float


CSV_COLUMNS = (
    "n",
    "s1_diff_norm",
    "perturbation_s1",
    "sup_norm",
    "besov_estimate",
    "ratio",
    "closed_form_ratio",
    "wall_time_ms",
)


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple
    fit_a: float
    fit_b: float
    fit_r2: float
    config: ExperimentConfig

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "rows": [asdict(r) for r in self.rows],
            "fit": {"a": self.fit_a, "b": self.fit_b, "r_squared": self.fit_r2},
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return repr(int(value))
    return repr(float(value))


def log_fit(ns, ys) -> tuple[float, float, float]:
    """Least squares ``y ~ a + b ln n``; returns ``(a, b, r_squared)``."""
    ns = np.asarray(ns, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(ns) < 2:
        return float("nan"), float("nan"), float("nan")
    b, a = np.polyfit(np.log(ns), ys, 1)
    pred = a + b * np.log(ns)
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2


def _grow_one(n: int, config: ExperimentConfig) -> SizeRow:
    t0 = time.perf_counter()
    inst = build_instance(n)
    diff = difference_matrix(inst)
    diff_norm = schatten_norm(diff, 1)
    sup = measured_sup_norm(inst, config.sup_step)
    pert_unscaled = schatten_norm((inst.B1 - inst.B2).mat, 1)
    ratio = diff_norm / (sup * pert_unscaled)
    closed = closed_form_ratio(inst, sup_step=config.sup_step)

    eps = _schedule_value(config.epsilon_schedule, n)
    if eps == 1.0:
        s1_diff, pert = diff_norm, pert_unscaled
    else:
        scaled = scale_instance(inst, eps)
        s1_diff = schatten_norm(difference_matrix(scaled), 1)
        pert = schatten_norm((scaled.B1 - scaled.B2).mat, 1)

    if n <= config.besov_max_size:
        f3 = sample_instance(inst, step=config.besov_step,
                             margin=config.besov_margin, yspan=config.besov_yspan)
        n_min, n_max = default_piece_range(f3, config.besov_n_min, config.besov_n_max)
        besov = besov_breakdown(f3, make_window(), n_min, n_max).total
    else:
        besov = None

    wall = (time.perf_counter() - t0) * 1000.0
    return SizeRow(
        n=n,
        s1_diff_norm=float(s1_diff),
        perturbation_s1=float(pert),
        sup_norm=float(sup),
        besov_estimate=None if besov is None else float(besov),
        ratio=float(ratio),
        closed_form_ratio=float(closed),
        wall_time_ms=float(wall),
    )


def _worker_count() -> int:
    env = os.environ.get("XPLAB_THREADS", "")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cmd_growth(config: ExperimentConfig, csv_path=None, json_path=None) -> ExperimentReport:
    """Run the growth experiment over the configured sizes.

    Sizes run on a worker pool (capped by ``XPLAB_THREADS``); rows are
    assembled in size order, so the report is deterministic for a fixed
    configuration.
    """
    config.validate()
    sizes = [int(n) for n in config.sizes]
    workers = min(_worker_count(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda n: _grow_one(n, config), sizes))
    else:
        rows = [_grow_one(n, config) for n in sizes]
    a, b, r2 = log_fit([r.n for r in rows], [r.ratio for r in rows])
    report = ExperimentReport(rows=tuple(rows), fit_a=a, fit_b=b, fit_r2=r2, config=config)
    if csv_path is not None:
        report.write_csv(csv_path)
    if json_path is not None:
        report.write_json(json_path)
    return report


# ---------------------------------------------------------------------------
# verify suites


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


@dataclass(frozen=True)
class VerifySummary:
    seed: int
    trials: int
    suites: tuple

    @property
    def all_passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def lines(self) -> list[str]:
        out = []
        for s in self.suites:
            status = "PASS" if s.passed else "FAIL"
            out.append(f"[{status}] {s.name}: max residual {s.max_residual:.3e} (tol {s.tolerance:.1e})")
        return out


def _random_hermitian(rng, n: int, scale: float = 1.0) -> HermitianMatrix:
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return HermitianMatrix(scale * (raw + raw.conj().T) / (2.0 * math.sqrt(n)))


def _random_unitary(rng, n: int) -> np.ndarray:
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(raw)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _test_fields(rng) -> list[tuple[ScalarField, object]]:
    """Five random polynomials of degree <= 5 plus eta and its shift."""
    fields = []
    for _ in range(5):
        deg = int(rng.integers(1, 6))
        coeffs = rng.standard_normal(deg + 1)
        poly = polynomial_field(coeffs)
        dpoly = polynomial_field(np.polynomial.Polynomial(coeffs).deriv().coef)
        fields.append((poly, dpoly))
    for shift in (0.0, TWO_PI):
        f = eta_field(shift)
        fields.append((f, f.derivative()))
    return fields


def _suite_perturbation(rng, trials: int) -> SuiteResult:
    fields = _test_fields(rng)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 17))
        a = _random_hermitian(rng, n, 2.0)
        b = _random_hermitian(rng, n, 2.0)
        bound = 1.0 + schatten_norm(a.mat, math.inf) + schatten_norm(b.mat, math.inf)
        for f, df in fields:
            worst = max(worst, perturbation_identity_residual(f, df, a, b) / bound)
    return SuiteResult("perturbation identity (trace norm)", worst, 1e-9)


def _suite_psi_difference(rng, trials: int) -> SuiteResult:
    psi = eta_field(TWO_PI)
    dpsi = psi.derivative()
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 13))
        b1 = _random_hermitian(rng, n, 2.0)
        b2 = _random_hermitian(rng, n, 2.0)
        q = psi_difference(psi, dpsi, b1, b2)
        ref = apply_scalar(from_hermitian(b1), psi) - apply_scalar(from_hermitian(b2), psi)
        worst = max(worst, schatten_norm(q - ref, 1))
    return SuiteResult("rank-difference identity", worst, 1e-9)


def _random_bivariate(rng) -> ScalarField:
    coeffs = rng.standard_normal((3, 3))

    def fn(x, y):
        xa = np.asarray(x, dtype=np.float64)
        ya = np.asarray(y, dtype=np.float64)
        acc = 0.0
        for i in range(3):
            for j in range(3):
                acc = acc + coeffs[i, j] * xa**i * ya**j
        return acc

    return ScalarField(2, fn, name="random-bivariate")


def _suite_separated(rng, trials: int) -> SuiteResult:
    psi = eta_field(TWO_PI)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        a = _random_hermitian(rng, n, 2.0)
        b1 = _random_hermitian(rng, n, 2.0)
        b2 = _random_hermitian(rng, n, 2.0)
        c = _random_hermitian(rng, n, 2.0)
        phi = _random_bivariate(rng)
        lhs = separated_difference(phi, psi, a, b1, b2, c)
        f3 = product_field(phi, psi)
        rhs = func_calc_triple(f3, a, b1, c) - func_calc_triple(f3, a, b2, c)
        worst = max(worst, schatten_norm(lhs - rhs, 1))
    return SuiteResult("separated triple difference", worst, 1e-9)


def _suite_hs_contraction(rng, trials: int) -> SuiteResult:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        e1 = from_hermitian(_random_hermitian(rng, n, 2.0))
        e2 = from_hermitian(_random_hermitian(rng, n, 2.0))
        t = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        phi = _random_bivariate(rng)
        lhs, rhs = s2_contraction_check(phi, e1, e2, t)
        worst = max(worst, lhs - rhs)
        # equality at the maximizing matrix unit over coordinate measures
        ec = coordinate_measure(n)
        grid = np.abs(grid_eval(phi, ec.values, ec.values))
        jstar, kstar = np.unravel_index(int(grid.argmax()), grid.shape)
        unit = np.zeros((n, n), dtype=np.complex128)
        unit[jstar, kstar] = 1.0
        lhs_u, rhs_u = s2_contraction_check(phi, ec, ec, unit)
        worst = max(worst, abs(lhs_u - rhs_u))
    return SuiteResult("Hilbert-Schmidt contraction", max(worst, 0.0), 1e-10)


def _suite_hadamard(rng, trials: int) -> SuiteResult:
    worst = 0.0
    for n in range(1, 9):
        for _ in range(max(1, trials // 8)):
            e = coordinate_measure(n)
            t = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            symbol = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            phi = ScalarField(2, lambda x, y, s=symbol: s[
                np.asarray(x, dtype=int), np.asarray(y, dtype=int)
            ])
            got = doi(phi, e, t, e)
            worst = max(worst, float(np.abs(got - symbol * t).max()))
    return SuiteResult("coordinate-atom Hadamard product", worst, 1e-12)


def _suite_window(rng, trials: int) -> SuiteResult:
    w = make_window()
    s = np.logspace(-3, 3, 1001)
    acc = np.zeros_like(s)
    for n in range(-20, 21):
        acc += w(s / 2.0**n)
    return SuiteResult("window partition of unity", float(np.abs(acc - 1.0).max()), 1e-9)


def _suite_eta(rng, trials: int) -> SuiteResult:
    ks = np.arange(-20, 21)
    vals = eta(TWO_PI * ks.astype(np.float64))
    worst = float(np.abs(np.where(ks == 0, vals - 1.0, vals)).max())
    xs = np.linspace(-300.0, 300.0, 20001)
    worst = max(worst, float(np.max(np.abs(eta(xs)) - 1.0)), 0.0)
    return SuiteResult("eta lattice certificate", worst, 1e-12)


def _suite_schatten(rng, trials: int) -> SuiteResult:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        u = _random_unitary(rng, n)
        v = _random_unitary(rng, n)
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            worst = max(worst, abs(schatten_norm(u @ m @ v, p) - schatten_norm(m, p)))
        ps = [1.0, 1.3, 2.0, 4.0, math.inf]
        norms = [schatten_norm(m, p) for p in ps]
        for lo, hi in zip(norms[:-1], norms[1:]):
            worst = max(worst, hi - lo)  # p-monotone: larger p, smaller norm
    return SuiteResult("Schatten norm invariances", max(worst, 0.0), 1e-10)


_SUITES = (
    _suite_perturbation,
    _suite_psi_difference,
    _suite_separated,
    _suite_hs_contraction,
    _suite_hadamard,
    _suite_window,
    _suite_eta,
    _suite_schatten,
)


def cmd_verify(seed: int = 42, trials: int = 100) -> VerifySummary:
    """Run every identity suite on seeded random data."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    results = []
    for suite in _SUITES:
        rng = np.random.default_rng(seed)
        results.append(suite(rng, trials))
    return VerifySummary(seed=seed, trials=trials, suites=tuple(results))


# ---------------------------------------------------------------------------
# scalar Besov reports


@dataclass(frozen=True)
class BesovScalarReport:
    function: str
    estimate: float
    tail_bound: float
    sup_abs: float
    bandlimit_sigma: float
    bandlimit_mass: float
    piece_sup: dict

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "besov_estimate": self.estimate,
            "tail_bound": self.tail_bound,
            "sup_abs": self.sup_abs,
            "bandlimit_sigma": self.bandlimit_sigma,
            "bandlimit_mass": self.bandlimit_mass,
            "piece_sup": {str(k): v for k, v in self.piece_sup.items()},
        }

    def lines(self) -> list[str]:
        return [
            f"function        {self.function}",
            f"besov_estimate  {self.estimate!r}",
            f"tail_bound      {self.tail_bound!r}",
            f"sup_abs         {self.sup_abs!r}",
            f"bandlimit_mass  {self.bandlimit_mass!r} (outside radius {self.bandlimit_sigma:g})",
        ]


def _parse_size(token: str, name: str) -> int:
    try:
        n = int(token)
    except ValueError:
        raise ValueError(f"bad size in function name {name!r}") from None
    if n < 2:
        raise ValueError(f"size in {name!r} must be at least 2")
    return n


def cmd_besov(function_name: str, extent: float = 64 * math.pi, points: int = 2**14,
              n_min: int = -20, n_max: int = 5) -> BesovScalarReport:
    """Besov estimate, tail bound and band-limit mass for a named function.

    Known names: ``eta``, ``psi``, ``phi_tri:<n>`` (2-D interpolant of the
    triangular pattern), ``f3:<n>`` (the 3-D instance function).
    """
    name = function_name.strip()
    if name == "eta":
        f = sample_eta_1d(0.0, extent, points)
        sigma = 1.0
    elif name == "psi":
        f = sample_eta_1d(TWO_PI, extent, points)
        sigma = 1.0
    elif name.startswith("phi_tri:"):
        n = _parse_size(name.split(":", 1)[1], name)
        f = sample_phi_2d(triangular_coeffs(n))
        sigma = math.sqrt(2.0)
    elif name.startswith("f3:"):
        n = _parse_size(name.split(":", 1)[1], name)
        f = sample_instance(build_instance(n))
        sigma = math.sqrt(3.0)
    else:
        raise ValueError(
            f"unknown function name {function_name!r}; "
            "expected eta, psi, phi_tri:<n> or f3:<n>"
        )
    lo, hi = default_piece_range(f, n_min, n_max)
    breakdown = besov_breakdown(f, make_window(), lo, hi)
    mass = bandlimit_check(f, sigma)
    return BesovScalarReport(
        function=name,
        estimate=breakdown.total,
        tail_bound=breakdown.tail_bound,
        sup_abs=breakdown.sup_abs,
        bandlimit_sigma=sigma,
        bandlimit_mass=float(mass),
        piece_sup=dict(breakdown.piece_sup),
    )
