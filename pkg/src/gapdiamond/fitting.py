"""Least-squares estimation for waveguide measurements.

Two fits: the exponential propagation-loss fit of photoluminescence decay
traces (log-linear ordinary least squares, closed form), and a bounded
one-parameter fit of the air-gap thickness that best explains measured
penetration ratios against the slab model (golden-section search).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    NV_WAVELENGTH_NM,
    FitError,
    GapDiamondError,
    Polarization,
    UnguidedError,
    ValidationError,
    inverse_meters_to_db_per_cm,
)
from .slab import MembraneStackTemplate, penetration_ratio

__all__ = [
    "DecayTrace",
    "FitResult",
    "GoodnessOfFit",
    "fit_exponential_decay",
    "alpha_db_per_cm",
    "fit_air_gap",
    "air_gap_sse",
    "goodness_of_fit",
    "read_decay_csv",
    "read_ratio_csv",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class DecayTrace:
    """Positions (nm, strictly increasing) and positive intensities."""

    positions_nm: np.ndarray
    intensities: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        positions = np.asarray(self.positions_nm, dtype=float)
        intensities = np.asarray(self.intensities, dtype=float)
        object.__setattr__(self, "positions_nm", positions)
        object.__setattr__(self, "intensities", intensities)
        if positions.ndim != 1 or positions.shape != intensities.shape:
            raise FitError("positions and intensities must be 1-D arrays of equal length")
        if positions.size < 3:
            raise FitError(f"a decay trace needs at least 3 points, got {positions.size}")
        if np.any(np.diff(positions) <= 0):
            raise FitError("positions must be strictly increasing")
        if np.any(intensities <= 0):
            raise FitError("intensities must be positive")
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            object.__setattr__(self, "sigma", sigma)
            if sigma.shape != positions.shape or np.any(sigma <= 0):
                raise FitError("per-point uncertainties must be positive and match the trace length")


@dataclass(frozen=True)
class FitResult:
    """Parameter estimates with their uncertainty and fit diagnostics."""

    parameter_names: tuple[str, ...]
    parameters: tuple[float, ...]
    stderrs: tuple[float, ...]
    rss: float
    dof: int
    n_points: int
    total_ss: float
    reduced_chi2: float | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.parameters) != len(self.parameter_names) or len(self.stderrs) != len(self.parameters):
            raise ValidationError("parameter names, values, and errors must align")
        if any(se < 0 for se in self.stderrs):
            raise ValidationError("standard errors must be non-negative")
        if self.dof < 1 or self.dof != self.n_points - len(self.parameters):
            raise ValidationError("degrees of freedom must equal points minus parameters and be >= 1")

    def value(self, name: str) -> float:
        return self.parameters[self.parameter_names.index(name)]

    def stderr(self, name: str) -> float:
        return self.stderrs[self.parameter_names.index(name)]


def fit_exponential_decay(trace: DecayTrace) -> FitResult:
    """Fit I(x) = I0 exp(-alpha x) by ordinary least squares on ln I.

    Returns alpha in 1/m (with its standard error from the residual
    variance) and ln I0.  A negative alpha is allowed but flagged, since it
    means the trace brightens along the propagation direction.
    """
    x = trace.positions_nm * 1e-9
    y = np.log(trace.intensities)
    n = x.size
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    slope = float(np.sum((x - x_mean) * (y - y_mean)) / sxx)
    intercept = y_mean - slope * x_mean
    residuals = y - (intercept + slope * x)
    rss = float(residuals @ residuals)
    dof = n - 2
    s2 = rss / dof
    se_slope = math.sqrt(s2 / sxx)
    se_intercept = math.sqrt(s2 * (1.0 / n + x_mean**2 / sxx))
    total_ss = float(np.sum((y - y_mean) ** 2))

    reduced_chi2 = None
    if trace.sigma is not None:
        sigma_log = trace.sigma / trace.intensities
        reduced_chi2 = float(np.sum((residuals / sigma_log) ** 2) / dof)

    alpha = -slope
    notes = ()
    if alpha < 0:
        notes = ("negative loss (gain): check data orientation",)
    return FitResult(
        parameter_names=("alpha_per_m", "ln_i0"),
        parameters=(alpha, intercept),
        stderrs=(se_slope, se_intercept),
        rss=rss,
        dof=dof,
        n_points=n,
        total_ss=total_ss,
        reduced_chi2=reduced_chi2,
        notes=notes,
    )


def alpha_db_per_cm(result: FitResult) -> tuple[float, float]:
    """The fitted loss and its standard error converted to dB/cm."""
    alpha = result.value("alpha_per_m")
    scale = inverse_meters_to_db_per_cm(1.0)
    return alpha * scale, result.stderr("alpha_per_m") * scale


def air_gap_sse(
    gap_nm: float,
    thicknesses_nm,
    ratios,
    polarizations,
    *,
    template: MembraneStackTemplate | None = None,
    wavelength_nm: float = NV_WAVELENGTH_NM,
    window_nm: float = 100.0,
) -> float:
    """Sum of squared residuals of the slab-model ratio against the data.

    A gap that leaves some point unguided cannot explain a measured ratio
    at all and scores infinity; that keeps the bounded search well defined
    even where large gaps destroy guidance.  Any other model failure
    propagates with the offending thickness.
    """
    template = template or MembraneStackTemplate()
    pols = _broadcast_polarizations(polarizations, len(thicknesses_nm))
    sse = 0.0
    for t, r, pol in zip(thicknesses_nm, ratios, pols):
        try:
            model = penetration_ratio(
                template.stack(float(t), gap_nm),
                wavelength_nm,
                pol,
                window_nm,
                membrane_name=template.membrane_name,
                substrate_name=template.substrate_name,
            )
        except UnguidedError:
            return math.inf
        except GapDiamondError as err:
            raise FitError(f"model evaluation failed at thickness={t} nm (gap={gap_nm} nm): {err}") from err
        sse += (model - float(r)) ** 2
    return sse


def _broadcast_polarizations(polarizations, count: int) -> list[Polarization]:
    if isinstance(polarizations, Polarization):
        return [polarizations] * count
    pols = [Polarization.parse(p) if not isinstance(p, Polarization) else p for p in polarizations]
    if len(pols) != count:
        raise FitError(f"got {len(pols)} polarizations for {count} data points")
    return pols


def fit_air_gap(
    thicknesses_nm,
    ratios,
    polarizations,
    *,
    template: MembraneStackTemplate | None = None,
    wavelength_nm: float = NV_WAVELENGTH_NM,
    window_nm: float = 100.0,
    gap_bounds_nm: tuple[float, float] = (0.0, 50.0),
    tolerance_nm: float = 0.01,
) -> FitResult:
    """Best-fit air-gap thickness by bounded golden-section search.

    Minimizes the sum of squared penetration-ratio residuals over the gap
    interval, refining the bracket below ``tolerance_nm`` and keeping the
    interval endpoints as candidates so boundary solutions are exact.  The
    standard error comes from a local quadratic expansion of the objective.
    A flat objective (no curvature anywhere) is reported as unidentifiable.
    """
    thicknesses = [float(t) for t in thicknesses_nm]
    values = [float(r) for r in ratios]
    if len(thicknesses) != len(values):
        raise FitError("thicknesses and ratios must have equal length")
    if len(thicknesses) < 2:
        raise FitError(f"the air-gap fit needs at least 2 data points, got {len(thicknesses)}")
    lo, hi = gap_bounds_nm
    if not 0 <= lo < hi:
        raise FitError(f"gap bounds must satisfy 0 <= lo < hi, got {gap_bounds_nm}")
    pols = _broadcast_polarizations(polarizations, len(thicknesses))

    def objective(gap: float) -> float:
        return air_gap_sse(
            gap,
            thicknesses,
            values,
            pols,
            template=template,
            wavelength_nm=wavelength_nm,
            window_nm=window_nm,
        )

    evaluations: dict[float, float] = {}

    def cached(gap: float) -> float:
        if gap not in evaluations:
            evaluations[gap] = objective(gap)
        return evaluations[gap]

    # Data or template problems surface at the guided end of the interval,
    # not as search artifacts deep inside it.
    cached(lo)

    # Guidance is lost monotonically as the gap grows, so on ties (both
    # probes unguided) the bracket shrinks toward small gaps.
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = cached(c), cached(d)
    while b - a > tolerance_nm:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = cached(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = cached(d)
    cached(hi)
    cached(0.5 * (a + b))

    finite = [v for v in evaluations.values() if math.isfinite(v)]
    if not finite:
        raise FitError("no gap inside the bounds leaves the model guided")
    spread = max(finite) - min(finite)
    if len(finite) == len(evaluations) and spread <= 1e-13 * max(1.0, max(finite)):
        raise FitError("air-gap fit is unidentifiable: the objective is flat over the search interval")

    best_gap = min(evaluations, key=lambda g: (evaluations[g], g))
    best_sse = evaluations[best_gap]

    # Curvature-based standard error from a symmetric (or one-sided) stencil.
    h = max(4.0 * tolerance_nm, 0.25)
    g_minus = max(lo, best_gap - h)
    g_plus = min(hi, best_gap + h)
    if g_plus - g_minus < h:
        g_plus = min(hi, g_minus + 2 * h)
        g_minus = max(lo, g_plus - 2 * h)
    g_mid = 0.5 * (g_minus + g_plus)
    curvature = (cached(g_minus) - 2.0 * cached(g_mid) + cached(g_plus)) / ((0.5 * (g_plus - g_minus)) ** 2)

    dof = len(thicknesses) - 1
    s2 = best_sse / dof
    notes = ()
    if curvature > 0 and math.isfinite(curvature):
        stderr = math.sqrt(max(2.0 * s2 / curvature, 0.0))
    else:
        stderr = math.inf
        notes = ("objective curvature is unusable at the optimum: standard error unreliable",)

    mean_r = sum(values) / len(values)
    total_ss = sum((r - mean_r) ** 2 for r in values)
    return FitResult(
        parameter_names=("gap_nm",),
        parameters=(best_gap,),
        stderrs=(stderr,),
        rss=best_sse,
        dof=dof,
        n_points=len(thicknesses),
        total_ss=total_ss,
        notes=notes,
    )


@dataclass(frozen=True)
class GoodnessOfFit:
    r_squared: float
    reduced_chi2: float | None

    def summary(self) -> str:
        if self.reduced_chi2 is not None:
            return f"reduced chi-square = {self.reduced_chi2:.4f}"
        return f"R^2 = {self.r_squared:.6f}"


def goodness_of_fit(result: FitResult) -> GoodnessOfFit:
    """Reduced chi-square when uncertainties were given, else R^2.

    R^2 compares the residual sum of squares against the spread about the
    mean of the fitted response; a model no better than the mean scores 0,
    a perfect fit scores 1 (degenerate zero-spread data count as perfect
    when the residuals vanish).
    """
    if result.total_ss > 0:
        r_squared = 1.0 - result.rss / result.total_ss
    else:
        r_squared = 1.0 if result.rss <= 1e-30 else 0.0
    return GoodnessOfFit(r_squared=r_squared, reduced_chi2=result.reduced_chi2)


def read_decay_csv(path) -> DecayTrace:
    """Load a two-column (position_nm, intensity) CSV, header optional."""
    positions: list[float] = []
    intensities: list[float] = []
    with open(path, newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and not _is_number(row[0]):
                continue  # header
            if len(row) < 2:
                raise FitError(f"{path}:{lineno}: expected two columns (position_nm, intensity)")
            try:
                positions.append(float(row[0]))
                intensities.append(float(row[1]))
            except ValueError:
                raise FitError(f"{path}:{lineno}: non-numeric value in {row[:2]!r}") from None
            if intensities[-1] <= 0:
                raise FitError(f"{path}:{lineno}: intensity must be positive, got {intensities[-1]}")
    if not positions:
        raise FitError(f"{path}: no data rows found")
    try:
        return DecayTrace(np.asarray(positions), np.asarray(intensities))
    except FitError as err:
        raise FitError(f"{path}: {err}") from None


def read_ratio_csv(path) -> tuple[list[float], list[float], list[Polarization]]:
    """Load a three-column (thickness_nm, ratio, polarization) CSV."""
    thicknesses: list[float] = []
    ratios: list[float] = []
    pols: list[Polarization] = []
    with open(path, newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and not _is_number(row[0]):
                continue  # header
            if len(row) < 3:
                raise FitError(f"{path}:{lineno}: expected columns thickness_nm, ratio, polarization")
            try:
                thicknesses.append(float(row[0]))
                ratios.append(float(row[1]))
            except ValueError:
                raise FitError(f"{path}:{lineno}: non-numeric value in {row[:2]!r}") from None
            try:
                pols.append(Polarization.parse(row[2]))
            except ValidationError:
                raise FitError(f"{path}:{lineno}: unknown polarization {row[2]!r}") from None
            if ratios[-1] <= 0:
                raise FitError(f"{path}:{lineno}: ratio must be positive, got {ratios[-1]}")
    if not thicknesses:
        raise FitError(f"{path}: no data rows found")
    return thicknesses, ratios, pols


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False
