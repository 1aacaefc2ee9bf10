"""Cavity-QED figures of merit for loss-limited GaP-on-diamond rings.

Composes the loss-limited quality factor Q = 2 pi n / (lambda alpha), the
mode volume V = integral(eps |E|^2) / max(eps |E|^2), the emitter-cavity
coupling ratio from Weisskopf-Wigner theory, and the total spontaneous
emission enhancement

    F_SE = (3 / 4 pi^2) (Q / V) (n_cav / n_host) |E_NV / E_max|^2
           (gamma_ZPL / gamma_total) cos^2(theta),

with V expressed in (lambda / n_cav)^3 units.  The field maximum is the
permittivity-weighted one throughout (the mode-volume convention), with
the plain field value at the NV in the numerator; used consistently, the
expanded form equals 4 g^2 / (kappa gamma_total) identically.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    N_GAP,
    SPEED_OF_LIGHT,
    GapDiamondError,
    LosslessError,
    NVEmitter,
    Polarization,
    SolverError,
    ValidationError,
    db_per_cm_to_inverse_meters,
)
from .modes2d import (
    ModeSolution2D,
    RingModeVolume,
    field_ratio_at_point,
    ridge_cross_section,
    ring_mode_volume,
    solve_fundamental_2d,
)

__all__ = [
    "CavityParams",
    "RingDesignRow",
    "RingDesignTable",
    "q_from_loss",
    "mode_volume",
    "coupling_ratio",
    "purcell_total",
    "zpl_enhancement",
    "design_ring",
]


@dataclass(frozen=True)
class CavityParams:
    """Inputs to the emission-enhancement formula.

    ``v_norm`` is the mode volume in (lambda / n_cavity)^3 units;
    ``field_ratio_sq`` is |E(r_NV)|^2 over |E|^2 at the permittivity-
    weighted field maximum.  That ratio may slightly exceed 1 for
    vertically polarized modes, whose normal-field jump at the GaP/diamond
    interface raises the field on the diamond side above the in-GaP peak.
    """

    q: float
    v_norm: float
    n_cavity: float
    n_host: float
    field_ratio_sq: float
    wavelength_nm: float

    def __post_init__(self):
        if self.q <= 0:
            raise ValidationError(f"Q must be positive, got {self.q}")
        if self.v_norm <= 0:
            raise ValidationError(f"mode volume must be positive, got {self.v_norm}")
        if self.field_ratio_sq < 0:
            raise ValidationError(f"field ratio must be non-negative, got {self.field_ratio_sq}")
        if not self.n_cavity >= self.n_host >= 1.0:
            raise ValidationError(
                f"need n_cavity >= n_host >= 1, got {self.n_cavity} and {self.n_host}"
            )
        if self.wavelength_nm <= 0:
            raise ValidationError(f"wavelength must be positive, got {self.wavelength_nm} nm")


def q_from_loss(
    *,
    wavelength_nm: float,
    n: float,
    alpha_per_m: float | None = None,
    alpha_db_per_cm: float | None = None,
) -> float:
    """Loss-limited quality factor Q = 2 pi n / (lambda alpha).

    Exactly one of ``alpha_per_m`` and ``alpha_db_per_cm`` must be given;
    the dB/cm route converts and is bit-identical to passing the converted
    1/m value directly.  Zero loss is a distinct lossless outcome (Q is
    unbounded), reported as an error rather than a number.
    """
    if (alpha_per_m is None) == (alpha_db_per_cm is None):
        raise ValidationError("give exactly one of alpha_per_m or alpha_db_per_cm")
    if alpha_db_per_cm is not None:
        alpha_per_m = db_per_cm_to_inverse_meters(alpha_db_per_cm)
    if alpha_per_m < 0:
        raise ValidationError(f"loss must be non-negative, got {alpha_per_m} 1/m")
    if alpha_per_m == 0:
        raise LosslessError("zero propagation loss: the loss-limited Q is unbounded")
    if wavelength_nm <= 0 or n < 1:
        raise ValidationError("wavelength must be positive and the index at least 1")
    return 2.0 * math.pi * n / (wavelength_nm * 1e-9 * alpha_per_m)


def mode_volume(intensity: np.ndarray, eps: np.ndarray, cell_volume: float) -> float:
    """V = integral(eps |E|^2 dV) / max(eps |E|^2), in cell_volume units.

    Scale-invariant in the field.  Ring mode volumes use the 2-D
    cross-section route instead (modes2d.ring_mode_volume, effective area
    times circumference); this grid form serves arbitrary sampled fields.
    """
    intensity = np.asarray(intensity, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if intensity.shape != eps.shape:
        raise ValidationError("intensity and permittivity grids must have the same shape")
    if cell_volume <= 0:
        raise ValidationError(f"cell volume must be positive, got {cell_volume}")
    weighted = eps * intensity
    peak = float(weighted.max(initial=0.0))
    if peak <= 0:
        raise ValidationError("mode volume of an all-zero field is undefined")
    return float(weighted.sum()) * cell_volume / peak


def coupling_ratio(
    emitter: NVEmitter,
    intensity: np.ndarray,
    eps: np.ndarray,
    cell_volume_m3: float,
    nv_index: tuple[int, ...],
) -> float:
    """g^2 / gamma_ZPL in Hz from Weisskopf-Wigner theory.

    (3/16 pi^2) (lambda^3 / n_host^3) eps_host |E(r_NV)|^2 cos^2(theta)
    / integral(eps |E|^2 dV) times the transition frequency, with the host
    index taken from the permittivity at the NV cell.  Invariant under
    field rescaling.  Reported as an ordinary frequency (omega / 2 pi).
    """
    intensity = np.asarray(intensity, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if intensity.shape != eps.shape:
        raise ValidationError("intensity and permittivity grids must have the same shape")
    total = float((eps * intensity).sum()) * cell_volume_m3
    if total <= 0:
        raise ValidationError("zero total field integral: coupling ratio is undefined")
    eps_host = float(eps[nv_index])
    n_host = math.sqrt(eps_host)
    lam = emitter.lambda_zpl_nm * 1e-9
    nu = SPEED_OF_LIGHT / lam
    return (
        3.0
        / (16.0 * math.pi**2)
        * lam**3
        / n_host**3
        * eps_host
        * float(intensity[nv_index])
        * emitter.cos2_theta
        / total
        * nu
    )


def purcell_total(params: CavityParams, emitter: NVEmitter) -> float:
    """Total spontaneous emission enhancement factor F_SE.

    Includes the emitter's dipole-orientation factor cos^2(theta), which
    is 1 for the default optimally aligned emitter.
    """
    return (
        3.0
        / (4.0 * math.pi**2)
        * params.q
        / params.v_norm
        * (params.n_cavity / params.n_host)
        * params.field_ratio_sq
        * emitter.branching_ratio
        * emitter.cos2_theta
    )


def zpl_enhancement(f_se: float, emitter: NVEmitter) -> float:
    """Enhancement of the zero-phonon-line emission rate alone."""
    if f_se < 0:
        raise ValidationError(f"F_SE must be non-negative, got {f_se}")
    return f_se * emitter.gamma_total_mhz / emitter.gamma_zpl_mhz


@dataclass(frozen=True)
class RingDesignRow:
    """One geometry of the ring-design sweep with its figures of merit."""

    diameter_um: float
    nv_depth_nm: float
    membrane_thickness_nm: float
    gap_nm: float
    n_eff: float
    q: float
    a_eff_nm2: float
    v_nm3: float
    v_norm: float
    field_ratio_sq: float
    f_se: float
    f_zpl: float


@dataclass(frozen=True, eq=False)
class RingDesignTable:
    """Sweep results sorted by decreasing F_SE, plus per-point failures."""

    rows: tuple[RingDesignRow, ...]
    failures: tuple[tuple[tuple[float, float, float, float], str], ...]
    polarization: Polarization
    alpha_db_per_cm: float
    wavelength_nm: float

    def row_at(
        self, diameter_um: float, nv_depth_nm: float, membrane_thickness_nm: float, gap_nm: float = 0.0
    ) -> RingDesignRow | None:
        for row in self.rows:
            if (
                math.isclose(row.diameter_um, diameter_um)
                and math.isclose(row.nv_depth_nm, nv_depth_nm)
                and math.isclose(row.membrane_thickness_nm, membrane_thickness_nm)
                and math.isclose(row.gap_nm, gap_nm, abs_tol=1e-12)
            ):
                return row
        return None


def design_ring(
    *,
    diameters_um,
    nv_depths_nm,
    membrane_thicknesses_nm,
    gaps_nm=(0.0,),
    alpha_db_per_cm: float,
    wavelength_nm: float = 637.0,
    polarization: Polarization = Polarization.TM,
    emitter: NVEmitter | None = None,
    waveguide_width_nm: float = 300.0,
    substrate_etch_nm: float = 120.0,
    pedestal_width_nm: float | None = None,
    n_core: float | None = None,
    n_substrate: float | None = None,
    pitch_nm: float = 5.0,
    padding_nm: float = 1000.0,
    jobs: int = 1,
) -> RingDesignTable:
    """Sweep ring geometries and rank them by total emission enhancement.

    One 2-D cross-section solve is shared by all diameters and NV depths of
    a given (membrane thickness, gap); distinct sections may be solved
    concurrently under ``jobs``.  The default polarization is TM (principal
    E vertical): its normal-field jump at the GaP/diamond interface couples
    most strongly to a shallow NV.  Rows are sorted by F_SE descending;
    geometries that fail to solve are collected, and only an entirely
    unsolvable sweep is an error.
    """
    emitter = emitter or NVEmitter()
    diameters = [float(d) for d in diameters_um]
    depths = [float(d) for d in nv_depths_nm]
    thicknesses = [float(t) for t in membrane_thicknesses_nm]
    gaps = [float(g) for g in gaps_nm]
    if not (diameters and depths and thicknesses and gaps):
        raise ValidationError("all sweep ranges must be non-empty")

    core_index = n_core if n_core is not None else N_GAP
    q = q_from_loss(wavelength_nm=wavelength_nm, n=core_index, alpha_db_per_cm=alpha_db_per_cm)

    sections: dict[tuple[float, float], ModeSolution2D | GapDiamondError] = {}

    def solve_section(key: tuple[float, float]):
        thickness, gap = key
        try:
            kwargs = {}
            if n_core is not None:
                kwargs["n_core"] = n_core
            if n_substrate is not None:
                kwargs["n_substrate"] = n_substrate
            cs = ridge_cross_section(
                core_width_nm=waveguide_width_nm,
                core_height_nm=thickness,
                gap_nm=gap,
                substrate_etch_nm=substrate_etch_nm,
                pedestal_width_nm=pedestal_width_nm,
                padding_nm=padding_nm,
                pitch_nm=pitch_nm,
                **kwargs,
            )
            return solve_fundamental_2d(cs, wavelength_nm, polarization)
        except GapDiamondError as err:
            return err

    keys = [(t, g) for t in thicknesses for g in gaps]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for key, result in zip(keys, pool.map(solve_section, keys)):
                sections[key] = result
    else:
        for key in keys:
            sections[key] = solve_section(key)

    rows: list[RingDesignRow] = []
    failures: list[tuple[tuple[float, float, float, float], str]] = []
    for thickness in thicknesses:
        for gap in gaps:
            solved = sections[(thickness, gap)]
            for diameter in diameters:
                for depth in depths:
                    point = (diameter, depth, thickness, gap)
                    if isinstance(solved, GapDiamondError):
                        failures.append((point, str(solved)))
                        continue
                    try:
                        rows.append(
                            _design_row(solved, q, emitter, diameter, depth, thickness, gap)
                        )
                    except GapDiamondError as err:
                        failures.append((point, str(err)))

    if not rows:
        detail = f"; first failure: {failures[0][1]}" if failures else ""
        raise SolverError(f"no sweep point could be solved{detail}")
    rows.sort(key=lambda r: (-r.f_se, r.diameter_um, r.nv_depth_nm, r.membrane_thickness_nm, r.gap_nm))
    failures.sort(key=lambda f: f[0])
    return RingDesignTable(
        rows=tuple(rows),
        failures=tuple(failures),
        polarization=polarization,
        alpha_db_per_cm=alpha_db_per_cm,
        wavelength_nm=wavelength_nm,
    )


def _design_row(
    mode: ModeSolution2D,
    q: float,
    emitter: NVEmitter,
    diameter_um: float,
    depth_nm: float,
    thickness_nm: float,
    gap_nm: float,
) -> RingDesignRow:
    volume: RingModeVolume = ring_mode_volume(mode, diameter_um)
    y_nv = -max(depth_nm, 1e-9)
    x_nv, _ = mode.max_intensity_at_y(y_nv)
    ratio_sq = field_ratio_at_point(mode, (x_nv, y_nv))
    n_host = mode.cross_section.index_at(x_nv, y_nv)
    params = CavityParams(
        q=q,
        v_norm=volume.v_norm,
        n_cavity=volume.n_reference,
        n_host=n_host,
        field_ratio_sq=ratio_sq,
        wavelength_nm=mode.wavelength_nm,
    )
    f_se = purcell_total(params, emitter)
    return RingDesignRow(
        diameter_um=diameter_um,
        nv_depth_nm=depth_nm,
        membrane_thickness_nm=thickness_nm,
        gap_nm=gap_nm,
        n_eff=mode.n_eff,
        q=q,
        a_eff_nm2=volume.a_eff_nm2,
        v_nm3=volume.v_nm3,
        v_norm=volume.v_norm,
        field_ratio_sq=ratio_sq,
        f_se=f_se,
        f_zpl=zpl_enhancement(f_se, emitter),
    )
