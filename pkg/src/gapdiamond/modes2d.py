"""2-D semivectorial finite-difference mode solver for ridge cross-sections.

The cross-section is a set of axis-aligned rectangles painted over a
background index (later rectangles override earlier ones).  The solver
discretizes the semivectorial Helmholtz operator for the principal
electric-field component on a uniform node grid with Dirichlet boundaries.
Polarization enters twice: along the principal E direction the second
derivative is assembled in flux form, d/du[(1/eps) d(eps psi)/du], whose
edge couplings enforce the normal-D continuity (so the field correctly
jumps at interfaces it crosses); across it a plain second difference keeps
the tangential component continuous.  Node permittivities are averaged
over each node's dual cell with exact overlap fractions, harmonically
across the principal direction and arithmetically along the other.

Coordinates are in nm; x is horizontal, y vertical.  TE means the dominant
electric field along x, TM along y; in the uniform limits the operator
reduces exactly to the matching 1-D slab problems.  The fundamental
(largest effective index) eigenpair is extracted by shifted inverse
iteration with the shift just above the best 1-D slab estimate, which
bounds the 2-D eigenvalue from above.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import splu

from .core import (
    N_AIR,
    N_DIAMOND,
    N_GAP,
    GeometryError,
    Layer,
    LayerStack,
    Polarization,
    SolverError,
    UnguidedError,
    ValidationError,
)
from . import slab as slab_solver

__all__ = [
    "IndexRect",
    "CrossSection",
    "ModeSolution2D",
    "RingModeVolume",
    "ridge_cross_section",
    "solve_fundamental_2d",
    "effective_index_method",
    "effective_area",
    "ring_mode_volume",
    "field_ratio_at_point",
    "write_field_csv",
]

_CUT_TOL = 1e-9
_SHIFT_OFFSET = 0.02


@dataclass(frozen=True)
class IndexRect:
    """An axis-aligned rectangle of constant refractive index."""

    name: str
    n: float
    x_min_nm: float
    x_max_nm: float
    y_min_nm: float
    y_max_nm: float

    def __post_init__(self):
        if self.n < 1.0:
            raise GeometryError(f"rectangle {self.name!r}: index must be >= 1, got {self.n}")
        if self.x_max_nm <= self.x_min_nm or self.y_max_nm <= self.y_min_nm:
            raise GeometryError(f"rectangle {self.name!r}: degenerate extent")

    def contains(self, x_nm: float, y_nm: float) -> bool:
        return (
            self.x_min_nm <= x_nm <= self.x_max_nm
            and self.y_min_nm <= y_nm <= self.y_max_nm
        )


@dataclass(frozen=True, eq=False)
class CrossSection:
    """A 2-D refractive-index map on a rectangular domain.

    Rectangles are painted in order onto the background; the domain extent
    must be an integer number of grid pitches along each axis.
    """

    rectangles: tuple[IndexRect, ...]
    background_n: float
    x_min_nm: float
    x_max_nm: float
    y_min_nm: float
    y_max_nm: float
    pitch_nm: float

    def __post_init__(self):
        if self.background_n < 1.0:
            raise GeometryError(f"background index must be >= 1, got {self.background_n}")
        if self.pitch_nm <= 0:
            raise GeometryError(f"grid pitch must be positive, got {self.pitch_nm} nm")
        if self.x_max_nm <= self.x_min_nm or self.y_max_nm <= self.y_min_nm:
            raise GeometryError("domain extents are degenerate")
        for axis, lo, hi in (("x", self.x_min_nm, self.x_max_nm), ("y", self.y_min_nm, self.y_max_nm)):
            span = hi - lo
            steps = round(span / self.pitch_nm)
            if steps < 4:
                raise GeometryError(f"domain spans fewer than 4 grid cells along {axis}")
            if abs(span - steps * self.pitch_nm) > 1e-6 * self.pitch_nm:
                raise GeometryError(
                    f"domain extent along {axis} ({span} nm) is not a multiple of the pitch ({self.pitch_nm} nm)"
                )
        tol = 1e-6
        for rect in self.rectangles:
            if (
                rect.x_min_nm < self.x_min_nm - tol
                or rect.x_max_nm > self.x_max_nm + tol
                or rect.y_min_nm < self.y_min_nm - tol
                or rect.y_max_nm > self.y_max_nm + tol
            ):
                raise GeometryError(f"rectangle {rect.name!r} extends outside the domain")

    def grids(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center node coordinates (x_nm, y_nm).

        Cell-centered placement keeps pitch-aligned material interfaces on
        cell edges, which preserves the second-order accuracy of the
        flux-form stencils.
        """
        nx = round((self.x_max_nm - self.x_min_nm) / self.pitch_nm)
        ny = round((self.y_max_nm - self.y_min_nm) / self.pitch_nm)
        x = self.x_min_nm + self.pitch_nm * (0.5 + np.arange(nx))
        y = self.y_min_nm + self.pitch_nm * (0.5 + np.arange(ny))
        return x, y

    def index_at(self, x_nm: float, y_nm: float) -> float:
        """Material index at a point (later rectangles override earlier)."""
        n = self.background_n
        for rect in self.rectangles:
            if rect.contains(x_nm, y_nm):
                n = rect.n
        return n

    @cached_property
    def _tiles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cut lines and per-tile permittivity of the piecewise-constant map."""

        def cuts(lo, hi, edges):
            vals = sorted({lo, hi, *(e for e in edges if lo < e < hi)})
            out = [vals[0]]
            for v in vals[1:]:
                if v - out[-1] > _CUT_TOL:
                    out.append(v)
            out[-1] = hi
            return np.asarray(out)

        x_cuts = cuts(self.x_min_nm, self.x_max_nm, [e for r in self.rectangles for e in (r.x_min_nm, r.x_max_nm)])
        y_cuts = cuts(self.y_min_nm, self.y_max_nm, [e for r in self.rectangles for e in (r.y_min_nm, r.y_max_nm)])
        cx = 0.5 * (x_cuts[:-1] + x_cuts[1:])
        cy = 0.5 * (y_cuts[:-1] + y_cuts[1:])
        n_map = np.full((cx.size, cy.size), self.background_n)
        for rect in self.rectangles:
            mask_x = (cx >= rect.x_min_nm) & (cx <= rect.x_max_nm)
            mask_y = (cy >= rect.y_min_nm) & (cy <= rect.y_max_nm)
            n_map[np.ix_(mask_x, mask_y)] = rect.n
        return x_cuts, y_cuts, n_map**2

    def cladding_bound(self) -> float:
        """Largest index among tiles touching the domain boundary."""
        _, _, eps = self._tiles
        edge = np.concatenate([eps[0, :], eps[-1, :], eps[:, 0], eps[:, -1]])
        return float(np.sqrt(edge.max()))


def _overlap_weights(coords: np.ndarray, cuts: np.ndarray, half: float) -> np.ndarray:
    """Overlap lengths between each node's dual interval and each tile."""
    lo = np.maximum(coords - half, cuts[0])
    hi = np.minimum(coords + half, cuts[-1])
    left = np.maximum(lo[:, None], cuts[None, :-1])
    right = np.minimum(hi[:, None], cuts[None, 1:])
    return np.clip(right - left, 0.0, None)


def effective_permittivity(cs: CrossSection, polarization: Polarization) -> np.ndarray:
    """Node permittivity with polarization-dependent interface averaging.

    Harmonic averaging is applied across the axis of the principal E
    component (x for TE, y for TM) and arithmetic averaging along the
    other, using exact tile-overlap fractions of each node's dual cell.
    Returns an (Ny, Nx) array.
    """
    x, y = cs.grids()
    x_cuts, y_cuts, eps = cs._tiles
    half = 0.5 * cs.pitch_nm
    wx = _overlap_weights(x, x_cuts, half)
    wy = _overlap_weights(y, y_cuts, half)
    wx_sum = wx.sum(axis=1)
    wy_sum = wy.sum(axis=1)
    inv = 1.0 / eps
    if polarization is Polarization.TE:
        harm = wx_sum[:, None] / (wx @ inv)  # (Nx, n_ytiles)
        return (wy @ harm.T) / wy_sum[:, None]
    harm = wy_sum[:, None] / (wy @ inv.T)  # (Ny, n_xtiles)
    return harm @ (wx / wx_sum[:, None]).T


@dataclass(frozen=True, eq=False)
class ModeSolution2D:
    """Fundamental 2-D mode: effective index plus principal-field grid.

    ``field`` holds the principal E component on the cell-centered node
    grid (the Dirichlet zero sits one ghost cell beyond the edges),
    normalized so that sum(field^2) * pitch^2 = 1, with a positive value
    at the intensity peak.  ``eps_eff`` is the polarization-averaged
    permittivity used in the solve.
    """

    n_eff: float
    polarization: Polarization
    wavelength_nm: float
    x_nm: np.ndarray
    y_nm: np.ndarray
    field: np.ndarray
    eps_eff: np.ndarray
    pitch_nm: float
    cross_section: CrossSection
    residual: float
    iterations: int

    @property
    def intensity(self) -> np.ndarray:
        return self.field**2

    @cached_property
    def peak_index(self) -> tuple[int, int]:
        """(iy, ix) of the maximum permittivity-weighted intensity."""
        weighted = self.eps_eff * self.field**2
        return tuple(np.unravel_index(int(np.argmax(weighted)), weighted.shape))  # type: ignore[return-value]

    @property
    def peak_point_nm(self) -> tuple[float, float]:
        iy, ix = self.peak_index
        return float(self.x_nm[ix]), float(self.y_nm[iy])

    @property
    def peak_intensity(self) -> float:
        iy, ix = self.peak_index
        return float(self.field[iy, ix] ** 2)

    def interp_field(self, x_nm: float, y_nm: float) -> float:
        """Bilinear interpolation of the principal field at a point."""
        x, y = self.x_nm, self.y_nm
        if not (x[0] <= x_nm <= x[-1] and y[0] <= y_nm <= y[-1]):
            raise GeometryError(f"point ({x_nm}, {y_nm}) nm lies outside the solution grid")
        ix = min(int(np.searchsorted(x, x_nm, side="right")) - 1, x.size - 2)
        iy = min(int(np.searchsorted(y, y_nm, side="right")) - 1, y.size - 2)
        ix = max(ix, 0)
        iy = max(iy, 0)
        tx = (x_nm - x[ix]) / (x[ix + 1] - x[ix])
        ty = (y_nm - y[iy]) / (y[iy + 1] - y[iy])
        f = self.field
        return float(
            f[iy, ix] * (1 - tx) * (1 - ty)
            + f[iy, ix + 1] * tx * (1 - ty)
            + f[iy + 1, ix] * (1 - tx) * ty
            + f[iy + 1, ix + 1] * tx * ty
        )

    def max_intensity_at_y(self, y_nm: float) -> tuple[float, float]:
        """(x_nm, |E|^2) of the intensity maximum along a horizontal line."""
        y = self.y_nm
        if not y[0] <= y_nm <= y[-1]:
            raise GeometryError(f"y = {y_nm} nm lies outside the solution grid")
        iy = min(int(np.searchsorted(y, y_nm, side="right")) - 1, y.size - 2)
        iy = max(iy, 0)
        ty = (y_nm - y[iy]) / (y[iy + 1] - y[iy])
        row = self.field[iy] * (1 - ty) + self.field[iy + 1] * ty
        ix = int(np.argmax(row**2))
        return float(self.x_nm[ix]), float(row[ix] ** 2)


def _slice_profiles(cs: CrossSection) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Per x-tile: (width, layer indices bottom-to-top, layer heights)."""
    x_cuts, y_cuts, eps = cs._tiles
    heights = np.diff(y_cuts)
    profiles = []
    for k in range(eps.shape[0]):
        ns = np.sqrt(eps[k, :])
        keep_n = [ns[0]]
        keep_h = [heights[0]]
        for n, h in zip(ns[1:], heights[1:]):
            if n == keep_n[-1]:
                keep_h[-1] += h
            else:
                keep_n.append(n)
                keep_h.append(h)
        profiles.append((float(x_cuts[k + 1] - x_cuts[k]), np.asarray(keep_n), np.asarray(keep_h)))
    return profiles


def _slice_mode_index(
    ns: np.ndarray, heights: np.ndarray, wavelength_nm: float, polarization: Polarization
) -> tuple[float, bool]:
    """Fundamental slab index of one vertical slice, or its cladding bound.

    The outermost tiles play the role of semi-infinite claddings, which is
    faithful when the domain padding is large compared to the mode tails.
    """
    if len(ns) < 3:
        return float(ns.max()), False
    # Slice tiles run bottom-to-top; slab stacks list the top cladding first.
    layers = [Layer("top", float(ns[-1]))]
    for n, h in zip(ns[-2:0:-1], heights[-2:0:-1]):
        layers.append(Layer("film", float(n), float(h)))
    layers.append(Layer("bottom", float(ns[0])))
    stack = LayerStack(tuple(layers))
    if not stack.is_guidable():
        return stack.cladding_bound, False
    modes = slab_solver.find_guided_modes(stack, wavelength_nm, polarization)
    if not modes:
        return stack.cladding_bound, False
    return modes[0].n_eff, True


def effective_index_method(
    cs: CrossSection, wavelength_nm: float, polarization: Polarization
) -> float:
    """Two-pass slab reduction: an independent estimate of the 2-D index.

    Each vertical slice is solved as a 1-D stack (same polarization); the
    resulting lateral index profile is solved as a 1-D stack of the
    opposite polarization.  Slices without a guided mode take their
    cladding bound, the standard treatment of lateral cladding regions; if
    no slice at all guides, the reduction is undefined and an unguided
    error is raised.
    """
    values: list[float] = []
    widths: list[float] = []
    any_guided = False
    for width, ns, heights in _slice_profiles(cs):
        value, guided = _slice_mode_index(ns, heights, wavelength_nm, polarization)
        any_guided = any_guided or guided
        if widths and value == values[-1]:
            widths[-1] += width
        else:
            values.append(value)
            widths.append(width)
    if not any_guided:
        raise UnguidedError("no vertical slice supports a guided slab mode")
    if len(values) == 1:
        return values[0]

    lateral = [Layer("slice0", values[0])]
    for i in range(1, len(values) - 1):
        lateral.append(Layer(f"slice{i}", values[i], widths[i]))
    lateral.append(Layer(f"slice{len(values) - 1}", values[-1]))
    stack = LayerStack(tuple(lateral))
    if not stack.is_guidable():
        raise UnguidedError(
            "effective-index reduction is not laterally guided "
            f"(core {stack.max_interior_index} vs cladding bound {stack.cladding_bound})"
        )
    swapped = Polarization.TM if polarization is Polarization.TE else Polarization.TE
    modes = slab_solver.find_guided_modes(stack, wavelength_nm, swapped)
    if not modes:
        raise UnguidedError("effective-index reduction found no lateral mode")
    return modes[0].n_eff


def _shift_index(cs: CrossSection, wavelength_nm: float, polarization: Polarization) -> float:
    """An index just above every eigenvalue of the discrete operator.

    Column-wise Rayleigh splitting bounds the 2-D eigenvalue by the best
    vertical-slice slab index (or the slice's own cladding bound where no
    slab mode exists); keeping the shift tight keeps the inverse-iteration
    contraction strong.
    """
    best = 1.0
    for _, ns, heights in _slice_profiles(cs):
        value, _ = _slice_mode_index(ns, heights, wavelength_nm, polarization)
        best = max(best, value)
    return best + _SHIFT_OFFSET


def _semivectorial_operator(
    eps: np.ndarray, k0: float, pitch: float, polarization: Polarization
) -> sparse.csr_matrix:
    """Assemble the semivectorial operator over the cell-centered nodes.

    Along the principal E direction (x for TE, y for TM) the stencil is the
    flux form of d/du[(1/eps) d(eps psi)/du]: the coupling from node P to
    neighbour N is 2 eps_N / (eps_P + eps_N) / pitch^2 and the matching
    diagonal term uses eps_P, which reduces to the plain Laplacian in
    uniform regions.  The transverse direction uses the plain second
    difference.  The boundary is Dirichlet one ghost cell beyond the edge
    nodes; ghost cells replicate the edge permittivity.
    """
    ny, nx = eps.shape

    def pad(arr: np.ndarray, axis: int, side: int) -> np.ndarray:
        """Neighbour permittivity with edge replication."""
        shifted = np.roll(arr, -side, axis=axis)
        if axis == 1:
            if side > 0:
                shifted[:, -1] = arr[:, -1]
            else:
                shifted[:, 0] = arr[:, 0]
        else:
            if side > 0:
                shifted[-1, :] = arr[-1, :]
            else:
                shifted[0, :] = arr[0, :]
        return shifted

    def flux_pair(eps_n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        coupling = 2.0 * eps_n / (eps + eps_n) / pitch**2
        diagonal = 2.0 * eps / (eps + eps_n) / pitch**2
        return coupling, diagonal

    plain = np.full_like(eps, 1.0 / pitch**2)
    if polarization is Polarization.TE:
        c_east, d_east = flux_pair(pad(eps, 1, +1))
        c_west, d_west = flux_pair(pad(eps, 1, -1))
        c_north = c_south = d_north = d_south = plain
    else:
        c_north, d_north = flux_pair(pad(eps, 0, +1))
        c_south, d_south = flux_pair(pad(eps, 0, -1))
        c_east = c_west = d_east = d_west = plain

    main = k0**2 * eps - (d_east + d_west + d_north + d_south)

    east = c_east.copy()
    east[:, -1] = 0.0
    west = c_west.copy()
    west[:, 0] = 0.0
    north = c_north.copy()
    north[-1, :] = 0.0
    south = c_south.copy()
    south[0, :] = 0.0

    return sparse.diags(
        [
            main.ravel(),
            east.ravel()[:-1],
            west.ravel()[1:],
            north.ravel()[:-nx],
            south.ravel()[nx:],
        ],
        [0, 1, -1, nx, -nx],
        format="csr",
    )


def solve_fundamental_2d(
    cs: CrossSection,
    wavelength_nm: float,
    polarization: Polarization,
    *,
    require_guided: bool = True,
    rtol: float = 1e-8,
    max_iterations: int = 300,
) -> ModeSolution2D:
    """Largest-effective-index eigenpair of the semivectorial operator.

    Shifted inverse iteration with a sparse LU factorization; the shift
    sits just above the best vertical-slice slab index, which bounds the
    2-D eigenvalue from above, so the iteration homes in on the
    fundamental mode.  Deterministic for a fixed grid.

    Raises UnguidedError when the converged index does not exceed the
    cladding bound (suppress with ``require_guided=False``, e.g. for
    box-mode studies) and SolverError, carrying the last residual, on
    non-convergence.
    """
    if wavelength_nm <= 0:
        raise ValidationError(f"wavelength must be positive, got {wavelength_nm} nm")
    x, y = cs.grids()
    nx, ny = x.size, y.size
    k0 = 2.0 * math.pi / wavelength_nm  # 1/nm; all grid arithmetic in nm
    p = cs.pitch_nm

    eps_eff = effective_permittivity(cs, polarization)
    operator = _semivectorial_operator(eps_eff, k0, p, polarization)

    sigma = (k0 * _shift_index(cs, wavelength_nm, polarization)) ** 2
    shifted = (operator - sigma * sparse.identity(operator.shape[0])).tocsc()
    try:
        lu = splu(shifted)
    except RuntimeError as err:  # singular shift: nudge and retry once
        sigma *= 1.0 + 1e-6
        shifted = (operator - sigma * sparse.identity(operator.shape[0])).tocsc()
        try:
            lu = splu(shifted)
        except RuntimeError:
            raise SolverError(f"sparse factorization failed: {err}") from err

    xx, yy = np.meshgrid(x, y)
    iy0, ix0 = np.unravel_index(int(np.argmax(eps_eff)), eps_eff.shape)
    width = max(50.0, 2.0 * p)
    vec = np.exp(-(((xx - xx[iy0, ix0]) ** 2 + (yy - yy[iy0, ix0]) ** 2) / (2.0 * width**2)))
    vec = vec.ravel()
    vec /= np.linalg.norm(vec)

    theta = 0.0
    residual = math.inf
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        vec = lu.solve(vec)
        vec /= np.linalg.norm(vec)
        op_vec = operator @ vec
        theta = float(vec @ op_vec)
        residual = float(np.linalg.norm(op_vec - theta * vec))
        if residual <= rtol * abs(theta):
            break
    else:
        raise SolverError(
            f"inverse iteration did not converge in {max_iterations} iterations "
            f"(last residual {residual:.3e} vs eigenvalue {theta:.6e})"
        )

    if theta <= 0:
        raise UnguidedError("no propagating mode: non-positive eigenvalue", n_eff=None)
    n_eff = math.sqrt(theta) / k0
    bound = cs.cladding_bound()
    if require_guided and n_eff <= bound + 1e-9:
        raise UnguidedError(
            f"structure is unguided: n_eff {n_eff:.6f} does not exceed the cladding bound {bound:.6f}",
            n_eff=n_eff,
        )

    field = vec.reshape(ny, nx)
    weighted = eps_eff * field**2
    iy_pk, ix_pk = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
    if field[iy_pk, ix_pk] < 0:
        field = -field
    field /= math.sqrt(float(np.sum(field**2)) * p**2)

    return ModeSolution2D(
        n_eff=n_eff,
        polarization=polarization,
        wavelength_nm=wavelength_nm,
        x_nm=x,
        y_nm=y,
        field=field,
        eps_eff=eps_eff,
        pitch_nm=p,
        cross_section=cs,
        residual=residual,
        iterations=iterations,
    )


def effective_area(mode: ModeSolution2D, eps: np.ndarray | None = None) -> float:
    """Mode area in nm^2: integral of eps |E|^2 over its peak value."""
    eps = mode.eps_eff if eps is None else eps
    weighted = eps * mode.field**2
    return float(np.sum(weighted) * mode.pitch_nm**2 / weighted.max())


@dataclass(frozen=True)
class RingModeVolume:
    """Traveling-wave ring mode volume from a 2-D cross-section mode."""

    a_eff_nm2: float
    diameter_um: float
    v_nm3: float
    v_norm: float  # in (lambda / n_reference)^3 units
    wavelength_nm: float
    n_reference: float


def ring_mode_volume(mode: ModeSolution2D, diameter_um: float) -> RingModeVolume:
    """Mode volume of a traveling-wave ring: effective area times circumference.

    Reported both in nm^3 and in cubic (lambda/n) units, where n is the
    material index at the permittivity-weighted field maximum (the cavity
    material).  Both forms are invariant under field rescaling.
    """
    if diameter_um <= 0:
        raise ValidationError(f"ring diameter must be positive, got {diameter_um} um")
    a_eff = effective_area(mode)
    v_nm3 = a_eff * math.pi * diameter_um * 1e3
    x_pk, y_pk = mode.peak_point_nm
    n_ref = mode.cross_section.index_at(x_pk, y_pk)
    v_norm = v_nm3 / (mode.wavelength_nm / n_ref) ** 3
    return RingModeVolume(
        a_eff_nm2=a_eff,
        diameter_um=diameter_um,
        v_nm3=v_nm3,
        v_norm=v_norm,
        wavelength_nm=mode.wavelength_nm,
        n_reference=n_ref,
    )


def field_ratio_at_point(mode: ModeSolution2D, point_nm: tuple[float, float]) -> float:
    """|E(point)|^2 over |E|^2 at the permittivity-weighted field maximum.

    This is the field-ratio factor entering the emission-enhancement
    formula; the denominator location matches the mode-volume convention
    so the two compose consistently.
    """
    value = mode.interp_field(point_nm[0], point_nm[1])
    return value**2 / mode.peak_intensity


def ridge_cross_section(
    *,
    core_width_nm: float,
    core_height_nm: float,
    n_core: float = N_GAP,
    n_substrate: float = N_DIAMOND,
    n_background: float = N_AIR,
    n_gap: float | None = None,
    gap_nm: float = 0.0,
    substrate_etch_nm: float = 0.0,
    pedestal_width_nm: float | None = None,
    padding_nm: float = 1000.0,
    pitch_nm: float = 5.0,
) -> CrossSection:
    """A core ridge over an (optionally etched) substrate, padded all around.

    y = 0 is the substrate top surface; the core sits ``gap_nm`` above it.
    When ``substrate_etch_nm`` > 0 the substrate is etched down by that
    amount everywhere except a pedestal of ``pedestal_width_nm`` (defaults
    to the core width) under the core.  Domain edges are snapped outward
    to multiples of the pitch.
    """
    if core_width_nm <= 0 or core_height_nm <= 0:
        raise GeometryError("core width and height must be positive")
    if gap_nm < 0 or substrate_etch_nm < 0 or padding_nm <= 0:
        raise GeometryError("gap, etch, and padding must be non-negative (padding positive)")
    pedestal = core_width_nm if pedestal_width_nm is None else pedestal_width_nm

    def snap_up(v: float) -> float:
        return math.ceil(v / pitch_nm - 1e-9) * pitch_nm

    x_half = snap_up(core_width_nm / 2 + padding_nm)
    y_top = snap_up(gap_nm + core_height_nm + padding_nm)
    y_bottom = -snap_up(substrate_etch_nm + padding_nm)

    rects = [IndexRect("substrate", n_substrate, -x_half, x_half, y_bottom, -substrate_etch_nm)]
    if substrate_etch_nm > 0 and pedestal > 0:
        rects.append(IndexRect("pedestal", n_substrate, -pedestal / 2, pedestal / 2, -substrate_etch_nm, 0.0))
    if gap_nm > 0 and n_gap is not None and n_gap != n_background:
        rects.append(IndexRect("gap", n_gap, -core_width_nm / 2, core_width_nm / 2, 0.0, gap_nm))
    rects.append(
        IndexRect("core", n_core, -core_width_nm / 2, core_width_nm / 2, gap_nm, gap_nm + core_height_nm)
    )
    return CrossSection(
        rectangles=tuple(rects),
        background_n=n_background,
        x_min_nm=-x_half,
        x_max_nm=x_half,
        y_min_nm=y_bottom,
        y_max_nm=y_top,
        pitch_nm=pitch_nm,
    )


def write_field_csv(mode: ModeSolution2D, path) -> None:
    """Export the intensity map as CSV rows of (x_nm, y_nm, intensity)."""
    intensity = mode.intensity
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x_nm", "y_nm", "intensity"])
        for j, y in enumerate(mode.y_nm):
            for i, x in enumerate(mode.x_nm):
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(intensity[j, i]))])
