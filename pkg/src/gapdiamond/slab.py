"""1-D multilayer transfer-matrix mode solver.

Finds guided TE/TM modes of a layer stack, reconstructs piecewise-analytic
field profiles, and computes the diamond/GaP field-strength ratio with and
without a thin air gap.

Conventions: the mode propagates along x, the stack varies along z
(z increases from the top cladding toward the substrate, z = 0 at the first
interface).  The principal field psi is Ey for TE and Hy for TM.  The
quantity matched at interfaces alongside psi is phi = eta * dpsi/dz with
eta = 1 (TE) or 1/n^2 (TM).  Transverse electric-field components follow
from psi up to one overall amplitude: TE has Ey = psi; TM has
Ex = psi'/(k0 n^2) (tangential, continuous) and Ez = n_eff psi / n^2
(normal, so that n^2 Ez is continuous).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    N_AIR,
    N_DIAMOND,
    N_GAP,
    GapDiamondError,
    Layer,
    LayerStack,
    Polarization,
    SolverError,
    StackError,
    UnguidedError,
    ValidationError,
    normalize_stack,
)

__all__ = [
    "ModeSolution1D",
    "FieldProfile1D",
    "RatioCurve",
    "MembraneStackTemplate",
    "find_guided_modes",
    "field_profile",
    "region_intensity",
    "penetration_ratio",
    "ratio_curve",
    "mode_overlap",
]

# Scan pitch in n_eff used to bracket dispersion roots.  Guided-mode spacing
# for sub-micron films at visible wavelengths is orders of magnitude larger.
SCAN_RESOLUTION = 1e-4
_BISECT_TOL = 1e-14
_EDGE_MARGIN = 1e-9

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _eta_values(n: np.ndarray, polarization: Polarization) -> np.ndarray:
    if polarization is Polarization.TE:
        return np.ones_like(n)
    return 1.0 / n**2


def _stack_arrays(stack: LayerStack) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Indices, interior thicknesses (m), and interface positions (m)."""
    n = np.array([layer.n for layer in stack.layers], dtype=float)
    d_m = np.array([layer.thickness_nm * 1e-9 for layer in stack.interior], dtype=float)
    z_m = np.concatenate(([0.0], np.cumsum(d_m)))
    return n, d_m, z_m


def _cos_and_sinc(kap_sq: np.ndarray, length: float) -> tuple[np.ndarray, np.ndarray]:
    """cos(kappa L) and sin(kappa L)/kappa, analytic in kappa^2.

    Oscillatory and evanescent layers are handled uniformly through a
    complex square root; both returned quantities are real.
    """
    kl = np.sqrt(kap_sq.astype(complex)) * length
    c = np.real(np.cos(kl))
    s = length * np.real(np.sinc(kl / np.pi))
    return c, s


def dispersion_mismatch(n_eff, stack: LayerStack, wavelength_nm: float, polarization: Polarization):
    """Boundary-condition mismatch F(n_eff); zero exactly at guided modes.

    Propagates the decaying top-cladding solution through the stack and
    returns the residual admixture of the growing solution in the bottom
    cladding.  Vectorized over ``n_eff``; the state vector is rescaled per
    layer by a positive factor, which preserves signs and roots.
    """
    n, d_m, _ = _stack_arrays(stack)
    k0 = 2.0 * math.pi / (wavelength_nm * 1e-9)
    eta = _eta_values(n, polarization)

    n_eff = np.atleast_1d(np.asarray(n_eff, dtype=float))
    beta_sq = (n_eff * k0) ** 2

    gamma_top = np.sqrt(beta_sq - (n[0] * k0) ** 2)
    psi = np.ones_like(n_eff)
    phi = eta[0] * gamma_top
    for j in range(1, len(n) - 1):
        kap_sq = (n[j] * k0) ** 2 - beta_sq
        c, s = _cos_and_sinc(kap_sq, d_m[j - 1])
        psi, phi = c * psi + (s / eta[j]) * phi, -eta[j] * kap_sq * s * psi + c * phi
        scale = np.maximum(np.abs(psi), np.abs(phi))
        scale[scale == 0.0] = 1.0
        psi /= scale
        phi /= scale
    gamma_bottom = np.sqrt(beta_sq - (n[-1] * k0) ** 2)
    return phi + eta[-1] * gamma_bottom * psi


def _bisect(f, a: float, b: float, fa: float, fb: float) -> float:
    """Plain bisection; the bracket is assumed to hold a sign change."""
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if not np.isfinite(fm):
            raise SolverError(f"dispersion function returned a non-finite value at n_eff={mid}")
        if fm == 0.0:
            return mid
        if (fa < 0.0) != (fm < 0.0):
            b, fb = mid, fm
        else:
            a, fa = mid, fm
        if b - a <= _BISECT_TOL:
            return 0.5 * (a + b)
    raise SolverError(
        f"bisection failed to converge on the bracket [{a}, {b}] (residuals {fa}, {fb})"
    )


@dataclass(frozen=True, eq=False)
class FieldProfile1D:
    """A mode profile sampled on a uniform z grid (nm)."""

    z_nm: np.ndarray
    components: dict[str, np.ndarray]
    intensity: np.ndarray


@dataclass(frozen=True, eq=False)
class ModeSolution1D:
    """A guided slab mode: effective index plus piecewise-analytic field.

    The field is normalized so that the full-axis integral of |E|^2 over z
    in meters equals 1.  ``psi0``/``dpsi0`` hold the principal field and its
    derivative at the top of each region (for the claddings: at their
    interface), from which the field anywhere follows analytically.
    """

    n_eff: float
    polarization: Polarization
    mode_order: int
    wavelength_nm: float
    stack: LayerStack
    decay_top_per_m: float
    decay_bottom_per_m: float
    psi0: np.ndarray
    dpsi0: np.ndarray

    @property
    def k0(self) -> float:
        return 2.0 * math.pi / (self.wavelength_nm * 1e-9)

    @property
    def _n(self) -> np.ndarray:
        return np.array([layer.n for layer in self.stack.layers], dtype=float)

    @property
    def _z_m(self) -> np.ndarray:
        return np.asarray(self.stack.interfaces_nm(), dtype=float) * 1e-9

    def scaled(self, factor: float) -> "ModeSolution1D":
        """Copy with the (un-normalized) field multiplied by ``factor``."""
        return ModeSolution1D(
            n_eff=self.n_eff,
            polarization=self.polarization,
            mode_order=self.mode_order,
            wavelength_nm=self.wavelength_nm,
            stack=self.stack,
            decay_top_per_m=self.decay_top_per_m,
            decay_bottom_per_m=self.decay_bottom_per_m,
            psi0=self.psi0 * factor,
            dpsi0=self.dpsi0 * factor,
        )

    def _region_index(self, z_m: np.ndarray) -> np.ndarray:
        return np.searchsorted(self._z_m, z_m, side="right")

    def _eval_region(self, region: int, z_m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(psi, dpsi/dz) evaluated with region ``region``'s coefficients."""
        z_m = np.asarray(z_m, dtype=float)
        n = self._n
        z_if = self._z_m
        k0 = self.k0
        last = len(n) - 1
        if region == 0:
            g = self.decay_top_per_m
            psi = self.psi0[0] * np.exp(g * (z_m - z_if[0]))
            return psi, g * psi
        if region == last:
            g = self.decay_bottom_per_m
            psi = self.psi0[last] * np.exp(-g * (z_m - z_if[-1]))
            return psi, -g * psi
        u = z_m - z_if[region - 1]
        kap_sq = (n[region] * k0) ** 2 - (self.n_eff * k0) ** 2
        ku = np.sqrt(complex(kap_sq)) * u
        c = np.real(np.cos(ku))
        s = u * np.real(np.sinc(ku / np.pi))
        psi = self.psi0[region] * c + self.dpsi0[region] * s
        dpsi = -kap_sq * s * self.psi0[region] + self.dpsi0[region] * c
        return psi, dpsi

    def principal_field(self, z_m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(psi, dpsi/dz) at positions ``z_m`` (meters, vectorized)."""
        z_m = np.atleast_1d(np.asarray(z_m, dtype=float))
        psi = np.empty_like(z_m)
        dpsi = np.empty_like(z_m)
        regions = self._region_index(z_m)
        for region in np.unique(regions):
            mask = regions == region
            psi[mask], dpsi[mask] = self._eval_region(int(region), z_m[mask])
        return psi, dpsi

    def e_components(self, z_nm: np.ndarray) -> dict[str, np.ndarray]:
        """Transverse E components on ``z_nm``: {Ey} for TE, {Ex, Ez} for TM."""
        z_m = np.atleast_1d(np.asarray(z_nm, dtype=float)) * 1e-9
        psi, dpsi = self.principal_field(z_m)
        if self.polarization is Polarization.TE:
            return {"Ey": psi}
        n_sq = self._n[self._region_index(z_m)] ** 2
        ex = dpsi / (self.k0 * n_sq)
        ez = self.n_eff * psi / n_sq
        return {"Ex": ex, "Ez": ez}

    def intensity(self, z_nm: np.ndarray) -> np.ndarray:
        """|E|^2 at ``z_nm``; Ey^2 for TE, Ex^2 + Ez^2 for TM."""
        fields = self.e_components(z_nm)
        return sum(component**2 for component in fields.values())

    def _region_rate(self, region: int) -> float:
        """Characteristic transverse rate (1/m) used to pace quadrature."""
        n = self._n
        kap_sq = (n[region] * self.k0) ** 2 - (self.n_eff * self.k0) ** 2
        return math.sqrt(abs(kap_sq))

    def _region_intensity_values(self, region: int, z_m: np.ndarray) -> np.ndarray:
        """|E|^2 evaluated with region ``region``'s coefficients (one-sided)."""
        psi, dpsi = self._eval_region(region, z_m)
        if self.polarization is Polarization.TE:
            return psi**2
        n_sq = self._n[region] ** 2
        ex = dpsi / (self.k0 * n_sq)
        ez = self.n_eff * psi / n_sq
        return ex**2 + ez**2

    def _tail_intensity(self, top: bool) -> float:
        """Exact |E|^2 integral over a semi-infinite cladding.

        The interface value is taken on the cladding side: for TM the
        intensity is discontinuous there.
        """
        z_if = self._z_m
        last = len(self._n) - 1
        if top:
            val = self._region_intensity_values(0, np.array([z_if[0]]))[0]
            return float(val) / (2.0 * self.decay_top_per_m)
        val = self._region_intensity_values(last, np.array([z_if[-1]]))[0]
        return float(val) / (2.0 * self.decay_bottom_per_m)


def _composite_gauss(f, a: float, b: float, rate: float) -> float:
    """Integrate a smooth function whose variation rate is ``rate`` (1/m)."""
    if b <= a:
        return 0.0
    n_seg = int(np.clip(math.ceil((b - a) * rate / 1.5), 1, 20000))
    edges = np.linspace(a, b, n_seg + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    vals = f(pts).reshape(n_seg, -1)
    return float(np.sum(half * (vals @ _GL_WEIGHTS)))


def _segment_pieces(mode: ModeSolution1D, z0_m: float, z1_m: float):
    """Split [z0, z1] at layer interfaces, tagging each piece's region."""
    z_if = mode._z_m
    cuts = [z0_m] + [z for z in z_if if z0_m < z < z1_m] + [z1_m]
    for a, b in zip(cuts[:-1], cuts[1:]):
        region = int(np.searchsorted(z_if, 0.5 * (a + b), side="right"))
        yield a, b, region


def _normalization_integral(mode: ModeSolution1D) -> float:
    z_if = mode._z_m
    total = mode._tail_intensity(top=True) + mode._tail_intensity(top=False)
    for a, b, region in _segment_pieces(mode, z_if[0], z_if[-1]):
        total += _composite_gauss(
            lambda z, r=region: mode._region_intensity_values(r, z), a, b, mode._region_rate(region)
        )
    return total


def _count_nodes(mode: ModeSolution1D) -> int:
    """Sign changes of the principal field across the finite structure."""
    z_if = mode._z_m
    samples = [np.array([mode.psi0[0]])]
    for a, b, region in _segment_pieces(mode, z_if[0], z_if[-1]):
        m = max(16, int(math.ceil((b - a) * mode._region_rate(region) / 0.15)))
        u = np.linspace(a, b, m, endpoint=False)
        samples.append(mode._eval_region(region, u)[0])
    samples.append(np.array([mode.psi0[-1]]))
    psi = np.concatenate(samples)
    psi = psi[psi != 0.0]
    return int(np.sum(np.signbit(psi[1:]) != np.signbit(psi[:-1])))


def find_guided_modes(
    stack: LayerStack,
    wavelength_nm: float,
    polarization: Polarization,
    *,
    scan_resolution: float = SCAN_RESOLUTION,
) -> list[ModeSolution1D]:
    """All guided modes of a stack, ordered by decreasing effective index.

    Roots of the transfer-matrix dispersion relation are bracketed on a
    uniform n_eff scan and polished by bisection to |dn_eff| <= 1e-10 (the
    implementation iterates to ~1e-14).  ``mode_order`` counts field nodes.
    An empty list means no guided mode exists; that is not an error.

    For a symmetric three-layer stack the number of guided modes per
    polarization equals ceil(V/pi) with V = k0 d sqrt(n1^2 - n2^2); TE and
    TM cutoffs coincide in that geometry, so both families share the count.
    """
    if wavelength_nm <= 0:
        raise ValidationError(f"wavelength must be positive, got {wavelength_nm} nm")
    if stack.max_interior_index <= stack.cladding_bound:
        return []  # no confinement possible; by contract not an error
    stack = normalize_stack(stack, require_guidable=False)
    lo = stack.cladding_bound
    hi = stack.max_interior_index

    a = lo + _EDGE_MARGIN
    b = hi - _EDGE_MARGIN
    if b <= a:
        return []
    count = max(2, int(math.ceil((b - a) / scan_resolution)) + 1)
    grid = np.linspace(a, b, count)
    mismatch = dispersion_mismatch(grid, stack, wavelength_nm, polarization)

    def scalar_mismatch(x: float) -> float:
        return float(dispersion_mismatch(x, stack, wavelength_nm, polarization)[0])

    roots: list[float] = []
    for i in range(count - 1):
        fa, fb = float(mismatch[i]), float(mismatch[i + 1])
        if fa == 0.0:
            roots.append(float(grid[i]))
        elif (fa < 0.0) != (fb < 0.0):
            roots.append(_bisect(scalar_mismatch, float(grid[i]), float(grid[i + 1]), fa, fb))
    if mismatch[-1] == 0.0:
        roots.append(float(grid[-1]))

    modes = [_build_mode(stack, wavelength_nm, polarization, root) for root in sorted(roots, reverse=True)]
    return modes


def _build_mode(
    stack: LayerStack, wavelength_nm: float, polarization: Polarization, n_eff: float
) -> ModeSolution1D:
    n, d_m, _ = _stack_arrays(stack)
    k0 = 2.0 * math.pi / (wavelength_nm * 1e-9)
    eta = _eta_values(n, polarization)
    beta_sq = (n_eff * k0) ** 2
    gamma_top = math.sqrt(beta_sq - (n[0] * k0) ** 2)
    gamma_bottom = math.sqrt(beta_sq - (n[-1] * k0) ** 2)

    last = len(n) - 1
    psi0 = np.empty(last + 1)
    dpsi0 = np.empty(last + 1)
    psi0[0], dpsi0[0] = 1.0, gamma_top
    psi, phi = 1.0, eta[0] * gamma_top
    for j in range(1, last):
        psi0[j] = psi
        dpsi0[j] = phi / eta[j]
        kap_sq = (n[j] * k0) ** 2 - beta_sq
        c, s = _cos_and_sinc(np.array([kap_sq]), d_m[j - 1])
        c, s = float(c[0]), float(s[0])
        psi, dpsi = c * psi0[j] + s * dpsi0[j], -kap_sq * s * psi0[j] + c * dpsi0[j]
        phi = eta[j] * dpsi
    psi0[last] = psi
    # Enforce a purely decaying bottom tail; the dispersion residual would
    # otherwise leak an exponentially growing admixture into the substrate.
    dpsi0[last] = -gamma_bottom * psi

    mode = ModeSolution1D(
        n_eff=n_eff,
        polarization=polarization,
        mode_order=0,
        wavelength_nm=wavelength_nm,
        stack=stack,
        decay_top_per_m=gamma_top,
        decay_bottom_per_m=gamma_bottom,
        psi0=psi0,
        dpsi0=dpsi0,
    )
    norm = _normalization_integral(mode)
    if norm <= 0:
        raise SolverError(f"non-positive field norm for n_eff={n_eff}")
    mode = mode.scaled(1.0 / math.sqrt(norm))
    return ModeSolution1D(
        n_eff=n_eff,
        polarization=polarization,
        mode_order=_count_nodes(mode),
        wavelength_nm=wavelength_nm,
        stack=stack,
        decay_top_per_m=gamma_top,
        decay_bottom_per_m=gamma_bottom,
        psi0=mode.psi0,
        dpsi0=mode.dpsi0,
    )


def field_profile(mode: ModeSolution1D, z_window_nm: tuple[float, float], samples: int) -> FieldProfile1D:
    """Sample the mode on a uniform grid across ``z_window_nm``."""
    z0, z1 = z_window_nm
    if not (math.isfinite(z0) and math.isfinite(z1)) or z1 <= z0:
        raise ValidationError(f"z window must be finite with z0 < z1, got {z_window_nm}")
    if samples < 2:
        raise ValidationError(f"need at least 2 samples, got {samples}")
    z_nm = np.linspace(z0, z1, samples)
    components = mode.e_components(z_nm)
    return FieldProfile1D(z_nm=z_nm, components=components, intensity=mode.intensity(z_nm))


def region_intensity(mode: ModeSolution1D, z0_nm: float, z1_nm: float) -> float:
    """Integral of |E|^2 over [z0, z1] (positions in nm, z in meters inside).

    Piecewise Gauss-Legendre quadrature paced by each region's transverse
    rate; relative accuracy is far better than the 1e-8 contract.
    """
    if z1_nm < z0_nm:
        raise ValidationError(f"need z0 <= z1, got ({z0_nm}, {z1_nm})")
    if z1_nm == z0_nm:
        return 0.0
    total = 0.0
    for a, b, region in _segment_pieces(mode, z0_nm * 1e-9, z1_nm * 1e-9):
        total += _composite_gauss(
            lambda z, r=region: mode._region_intensity_values(r, z), a, b, mode._region_rate(region)
        )
    return total


def mode_overlap(mode_a: ModeSolution1D, mode_b: ModeSolution1D) -> float:
    """Orthogonality inner product of two same-polarization modes.

    TE modes are orthogonal under the plain product of their principal
    fields; TM modes under the 1/n^2-weighted product (the natural inner
    product of the TM eigenproblem).  Distinct normalized modes of one
    stack yield values at roundoff level.
    """
    if mode_a.polarization is not mode_b.polarization:
        raise ValidationError("mode overlap is defined for same-polarization modes")
    te = mode_a.polarization is Polarization.TE
    n = mode_a._n
    z_if = mode_a._z_m

    def weight(region: int) -> float:
        return 1.0 if te else 1.0 / n[region] ** 2

    def product(region: int):
        def f(z_m: np.ndarray) -> np.ndarray:
            pa, _ = mode_a._eval_region(region, z_m)
            pb, _ = mode_b._eval_region(region, z_m)
            return weight(region) * pa * pb

        return f

    ga, gb = mode_a.decay_top_per_m, mode_b.decay_top_per_m
    total = weight(0) * mode_a.psi0[0] * mode_b.psi0[0] / (ga + gb)
    ga, gb = mode_a.decay_bottom_per_m, mode_b.decay_bottom_per_m
    total += weight(len(n) - 1) * mode_a.psi0[-1] * mode_b.psi0[-1] / (ga + gb)
    for a, b, region in _segment_pieces(mode_a, z_if[0], z_if[-1]):
        rate = mode_a._region_rate(region) + mode_b._region_rate(region)
        total += _composite_gauss(product(region), a, b, rate)
    return total


def penetration_ratio(
    stack: LayerStack,
    wavelength_nm: float,
    polarization: Polarization,
    window_nm: float = 100.0,
    *,
    membrane_name: str = "GaP",
    substrate_name: str = "diamond",
) -> float:
    """Field-strength ratio between the top of the substrate and the membrane.

    R = sqrt(I_substrate(top window) / I_membrane) for the fundamental mode,
    the RMS-field reading of the ratio of electric field strengths.  The
    stack must contain exactly one interior layer named ``membrane_name``
    and end in a semi-infinite layer named ``substrate_name``.
    """
    if window_nm < 0:
        raise ValidationError(f"window must be non-negative, got {window_nm} nm")
    stack = normalize_stack(stack, require_guidable=False)
    if stack.layers[-1].name != substrate_name:
        raise StackError(
            f"expected the bottom semi-infinite layer to be {substrate_name!r}, got {stack.layers[-1].name!r}"
        )
    z_top, z_bottom = stack.layer_span_nm(membrane_name)
    modes = find_guided_modes(stack, wavelength_nm, polarization)
    if not modes:
        raise UnguidedError(
            f"no guided {polarization.value} mode at {wavelength_nm} nm for this stack"
        )
    fundamental = modes[0]
    if window_nm == 0.0:
        return 0.0
    z_substrate = stack.interfaces_nm()[-1]
    i_substrate = region_intensity(fundamental, z_substrate, z_substrate + window_nm)
    i_membrane = region_intensity(fundamental, z_top, z_bottom)
    return math.sqrt(i_substrate / i_membrane)


@dataclass(frozen=True)
class MembraneStackTemplate:
    """Air / membrane / [air gap] / substrate stack with two free lengths."""

    n_cover: float = N_AIR
    n_membrane: float = N_GAP
    n_gap: float = N_AIR
    n_substrate: float = N_DIAMOND
    cover_name: str = "air"
    membrane_name: str = "GaP"
    gap_name: str = "air gap"
    substrate_name: str = "diamond"

    def stack(self, thickness_nm: float, gap_nm: float = 0.0) -> LayerStack:
        layers = [Layer(self.cover_name, self.n_cover)]
        layers.append(Layer(self.membrane_name, self.n_membrane, thickness_nm))
        if gap_nm > 0:
            layers.append(Layer(self.gap_name, self.n_gap, gap_nm))
        layers.append(Layer(self.substrate_name, self.n_substrate))
        return LayerStack(tuple(layers))


@dataclass(frozen=True, eq=False)
class RatioCurve:
    """Penetration ratio versus membrane thickness for one polarization."""

    polarization: Polarization
    gap_nm: float
    window_nm: float
    thicknesses_nm: tuple[float, ...]
    ratios: tuple[float, ...]
    failures: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        if len(self.thicknesses_nm) != len(self.ratios):
            raise ValidationError("thicknesses and ratios must have equal length")
        t = np.asarray(self.thicknesses_nm)
        if t.size and np.any(np.diff(t) <= 0):
            raise ValidationError("thicknesses must be strictly increasing")
        if any(r <= 0 for r in self.ratios):
            raise ValidationError("ratios must be positive")


def ratio_curve(
    thicknesses_nm,
    gap_nm: float,
    wavelength_nm: float,
    polarization: Polarization,
    *,
    window_nm: float = 100.0,
    template: MembraneStackTemplate | None = None,
    jobs: int = 1,
) -> RatioCurve:
    """Evaluate the penetration ratio across a membrane-thickness sweep.

    Thicknesses that fail to solve are collected into ``failures`` and the
    curve is still returned for the points that solved.
    """
    thicknesses = tuple(float(t) for t in thicknesses_nm)
    if not thicknesses:
        raise ValidationError("thickness list must be non-empty")
    template = template or MembraneStackTemplate()

    def solve(thickness: float):
        stack = template.stack(thickness, gap_nm)
        return penetration_ratio(
            stack,
            wavelength_nm,
            polarization,
            window_nm,
            membrane_name=template.membrane_name,
            substrate_name=template.substrate_name,
        )

    results: list[tuple[float, float] | tuple[float, str]] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(t, pool.submit(solve, t)) for t in thicknesses]
            for t, future in futures:
                try:
                    results.append((t, float(future.result())))
                except GapDiamondError as err:
                    results.append((t, str(err)))
    else:
        for t in thicknesses:
            try:
                results.append((t, float(solve(t))))
            except GapDiamondError as err:
                results.append((t, str(err)))
    points = [(t, r) for t, r in results if isinstance(r, float)]
    failures = tuple((t, r) for t, r in results if isinstance(r, str))
    return RatioCurve(
        polarization=polarization,
        gap_nm=gap_nm,
        window_nm=window_nm,
        thicknesses_nm=tuple(t for t, _ in points),
        ratios=tuple(r for _, r in points),
        failures=failures,
    )
