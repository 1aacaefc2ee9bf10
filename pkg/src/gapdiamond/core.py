"""Shared domain types, physical constants, unit conversions, and validation.

Public constructors and operations accept lengths in the units their names
carry (``*_nm``, ``*_db_per_cm``); solver internals work in SI (meters,
radians, 1/m).  Refractive indices are real and dispersionless everywhere:
material absorption enters only through the measured propagation loss in
the cavity module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .modes2d import CrossSection

__all__ = [
    "N_GAP",
    "N_DIAMOND",
    "N_AIR",
    "N_NITRIDE",
    "NV_WAVELENGTH_NM",
    "NV_GAMMA_TOTAL_MHZ",
    "NV_GAMMA_ZPL_MHZ",
    "SPEED_OF_LIGHT",
    "GapDiamondError",
    "ValidationError",
    "StackError",
    "GeometryError",
    "ScenarioError",
    "FitError",
    "SolverError",
    "UnguidedError",
    "LosslessError",
    "Polarization",
    "Layer",
    "LayerStack",
    "NVEmitter",
    "PhysicalScenario",
    "nm_to_m",
    "m_to_nm",
    "db_per_cm_to_inverse_meters",
    "inverse_meters_to_db_per_cm",
    "normalize_stack",
]

# Material refractive indices at 637 nm (dispersion neglected).
N_GAP = 3.3
N_DIAMOND = 2.4
N_AIR = 1.0
# PECVD silicon nitride; the deposition recipe does not pin the index, so
# treat this as a configurable default rather than a material model.
N_NITRIDE = 2.0

# NV-center emitter defaults.
NV_WAVELENGTH_NM = 637.0
NV_GAMMA_TOTAL_MHZ = 13.0
NV_GAMMA_ZPL_MHZ = 0.35

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# 10*log10(e): dB per neper, the bridge between dB/cm and 1/cm.
_DB_PER_NEPER = 10.0 * math.log10(math.e)


class GapDiamondError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GapDiamondError):
    """Invalid input: bad geometry, scenario, or data file."""


class StackError(ValidationError):
    """A layer stack violates a structural or guidance invariant."""


class GeometryError(ValidationError):
    """A 2-D cross-section violates a geometric invariant."""


class ScenarioError(ValidationError):
    """A scenario file failed schema validation."""


class FitError(ValidationError):
    """A least-squares fit received unusable data or is unidentifiable."""


class SolverError(GapDiamondError):
    """A numerical solve failed to converge."""


class UnguidedError(GapDiamondError):
    """The structure does not support a bound mode."""

    def __init__(self, message: str, n_eff: float | None = None):
        super().__init__(message)
        self.n_eff = n_eff


class LosslessError(ValidationError):
    """Zero propagation loss: the loss-limited Q is unbounded."""


def nm_to_m(value_nm: float) -> float:
    return value_nm * 1e-9


def m_to_nm(value_m: float) -> float:
    return value_m * 1e9


def db_per_cm_to_inverse_meters(alpha_db_per_cm: float) -> float:
    """Convert a propagation loss from dB/cm to an intensity decay rate in 1/m.

    Round-trips with :func:`inverse_meters_to_db_per_cm` to better than one
    part in 1e12.
    """
    if alpha_db_per_cm < 0:
        raise ValidationError(f"loss must be non-negative, got {alpha_db_per_cm} dB/cm")
    return alpha_db_per_cm / _DB_PER_NEPER * 100.0


def inverse_meters_to_db_per_cm(alpha_per_m: float) -> float:
    """Inverse of :func:`db_per_cm_to_inverse_meters`."""
    if alpha_per_m < 0:
        raise ValidationError(f"loss must be non-negative, got {alpha_per_m} 1/m")
    return alpha_per_m * _DB_PER_NEPER / 100.0


class Polarization(Enum):
    """Slab-mode polarization.

    TE has its electric field in the plane of the layers; TM has its
    principal electric-field component normal to them.  For 2-D ridge
    cross-sections the same labels refer to the dominant horizontal (TE)
    or vertical (TM) electric-field component.
    """

    TE = "TE"
    TM = "TM"

    @classmethod
    def parse(cls, text: str) -> "Polarization":
        try:
            return cls(str(text).upper())
        except ValueError:
            raise ValidationError(f"unknown polarization {text!r}; expected TE or TM") from None


@dataclass(frozen=True)
class Layer:
    """One slab layer: a name tag, a real refractive index, and a thickness.

    ``thickness_nm=None`` marks a semi-infinite outer layer.  Zero-thickness
    layers are legal at construction and removed by :func:`normalize_stack`.
    """

    name: str
    n: float
    thickness_nm: float | None = None

    def __post_init__(self):
        if self.n < 1.0:
            raise StackError(f"layer {self.name!r}: refractive index must be >= 1, got {self.n}")
        if self.thickness_nm is not None and self.thickness_nm < 0:
            raise StackError(
                f"layer {self.name!r}: thickness must be non-negative, got {self.thickness_nm} nm"
            )

    @property
    def is_semi_infinite(self) -> bool:
        return self.thickness_nm is None


@dataclass(frozen=True)
class LayerStack:
    """An ordered 1-D dielectric stack, top cladding first.

    The first and last layers are the only semi-infinite ones; z increases
    from the top cladding toward the bottom substrate, with z = 0 at the
    first interface.  Whether the stack can actually guide (its maximum
    interior index exceeding both cladding indices) is checked by
    :func:`normalize_stack`, not at construction, so that degenerate stacks
    can still be inspected and reported.
    """

    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if len(layers) < 3:
            raise StackError(
                f"stack needs two semi-infinite claddings and at least one finite layer, got {len(layers)} layers"
            )
        if not layers[0].is_semi_infinite or not layers[-1].is_semi_infinite:
            raise StackError("first and last layers must be semi-infinite (thickness_nm=None)")
        for layer in layers[1:-1]:
            if layer.is_semi_infinite:
                raise StackError(f"interior layer {layer.name!r} must have a finite thickness")

    @property
    def n_top(self) -> float:
        return self.layers[0].n

    @property
    def n_bottom(self) -> float:
        return self.layers[-1].n

    @property
    def cladding_bound(self) -> float:
        """Largest cladding index; a guided mode must exceed this."""
        return max(self.n_top, self.n_bottom)

    @property
    def interior(self) -> tuple[Layer, ...]:
        return self.layers[1:-1]

    @property
    def max_interior_index(self) -> float:
        return max(layer.n for layer in self.interior)

    @property
    def total_thickness_nm(self) -> float:
        return sum(layer.thickness_nm for layer in self.interior)

    def interfaces_nm(self) -> tuple[float, ...]:
        """Interface depths, z = 0 at the top-cladding interface."""
        z = [0.0]
        for layer in self.interior:
            z.append(z[-1] + layer.thickness_nm)
        return tuple(z)

    def layer_span_nm(self, name: str) -> tuple[float, float]:
        """(z_top, z_bottom) of the unique interior layer called ``name``."""
        matches = [i for i, layer in enumerate(self.interior) if layer.name == name]
        if len(matches) != 1:
            raise StackError(f"expected exactly one interior layer named {name!r}, found {len(matches)}")
        z = self.interfaces_nm()
        i = matches[0]
        return z[i], z[i + 1]

    def is_guidable(self) -> bool:
        return self.max_interior_index > self.cladding_bound


def normalize_stack(stack: LayerStack, *, require_guidable: bool = True) -> LayerStack:
    """Canonicalize a stack: drop zero-thickness layers, merge equal indices.

    A finite layer whose index equals an adjacent layer's is merged into it
    (keeping the earlier layer's name); a finite layer matching a
    semi-infinite cladding is absorbed by it.  With ``require_guidable``
    (the default) a stack whose interior cannot confine light is rejected,
    naming the violated rule.  Idempotent.
    """
    interior = [layer for layer in stack.interior if layer.thickness_nm > 0]

    merged: list[Layer] = []
    for layer in interior:
        if merged and merged[-1].n == layer.n:
            merged[-1] = replace(merged[-1], thickness_nm=merged[-1].thickness_nm + layer.thickness_nm)
        else:
            merged.append(layer)
    # Absorb finite layers that match a semi-infinite cladding index.
    while merged and merged[0].n == stack.layers[0].n:
        merged.pop(0)
    while merged and merged[-1].n == stack.layers[-1].n:
        merged.pop()

    if not merged:
        raise StackError("normalization removed every finite layer: at least one finite layer is required")

    result = LayerStack((stack.layers[0], *merged, stack.layers[-1]))
    if require_guidable and not result.is_guidable():
        raise StackError(
            "no guided mode possible: max interior index "
            f"{result.max_interior_index} does not exceed the cladding bound {result.cladding_bound}"
        )
    return result


@dataclass(frozen=True)
class NVEmitter:
    """NV-center emitter parameters.

    ``depth_nm`` is measured below the diamond surface.  ``dipole_angle_rad``
    is the angle between the local mode field and the emission dipole; the
    default 0 corresponds to optimal alignment.  Rates are ordinary
    frequencies in MHz.
    """

    depth_nm: float = 20.0
    dipole_angle_rad: float = 0.0
    gamma_total_mhz: float = NV_GAMMA_TOTAL_MHZ
    gamma_zpl_mhz: float = NV_GAMMA_ZPL_MHZ
    lambda_zpl_nm: float = NV_WAVELENGTH_NM

    def __post_init__(self):
        if not 0 < self.gamma_zpl_mhz <= self.gamma_total_mhz:
            raise ValidationError(
                f"need 0 < gamma_zpl <= gamma_total, got {self.gamma_zpl_mhz} and {self.gamma_total_mhz} MHz"
            )
        if self.depth_nm < 0:
            raise ValidationError(f"NV depth must be non-negative, got {self.depth_nm} nm")
        if not 0 <= self.dipole_angle_rad <= math.pi / 2:
            raise ValidationError(f"dipole angle must lie in [0, pi/2], got {self.dipole_angle_rad}")
        if self.lambda_zpl_nm <= 0:
            raise ValidationError(f"ZPL wavelength must be positive, got {self.lambda_zpl_nm} nm")

    @property
    def branching_ratio(self) -> float:
        """Fraction of spontaneous emission going into the ZPL."""
        return self.gamma_zpl_mhz / self.gamma_total_mhz

    @property
    def cos2_theta(self) -> float:
        return math.cos(self.dipole_angle_rad) ** 2


@dataclass(frozen=True)
class PhysicalScenario:
    """A geometry plus the optical excitation applied to it."""

    geometry: "LayerStack | CrossSection"
    wavelength_nm: float
    polarization: Polarization

    def __post_init__(self):
        if self.wavelength_nm <= 0:
            raise ValidationError(f"wavelength must be positive, got {self.wavelength_nm} nm")
