"""Scenario files: schema-validated JSON descriptions of toolkit runs.

A scenario is a single JSON object with an explicit ``schema_version``, a
wavelength, optional material overrides, and one block per command
(``ratio_curve``, ``cross_section``, ``fit``, ``design``).  Unknown fields
are rejected with their JSON path so bundled scenarios stay reproducible
across releases.  Bundled scenarios (``fig2c``, ``fig3b-synthetic``,
``ring2p5``) resolve by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core import (
    N_AIR,
    N_DIAMOND,
    N_GAP,
    N_NITRIDE,
    NVEmitter,
    Polarization,
    ScenarioError,
)

__all__ = [
    "SCHEMA_VERSION",
    "DEFAULT_MATERIALS",
    "Scenario",
    "RatioCurveSpec",
    "CrossSectionSpec",
    "FitSpec",
    "DesignSpec",
    "load_scenario",
    "resolve_scenario_path",
    "bundled_scenario_names",
]

SCHEMA_VERSION = 1

DEFAULT_MATERIALS = {
    "air": N_AIR,
    "GaP": N_GAP,
    "diamond": N_DIAMOND,
    "nitride": N_NITRIDE,
}


class _Node:
    """A dict wrapper that tracks its JSON path and rejects unknown keys."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ScenarioError(f"{path}: expected an object, got {type(data).__name__}")
        self._data = dict(data)
        self._path = path

    def child(self, key: str) -> "_Node":
        return _Node(self._take_raw(key), f"{self._path}.{key}")

    def optional_child(self, key: str) -> "_Node | None":
        if key not in self._data:
            return None
        return self.child(key)

    def _take_raw(self, key: str):
        if key not in self._data:
            raise ScenarioError(f"{self._path}.{key}: required field is missing")
        return self._data.pop(key)

    def take(self, key: str, kind, default=...):
        if key not in self._data:
            if default is ...:
                raise ScenarioError(f"{self._path}.{key}: required field is missing")
            return default
        value = self._data.pop(key)
        path = f"{self._path}.{key}"
        return _convert(value, kind, path)

    def take_list(self, key: str, kind, default=...):
        if key not in self._data:
            if default is ...:
                raise ScenarioError(f"{self._path}.{key}: required field is missing")
            return default
        value = self._data.pop(key)
        path = f"{self._path}.{key}"
        if not isinstance(value, list) or not value:
            raise ScenarioError(f"{path}: expected a non-empty list")
        return tuple(_convert(v, kind, f"{path}[{i}]") for i, v in enumerate(value))

    def peek(self, key: str) -> bool:
        return key in self._data

    def finish(self) -> None:
        if self._data:
            key = sorted(self._data)[0]
            raise ScenarioError(f"{self._path}.{key}: unknown field")


def _convert(value, kind, path: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ScenarioError(f"{path}: expected a string, got {value!r}")
        return value
    if kind is Polarization:
        if not isinstance(value, str) or value.upper() not in ("TE", "TM"):
            raise ScenarioError(f"{path}: expected 'TE' or 'TM', got {value!r}")
        return Polarization(value.upper())
    raise AssertionError(f"unsupported conversion {kind}")


def _thickness_grid(node: _Node, key: str) -> tuple[float, ...]:
    """A list of thicknesses, or a {start, stop, step} range (inclusive)."""
    if not node.peek(key):
        raise ScenarioError(f"{node._path}.{key}: required field is missing")
    raw = node._data[key]
    if isinstance(raw, list):
        return node.take_list(key, float)
    sub = node.child(key)
    start = sub.take("start", float)
    stop = sub.take("stop", float)
    step = sub.take("step", float)
    sub.finish()
    if step <= 0 or stop < start:
        raise ScenarioError(f"{node._path}.{key}: need step > 0 and stop >= start")
    values = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-9:
            break
        values.append(round(value, 9))
        k += 1
    return tuple(values)


@dataclass(frozen=True)
class RatioCurveSpec:
    polarizations: tuple[Polarization, ...]
    gaps_nm: tuple[float, ...]
    thicknesses_nm: tuple[float, ...]
    window_nm: float
    cover: str
    membrane: str
    substrate: str


@dataclass(frozen=True)
class CrossSectionSpec:
    core_width_nm: float
    core_height_nm: float
    gap_nm: float
    substrate_etch_nm: float
    pedestal_width_nm: float | None
    core: str
    substrate: str
    background: str
    pitch_nm: float
    padding_nm: float
    polarizations: tuple[Polarization, ...]


@dataclass(frozen=True)
class FitSpec:
    kind: str
    data: str | None
    window_nm: float
    gap_bounds_nm: tuple[float, float]
    cover: str
    membrane: str
    substrate: str


@dataclass(frozen=True)
class DesignSpec:
    alpha_db_per_cm: float
    polarization: Polarization
    diameters_um: tuple[float, ...]
    nv_depths_nm: tuple[float, ...]
    membrane_thicknesses_nm: tuple[float, ...]
    gaps_nm: tuple[float, ...]
    waveguide_width_nm: float
    substrate_etch_nm: float
    pedestal_width_nm: float | None
    pitch_nm: float
    padding_nm: float
    emitter: NVEmitter
    core: str
    substrate: str


@dataclass(frozen=True, eq=False)
class Scenario:
    """A parsed scenario: wavelength, materials, and command blocks."""

    path: Path
    wavelength_nm: float
    materials: dict[str, float]
    ratio_curve: RatioCurveSpec | None
    cross_section: CrossSectionSpec | None
    fit: FitSpec | None
    design: DesignSpec | None

    def material(self, name: str) -> float:
        try:
            return self.materials[name]
        except KeyError:
            raise ScenarioError(
                f"unknown material {name!r}; known: {', '.join(sorted(self.materials))}"
            ) from None


def bundled_scenario_names() -> tuple[str, ...]:
    base = resources.files("gapdiamond") / "scenarios"
    return tuple(sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json")))


def resolve_scenario_path(name_or_path: str) -> Path:
    """An existing file path, else a bundled scenario name."""
    candidate = Path(name_or_path)
    if candidate.is_file():
        return candidate
    base = resources.files("gapdiamond") / "scenarios"
    for stem in (name_or_path, f"{name_or_path}.json"):
        bundled = base / stem
        if bundled.is_file():
            return Path(str(bundled))
    raise ScenarioError(
        f"scenario {name_or_path!r} is neither a file nor a bundled scenario "
        f"(bundled: {', '.join(bundled_scenario_names())})"
    )


def load_scenario(name_or_path: str) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path}: invalid JSON: {err}") from None

    root = _Node(data, "$")
    version = root.take("schema_version", int)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"$.schema_version: expected {SCHEMA_VERSION}, got {version}")
    wavelength = root.take("wavelength_nm", float)
    if wavelength <= 0:
        raise ScenarioError(f"$.wavelength_nm: must be positive, got {wavelength}")

    materials = dict(DEFAULT_MATERIALS)
    mat_node = root.optional_child("materials")
    if mat_node is not None:
        for name in list(mat_node._data):
            value = mat_node.take(name, float)
            if value < 1:
                raise ScenarioError(f"$.materials.{name}: refractive index must be >= 1")
            materials[name] = value
        mat_node.finish()

    ratio_spec = _parse_ratio_curve(root.optional_child("ratio_curve"))
    section_spec = _parse_cross_section(root.optional_child("cross_section"))
    fit_spec = _parse_fit(root.optional_child("fit"))
    design_spec = _parse_design(root.optional_child("design"))
    root.finish()

    return Scenario(
        path=path,
        wavelength_nm=wavelength,
        materials=materials,
        ratio_curve=ratio_spec,
        cross_section=section_spec,
        fit=fit_spec,
        design=design_spec,
    )


def _parse_ratio_curve(node: _Node | None) -> RatioCurveSpec | None:
    if node is None:
        return None
    spec = RatioCurveSpec(
        polarizations=node.take_list("polarizations", Polarization, (Polarization.TE, Polarization.TM)),
        gaps_nm=node.take_list("gaps_nm", float, (0.0,)),
        thicknesses_nm=_thickness_grid(node, "thicknesses_nm"),
        window_nm=node.take("window_nm", float, 100.0),
        cover=node.take("cover", str, "air"),
        membrane=node.take("membrane", str, "GaP"),
        substrate=node.take("substrate", str, "diamond"),
    )
    node.finish()
    if not spec.thicknesses_nm:
        raise ScenarioError("$.ratio_curve.thicknesses_nm: at least one thickness is required")
    if any(g < 0 for g in spec.gaps_nm):
        raise ScenarioError("$.ratio_curve.gaps_nm: gaps must be non-negative")
    if spec.window_nm < 0:
        raise ScenarioError("$.ratio_curve.window_nm: must be non-negative")
    return spec


def _parse_cross_section(node: _Node | None) -> CrossSectionSpec | None:
    if node is None:
        return None
    spec = CrossSectionSpec(
        core_width_nm=node.take("core_width_nm", float),
        core_height_nm=node.take("core_height_nm", float),
        gap_nm=node.take("gap_nm", float, 0.0),
        substrate_etch_nm=node.take("substrate_etch_nm", float, 0.0),
        pedestal_width_nm=node.take("pedestal_width_nm", float, None),
        core=node.take("core", str, "GaP"),
        substrate=node.take("substrate", str, "diamond"),
        background=node.take("background", str, "air"),
        pitch_nm=node.take("pitch_nm", float, 5.0),
        padding_nm=node.take("padding_nm", float, 1000.0),
        polarizations=node.take_list("polarizations", Polarization, (Polarization.TE, Polarization.TM)),
    )
    node.finish()
    if spec.pitch_nm <= 0:
        raise ScenarioError("$.cross_section.pitch_nm: must be positive")
    return spec


def _parse_fit(node: _Node | None) -> FitSpec | None:
    if node is None:
        return None
    kind = node.take("kind", str)
    if kind not in ("gap", "loss"):
        raise ScenarioError(f"$.fit.kind: expected 'gap' or 'loss', got {kind!r}")
    bounds = node.take_list("gap_bounds_nm", float, (0.0, 50.0))
    if len(bounds) != 2 or not 0 <= bounds[0] < bounds[1]:
        raise ScenarioError("$.fit.gap_bounds_nm: expected [lo, hi] with 0 <= lo < hi")
    spec = FitSpec(
        kind=kind,
        data=node.take("data", str, None),
        window_nm=node.take("window_nm", float, 100.0),
        gap_bounds_nm=(bounds[0], bounds[1]),
        cover=node.take("cover", str, "air"),
        membrane=node.take("membrane", str, "GaP"),
        substrate=node.take("substrate", str, "diamond"),
    )
    node.finish()
    return spec


def _parse_design(node: _Node | None) -> DesignSpec | None:
    if node is None:
        return None
    emitter_node = node.optional_child("emitter")
    if emitter_node is None:
        emitter = NVEmitter()
    else:
        emitter = NVEmitter(
            depth_nm=emitter_node.take("depth_nm", float, 20.0),
            dipole_angle_rad=emitter_node.take("dipole_angle_rad", float, 0.0),
            gamma_total_mhz=emitter_node.take("gamma_total_mhz", float, 13.0),
            gamma_zpl_mhz=emitter_node.take("gamma_zpl_mhz", float, 0.35),
            lambda_zpl_nm=emitter_node.take("lambda_zpl_nm", float, 637.0),
        )
        emitter_node.finish()
    spec = DesignSpec(
        alpha_db_per_cm=node.take("alpha_db_per_cm", float),
        polarization=node.take("polarization", Polarization, Polarization.TM),
        diameters_um=node.take_list("diameters_um", float),
        nv_depths_nm=node.take_list("nv_depths_nm", float),
        membrane_thicknesses_nm=node.take_list("membrane_thicknesses_nm", float),
        gaps_nm=node.take_list("gaps_nm", float, (0.0,)),
        waveguide_width_nm=node.take("waveguide_width_nm", float, 300.0),
        substrate_etch_nm=node.take("substrate_etch_nm", float, 120.0),
        pedestal_width_nm=node.take("pedestal_width_nm", float, None),
        pitch_nm=node.take("pitch_nm", float, 5.0),
        padding_nm=node.take("padding_nm", float, 1000.0),
        emitter=emitter,
        core=node.take("core", str, "GaP"),
        substrate=node.take("substrate", str, "diamond"),
    )
    node.finish()
    if spec.alpha_db_per_cm <= 0:
        raise ScenarioError("$.design.alpha_db_per_cm: must be positive")
    return spec
