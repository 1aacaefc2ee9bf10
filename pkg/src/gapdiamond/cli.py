"""Command-line front end: scenario ingestion and CSV/SVG emission.

Subcommands map onto the library modules: ``ratio-curve`` reproduces the
membrane-thinning field-ratio curves, ``mode2d`` solves a ridge
cross-section, ``fit`` estimates propagation loss or the interface air
gap from measurement CSVs, and ``design`` sweeps ring geometries.  CSV is
the canonical output; ``--svg`` additionally renders a figure next to it.

Exit codes: 0 success, 2 invalid input (scenario, data file, CLI usage),
3 solver failure, 4 unguided structure.  Output bytes are independent of
``--jobs`` and of repetition.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

from .core import (
    GapDiamondError,
    SolverError,
    UnguidedError,
    ValidationError,
)
from . import cavity, fitting, modes2d, slab
from .scenario import Scenario, load_scenario

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_UNGUIDED = 4

_JOBS_ENV = "GAPDIAMOND_JOBS"
_PITCH_WARNING_NM = 20.0


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(_JOBS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapdiamond",
        description="GaP-on-diamond photonics design toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", required=True, help="scenario file path or bundled name")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--svg", action="store_true", help="also render an SVG figure next to the CSV")
        p.add_argument(
            "--jobs",
            type=int,
            default=_default_jobs(),
            help=f"worker cap for sweeps (default from ${_JOBS_ENV} or 1)",
        )

    p_ratio = sub.add_parser("ratio-curve", help="field-strength ratio vs membrane thickness")
    common(p_ratio)
    p_ratio.set_defaults(func=cmd_ratio_curve)

    p_mode = sub.add_parser("mode2d", help="2-D ridge mode: effective index and field map")
    common(p_mode)
    p_mode.set_defaults(func=cmd_mode2d)

    p_fit = sub.add_parser("fit", help="least-squares fits of measurement CSVs")
    p_fit.add_argument("kind", choices=("gap", "loss"), help="fit type")
    p_fit.add_argument("--data", help="input data CSV (defaults to the scenario's fit.data)")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_design = sub.add_parser("design", help="ring-cavity design sweep")
    common(p_design)
    p_design.add_argument(
        "--check-paper-point",
        action="store_true",
        help="exit non-zero unless the 2.5 um / 20 nm / 120 nm / no-gap row has F_SE > 1",
    )
    p_design.set_defaults(func=cmd_design)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_INPUT if err.code not in (0, None) else 0
    try:
        return args.func(args)
    except UnguidedError as err:
        print(f"unguided: {err}", file=sys.stderr)
        return EXIT_UNGUIDED
    except SolverError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except GapDiamondError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _svg_path(out_path: str) -> str:
    return str(Path(out_path).with_suffix(".svg"))


def cmd_ratio_curve(args) -> int:
    scenario = load_scenario(args.scenario)
    spec = scenario.ratio_curve
    if spec is None:
        raise ValidationError(f"scenario {scenario.path.name} has no 'ratio_curve' block")
    template = slab.MembraneStackTemplate(
        n_cover=scenario.material(spec.cover),
        n_membrane=scenario.material(spec.membrane),
        n_substrate=scenario.material(spec.substrate),
        cover_name=spec.cover,
        membrane_name=spec.membrane,
        substrate_name=spec.substrate,
    )
    curves = []
    failures = []
    for pol in spec.polarizations:
        for gap in spec.gaps_nm:
            curve = slab.ratio_curve(
                spec.thicknesses_nm,
                gap,
                scenario.wavelength_nm,
                pol,
                window_nm=spec.window_nm,
                template=template,
                jobs=args.jobs,
            )
            curves.append(curve)
            failures.extend((pol, gap, t, msg) for t, msg in curve.failures)
    if all(not curve.thicknesses_nm for curve in curves):
        raise SolverError("no ratio-curve point could be solved: " + failures[0][3])
    rows = [
        (curve.polarization.value, curve.gap_nm, t, r)
        for curve in curves
        for t, r in zip(curve.thicknesses_nm, curve.ratios)
    ]
    _write_csv(args.out, ["polarization", "gap_nm", "thickness_nm", "ratio"], rows)
    for pol, gap, t, msg in failures:
        print(f"warning: {pol.value} gap={gap} t={t} nm failed: {msg}", file=sys.stderr)
    if args.svg:
        from . import plotting

        plotting.save_ratio_curves(curves, _svg_path(args.out))
    return EXIT_OK


def _section_from_spec(scenario: Scenario) -> modes2d.CrossSection:
    spec = scenario.cross_section
    if spec is None:
        raise ValidationError(f"scenario {scenario.path.name} has no 'cross_section' block")
    return modes2d.ridge_cross_section(
        core_width_nm=spec.core_width_nm,
        core_height_nm=spec.core_height_nm,
        n_core=scenario.material(spec.core),
        n_substrate=scenario.material(spec.substrate),
        n_background=scenario.material(spec.background),
        gap_nm=spec.gap_nm,
        substrate_etch_nm=spec.substrate_etch_nm,
        pedestal_width_nm=spec.pedestal_width_nm,
        padding_nm=spec.padding_nm,
        pitch_nm=spec.pitch_nm,
    )


def cmd_mode2d(args) -> int:
    scenario = load_scenario(args.scenario)
    spec = scenario.cross_section
    section = _section_from_spec(scenario)
    if spec.pitch_nm > _PITCH_WARNING_NM:
        print(
            f"warning: grid pitch {spec.pitch_nm:g} nm is coarser than "
            f"{_PITCH_WARNING_NM:g} nm; results may be inaccurate",
            file=sys.stderr,
        )
    multi = len(spec.polarizations) > 1
    for pol in spec.polarizations:
        mode = modes2d.solve_fundamental_2d(section, scenario.wavelength_nm, pol)
        print(f"{pol.value} n_eff = {mode.n_eff:.9f}")
        out = args.out
        if multi:
            base = Path(args.out)
            out = str(base.with_name(f"{base.stem}_{pol.value.lower()}{base.suffix}"))
        modes2d.write_field_csv(mode, out)
        if args.svg:
            from . import plotting

            plotting.save_field_map(mode, _svg_path(out))
    return EXIT_OK


def cmd_fit(args) -> int:
    scenario = load_scenario(args.scenario)
    spec = scenario.fit
    if spec is None:
        raise ValidationError(f"scenario {scenario.path.name} has no 'fit' block")
    if spec.kind != args.kind:
        raise ValidationError(f"scenario fit block is for kind {spec.kind!r}, requested {args.kind!r}")
    data_path = args.data or spec.data
    if data_path is None:
        raise ValidationError("no data CSV given: pass --data or set fit.data in the scenario")
    if args.data is None:
        # Paths inside a scenario resolve relative to the scenario file.
        data_path = str((scenario.path.parent / data_path).resolve())

    if args.kind == "loss":
        return _fit_loss(args, data_path)
    return _fit_gap(args, scenario, data_path)


def _fit_loss(args, data_path: str) -> int:
    trace = fitting.read_decay_csv(data_path)
    result = fitting.fit_exponential_decay(trace)
    gof = fitting.goodness_of_fit(result)
    db, db_err = fitting.alpha_db_per_cm(result)
    print("exponential decay fit")
    print(f"  points: {result.n_points}, dof: {result.dof}")
    print(f"  alpha: {result.value('alpha_per_m'):.4f} 1/m ({db:.2f} dB/cm)")
    print(f"  stderr: {result.stderr('alpha_per_m'):.4f} 1/m ({db_err:.2f} dB/cm)")
    print(f"  I0: {math.exp(result.value('ln_i0')):.6g}")
    print(f"  {gof.summary()}")
    for note in result.notes:
        print(f"  note: {note}")
    _write_csv(
        args.out,
        ["kind", "estimate", "stderr", "sse", "dof", "estimate_db_per_cm", "stderr_db_per_cm"],
        [("loss", result.value("alpha_per_m"), result.stderr("alpha_per_m"), result.rss, result.dof, db, db_err)],
    )
    if args.svg:
        from . import plotting

        plotting.save_decay_fit(trace, result, _svg_path(args.out))
    return EXIT_OK


def _fit_gap(args, scenario: Scenario, data_path: str) -> int:
    spec = scenario.fit
    thicknesses, ratios, pols = fitting.read_ratio_csv(data_path)
    template = slab.MembraneStackTemplate(
        n_cover=scenario.material(spec.cover),
        n_membrane=scenario.material(spec.membrane),
        n_substrate=scenario.material(spec.substrate),
        cover_name=spec.cover,
        membrane_name=spec.membrane,
        substrate_name=spec.substrate,
    )
    result = fitting.fit_air_gap(
        thicknesses,
        ratios,
        pols,
        template=template,
        wavelength_nm=scenario.wavelength_nm,
        window_nm=spec.window_nm,
        gap_bounds_nm=spec.gap_bounds_nm,
    )
    gof = fitting.goodness_of_fit(result)
    print("air-gap fit")
    print(f"  points: {result.n_points}, dof: {result.dof}")
    print(f"  gap: {result.value('gap_nm'):.2f} nm")
    print(f"  stderr: {result.stderr('gap_nm'):.3f} nm")
    print(f"  SSE: {result.rss:.6g}")
    print(f"  {gof.summary()}")
    for note in result.notes:
        print(f"  note: {note}")
    _write_csv(
        args.out,
        ["kind", "estimate", "stderr", "sse", "dof"],
        [("gap", result.value("gap_nm"), result.stderr("gap_nm"), result.rss, result.dof)],
    )
    if args.svg:
        from . import plotting
        from .core import Polarization
        from .slab import penetration_ratio

        def model(t, gap, pol_name):
            return penetration_ratio(
                template.stack(float(t), gap),
                scenario.wavelength_nm,
                Polarization.parse(pol_name),
                spec.window_nm,
                membrane_name=template.membrane_name,
                substrate_name=template.substrate_name,
            )

        plotting.save_gap_fit(thicknesses, ratios, pols, result, model, _svg_path(args.out))
    return EXIT_OK


_DESIGN_COLUMNS = [
    "diameter_nm",
    "nv_depth_nm",
    "membrane_thickness_nm",
    "gap_nm",
    "polarization",
    "n_eff",
    "q",
    "a_eff_nm2",
    "v_nm3",
    "v_lambda_over_n_cubed",
    "field_ratio_sq",
    "f_se",
    "f_zpl",
]


def cmd_design(args) -> int:
    scenario = load_scenario(args.scenario)
    spec = scenario.design
    if spec is None:
        raise ValidationError(f"scenario {scenario.path.name} has no 'design' block")
    table = cavity.design_ring(
        diameters_um=spec.diameters_um,
        nv_depths_nm=spec.nv_depths_nm,
        membrane_thicknesses_nm=spec.membrane_thicknesses_nm,
        gaps_nm=spec.gaps_nm,
        alpha_db_per_cm=spec.alpha_db_per_cm,
        wavelength_nm=scenario.wavelength_nm,
        polarization=spec.polarization,
        emitter=spec.emitter,
        waveguide_width_nm=spec.waveguide_width_nm,
        substrate_etch_nm=spec.substrate_etch_nm,
        pedestal_width_nm=spec.pedestal_width_nm,
        n_core=scenario.material(spec.core),
        n_substrate=scenario.material(spec.substrate),
        pitch_nm=spec.pitch_nm,
        padding_nm=spec.padding_nm,
        jobs=args.jobs,
    )
    rows = [
        (
            row.diameter_um * 1e3,
            row.nv_depth_nm,
            row.membrane_thickness_nm,
            row.gap_nm,
            table.polarization.value,
            row.n_eff,
            row.q,
            row.a_eff_nm2,
            row.v_nm3,
            row.v_norm,
            row.field_ratio_sq,
            row.f_se,
            row.f_zpl,
        )
        for row in table.rows
    ]
    _write_csv(args.out, _DESIGN_COLUMNS, rows)
    for point, message in table.failures:
        print(f"warning: geometry {point} failed: {message}", file=sys.stderr)
    if args.svg:
        from . import plotting

        plotting.save_design_table(table, _svg_path(args.out))
    if args.check_paper_point:
        row = table.row_at(2.5, 20.0, 120.0, 0.0)
        if row is None:
            print("error: the sweep does not contain the 2.5 um / 20 nm / 120 nm / no-gap point", file=sys.stderr)
            return EXIT_INPUT
        print(f"paper-point check: F_SE = {row.f_se:.4f}")
        if not row.f_se > 1.0:
            print("error: F_SE <= 1 at the reference design point", file=sys.stderr)
            return 1
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
