"""Design toolkit for hybrid GaP-on-diamond photonics.

Mode solving for layered and ridge waveguides, evanescent coupling into
near-surface NV centers, propagation-loss fits, and ring-cavity Purcell
estimates.
"""

from .core import (
    N_AIR,
    N_DIAMOND,
    N_GAP,
    N_NITRIDE,
    NV_GAMMA_TOTAL_MHZ,
    NV_GAMMA_ZPL_MHZ,
    NV_WAVELENGTH_NM,
    FitError,
    GapDiamondError,
    GeometryError,
    Layer,
    LayerStack,
    LosslessError,
    NVEmitter,
    PhysicalScenario,
    Polarization,
    ScenarioError,
    SolverError,
    StackError,
    UnguidedError,
    ValidationError,
    db_per_cm_to_inverse_meters,
    inverse_meters_to_db_per_cm,
    normalize_stack,
)
from .slab import (
    MembraneStackTemplate,
    ModeSolution1D,
    RatioCurve,
    field_profile,
    find_guided_modes,
    mode_overlap,
    penetration_ratio,
    ratio_curve,
    region_intensity,
)
from .modes2d import (
    CrossSection,
    IndexRect,
    ModeSolution2D,
    RingModeVolume,
    effective_area,
    effective_index_method,
    field_ratio_at_point,
    ridge_cross_section,
    ring_mode_volume,
    solve_fundamental_2d,
)
from .fitting import (
    DecayTrace,
    FitResult,
    fit_air_gap,
    fit_exponential_decay,
    goodness_of_fit,
)
from .cavity import (
    CavityParams,
    RingDesignRow,
    RingDesignTable,
    coupling_ratio,
    design_ring,
    mode_volume,
    purcell_total,
    q_from_loss,
    zpl_enhancement,
)
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"
