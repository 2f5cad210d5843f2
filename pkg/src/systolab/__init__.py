"""Growth functions, volume entropy, and systolic invariants of norms on
finitely generated groups and piecewise-flat simplicial complexes."""

__version__ = "0.1.0"

from .complexes import (
    Edge,
    EdgeLabels,
    MetricComplex,
    complex_to_text,
    load_complex,
    parse_complex,
    subdivide_barycentric,
    subdivide_midpoint,
)
from .covers import CoverFrontier, CoverGeometry, GeometricNorm, expand_cover
from .errors import (
    BudgetExceeded,
    GroupMismatch,
    NotEssential,
    ParseError,
    SystolabError,
    ValidationError,
)
from .groups import (
    FiniteTableGroup,
    FreeAbelianGroup,
    FreeGroup,
    FreeProductGroup,
    Group,
    GroupElement,
    TrivialGroup,
    multiply,
    parse_group,
)
from .growth import (
    EntropyEstimate,
    GrowthTable,
    ball_count,
    entropy_estimate,
    free_product_limit,
    growth_table,
    norm_table,
    sample_radii,
)
from .invariants import (
    StableSystoleResult,
    SystoleResult,
    graph_diameter,
    phi_systole,
    stable_systole,
    systolic_ratio,
    volume,
    volume_entropy,
)
from .norms import (
    Budget,
    FreeProductNorm,
    GeneratorNorm,
    Norm,
    WordNorm,
    eval_norm,
    parse_norm,
)
from .optimize import (
    OptimizeConfig,
    OptimizeResult,
    ScanRow,
    entropy_systole_scan,
    optimize_ratio,
)
from .presentation import (
    PiOneData,
    attach_phi,
    load_phi,
    parse_phi,
    phi_from_labeling,
    phi_to_text,
    presentation,
)
