"""Equilibrium measures on planar self-affine sets with diagonal and
anti-diagonal parts: coding, thermodynamic quantities, dimension reports,
and Monte Carlo verification."""

from .coding import (
    CodedWord,
    ProductSignature,
    TransitionMatrix,
    Word,
    check_mixing,
    coded_word,
    decode_tau,
    encode_omega,
    encode_tau,
    product_signature,
    rho_symbol,
    transition_matrix,
)
from .dimension import (
    DimensionReport,
    LineMapSystem,
    ProjectedDim,
    ProjectedMode,
    check_projection_ssc,
    dimension_report,
    line_system,
    ly_dimension,
    projected_dimension,
)
from .errors import KaenmakiError
from .ifs import (
    AffineMap2D,
    IfsSpec,
    MapKind,
    Rect,
    SeparationReport,
    TransversalityReport,
    UNIT_SQUARE,
    check_strong_separation,
    check_transversality,
    make_spec,
    map_image_rect,
    parse_ifs,
)
from .sampling import (
    Axis,
    Projection,
    SampleSet,
    StripQuery,
    box_count,
    estimate_local_dimension,
    estimate_projected_dim,
    make_strip_query,
    project_point,
    render_attractor,
    sample_symbolic,
    strip_measure_oracle,
    strip_reverse_oracle,
    write_csv,
)
from .thermo import (
    KaenmakiMeasure,
    MarkovGibbs,
    Potential,
    PotentialIndex,
    ThermoSummary,
    affinity_dimension,
    affinity_dimension_detail,
    cylinder_measure_mt,
    entropy,
    gibbs_markov,
    kaenmaki_cylinder,
    kaenmaki_measure,
    level_log_measures,
    log_svf_phi,
    lyapunov_exponents,
    potential,
    pressure,
    quasi_bernoulli_ratio,
    subadditive_pressure_bruteforce,
    submultiplicativity_check,
    svf_phi,
    thermo_summary,
)

__version__ = "0.1.0"
