"""Delayed consensus for networks mixing integer- and fractional-order agents:
simulation, analytic delay bounds, and frequency-domain stability certificates.
"""

from .bounds import (
    BoundReport,
    InapplicableBoundError,
    bound_report,
    degree_delay_bound,
    gain_delay_curve,
    integer_delay_bound,
    max_gain_for_delay,
    mixed_order_delay_bound,
    shared_delay_bound,
    spectral_delay_bound,
)
from .fracsolve import (
    AgentModel,
    GLCoefficientTable,
    SolverParams,
    Trajectory,
    caputo_of_monomial,
    gamma_value,
    gl_caputo_estimate,
    gl_coefficients,
    simulate,
)
from .freqcert import (
    CertificateResult,
    CrossingEvent,
    DiscMargin,
    LociResult,
    OmegaGrid,
    Verdict,
    certify,
    characteristic_value,
    critical_frequency_criterion,
    crossing_scale,
    disc_margin,
    disc_margin_values,
    eigen_loci,
    omega_grid,
)
from .graph import (
    Digraph,
    LaplacianView,
    Spectrum,
    SpectrumError,
    degree_vector,
    has_spanning_root,
    is_symmetric,
    laplacian,
    spectrum,
)
from .scenario import (
    BisectionBracketError,
    Classification,
    ConvergenceVerdict,
    Scenario,
    ScenarioFormatError,
    bisect_critical_delay,
    classify,
    parse_scenario,
    run_scenario,
    save_scenario,
    scenario_to_dict,
    snap_delay,
    with_uniform_delay,
    write_curve_csv,
    write_trajectory_csv,
)

__version__ = "0.1.0"
