"""bellcert: certification toolkit for event-ready CHSH Bell tests.

Computes S-parameters and rigorous LHV-exclusion P-value bounds from trial
records, simulates adversarial local and quantum sources to validate those
bounds, audits random-setting bit streams, and verifies spacelike-separation
timing budgets.
"""

__version__ = "0.1.0"

from .events import (  # noqa: F401
    PSI_MINUS,
    PSI_PLUS,
    CellCounts,
    CorrelationTable,
    EstimatorMethod,
    RunDataset,
    SEstimate,
    Setting,
    SettingAngles,
    TrialRecord,
    combine_states,
    correlator,
    g_sign,
    s_combined_event_based,
    s_event_based,
    s_per_state,
    wins,
    wins_by_herald,
)
from .pvalues import (  # noqa: F401
    PValueReport,
    Predictability,
    binomial_tail,
    lhv_s_bound,
    pvalue_game,
    pvalue_martingale,
)
from .lhv import (  # noqa: F401
    DeterministicStrategy,
    HeraldModel,
    OutcomeModel,
    SettingSource,
    enumerate_strategies,
    expected_event_rate,
    optimal_biased_expected_s,
    quantum_correlator,
    simulate_run,
    validate_bound,
)
from .report import CertificationReport, RunManifest, analyze, analyze_dataset  # noqa: F401
