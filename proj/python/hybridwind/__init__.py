"""Wind farm generation, storage dispatch and cost-of-valued-energy models."""

from ._hybridwind import (
    COVE_DISPLAY_SCALE,
    AnnualMetrics,
    ConfigError,
    ContractError,
    DependencyError,
    DispatchTrace,
    FarmSpec,
    HybridWindError,
    StorageSpec,
    annual_report,
    brownian_walk,
    cove,
    cross_correlation,
    lcoe,
    pinball,
    placeholder_storage,
    post_process_step,
    power_curve_similarity,
    rmse,
    run_cli,
    simulate_baseload,
    simulate_requests,
    synth_dataset,
    value_factor,
)

__version__ = "0.1.0"
