"""Linear power flow models, flexibility aggregation and storage scheduling.

Thin wrapper over the compiled core; see the individual functions for the
operations (network I/O, AC/DistFlow solves, linear step models, flexibility
envelopes, schedulers, schedule verification and comparison campaigns).
"""

from ._gridflex import (
    Branch,
    Bus,
    BusInjections,
    CampaignConfig,
    DayProfile,
    DistFlowState,
    FlexibilityEnvelope,
    GridflexError,
    Halfspace,
    LinearModel,
    Network,
    PowerFlowState,
    PvUnit,
    ScheduleProblem,
    ScheduleResult,
    StorageUnit,
    VerificationReport,
    Violation,
    base_injections,
    build_envelope,
    build_step_model,
    campaign_config_from_json,
    check_radial,
    default_workday_profile,
    disaggregate_power,
    envelope_from_json,
    generate_campus_like,
    load_campaign_config,
    load_envelope,
    load_network,
    load_profile,
    make_schedule_problem,
    model_feature_row,
    network_from_json,
    network_to_json,
    profile_from_csv,
    run_campaign,
    save_envelope,
    save_network,
    save_profile,
    schedule_ac_benchmark,
    schedule_from_csv,
    schedule_full_linear,
    schedule_over_envelope,
    schedule_summary_json,
    schedule_to_csv,
    solve_ac,
    solve_distflow,
    to_per_unit,
    to_physical_mw,
    total_distflow_losses,
    total_losses,
    validate_network,
    verify_schedule,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
