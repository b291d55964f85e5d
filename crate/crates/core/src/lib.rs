//! Simulator and analysis toolkit for a cluster of capacity- and
//! service-limited caches fronting a central server.
//!
//! The crate models a time-slotted system: a placement phase replicates
//! sub-files across `m` caches (`k` units of storage each), then each slot a
//! batch of `r` Zipf-distributed requests is assigned to cache service slots
//! (at most `a` sub-requests per cache) by one of four delivery policies,
//! and whatever the caches cannot serve is broadcast once per distinct
//! sub-file by the central server. The crate also computes the matching
//! storage lower bound and reference scaling curves, and ships a Monte Carlo
//! harness with parameter sweeps and figure presets.

pub mod bounds;
pub mod delivery;
pub mod error;
pub mod harness;
pub mod knapsack;
pub mod placement;
pub mod popularity;
pub mod seed;

pub use bounds::{
    order_envelope, prop1_lower_bound, value_weight_curve, BoundInputs, EnvelopeParams,
    EnvelopeRegime, ValueWeightCurve,
};
pub use delivery::{
    finalize, mlp_match, ollr_match, omr_match, omr_match_seeded, orr_match, split_requests,
    Assignment, DeliveryOutcome, SubRequest,
};
pub use error::{Error, Result};
pub use harness::{
    emit_table, figure_preset, parse_table, run_monte_carlo, run_spec, run_sweep, run_trial,
    BatchSize, CacheCount, ConfigFile, Delivery, Experiment, Placement, PresetName, RateSummary,
    ResolvedConfig, SimConfig, SweepAxis, SweepRow, SweepSpec, TableFormat,
};
pub use knapsack::{solve_fractional, KnapsackItem, KnapsackSolution};
pub use placement::{
    ks_place, ks_select, ks_weights, pp_place, pp_replication_counts, PlacementPlan,
    ReplicationCounts, SubFileId,
};
pub use popularity::{
    request_counts, sample_batch, zipf_profile, PopularityProfile, RequestBatch,
};
