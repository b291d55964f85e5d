//! Experiment orchestration: seeded Monte Carlo trials, parameter sweeps,
//! figure presets, and CSV/JSON emission.
//!
//! Everything downstream of a [`SimConfig`] is deterministic in the master
//! seed: the placement plan, each trial's batch, and each trial's delivery
//! randomness come from separate derived streams, and summaries are computed
//! from the value-sorted trial rates so worker count and scheduling cannot
//! change a single output byte.

mod config_file;
mod emit;
mod presets;
mod sweep;

pub use config_file::ConfigFile;
pub use emit::{emit_table, parse_table, TableFormat};
pub use presets::{figure_preset, PresetName, DEFAULT_SEED};
pub use sweep::{run_spec, run_sweep, SweepAxis, SweepRow, SweepSpec};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{prop1_lower_bound, BoundInputs};
use crate::delivery::{
    finalize, mlp_match, ollr_match, omr_match_seeded, orr_match, split_requests,
};
use crate::error::{invalid, Result};
use crate::placement::{ks_place, ks_select, ks_weights, pp_place, pp_replication_counts, PlacementPlan};
use crate::popularity::{sample_batch, zipf_profile, PopularityProfile};
use crate::seed::{derive, STREAM_BATCH, STREAM_DELIVERY, STREAM_PLACEMENT};

/// Placement policy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Pp,
    Ks,
}

/// Delivery policy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delivery {
    Omr,
    Mlp,
    Orr,
    Ollr,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Pp => "pp",
            Placement::Ks => "ks",
        })
    }
}

impl FromStr for Placement {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pp" => Ok(Placement::Pp),
            "ks" => Ok(Placement::Ks),
            other => Err(invalid(format!("unknown placement policy `{other}`"))),
        }
    }
}

impl fmt::Display for Delivery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Delivery::Omr => "omr",
            Delivery::Mlp => "mlp",
            Delivery::Orr => "orr",
            Delivery::Ollr => "ollr",
        })
    }
}

impl FromStr for Delivery {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omr" => Ok(Delivery::Omr),
            "mlp" => Ok(Delivery::Mlp),
            "orr" => Ok(Delivery::Orr),
            "ollr" => Ok(Delivery::Ollr),
            other => Err(invalid(format!("unknown delivery policy `{other}`"))),
        }
    }
}

/// Cache count, either absolute or as the catalog-to-cache ratio `c = n/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CacheCount {
    Count(u32),
    Ratio(f64),
}

/// Batch size, either absolute or as the request density `rho = r/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchSize {
    Count(u32),
    Rho(f64),
}

/// One experiment's parameters.
///
/// `m` and `r` may be given as ratios so that sweeps over `n` scale the
/// cluster with the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: u32,
    pub m: CacheCount,
    pub r: BatchSize,
    pub k: u32,
    pub a: u32,
    pub beta: f64,
    /// Tail-band width for knapsack storage; `None` means `(beta - 1) / 2`.
    pub delta: Option<f64>,
    pub placement: Placement,
    pub delivery: Delivery,
    pub iterations: u32,
    pub master_seed: u64,
}

/// A config with ratios resolved to concrete counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub n: u32,
    pub m: u32,
    pub r: u32,
    pub k: u32,
    pub a: u32,
    pub beta: f64,
    pub delta: Option<f64>,
    pub placement: Placement,
    pub delivery: Delivery,
    pub iterations: u32,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        let m = match self.m {
            CacheCount::Count(m) => m,
            CacheCount::Ratio(c) => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(invalid(format!("ratio c must be positive, got {c}")));
                }
                ((self.n as f64 / c).round() as u32).max(1)
            }
        };
        if m == 0 {
            return Err(invalid("m must be at least 1"));
        }
        let r = match self.r {
            BatchSize::Count(r) => r,
            BatchSize::Rho(rho) => {
                if !(rho.is_finite() && rho > 0.0 && rho <= 1.0) {
                    return Err(invalid(format!(
                        "request density rho must lie in (0, 1], got {rho}"
                    )));
                }
                ((rho * m as f64).round() as u32).max(1)
            }
        };
        if r == 0 {
            return Err(invalid("r must be at least 1"));
        }
        if self.k == 0 || self.a == 0 {
            return Err(invalid("k and a must be at least 1"));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(invalid(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        if self.placement == Placement::Ks && self.beta <= 1.0 {
            return Err(invalid(
                "knapsack storage needs beta > 1; use proportional placement for flat catalogs",
            ));
        }
        if let Some(delta) = self.delta {
            if self.placement == Placement::Ks
                && (!delta.is_finite() || delta <= 0.0 || delta >= self.beta - 1.0)
            {
                return Err(invalid(format!(
                    "delta must satisfy 0 < delta < beta - 1, got {delta}"
                )));
            }
        }
        Ok(ResolvedConfig {
            n: self.n,
            m,
            r,
            k: self.k,
            a: self.a,
            beta: self.beta,
            delta: self.delta,
            placement: self.placement,
            delivery: self.delivery,
            iterations: self.iterations,
            master_seed: self.master_seed,
        })
    }
}

impl ResolvedConfig {
    /// Effective knapsack-storage tail parameter: explicit or `(beta-1)/2`.
    pub fn effective_delta(&self) -> f64 {
        self.delta.unwrap_or((self.beta - 1.0) / 2.0)
    }
}

/// A config with its profile and plan built, ready to run trials.
pub struct Experiment {
    pub config: ResolvedConfig,
    pub profile: PopularityProfile,
    pub plan: PlacementPlan,
}

impl Experiment {
    /// Builds the profile and runs the placement phase once. The plan seed is
    /// derived from the master seed on the placement stream.
    pub fn prepare(config: &SimConfig) -> Result<Experiment> {
        let resolved = config.resolve()?;
        let profile = zipf_profile(resolved.n, resolved.beta)?;
        let plan = build_plan(&resolved, &profile)?;
        Ok(Experiment {
            config: resolved,
            profile,
            plan,
        })
    }

    /// Runs one trial: sample the batch, run the configured delivery policy,
    /// return the slot's transmission rate in file units. Deterministic in
    /// `(config, trial_index)`.
    pub fn run_trial(&self, trial_index: u32) -> Result<f64> {
        let config = &self.config;
        let batch_seed = derive(config.master_seed, STREAM_BATCH, trial_index as u64);
        let delivery_seed = derive(config.master_seed, STREAM_DELIVERY, trial_index as u64);
        let batch = sample_batch(&self.profile, config.r, batch_seed)?;
        let subrequests = split_requests(&batch, config.a);
        let assignment = match config.delivery {
            Delivery::Omr => omr_match_seeded(&self.plan, &subrequests, config.a, delivery_seed)?,
            Delivery::Mlp => mlp_match(&self.plan, &subrequests, config.a, delivery_seed)?,
            Delivery::Orr => orr_match(&self.plan, &subrequests, config.a, delivery_seed)?,
            Delivery::Ollr => ollr_match(&self.plan, &subrequests, config.a, delivery_seed)?,
        };
        let outcome = finalize(assignment, &subrequests, config.a)?;
        Ok(outcome.rate)
    }

    /// Lower bound on the expected rate for this experiment's parameters.
    pub fn lower_bound(&self) -> Result<f64> {
        prop1_lower_bound(&BoundInputs::unit_sized(
            &self.profile,
            self.config.m,
            self.config.k,
            self.config.a,
            self.config.r,
        ))
    }
}

fn build_plan(config: &ResolvedConfig, profile: &PopularityProfile) -> Result<PlacementPlan> {
    match config.placement {
        Placement::Pp => {
            let counts = pp_replication_counts(profile, config.m, config.k, config.a)?;
            let seed = derive(config.master_seed, STREAM_PLACEMENT, 0);
            pp_place(&counts, config.m, config.a, seed)
        }
        Placement::Ks => {
            let weights = ks_weights(
                profile,
                config.m,
                config.r,
                config.a,
                config.effective_delta(),
            )?;
            let selection = ks_select(profile, &weights, config.m, config.k, config.r)?;
            ks_place(&selection, config.m, config.a, config.k)
        }
    }
}

/// One trial for a caller-supplied plan; builds the profile on the fly.
pub fn run_trial(config: &SimConfig, plan: &PlacementPlan, trial_index: u32) -> Result<f64> {
    let resolved = config.resolve()?;
    let profile = zipf_profile(resolved.n, resolved.beta)?;
    let experiment = Experiment {
        config: resolved,
        profile,
        plan: plan.clone(),
    };
    experiment.run_trial(trial_index)
}

/// Monte Carlo statistics of one experiment's per-slot rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub mean: f64,
    pub stddev: f64,
    pub ci95_halfwidth: f64,
    pub iterations: u32,
    pub zero_rate_fraction: f64,
}

impl RateSummary {
    /// Builds the summary from trial rates. The rates are sorted by value
    /// first so floating-point accumulation cannot depend on trial order or
    /// worker count.
    pub fn from_rates(rates: &[f64]) -> RateSummary {
        assert!(!rates.is_empty());
        let mut sorted = rates.to_vec();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / count;
        let stddev = if sorted.len() > 1 {
            let ss = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            (ss / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        let ci95_halfwidth = if sorted.len() > 1 {
            1.96 * stddev / count.sqrt()
        } else {
            0.0
        };
        let zeros = sorted.iter().filter(|&&x| x == 0.0).count() as f64;
        RateSummary {
            mean,
            stddev,
            ci95_halfwidth,
            iterations: sorted.len() as u32,
            zero_rate_fraction: zeros / count,
        }
    }
}

/// Runs `config.iterations` independent trials and summarizes them. Trials
/// execute in parallel; the result is independent of the worker count.
pub fn run_monte_carlo(config: &SimConfig) -> Result<RateSummary> {
    let experiment = Experiment::prepare(config)?;
    let rates = (0..experiment.config.iterations)
        .into_par_iter()
        .map(|trial| experiment.run_trial(trial))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RateSummary::from_rates(&rates))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SimConfig {
        SimConfig {
            n: 40,
            m: CacheCount::Count(20),
            r: BatchSize::Count(10),
            k: 2,
            a: 2,
            beta: 0.3,
            delta: None,
            placement: Placement::Pp,
            delivery: Delivery::Mlp,
            iterations: 50,
            master_seed: 42,
        }
    }

    #[test]
    fn resolve_ratios() {
        let mut config = base_config();
        config.m = CacheCount::Ratio(5.0);
        config.r = BatchSize::Rho(1.0);
        let resolved = config.resolve().unwrap();
        assert_eq!(resolved.m, 8);
        assert_eq!(resolved.r, 8);
        config.r = BatchSize::Rho(1.5);
        assert!(config.resolve().is_err());
        config.r = BatchSize::Rho(0.5);
        config.n = 0;
        assert!(config.resolve().is_err());
    }

    #[test]
    fn ks_requires_skewed_popularity() {
        let mut config = base_config();
        config.placement = Placement::Ks;
        assert!(config.resolve().is_err());
        config.beta = 1.4;
        assert!(config.resolve().is_ok());
        config.delta = Some(0.9);
        assert!(config.resolve().is_err());
    }

    #[test]
    fn fully_provisioned_cluster_has_zero_rate() {
        // Every content stored (k >= n/m) and a >= r: nothing rides the
        // broadcast under maximum matching.
        let config = SimConfig {
            n: 4,
            m: CacheCount::Count(8),
            r: BatchSize::Count(2),
            k: 1,
            a: 2,
            beta: 0.0,
            delta: None,
            placement: Placement::Pp,
            delivery: Delivery::Omr,
            iterations: 30,
            master_seed: 7,
        };
        let summary = run_monte_carlo(&config).unwrap();
        assert_eq!(summary.mean, 0.0);
        assert_eq!(summary.zero_rate_fraction, 1.0);
    }

    #[test]
    fn empty_plan_rate_counts_distinct_contents() {
        let config = base_config();
        let resolved = config.resolve().unwrap();
        let plan = PlacementPlan::empty(resolved.m, resolved.a, resolved.k);
        let rate = run_trial(&config, &plan, 3).unwrap();
        // Recompute the expected value from the same derived batch.
        let profile = zipf_profile(resolved.n, resolved.beta).unwrap();
        let batch = sample_batch(
            &profile,
            resolved.r,
            derive(resolved.master_seed, STREAM_BATCH, 3),
        )
        .unwrap();
        let mut distinct = batch.requests.clone();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(rate, distinct.len() as f64);
    }

    #[test]
    fn trials_are_deterministic() {
        let config = base_config();
        let experiment = Experiment::prepare(&config).unwrap();
        for trial in [0u32, 1, 17] {
            let x = experiment.run_trial(trial).unwrap();
            let y = experiment.run_trial(trial).unwrap();
            assert_eq!(x, y);
        }
        let a = run_monte_carlo(&config).unwrap();
        let b = run_monte_carlo(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_iteration_summary_has_no_ci() {
        let mut config = base_config();
        config.iterations = 1;
        let summary = run_monte_carlo(&config).unwrap();
        assert_eq!(summary.iterations, 1);
        assert_eq!(summary.stddev, 0.0);
        assert_eq!(summary.ci95_halfwidth, 0.0);
    }

    #[test]
    fn small_run_mean_is_consistent_with_larger_run() {
        let mut config = base_config();
        config.iterations = 300;
        let small = run_monte_carlo(&config).unwrap();
        config.iterations = 3000;
        let large = run_monte_carlo(&config).unwrap();
        assert!(
            (small.mean - large.mean).abs() <= small.ci95_halfwidth + large.ci95_halfwidth,
            "small {} +- {} vs large {} +- {}",
            small.mean,
            small.ci95_halfwidth,
            large.mean,
            large.ci95_halfwidth
        );
    }

    #[test]
    fn mean_rate_decreases_in_k_on_flat_catalog() {
        // n = m = 100, r = 80, beta = 0.3, fixed a: more storage per cache
        // strictly lowers the broadcast rate beyond the confidence width.
        let mut first: Option<RateSummary> = None;
        let mut previous: Option<RateSummary> = None;
        for k in 1..=6u32 {
            let config = SimConfig {
                n: 100,
                m: CacheCount::Count(100),
                r: BatchSize::Count(80),
                k,
                a: 2,
                beta: 0.3,
                delta: None,
                placement: Placement::Pp,
                delivery: Delivery::Mlp,
                iterations: 1000,
                master_seed: 11,
            };
            let summary = run_monte_carlo(&config).unwrap();
            if let Some(prev) = previous {
                if prev.mean > 0.0 {
                    assert!(
                        summary.mean == 0.0
                            || summary.mean + summary.ci95_halfwidth
                                < prev.mean - prev.ci95_halfwidth,
                        "k={k}: {} not strictly below {}",
                        summary.mean,
                        prev.mean
                    );
                }
            }
            if first.is_none() {
                first = Some(summary);
            }
            previous = Some(summary);
        }
        // Exponential decay: an order of magnitude across the sweep.
        assert!(previous.unwrap().mean < first.unwrap().mean / 10.0);
    }
}
