//! Parameter sweeps over one axis of a base config.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_monte_carlo, Delivery, Experiment, Placement, RateSummary, SimConfig};
use crate::error::{invalid, Result};

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    K,
    A,
    /// The product `a*k`: every integer factor pair is evaluated and the
    /// pair with the minimum mean rate is reported.
    Ak,
    N,
    Beta,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::K => "k",
            SweepAxis::A => "a",
            SweepAxis::Ak => "ak",
            SweepAxis::N => "n",
            SweepAxis::Beta => "beta",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(SweepAxis::K),
            "a" => Ok(SweepAxis::A),
            "ak" => Ok(SweepAxis::Ak),
            "n" => Ok(SweepAxis::N),
            "beta" => Ok(SweepAxis::Beta),
            other => Err(invalid(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// One output row; exactly the fields of the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Swept axis name, or `single` for a plain run.
    pub axis: String,
    pub value: f64,
    pub placement: Placement,
    pub delivery: Delivery,
    pub mean_rate: f64,
    pub stddev: f64,
    pub ci95: f64,
    pub iterations: u32,
    pub seed: u64,
    /// Storage lower bound at this point, when requested.
    pub lower_bound: Option<f64>,
}

/// A fully populated experiment description: base config, optional sweep,
/// the delivery policies to compare, and whether to tabulate the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub config: SimConfig,
    pub axis: Option<SweepAxis>,
    pub values: Vec<f64>,
    pub deliveries: Vec<Delivery>,
    pub with_lower_bound: bool,
}

impl SweepSpec {
    /// A single-point spec running just the base config.
    pub fn single(config: SimConfig) -> SweepSpec {
        let delivery = config.delivery;
        SweepSpec {
            config,
            axis: None,
            values: Vec::new(),
            deliveries: vec![delivery],
            with_lower_bound: false,
        }
    }
}

fn positive_integer(axis: SweepAxis, value: f64) -> Result<u32> {
    if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
        return Err(invalid(format!(
            "sweep axis {axis} needs positive integers, got {value}"
        )));
    }
    Ok(value as u32)
}

/// Applies one axis value to a copy of the base config. `Ak` is handled by
/// the sweep loop itself.
fn apply_axis(base: &SimConfig, axis: SweepAxis, value: f64) -> Result<SimConfig> {
    let mut config = base.clone();
    match axis {
        SweepAxis::K => config.k = positive_integer(axis, value)?,
        SweepAxis::A => config.a = positive_integer(axis, value)?,
        SweepAxis::N => config.n = positive_integer(axis, value)?,
        SweepAxis::Beta => {
            if !value.is_finite() || value < 0.0 {
                return Err(invalid(format!("beta sweep value {value} must be >= 0")));
            }
            config.beta = value;
        }
        SweepAxis::Ak => unreachable!("factor pairs are expanded by the caller"),
    }
    Ok(config)
}

/// Integer factor pairs `(a, k)` of `value`, ascending in `a`.
fn factor_pairs(value: u32) -> Vec<(u32, u32)> {
    (1..=value)
        .filter(|a| value.is_multiple_of(*a))
        .map(|a| (a, value / a))
        .collect()
}

fn summarize(
    axis_name: &str,
    value: f64,
    config: &SimConfig,
    summary: &RateSummary,
    lower_bound: Option<f64>,
) -> SweepRow {
    SweepRow {
        axis: axis_name.to_string(),
        value,
        placement: config.placement,
        delivery: config.delivery,
        mean_rate: summary.mean,
        stddev: summary.stddev,
        ci95: summary.ci95_halfwidth,
        iterations: summary.iterations,
        seed: config.master_seed,
        lower_bound,
    }
}

fn point_lower_bound(config: &SimConfig) -> Result<f64> {
    let experiment = Experiment::prepare(config)?;
    experiment.lower_bound()
}

/// Sweeps `axis` over `values` with the base config's single delivery
/// policy. One row per value; deterministic.
pub fn run_sweep(base: &SimConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    run_policy_sweep(base, Some(axis), values, false)
}

fn run_policy_sweep(
    base: &SimConfig,
    axis: Option<SweepAxis>,
    values: &[f64],
    with_lower_bound: bool,
) -> Result<Vec<SweepRow>> {
    let Some(axis) = axis else {
        let summary = run_monte_carlo(base)?;
        let bound = if with_lower_bound {
            Some(point_lower_bound(base)?)
        } else {
            None
        };
        return Ok(vec![summarize("single", 0.0, base, &summary, bound)]);
    };
    if values.is_empty() {
        return Err(invalid(format!("sweep over {axis} needs at least one value")));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let row = match axis {
            SweepAxis::Ak => {
                let product = positive_integer(axis, value)?;
                // Evaluate every factor pair and keep the minimum mean.
                let mut best: Option<(SimConfig, RateSummary)> = None;
                for (a, k) in factor_pairs(product) {
                    let mut config = base.clone();
                    config.a = a;
                    config.k = k;
                    let summary = run_monte_carlo(&config)?;
                    let better = match &best {
                        Some((_, incumbent)) => summary.mean < incumbent.mean,
                        None => true,
                    };
                    if better {
                        best = Some((config, summary));
                    }
                }
                let (config, summary) = best.expect("at least one factor pair");
                let bound = if with_lower_bound {
                    Some(point_lower_bound(&config)?)
                } else {
                    None
                };
                summarize("ak", value, &config, &summary, bound)
            }
            _ => {
                let config = apply_axis(base, axis, value)?;
                let summary = run_monte_carlo(&config)?;
                let bound = if with_lower_bound {
                    Some(point_lower_bound(&config)?)
                } else {
                    None
                };
                summarize(&axis.to_string(), value, &config, &summary, bound)
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Runs a full spec: every delivery policy over every axis value.
pub fn run_spec(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.deliveries.is_empty() {
        return Err(invalid("spec needs at least one delivery policy"));
    }
    let mut rows = Vec::new();
    for &delivery in &spec.deliveries {
        let mut config = spec.config.clone();
        config.delivery = delivery;
        rows.extend(run_policy_sweep(
            &config,
            spec.axis,
            &spec.values,
            spec.with_lower_bound,
        )?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{BatchSize, CacheCount};

    fn base() -> SimConfig {
        SimConfig {
            n: 30,
            m: CacheCount::Count(15),
            r: BatchSize::Count(10),
            k: 1,
            a: 1,
            beta: 0.3,
            delta: None,
            placement: Placement::Pp,
            delivery: Delivery::Mlp,
            iterations: 40,
            master_seed: 5,
        }
    }

    #[test]
    fn one_row_per_value() {
        let rows = run_sweep(&base(), SweepAxis::K, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|row| row.axis == "k"));
        assert_eq!(rows[1].value, 2.0);
    }

    #[test]
    fn ak_axis_reports_minimum_over_factor_pairs() {
        assert_eq!(factor_pairs(4), vec![(1, 4), (2, 2), (4, 1)]);
        let rows = run_sweep(&base(), SweepAxis::Ak, &[4.0]).unwrap();
        assert_eq!(rows.len(), 1);
        // The reported mean is the minimum across the three pairs.
        let mut means = Vec::new();
        for (a, k) in factor_pairs(4) {
            let mut config = base();
            config.a = a;
            config.k = k;
            means.push(run_monte_carlo(&config).unwrap().mean);
        }
        let min = means.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(rows[0].mean_rate, min);
    }

    #[test]
    fn rejects_bad_sweep_values() {
        assert!(run_sweep(&base(), SweepAxis::K, &[1.5]).is_err());
        assert!(run_sweep(&base(), SweepAxis::K, &[0.0]).is_err());
        assert!(run_sweep(&base(), SweepAxis::K, &[]).is_err());
        assert!("q".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn spec_multiplies_policies_by_values() {
        let spec = SweepSpec {
            config: base(),
            axis: Some(SweepAxis::K),
            values: vec![1.0, 2.0],
            deliveries: vec![Delivery::Mlp, Delivery::Orr],
            with_lower_bound: false,
        };
        let rows = run_spec(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].delivery, Delivery::Mlp);
        assert_eq!(rows[3].delivery, Delivery::Orr);
    }

    #[test]
    fn single_spec_emits_one_row() {
        let rows = run_spec(&SweepSpec::single(base())).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].axis, "single");
        assert_eq!(rows[0].value, 0.0);
        assert_eq!(rows[0].lower_bound, None);
    }
}
