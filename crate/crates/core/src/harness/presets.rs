//! Canned sweep specifications reproducing the simulation figures.

use std::fmt;
use std::str::FromStr;

use super::{
    BatchSize, CacheCount, Delivery, Placement, SimConfig, SweepAxis, SweepSpec,
};
use crate::error::{invalid, Result};

/// Default master seed for presets; override with `--seed`.
pub const DEFAULT_SEED: u64 = 42;

/// Default Zipf exponent for the skewed-popularity presets. The source
/// figures do not state one; 1.4 sits in the middle of the regime the
/// knapsack policy targets, and the CLI can override it.
pub const DEFAULT_SKEWED_BETA: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Fig8i,
    Fig8ii,
    Fig8iii,
    Fig9i,
    Fig9ii,
    Fig9iii,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::Fig8i,
        PresetName::Fig8ii,
        PresetName::Fig8iii,
        PresetName::Fig9i,
        PresetName::Fig9ii,
        PresetName::Fig9iii,
    ];
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PresetName::Fig8i => "fig8i",
            PresetName::Fig8ii => "fig8ii",
            PresetName::Fig8iii => "fig8iii",
            PresetName::Fig9i => "fig9i",
            PresetName::Fig9ii => "fig9ii",
            PresetName::Fig9iii => "fig9iii",
        })
    }
}

impl FromStr for PresetName {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig8i" => Ok(PresetName::Fig8i),
            "fig8ii" => Ok(PresetName::Fig8ii),
            "fig8iii" => Ok(PresetName::Fig8iii),
            "fig9i" => Ok(PresetName::Fig9i),
            "fig9ii" => Ok(PresetName::Fig9ii),
            "fig9iii" => Ok(PresetName::Fig9iii),
            other => Err(invalid(format!("unknown preset `{other}`"))),
        }
    }
}

fn flat_base(n: u32, m: u32, r: u32) -> SimConfig {
    SimConfig {
        n,
        m: CacheCount::Count(m),
        r: BatchSize::Count(r),
        k: 1,
        a: 1,
        beta: 0.3,
        delta: None,
        placement: Placement::Pp,
        delivery: Delivery::Mlp,
        iterations: 1000,
        master_seed: DEFAULT_SEED,
    }
}

fn skewed_base() -> SimConfig {
    SimConfig {
        n: 1000,
        m: CacheCount::Count(100),
        r: BatchSize::Rho(1.0),
        k: 3,
        a: 1,
        beta: DEFAULT_SKEWED_BETA,
        delta: None,
        placement: Placement::Ks,
        delivery: Delivery::Mlp,
        iterations: 10_000,
        master_seed: DEFAULT_SEED,
    }
}

/// Returns the fully populated sweep spec for a named figure panel.
///
/// - `fig8i`: flat popularity (beta 0.3), n = m = 1000, r = 800, storage
///   sweep k = 1..6 at a = 1, MLP/ORR/OLLR.
/// - `fig8ii`: same cluster, pooling sweep a = 1..6 at k = 1.
/// - `fig8iii`: n = m = 100, r = 80, sweep over the product ak = 1..6,
///   including OMR.
/// - `fig9i`: skewed popularity, n = 5m, r = m, k = 3, catalog sweep
///   n in {250, 500, 1000, 2000}, KS with MLP/ORR plus the lower bound.
/// - `fig9ii`: n = 1000, m = r = 100, storage sweep k = 1..6.
/// - `fig9iii`: n = 1000, m = r = 200, k = 3, Zipf sweep
///   beta in {1.1, 1.3, 1.5, 1.7, 1.9}.
pub fn figure_preset(name: PresetName) -> SweepSpec {
    match name {
        PresetName::Fig8i => {
            let mut config = flat_base(1000, 1000, 800);
            config.a = 2;
            SweepSpec {
                config,
                axis: Some(SweepAxis::K),
                values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                deliveries: vec![Delivery::Mlp, Delivery::Orr, Delivery::Ollr],
                with_lower_bound: false,
            }
        }
        PresetName::Fig8ii => SweepSpec {
            config: flat_base(1000, 1000, 800),
            axis: Some(SweepAxis::A),
            values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            deliveries: vec![Delivery::Mlp, Delivery::Orr, Delivery::Ollr],
            with_lower_bound: false,
        },
        PresetName::Fig8iii => {
            let mut config = flat_base(100, 100, 80);
            config.delivery = Delivery::Omr;
            SweepSpec {
                config,
                axis: Some(SweepAxis::Ak),
                values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                deliveries: vec![
                    Delivery::Omr,
                    Delivery::Mlp,
                    Delivery::Orr,
                    Delivery::Ollr,
                ],
                with_lower_bound: false,
            }
        }
        PresetName::Fig9i => {
            let mut config = skewed_base();
            config.n = 250;
            config.m = CacheCount::Ratio(5.0);
            SweepSpec {
                config,
                axis: Some(SweepAxis::N),
                values: vec![250.0, 500.0, 1000.0, 2000.0],
                deliveries: vec![Delivery::Mlp, Delivery::Orr],
                with_lower_bound: true,
            }
        }
        PresetName::Fig9ii => {
            let mut config = skewed_base();
            config.k = 1;
            SweepSpec {
                config,
                axis: Some(SweepAxis::K),
                values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                deliveries: vec![Delivery::Mlp, Delivery::Orr],
                with_lower_bound: true,
            }
        }
        PresetName::Fig9iii => {
            let mut config = skewed_base();
            config.m = CacheCount::Count(200);
            config.beta = 1.1;
            SweepSpec {
                config,
                axis: Some(SweepAxis::Beta),
                values: vec![1.1, 1.3, 1.5, 1.7, 1.9],
                deliveries: vec![Delivery::Mlp, Delivery::Orr],
                with_lower_bound: true,
            }
        }
    }
}
