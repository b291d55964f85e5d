//! Flat key/value config files (TOML) mirroring the CLI flags.

use serde::{Deserialize, Serialize};

use super::presets::DEFAULT_SEED;
use super::{
    figure_preset, BatchSize, CacheCount, Delivery, Placement, PresetName, SimConfig, SweepAxis,
    SweepSpec,
};
use crate::error::{invalid, Error, Result};

/// The flat config document. Every key mirrors a CLI flag; unknown keys are
/// rejected. `m`/`c` and `r`/`rho` are mutually exclusive pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// Catalog-to-cache ratio `c = n/m`, an alternative to `m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    /// Request density `rho = r/m`, an alternative to `r`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub placement: Option<String>,
    /// One policy or a comma-separated list, e.g. `"mlp,orr"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delivery: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iters: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `"<axis>=<v1,v2,...>"`, e.g. `"k=1,2,3"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<bool>,
    /// Output shape: `csv` (default) or `json`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// Output path; stdout when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Worker thread count for the Monte Carlo pool.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<ConfigFile> {
        toml::from_str(text).map_err(|err| Error::Parse(err.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Overlay: any key set in `other` wins.
    pub fn merged_with(&self, other: &ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($field:ident) => {
                other.$field.clone().or_else(|| self.$field.clone())
            };
        }
        ConfigFile {
            preset: pick!(preset),
            n: pick!(n),
            m: pick!(m),
            c: pick!(c),
            r: pick!(r),
            rho: pick!(rho),
            k: pick!(k),
            a: pick!(a),
            beta: pick!(beta),
            delta: pick!(delta),
            placement: pick!(placement),
            delivery: pick!(delivery),
            iters: pick!(iters),
            seed: pick!(seed),
            sweep: pick!(sweep),
            lower_bound: pick!(lower_bound),
            format: pick!(format),
            out: pick!(out),
            workers: pick!(workers),
        }
    }

    /// Builds the experiment spec this document describes. Starts from the
    /// named preset when one is given, otherwise from required explicit keys;
    /// explicit keys override preset values either way.
    pub fn to_spec(&self) -> Result<SweepSpec> {
        if self.m.is_some() && self.c.is_some() {
            return Err(invalid("m and c are mutually exclusive"));
        }
        if self.r.is_some() && self.rho.is_some() {
            return Err(invalid("r and rho are mutually exclusive"));
        }

        let mut spec = match &self.preset {
            Some(name) => figure_preset(name.parse::<PresetName>()?),
            None => {
                let n = self.n.ok_or_else(|| invalid("n is required"))?;
                let m = match (self.m, self.c) {
                    (Some(m), None) => CacheCount::Count(m),
                    (None, Some(c)) => CacheCount::Ratio(c),
                    _ => return Err(invalid("one of m or c is required")),
                };
                let r = match (self.r, self.rho) {
                    (Some(r), None) => BatchSize::Count(r),
                    (None, Some(rho)) => BatchSize::Rho(rho),
                    _ => return Err(invalid("one of r or rho is required")),
                };
                let config = SimConfig {
                    n,
                    m,
                    r,
                    k: self.k.ok_or_else(|| invalid("k is required"))?,
                    a: self.a.ok_or_else(|| invalid("a is required"))?,
                    beta: self.beta.ok_or_else(|| invalid("beta is required"))?,
                    delta: None,
                    placement: Placement::Pp,
                    delivery: Delivery::Mlp,
                    iterations: 1000,
                    master_seed: DEFAULT_SEED,
                };
                SweepSpec::single(config)
            }
        };

        // Explicit keys override whatever the preset chose.
        if self.preset.is_some() {
            if let Some(n) = self.n {
                spec.config.n = n;
            }
            if let Some(m) = self.m {
                spec.config.m = CacheCount::Count(m);
            }
            if let Some(c) = self.c {
                spec.config.m = CacheCount::Ratio(c);
            }
            if let Some(r) = self.r {
                spec.config.r = BatchSize::Count(r);
            }
            if let Some(rho) = self.rho {
                spec.config.r = BatchSize::Rho(rho);
            }
            if let Some(k) = self.k {
                spec.config.k = k;
            }
            if let Some(a) = self.a {
                spec.config.a = a;
            }
            if let Some(beta) = self.beta {
                spec.config.beta = beta;
            }
        }
        if let Some(delta) = self.delta {
            spec.config.delta = Some(delta);
        }
        if let Some(placement) = &self.placement {
            spec.config.placement = placement.parse()?;
        }
        if let Some(list) = &self.delivery {
            let deliveries = parse_delivery_list(list)?;
            spec.config.delivery = deliveries[0];
            spec.deliveries = deliveries;
        }
        if let Some(iters) = self.iters {
            spec.config.iterations = iters;
        }
        if let Some(seed) = self.seed {
            spec.config.master_seed = seed;
        }
        if let Some(sweep) = &self.sweep {
            let (axis, values) = parse_sweep(sweep)?;
            spec.axis = Some(axis);
            spec.values = values;
        }
        if let Some(flag) = self.lower_bound {
            spec.with_lower_bound = flag;
        }

        // Fail fast on an unusable base config.
        spec.config.resolve()?;
        Ok(spec)
    }

    /// The flat document equivalent to `spec` (experiment keys only).
    pub fn from_spec(spec: &SweepSpec) -> ConfigFile {
        let config = &spec.config;
        let deliveries = spec
            .deliveries
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let (m, c) = match config.m {
            CacheCount::Count(m) => (Some(m), None),
            CacheCount::Ratio(c) => (None, Some(c)),
        };
        let (r, rho) = match config.r {
            BatchSize::Count(r) => (Some(r), None),
            BatchSize::Rho(rho) => (None, Some(rho)),
        };
        ConfigFile {
            preset: None,
            n: Some(config.n),
            m,
            c,
            r,
            rho,
            k: Some(config.k),
            a: Some(config.a),
            beta: Some(config.beta),
            delta: config.delta,
            placement: Some(config.placement.to_string()),
            delivery: Some(deliveries),
            iters: Some(config.iterations),
            seed: Some(config.master_seed),
            sweep: spec.axis.map(|axis| {
                let values = spec
                    .values
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                format!("{axis}={values}")
            }),
            lower_bound: Some(spec.with_lower_bound),
            format: None,
            out: None,
            workers: None,
        }
    }
}

fn parse_delivery_list(list: &str) -> Result<Vec<Delivery>> {
    let deliveries = list
        .split(',')
        .map(|token| token.trim().parse::<Delivery>())
        .collect::<Result<Vec<Delivery>>>()?;
    if deliveries.is_empty() {
        return Err(invalid("delivery list is empty"));
    }
    Ok(deliveries)
}

fn parse_sweep(text: &str) -> Result<(SweepAxis, Vec<f64>)> {
    let (axis, values) = text
        .split_once('=')
        .ok_or_else(|| invalid(format!("sweep must look like axis=v1,v2, got `{text}`")))?;
    let axis: SweepAxis = axis.trim().parse()?;
    let values = values
        .split(',')
        .map(|token| {
            token
                .trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad sweep value `{token}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(invalid("sweep needs at least one value"));
    }
    Ok((axis, values))
}
