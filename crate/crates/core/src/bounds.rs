//! Storage lower bound, value-to-weight diagnostic curve, and the parametric
//! order-envelope reference curves.
//!
//! The lower bound treats storage as a fractional knapsack: a content is
//! worth the probability it is requested at least once, and costs the number
//! of caches needed to absorb its expected requests. The expected broadcast
//! load of any uncoded policy is at least the total value minus the best
//! storable value.

use crate::error::{invalid, Result};
use crate::knapsack::{solve_fractional, KnapsackItem};
use crate::placement::at_least_once;
use crate::popularity::PopularityProfile;

/// Inputs for [`prop1_lower_bound`].
#[derive(Debug, Clone)]
pub struct BoundInputs<'a> {
    pub profile: &'a PopularityProfile,
    pub m: u32,
    pub k: u32,
    pub a: u32,
    pub r: u32,
    /// Per-file sizes in file units; `None` means every file is 1 unit.
    pub sizes: Option<Vec<f64>>,
}

impl<'a> BoundInputs<'a> {
    pub fn unit_sized(profile: &'a PopularityProfile, m: u32, k: u32, a: u32, r: u32) -> Self {
        BoundInputs {
            profile,
            m,
            k,
            a,
            r,
            sizes: None,
        }
    }
}

/// Lower bound on the expected transmission rate of any uncoded policy, in
/// file units.
///
/// `sum_i b_i (1 - (1-p_i)^r) - O*`, where `O*` maximizes the stored value
/// with per-content weight `b_i * max(floor(r p_i / a), 1)` under capacity
/// `m*k`. Identical per-unit items are aggregated into one item per content,
/// which leaves the LP optimum unchanged. Clamped below at 0.
pub fn prop1_lower_bound(inputs: &BoundInputs) -> Result<f64> {
    let profile = inputs.profile;
    let n = profile.n() as usize;
    if inputs.a == 0 || inputs.r == 0 {
        return Err(invalid("a and r must be at least 1"));
    }
    if let Some(sizes) = &inputs.sizes {
        if sizes.len() != n {
            return Err(invalid(format!(
                "got {} sizes for a catalog of {n}",
                sizes.len()
            )));
        }
        if sizes.iter().any(|&b| !b.is_finite() || b <= 0.0) {
            return Err(invalid("file sizes must be positive"));
        }
    }

    let size = |idx: usize| inputs.sizes.as_ref().map_or(1.0, |s| s[idx]);
    let mut total_value = 0.0;
    let items: Vec<KnapsackItem> = (0..n)
        .map(|idx| {
            let p = profile.p(idx as u32 + 1);
            let value = at_least_once(p, inputs.r);
            let weight = ((inputs.r as f64 * p / inputs.a as f64).floor()).max(1.0);
            total_value += size(idx) * value;
            KnapsackItem {
                id: idx,
                value: size(idx) * value,
                weight: size(idx) * weight,
            }
        })
        .collect();
    let capacity = inputs.m as f64 * inputs.k as f64;
    let best_stored = solve_fractional(&items, capacity)?.objective;
    Ok((total_value - best_stored).max(0.0))
}

/// Value-to-weight curve of the storage knapsack, with its predicted peak.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueWeightCurve {
    /// `z[i]` for the content at rank `i+1`.
    pub z: Vec<f64>,
    /// Predicted peak rank `ceil((r p1 / 2a)^(1/beta))`, 1-based.
    pub peak_index: u32,
    /// Ranks at or below the peak whose weight floored to zero and fell back
    /// to the bare value branch.
    pub fallback: Vec<u32>,
}

/// Computes `z_i = (1-(1-p_i)^r) / floor(r p_i / a)` up to the predicted
/// peak and the bare value beyond it.
pub fn value_weight_curve(profile: &PopularityProfile, r: u32, a: u32) -> Result<ValueWeightCurve> {
    let beta = profile.beta();
    if beta <= 0.0 {
        return Err(invalid("value-to-weight curve needs beta > 0"));
    }
    if r == 0 || a == 0 {
        return Err(invalid("r and a must be at least 1"));
    }
    let p1 = profile.p(1);
    let peak = (r as f64 * p1 / (2.0 * a as f64)).powf(1.0 / beta).ceil();
    let peak_index = if peak < 1.0 { 1 } else { peak as u32 };

    let mut z = Vec::with_capacity(profile.n() as usize);
    let mut fallback = Vec::new();
    for rank in 1..=profile.n() {
        let p = profile.p(rank);
        let value = at_least_once(p, r);
        if rank <= peak_index {
            let weight = (r as f64 * p / a as f64).floor();
            if weight >= 1.0 {
                z.push(value / weight);
            } else {
                fallback.push(rank);
                z.push(value);
            }
        } else {
            z.push(value);
        }
    }
    Ok(ValueWeightCurve {
        z,
        peak_index,
        fallback,
    })
}

/// Which theorem's reference curve to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeRegime {
    /// Achievable rate of proportional placement plus optimal matching.
    Thm1Upper,
    /// Floor for any uncoded policy in the flat-popularity regime.
    Thm1Lower,
    /// Floor for any uncoded policy in the skewed regime.
    Thm2Lower,
    /// Achievable rate of knapsack storage plus least-popular matching.
    Thm3Upper,
}

/// Order constants and regime knobs for [`order_envelope`]. The constants are
/// caller-supplied plotting aids, never fitted internally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    /// Decay constant inside the upper-bound exponential.
    pub c1: f64,
    /// Decay constant inside the lower-bound exponential.
    pub c2: f64,
    /// Pooling exponent: `a = m^gamma`.
    pub gamma: f64,
    /// Zipf exponent of the skewed regime.
    pub beta: f64,
    /// Catalog-to-cache ratio `n/m`.
    pub c: f64,
}

/// Evaluates a theorem's reference curve at `(n, k, a)`.
///
/// These are shape references for plots: the skewed-regime power laws are
/// returned bare (the multiplicative order constant is the caller's to
/// apply), while `c1`/`c2` parameterize the exponential decays.
pub fn order_envelope(
    regime: EnvelopeRegime,
    params: &EnvelopeParams,
    n: u32,
    k: u32,
    a: u32,
) -> Result<f64> {
    if !(params.c1 > 0.0 && params.c2 > 0.0) {
        return Err(invalid("envelope constants must be positive"));
    }
    if !(0.0..=1.0).contains(&params.gamma) {
        return Err(invalid("gamma must lie in [0, 1]"));
    }
    if params.c <= 0.0 {
        return Err(invalid("catalog-to-cache ratio c must be positive"));
    }
    let nf = n as f64;
    let kf = k as f64;
    let ak = a as f64 * kf;
    let value = match regime {
        EnvelopeRegime::Thm1Upper => {
            if kf < params.c {
                nf
            } else {
                nf.min(nf * kf * (-params.c1 * ak).exp())
            }
        }
        EnvelopeRegime::Thm1Lower => {
            if kf < params.c {
                nf
            } else {
                nf * (-params.c2 * ak * ak.ln()).exp()
            }
        }
        EnvelopeRegime::Thm2Lower | EnvelopeRegime::Thm3Upper => {
            if params.beta <= 1.0 {
                return Err(invalid("skewed-regime envelopes need beta > 1"));
            }
            if (kf - params.c).abs() <= 1e-9 {
                nf.powf((2.0 - params.beta - params.gamma) / params.beta)
            } else if kf < params.c {
                nf.powf(2.0 - params.beta)
            } else if regime == EnvelopeRegime::Thm2Lower {
                0.0
            } else {
                1.0
            }
        }
    };
    Ok(value)
}
