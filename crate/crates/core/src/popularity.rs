//! Zipf popularity profiles and i.i.d. request-batch sampling.
//!
//! A catalog of `n` files ranked by popularity follows the Zipf law: the
//! request probability of the file at rank `i` is proportional to `i^-beta`.
//! Batches of requests are drawn i.i.d. from the profile; sampling is a pure
//! function of `(profile, r, seed)` so trials can run on any worker layout
//! and still reproduce bit-identically.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{invalid, Result};
use crate::seed::SimRng;

/// Popularity distribution over a catalog of `n` ranked files.
///
/// Invariants established at construction:
/// - `p` sums to 1 within 1e-12,
/// - `p[i]` is nonincreasing in rank, with `p[i] = p[0] * (i+1)^-beta`,
/// - the cumulative sums used for sampling are monotone and end at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityProfile {
    n: u32,
    beta: f64,
    p: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PopularityProfile {
    /// Number of files in the catalog.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Zipf exponent this profile was built with (0 for explicit profiles).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Probability of the file at 1-based `rank`.
    pub fn p(&self, rank: u32) -> f64 {
        self.p[(rank - 1) as usize]
    }

    /// All probabilities, most popular first.
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    fn from_weights(beta: f64, weights: Vec<f64>) -> Self {
        let total = kahan_sum(weights.iter().copied());
        let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(p.len());
        let mut running = 0.0;
        let mut comp = 0.0;
        for &value in &p {
            // Kahan step keeps the final cumulative within a few ulps of 1.
            let y = value - comp;
            let t = running + y;
            comp = (t - running) - y;
            running = t;
            cumulative.push(running);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        PopularityProfile {
            n: p.len() as u32,
            beta,
            p,
            cumulative,
        }
    }

    /// Escape hatch for non-Zipf catalogs: an explicit probability sequence.
    ///
    /// The sequence must be nonincreasing with positive total mass and is
    /// renormalized to sum to 1.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("profile needs at least one file"));
        }
        if probs.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(invalid("probabilities must be finite and nonnegative"));
        }
        if probs.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("probabilities must be nonincreasing in rank"));
        }
        if kahan_sum(probs.iter().copied()) <= 0.0 {
            return Err(invalid("probabilities must have positive total mass"));
        }
        Ok(Self::from_weights(0.0, probs.to_vec()))
    }
}

/// Builds the Zipf profile for `n` files with exponent `beta`:
/// `p[i] = i^-beta / sum_{j=1..n} j^-beta`.
pub fn zipf_profile(n: u32, beta: f64) -> Result<PopularityProfile> {
    if n == 0 {
        return Err(invalid("catalog size n must be at least 1"));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(invalid(format!(
            "zipf exponent must be finite and >= 0, got {beta}"
        )));
    }
    let weights: Vec<f64> = (1..=n as u64).map(|i| (i as f64).powf(-beta)).collect();
    Ok(PopularityProfile::from_weights(beta, weights))
}

/// One slot's worth of sampled requests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestBatch {
    /// Requested file ranks, each in `1..=n`.
    pub requests: Vec<u32>,
    /// Seed the batch was drawn with, kept for reproducibility audits.
    pub slot_seed: u64,
}

impl RequestBatch {
    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }
}

/// Draws `r` i.i.d. requests from `profile`.
///
/// Inverse-CDF sampling over the precomputed cumulative sum: one uniform
/// draw and one binary search per request. Identical `(profile, r, seed)`
/// always produce an identical batch.
pub fn sample_batch(profile: &PopularityProfile, r: u32, seed: u64) -> Result<RequestBatch> {
    if r == 0 {
        return Err(invalid("batch size r must be at least 1"));
    }
    let mut rng = SimRng::seed_from_u64(seed);
    let cdf = &profile.cumulative;
    let requests = (0..r)
        .map(|_| {
            let u: f64 = rng.gen::<f64>();
            let idx = cdf.partition_point(|&c| c <= u);
            (idx.min(cdf.len() - 1) + 1) as u32
        })
        .collect();
    Ok(RequestBatch {
        requests,
        slot_seed: seed,
    })
}

/// Tallies a batch into per-rank request counts; `counts[i]` is the number of
/// requests for the file at rank `i+1` and the counts sum to `r`.
pub fn request_counts(batch: &RequestBatch, n: u32) -> Result<Vec<u32>> {
    let mut counts = vec![0u32; n as usize];
    for &rank in &batch.requests {
        if rank == 0 || rank > n {
            return Err(invalid(format!(
                "request rank {rank} outside catalog 1..={n}"
            )));
        }
        counts[(rank - 1) as usize] += 1;
    }
    Ok(counts)
}

/// Compensated (Kahan) summation; keeps normalization error near one ulp even
/// for million-file catalogs.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for value in values {
        let y = value - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
