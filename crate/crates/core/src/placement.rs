//! Placement policies: Proportional Placement and Knapsack Storage.
//!
//! Both policies split every file into `a` equal sub-files (1/a unit each)
//! and decide, per content, how many caches hold copies of each sub-file.
//! Proportional Placement replicates in proportion to popularity and keeps
//! parts of one file on distinct caches; Knapsack Storage picks replication
//! counts by solving a fractional knapsack, then deals sub-file copies onto
//! caches round-robin.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{invalid, Error, Result};
use crate::knapsack::{solve_fractional, KnapsackItem};
use crate::popularity::PopularityProfile;
use crate::seed::SimRng;

/// One part of one file; both fields are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubFileId {
    pub content: u32,
    pub part: u32,
}

impl SubFileId {
    pub fn new(content: u32, part: u32) -> Self {
        SubFileId { content, part }
    }

    /// 1-based linear index `(content-1)*a + part`.
    pub fn linear_index(&self, a: u32) -> u64 {
        (self.content as u64 - 1) * a as u64 + self.part as u64
    }

    /// Inverse of [`linear_index`](Self::linear_index).
    pub fn from_linear_index(index: u64, a: u32) -> Self {
        SubFileId {
            content: ((index - 1) / a as u64 + 1) as u32,
            part: ((index - 1) % a as u64 + 1) as u32,
        }
    }
}

/// Immutable output of a placement policy: which sub-files each cache holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementPlan {
    m: u32,
    a: u32,
    k: u32,
    /// Per cache, sorted list of stored sub-files.
    stores: Vec<Vec<SubFileId>>,
    /// Caches holding each sub-file, indexed by `linear_index - 1`.
    holders: Vec<Vec<u32>>,
}

impl PlacementPlan {
    fn from_stores(m: u32, a: u32, k: u32, mut stores: Vec<Vec<SubFileId>>) -> Self {
        let mut max_linear = 0u64;
        for cache in &mut stores {
            cache.sort_unstable();
            if let Some(sub) = cache.last() {
                max_linear = max_linear.max(sub.linear_index(a));
            }
        }
        let mut holders = vec![Vec::new(); max_linear as usize];
        for (cache, subs) in stores.iter().enumerate() {
            for sub in subs {
                holders[(sub.linear_index(a) - 1) as usize].push(cache as u32);
            }
        }
        PlacementPlan {
            m,
            a,
            k,
            stores,
            holders,
        }
    }

    /// An empty plan (nothing cached; everything goes to the server).
    pub fn empty(m: u32, a: u32, k: u32) -> Self {
        Self::from_stores(m, a, k, vec![Vec::new(); m as usize])
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Sorted sub-files stored on `cache` (0-based).
    pub fn store(&self, cache: u32) -> &[SubFileId] {
        &self.stores[cache as usize]
    }

    /// Caches (0-based) holding `sub`; empty if it is not stored anywhere.
    pub fn holders(&self, sub: SubFileId) -> &[u32] {
        let idx = sub.linear_index(self.a) as usize;
        if idx == 0 || idx > self.holders.len() {
            return &[];
        }
        &self.holders[idx - 1]
    }

    pub fn contains(&self, cache: u32, sub: SubFileId) -> bool {
        self.stores[cache as usize].binary_search(&sub).is_ok()
    }

    /// Total stored sub-file copies across all caches.
    pub fn total_subfiles(&self) -> u64 {
        self.stores.iter().map(|s| s.len() as u64).sum()
    }

    /// Checks the plan invariants: no duplicate sub-file on a cache, at most
    /// `a*k` sub-files per cache, at most `m*k` file units in total.
    pub fn validate(&self) -> Result<()> {
        let per_cache_limit = self.a as u64 * self.k as u64;
        for (cache, subs) in self.stores.iter().enumerate() {
            if subs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Inconsistency(format!(
                    "cache {} stores a duplicate sub-file",
                    cache + 1
                )));
            }
            if subs.len() as u64 > per_cache_limit {
                return Err(Error::Inconsistency(format!(
                    "cache {} stores {} sub-files, limit {per_cache_limit}",
                    cache + 1,
                    subs.len()
                )));
            }
        }
        if self.total_subfiles() > self.m as u64 * per_cache_limit {
            return Err(Error::Inconsistency(
                "total stored data exceeds m*k units".into(),
            ));
        }
        Ok(())
    }

    /// Line-oriented debug/golden format: `cache_id<TAB>content:part,...`
    /// with 1-based cache ids, one line per cache.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (cache, subs) in self.stores.iter().enumerate() {
            let _ = write!(out, "{}\t", cache + 1);
            for (idx, sub) in subs.iter().enumerate() {
                if idx > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:{}", sub.content, sub.part);
            }
            out.push('\n');
        }
        out
    }
}

/// Per-content replication counts chosen by Proportional Placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicationCounts {
    /// `d[i]` caches hold each sub-file of the content at rank `i+1`.
    pub d: Vec<u32>,
    pub m: u32,
    pub k: u32,
    /// Set when `n > m*k`: not every content could get a copy, so the
    /// minimum-one-copy rule was dropped and some `d[i]` are zero.
    pub truncated: bool,
}

impl ReplicationCounts {
    pub fn total(&self) -> u64 {
        self.d.iter().map(|&d| d as u64).sum()
    }
}

/// Rounds `m*k*p_i` into integer replication counts.
///
/// Largest-remainder rounding hits `sum d = m*k` exactly; counts are then
/// clamped to `[1, m]` (the floor only when `n <= m*k`) and any excess the
/// floor clamp introduced is removed one copy at a time from the largest
/// count, taking from the least popular content on ties.
pub fn pp_replication_counts(
    profile: &PopularityProfile,
    m: u32,
    k: u32,
    a: u32,
) -> Result<ReplicationCounts> {
    if m == 0 || k == 0 || a == 0 {
        return Err(invalid("m, k and a must all be at least 1"));
    }
    let n = profile.n() as usize;
    let budget = m as u64 * k as u64;
    let truncated = (n as u64) > budget;

    let mut d: Vec<u64> = Vec::with_capacity(n);
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (idx, &p) in profile.probabilities().iter().enumerate() {
        let quota = budget as f64 * p;
        let floor = quota.floor();
        d.push(floor as u64);
        remainders.push((quota - floor, idx));
    }
    let assigned: u64 = d.iter().sum();
    let deficit = budget.saturating_sub(assigned);
    // Largest remainder first; rank breaks ties so rounding is deterministic.
    remainders.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("remainders are finite")
            .then_with(|| a.1.cmp(&b.1))
    });
    for &(_, idx) in remainders.iter().take(deficit as usize) {
        d[idx] += 1;
    }

    if !truncated {
        for count in d.iter_mut() {
            if *count == 0 {
                *count = 1;
            }
        }
    }
    for count in d.iter_mut() {
        if *count > m as u64 {
            *count = m as u64;
        }
    }

    // The floor clamp may have pushed the total above the budget; shave the
    // largest counts back down, least popular first among equals.
    let mut total: u64 = d.iter().sum();
    while total > budget {
        let mut target = 0usize;
        for idx in 1..n {
            if d[idx] >= d[target] {
                target = idx;
            }
        }
        debug_assert!(d[target] > 1);
        d[target] -= 1;
        total -= 1;
    }

    Ok(ReplicationCounts {
        d: d.into_iter().map(|x| x as u32).collect(),
        m,
        k,
        truncated,
    })
}

/// Lays sub-file copies onto caches for Proportional Placement.
///
/// Contents are processed by rank, parts in order, copies dealt round-robin
/// by one cursor that starts at a seeded random offset and runs across the
/// whole placement. Probing skips caches that are full or already hold any
/// part of the content, which keeps every part of one content on distinct
/// caches. Sequential dealing keeps per-cache loads within one sub-file of
/// each other, so the deal cannot strand free slots; a content fails only
/// when `a * d[i] > m`, where its parts cannot all sit on distinct caches.
pub fn pp_place(counts: &ReplicationCounts, m: u32, a: u32, seed: u64) -> Result<PlacementPlan> {
    if m != counts.m {
        return Err(invalid(format!(
            "counts were computed for m={}, placement asked for m={m}",
            counts.m
        )));
    }
    if a == 0 {
        return Err(invalid("service limit a must be at least 1"));
    }
    let k = counts.k;
    let capacity = a as usize * k as usize;
    let mut stores: Vec<Vec<SubFileId>> = vec![Vec::new(); m as usize];
    let mut contents_held: Vec<HashSet<u32>> = vec![HashSet::new(); m as usize];
    let mut rng = SimRng::seed_from_u64(seed);
    let mut cursor = rng.gen_range(0..m) as usize;

    for (idx, &copies) in counts.d.iter().enumerate() {
        if copies == 0 {
            continue;
        }
        let content = idx as u32 + 1;
        for part in 1..=a {
            for _ in 0..copies {
                let mut placed = false;
                for _ in 0..m as usize {
                    let cache = cursor;
                    cursor = (cursor + 1) % m as usize;
                    if stores[cache].len() < capacity && !contents_held[cache].contains(&content) {
                        stores[cache].push(SubFileId::new(content, part));
                        contents_held[cache].insert(content);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(Error::PlacementInfeasible {
                        content,
                        detail: format!(
                            "no cache can take part {part}: a content needs a*d distinct caches \
                             (d={copies} copies of each of {a} parts)"
                        ),
                    });
                }
            }
        }
    }

    Ok(PlacementPlan::from_stores(m, a, k, stores))
}

/// Natural log; the replication-count formulas only fix the base up to the
/// order of the result.
fn log_m(m: u32) -> f64 {
    (m as f64).ln()
}

/// Per-content slot weights for Knapsack Storage.
///
/// `w[0]` covers the most popular content with `ceil(m/a)` caches; a head
/// band sized to absorb all expected requests, a mid band sized by a
/// `log^2 m` concentration margin, and a flat tail band follow. Band edges:
/// `n1 = floor((r p1)^(1/beta) / (log m)^(2/beta))`,
/// `n2 = min(n, floor(m^((1+delta)/beta)))`; bands are evaluated top-down
/// when the edges cross at small scale.
pub fn ks_weights(
    profile: &PopularityProfile,
    m: u32,
    r: u32,
    a: u32,
    delta: f64,
) -> Result<Vec<u64>> {
    let beta = profile.beta();
    if beta <= 1.0 {
        return Err(invalid(format!(
            "knapsack storage needs beta > 1, got {beta}"
        )));
    }
    if m == 0 || r == 0 || a == 0 {
        return Err(invalid("m, r and a must all be at least 1"));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= beta - 1.0 {
        return Err(invalid(format!(
            "delta must satisfy 0 < delta < beta - 1 = {}, got {delta}",
            beta - 1.0
        )));
    }

    let n = profile.n();
    let p1 = profile.p(1);
    let log = log_m(m);
    let n1 = if log > 0.0 {
        let raw = (r as f64 * p1).powf(1.0 / beta) / log.powf(2.0 / beta);
        if raw >= n as f64 {
            n as u64
        } else {
            raw.floor() as u64
        }
    } else {
        // m = 1: the concentration band covers the whole catalog.
        n as u64
    };
    let n2 = {
        let raw = (m as f64).powf((1.0 + delta) / beta);
        if raw >= n as f64 {
            n as u64
        } else {
            raw.floor() as u64
        }
    };

    let head = (m as f64 / a as f64).ceil() as u64;
    let mid = (4.0 * p1 * log * log / a as f64).ceil() as u64;
    let tail = (4.0 / (a as f64 * delta)).ceil() as u64;
    let weights = (1..=n as u64)
        .map(|i| {
            if i == 1 {
                head
            } else if i <= n1 {
                let rp = r as f64 * profile.p(i as u32);
                ((1.0 + p1 / 2.0) * rp / a as f64).ceil() as u64
            } else if i <= n2 {
                mid
            } else {
                tail
            }
        })
        .collect();
    Ok(weights)
}

/// Probability that a content is requested at least once in a batch of `r`.
pub(crate) fn at_least_once(p: f64, r: u32) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    -(r as f64 * (-p).ln_1p()).exp_m1()
}

/// Picks replication counts by fractional knapsack.
///
/// Item `i` has value `1 - (1 - p_i)^r` and weight `weights[i]`; the budget
/// is the pooled cache memory `m*k` (files are 1 unit). Only fully selected
/// items are stored: content `i` contributes `weights[i]` copies, the
/// fractional cut item contributes nothing.
pub fn ks_select(
    profile: &PopularityProfile,
    weights: &[u64],
    m: u32,
    k: u32,
    r: u32,
) -> Result<Vec<(u32, u64)>> {
    if weights.len() != profile.n() as usize {
        return Err(invalid(format!(
            "got {} weights for a catalog of {}",
            weights.len(),
            profile.n()
        )));
    }
    let items: Vec<KnapsackItem> = weights
        .iter()
        .enumerate()
        .map(|(idx, &w)| KnapsackItem {
            id: idx,
            value: at_least_once(profile.p(idx as u32 + 1), r),
            weight: w as f64,
        })
        .collect();
    let solution = solve_fractional(&items, m as f64 * k as f64)?;
    Ok(solution
        .fractions
        .iter()
        .enumerate()
        .filter(|&(_, &x)| x >= 1.0)
        .map(|(idx, _)| (idx as u32 + 1, weights[idx]))
        .collect())
}

/// Deals the selected sub-file copies onto caches.
///
/// Copies are sorted by content index, each copy split into its `a` parts in
/// order, and the copy ranked `l` lands on cache `(l-1) mod m`. If the target
/// already holds that exact sub-file or is full, the copy probes linearly to
/// the next cache.
pub fn ks_place(selection: &[(u32, u64)], m: u32, a: u32, k: u32) -> Result<PlacementPlan> {
    if m == 0 || a == 0 || k == 0 {
        return Err(invalid("m, a and k must all be at least 1"));
    }
    let total_subfiles: u64 = selection.iter().map(|&(_, copies)| copies * a as u64).sum();
    let slots = m as u64 * a as u64 * k as u64;
    if total_subfiles > slots {
        return Err(invalid(format!(
            "selection needs {total_subfiles} sub-file slots but the cluster has {slots}"
        )));
    }

    let mut ordered: Vec<(u32, u64)> = selection.to_vec();
    ordered.sort_unstable_by_key(|&(content, _)| content);

    let capacity = a as usize * k as usize;
    let mut stores: Vec<Vec<SubFileId>> = vec![Vec::new(); m as usize];
    let mut held: Vec<HashSet<SubFileId>> = vec![HashSet::new(); m as usize];
    let mut rank = 0u64;
    for &(content, copies) in &ordered {
        for _ in 0..copies {
            for part in 1..=a {
                let sub = SubFileId::new(content, part);
                let target = (rank % m as u64) as usize;
                rank += 1;
                let mut placed = false;
                for probe in 0..m as usize {
                    let cache = (target + probe) % m as usize;
                    if stores[cache].len() < capacity && !held[cache].contains(&sub) {
                        stores[cache].push(sub);
                        held[cache].insert(sub);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(Error::PlacementInfeasible {
                        content,
                        detail: format!("every cache is full or already holds part {part}"),
                    });
                }
            }
        }
    }

    Ok(PlacementPlan::from_stores(m, a, k, stores))
}
