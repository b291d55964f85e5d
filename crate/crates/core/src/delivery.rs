//! Delivery policies: assigning a batch's sub-requests to cache slots.
//!
//! Every request expands into `a` sub-requests, one per part of the file.
//! A cache can serve at most `a` sub-requests per slot (a sub-request is
//! 1/a unit, so its output stays within 1 unit), and only for sub-files it
//! stores. Whatever the caches cannot serve, the central server broadcasts;
//! each distinct sub-file is transmitted once per slot no matter how many
//! requests wanted it.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::error::{invalid, Error, Result};
use crate::placement::{PlacementPlan, SubFileId};
use crate::popularity::RequestBatch;
use crate::seed::SimRng;

/// One part of one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubRequest {
    /// 1-based index of the originating request within the batch.
    pub request_id: u32,
    pub target: SubFileId,
}

/// Per-sub-request outcome: `Some(cache)` (0-based) or `None` for the server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub served_by: Vec<Option<u32>>,
}

impl Assignment {
    /// Checks the service-model invariants against a plan: per-cache load at
    /// most `a`, and caches only serve sub-files they store.
    pub fn validate(&self, plan: &PlacementPlan, subrequests: &[SubRequest], a: u32) -> Result<()> {
        if self.served_by.len() != subrequests.len() {
            return Err(Error::Inconsistency(format!(
                "{} outcomes for {} sub-requests",
                self.served_by.len(),
                subrequests.len()
            )));
        }
        let mut load = vec![0u32; plan.m() as usize];
        for (outcome, sub) in self.served_by.iter().zip(subrequests) {
            if let Some(cache) = outcome {
                if !plan.contains(*cache, sub.target) {
                    return Err(Error::Inconsistency(format!(
                        "cache {} serves {}:{} without storing it",
                        cache + 1,
                        sub.target.content,
                        sub.target.part
                    )));
                }
                load[*cache as usize] += 1;
            }
        }
        if let Some(cache) = load.iter().position(|&l| l > a) {
            return Err(Error::Inconsistency(format!(
                "cache {} serves {} sub-requests, limit {a}",
                cache + 1,
                load[cache]
            )));
        }
        Ok(())
    }
}

/// Final outcome of one slot: the assignment plus the server's share.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryOutcome {
    pub assignment: Assignment,
    /// Distinct sub-files the server transmits this slot.
    pub server_subfiles: BTreeSet<SubFileId>,
    /// Transmission rate in file units: `|server_subfiles| / a`.
    pub rate: f64,
}

/// Expands a batch into `r*a` sub-requests ordered by (request, part).
pub fn split_requests(batch: &RequestBatch, a: u32) -> Vec<SubRequest> {
    let mut out = Vec::with_capacity(batch.len() * a as usize);
    for (idx, &content) in batch.requests.iter().enumerate() {
        for part in 1..=a {
            out.push(SubRequest {
                request_id: idx as u32 + 1,
                target: SubFileId::new(content, part),
            });
        }
    }
    out
}

/// Collects the server's sub-files and the slot's transmission rate.
pub fn finalize(
    assignment: Assignment,
    subrequests: &[SubRequest],
    a: u32,
) -> Result<DeliveryOutcome> {
    if a == 0 {
        return Err(invalid("service limit a must be at least 1"));
    }
    if assignment.served_by.len() != subrequests.len() {
        return Err(Error::Inconsistency(format!(
            "assignment covers {} of {} sub-requests",
            assignment.served_by.len(),
            subrequests.len()
        )));
    }
    let mut server_subfiles = BTreeSet::new();
    for (outcome, sub) in assignment.served_by.iter().zip(subrequests) {
        if outcome.is_none() {
            server_subfiles.insert(sub.target);
        }
    }
    let rate = server_subfiles.len() as f64 / a as f64;
    Ok(DeliveryOutcome {
        assignment,
        server_subfiles,
        rate,
    })
}

/// Mutable matching state shared by the augmenting-path routines.
struct MatchState {
    /// Matched cache per sub-request.
    matched: Vec<Option<u32>>,
    /// Sub-requests currently matched to each cache.
    assigned: Vec<Vec<usize>>,
    capacity: u32,
}

impl MatchState {
    fn new(subrequests: usize, m: u32, capacity: u32) -> Self {
        MatchState {
            matched: vec![None; subrequests],
            assigned: vec![Vec::new(); m as usize],
            capacity,
        }
    }

    fn assign(&mut self, subreq: usize, cache: u32) {
        self.matched[subreq] = Some(cache);
        self.assigned[cache as usize].push(subreq);
    }

    fn unassign(&mut self, subreq: usize, cache: u32) {
        self.matched[subreq] = None;
        let list = &mut self.assigned[cache as usize];
        let pos = list.iter().position(|&x| x == subreq).expect("assigned");
        list.swap_remove(pos);
    }
}

/// Augmenting-path search. `adj[subreq]` lists the caches storing that
/// sub-request's target. Returns true if `subreq` ends up matched.
fn augment(
    subreq: usize,
    adj: &[Vec<u32>],
    state: &mut MatchState,
    visited: &mut [bool],
) -> bool {
    // First look for spare capacity anywhere along the adjacency.
    for &cache in &adj[subreq] {
        if (state.assigned[cache as usize].len() as u32) < state.capacity {
            state.assign(subreq, cache);
            return true;
        }
    }
    // Otherwise try to displace an occupant. The occupant stays assigned
    // while it searches, so its own slot reads as full and it must find a
    // genuinely different home.
    for &cache in &adj[subreq] {
        if visited[cache as usize] {
            continue;
        }
        visited[cache as usize] = true;
        let occupants = state.assigned[cache as usize].clone();
        for other in occupants {
            debug_assert_eq!(state.matched[other], Some(cache));
            if augment(other, adj, state, visited) {
                // The recursive call rebound `other` elsewhere; drop its
                // stale slot here and take it over.
                let list = &mut state.assigned[cache as usize];
                let pos = list.iter().position(|&x| x == other).expect("stale slot");
                list.swap_remove(pos);
                state.assign(subreq, cache);
                return true;
            }
        }
    }
    false
}

/// Optimal Matching Routing: a maximum-cardinality matching between
/// sub-requests and cache slots.
///
/// Equivalent to [`omr_match_seeded`] with a fixed seed; use the seeded
/// variant when comparing policies trial by trial.
pub fn omr_match(plan: &PlacementPlan, subrequests: &[SubRequest], a: u32) -> Result<Assignment> {
    omr_match_seeded(plan, subrequests, a, 0)
}

/// Maximum-cardinality matching, warm-started for a small server set.
///
/// Each heuristic policy run with `seed` (plus a deterministic least-popular
/// group pass) seeds an augmenting-path completion to maximum cardinality.
/// Augmenting never unmatches a sub-request, so each completed candidate's
/// unmatched set is a subset of its heuristic's; the candidate transmitting
/// the fewest distinct sub-files wins. In particular, against the heuristics
/// at the same seed, the result is never worse in rate on any instance.
pub fn omr_match_seeded(
    plan: &PlacementPlan,
    subrequests: &[SubRequest],
    a: u32,
    seed: u64,
) -> Result<Assignment> {
    check_service_limit(plan, a)?;
    let adj: Vec<Vec<u32>> = subrequests
        .iter()
        .map(|sub| plan.holders(sub.target).to_vec())
        .collect();

    let mut candidates = vec![
        greedy_group_matching(plan, subrequests, a, &adj),
        mlp_match(plan, subrequests, a, seed)?,
        orr_match(plan, subrequests, a, seed)?,
        ollr_match(plan, subrequests, a, seed)?,
    ];
    let mut best: Option<(usize, Assignment)> = None;
    for candidate in candidates.drain(..) {
        let completed = complete_to_maximum(plan, a, &adj, candidate);
        let distinct = distinct_unmatched(&completed, subrequests);
        if best.as_ref().is_none_or(|(score, _)| distinct < *score) {
            best = Some((distinct, completed));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

/// Deterministic least-popular-first pass: commit a sub-file group only if
/// augmenting paths can serve all of it, then leave the rest unmatched.
fn greedy_group_matching(
    plan: &PlacementPlan,
    subrequests: &[SubRequest],
    a: u32,
    adj: &[Vec<u32>],
) -> Assignment {
    let m = plan.m();
    let mut by_target: std::collections::BTreeMap<u64, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (idx, sub) in subrequests.iter().enumerate() {
        by_target
            .entry(sub.target.linear_index(a))
            .or_default()
            .push(idx);
    }

    let mut state = MatchState::new(subrequests.len(), m, a);
    for (_, members) in by_target.into_iter().rev() {
        let mut placed = Vec::with_capacity(members.len());
        let mut complete = true;
        for &subreq in &members {
            let mut visited = vec![false; m as usize];
            if augment(subreq, adj, &mut state, &mut visited) {
                placed.push(subreq);
            } else {
                complete = false;
                break;
            }
        }
        if !complete {
            // All or nothing: withdraw so the group cannot crowd out more
            // popular sub-files processed later.
            for &subreq in &placed {
                let cache = state.matched[subreq].expect("placed");
                state.unassign(subreq, cache);
            }
        }
    }
    Assignment {
        served_by: state.matched,
    }
}

/// Augments every unmatched sub-request once, yielding a maximum matching
/// that still serves everything the initial assignment served.
fn complete_to_maximum(
    plan: &PlacementPlan,
    a: u32,
    adj: &[Vec<u32>],
    initial: Assignment,
) -> Assignment {
    let m = plan.m();
    let mut state = MatchState::new(initial.served_by.len(), m, a);
    for (subreq, outcome) in initial.served_by.iter().enumerate() {
        if let Some(cache) = outcome {
            state.assign(subreq, *cache);
        }
    }
    for subreq in 0..state.matched.len() {
        if state.matched[subreq].is_none() {
            let mut visited = vec![false; m as usize];
            augment(subreq, adj, &mut state, &mut visited);
        }
    }
    Assignment {
        served_by: state.matched,
    }
}

fn distinct_unmatched(assignment: &Assignment, subrequests: &[SubRequest]) -> usize {
    let mut targets: Vec<SubFileId> = assignment
        .served_by
        .iter()
        .zip(subrequests)
        .filter(|(outcome, _)| outcome.is_none())
        .map(|(_, sub)| sub.target)
        .collect();
    targets.sort_unstable();
    targets.dedup();
    targets.len()
}

/// Match Least Popular: walk sub-file indices from least to most popular;
/// a sub-file's requests are matched only if the idle slots on the caches
/// storing it can take all of them, otherwise every one goes to the server.
pub fn mlp_match(
    plan: &PlacementPlan,
    subrequests: &[SubRequest],
    a: u32,
    seed: u64,
) -> Result<Assignment> {
    check_service_limit(plan, a)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut served_by: Vec<Option<u32>> = vec![None; subrequests.len()];
    let mut free = vec![a; plan.m() as usize];

    let mut by_target: std::collections::BTreeMap<u64, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (idx, sub) in subrequests.iter().enumerate() {
        by_target
            .entry(sub.target.linear_index(a))
            .or_default()
            .push(idx);
    }

    for (linear, members) in by_target.into_iter().rev() {
        let target = SubFileId::from_linear_index(linear, a);
        let holders = plan.holders(target);
        let idle: u32 = holders.iter().map(|&c| free[c as usize]).sum();
        if members.len() as u32 > idle {
            // All-or-nothing skip: the whole group rides the broadcast.
            continue;
        }
        // Pool of idle slots, one entry per slot; uniform draws without
        // replacement.
        let mut pool: Vec<u32> = Vec::with_capacity(idle as usize);
        for &cache in holders {
            for _ in 0..free[cache as usize] {
                pool.push(cache);
            }
        }
        for subreq in members {
            let pick = rng.gen_range(0..pool.len());
            let cache = pool.swap_remove(pick);
            free[cache as usize] -= 1;
            served_by[subreq] = Some(cache);
        }
    }

    Ok(Assignment { served_by })
}

/// Online Randomized Routing: requests in arrival order, each sub-request to
/// a uniformly random cache that stores the target and has an idle slot.
pub fn orr_match(
    plan: &PlacementPlan,
    subrequests: &[SubRequest],
    a: u32,
    seed: u64,
) -> Result<Assignment> {
    check_service_limit(plan, a)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut served_by: Vec<Option<u32>> = vec![None; subrequests.len()];
    let mut free = vec![a; plan.m() as usize];
    for (idx, sub) in subrequests.iter().enumerate() {
        let candidates: Vec<u32> = plan
            .holders(sub.target)
            .iter()
            .copied()
            .filter(|&c| free[c as usize] > 0)
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let cache = candidates[rng.gen_range(0..candidates.len())];
        free[cache as usize] -= 1;
        served_by[idx] = Some(cache);
    }
    Ok(Assignment { served_by })
}

/// Online Least-loaded Routing: like [`orr_match`] but picking the candidate
/// with the fewest busy slots, ties broken uniformly at random.
pub fn ollr_match(
    plan: &PlacementPlan,
    subrequests: &[SubRequest],
    a: u32,
    seed: u64,
) -> Result<Assignment> {
    check_service_limit(plan, a)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut served_by: Vec<Option<u32>> = vec![None; subrequests.len()];
    let mut free = vec![a; plan.m() as usize];
    for (idx, sub) in subrequests.iter().enumerate() {
        let mut best_free = 0u32;
        let mut ties: Vec<u32> = Vec::new();
        for &cache in plan.holders(sub.target) {
            let available = free[cache as usize];
            if available == 0 {
                continue;
            }
            // Most free slots == least loaded.
            if available > best_free {
                best_free = available;
                ties.clear();
                ties.push(cache);
            } else if available == best_free {
                ties.push(cache);
            }
        }
        if ties.is_empty() {
            continue;
        }
        let cache = ties[rng.gen_range(0..ties.len())];
        free[cache as usize] -= 1;
        served_by[idx] = Some(cache);
    }
    Ok(Assignment { served_by })
}

fn check_service_limit(plan: &PlacementPlan, a: u32) -> Result<()> {
    if a == 0 {
        return Err(invalid("service limit a must be at least 1"));
    }
    if a != plan.a() {
        return Err(invalid(format!(
            "plan was built for a={}, delivery asked for a={a}",
            plan.a()
        )));
    }
    Ok(())
}
