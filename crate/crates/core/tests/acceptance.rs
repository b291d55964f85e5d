//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Statistical criteria run with fixed master seeds, so every run of this
//! suite evaluates the same trials and the outcomes are reproducible.

use std::collections::HashMap;

use rayon::prelude::*;

use poolsim_core::*;

fn trial_rates(config: &SimConfig) -> Vec<f64> {
    let experiment = Experiment::prepare(config).expect("prepare");
    (0..config.iterations)
        .into_par_iter()
        .map(|trial| experiment.run_trial(trial).expect("trial"))
        .collect()
}

fn mean_summary(config: &SimConfig) -> RateSummary {
    RateSummary::from_rates(&trial_rates(config))
}

/// Least-squares fit of y = intercept + slope * x, returning (slope, r2).
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|p| {
            let predicted = intercept + slope * p.0;
            (p.1 - predicted) * (p.1 - predicted)
        })
        .sum();
    let sst: f64 = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    (slope, 1.0 - sse / sst)
}

fn splitmix(state: &mut u64) -> u64 {
    *state = seed::mix(*state);
    *state
}

// --- criterion 1 -----------------------------------------------------------

/// Exhaustive maximum-matching size by dynamic programming over per-cache
/// free-slot vectors. Independent of the matching implementation under test.
fn exhaustive_max_matching(plan: &PlacementPlan, subs: &[SubRequest], a: u32) -> usize {
    let m = plan.m() as usize;
    let mut states: HashMap<Vec<u32>, usize> = HashMap::new();
    states.insert(vec![a; m], 0);
    for sub in subs {
        let holders: Vec<u32> = plan.holders(sub.target).to_vec();
        let mut next: HashMap<Vec<u32>, usize> = HashMap::new();
        for (free, matched) in states {
            // Route to the server.
            next.entry(free.clone())
                .and_modify(|best| *best = (*best).max(matched))
                .or_insert(matched);
            // Or to any cache with a free slot that stores the target.
            for &cache in &holders {
                if free[cache as usize] > 0 {
                    let mut after = free.clone();
                    after[cache as usize] -= 1;
                    next.entry(after)
                        .and_modify(|best| *best = (*best).max(matched + 1))
                        .or_insert(matched + 1);
                }
            }
        }
        states = next;
    }
    states.into_values().max().unwrap_or(0)
}

#[test]
fn criterion_01_matching_oracle_equivalence() {
    let start = std::time::Instant::now();
    let mut state = 0xA11CEu64;
    let mut checked = 0usize;
    while checked < 600 {
        let m = 1 + (splitmix(&mut state) % 4) as u32;
        let a = 1 + (splitmix(&mut state) % 2) as u32;
        let k = 1 + (splitmix(&mut state) % 2) as u32;
        let n = 2 + (splitmix(&mut state) % 5) as u32;
        let mut budget = m as u64 * k as u64;
        let mut selection = Vec::new();
        for content in 1..=n {
            if budget == 0 {
                break;
            }
            if splitmix(&mut state).is_multiple_of(2) {
                let copies = 1 + splitmix(&mut state) % budget.min(m as u64);
                selection.push((content, copies));
                budget -= copies;
            }
        }
        let Ok(plan) = ks_place(&selection, m, a, k) else {
            continue;
        };
        let total = 1 + (splitmix(&mut state) % 8) as usize;
        let requests: Vec<u32> = (0..total.div_ceil(a as usize))
            .map(|_| 1 + (splitmix(&mut state) % n as u64) as u32)
            .collect();
        let batch = RequestBatch {
            requests,
            slot_seed: 0,
        };
        let subs: Vec<SubRequest> = split_requests(&batch, a).into_iter().take(8).collect();

        let assignment = omr_match(&plan, &subs, a).expect("omr");
        assignment.validate(&plan, &subs, a).expect("valid");
        let got = assignment.served_by.iter().filter(|o| o.is_some()).count();
        let want = exhaustive_max_matching(&plan, &subs, a);
        assert_eq!(got, want, "instance {checked}: {selection:?}");
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[PASS] criterion 1: omr cardinality == exhaustive maximum on {checked} instances ({elapsed:?})");
}

// --- criterion 2 -----------------------------------------------------------

/// Exact LP optimum by enumerating full subsets plus one fractional item.
fn knapsack_oracle(items: &[KnapsackItem], capacity: f64) -> f64 {
    let j = items.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << j) {
        let mut weight = 0.0;
        let mut value = 0.0;
        for (idx, item) in items.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                weight += item.weight;
                value += item.value;
            }
        }
        if weight > capacity * (1.0 + 1e-12) + 1e-12 {
            continue;
        }
        best = best.max(value);
        let spare = capacity - weight;
        for (idx, item) in items.iter().enumerate() {
            if mask & (1 << idx) == 0 && spare > 0.0 {
                best = best.max(value + (spare / item.weight).min(1.0) * item.value);
            }
        }
    }
    best
}

#[test]
fn criterion_02_knapsack_oracle_equivalence() {
    let start = std::time::Instant::now();
    let mut state = 0xBEEFu64;
    for instance in 0..500 {
        let j = 1 + (splitmix(&mut state) % 8) as usize;
        let items: Vec<KnapsackItem> = (0..j)
            .map(|id| KnapsackItem {
                id,
                value: (splitmix(&mut state) % 1000) as f64 / 100.0,
                weight: 0.1 + (splitmix(&mut state) % 1000) as f64 / 100.0,
            })
            .collect();
        let capacity = (splitmix(&mut state) % 4000) as f64 / 100.0;
        let solution = solve_fractional(&items, capacity).expect("solve");
        let oracle = knapsack_oracle(&items, capacity);
        assert!(
            (solution.objective - oracle).abs() <= 1e-9,
            "instance {instance}: greedy {} vs oracle {oracle}",
            solution.objective
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[PASS] criterion 2: fractional knapsack matches brute-force LP on 500 instances ({elapsed:?})");
}

// --- criterion 3 -----------------------------------------------------------

#[test]
fn criterion_03_golden_knapsack_placement() {
    let start = std::time::Instant::now();
    let plan = ks_place(&[(1, 2), (2, 1), (3, 1)], 4, 2, 1).expect("place");
    let golden = "1\t1:1,2:1\n2\t1:2,2:2\n3\t1:1,3:1\n4\t1:2,3:2\n";
    assert_eq!(plan.to_text(), golden);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0);
    println!("[PASS] criterion 3: worked placement example reproduced exactly ({elapsed:?})");
}

// --- criteria 4 and 5 share the flat-popularity product sweep --------------

fn fig8iii_config(delivery: Delivery, a: u32, k: u32) -> SimConfig {
    SimConfig {
        n: 100,
        m: CacheCount::Count(100),
        r: BatchSize::Count(80),
        k,
        a,
        beta: 0.3,
        delta: None,
        placement: Placement::Pp,
        delivery,
        iterations: 1000,
        master_seed: 42,
    }
}

fn factor_pairs(value: u32) -> Vec<(u32, u32)> {
    (1..=value)
        .filter(|a| value.is_multiple_of(*a))
        .map(|a| (a, value / a))
        .collect()
}

#[test]
fn criterion_04_exponential_decay_in_ak() {
    let start = std::time::Instant::now();
    let policies = [Delivery::Omr, Delivery::Mlp, Delivery::Orr, Delivery::Ollr];
    for policy in policies {
        let mut points = Vec::new();
        for ak in 1..=6u32 {
            let best = factor_pairs(ak)
                .into_iter()
                .map(|(a, k)| mean_summary(&fig8iii_config(policy, a, k)).mean)
                .fold(f64::INFINITY, f64::min);
            if best > 1.0 {
                points.push((ak as f64, best.ln()));
            }
        }
        assert!(points.len() >= 3, "{policy}: too few points above rate 1");
        let (slope, r2) = linear_fit(&points);
        assert!(
            slope < 0.0 && r2 >= 0.9,
            "{policy}: slope {slope:.3}, r2 {r2:.3} over {points:?}"
        );
        println!(
            "  {policy}: ln(rate) vs ak slope {slope:.3}, r2 {r2:.3} on {} points",
            points.len()
        );
    }
    println!(
        "[PASS] criterion 4: mean rate decays exponentially in ak for all four policies ({:?})",
        start.elapsed()
    );
}

#[test]
fn criterion_05_policy_ordering() {
    let start = std::time::Instant::now();
    for ak in 1..=6u32 {
        let mut best: HashMap<&str, RateSummary> = HashMap::new();
        for (a, k) in factor_pairs(ak) {
            // Per-instance dominance: same batches, same delivery seeds.
            let omr = trial_rates(&fig8iii_config(Delivery::Omr, a, k));
            let mlp = trial_rates(&fig8iii_config(Delivery::Mlp, a, k));
            for (trial, (x, y)) in omr.iter().zip(&mlp).enumerate() {
                assert!(
                    x <= y,
                    "ak={ak} a={a} k={k} trial {trial}: omr {x} > mlp {y}"
                );
            }
            let orr = trial_rates(&fig8iii_config(Delivery::Orr, a, k));
            let ollr = trial_rates(&fig8iii_config(Delivery::Ollr, a, k));
            for (name, rates) in [
                ("omr", omr),
                ("mlp", mlp),
                ("orr", orr),
                ("ollr", ollr),
            ] {
                let summary = RateSummary::from_rates(&rates);
                best.entry(name)
                    .and_modify(|incumbent| {
                        if summary.mean < incumbent.mean {
                            *incumbent = summary;
                        }
                    })
                    .or_insert(summary);
            }
        }
        let mlp = best["mlp"];
        for other in ["orr", "ollr"] {
            let competitor = best[other];
            assert!(
                mlp.mean <= competitor.mean + competitor.ci95_halfwidth,
                "ak={ak}: mlp {} above {other} {} + ci {}",
                mlp.mean,
                competitor.mean,
                competitor.ci95_halfwidth
            );
        }
        assert!(best["omr"].mean <= mlp.mean);
    }
    println!(
        "[PASS] criterion 5: omr <= mlp per instance; mlp <= orr/ollr + ci at every ak ({:?})",
        start.elapsed()
    );
}

// --- criterion 6 ------------------------------------------------------------

#[test]
fn criterion_06_scaling_law() {
    let start = std::time::Instant::now();
    let beta = 1.4;
    let mut points = Vec::new();
    for n in [250u32, 500, 1000, 2000] {
        let config = SimConfig {
            n,
            m: CacheCount::Ratio(5.0),
            r: BatchSize::Rho(1.0),
            k: 3,
            a: 1,
            beta,
            delta: None,
            placement: Placement::Ks,
            delivery: Delivery::Mlp,
            iterations: 2000,
            master_seed: 42,
        };
        let summary = mean_summary(&config);
        points.push(((n as f64).ln(), summary.mean.ln()));
    }
    let (slope, r2) = linear_fit(&points);
    let target = 2.0 - beta;
    assert!(
        (slope - target).abs() <= 0.25,
        "log-log slope {slope:.3} outside {target} +- 0.25 (r2 {r2:.3})"
    );
    println!(
        "[PASS] criterion 6: rate scales as n^{slope:.3} (target {target} +- 0.25, r2 {r2:.3}) ({:?})",
        start.elapsed()
    );
}

// --- criteria 7 and 8 run over the skewed-popularity presets ----------------

/// The Fig-9 preset parameter points with trial counts sized for the suite's
/// time budget (the criteria pin the points, not the preset's 10k trials).
fn fig9_points() -> Vec<(String, SimConfig)> {
    let mut points = Vec::new();
    for name in [PresetName::Fig9i, PresetName::Fig9ii, PresetName::Fig9iii] {
        let spec = figure_preset(name);
        for &value in &spec.values {
            let mut config = spec.config.clone();
            match spec.axis.expect("fig9 presets sweep") {
                SweepAxis::N => config.n = value as u32,
                SweepAxis::K => config.k = value as u32,
                SweepAxis::Beta => config.beta = value,
                other => panic!("unexpected axis {other}"),
            }
            config.delivery = Delivery::Mlp;
            config.iterations = 2000;
            points.push((
                format!("{name} {}={value}", spec.axis.expect("axis")),
                config,
            ));
        }
    }
    points
}

#[test]
fn criterion_07_lower_bound_validity_and_proximity() {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for (label, config) in fig9_points() {
        let experiment = Experiment::prepare(&config).expect("prepare");
        let bound = experiment.lower_bound().expect("bound");
        let rates: Vec<f64> = (0..config.iterations)
            .into_par_iter()
            .map(|trial| experiment.run_trial(trial).expect("trial"))
            .collect();
        let summary = RateSummary::from_rates(&rates);
        // Validity: the bound never exceeds the simulated mean (within ci).
        assert!(
            summary.mean >= bound - summary.ci95_halfwidth,
            "{label}: mean {} below bound {bound}",
            summary.mean
        );
        // Proximity: the soft "very close" factor.
        let ceiling = 3.0 * bound.max(1.0);
        let ratio = summary.mean / bound.max(1.0);
        println!("  {label}: mean {:.3}, bound {bound:.3}, ratio {ratio:.2}", summary.mean);
        if summary.mean > ceiling {
            failures.push(format!("{label}: mean {:.3} > 3*max(bound,1) = {ceiling:.3}", summary.mean));
        }
    }
    if failures.is_empty() {
        println!(
            "[PASS] criterion 7: bound valid and KS+MLP within 3x of it on every point ({:?})",
            start.elapsed()
        );
    } else {
        println!(
            "[FAIL] criterion 7: bound valid everywhere, but the 3x proximity clause fails on \
             {} of 15 points ({:?})",
            failures.len(),
            start.elapsed()
        );
        panic!(
            "proximity clause unattainable with the specified replication weights at desk scale \
             (the asymptotic log^2 m and 4/delta band constants overweight mid/tail contents \
             regardless of log base or delta):\n{}",
            failures.join("\n")
        );
    }
}

#[test]
fn criterion_08_monotonicity() {
    let start = std::time::Instant::now();

    let check_nonincreasing = |label: &str, summaries: &[RateSummary]| {
        for window in summaries.windows(2) {
            let (prev, next) = (window[0], window[1]);
            assert!(
                next.mean <= prev.mean + prev.ci95_halfwidth + next.ci95_halfwidth,
                "{label}: {} -> {} rises beyond ci",
                prev.mean,
                next.mean
            );
        }
    };

    // Storage sweep at fixed pooling (flat popularity).
    for delivery in [Delivery::Mlp, Delivery::Orr, Delivery::Ollr] {
        let summaries: Vec<RateSummary> = (1..=6u32)
            .map(|k| {
                let mut config = fig8iii_config(delivery, 2, k);
                config.n = 1000;
                config.m = CacheCount::Count(1000);
                config.r = BatchSize::Count(800);
                mean_summary(&config)
            })
            .collect();
        check_nonincreasing(&format!("k sweep {delivery}"), &summaries);
    }

    // Pooling sweep at fixed storage (flat popularity).
    for delivery in [Delivery::Mlp, Delivery::Orr, Delivery::Ollr] {
        let summaries: Vec<RateSummary> = (1..=6u32)
            .map(|a| {
                let mut config = fig8iii_config(delivery, a, 1);
                config.n = 1000;
                config.m = CacheCount::Count(1000);
                config.r = BatchSize::Count(800);
                mean_summary(&config)
            })
            .collect();
        check_nonincreasing(&format!("a sweep {delivery}"), &summaries);
    }

    // Storage sweep for knapsack placement (skewed popularity).
    let fig9ii = figure_preset(PresetName::Fig9ii);
    let summaries: Vec<RateSummary> = (1..=6u32)
        .map(|k| {
            let mut config = fig9ii.config.clone();
            config.k = k;
            config.delivery = Delivery::Mlp;
            config.iterations = 1500;
            mean_summary(&config)
        })
        .collect();
    check_nonincreasing("k sweep ks+mlp", &summaries);

    // Zipf-exponent sweep for knapsack placement.
    let fig9iii = figure_preset(PresetName::Fig9iii);
    let summaries: Vec<RateSummary> = [1.1f64, 1.3, 1.5, 1.7, 1.9]
        .iter()
        .map(|&beta| {
            let mut config = fig9iii.config.clone();
            config.beta = beta;
            config.delivery = Delivery::Mlp;
            config.iterations = 1500;
            mean_summary(&config)
        })
        .collect();
    check_nonincreasing("beta sweep ks+mlp", &summaries);

    println!(
        "[PASS] criterion 8: rate nonincreasing in k, in a, and in beta beyond ci ({:?})",
        start.elapsed()
    );
}

// --- criterion 9 ------------------------------------------------------------

#[test]
fn criterion_09_invariant_suite() {
    let start = std::time::Instant::now();
    let mut state = 0xC0FFEEu64;
    let mut checked = 0usize;
    while checked < 1000 {
        let n = 2 + (splitmix(&mut state) % 28) as u32;
        let m = 2 + (splitmix(&mut state) % 11) as u32;
        let a = 1 + (splitmix(&mut state) % 3) as u32;
        let k = 1 + (splitmix(&mut state) % 3) as u32;
        let skewed = splitmix(&mut state).is_multiple_of(2);
        let beta = if skewed {
            1.05 + (splitmix(&mut state) % 85) as f64 / 100.0
        } else {
            (splitmix(&mut state) % 100) as f64 / 100.0
        };
        let placement = if skewed { Placement::Ks } else { Placement::Pp };
        let delivery = match splitmix(&mut state) % 4 {
            0 => Delivery::Omr,
            1 => Delivery::Mlp,
            2 => Delivery::Orr,
            _ => Delivery::Ollr,
        };
        let config = SimConfig {
            n,
            m: CacheCount::Count(m),
            r: BatchSize::Count(1 + (splitmix(&mut state) % (2 * m as u64)) as u32),
            k,
            a,
            beta,
            delta: None,
            placement,
            delivery,
            iterations: 1,
            master_seed: splitmix(&mut state),
        };
        let Ok(experiment) = Experiment::prepare(&config) else {
            // Placement can be legitimately infeasible (a*d > m); skip.
            continue;
        };

        // Plan invariants.
        experiment.plan.validate().expect("plan invariants");

        // Re-run one slot by hand to check every delivery invariant.
        let resolved = &experiment.config;
        let batch_seed = seed::derive(resolved.master_seed, seed::STREAM_BATCH, 0);
        let delivery_seed = seed::derive(resolved.master_seed, seed::STREAM_DELIVERY, 0);
        let batch = sample_batch(&experiment.profile, resolved.r, batch_seed).expect("batch");
        let subs = split_requests(&batch, resolved.a);
        let assignment = match delivery {
            Delivery::Omr => omr_match_seeded(&experiment.plan, &subs, resolved.a, delivery_seed),
            Delivery::Mlp => mlp_match(&experiment.plan, &subs, resolved.a, delivery_seed),
            Delivery::Orr => orr_match(&experiment.plan, &subs, resolved.a, delivery_seed),
            Delivery::Ollr => ollr_match(&experiment.plan, &subs, resolved.a, delivery_seed),
        }
        .expect("assignment");
        // Slot limit and storage consistency.
        assignment
            .validate(&experiment.plan, &subs, resolved.a)
            .expect("assignment invariants");
        let outcome = finalize(assignment, &subs, resolved.a).expect("finalize");
        // Coverage: every sub-request is served by a cache or broadcast.
        for (decision, sub) in outcome.assignment.served_by.iter().zip(&subs) {
            if decision.is_none() {
                assert!(outcome.server_subfiles.contains(&sub.target));
            }
        }
        // Dedup and rate quantization to 1/a units.
        let recomputed: std::collections::BTreeSet<_> = outcome
            .assignment
            .served_by
            .iter()
            .zip(&subs)
            .filter(|(decision, _)| decision.is_none())
            .map(|(_, sub)| sub.target)
            .collect();
        assert_eq!(recomputed, outcome.server_subfiles);
        let scaled = outcome.rate * resolved.a as f64;
        assert!((scaled - scaled.round()).abs() < 1e-9);
        assert!(outcome.rate >= 0.0);
        assert!(outcome.rate <= resolved.r.min(resolved.n) as f64);

        // The harness reports the same rate for the same trial.
        assert_eq!(experiment.run_trial(0).expect("trial"), outcome.rate);
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("[PASS] criterion 9: all plan/assignment/outcome invariants hold on 1000 random configurations ({elapsed:?})");
}

// --- criterion 10 -----------------------------------------------------------

#[test]
fn criterion_10_value_weight_unimodality() {
    let start = std::time::Instant::now();
    let profile = zipf_profile(100, 1.2).expect("profile");
    let curve = value_weight_curve(&profile, 100, 1).expect("curve");
    let argmax = curve
        .z
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .expect("nonempty")
        .0 as u32
        + 1;
    assert!(
        argmax.abs_diff(curve.peak_index) <= 1,
        "peak at {argmax}, predicted {}",
        curve.peak_index
    );
    // Single peak: nonincreasing past the maximum.
    let tail = &curve.z[(argmax - 1) as usize..];
    assert!(tail.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0);
    println!(
        "[PASS] criterion 10: value-to-weight curve peaks once at rank {argmax} (predicted {}) ({elapsed:?})",
        curve.peak_index
    );
}
