//! Fractional knapsack solver.
//!
//! Both the Knapsack Storage placement policy and the storage lower bound
//! reduce to the same linear program: pick fractions `x_j` of items to
//! maximize total value subject to a weight budget. The optimum is the greedy
//! by value-to-weight ratio, full on a prefix with at most one fractional
//! item at the cut.

use crate::error::{invalid, Result};

/// One candidate item: probability-like value, positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnapsackItem {
    /// Caller-chosen index, reported back in [`KnapsackSolution::cut_index`].
    pub id: usize,
    pub value: f64,
    pub weight: f64,
}

/// LP-optimal fractional selection.
///
/// `fractions` aligns with the input item order. When items are ranked by
/// nonincreasing value/weight ratio (ties by lower id) the solution is 1 on a
/// prefix, fractional on at most one item, 0 afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    pub fractions: Vec<f64>,
    pub objective: f64,
    /// `id` of the single item with `0 < x < 1`, if any.
    pub cut_index: Option<usize>,
}

/// Relative tolerance for capacity comparisons; prefix sums of weights are
/// floating-point.
const CAPACITY_REL_TOL: f64 = 1e-9;

/// Solves `max sum x_j v_j` s.t. `sum x_j w_j <= capacity`, `0 <= x_j <= 1`.
///
/// Greedy in decreasing value-to-weight ratio, ratio ties broken by lower
/// item id. Zero-value items are never selected. O(J log J).
pub fn solve_fractional(items: &[KnapsackItem], capacity: f64) -> Result<KnapsackSolution> {
    if !capacity.is_finite() || capacity < 0.0 {
        return Err(invalid(format!("knapsack capacity must be >= 0, got {capacity}")));
    }
    for item in items {
        if !item.weight.is_finite() || item.weight <= 0.0 {
            return Err(invalid(format!(
                "item {} weight must be positive, got {}",
                item.id, item.weight
            )));
        }
        if !item.value.is_finite() || item.value < 0.0 {
            return Err(invalid(format!(
                "item {} value must be nonnegative, got {}",
                item.id, item.value
            )));
        }
    }

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        let ra = items[a].value / items[a].weight;
        let rb = items[b].value / items[b].weight;
        rb.partial_cmp(&ra)
            .expect("ratios are finite")
            .then_with(|| items[a].id.cmp(&items[b].id))
    });

    let slack = CAPACITY_REL_TOL * capacity.max(1.0);
    let mut fractions = vec![0.0; items.len()];
    let mut objective = 0.0;
    let mut cut_index = None;
    let mut remaining = capacity;
    for &pos in &order {
        let item = &items[pos];
        if item.value == 0.0 {
            // Ratio 0: selecting it cannot raise the objective; keep the
            // solution minimal.
            continue;
        }
        if remaining <= 0.0 {
            break;
        }
        if item.weight <= remaining + slack {
            fractions[pos] = 1.0;
            objective += item.value;
            remaining = (remaining - item.weight).max(0.0);
        } else {
            let x = remaining / item.weight;
            fractions[pos] = x;
            objective += x * item.value;
            cut_index = Some(item.id);
            break;
        }
    }

    Ok(KnapsackSolution {
        fractions,
        objective,
        cut_index,
    })
}
