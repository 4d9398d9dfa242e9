//! α-approximate Nash welfare by exhaustive search over a geometric value grid.
//!
//! For every ordering of the agents and every vector of grid targets, cut the
//! cake greedily from the left; the best feasible realization is within a
//! factor α of the optimum.

use num_traits::{One, Zero};

use crate::allocation::{complete_allocation, Allocation, PartialAllocation, WelfareReport};
use crate::error::{CakeError, Result};
use crate::model::{CakeInstance, Interval};
use crate::rational::{from_usize, pow, Rat};

pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueGrid {
    pub levels: Vec<Rat>,
}

/// `{1/nⁿ, α/nⁿ, α²/nⁿ, …}` below 1, then 1.
pub fn value_grid(n: usize, alpha: &Rat) -> Result<ValueGrid> {
    if alpha <= &Rat::one() {
        return Err(CakeError::InvalidParameter(format!("alpha = {alpha} must exceed 1")));
    }
    if n == 0 {
        return Err(CakeError::InvalidParameter("n must be positive".into()));
    }
    let mut x = pow(&from_usize(n), n as u32).recip();
    let mut levels = Vec::new();
    while x < Rat::one() {
        levels.push(x.clone());
        x *= alpha;
    }
    levels.push(Rat::one());
    Ok(ValueGrid { levels })
}

/// Greedy left-to-right realization of `targets` in the order `sigma`.
///
/// A zero target gets the empty interval. The last agent with a positive
/// target takes whatever remains, and the attempt fails if that is worth less
/// than its target. Returns `None` when infeasible.
pub fn realize_value_vector(instance: &CakeInstance, sigma: &[usize], targets: &[Rat]) -> Option<PartialAllocation> {
    let n = instance.n();
    let mut assigned = vec![Interval::Empty; n];
    let last = sigma.iter().rposition(|&a| !targets[a].is_zero());
    let mut x = Rat::zero();
    for (pos, &a) in sigma.iter().enumerate() {
        let t = &targets[a];
        if t.is_zero() {
            continue;
        }
        if Some(pos) == last {
            if instance.value(a, &x, &instance.length) < *t {
                return None;
            }
            assigned[a] = Interval::new(x.clone(), instance.length.clone());
            break;
        }
        let y = instance.cut_query(a, &x, t).ok()?;
        assigned[a] = Interval::new(x.clone(), y.clone());
        x = y;
    }
    Some(PartialAllocation { assigned })
}

#[derive(Clone, Debug)]
pub struct ExhaustiveOutcome {
    pub allocation: Allocation,
    pub report: WelfareReport,
    pub partial: PartialAllocation,
    pub sigma: Vec<usize>,
    pub targets: Vec<Rat>,
    pub realizations: u128,
}

/// `|G|ⁿ · n!`.
pub fn exhaustive_work(n: usize, grid: usize) -> u128 {
    let mut w: u128 = 1;
    for i in 1..=n {
        w = w.saturating_mul(grid as u128).saturating_mul(i as u128);
    }
    w
}

/// Next permutation in lexicographic order; false after the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

pub fn exhaustive_nsw(instance: &CakeInstance, alpha: &Rat, budget: u128) -> Result<ExhaustiveOutcome> {
    if !instance.normalized {
        return Err(CakeError::InvalidParameter(
            "exhaustive search needs a normalized instance".into(),
        ));
    }
    let n = instance.n();
    let grid = value_grid(n, alpha)?;
    let g = grid.levels.len();
    let required = exhaustive_work(n, g);
    if required > budget {
        return Err(CakeError::BudgetExceeded {
            what: "exhaustive Nash search realizations".into(),
            required,
            budget,
        });
    }
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut best: Option<(Rat, Vec<usize>, Vec<Rat>, PartialAllocation)> = None;
    let mut realizations = 0u128;
    loop {
        let mut idx = vec![0usize; n];
        'targets: loop {
            realizations += 1;
            let targets: Vec<Rat> = idx.iter().map(|&i| grid.levels[i].clone()).collect();
            if let Some(p) = realize_value_vector(instance, &sigma, &targets) {
                let product = (0..n).fold(Rat::one(), |acc, a| acc * instance.value_of(a, &p.assigned[a]));
                if best.as_ref().is_none_or(|b| product > b.0) {
                    best = Some((product, sigma.clone(), targets, p));
                }
            }
            // odometer, last coordinate fastest
            for k in (0..n).rev() {
                idx[k] += 1;
                if idx[k] < g {
                    continue 'targets;
                }
                idx[k] = 0;
            }
            break;
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    let (_, sigma, targets, partial) =
        best.ok_or_else(|| CakeError::Internal("no grid vector is realizable".into()))?;
    let allocation = complete_allocation(instance, &partial)?;
    let report = WelfareReport::compute(instance, &allocation.assigned, &[])?;
    Ok(ExhaustiveOutcome {
        allocation,
        report,
        partial,
        sigma,
        targets,
        realizations,
    })
}
