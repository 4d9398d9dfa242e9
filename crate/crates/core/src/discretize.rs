//! ρ-mean welfare through interval scheduling.
//!
//! The cake is cut into cells small enough that every agent values each cell
//! at most `δε/(2n)`, with `δ = (ε/n²)^(1/ρ)`. Every pair of cut points is a
//! candidate interval for every agent, weighted by the agent's value to the
//! power ρ. A 2-approximate schedule of these candidates maps back to a
//! partial allocation, which is then completed.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::allocation::{
    check_rho, complete_allocation, Allocation, PartialAllocation, WelfareReport,
};
use crate::compare::{pow_rat, Enclosure, DEFAULT_BITS};
use crate::error::{CakeError, Result};
use crate::jisp::{local_ratio, Candidate, CandidateSource, JispInstance, JispSolution};
use crate::model::{CakeInstance, Interval};
use crate::rational::{floor_dyadic, floor_scaled, from_usize, pow, Rat};

/// Default cap on candidate evaluations (`n · k(k−1)/2` for `k` cut points).
pub const DEFAULT_DISCRETIZE_BUDGET: u128 = 2_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutSet {
    pub points: Vec<Rat>,
    pub delta: Rat,
    /// `δε/(2n)`, the per-agent value cap of a cell.
    pub cell_mass: Rat,
}

impl CutSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn interval(&self, l: usize, r: usize) -> Interval {
        Interval::new(self.points[l].clone(), self.points[r].clone())
    }

    /// Largest cut-aligned interval inside `iv`.
    pub fn inscribed(&self, iv: &Interval) -> Interval {
        let Some((l, r)) = iv.bounds() else {
            return Interval::Empty;
        };
        let li = self.points.partition_point(|p| p < l);
        let ri = self.points.partition_point(|p| p <= r);
        if ri == 0 || li >= ri - 1 {
            return Interval::Empty;
        }
        self.interval(li, ri - 1)
    }
}

fn check_epsilon(epsilon: &Rat) -> Result<()> {
    if !epsilon.is_positive() || epsilon > &Rat::one() {
        return Err(CakeError::InvalidParameter(format!(
            "epsilon = {epsilon} outside (0, 1]"
        )));
    }
    Ok(())
}

/// `(ε/n²)^(1/ρ)`: exact when `1/ρ` is an integer, otherwise rounded down to
/// a dyadic within relative `2⁻⁶⁴`. A smaller δ only refines the grid.
pub fn delta(n: usize, rho: &Rat, epsilon: &Rat) -> Result<Rat> {
    let base = epsilon / from_usize(n * n);
    let inv = rho.recip();
    if inv.is_integer() {
        let e = inv.to_integer().to_u32().ok_or_else(|| {
            CakeError::InvalidParameter(format!("1/rho = {inv} too large"))
        })?;
        return Ok(pow(&base, e));
    }
    let enc = pow_rat(&base, &inv, DEFAULT_BITS);
    if enc.lo.is_zero() {
        return Err(CakeError::InvalidParameter(format!(
            "delta for rho = {rho}, epsilon = {epsilon} underflows"
        )));
    }
    let mag = enc.lo.recip().to_integer().bits() as u32;
    Ok(floor_dyadic(&enc.lo, 64 + mag + 1))
}

/// Upper bound on the number of cut points: every cell but the last is worth
/// exactly the cell mass to some agent.
pub fn point_bound(instance: &CakeInstance, cell_mass: &Rat) -> u128 {
    let total: Rat = instance
        .agents
        .iter()
        .fold(Rat::zero(), |acc, a| acc + a.density.total());
    (total / cell_mass)
        .floor()
        .to_integer()
        .to_u128()
        .unwrap_or(u128::MAX)
        .saturating_add(2)
}

/// Candidate evaluations for `k` points and `n` jobs.
pub fn candidate_work(n: usize, k: u128) -> u128 {
    (n as u128).saturating_mul(k.saturating_mul(k.saturating_sub(1)) / 2)
}

fn check_budget(instance: &CakeInstance, cell_mass: &Rat, budget: u128) -> Result<()> {
    let required = candidate_work(instance.n(), point_bound(instance, cell_mass));
    if required > budget {
        return Err(CakeError::BudgetExceeded {
            what: "discretization candidate intervals".into(),
            required,
            budget,
        });
    }
    Ok(())
}

/// Cut points by the minimum-cut sweep.
pub fn build_cut_set(instance: &CakeInstance, rho: &Rat, epsilon: &Rat) -> Result<CutSet> {
    build_cut_set_within(instance, rho, epsilon, u128::MAX)
}

pub fn build_cut_set_within(instance: &CakeInstance, rho: &Rat, epsilon: &Rat, budget: u128) -> Result<CutSet> {
    check_rho(rho)?;
    check_epsilon(epsilon)?;
    let n = instance.n();
    if n == 0 {
        return Err(CakeError::InvalidParameter("instance has no agents".into()));
    }
    let delta = delta(n, rho, epsilon)?;
    let cell_mass = &delta * epsilon / from_usize(2 * n);
    check_budget(instance, &cell_mass, budget)?;
    let end = instance.length.clone();
    let mut points = vec![Rat::zero()];
    let mut x = Rat::zero();
    while x < end {
        let mut next = end.clone();
        for a in &instance.agents {
            if let Some(y) = a.density.leftmost_cut(&x, &cell_mass) {
                if y < next {
                    next = y;
                }
            }
        }
        points.push(next.clone());
        x = next;
    }
    Ok(CutSet {
        points,
        delta,
        cell_mass,
    })
}

/// Every cell is worth at most the cell mass to every agent.
pub fn cell_bound_holds(instance: &CakeInstance, cuts: &CutSet) -> bool {
    cuts.points.windows(2).all(|w| {
        (0..instance.n()).all(|a| instance.value(a, &w[0], &w[1]) <= cuts.cell_mass)
    })
}

/// A discretized instance: exact agent values on cut-aligned intervals.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub cuts: CutSet,
    pub rho: Rat,
    /// `prefix[a][i] = v_a([0, x_i])`.
    pub prefix: Vec<Vec<Rat>>,
}

impl Discretization {
    pub fn num_jobs(&self) -> usize {
        self.prefix.len()
    }

    pub fn value(&self, a: usize, l: usize, r: usize) -> Rat {
        &self.prefix[a][r] - &self.prefix[a][l]
    }

    /// `value^ρ` through the comparison layer.
    pub fn weight(&self, a: usize, l: usize, r: usize) -> Enclosure {
        pow_rat(&self.value(a, l, r), &self.rho, DEFAULT_BITS)
    }

    /// Explicit instance with every index pair for every job. Weights are
    /// exact for `ρ = 1` and rounded down to 64 fractional bits otherwise.
    pub fn to_jisp_instance(&self) -> JispInstance<Rat> {
        let k = self.cuts.len();
        let jobs = (0..self.num_jobs())
            .map(|a| {
                let mut job = Vec::with_capacity(k * (k.saturating_sub(1)) / 2);
                for l in 0..k {
                    for r in l + 1..k {
                        let w = self.weight(a, l, r);
                        let w = match w.exact_value() {
                            Some(v) => v.clone(),
                            None => floor_dyadic(&w.lo, 64),
                        };
                        job.push(Candidate { l, r, w });
                    }
                }
                job
            })
            .collect();
        JispInstance { jobs }
    }

    /// `Σ` of the selected candidates' weights, as an enclosure.
    pub fn solution_weight(&self, sol: &JispSolution) -> Enclosure {
        let mut acc = Enclosure::exact(Rat::zero());
        for (a, sel) in sol.selected.iter().enumerate() {
            if let Some((l, r)) = sel {
                acc = acc.add(&self.weight(a, *l, *r));
            }
        }
        acc
    }
}

/// Cut set plus exact prefix values; the weight matrix stays implicit.
pub fn discretize(instance: &CakeInstance, rho: &Rat, epsilon: &Rat, budget: u128) -> Result<Discretization> {
    let cuts = build_cut_set_within(instance, rho, epsilon, budget)?;
    let prefix = (0..instance.n())
        .map(|a| {
            cuts.points
                .iter()
                .map(|x| instance.agents[a].density.cumulative_at(x))
                .collect()
        })
        .collect();
    Ok(Discretization {
        cuts,
        rho: rho.clone(),
        prefix,
    })
}

pub fn solution_to_partial(instance: &CakeInstance, cuts: &CutSet, sol: &JispSolution) -> Result<PartialAllocation> {
    let mut assigned = vec![Interval::Empty; instance.n()];
    for (a, sel) in sol.selected.iter().enumerate() {
        if let Some((l, r)) = sel {
            if *r >= cuts.len() || l >= r {
                return Err(CakeError::InvalidParameter(format!(
                    "selection ({l}, {r}) of job {a} is not a cut interval"
                )));
            }
            assigned[a] = cuts.interval(*l, *r);
        }
    }
    PartialAllocation::new(assigned, &instance.length)
}

/// Mapping a schedule back preserves welfare: each selected interval is worth
/// exactly its candidate value, so `Σ v_a(I_a)^ρ` and the schedule weight
/// are the same enclosure.
pub fn welfare_matches_weight(instance: &CakeInstance, disc: &Discretization, sol: &JispSolution, partial: &PartialAllocation) -> bool {
    let mut acc = Enclosure::exact(Rat::zero());
    for (a, sel) in sol.selected.iter().enumerate() {
        let v = instance.value_of(a, &partial.assigned[a]);
        match sel {
            Some((l, r)) => {
                if v != disc.value(a, *l, *r) {
                    return false;
                }
            }
            None => {
                if !partial.assigned[a].is_empty() {
                    return false;
                }
            }
        }
        acc = acc.add(&pow_rat(&v, &disc.rho, DEFAULT_BITS));
    }
    acc == disc.solution_weight(sol)
}

// ---------------------------------------------------------------------------
// fast implicit weights

const FRAC_BITS: u32 = 124;
const WEIGHT_BITS: u32 = 62;

enum Power {
    Linear,
    Sqrt,
    General { p: u32, q: u32 },
}

/// Fixed-point view of a discretization: prefix values as `u128` with 124
/// fractional bits, weights as `i128` with 62 fractional bits.
struct FixedWeights {
    prefix: Vec<Vec<u128>>,
    power: Power,
}

fn isqrt(v: u128) -> u128 {
    let mut s = (v as f64).sqrt() as u128;
    while s * s > v {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= v {
        s += 1;
    }
    s
}

impl FixedWeights {
    fn new(disc: &Discretization) -> Result<FixedWeights> {
        let mut prefix = Vec::with_capacity(disc.num_jobs());
        for row in &disc.prefix {
            let fixed: Option<Vec<u128>> = row
                .iter()
                .map(|x| floor_scaled(x, FRAC_BITS).to_u128())
                .collect();
            prefix.push(fixed.ok_or_else(|| {
                CakeError::InvalidParameter("agent values exceed 1; normalize first".into())
            })?);
        }
        let rho = &disc.rho;
        let power = if rho.is_one() {
            Power::Linear
        } else if rho == &Rat::new(1.into(), 2.into()) {
            Power::Sqrt
        } else {
            Power::General {
                p: rho.numer().to_u32().expect("small rho numerator"),
                q: rho.denom().to_u32().expect("small rho denominator"),
            }
        };
        Ok(FixedWeights { prefix, power })
    }

    #[inline]
    fn weight(&self, v: u128) -> i128 {
        match self.power {
            Power::Linear => (v >> (FRAC_BITS - WEIGHT_BITS)) as i128,
            Power::Sqrt => isqrt(v) as i128,
            Power::General { p, q } => {
                // floor((v / 2^124)^(p/q) * 2^62)
                let x = BigUint::from(v).pow(p) << (WEIGHT_BITS * q) as usize;
                let x = x >> (FRAC_BITS * p) as usize;
                x.nth_root(q).to_i128().unwrap_or(i128::MAX)
            }
        }
    }
}

impl CandidateSource for FixedWeights {
    type W = i128;
    fn num_jobs(&self) -> usize {
        self.prefix.len()
    }
    fn num_points(&self) -> usize {
        self.prefix.first().map_or(0, Vec::len)
    }
    fn for_each_ending_at<F: FnMut(usize, usize, i128)>(&self, r: usize, mut f: F) {
        for (a, row) in self.prefix.iter().enumerate() {
            let fr = row[r];
            for (l, fl) in row[..r].iter().enumerate() {
                f(a, l, self.weight(fr - fl));
            }
        }
    }
}

/// Local-ratio schedule of the discretized instance with fixed-point weights.
pub fn solve_discretization(disc: &Discretization) -> Result<JispSolution> {
    Ok(local_ratio(&FixedWeights::new(disc)?))
}

#[derive(Clone, Debug)]
pub struct RhoMeanOutcome {
    pub allocation: Allocation,
    pub report: WelfareReport,
    pub partial: PartialAllocation,
    pub solution: JispSolution,
    pub cut_points: usize,
}

/// Discretize, schedule, map back and complete.
pub fn maximize_rho_mean(instance: &CakeInstance, rho: &Rat, epsilon: &Rat, budget: u128) -> Result<RhoMeanOutcome> {
    if !instance.normalized {
        return Err(CakeError::InvalidParameter(
            "rho-mean maximization needs a normalized instance".into(),
        ));
    }
    if epsilon >= &Rat::one() {
        return Err(CakeError::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    let disc = discretize(instance, rho, epsilon, budget)?;
    let solution = solve_discretization(&disc)?;
    let partial = solution_to_partial(instance, &disc.cuts, &solution)?;
    let allocation = complete_allocation(instance, &partial)?;
    let report = WelfareReport::compute(instance, &allocation.assigned, std::slice::from_ref(rho))?;
    Ok(RhoMeanOutcome {
        allocation,
        report,
        partial,
        solution,
        cut_points: disc.cuts.len(),
    })
}

/// Smallest `ε = 1/m` whose discretization fits `budget`, if any does.
pub fn min_epsilon_for_budget(instance: &CakeInstance, rho: &Rat, budget: u128) -> Option<Rat> {
    let fits = |m: u64| -> bool {
        let eps = Rat::new(BigInt::one(), BigInt::from(m));
        match delta(instance.n(), rho, &eps) {
            Ok(d) => {
                let mass = d * &eps / from_usize(2 * instance.n());
                candidate_work(instance.n(), point_bound(instance, &mass)) <= budget
            }
            Err(_) => false,
        }
    };
    if !fits(1) {
        return None;
    }
    let (mut lo, mut hi) = (1u64, 2u64);
    while fits(hi) {
        lo = hi;
        hi = hi.checked_mul(2)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(Rat::new(BigInt::one(), BigInt::from(lo)))
}

/// `M_ρ` lower bound factor `(2 + 4εe/n)^(-1/ρ)` is awkward to use directly;
/// the equivalent check is `(2 + 4εe/n) · Σ v_out^ρ >= Σ v_ref^ρ`. Returns the
/// enclosure of `2 + 4εe/n`.
pub fn rho_mean_factor(n: usize, epsilon: &Rat) -> Enclosure {
    let e = crate::compare::euler(DEFAULT_BITS);
    let k = epsilon * Rat::from_integer(4.into()) / from_usize(n);
    Enclosure::exact(Rat::from_integer(2.into())).add(&e.scale(&k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{step_density, uniform_agent, Agent};
    use crate::rational::{int, rat};

    fn two_uniform() -> CakeInstance {
        CakeInstance::checked(vec![uniform_agent("a"), uniform_agent("b")], true).unwrap()
    }

    #[test]
    fn uniform_pair_cut_set() {
        let c = two_uniform();
        let cuts = build_cut_set(&c, &int(1), &int(1)).unwrap();
        assert_eq!(cuts.delta, rat(1, 4));
        assert_eq!(cuts.cell_mass, rat(1, 16));
        assert_eq!(cuts.len(), 17);
        assert_eq!(cuts.points, (0..=16).map(|i| rat(i, 16)).collect::<Vec<_>>());
        assert!(cell_bound_holds(&c, &cuts));
    }

    #[test]
    fn solo_cut_set() {
        let c = CakeInstance::checked(vec![uniform_agent("solo")], true).unwrap();
        let cuts = build_cut_set(&c, &int(1), &int(1)).unwrap();
        assert_eq!(cuts.points, vec![int(0), rat(1, 2), int(1)]);
    }

    #[test]
    fn irrational_delta_rounds_down() {
        // (1/4)^(3/2) = 1/8 exactly, (1/2)^(3/2) is irrational
        assert_eq!(delta(2, &rat(2, 3), &int(1)).unwrap(), rat(1, 8));
        let d = delta(1, &rat(2, 3), &rat(1, 2)).unwrap();
        let cube = pow(&d, 2);
        assert!(cube < rat(1, 8));
        assert!(rat(1, 8) - cube < rat(1, 1 << 60));
    }

    #[test]
    fn discretized_uniform_pair() {
        let c = two_uniform();
        let d = discretize(&c, &int(1), &int(1), DEFAULT_DISCRETIZE_BUDGET).unwrap();
        let j = d.to_jisp_instance();
        assert_eq!(j.jobs.len(), 2);
        assert!(j.jobs.iter().all(|job| job.len() == 136));
        let w = j.jobs[0].iter().find(|c| c.l == 0 && c.r == 8).unwrap();
        assert_eq!(w.w, rat(1, 2));
        let pair = CakeInstance::checked(
            vec![
                Agent {
                    name: "left".into(),
                    density: step_density(int(0), rat(1, 2), int(2)),
                },
                Agent {
                    name: "right".into(),
                    density: step_density(rat(1, 2), int(1), int(2)),
                },
            ],
            true,
        )
        .unwrap();
        let d = discretize(&pair, &rat(1, 2), &int(1), DEFAULT_DISCRETIZE_BUDGET).unwrap();
        assert_eq!(d.value(1, 0, 1), int(0));
        assert_eq!(d.weight(1, 0, 1), Enclosure::exact(int(0)));
    }

    #[test]
    fn mapping_back() {
        let c = two_uniform();
        let d = discretize(&c, &int(1), &int(1), DEFAULT_DISCRETIZE_BUDGET).unwrap();
        let empty = JispSolution {
            selected: vec![None, None],
        };
        let p = solution_to_partial(&c, &d.cuts, &empty).unwrap();
        assert_eq!(p, PartialAllocation::empty(2));
        let sol = JispSolution {
            selected: vec![Some((0, 8)), None],
        };
        let p = solution_to_partial(&c, &d.cuts, &sol).unwrap();
        assert_eq!(p.assigned[0], Interval::new(int(0), rat(1, 2)));
        assert!(welfare_matches_weight(&c, &d, &sol, &p));
    }

    #[test]
    fn budget_exceeded_reports_size() {
        let c = two_uniform();
        match discretize(&c, &rat(1, 2), &rat(1, 10), 1000) {
            Err(CakeError::BudgetExceeded { required, budget, .. }) => {
                assert!(required > budget);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(min_epsilon_for_budget(&c, &int(1), 1000).is_none());
        let m = min_epsilon_for_budget(&c, &int(1), 100_000).unwrap();
        assert!(discretize(&c, &int(1), &m, 100_000).is_ok());
        let finer = &m * rat(9, 10);
        assert!(discretize(&c, &int(1), &finer, 100_000).is_err());
    }

    #[test]
    fn uniform_pair_rho_one() {
        let c = two_uniform();
        let out = maximize_rho_mean(&c, &int(1), &rat(1, 2), DEFAULT_DISCRETIZE_BUDGET).unwrap();
        // M_1 of the best split is 1/2; the guarantee is (1/2)/(2 + e)
        let m = &out.report.rho_means[0].mean_of_powers;
        let f = rho_mean_factor(2, &rat(1, 2));
        assert!(m.mul(&f).lo >= rat(1, 2));
    }

    #[test]
    fn fixed_sqrt_matches_exact_roots() {
        for v in [1u128, 2, 3, 1 << 100, (1 << 124) - 1, 1 << 124] {
            let s = isqrt(v);
            assert!(s * s <= v && (s + 1) * (s + 1) > v);
        }
    }

    #[test]
    fn inscribed_interval_loses_at_most_two_cells() {
        let c = two_uniform();
        let cuts = build_cut_set(&c, &int(1), &int(1)).unwrap();
        let iv = Interval::new(rat(1, 33), rat(20, 33));
        let ins = cuts.inscribed(&iv);
        assert_eq!(ins, Interval::new(rat(1, 16), rat(9, 16)));
        let loss = c.value_of(0, &iv) - c.value_of(0, &ins);
        assert!(loss <= &cuts.delta * int(1) / int(2)); // δε/n with ε = 1, n = 2
    }
}
